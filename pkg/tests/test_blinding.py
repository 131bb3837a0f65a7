import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blindpca.blinding import (
    GaussianModel,
    as_subset,
    blind,
    blind_population_gaussian,
    conditional_mean_operator,
)
from blindpca.errors import ArgumentError, NumericError
from blindpca.knn import NeighborConfig
from blindpca.pca import covariance
from blindpca.simgen import example2_true_cov, generate, rng_for, standard_normal


def test_full_subset_is_identity(rng):
    X = rng.normal(size=(30, 4))
    np.testing.assert_array_equal(blind(X, range(4)).values, X)


def test_r_one_is_identity(rng):
    X = rng.normal(size=(30, 4))
    np.testing.assert_array_equal(blind(X, [0], NeighborConfig(r=1)).values, X)


def test_retained_columns_bit_identical(rng):
    X = rng.normal(size=(50, 5))
    Y = blind(X, [1, 3]).values
    assert np.array_equal(Y[:, [1, 3]], X[:, [1, 3]])


def test_records_r_per_blinded_column(rng):
    X = rng.normal(size=(40, 4))
    b = blind(X, [2])
    assert sorted(b.r_used) == [0, 1, 3]
    shared = blind(X, [2], NeighborConfig(shared_r=True))
    assert len(set(shared.r_used.values())) == 1


def test_example1_recovers_abs_v1():
    X = generate("example1-dim4", 100, seed=3)
    Y = blind(X, [0]).values
    assert np.corrcoef(Y[:, 1], np.abs(X[:, 0]))[0, 1] > 0.95


def test_subset_validation():
    assert as_subset([3, 1], 5) == (1, 3)
    for bad in ([], [1, 1], [5], [-1]):
        with pytest.raises(ArgumentError):
            as_subset(bad, 5)


def test_bivariate_population():
    rho = 0.6
    S = blind_population_gaussian(np.array([[1.0, rho], [rho, 1.0]]), [0])
    np.testing.assert_allclose(S, [[1.0, rho], [rho, rho**2]], atol=1e-15)


def test_population_full_subset_returns_cov():
    cov = example2_true_cov().cov
    np.testing.assert_allclose(blind_population_gaussian(cov, range(10)), cov, atol=1e-10)


def test_population_singular_block_fails():
    cov = np.array([[1.0, 1.0, 0.5], [1.0, 1.0, 0.5], [0.5, 0.5, 1.0]])
    with pytest.raises(NumericError):
        conditional_mean_operator(cov, [0, 1])


def test_population_matches_sample_regression():
    # independent check: least-squares fit of X_other on X_I from a large sample
    cov = example2_true_cov().cov
    rng = rng_for(11)
    L = np.linalg.cholesky(cov)
    X = standard_normal(rng, (200_000, 10)) @ L.T
    I = [0, 4]
    B, *_ = np.linalg.lstsq(X[:, I], X, rcond=None)
    Y = X[:, I] @ B
    want = blind_population_gaussian(cov, I)
    assert np.max(np.abs(covariance(Y) - want)) / np.max(np.abs(want)) < 0.02


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 6), st.data())
def test_population_psd_and_retained_block(seed, p, data):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(p, p))
    cov = M @ M.T + 0.1 * np.eye(p)
    I = data.draw(st.lists(st.integers(0, p - 1), min_size=1, max_size=p, unique=True))
    S = blind_population_gaussian(cov, I)
    assert np.linalg.eigvalsh(S).min() >= -1e-9 * np.abs(cov).max()
    ii = np.ix_(sorted(I), sorted(I))
    assert np.array_equal(S[ii], cov[ii])


def test_gaussian_model_rejects_non_pd():
    with pytest.raises(NumericError):
        GaussianModel(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_empirical_converges_toward_population():
    # operator-norm error shrinks with n (the full rate check is an acceptance test)
    cov = example2_true_cov().cov
    want = blind_population_gaussian(cov, [0, 4])
    errs = []
    for n in (200, 3000):
        X = generate("example2-dim10", n, seed=5)
        cfg = NeighborConfig(r_grid=list(range(2, 41)) + [n])
        S = covariance(blind(X, [0, 4], cfg).values)
        errs.append(np.linalg.norm(S - want, 2) / np.linalg.norm(want, 2))
    assert errs[1] < errs[0]
