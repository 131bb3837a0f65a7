import math

import numpy as np
import pytest

from blindpca.errors import ArgumentError
from blindpca.pca import covariance
from blindpca.simgen import (
    ProportionTable,
    StudyConfig,
    example2_true_cov,
    generate,
    group_rows,
    label_subset,
    model_groups,
    paper_table_config,
    rng_for,
    run_study,
    standard_normal,
)


def _example1_dim4_cov():
    s1, s2, e = 1.25**2, 0.55**2, 1e-4
    # V1, |V1|, V2 and V1*V2 are pairwise uncorrelated
    return np.diag([s1 + e, s1 * (1 - 2 / math.pi) + e, s2 + e, s1 * s2 + e])


def _within_3se(X, cov):
    Xc = X - X.mean(axis=0)
    n = X.shape[0]
    S = covariance(X)
    for i in range(cov.shape[0]):
        for j in range(i, cov.shape[0]):
            se = np.std(Xc[:, i] * Xc[:, j]) / math.sqrt(n)
            assert abs(S[i, j] - cov[i, j]) <= 3 * se, (i, j, S[i, j], cov[i, j], se)


def test_example1_moments():
    _within_3se(generate("example1-dim4", 100_000, seed=2024), _example1_dim4_cov())


def test_example2_moments():
    _within_3se(generate("example2-dim10", 100_000, seed=2024), example2_true_cov().cov)


def test_example1_quoted_moments():
    X = generate("example1-dim4", 100_000, seed=5)
    S = covariance(X)
    assert S[0, 0] == pytest.approx(1.5626, rel=0.02)
    assert abs(S[0, 3]) < 0.02


def test_example2_exact_entries():
    cov = example2_true_cov().cov
    assert cov[0, 0] == 291.0
    assert cov[0, 8] == pytest.approx(-87.0)
    assert cov[8, 8] == pytest.approx(284.7875)
    assert cov[8, 9] == pytest.approx(283.7875)
    assert cov[4, 8] == pytest.approx(277.5)


def test_dim23_layout():
    X = generate("example1-dim23", 500, seed=1)
    assert X.shape == (500, 23)
    np.testing.assert_allclose(X[:, 0], X[:, 1], atol=0.1)
    assert np.all(np.abs(X[:, 20:]) < 0.1)


def test_determinism_and_independence_of_seeds():
    a = generate("example2-dim10", 50, seed=3)
    assert np.array_equal(a, generate("example2-dim10", 50, seed=3))
    assert not np.array_equal(a, generate("example2-dim10", 50, seed=4))


def test_box_muller_normals():
    z = standard_normal(rng_for(0), (200_001,))
    assert abs(z.mean()) < 0.01 and abs(z.var() - 1) < 0.01
    assert z.shape == (200_001,)


def test_unknown_model():
    with pytest.raises(ArgumentError):
        generate("example3", 10, 0)


def test_group_rows_counts():
    assert len(group_rows(model_groups("example1-dim23"), 2)) == 15
    assert len(group_rows(model_groups("example2-dim10"), 2)) == 6
    assert len(group_rows(model_groups("example1-dim4"), 2)) == 6
    assert label_subset((5, 0), model_groups("example2-dim10")) == ("A1", "A2")


def test_single_replicate_table():
    t = run_study(StudyConfig(model="example1-dim4", n=40, replicates=1, methods=("b4",)))
    props = [t.proportion("b4", r) for r in t.rows]
    assert sorted(props) == [0.0] * (len(props) - 1) + [1.0]


def test_study_reproducible_and_normalized():
    cfg = paper_table_config(1, replicates=8)
    a, b = run_study(cfg), run_study(cfg)
    assert a.to_csv() == b.to_csv()
    for m in a.methods:
        assert sum(a.proportion(m, r) for r in a.rows) == pytest.approx(1.0)
    assert "blinding_d1_rejected" in a.summary


def test_csv_round_trip():
    t = run_study(paper_table_config(5, replicates=4, methods=("b2", "b4")))
    back = ProportionTable.from_csv(t.to_csv(), 4)
    for m in t.methods:
        for r in t.rows:
            assert back.proportion(m, r) == t.proportion(m, r)
