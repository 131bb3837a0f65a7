import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from blindpca.errors import ArgumentError
from blindpca.objective import (
    EmpiricalScorer,
    PopulationScorer,
    component_distance,
    evaluate,
    evaluate_population,
    make_weights,
)
from blindpca.simgen import example2_true_cov, generate

unit_vectors = st.integers(2, 8).flatmap(
    lambda p: arrays(np.float64, p, elements=st.floats(-1, 1, width=64))
).filter(lambda v: np.linalg.norm(v) > 1e-3).map(lambda v: v / np.linalg.norm(v))


def test_twenty_degree_example():
    a = np.array([1.0, 0.0])
    b = np.array([math.cos(math.radians(20)), math.sin(math.radians(20))])
    h, ang = component_distance(a, b)
    assert h == pytest.approx(0.1206, abs=1e-4)
    assert ang == pytest.approx(20.0, abs=1e-9)


def test_orthogonal_and_equal():
    assert component_distance([1.0, 0.0], [0.0, 1.0]) == (2.0, 90.0)
    assert component_distance([0.6, 0.8], [0.6, 0.8]) == (0.0, 0.0)


@settings(max_examples=100, deadline=None)
@given(unit_vectors, st.data())
def test_sign_flip_invariance_and_cosine_identity(a, data):
    b = data.draw(arrays(np.float64, a.shape[0], elements=st.floats(-1, 1, width=64)))
    if np.linalg.norm(b) < 1e-3:
        return
    b = b / np.linalg.norm(b)
    h, ang = component_distance(a, b)
    assert component_distance(a, -b) == (h, ang)
    assert component_distance(-a, b) == (h, ang)
    assert 0.0 <= h <= 2.0 and 0.0 <= ang <= 90.0
    assert abs(h - 2.0 * (1.0 - math.cos(math.radians(ang)))) <= 1e-12


def test_rejects_non_unit():
    with pytest.raises(ArgumentError):
        component_distance([1.0, 1.0], [1.0, 0.0])


def test_weights():
    np.testing.assert_allclose(make_weights("equal", None, 4), 0.25)
    np.testing.assert_allclose(make_weights("variance", [3.0, 1.0, 5.0], 2), [0.75, 0.25])
    np.testing.assert_allclose(make_weights([0.2, 0.8], None, 2), [0.2, 0.8])
    for bad in ("bogus", [0.5, 0.6], [1.0]):
        with pytest.raises(ArgumentError):
            make_weights(bad, [1.0, 1.0], 2)


def test_full_subset_scores_zero(rng):
    X = generate("example1-dim4", 60, seed=2)
    rep = evaluate(X, range(4), q=2)
    assert rep.h == 0.0 and rep.max_angle == 0.0


def test_scorer_caches():
    X = generate("example1-dim4", 60, seed=2)
    sc = EmpiricalScorer(X, q=2)
    a = sc((0, 2))
    assert sc([2, 0]) is a
    assert sc.evaluations == 1


def test_population_cross_group_pair():
    rep = evaluate_population(example2_true_cov().cov, [0, 4], q=2, weights="equal")
    assert rep.h == pytest.approx(2.25e-6, rel=0.01)
    assert rep.max_angle == pytest.approx(0.087, abs=0.02)


def test_rank_deficient_components_score_ninety_degrees():
    rep = evaluate_population(example2_true_cov().cov, [8], q=2, weights="equal")
    assert rep.unidentified == (1,)
    assert rep.angles[1] == 90.0 and rep.h_k[1] == 2.0
    assert rep.h == pytest.approx(1.000, abs=0.005)


def test_equal_weights_reproduce_within_group_values_variance_do_not():
    cov = example2_true_cov().cov
    eq = evaluate_population(cov, [4, 5], q=2, weights="equal")
    var = evaluate_population(cov, [4, 5], q=2, weights="variance")
    assert eq.h == pytest.approx(1.028, abs=0.005)
    assert abs(var.h - 1.028) > 0.05


def test_report_dict_names():
    sc = PopulationScorer(example2_true_cov().cov, q=2, weights="equal")
    d = sc((0, 4)).to_dict([f"V{i}" for i in range(10)])
    assert d["subset_names"] == ["V0", "V4"]
    assert d["q"] == 2 and len(d["angles_deg"]) == 2
