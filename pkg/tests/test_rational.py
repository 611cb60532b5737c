import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specfact.errors import (DimensionMismatch, DocumentError, PoleProximity, RankDeficientInput,
                             SingularMatrix, VariableMismatch)
from specfact.factorization import outer_inner
from specfact.rational import RationalMatrix, best_partition, boundary_points

from helpers import (continuous_Wo, estimated_W, random_minimum_phase_factor,
                     stable_relation_example, stable_relation_W, zpk)


def sorted_c(v):
    return np.sort_complex(np.round(np.asarray(v, complex), 8))


def test_evaluate_examples():
    G1, _ = stable_relation_example()
    assert np.allclose(RationalMatrix.identity(2).evaluate(0.3 + 0.1j), np.eye(2))
    Wo = continuous_Wo()
    assert abs(Wo.evaluate(2.0)[0, 0]) < 1e-12
    g = RationalMatrix([[zpk([-0.528], [0.255])]])
    assert g.evaluate(1.0)[0, 0] == pytest.approx(1.528 / 0.745)
    with pytest.raises(PoleProximity):
        g.evaluate(0.255)


def test_para_conjugate_constant_unitary():
    th = 0.4
    P = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    Pc = RationalMatrix.constant(P).para_conjugate()
    assert np.allclose(Pc.evaluate(0.3), P.T)


def test_inner_factor_times_para_conjugate_is_identity():
    _, Q = outer_inner(continuous_Wo()[:2, :])
    q = Q[0, 0]
    prod = q * q.para_conjugate()
    assert prod.is_constant and prod.num.coeffs[0] == pytest.approx(1.0)


def test_products_of_example_one():
    G1, H = stable_relation_example()
    HG1 = H @ G1
    assert HG1[0, 0].allclose(zpk([-.4], [-.2]))
    assert HG1[0, 1].allclose(zpk([-.3], [-.5]))
    assert (G1 @ RationalMatrix.identity(2)).allclose(G1)


def test_shape_and_variable_checks():
    G1, H = stable_relation_example()
    with pytest.raises(DimensionMismatch):
        G1 @ H
    with pytest.raises(VariableMismatch):
        G1 + RationalMatrix.identity(2, "s")


def test_inverse_examples():
    w = RationalMatrix([[zpk([-2], [0.2], 0.2)]])
    assert w.inverse()[0, 0].allclose(zpk([0.2], [-2], 5.0))
    G1, _ = stable_relation_example()
    assert (G1 @ G1.inverse()).allclose(RationalMatrix.identity(2))
    assert RationalMatrix.constant([[2.0]]).inverse().evaluate(0.1)[0, 0] == pytest.approx(0.5)
    with pytest.raises(SingularMatrix):
        RationalMatrix([[zpk([1], [2]), zpk([1], [2])], [1, 1]]).inverse()


def test_poles_and_zeros_of_examples():
    assert np.allclose(sorted_c(estimated_W().poles()), [-0.5, 0.255])
    assert np.allclose(sorted_c(estimated_W().zeros()), [-0.528])
    W1 = stable_relation_W()
    assert np.allclose(sorted_c(W1.poles()), [-0.5, -0.2, -0.1])
    assert np.allclose(sorted_c(W1.zeros()), [-0.4, -0.3])
    assert RationalMatrix.constant(np.eye(2)).poles().size == 0
    s = RationalMatrix([[zpk([-0.528], [0.255])]])
    assert np.allclose(s.zeros(), [-0.528])


def test_zeros_require_full_column_rank():
    M = RationalMatrix([[zpk([1], [0.5]), zpk([1], [0.5])], [1, 1]])
    with pytest.raises(RankDeficientInput):
        M.zeros()


def test_stability_and_minimum_phase():
    _, H = stable_relation_example()
    assert H.is_stable()
    Ho = RationalMatrix([[zpk([2], [-2])], [zpk([1], [-2])]])
    assert not Ho.is_stable()
    from specfact.factorization import spectral_factor_from_stable_factor
    W = spectral_factor_from_stable_factor(continuous_Wo(), 2).W
    assert W.is_minimum_phase()
    assert not continuous_Wo().is_minimum_phase()


def test_normal_rank_of_low_rank_density():
    W = estimated_W()
    phi = W @ W.para_conjugate()
    assert phi.normal_rank == 1


def test_document_round_trip_is_bit_exact():
    W = continuous_Wo()
    doc = json.loads(json.dumps(W.to_dict()))
    W2 = RationalMatrix.from_dict(doc)
    for a, b in zip(W, W2):
        np.testing.assert_array_equal(a.num.coeffs, b.num.coeffs)
        np.testing.assert_array_equal(a.den.coeffs, b.den.coeffs)


def test_document_missing_den_names_path():
    doc = estimated_W().to_dict()
    del doc["entries"][1][0]["den"]
    with pytest.raises(DocumentError, match=r"entries\[1\]\[0\]\.den"):
        RationalMatrix.from_dict(doc)


def test_boundary_points_lie_on_boundary():
    assert np.allclose(np.abs(boundary_points("z", 16)), 1.0)
    assert np.allclose(boundary_points("s", 16).real, 0.0)


def test_best_partition_avoids_zero_row():
    W = RationalMatrix([[0.0], [zpk([0.1], [0.5])], [1.0]])
    order = best_partition(W @ W.para_conjugate(), 1)
    assert order[0] != 0


@given(st.integers(0, 10_000), st.sampled_from("zs"))
def test_evaluation_homomorphism_and_inverse(seed, v):
    rng = np.random.default_rng(seed)
    A = random_minimum_phase_factor(rng, 1, 1, 2, v)
    B = random_minimum_phase_factor(rng, 1, 1, 2, v)
    Ma = RationalMatrix.hstack([A, B])            # 2 x 2
    Mb = RationalMatrix.hstack([B, A])
    prod = Ma @ Mb
    for pt in RationalMatrix.hstack([Ma, Mb, prod]).safe_points(5, seed):
        lhs = prod.evaluate(pt)
        rhs = Ma.evaluate(pt) @ Mb.evaluate(pt)
        assert np.abs(lhs - rhs).max() <= 1e-9 * (1 + np.abs(rhs).max())
    if Ma.normal_rank == 2:
        inv = Ma.inverse()
        for pt in RationalMatrix.hstack([Ma, inv]).safe_points(3, seed):
            assert np.allclose(Ma.evaluate(pt) @ inv.evaluate(pt), np.eye(2), atol=1e-7)


@given(st.integers(0, 10_000), st.sampled_from("zs"))
def test_para_conjugate_matches_conjugate_transpose_on_boundary(seed, v):
    rng = np.random.default_rng(seed)
    W = random_minimum_phase_factor(rng, 1, 1, 2, v)
    Wc = W.para_conjugate()
    for pt in boundary_points(v, 7)[1:]:
        assert np.allclose(Wc.evaluate(pt), W.evaluate(pt).conj().T, atol=1e-9)
    assert Wc.para_conjugate().allclose(W)
