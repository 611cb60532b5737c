import numpy as np
import pytest
from scipy import signal

from specfact.errors import IllConditioned, NotProper, UnstableFilter, ValidationError
from specfact.factorization import unitary_equivalence_check
from specfact.ident import (TimeSeries, estimate_arma_pem, estimate_H_ls,
                            identify_innovation_model, simulate_lowrank_process)
from specfact.kernels import ss_simulate
from specfact.rational import RationalMatrix
from specfact.realization import minimal_realization
from specfact.wiener import wiener_filter

from helpers import estimated_W, generating_Wo, zpk

ORDERS = {"h_num": 1, "h_den": 1, "arma_p": 1, "arma_q": 1}


def test_time_series_validation():
    with pytest.raises(ValidationError):
        TimeSeries(np.zeros((0, 2)), 1)
    with pytest.raises(ValidationError):
        TimeSeries(np.array([[1.0, np.nan]]), 1)
    with pytest.raises(ValidationError):
        TimeSeries(np.zeros((3, 2)), 3)


def test_simulate_static_rank_one_filter():
    ts = simulate_lowrank_process(RationalMatrix.constant([[1.0], [1.0]]), 4, seed=1)
    assert ts.N == 4 and ts.m == 1
    np.testing.assert_array_equal(ts.data[:, 0], ts.data[:, 1])


def test_simulate_is_reproducible():
    a = simulate_lowrank_process(generating_Wo(), 50, seed=7)
    b = simulate_lowrank_process(generating_Wo(), 50, seed=7)
    c = simulate_lowrank_process(generating_Wo(), 50, seed=8)
    np.testing.assert_array_equal(a.data, b.data)
    assert not np.array_equal(a.data, c.data)


def test_simulated_relation_is_deterministic():
    ts = simulate_lowrank_process(generating_Wo(), 500, seed=3)
    y1 = ts.y1[:, 0]
    # (1 + 2 q^-1) y2_1 = (1 - 2 q^-1) y1 and (1 + 2 q^-1) y2_2 = (1 - q^-1) y1
    for i, b in enumerate(([1.0, -2.0], [1.0, -1.0])):
        lhs = ts.y2[1:, i] + 2.0 * ts.y2[:-1, i]
        rhs = b[0] * y1[1:] + b[1] * y1[:-1]
        assert np.abs(lhs - rhs).max() < 1e-6 * (1 + np.abs(rhs).max())


def test_simulate_rejects_unstable_filter():
    with pytest.raises(UnstableFilter):
        simulate_lowrank_process(RationalMatrix([[zpk([0.1], [1.5])]]), 10, seed=0)
    with pytest.raises(ValidationError):
        simulate_lowrank_process(RationalMatrix([[zpk([-1], [-2], 1, "s")]], "s"), 10)


def test_estimate_H_from_exact_relation():
    ts = simulate_lowrank_process(generating_Wo(), 500, seed=11)
    H = estimate_H_ls(ts, 1, 1)
    want = RationalMatrix([[zpk([2], [-2])], [zpk([1], [-2])]])
    assert H.coeff_distance(want) < 1e-3


def test_estimate_H_copy_channel():
    rng = np.random.default_rng(0)
    y = rng.standard_normal(100)
    H = estimate_H_ls(TimeSeries(np.column_stack([y, y]), 1), 0, 0)
    assert H[0, 0].allclose(zpk([], []), 1e-12)


def test_estimate_H_insufficient_data_and_improper_orders():
    ts = TimeSeries(np.ones((2, 2)) + np.arange(4).reshape(2, 2), 1)
    with pytest.raises(IllConditioned):
        estimate_H_ls(ts, 2, 2)
    with pytest.raises(NotProper):
        estimate_H_ls(ts, 2, 1)


def test_arma_recovers_coefficients_on_long_record():
    rng = np.random.default_rng(2024)
    e = rng.standard_normal(5200)
    y = signal.lfilter([1.0, 0.528], [1.0, -0.255], e)[200:]
    fit = estimate_arma_pem(y, 1, 1)
    assert fit.converged
    assert abs(fit.a[1] + 0.255) < 0.05
    assert abs(fit.c[1] - 0.528) < 0.05
    assert abs(fit.noise_variance - 1.0) < 0.05


def test_arma_white_noise_is_gain_only():
    rng = np.random.default_rng(5)
    y = 2.0 * rng.standard_normal(1000)
    fit = estimate_arma_pem(y, 0, 0)
    assert fit.model.is_constant
    assert fit.model.value_at_infinity() == pytest.approx(2.0, rel=0.1)


def test_arma_constant_series_is_ill_conditioned():
    with pytest.raises(IllConditioned):
        estimate_arma_pem(np.full(200, 3.0), 1, 1)


def test_arma_zero_estimate_is_minimum_phase():
    rng = np.random.default_rng(9)
    e = rng.standard_normal(3000)
    # non-minimum-phase generator, same spectrum as 2 (1 + 0.5 q^-1)
    y = signal.lfilter([1.0, 2.0], [1.0], e)
    fit = estimate_arma_pem(y, 0, 1)
    assert np.all(np.abs(np.roots(fit.c)) < 1)
    assert abs(fit.c[1] - 0.5) < 0.05
    assert abs(fit.noise_variance - 4.0) < 0.4


def test_identify_discrete_example_single_run():
    ts = simulate_lowrank_process(generating_Wo(), 500, seed=1)
    res = identify_innovation_model(ts, ORDERS)
    assert res.H.coeff_distance(RationalMatrix([[zpk([2], [-2])], [zpk([1], [-2])]])) < 1e-3
    assert not res.special_case and res.diagnostics["n_u"] == 1
    poles = np.sort(res.diagnostics["poles"].real)
    assert abs(poles[0] + 0.5) < 0.05
    assert res.diagnostics["inner_residual"] < 1e-8


def test_identify_tiny_noise_keeps_exact_relation():
    ts = simulate_lowrank_process(generating_Wo() * 1e-4, 400, seed=4)
    res = identify_innovation_model(ts, ORDERS)
    assert res.H.coeff_distance(RationalMatrix([[zpk([2], [-2])], [zpk([1], [-2])]])) < 1e-6


def test_identify_full_rank_series_is_arma_alone():
    rng = np.random.default_rng(6)
    y = signal.lfilter([1.0, 0.4], [1.0, -0.6], rng.standard_normal(2000))
    res = identify_innovation_model(TimeSeries(y[:, None], 1), ORDERS)
    assert res.H.shape == (0, 1)
    assert res.W.shape == (1, 1)
    assert res.W[0, 0].allclose(res.diagnostics["arma"].model, 1e-10)


def test_identify_rejects_missing_orders():
    ts = simulate_lowrank_process(generating_Wo(), 100, seed=1)
    with pytest.raises(ValidationError):
        identify_innovation_model(ts, {"h_num": 1})


def test_innovation_part_is_orthogonal_to_past_of_y2():
    W = estimated_W()
    rep = wiener_filter(W[:1, :], W[1:, :])
    R = minimal_realization(W)
    N = 20_000
    e = np.random.default_rng(12).standard_normal((N, 1))
    Y, _ = ss_simulate(R.A, R.B, R.C, R.D, e)
    k_e = rep.K_plus.evaluate(0.0)[0, 0].real * e[:, 0]
    bound = 3 / np.sqrt(N)
    for lag in range(1, 11):
        for i in range(2):
            rho = np.corrcoef(k_e[lag:], Y[:-lag, 1 + i])[0, 1]
            assert abs(rho) < bound


def test_true_relation_recovers_generating_filter():
    # the generating filter has no zeros, so it is itself the minimum-phase factor
    from specfact.factorization import factor_from_relation, grid_residual
    G1 = RationalMatrix([[zpk([-.5], [.2], .4)]])
    H = RationalMatrix([[zpk([2], [-2])], [zpk([1], [-2])]])
    res = factor_from_relation(H, G1)
    Wo = generating_Wo()
    phi = Wo @ Wo.para_conjugate()
    assert grid_residual(phi, res.W) < 1e-12
    assert unitary_equivalence_check(res.W, Wo)
