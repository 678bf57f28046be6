import functools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
import probe_engine as pe
from probe_engine import kernel as K
from probe_engine.errors import QuadratureError, SingularEliminationError

finite = st.floats(min_value=-10, max_value=10, allow_nan=False)
PI2_3 = math.pi**2 / 3


def const(tau):
    return lambda e: tau


# ----------------------------------------------------------------- moments


@pytest.mark.parametrize("n,expected", [(0, 1.0), (1, 0.0), (2, PI2_3)])
def test_constant_transmission_moments(n, expected):
    assert pe.fermi_derivative_moment(n, 1.0, 0.0, const(1.0)) == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("T", [0.3, 1.0, 2.5])
def test_second_moment_scales_with_temperature(T):
    got = pe.fermi_derivative_moment(2, T, 0.7, const(1.0))
    assert got == pytest.approx(PI2_3 * T**2, abs=1e-9)


def test_kernel_agrees_with_trapezoid_oracle():
    model = pe.paper_model().with_phi(1.1)
    tset = pe.transmission_set(model)
    got = K.transmission_moments(tset, 1.0, 0.0)
    ref = oracles.trapezoid_moments(
        lambda e: oracles.ring_transmissions(e, phase=1.1), points=1_000_001
    )
    assert np.max(np.abs(got - ref)) < 1e-8


def test_moment_rejects_bad_order_and_temperature():
    with pytest.raises(ValueError):
        pe.fermi_derivative_moment(3, 1.0, 0.0, const(1.0))
    with pytest.raises(ValueError):
        pe.fermi_derivative_moment(0, 0.0, 0.0, const(1.0))


def test_non_finite_transmission_reports_energy():
    def bad(e):
        return math.inf if abs(e - 0.5) < 0.3 else 1.0

    with pytest.raises(QuadratureError) as info:
        pe.fermi_derivative_moment(0, 1.0, 0.0, bad)
    assert info.value.energy is not None
    assert abs(info.value.energy - 0.5) < 0.3


def test_fermi_window_is_normalized_and_even():
    e = np.linspace(-5, 5, 11)
    assert np.allclose(K.fermi_window(e, 1.0, 0.0), K.fermi_window(-e, 1.0, 0.0), rtol=0, atol=0)
    assert K.fermi(0.0, 1.0, 0.0) == 0.5


# ----------------------------------------------------------------- assembly


def test_constant_tau_matrix():
    tau = 0.3
    L4 = pe.assemble_onsager4(pe.TransmissionSet.constant(tau), 1.0, 0.0)
    assert L4.at(1, 1) == pytest.approx(2 * tau, abs=1e-9)
    assert L4.at(1, 2) == pytest.approx(0.0, abs=1e-9)
    assert L4.at(2, 2) == pytest.approx(2 * tau * PI2_3, abs=1e-9)
    assert L4.at(1, 3) == pytest.approx(-tau, abs=1e-9)


def test_literal_equalities_are_stored_values(chain):
    m = chain.full.values
    assert m[1, 0] == m[0, 1] and m[1, 2] == m[0, 3]
    assert m[3, 0] == m[2, 1] and m[3, 2] == m[2, 3]
    assert not m.flags.writeable


def test_zero_field_matrix_is_symmetric():
    L4 = pe.onsager_chain(pe.paper_model()).full.values
    assert np.max(np.abs(L4 - L4.T)) < 1e-9


def test_onsager_casimir_quarter_flux():
    model = pe.paper_model().with_phi(math.pi / 2)
    plus = pe.onsager_chain(model).full.values
    minus = pe.onsager_chain(model.reversed()).full.values
    assert np.max(np.abs(plus - minus.T)) < 1e-9


def test_matrix_matches_independent_oracle(chain):
    L4, L3, L2 = oracles.ring_onsager(math.pi / 3)
    assert np.max(np.abs(chain.full.values - L4)) < 1e-9
    assert np.max(np.abs(chain.vprobe.values - L3)) < 1e-9
    assert np.max(np.abs(chain.buttiker.values - L2)) < 1e-9


# ----------------------------------------------------------------- currents


def test_equilibrium_carries_no_current():
    tset = pe.TransmissionSet.constant(0.5)
    cur = pe.landauer_currents(tset, pe.ReservoirState(temperature=1.0))
    assert np.all(np.abs(cur.particle) < 1e-14)
    assert np.all(np.abs(cur.heat) < 1e-14)


def test_constant_tau_thermal_bias_gives_no_particle_current():
    # both sides vanish for a particle-hole symmetric conductor
    tset = pe.TransmissionSet.constant(0.5)
    L4 = pe.assemble_onsager4(tset, 1.0, 0.0)
    state = pe.ReservoirState(temperature=1.0, dT_L=1e-4)
    cur = pe.landauer_currents(tset, state)
    lin = L4.currents(state.forces())
    assert abs(cur.j_ln) < 1e-12 and abs(lin[0]) < 1e-12
    assert cur.j_lq == pytest.approx(lin[1], rel=1e-4)


def test_linear_response_matches_symmetric_difference(model, chain):
    tset = pe.transmission_set(model)
    h = 1e-4
    for col, key in enumerate(("dmu_L", "dT_L", "dmu_P", "dT_P")):
        plus = pe.landauer_currents(tset, pe.ReservoirState(temperature=1.0, **{key: h}))
        minus = pe.landauer_currents(tset, pe.ReservoirState(temperature=1.0, **{key: -h}))
        # the derivative of the fluxes with respect to one force
        numeric = np.array(
            [
                plus.j_ln - minus.j_ln,
                plus.j_lq - minus.j_lq,
                plus.j_pn - minus.j_pn,
                plus.j_pq - minus.j_pq,
            ]
        ) / (2 * h)
        assert np.allclose(numeric, chain.full.values[:, col], rtol=1e-6, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-0.05, 0.05), min_size=4, max_size=4))
def test_landauer_conserves_particles_and_energy(offsets):
    tset = pe.transmission_set(pe.paper_model().with_phi(0.7))
    state = pe.ReservoirState(1.0, 0.0, *offsets)
    cur = pe.landauer_currents(tset, state)
    assert abs(cur.particle.sum()) < 1e-10
    assert abs(cur.energy.sum()) < 1e-10


def test_large_offsets_warn():
    with pytest.warns(K.LinearResponseWarning):
        pe.ReservoirState(temperature=1.0, dT_L=0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        pe.ReservoirState(temperature=1.0, dT_L=0.05)


@given(finite, finite, finite, finite, st.floats(-2, 2))
def test_current_vector_conservation(j_ln, j_lq, j_pn, j_pq, mu):
    cur = pe.CurrentVector.from_terminal_fluxes(j_ln, j_lq, j_pn, j_pq, (mu + 0.1, mu - 0.2, mu))
    assert abs(cur.particle.sum()) < 1e-12
    assert abs(cur.energy.sum()) < 1e-12
    assert np.allclose(cur.heat, cur.energy - np.array([mu + 0.1, mu - 0.2, mu]) * cur.particle)


@given(st.floats(0.01, 100), st.floats(0.01, 100))
def test_force_ratios_are_reciprocal(a, b):
    f = pe.ForceVector(x_lt=a, x_pt=b)
    assert f.xi * f.delta == pytest.approx(1.0, rel=1e-14)


def test_force_ratio_undefined_without_bias():
    assert pe.ForceVector(x_lt=0.0, x_pt=1.0).xi is None
    assert pe.ForceVector(x_lt=1.0, x_pt=0.0).delta is None


# ----------------------------------------------------------------- reductions


def _block(values):
    return pe.OnsagerMatrix(K.FULL4, values)


def test_decoupled_probe_leaves_upper_block():
    m = np.diag([2.0, 3.0, 1.5, 4.0])
    m[0, 1] = m[1, 0] = 0.5
    m[2, 3] = m[3, 2] = 0.2
    m[1, 3] = m[3, 1] = 0.0
    L3 = pe.reduce_voltage_probe(_block(m))
    assert np.array_equal(L3.values[:2, :2], m[:2, :2])


def test_singular_probe_is_rejected():
    m = np.eye(4)
    m[2, 2] = 0.0
    with pytest.raises(SingularEliminationError):
        pe.reduce_voltage_probe(_block(m))
    L3 = pe.OnsagerMatrix(K.VPROBE3, np.diag([1.0, 1.0, 0.0]))
    with pytest.raises(SingularEliminationError):
        pe.reduce_buttiker(L3)


def test_reduction_needs_the_right_kind(chain):
    with pytest.raises(ValueError):
        pe.reduce_voltage_probe(chain.vprobe)
    with pytest.raises(ValueError):
        pe.reduce_buttiker(chain.full)


def test_constant_tau_reduction_currents():
    L4 = pe.assemble_onsager4(pe.TransmissionSet.constant(0.4), 1.0, 0.0)
    L3 = pe.reduce_voltage_probe(L4)
    rng = np.random.default_rng(3)
    for _ in range(20):
        f3 = pe.ForceVector(x_lv=rng.normal(), x_lt=rng.normal(), x_pt=rng.normal())
        x_pv = float(L3.eliminated @ f3.as_array(K.VPROBE3))
        full = L4.currents(pe.ForceVector(f3.x_lv, f3.x_lt, x_pv, f3.x_pt))
        assert abs(full[2]) < 1e-12
        assert np.allclose(full[[0, 1, 3]], L3.currents(f3), rtol=0, atol=1e-12)


def test_reductions_match_linear_solve_oracle(chain):
    assert np.max(np.abs(chain.vprobe.values - oracles.vprobe(chain.full.values))) < 1e-13
    assert np.max(np.abs(chain.buttiker.values - oracles.buttiker(chain.vprobe.values))) < 1e-13


def test_reduced_diagonals_are_nonnegative():
    for phi in np.linspace(0.1, 6.1, 7):
        ch = pe.onsager_chain(pe.paper_model().with_phi(phi))
        assert np.all(np.diag(ch.vprobe.values) >= 0)
        assert np.all(np.diag(ch.buttiker.values) >= 0)


def test_buttiker_block_diagonal_and_symmetric_cases():
    L3 = pe.OnsagerMatrix(K.VPROBE3, [[1.0, 0.3, 0.0], [0.3, 2.0, 0.0], [0.0, 0.0, 0.7]])
    assert np.array_equal(pe.reduce_buttiker(L3).values, L3.values[:2, :2])
    sym = pe.OnsagerMatrix(K.VPROBE3, [[1.0, 0.3, 0.2], [0.3, 2.0, 0.1], [0.2, 0.1, 0.7]])
    L2 = pe.reduce_buttiker(sym)
    assert L2.at(1, 2) == L2.at(2, 1)


def test_buttiker_onsager_casimir_quarter_flux():
    model = pe.paper_model().with_phi(math.pi / 2)
    plus = pe.onsager_chain(model).buttiker
    minus = pe.onsager_chain(model.reversed()).buttiker
    assert abs(plus.at(1, 2) - minus.at(2, 1)) < 1e-9


# ----------------------------------------------------------------- entropy and bounds


@pytest.fixture(scope="module")
def phi_chains():
    rng = np.random.default_rng(11)
    return [pe.onsager_chain(pe.paper_model().with_phi(p)) for p in rng.uniform(0, 2 * np.pi, 10)]


@functools.lru_cache
def _chain_at(phi):
    return pe.onsager_chain(pe.paper_model().with_phi(phi))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_entropy_production_nonnegative(x):
    ch = _chain_at(2.0)
    assert ch.full.entropy_production(np.array(x)) >= -1e-12
    assert ch.vprobe.entropy_production(np.array(x[:3])) >= -1e-12
    assert ch.buttiker.entropy_production(np.array(x[:2])) >= -1e-12


def test_diagonal_matrix_passes_bounds():
    L3 = pe.OnsagerMatrix(K.VPROBE3, np.diag([1.0, 2.0, 3.0]))
    for xi in (-5.0, 0.0, 0.3, 5.0):
        assert pe.check_bounds(L3, xi).ok


def test_bounds_hold_on_random_ring_matrices(phi_chains):
    rng = np.random.default_rng(5)
    for ch in phi_chains:
        for xi in rng.uniform(-5, 5, 10):
            report = pe.check_bounds(ch.vprobe, xi)
            assert report.ok, report.residuals
        assert pe.check_bounds_buttiker(ch.buttiker).ok


def test_bound_report_flags_failures():
    L3 = pe.OnsagerMatrix(K.VPROBE3, np.diag([-1.0, 2.0, 3.0]))
    report = pe.check_bounds(L3, 0.5)
    assert report.passed[0] is False and not report.ok


def test_bounds_reject_non_finite_ratio(chain):
    with pytest.raises(ValueError):
        pe.check_bounds(chain.vprobe, math.nan)


# ----------------------------------------------------------------- value types


def test_matrix_shape_and_kind_validation():
    with pytest.raises(ValueError):
        pe.OnsagerMatrix(K.VPROBE3, np.eye(4))
    with pytest.raises(ValueError):
        pe.OnsagerMatrix("FULL5", np.eye(4))


def test_transmission_set_checks():
    assert pe.TransmissionSet.constant(0.5).violations(np.linspace(-3, 3, 7)) == []

    def lopsided(e):
        t = np.zeros(np.shape(e) + (3, 3))
        t[..., 0, 1] = 0.5
        return t

    problems = pe.TransmissionSet(lopsided).violations([0.0])
    assert "sum rule violated" in problems
