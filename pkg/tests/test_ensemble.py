import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import erf

from controlled_echo.core import DecayConfig, simulate_group
from controlled_echo.ensemble import (
    EnsembleSpec,
    SpinGroup,
    captured_mass,
    dephasing_envelope,
    gaussian_captured_mass,
    gaussian_envelope,
    make_gaussian_groups,
    simulate_ensemble,
)
from controlled_echo.errors import ConfigurationError
from controlled_echo.protocols import controlled_echo_protocol

from conftest import free_protocol

SPIN_COHERENT = np.array([[0.5, 0.5, 0], [0.5, 0.5, 0], [0, 0, 0]], complex)


# --- grid ---------------------------------------------------------------------

def test_single_group_grid():
    groups = make_gaussian_groups(EnsembleSpec(n_groups=1))
    assert groups == [SpinGroup(0.0, 1.0)]


def test_default_grid_is_symmetric_and_normalized():
    groups = make_gaussian_groups(EnsembleSpec())
    det = np.array([g.detuning for g in groups])
    w = np.array([g.weight for g in groups])
    assert len(groups) == 201
    assert det[0] == -200 and det[-1] == 200 and np.all(np.diff(det) == 2)
    np.testing.assert_array_equal(det, -det[::-1])
    np.testing.assert_array_equal(w, w[::-1])
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.argmax(w) == 100


def test_captured_mass_matches_erf():
    spec = EnsembleSpec()
    sigma = 170 / (2 * math.sqrt(2 * math.log(2)))
    exact = erf(200 / (sigma * math.sqrt(2)))
    assert gaussian_captured_mass(spec) == pytest.approx(exact, rel=1e-12)
    assert exact == pytest.approx(0.9944, abs=1e-4)
    # the sampled grid has one extra half-bin at each edge
    assert captured_mass(spec) == pytest.approx(exact, abs=3e-3)


@pytest.mark.parametrize("kwargs", [{"n_groups": 200}, {"n_groups": 0}, {"spacing": 0.0}, {"fwhm": -1.0}])
def test_bad_grid_rejected(kwargs):
    with pytest.raises(ConfigurationError):
        EnsembleSpec(**kwargs)


@settings(max_examples=40, deadline=None)
@given(half=st.integers(0, 150), spacing=st.floats(0.1, 10), fwhm=st.floats(1, 500))
def test_grid_symmetry_property(half, spacing, fwhm):
    spec = EnsembleSpec(2 * half + 1, spacing, fwhm)
    groups = make_gaussian_groups(spec)
    w = np.array([g.weight for g in groups])
    d = np.array([g.detuning for g in groups])
    np.testing.assert_array_equal(w, w[::-1])
    np.testing.assert_array_equal(d, -d[::-1])
    assert w.sum() == pytest.approx(1.0, rel=1e-12)
    assert dephasing_envelope(0.0, spec) == pytest.approx(1.0, abs=1e-12)


# --- envelope -----------------------------------------------------------------

def test_envelope_examples():
    spec = EnsembleSpec()
    assert dephasing_envelope(0.0, spec) == pytest.approx(1.0, abs=1e-12)
    assert dephasing_envelope(10.0, spec) < 0.05
    assert dephasing_envelope(3.0, EnsembleSpec(n_groups=1)) == 1.0
    with pytest.raises(ConfigurationError):
        dephasing_envelope(-1.0, spec)


def test_envelope_matches_band_limited_integral():
    # the grid is a midpoint rule for the Gaussian restricted to its covered band
    spec = EnsembleSpec()
    edge = spec.half_span + spec.spacing / 2
    pdf = lambda x: math.exp(-0.5 * (x / spec.sigma) ** 2)
    mass = quad(pdf, -edge, edge)[0]
    for dt in np.linspace(0, 20, 41):
        f = lambda x: pdf(x) * math.cos(2 * math.pi * x * 1e-3 * dt)
        oracle = abs(quad(f, -edge, edge, limit=200)[0]) / mass
        assert dephasing_envelope(dt, spec) == pytest.approx(oracle, abs=2e-4)


def test_envelope_follows_gaussian_at_short_times():
    spec = EnsembleSpec()
    for dt in np.linspace(0, 3, 16):
        assert dephasing_envelope(dt, spec) == pytest.approx(gaussian_envelope(dt, spec), rel=0.02)


def test_free_spin_coherence_matches_envelope():
    spec = EnsembleSpec()
    run = simulate_ensemble(free_protocol(3, t_end=12.0), spec, 0.1, rho0=SPIN_COHERENT)
    groups = make_gaussian_groups(spec)
    w = np.array([g.weight for g in groups])
    d = np.array([g.detuning for g in groups]) * 1e-3
    # each group precesses as rho12(0) exp(-i 2 pi delta t)
    oracle = 0.5 * np.exp(-2j * np.pi * np.outer(run.times, d)) @ w
    rho12 = run.element(1, 2)
    assert np.abs(rho12 - oracle).max() < 1e-9
    assert np.abs(rho12.imag).max() < 1e-12
    env = np.array([dephasing_envelope(t, spec) for t in run.times])
    assert np.abs(np.abs(rho12) - 0.5 * env).max() < 1e-9


# --- simulate_ensemble --------------------------------------------------------

def test_single_group_ensemble_equals_single_group_run():
    p = controlled_echo_protocol()
    run = simulate_ensemble(p, EnsembleSpec(n_groups=1))
    ts = simulate_group(p)
    np.testing.assert_array_equal(run.mean_rho, ts.rho)


def test_ensemble_is_linear_in_weights():
    p = controlled_echo_protocol().with_decay(DecayConfig({(1, 3): 50.0, (2, 3): 50.0}))
    a = [SpinGroup(-30.0, 1.0), SpinGroup(12.0, 0.0)]
    b = [SpinGroup(-30.0, 0.0), SpinGroup(12.0, 1.0)]
    mix = [SpinGroup(-30.0, 0.3), SpinGroup(12.0, 0.7)]
    ra, rb, rm = (simulate_ensemble(p, groups=g, sample_dt=0.05).mean_rho for g in (a, b, mix))
    assert np.abs(rm - (0.3 * ra + 0.7 * rb)).max() < 1e-12


def test_result_independent_of_workers_and_retention():
    p = controlled_echo_protocol()
    spec = EnsembleSpec()
    serial = simulate_ensemble(p, spec)
    threaded = simulate_ensemble(p, spec, workers=4)
    np.testing.assert_array_equal(serial.mean_rho, threaded.mean_rho)
    kept = simulate_ensemble(p, spec, keep_groups=True)
    assert kept.per_group_rho.shape == (201, len(kept.times), 3, 3)
    assert np.abs(kept.mean_rho - serial.mean_rho).max() < 1e-14


def test_ensemble_invariants_and_real_part_cancellation():
    p = controlled_echo_protocol()
    run = simulate_ensemble(p, check=True)
    d = run.diagnostics
    assert d["max_hermiticity_error"] < 1e-12
    assert d["max_trace_drift"] < 1e-9
    for pair in [(1, 3), (2, 3)]:
        assert np.abs(run.element(*pair).real).max() < 1e-10


def test_rephasing_restores_spin_coherence():
    # zero decay: rho12 mirrored about the Raman pair centre comes back conjugated
    p = controlled_echo_protocol(optical_dephasing=0.0)
    run = simulate_ensemble(p.without("C"), EnsembleSpec(), 0.005, keep_groups=True)
    centre = 0.5 * (p.pulse("R1").t_start + p.pulse("R1").t_end)
    for t1 in (1.2, 3.0):
        t2 = 2 * centre - t1
        before = run.group_element(1, 2)[:, run.index(t1)]
        after = run.group_element(1, 2)[:, run.index(t2)]
        assert np.abs(after - np.conj(before)).max() < 0.01 * np.abs(before).max()
        assert abs(run.at(t2)[0, 1] - np.conj(run.at(t1)[0, 1])) < 0.01 * abs(run.at(t1)[0, 1])


def test_group_element_requires_retention():
    run = simulate_ensemble(free_protocol(3, t_end=0.1), EnsembleSpec(n_groups=3))
    with pytest.raises(ConfigurationError):
        run.group_element(1, 2)
