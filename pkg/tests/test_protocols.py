import math

import numpy as np
import pytest

from controlled_echo.core import DecayConfig, LevelScheme, Pulse, simulate_group
from controlled_echo.ensemble import SpinGroup
from controlled_echo.errors import ConfigurationError
from controlled_echo.protocols import (
    AccessMode,
    Probes,
    Protocol,
    controlled_echo_protocol,
    generalized_rabi,
    named_protocol,
    pulse_area,
    resonant_raman_protocol,
    two_level_echo_protocol,
    wavelength_convert_protocol,
)

CI, CONV = AccessMode.COUNTER_INTUITIVE, AccessMode.CONVENTIONAL


def test_pulse_area_examples():
    assert pulse_area(Pulse((1, 3), 5.0, 0, 0.1)) == pytest.approx(math.pi)
    assert pulse_area(Pulse((1, 3), 0.5, 0, 0.1)) == pytest.approx(math.pi / 10)
    assert pulse_area(Pulse((1, 3), 100 / math.sqrt(2), 0, 0.01)) == pytest.approx(math.sqrt(2) * math.pi)


def test_generalized_rabi():
    assert generalized_rabi(3.0, 4.0) == 5.0
    assert generalized_rabi(100 / math.sqrt(2), 100 / math.sqrt(2)) == pytest.approx(100.0)
    with pytest.raises(ConfigurationError):
        generalized_rabi(-1.0, 1.0)


@pytest.mark.parametrize("mode", [CI, CONV])
def test_fig1_pulse_areas(mode):
    p = controlled_echo_protocol(mode)
    assert pulse_area(p.pulse("A")) == pytest.approx(math.pi / 10)
    assert pulse_area(p.pulse("B")) == pytest.approx(math.pi)
    assert pulse_area(p.pulse("C")) == pytest.approx(math.pi)
    r1, r2 = p.pulses_named("R")
    raman = generalized_rabi(r1.rabi, r2.rabi) * 2 * math.pi * r1.duration
    assert raman == pytest.approx(2 * math.pi)
    assert (r1.t_start, r1.duration) == (r2.t_start, r2.duration)
    assert {r1.transition, r2.transition} == {(1, 3), (2, 3)}


def test_fig1_timing_and_read_out_leg():
    ci, conv = controlled_echo_protocol(CI), controlled_echo_protocol(CONV)
    assert ci.probes.t_C == pytest.approx(18.9)
    assert ci.probes.t_C - ci.probes.t_R == pytest.approx(ci.probes.t_R - ci.probes.t_B)
    assert ci.pulse("C").transition == (1, 3) and ci.echo_coherence == (2, 3)
    assert conv.pulse("C").transition == (2, 3) and conv.echo_coherence == (1, 3)
    assert ci.decay.gamma(1, 3) == ci.decay.gamma(2, 3) == 50.0
    assert ci.decay.gamma(1, 2) == 0.0


def test_modes_share_everything_before_C():
    ci, conv = controlled_echo_protocol(CI), controlled_echo_protocol(CONV)
    t_C = ci.probes.t_C
    assert ci.before(t_C) == conv.before(t_C)
    a = simulate_group(ci, SpinGroup(47.0, 1.0))
    b = simulate_group(conv, SpinGroup(47.0, 1.0))
    k = a.index(t_C)
    np.testing.assert_array_equal(a.rho[: k + 1], b.rho[: k + 1])


def test_t_C_override_relaxes_symmetry():
    p = controlled_echo_protocol(t_C=19.0)
    assert p.pulse("C").t_start == 19.0
    assert not p.raman_symmetric


def test_symmetry_violation_is_rejected():
    p = controlled_echo_protocol()
    with pytest.raises(ConfigurationError, match="symmetry"):
        Protocol(p.scheme, p.pulses, p.decay, Probes(1.0, 1.1, 10.0, 19.5, 19.6), 22.0)


def test_probe_order_and_overlap_are_rejected():
    scheme = LevelScheme.lambda_system()
    with pytest.raises(ConfigurationError, match="order"):
        Protocol(scheme, (), DecayConfig(), Probes(1.0, 1.1, 0.5, 2.0, 2.0), 3.0, raman_symmetric=False)
    with pytest.raises(ConfigurationError, match="overlap"):
        Protocol(scheme, (Pulse((1, 3), 1, 0, 0.2), Pulse((1, 3), 1, 0.1, 0.2)), DecayConfig(), None, 1.0)
    with pytest.raises(ConfigurationError, match="lacks"):
        Protocol(scheme, (Pulse((1, 4), 1, 0, 0.2),), DecayConfig(), None, 1.0)
    with pytest.raises(ConfigurationError, match="beyond"):
        Protocol(scheme, (Pulse((1, 3), 1, 0, 0.2),), DecayConfig(), None, 0.1)


def test_fig2_raman_data_pulse():
    p = resonant_raman_protocol()
    a, b = p.pulse("A"), p.pulse("B")
    assert b.rabi == pytest.approx(4.9749, abs=1e-4)
    assert generalized_rabi(a.rabi, b.rabi) == pytest.approx(5.0)
    assert (a.t_start, a.duration) == (b.t_start, b.duration)
    assert generalized_rabi(a.rabi, b.rabi) * 2 * math.pi * a.duration == pytest.approx(math.pi)
    assert p.probes.t_C == pytest.approx(19.0)


@pytest.mark.parametrize("mode, cn, echo", [(CI, (1, 4), (2, 4)), (CONV, (2, 4), (1, 4))])
def test_fig3_structure(mode, cn, echo):
    p = wavelength_convert_protocol(mode)
    assert p.scheme.n_levels == 4
    assert p.pulse("A").rabi == pytest.approx(0.5 / math.sqrt(2))
    assert p.pulse("Cn").transition == cn and p.echo_coherence == echo
    assert {r.transition for r in p.pulses_named("R")} == {(1, 4), (2, 4)}
    for pair in [(1, 3), (2, 3), (1, 4), (2, 4), (3, 4)]:
        assert p.decay.gamma(*pair) == 150.0
    assert p.decay.gamma(1, 2) == 0.0


@pytest.mark.parametrize("double, echo_time, echo_map", [(False, 9.0, "conjugation"), (True, 17.0, "identity")])
def test_two_level_protocols(double, echo_time, echo_map):
    p = two_level_echo_protocol(double)
    assert p.probes.t_e == pytest.approx(echo_time)
    assert p.echo_map == echo_map
    for r in p.pulses_named("R"):
        assert pulse_area(r) == pytest.approx(math.pi)


def test_named_protocol_lookup():
    assert named_protocol("fig3", CONV).label == "fig3-conventional"
    assert named_protocol("two-level-double").label == "two-level-double"
    assert named_protocol("fig1", "conventional").access is CONV
    with pytest.raises(ConfigurationError):
        named_protocol("fig9")
    with pytest.raises(ConfigurationError):
        controlled_echo_protocol("sideways")


def test_without_drops_pulses():
    p = controlled_echo_protocol().without("R")
    assert [q.name for q in p.pulses] == ["A", "B", "C"]
