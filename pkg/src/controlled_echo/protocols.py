"""Named pulse sequences for controlled-echo storage and photon-echo checks.

All constructors return immutable :class:`Protocol` values with pulse areas and
timings of the published parameter set. Rabi frequencies are cyclic MHz, decay
rates cyclic kHz, times us.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .core import DecayConfig, LevelScheme, Pulse, TWO_PI
from .errors import ConfigurationError

# Published parameter set (cyclic MHz / us / cyclic kHz).
T_A = 1.0
T_B = 1.1
T_R = 10.0
PULSE_DURATION = 0.1
RAMAN_DURATION = 0.01
RABI_DATA = 0.5
RABI_CONTROL = 5.0
RABI_RAMAN = 100.0 / math.sqrt(2.0)
OPTICAL_DEPHASING = 50.0
OPTICAL_DEPHASING_4LEVEL = 150.0
ECHO_WINDOW = 2.0


class AccessMode(str, enum.Enum):
    """Which leg the read-out control pulse drives.

    ``COUNTER_INTUITIVE`` reads out on the data transition (|1>-|3> or |1>-|4>),
    ``CONVENTIONAL`` on the other leg (|2>-|3> or |2>-|4>).
    """

    COUNTER_INTUITIVE = "counter_intuitive"
    CONVENTIONAL = "conventional"


@dataclass(frozen=True)
class Probes:
    """Named reference times in us."""

    t_A: float
    t_B: float
    t_R: float
    t_C: float
    t_e: float

    def as_dict(self) -> dict[str, float]:
        return {"t_A": self.t_A, "t_B": self.t_B, "t_R": self.t_R, "t_C": self.t_C, "t_e": self.t_e}


@dataclass(frozen=True)
class Protocol:
    """A pulse sequence on a level scheme, with relaxation and probe times.

    ``data_coherence`` and ``echo_coherence`` name the level pairs read by the
    echo analysis; ``echo_map`` is ``"inversion"`` (echo = -data),
    ``"conjugation"`` (echo = conj(data)) or ``"identity"`` (double rephasing).
    """

    scheme: LevelScheme
    pulses: tuple[Pulse, ...]
    decay: DecayConfig
    probes: Optional[Probes]
    t_end: float
    label: str = ""
    access: Optional[AccessMode] = None
    data_coherence: tuple[int, int] = (1, 3)
    echo_coherence: tuple[int, int] = (2, 3)
    echo_map: str = "inversion"
    raman_symmetric: bool = True
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        pulses = tuple(sorted(self.pulses, key=lambda p: (p.t_start, p.transition)))
        object.__setattr__(self, "pulses", pulses)
        self.validate()

    def validate(self, tol: float = 1e-9) -> None:
        for p in self.pulses:
            if p.transition not in self.scheme.transitions:
                raise ConfigurationError(
                    f"pulse {p.name or p.transition} is on a transition the scheme lacks"
                )
        for a in self.pulses:
            for b in self.pulses:
                if a is not b and a.transition == b.transition and (
                    a.t_start < b.t_end - tol and b.t_start < a.t_end - tol
                ):
                    raise ConfigurationError(
                        f"pulses {a.name or a.t_start} and {b.name or b.t_start} overlap "
                        f"on transition {a.transition}"
                    )
        if self.decay.max_level() > self.scheme.n_levels:
            raise ConfigurationError("decay config refers to a level outside the scheme")
        for pair in (self.data_coherence, self.echo_coherence):
            if not all(1 <= k <= self.scheme.n_levels for k in pair) or pair[0] == pair[1]:
                raise ConfigurationError(f"coherence {pair} is not valid for this scheme")
        if any(p.t_end > self.t_end + tol for p in self.pulses):
            raise ConfigurationError("a pulse extends beyond the timeline end")
        pr = self.probes
        if pr is None:
            return
        if not (pr.t_A <= pr.t_B + tol and pr.t_B < pr.t_R and pr.t_R < pr.t_C
                and pr.t_C <= pr.t_e + tol):
            raise ConfigurationError(f"probe times out of order: {pr}")
        if self.raman_symmetric and abs((pr.t_C - pr.t_R) - (pr.t_R - pr.t_B)) > 1e-6:
            raise ConfigurationError(
                f"rephasing symmetry broken: t_C - t_R = {pr.t_C - pr.t_R:.6g} but "
                f"t_R - t_B = {pr.t_R - pr.t_B:.6g}"
            )

    def pulse(self, name: str) -> Pulse:
        for p in self.pulses:
            if p.name == name:
                return p
        raise KeyError(name)

    def pulses_named(self, prefix: str) -> list[Pulse]:
        return [p for p in self.pulses if p.name.startswith(prefix)]

    def without(self, prefix: str) -> "Protocol":
        """Copy with every pulse whose name starts with ``prefix`` removed."""
        return replace(self, pulses=tuple(p for p in self.pulses if not p.name.startswith(prefix)),
                       label=f"{self.label} (no {prefix})")

    def with_decay(self, decay: DecayConfig) -> "Protocol":
        return replace(self, decay=decay)

    def before(self, t: float) -> tuple[Pulse, ...]:
        return tuple(p for p in self.pulses if p.t_start < t)


def pulse_area(p: Pulse) -> float:
    """Rotation angle in radians of a rectangular pulse: ``2 pi * rabi * duration``."""
    return TWO_PI * p.rabi * p.duration


def generalized_rabi(rabi_a: float, rabi_b: float) -> float:
    """Rabi frequency of a two-field Raman pulse, ``sqrt(a**2 + b**2)``."""
    if rabi_a < 0 or rabi_b < 0:
        raise ConfigurationError("Rabi frequencies must be non-negative")
    return math.hypot(rabi_a, rabi_b)


def _mode(mode) -> AccessMode:
    try:
        return AccessMode(mode)
    except ValueError:
        raise ConfigurationError(f"unknown access mode {mode!r}") from None


def _optical_dephasing(pairs, rate: float) -> DecayConfig:
    return DecayConfig(dephasing={pair: rate for pair in pairs} if rate else {})


def _raman_pair(legs, t_start: float, rabi: float = RABI_RAMAN) -> list[Pulse]:
    return [Pulse(leg, rabi, t_start, RAMAN_DURATION, name=f"R{k}") for k, leg in enumerate(legs, 1)]


def controlled_echo_protocol(
    mode=AccessMode.COUNTER_INTUITIVE,
    *,
    t_C: Optional[float] = None,
    optical_dephasing: float = OPTICAL_DEPHASING,
    spin_dephasing: float = 0.0,
    rephasing: bool = True,
) -> Protocol:
    """Lambda-system controlled echo: data A, transfer B, Raman rephasing R, read-out C.

    The read-out time defaults to ``2 t_R - t_B`` so the spin coherence rephases
    at C. Passing ``t_C`` (e.g. 19.0)
    overrides it and relaxes the symmetry check. ``rephasing=False`` drops R.
    """
    mode = _mode(mode)
    symmetric = t_C is None
    t_C = 2 * T_R - T_B if t_C is None else float(t_C)
    c_leg = (1, 3) if mode is AccessMode.COUNTER_INTUITIVE else (2, 3)
    pulses = [
        Pulse((1, 3), RABI_DATA, T_A, PULSE_DURATION, name="A"),
        Pulse((2, 3), RABI_CONTROL, T_B, PULSE_DURATION, name="B"),
        Pulse(c_leg, RABI_CONTROL, t_C, PULSE_DURATION, name="C"),
    ]
    if rephasing:
        pulses += _raman_pair([(1, 3), (2, 3)], T_R)
    decay = _optical_dephasing([(1, 3), (2, 3)], optical_dephasing)
    if spin_dephasing:
        decay = DecayConfig({**decay.dephasing, (1, 2): spin_dephasing})
    t_e = t_C + PULSE_DURATION
    counter = mode is AccessMode.COUNTER_INTUITIVE
    return Protocol(
        scheme=LevelScheme.lambda_system(),
        pulses=tuple(pulses),
        decay=decay,
        probes=Probes(T_A, T_B, T_R, t_C, t_e),
        t_end=t_e + ECHO_WINDOW,
        label=f"fig1-{mode.value}",
        access=mode,
        data_coherence=(1, 3),
        echo_coherence=(2, 3) if counter else (1, 3),
        echo_map="inversion" if counter else "conjugation",
        raman_symmetric=symmetric,
    )


def resonant_raman_protocol(
    mode=AccessMode.COUNTER_INTUITIVE,
    *,
    optical_dephasing: float = OPTICAL_DEPHASING,
    rephasing: bool = True,
) -> Protocol:
    """Controlled echo with a simultaneous Raman data pulse D = A + B of area pi.

    B's Rabi frequency is fixed by ``sqrt(Omega_A**2 + Omega_B**2) = 5 MHz``.
    The read-out is placed at ``2 t_R - t_D`` with ``t_D = t_A``.
    """
    mode = _mode(mode)
    rabi_b = math.sqrt(RABI_CONTROL**2 - RABI_DATA**2)
    t_C = 2 * T_R - T_A
    c_leg = (1, 3) if mode is AccessMode.COUNTER_INTUITIVE else (2, 3)
    pulses = [
        Pulse((1, 3), RABI_DATA, T_A, PULSE_DURATION, name="A"),
        Pulse((2, 3), rabi_b, T_A, PULSE_DURATION, name="B"),
        Pulse(c_leg, RABI_CONTROL, t_C, PULSE_DURATION, name="C"),
    ]
    if rephasing:
        pulses += _raman_pair([(1, 3), (2, 3)], T_R)
    t_e = t_C + PULSE_DURATION
    counter = mode is AccessMode.COUNTER_INTUITIVE
    return Protocol(
        scheme=LevelScheme.lambda_system(),
        pulses=tuple(pulses),
        decay=_optical_dephasing([(1, 3), (2, 3)], optical_dephasing),
        probes=Probes(T_A, T_A, T_R, t_C, t_e),
        t_end=t_e + ECHO_WINDOW,
        label=f"fig2-{mode.value}",
        access=mode,
        data_coherence=(1, 3),
        echo_coherence=(2, 3) if counter else (1, 3),
        echo_map="inversion" if counter else "conjugation",
    )


def wavelength_convert_protocol(
    mode=AccessMode.COUNTER_INTUITIVE,
    *,
    optical_dephasing: float = OPTICAL_DEPHASING_4LEVEL,
    rephasing: bool = True,
) -> Protocol:
    """Double-lambda echo with Raman rephasing through |4> and read-out C_n.

    Counter-intuitive C_n on |1>-|4> emits on |2>-|4> (a different wavelength
    from the data on |1>-|3>); conventional C_n on |2>-|4> emits on |1>-|4>.
    Optical dephasing applies to every coherence except the spin pair (1, 2).
    """
    mode = _mode(mode)
    t_C = 2 * T_R - T_B
    counter = mode is AccessMode.COUNTER_INTUITIVE
    cn_leg = (1, 4) if counter else (2, 4)
    pulses = [
        Pulse((1, 3), RABI_DATA / math.sqrt(2.0), T_A, PULSE_DURATION, name="A"),
        Pulse((2, 3), RABI_CONTROL, T_B, PULSE_DURATION, name="B"),
        Pulse(cn_leg, RABI_CONTROL, t_C, PULSE_DURATION, name="Cn"),
    ]
    if rephasing:
        pulses += _raman_pair([(1, 4), (2, 4)], T_R)
    optical = [(1, 3), (2, 3), (1, 4), (2, 4), (3, 4)]
    t_e = t_C + PULSE_DURATION
    return Protocol(
        scheme=LevelScheme.double_lambda(),
        pulses=tuple(pulses),
        decay=_optical_dephasing(optical, optical_dephasing),
        probes=Probes(T_A, T_B, T_R, t_C, t_e),
        t_end=t_e + ECHO_WINDOW,
        label=f"fig3-{mode.value}",
        access=mode,
        data_coherence=(1, 3),
        echo_coherence=(2, 4) if counter else (1, 4),
        echo_map="inversion" if counter else "conjugation",
    )


def two_level_echo_protocol(
    double: bool = False,
    *,
    t_A: float = 1.0,
    t_R: float = 5.0,
    data_rabi: float = 5.0,
    rephase_rabi: float = 50.0,
    duration: float = 0.01,
) -> Protocol:
    """Two-level photon echo: weak data pulse, pi rephasing, echo at ``2 t_R - t_A``.

    The spin-group grid is reused as the optical detuning of level |2>. With
    ``double=True`` a second pi pulse rephases the first echo again. Short hard
    pulses (default 0.01 us) keep the echo time within one sample of the ideal.
    """
    pi_duration = 0.5 / rephase_rabi
    pulses = [
        Pulse((1, 2), data_rabi, t_A, duration, name="A"),
        Pulse((1, 2), rephase_rabi, t_R, pi_duration, name="R1"),
    ]
    echo = 2 * t_R - t_A
    probes = Probes(t_A, t_A, t_R, echo, echo)
    if double:
        t_R2 = 2 * t_R - t_A + (t_R - t_A)
        pulses.append(Pulse((1, 2), rephase_rabi, t_R2, pi_duration, name="R2"))
        echo = 2 * t_R2 - echo
        probes = Probes(t_A, t_A, t_R, echo, echo)
    return Protocol(
        scheme=LevelScheme.two_level(),
        pulses=tuple(pulses),
        decay=DecayConfig.none(),
        probes=probes,
        t_end=echo + ECHO_WINDOW,
        label="two-level-double" if double else "two-level",
        data_coherence=(1, 2),
        echo_coherence=(1, 2),
        echo_map="identity" if double else "conjugation",
        raman_symmetric=False,
        metadata={"rephasing_times": [p.t_start for p in pulses[1:]]},
    )


PROTOCOLS = {
    "fig1": controlled_echo_protocol,
    "fig2": resonant_raman_protocol,
    "fig3": wavelength_convert_protocol,
}


def named_protocol(name: str, mode=AccessMode.COUNTER_INTUITIVE) -> Protocol:
    """Look up a named protocol (``fig1``, ``fig2``, ``fig3``, ``two-level``, ``two-level-double``)."""
    if name in PROTOCOLS:
        return PROTOCOLS[name](mode)
    if name == "two-level":
        return two_level_echo_protocol()
    if name == "two-level-double":
        return two_level_echo_protocol(double=True)
    raise ConfigurationError(
        f"unknown protocol {name!r}; choose from {sorted(PROTOCOLS) + ['two-level', 'two-level-double']}"
    )
