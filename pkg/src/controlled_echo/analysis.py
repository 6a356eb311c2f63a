"""Closed-form coherence maps, echo metrics and phase matching.

Sign conventions follow :mod:`controlled_echo.core`: a resonant pulse from
``rho_11 = 1`` gives ``rho_13 = -(i/2) sin(area)``, and the spin coherence of a
group detuned by ``delta`` evolves as ``exp(-i 2 pi delta t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .core import KHZ, TWO_PI
from .errors import ConfigurationError, DomainError
from .protocols import ECHO_WINDOW, AccessMode, Probes, Protocol

NULL_ECHO = 1e-6

AFTER_B = "after_B"
AFTER_B_AND_C = "after_B_and_C"


def ccc_map(rho13: complex, stage: str) -> complex:
    """Coherence after controlled transfer by pi pulses on |2>-|3>.

    ``after_B``: the optical coherence is now the spin coherence ``-i rho13``.
    ``after_B_and_C``: a full |2>-|3> cycle returns it inverted, ``-rho13``.
    """
    if abs(rho13) > 0.5 + 1e-12:
        raise DomainError(f"|rho13| = {abs(rho13):.4g} exceeds 1/2")
    if stage == AFTER_B:
        return -1j * rho13
    if stage == AFTER_B_AND_C:
        return -rho13
    raise ConfigurationError(f"unknown stage {stage!r}")


def phase_evolution_oracle(
    rho13_at_tA: complex,
    delta: float,
    t: float,
    probes: Probes,
    access=AccessMode.COUNTER_INTUITIVE,
    T2: float = math.inf,
) -> complex:
    """Ideal (instantaneous-pulse) coherence of one spin group at time ``t``.

    Between B and R this is the spin coherence ``rho_12 = -i rho13 e^{-i 2 pi delta (t - t_B)}``;
    R conjugates it, so between R and C
    ``rho_12 = i conj(rho13) e^{-i 2 pi delta (t - t_R - T)}`` with ``T = t_R - t_B``,
    which equals ``i conj(rho13)`` at ``t_C = t_B + 2T``. From ``t_C`` on the value
    returned is the echo coherence: ``rho_23 = -i conj(rho_12(t_C))`` for
    counter-intuitive read-out, ``rho_13 = -i rho_12(t_C)`` for conventional, both
    damped by ``exp(-(t - t_C)/T2)``.

    Args:
        delta: group detuning in cyclic kHz.
        probes: reference times; pass pulse centres for finite-pulse comparisons.
    """
    access = AccessMode(access)
    w = TWO_PI * delta * KHZ
    if t < probes.t_B - 1e-12 or t > probes.t_e + ECHO_WINDOW + 1e-12:
        raise DomainError(f"t = {t} outside [{probes.t_B}, {probes.t_e + ECHO_WINDOW}]")
    if t < probes.t_R:
        return -1j * rho13_at_tA * np.exp(-1j * w * (t - probes.t_B))
    T = probes.t_R - probes.t_B

    def spin(tt):
        return 1j * np.conj(rho13_at_tA) * np.exp(-1j * w * (tt - probes.t_R - T))

    if t < probes.t_C:
        return spin(t)
    rho12_C = spin(probes.t_C)
    dt = t - probes.t_C
    decay = 0.0 if math.isinf(T2) else dt / T2
    if access is AccessMode.COUNTER_INTUITIVE:
        # rho_23 picks up the |2> precession after read-out
        return -1j * np.conj(rho12_C) * np.exp(1j * w * dt - decay)
    return -1j * rho12_C * np.exp(-decay)


@dataclass
class EchoReport:
    """Echo metrics of one ensemble run."""

    protocol: str
    echo_map: str
    echo_time: float
    data_coherence: complex
    echo_coherence: complex
    echo_peak: float
    inversion_ratio: float
    excited_pop_at_data: float
    excited_pop_at_echo: float
    ground_pop_at_echo: float
    population_inverted: bool
    emissive: bool
    null_echo: bool

    def to_lines(self) -> list[str]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool):
                v = str(v).lower()
            elif isinstance(v, complex):
                v = f"{v.real:.12g}{v.imag:+.12g}j"
            elif isinstance(v, float):
                v = f"{v:.12g}"
            out.append(f"{f.name}={v}")
        return out


def _sign(x: float) -> int:
    return int(np.sign(x))


def extract_echo_metrics(run, protocol: Protocol) -> EchoReport:
    """Read data and echo coherences from an ensemble run.

    The data coherence is taken at the end of pulse A; the echo is the sample of
    largest ``|Im|`` on the echo coherence within ``[t_C, t_C + 2 us]``; populations
    are read at ``t_e``. Emissive means the echo's imaginary part has the opposite
    sign to the data's (both the inversion and conjugation maps flip it).
    """
    pr = protocol.probes
    if pr is None:
        raise ConfigurationError("protocol has no probe times")
    di, dj = protocol.data_coherence
    ei, ej = protocol.echo_coherence
    t_data = protocol.pulse("A").t_end
    data = complex(run.at(t_data)[di - 1, dj - 1])
    trace = run.mean_rho[:, ei - 1, ej - 1]
    window = (run.times >= pr.t_C - 1e-9) & (run.times <= pr.t_C + ECHO_WINDOW + 1e-9)
    if not window.any():
        raise ConfigurationError("run does not cover the echo window")
    k = int(np.argmax(np.where(window, np.abs(trace.imag), -1.0)))
    echo = complex(trace[k])
    peak = abs(echo.imag)
    null = peak < NULL_ECHO
    rho_e = run.at(pr.t_e)
    upper, lower = ej, ei
    pop_up = float(rho_e[upper - 1, upper - 1].real)
    pop_lo = float(rho_e[lower - 1, lower - 1].real)
    pop_data = float(run.at(t_data)[dj - 1, dj - 1].real)
    ratio = echo.imag / data.imag if data.imag != 0 else math.nan
    emissive = (not null) and _sign(echo.imag) == -_sign(data.imag) != 0
    return EchoReport(
        protocol=protocol.label,
        echo_map=protocol.echo_map,
        echo_time=float(run.times[k]),
        data_coherence=data,
        echo_coherence=echo,
        echo_peak=peak,
        inversion_ratio=ratio,
        excited_pop_at_data=pop_data,
        excited_pop_at_echo=pop_up,
        ground_pop_at_echo=pop_lo,
        population_inverted=pop_up > pop_lo,
        emissive=emissive,
        null_echo=null,
    )


def loss_factor(delay: float, inhomogeneous_width: float, T2: float) -> float:
    """Coherence retained after a delay between A and B: ``exp(-delay (2 pi width + 1/T2))``.

    Args:
        delay: us. inhomogeneous_width: optical width, cyclic MHz. T2: optical T2, us.
    """
    if delay < 0 or inhomogeneous_width < 0 or T2 <= 0:
        raise ConfigurationError("loss_factor needs delay, width >= 0 and T2 > 0")
    eta = delay * (TWO_PI * inhomogeneous_width + 1.0 / T2)
    return math.exp(-eta)


def retrieval_efficiency(alpha_l: float) -> float:
    """Backward-echo retrieval efficiency ``(1 - exp(-alpha_l))**2`` at optical depth ``alpha_l``."""
    if alpha_l < 0:
        raise ConfigurationError(f"optical depth must be non-negative, got {alpha_l}")
    return (-math.expm1(-alpha_l)) ** 2


@dataclass(frozen=True)
class FieldMode:
    """Plane-wave field: angular frequency and wave vector, with c = 1."""

    omega: float
    k: tuple[float, float, float]

    @classmethod
    def along(cls, omega: float, direction) -> "FieldMode":
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        return cls(omega, tuple(omega * d))

    @property
    def kvec(self) -> np.ndarray:
        return np.asarray(self.k, dtype=float)


def phase_matching(a: FieldMode, b: FieldMode, cn: FieldMode) -> tuple[FieldMode, float]:
    """Four-wave-mixing echo mode ``omega_e = -omega_A + omega_B + omega_Cn``, ``k_e`` likewise.

    Returns the echo mode and the walk-off residual ``|k_e| - omega_e``.
    """
    omega = -a.omega + b.omega + cn.omega
    if omega < 0:
        raise ConfigurationError(f"unphysical configuration: echo frequency {omega:.6g} < 0")
    k = -a.kvec + b.kvec + cn.kvec
    return FieldMode(omega, tuple(k)), float(np.linalg.norm(k) - omega)


@dataclass
class SymmetryReport:
    im_flipped_fraction: float
    re_kept_fraction: float
    max_im_residual: float
    max_re_residual: float
    max_pair_re_sum: float
    max_ensemble_re: float
    peak_ensemble_im: float

    @property
    def passed(self) -> bool:
        return (self.im_flipped_fraction == 1.0 and self.re_kept_fraction == 1.0
                and self.max_pair_re_sum < 1e-10
                and self.max_ensemble_re < 1e-3 * self.peak_ensemble_im)


def rephasing_symmetry_check(run, t_R: float, duration: float = 0.01,
                             coherence: tuple[int, int] = (1, 2)) -> SymmetryReport:
    """Per-group sign behaviour of a two-level coherence across a pi pulse at ``t_R``.

    For each group the imaginary part (the cos component) must change sign and
    the real part (the sin component) must keep it; only groups whose component
    exceeds 5% of the largest one are judged. Also reports the largest
    ``Re`` sum over mirrored ``+-delta`` pairs and over the whole ensemble.
    """
    if run.per_group_rho is None:
        raise ConfigurationError("rephasing_symmetry_check needs per-group data (keep_groups=True)")
    rho = run.group_element(*coherence)  # (G, T)
    before = rho[:, int(np.searchsorted(run.times, t_R + 1e-9)) - 1]
    after = rho[:, int(np.searchsorted(run.times, t_R + duration - 1e-9))]

    def fraction(b, a, flip):
        judged = np.abs(b) > 0.05 * np.abs(b).max() if np.abs(b).max() > 0 else np.zeros_like(b, bool)
        if not judged.any():
            return 1.0
        ok = np.sign(a[judged]) == (-1 if flip else 1) * np.sign(b[judged])
        return float(ok.mean())

    det = run.detunings
    mirror = np.array([int(np.argmin(np.abs(det + d))) for d in det])
    pair_sum = np.abs(rho.real + rho[mirror].real).max()
    mean = run.mean_rho[:, coherence[0] - 1, coherence[1] - 1]
    return SymmetryReport(
        im_flipped_fraction=fraction(before.imag, after.imag, True),
        re_kept_fraction=fraction(before.real, after.real, False),
        max_im_residual=float(np.abs(after.imag + before.imag).max()),
        max_re_residual=float(np.abs(after.real - before.real).max()),
        max_pair_re_sum=float(pair_sum),
        max_ensemble_re=float(np.abs(mean.real).max()),
        peak_ensemble_im=float(np.abs(mean.imag).max()),
    )


def echo_recovery(run, protocol: Protocol, echo_time: Optional[float] = None) -> float:
    """``|mean echo coherence| / |mean data coherence|`` at the echo time (default ``t_e``)."""
    t = protocol.probes.t_e if echo_time is None else echo_time
    di, dj = protocol.data_coherence
    ei, ej = protocol.echo_coherence
    data = run.at(protocol.pulse("A").t_end)[di - 1, dj - 1]
    return float(abs(run.at(t)[ei - 1, ej - 1]) / abs(data))
