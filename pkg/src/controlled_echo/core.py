"""Density-matrix dynamics for one spectral group under rectangular pulses.

Units: times in microseconds, Rabi frequencies, detunings and level shifts in
cyclic MHz, decay rates in cyclic kHz. The factor 2*pi (and kHz -> MHz) is
applied only inside :func:`build_hamiltonian` and :func:`build_liouvillian`.

Levels are numbered from 1 in the public API, as in the usual lambda and
double-lambda diagrams: |1>, |2> are ground (spin) states and |3>, |4> are
optically excited states. In the two-level scheme |2> is the excited state.

The density matrix obeys ``d(rho)/dt = -i [H, rho] + D(rho)`` with
``H = -(1/2) * sum_p 2*pi*Omega_p (e^{i phi_p} |l><u| + h.c.)`` plus diagonal
shifts ``H_kk = -2*pi*(shift_k + detuning terms)``. Vectorization is row-major:
``vec(A rho B) = (A kron B.T) vec(rho)``.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

import numpy as np
from scipy.linalg import expm

from .errors import ConfigurationError, NumericalError

if TYPE_CHECKING:
    from .protocols import Protocol

TWO_PI = 2.0 * math.pi
KHZ = 1e-3  # cyclic kHz -> cyclic MHz

# Index of the lower spin level |2> that carries the spin-group detuning.
SPIN_LEVEL = 2

_EDGE_TOL = 1e-9


@dataclass(frozen=True)
class LevelScheme:
    """Level count, drivable transitions and static per-level shifts (MHz)."""

    n_levels: int
    transitions: tuple[tuple[int, int], ...]
    level_shifts: tuple[float, ...] = ()

    def __post_init__(self):
        if self.n_levels not in (2, 3, 4):
            raise ConfigurationError(f"n_levels must be 2, 3 or 4, got {self.n_levels}")
        shifts = tuple(float(s) for s in self.level_shifts) or (0.0,) * self.n_levels
        if len(shifts) != self.n_levels:
            raise ConfigurationError(
                f"level_shifts needs {self.n_levels} entries, got {len(shifts)}"
            )
        object.__setattr__(self, "level_shifts", shifts)
        pairs = tuple((int(lo), int(up)) for lo, up in self.transitions)
        for lo, up in pairs:
            if not (lo < up and lo in self.ground_levels and up in self.excited_levels):
                raise ConfigurationError(
                    f"transition ({lo}, {up}) must join a ground level "
                    f"{self.ground_levels} to an excited level {self.excited_levels}"
                )
        object.__setattr__(self, "transitions", pairs)

    @property
    def ground_levels(self) -> tuple[int, ...]:
        return (1,) if self.n_levels == 2 else (1, 2)

    @property
    def excited_levels(self) -> tuple[int, ...]:
        return tuple(range(len(self.ground_levels) + 1, self.n_levels + 1))

    @classmethod
    def two_level(cls) -> "LevelScheme":
        return cls(2, ((1, 2),))

    @classmethod
    def lambda_system(cls) -> "LevelScheme":
        return cls(3, ((1, 3), (2, 3)))

    @classmethod
    def double_lambda(cls) -> "LevelScheme":
        return cls(4, ((1, 3), (2, 3), (1, 4), (2, 4)))


@dataclass(frozen=True)
class Pulse:
    """Rectangular drive on one transition.

    Args:
        transition: ``(lower, upper)`` level pair, 1-based.
        rabi: Rabi frequency in cyclic MHz.
        t_start: switch-on time in us.
        duration: length in us.
        phase: field phase in radians.
        detuning: laser detuning from the transition in cyclic MHz; it enters the
            Hamiltonian only while the pulse is on.
    """

    transition: tuple[int, int]
    rabi: float
    t_start: float
    duration: float
    phase: float = 0.0
    detuning: float = 0.0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "transition", tuple(int(i) for i in self.transition))
        if len(self.transition) != 2:
            raise ConfigurationError(f"transition must be a level pair, got {self.transition}")
        if not self.duration > 0:
            raise ConfigurationError(f"pulse duration must be positive, got {self.duration}")
        if self.rabi < 0:
            raise ConfigurationError(f"Rabi frequency must be non-negative, got {self.rabi}")

    @property
    def t_end(self) -> float:
        return self.t_start + self.duration

    @property
    def area(self) -> float:
        return TWO_PI * self.rabi * self.duration


@dataclass(frozen=True)
class DecayConfig:
    """Phenomenological relaxation, rates in cyclic kHz.

    ``dephasing`` maps a level pair to the damping rate of that coherence;
    ``population_decay`` maps ``(upper, lower)`` to a population transfer rate.
    """

    dephasing: Mapping[tuple[int, int], float] = field(default_factory=dict)
    population_decay: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        deph = {}
        for (i, j), rate in self.dephasing.items():
            if i == j:
                raise ConfigurationError(f"dephasing needs an off-diagonal pair, got ({i}, {j})")
            key = (min(i, j), max(i, j))
            if rate < 0:
                raise ConfigurationError(f"negative dephasing rate for {key}: {rate}")
            if key in deph and deph[key] != rate:
                raise ConfigurationError(f"conflicting dephasing rates for {key}")
            deph[key] = float(rate)
        pop = {}
        for (u, l), rate in self.population_decay.items():
            if rate < 0 or u == l:
                raise ConfigurationError(f"invalid population decay {u}->{l}: {rate}")
            pop[(int(u), int(l))] = float(rate)
        object.__setattr__(self, "dephasing", deph)
        object.__setattr__(self, "population_decay", pop)

    def gamma(self, i: int, j: int) -> float:
        return self.dephasing.get((min(i, j), max(i, j)), 0.0)

    def T2(self, i: int, j: int) -> float:
        """Coherence lifetime 1/(2 pi gamma_ij) in us (``inf`` without dephasing)."""
        g = self.gamma(i, j)
        return math.inf if g == 0 else 1.0 / (TWO_PI * g * KHZ)

    def max_level(self) -> int:
        levels = [k for pair in self.dephasing for k in pair]
        levels += [k for pair in self.population_decay for k in pair]
        return max(levels, default=0)

    @classmethod
    def none(cls) -> "DecayConfig":
        return cls()


def build_hamiltonian(
    scheme: LevelScheme, active_pulses: Iterable[Pulse], group_shift: float = 0.0
) -> np.ndarray:
    """Rotating-frame Hamiltonian in angular MHz (rad/us).

    Each pulse on ``(l, u)`` contributes ``-pi * rabi * e^{i phase}`` at ``(l, u)``
    and the conjugate at ``(u, l)``; its detuning enters as ``-2 pi detuning`` on
    the upper level. ``group_shift`` (cyclic MHz) shifts level |2> only.

    Raises:
        ConfigurationError: unknown transition, or two pulses on one transition.
    """
    n = scheme.n_levels
    H = np.zeros((n, n), dtype=complex)
    diag = np.array(scheme.level_shifts, dtype=float)
    if n >= SPIN_LEVEL:
        diag[SPIN_LEVEL - 1] += group_shift
    seen = set()
    for p in active_pulses:
        if p.transition not in scheme.transitions:
            raise ConfigurationError(
                f"pulse {p.name or p.transition} drives {p.transition}, which is not in "
                f"the scheme's transitions {scheme.transitions}"
            )
        if p.transition in seen:
            raise ConfigurationError(f"overlapping pulses on transition {p.transition}")
        seen.add(p.transition)
        lo, up = p.transition[0] - 1, p.transition[1] - 1
        coupling = -0.5 * TWO_PI * p.rabi * np.exp(1j * p.phase)
        H[lo, up] += coupling
        H[up, lo] += np.conj(coupling)
        diag[up] += p.detuning
    H[np.diag_indices(n)] = -TWO_PI * diag
    return H


def _decay_generator(n: int, decay: DecayConfig) -> np.ndarray:
    if decay.max_level() > n:
        raise ConfigurationError(f"decay config refers to level {decay.max_level()} > {n}")
    D = np.zeros((n * n, n * n))
    idx = lambda i, j: (i - 1) * n + (j - 1)  # noqa: E731
    for (i, j), rate in decay.dephasing.items():
        g = TWO_PI * rate * KHZ
        D[idx(i, j), idx(i, j)] -= g
        D[idx(j, i), idx(j, i)] -= g
    for (u, l), rate in decay.population_decay.items():
        g = TWO_PI * rate * KHZ
        D[idx(u, u), idx(u, u)] -= g
        D[idx(l, l), idx(u, u)] += g
        for k in range(1, n + 1):
            if k != u:
                D[idx(u, k), idx(u, k)] -= 0.5 * g
                D[idx(k, u), idx(k, u)] -= 0.5 * g
    return D


def build_liouvillian(H: np.ndarray, decay: DecayConfig) -> np.ndarray:
    """Generator ``L`` with ``d vec(rho)/dt = L @ vec(rho)`` (row-major vec).

    Off-diagonal ``rho_ij`` is damped at ``2 pi gamma_ij``. A decay channel
    ``u -> l`` moves ``2 pi Gamma rho_uu`` into ``rho_ll`` and damps coherences
    touching ``u`` at half that rate.
    """
    n = H.shape[0]
    eye = np.eye(n)
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    return L + _decay_generator(n, decay)


def _shift_generator(n: int) -> np.ndarray:
    """Diagonal of dL/d(group_shift) for a shift of level |2>, per cyclic MHz."""
    if n < SPIN_LEVEL:
        return np.zeros(n * n, dtype=complex)
    e = np.zeros(n)
    e[SPIN_LEVEL - 1] = 1.0
    # [dH, rho]_ij = -2 pi (e_i - e_j) rho_ij
    return 1j * TWO_PI * (e[:, None] - e[None, :]).ravel()


def propagate_interval(rho: np.ndarray, L: np.ndarray, dt: float) -> np.ndarray:
    """Exact propagation ``exp(L dt) vec(rho)`` over one constant-drive interval."""
    if not dt > 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    n = rho.shape[-1]
    P = expm(L * dt)
    if not np.all(np.isfinite(P)):
        raise NumericalError(
            f"matrix exponential is not finite (dt={dt}, |L|={np.linalg.norm(L):.3g})"
        )
    return (P @ rho.reshape(n * n)).reshape(n, n)


def rk4_reference_step(rho: np.ndarray, L: np.ndarray, dt: float) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step; a cross-check, not a solver.

    Requires ``||L||_2 * dt < 0.1``.
    """
    scale = np.linalg.norm(L, 2) * dt
    if scale >= 0.1:
        raise ConfigurationError(
            f"RK4 step too coarse: ||L||*dt = {scale:.3g} >= 0.1; "
            f"use dt < {0.1 / np.linalg.norm(L, 2):.3g} or rk4_propagate"
        )
    n = rho.shape[-1]
    v = rho.reshape(n * n)
    k1 = L @ v
    k2 = L @ (v + 0.5 * dt * k1)
    k3 = L @ (v + 0.5 * dt * k2)
    k4 = L @ (v + dt * k3)
    return (v + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)).reshape(n, n)


def rk4_propagate(rho: np.ndarray, L: np.ndarray, dt: float, step_scale: float = 0.01) -> np.ndarray:
    """Propagate over ``dt`` with equal RK4 substeps of ``||L|| h <= step_scale``."""
    norm = np.linalg.norm(L, 2)
    steps = max(1, math.ceil(norm * dt / step_scale))
    h = dt / steps
    for _ in range(steps):
        rho = rk4_reference_step(rho, L, h)
    return rho


def state_errors(rho: np.ndarray) -> tuple[float, float, float, float]:
    """Hermiticity error, trace drift, min and max population for ``(..., N, N)``."""
    herm = float(np.max(np.abs(rho - np.conj(np.swapaxes(rho, -1, -2))), initial=0.0))
    diag = np.diagonal(rho, axis1=-2, axis2=-1)
    trace = float(np.max(np.abs(diag.sum(axis=-1) - 1.0), initial=0.0))
    return herm, trace, float(diag.real.min()), float(diag.real.max())


def ground_state(n: int) -> np.ndarray:
    rho = np.zeros((n, n), dtype=complex)
    rho[0, 0] = 1.0
    return rho


@dataclass
class TimeSeries:
    """Sampled density matrices of one spectral group."""

    times: np.ndarray
    rho: np.ndarray  # (T, N, N)
    diagnostics: dict = field(default_factory=dict)

    def index(self, t: float) -> int:
        return int(np.argmin(np.abs(self.times - t)))

    def at(self, t: float) -> np.ndarray:
        return self.rho[self.index(t)]

    def element(self, i: int, j: int) -> np.ndarray:
        """Time trace of ``rho_ij`` (1-based levels)."""
        return self.rho[:, i - 1, j - 1]


@dataclass
class _Interval:
    t0: float
    t1: float
    active: tuple[int, ...]
    sample: Optional[int]  # sample index recorded at t1


def sample_times(t_end: float, sample_dt: float) -> np.ndarray:
    if not sample_dt > 0:
        raise ConfigurationError(f"sample_dt must be positive, got {sample_dt}")
    n = int(math.floor(t_end / sample_dt + 1e-9))
    return np.arange(n + 1) * sample_dt


def timeline(pulses: Sequence[Pulse], t_end: float, sample_dt: float) -> tuple[np.ndarray, list[_Interval]]:
    """Split ``[0, t_end]`` at every pulse edge and sample point."""
    for p in pulses:
        if p.t_start < -_EDGE_TOL or p.t_end > t_end + _EDGE_TOL:
            raise ConfigurationError(
                f"pulse {p.name or p.transition} [{p.t_start}, {p.t_end}] lies outside "
                f"the timeline [0, {t_end}]"
            )
    times = sample_times(t_end, sample_dt)
    points = {float(t): i for i, t in enumerate(times)}
    grid = sorted(points)
    for edge in sorted({p.t_start for p in pulses} | {p.t_end for p in pulses}):
        k = np.searchsorted(grid, edge)
        near = [grid[m] for m in (k - 1, k) if 0 <= m < len(grid)]
        if not any(abs(edge - g) < _EDGE_TOL for g in near):
            grid.insert(k, edge)
    intervals = []
    for t0, t1 in zip(grid[:-1], grid[1:]):
        mid = 0.5 * (t0 + t1)
        active = tuple(i for i, p in enumerate(pulses) if p.t_start < mid < p.t_end)
        intervals.append(_Interval(t0, t1, active, points.get(t1)))
    return times, intervals


def evolve_groups(
    protocol: "Protocol",
    shifts: np.ndarray,
    sample_dt: float = 0.01,
    rho0: Optional[np.ndarray] = None,
    *,
    weights: Optional[np.ndarray] = None,
    check: bool = False,
    method: str = "expm",
):
    """Propagate a batch of spectral groups through ``protocol``.

    Args:
        shifts: per-group shift of level |2> in cyclic MHz, shape ``(G,)``.
        weights: if given, return the weighted sum over groups at each sample
            instead of every group's trajectory.
        check: track Hermiticity / trace / population bounds after every interval.
        method: ``"expm"`` (exact per interval) or ``"rk4"`` (reference substepping).

    Returns:
        ``(times, rho, diagnostics)`` where ``rho`` is ``(G, T, N, N)`` or
        ``(T, N, N)`` when ``weights`` is given.
    """
    scheme, decay = protocol.scheme, protocol.decay
    n = scheme.n_levels
    shifts = np.atleast_1d(np.asarray(shifts, dtype=float))
    G = shifts.size
    times, intervals = timeline(protocol.pulses, protocol.t_end, sample_dt)
    start = ground_state(n) if rho0 is None else np.asarray(rho0, dtype=complex)
    if start.shape != (n, n):
        raise ConfigurationError(f"initial state must be {n}x{n}, got {start.shape}")
    vecs = np.tile(start.reshape(n * n), (G, 1))

    if weights is None:
        out = np.empty((G, times.size, n, n), dtype=complex)
        out[:, 0] = start
    else:
        weights = np.asarray(weights, dtype=float)
        out = np.empty((times.size, n, n), dtype=complex)
        out[0] = (weights @ vecs).reshape(n, n)

    dshift = _shift_generator(n)
    generators: dict[tuple[int, ...], np.ndarray] = {}
    propagators: dict[tuple, np.ndarray] = {}
    diag = {"max_hermiticity_error": 0.0, "max_trace_drift": 0.0,
            "min_population": 1.0, "max_population": 0.0}
    if check:
        _update_diag(diag, start[None])

    for iv in intervals:
        dt = iv.t1 - iv.t0
        if iv.active not in generators:
            H = build_hamiltonian(scheme, [protocol.pulses[i] for i in iv.active])
            generators[iv.active] = build_liouvillian(H, decay)
        L0 = generators[iv.active]
        if method == "expm":
            key = (iv.active, round(dt, 12))
            P = propagators.get(key)
            if P is None:
                Ls = L0[None] + shifts[:, None, None] * np.diag(dshift)[None]
                P = expm(Ls * dt)
                if not np.all(np.isfinite(P)):
                    raise NumericalError(
                        f"non-finite propagator on [{iv.t0}, {iv.t1}] with pulses {iv.active}"
                    )
                propagators[key] = P
            vecs = np.einsum("gij,gj->gi", P, vecs)
        elif method == "rk4":
            Ls = L0[None] + shifts[:, None, None] * np.diag(dshift)[None]
            norm = max(np.linalg.norm(L, 2) for L in Ls)
            steps = max(1, math.ceil(norm * dt / 0.01))
            h = dt / steps
            for _ in range(steps):
                k1 = np.einsum("gij,gj->gi", Ls, vecs)
                k2 = np.einsum("gij,gj->gi", Ls, vecs + 0.5 * h * k1)
                k3 = np.einsum("gij,gj->gi", Ls, vecs + 0.5 * h * k2)
                k4 = np.einsum("gij,gj->gi", Ls, vecs + h * k3)
                vecs = vecs + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        else:
            raise ConfigurationError(f"unknown propagation method {method!r}")
        if check:
            _update_diag(diag, vecs.reshape(G, n, n))
        if iv.sample is not None:
            if weights is None:
                out[:, iv.sample] = vecs.reshape(G, n, n)
            else:
                out[iv.sample] = (weights @ vecs).reshape(n, n)
    return times, out, (diag if check else {})


def _update_diag(diag: dict, rhos: np.ndarray) -> None:
    herm, trace, lo, hi = state_errors(rhos)
    diag["max_hermiticity_error"] = max(diag["max_hermiticity_error"], herm)
    diag["max_trace_drift"] = max(diag["max_trace_drift"], trace)
    diag["min_population"] = min(diag["min_population"], lo)
    diag["max_population"] = max(diag["max_population"], hi)


def simulate_group(
    protocol: "Protocol",
    group=None,
    sample_dt: float = 0.01,
    rho0: Optional[np.ndarray] = None,
    *,
    check: bool = False,
    method: str = "expm",
) -> TimeSeries:
    """Run one spectral group (``group.detuning`` in cyclic kHz) through a protocol.

    Starts from ``rho_11 = 1`` unless ``rho0`` is given and records the state at
    every multiple of ``sample_dt`` up to ``protocol.t_end``.
    """
    shift = 0.0 if group is None else group.detuning * KHZ
    times, rho, diag = evolve_groups(
        protocol, np.array([shift]), sample_dt, rho0, check=check, method=method
    )
    return TimeSeries(times, rho[0], diag)
