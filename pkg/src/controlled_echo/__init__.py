"""Controlled-echo quantum memory simulator.

Multilevel density-matrix dynamics under rectangular pulses, averaged over a
Gaussian grid of spin-inhomogeneous spectral groups, with closed-form coherence
maps to check the simulated echoes against.
"""

from .analysis import (
    EchoReport,
    FieldMode,
    ccc_map,
    extract_echo_metrics,
    loss_factor,
    phase_evolution_oracle,
    phase_matching,
    rephasing_symmetry_check,
    retrieval_efficiency,
)
from .core import (
    DecayConfig,
    LevelScheme,
    Pulse,
    TimeSeries,
    build_hamiltonian,
    build_liouvillian,
    propagate_interval,
    rk4_reference_step,
    simulate_group,
)
from .ensemble import (
    EnsembleSpec,
    EnsembleTimeSeries,
    SpinGroup,
    dephasing_envelope,
    make_gaussian_groups,
    simulate_ensemble,
)
from .errors import ConfigurationError, DomainError, NumericalError
from .protocols import (
    AccessMode,
    Probes,
    Protocol,
    controlled_echo_protocol,
    generalized_rabi,
    pulse_area,
    resonant_raman_protocol,
    two_level_echo_protocol,
    wavelength_convert_protocol,
)

__version__ = "0.1.0"
