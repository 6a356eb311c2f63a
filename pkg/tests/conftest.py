import numpy as np
import pytest

from controlled_echo.core import DecayConfig, LevelScheme, Pulse
from controlled_echo.protocols import Protocol


def single_pulse_protocol(rabi=5.0, duration=0.1, n_levels=2, transition=(1, 2),
                          t_start=0.0, t_end=None, decay=None, phase=0.0):
    scheme = {2: LevelScheme.two_level(), 3: LevelScheme.lambda_system(),
              4: LevelScheme.double_lambda()}[n_levels]
    pulse = Pulse(transition, rabi, t_start, duration, phase=phase, name="A")
    return Protocol(scheme, (pulse,), decay or DecayConfig(), None,
                    t_end if t_end is not None else t_start + duration,
                    data_coherence=transition, echo_coherence=transition, raman_symmetric=False)


def free_protocol(n_levels=3, t_end=1.0, decay=None):
    scheme = {2: LevelScheme.two_level(), 3: LevelScheme.lambda_system(),
              4: LevelScheme.double_lambda()}[n_levels]
    data = (1, 2) if n_levels == 2 else (1, 3)
    return Protocol(scheme, (), decay or DecayConfig(), None, t_end,
                    data_coherence=data, echo_coherence=data, raman_symmetric=False)


def random_density_matrix(n, rng):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
