"""Single-group warm-up: a resonant pulse, the exact propagator and the RK4 cross-check."""
# %%
import math

import numpy as np

from controlled_echo import DecayConfig, LevelScheme, Pulse, build_hamiltonian, build_liouvillian
from controlled_echo.core import propagate_interval, rk4_propagate

scheme = LevelScheme.two_level()
rho0 = np.diag([1.0, 0.0]).astype(complex)

# %% population after pulses of increasing area (Rabi 5 MHz, so 0.1 us is a pi pulse)
print(f"{'duration':>9} {'rho22':>10} {'sin^2(A/2)':>11}")
for duration in (0.01, 0.025, 0.05, 0.1, 0.15, 0.2):
    L = build_liouvillian(build_hamiltonian(scheme, [Pulse((1, 2), 5.0, 0, duration)]), DecayConfig())
    rho = propagate_interval(rho0, L, duration)
    area = 2 * math.pi * 5.0 * duration
    print(f"{duration:9.3f} {rho[1, 1].real:10.6f} {math.sin(area / 2) ** 2:11.6f}")

# %% with 50 kHz optical dephasing the pi pulse is slightly imperfect
L = build_liouvillian(build_hamiltonian(scheme, [Pulse((1, 2), 5.0, 0, 0.1)]), DecayConfig({(1, 2): 50.0}))
exact = propagate_interval(rho0, L, 0.1)
reference = rk4_propagate(rho0, L, 0.1)
print("rho22 after a pi pulse with dephasing:", round(exact[1, 1].real, 6))
print("expm vs RK4 max deviation:", f"{np.abs(exact - reference).max():.1e}")
