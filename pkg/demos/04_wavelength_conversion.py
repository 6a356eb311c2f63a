"""Double-lambda scheme: rephase through |4> and read out on a different wavelength."""
# %%
from controlled_echo import AccessMode, EnsembleSpec, extract_echo_metrics, simulate_ensemble, wavelength_convert_protocol
from controlled_echo.analysis import FieldMode, phase_matching

for mode in AccessMode:
    p = wavelength_convert_protocol(mode)
    rep = extract_echo_metrics(simulate_ensemble(p, EnsembleSpec()), p)
    i, j = p.echo_coherence
    print(f"{mode.value:18s} Cn on {p.pulse('Cn').transition}, echo on rho{i}{j}: "
          f"Im={rep.echo_coherence.imag:+.4f} rho{j}{j}(t_e)={rep.excited_pop_at_echo:.3f} "
          f"inverted={rep.population_inverted}")

# %% phase matching: co-propagating A and B with a counter-propagating Cn
w13, w23, w14 = 1.000, 1.002, 1.010  # relative optical frequencies
echo, walk_off = phase_matching(FieldMode.along(w13, (0, 0, 1)), FieldMode.along(w23, (0, 0, 1)),
                                FieldMode.along(w14, (0, 0, -1)))
print(f"echo omega={echo.omega:.3f}, k={echo.kvec.round(3)}, |k|-omega={walk_off:+.3e}")
