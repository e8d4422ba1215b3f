"""The boundedness/blow-up dichotomy, observed empirically at desk scale.

Subcritical production (sigma < 4/n) keeps smooth bumps bounded; supercritical
production with concentrated data collapses: the center density climbs through
three decades until the blow-up monitor trips.  Writes run CSVs next to this
script.
"""

from pathlib import Path

import numpy as np

import chemoblow as cb
from chemoblow.radial import make_state, write_run_csv
from chemoblow.verify import bump_initial_state

out = Path(__file__).resolve().parent / "output"
out.mkdir(exist_ok=True)

print("=== subcritical probe: n=3, sigma=1 (< 4/3) ===")
p_sub = cb.ModelParams(n=3, R=1.0, k=1.0, sigma=1.0, M_lo=1.0, M_hi=100.0)
probe = cb.boundedness_probe(p_sub, cb.RunControls(t_end=10.0, dt_min=1e-10), M=128)
rep = probe.run_report
print(f"bounded: {probe.bounded}; sup u grew by x{probe.growth_factor:.3f} "
      f"over t in [0, {rep.final_time}] ({rep.step_count} steps)")
print(f"mass drift: {rep.mass_drift:.2e}")
write_run_csv(out / "bounded_run.csv", rep)

print("\n=== supercritical collapse: n=3, sigma=2 (> 4/3), concentrated bump ===")
p_sup = cb.ModelParams(n=3, R=1.0, k=1.0, sigma=2.0, M_lo=1.0, M_hi=1e6)
grid = cb.build_grid(p_sup, 128)
u0 = 200.0 * np.exp(-((4.0 * grid.r) ** 2))
state = make_state(grid, 0.0, u0, u0)
rep = cb.run(state, p_sup,
             cb.RunControls(t_end=2.0, dt_init=1e-5, dt_min=1e-10,
                            blowup_factor=1000.0))
print(f"blow-up flagged: {rep.blowup_flag} ({rep.blowup_reason}) "
      f"at t = {rep.blowup_time_estimate:.6f}")
print(f"sup u: {rep.sup_u_history[0]:.1f} -> {rep.sup_u_history.max():.1f} "
      f"in {rep.step_count} steps")
print(f"first time sup w doubled (empirical T0): {rep.T0_estimate}")
print("last decade of the climb:")
mask = rep.sup_u_history >= 0.1 * rep.sup_u_history.max()
for t, s_u, dt in list(zip(rep.times[mask], rep.sup_u_history[mask],
                           rep.dt_history[mask]))[::12]:
    print(f"  t = {t:.6f}  sup u = {s_u:10.1f}  dt = {dt:.2e}")
write_run_csv(out / "collapse_run.csv", rep)

print(f"\nCSV series written under {out}")
print("the adaptive step shrinks as the advective velocity sharpens; the")
print("monitor trips on the density threshold, not on a true singularity")
