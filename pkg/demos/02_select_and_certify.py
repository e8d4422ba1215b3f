"""Select the blow-up candidate's constants and machine-check the residual signs.

The selected constants are extreme by design (the construction needs large
safety margins), which is why the evaluation runs in longdouble.  The
certificate checks, region by region, that both operators are nonpositive on
a dense lattice including kink-adjacent samples and times approaching the
horizon.  A deliberately underdamped candidate is certified too, to show the
checker catching a violation.
"""

import dataclasses

import numpy as np

import chemoblow as cb
from chemoblow.verify import certificate_to_text

fmt = lambda x: np.format_float_scientific(x, precision=4)

p = cb.ModelParams(n=3, R=1.0, k=1.0, sigma=2.0, M_lo=8.0, M_hi=16.0)
cb.validate_params(p, "blowup")
dc = cb.derived_constants(p)
ex = cb.select_exponents(p.n, p.sigma)
spec = cb.select_parameters(p, dc, ex, T_star=1.0)

print("=== selected constants ===")
for name in ("delta_star", "delta_2star", "gamma_star", "y_star", "L_big",
             "s_star", "s_2star", "theta_star", "theta_2star"):
    print(f"{name:>12} = {fmt(getattr(spec, name))}")
print("--- assembled ---")
for name in ("delta", "s0", "theta", "gamma", "y0", "T"):
    print(f"{name:>12} = {fmt(getattr(spec, name))}")
print(f"\nhorizon T = {fmt(spec.T)} < 1/theta = {fmt(1 / spec.theta)} "
      f"and < T_star = {float(spec.T_star)}")

print("\n=== re-verified inequalities ===")
for name, ok, _ in cb.verify_spec(spec):
    print(f"  [{'ok' if ok else 'VIOLATED'}] {name}")

print("\n=== certification ===")
cert = cb.certify_subsolution(spec, p, dc, ns=512, nt=256)
print(certificate_to_text(cert).split("parameters:")[0])

print("=== a tampered candidate fails ===")
bad = dataclasses.replace(spec, theta=np.longdouble(1.0))
cert_bad = cb.certify_subsolution(bad, p, dc, ns=256, nt=128)
for row in cert_bad.rows:
    flag = "ok" if row.passed else "VIOLATED"
    print(f"  {row.kind:<16} norm_p={row.norm_p:9.3g} norm_q={row.norm_q:9.3g}  {flag}")
print(f"tampered certificate passed: {cert_bad.passed}")
