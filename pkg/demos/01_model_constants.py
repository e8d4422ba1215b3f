"""Model constants and exponent selection across the admissible range.

Walks the parameter layer: hypothesis validation, the derived constants
(ball volume, mean-density bounds, amplitude a, production constants), and
the deterministic choice of the profile exponents (alpha, beta).
"""

import numpy as np

import chemoblow as cb

print("=== hypothesis validation ===")
p = cb.ModelParams(n=3, R=1.0, k=1.0, sigma=2.0, M_lo=8.0, M_hi=16.0)
cb.validate_params(p, "blowup")
print(f"accepted: n={p.n}, sigma={p.sigma} (> 4/n = {4.0 / p.n:.4f})")

for n, sigma in ((3, 4.0 / 3.0), (5, 2.0)):
    try:
        cb.validate_params(cb.ModelParams(n=n, R=1.0, k=1.0, sigma=sigma,
                                          M_lo=8.0, M_hi=16.0), "blowup")
    except cb.ChemoblowError as exc:
        print(f"rejected n={n}, sigma={sigma:.4f}: {type(exc).__name__}")

print("\n=== derived constants ===")
dc = cb.derived_constants(p)
print(f"|Omega|   = {dc.omega_vol:.6f}")
print(f"mu_lo     = {dc.mu_lo:.6f}   (M_lo / 2|Omega|)")
print(f"mu_hi     = {dc.mu_hi:.6f}   (2 M_hi / |Omega|)")
print(f"a         = {dc.a:.6f}   (amplitude)")
print(f"K         = {dc.K_big:.6f}   (k n^(sigma-1))")
print(f"L         = {dc.L_big:.6f}   (K (a/e)^(sigma-1))")

print("\n=== exponent selection ===")
print(f"{'n':>2} {'sigma':>6} {'alpha':>10} {'beta':>10} {'window':>24}")
for n in (3, 4):
    for sigma in (1.5, 2.0, 3.0):
        if sigma <= 4.0 / n:
            continue
        ex = cb.select_exponents(n, sigma)
        from chemoblow.subsolution import exponent_window
        lo, hi = exponent_window(n, sigma, ex.alpha)
        print(f"{n:>2} {sigma:>6.2f} {ex.alpha:>10.5f} {ex.beta:>10.5f} "
              f"   ({max(lo, 0):.5f}, {hi:.5f})")

print("\n=== production law guard ===")
good = cb.ModelParams(n=3, R=1.0, k=1.0, sigma=2.0, M_lo=8.0, M_hi=16.0,
                      f_kind="custom", f_custom=lambda u: u**2 + np.sin(u) ** 2)
print("custom closure above its witness:", cb.production_rate(good, 2.0))
bad = cb.ModelParams(n=3, R=1.0, k=1.0, sigma=2.0, M_lo=8.0, M_hi=16.0,
                     f_kind="custom", f_custom=lambda u: 0.5 * u**2)
try:
    cb.production_rate(bad, 1.0)
except cb.ChemoblowError as exc:
    print(f"closure below witness rejected: {type(exc).__name__}")
