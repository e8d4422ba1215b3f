"""Shared fixtures: the base model configuration and its selected candidate.

Selection is cheap; certification fixtures are module-scoped where reused.
"""

import numpy as np
import pytest

import chemoblow as cb

LD = np.longdouble


@pytest.fixture(scope="session")
def base_params():
    return cb.ModelParams(n=3, R=1.0, k=1.0, sigma=2.0, M_lo=8.0, M_hi=16.0)


@pytest.fixture(scope="session")
def base_dc(base_params):
    return cb.derived_constants(base_params)


@pytest.fixture(scope="session")
def base_spec(base_params, base_dc):
    ex = cb.select_exponents(base_params.n, base_params.sigma)
    return cb.select_parameters(base_params, base_dc, ex, 1.0)


def make_synthetic_spec(n=3, alpha=1.0 / 6, beta=1.0 / 6, theta=2.0, gamma=0.1,
                        delta=0.5, y0=10.0, R=1.0, a=0.1, sigma=2.0, k=1.0,
                        mu_lo=0.5, mu_hi=10.0):
    """Moderate-magnitude spec for checker tests; bypasses select_parameters.

    Only the fields used by evaluation / ordering / verdict logic matter;
    threshold echoes are filled with plausible values.
    """
    T = 1.0 / (gamma * delta * y0**delta)
    omega = float(np.pi ** (n / 2) * R**n / __import__("math").gamma(n / 2 + 1))
    return cb.SubsolutionSpec(
        n=n, R=LD(R), sigma=LD(sigma), k=LD(k), K_big=LD(k) * LD(n) ** (LD(sigma) - 1),
        mu_lo=LD(mu_lo), mu_hi=LD(mu_hi), omega_vol=LD(omega), a=LD(a),
        alpha=LD(alpha), beta=LD(beta), theta=LD(theta), gamma=LD(gamma),
        delta=LD(delta), y0=LD(y0), T=LD(T), s0=LD(0.01),
        delta_star=LD(1 - beta), delta_2star=LD((1 - beta) / 2),
        gamma_star=LD(gamma), y_star=LD(y0), L_big=LD(gamma),
        s_star=LD(0.02), s_2star=LD(0.02), theta_star=LD(theta),
        theta_2star=LD(2.0), T_star=LD(10 * T),
    )


@pytest.fixture
def synthetic_spec():
    return make_synthetic_spec()
