"""Shared helpers: cluster shapes and random valid parameter sets.

A parameter set is valid when gamma_a*rho_a = gamma_b*rho_b = p > 0 and every
weight product alpha_j*beta_j equals p.  The helpers below draw such sets at
random, optionally at the isotropic point (gamma_b = rho_a, rho_b = gamma_a,
omega_a = omega_b, xi1 = 0) or with a nontrivial common alpha/beta ratio.
"""

import numpy as np
import pytest

from spincluster import ModelSpec, SiteList

HALF = 0.5

# spin-1/2 cluster shapes used for cross-checks against direct construction
SHAPES_HALF = [
    ((HALF,), (HALF,)),
    ((HALF, HALF), (HALF,)),
    ((HALF, HALF), (HALF, HALF)),
    ((HALF, HALF, HALF), (HALF, HALF)),
]

# mixed-magnitude shapes
SHAPES_MIXED = [
    ((1.0,), (HALF,)),
    ((HALF, 1.0), (HALF,)),
    ((1.5,), (1.0, HALF)),
    ((HALF, 1.0), (HALF, HALF)),
]


def sitelists(shapes):
    return [SiteList(spins_a=a, spins_b=b) for a, b in shapes]


def random_spec(sites, rng, isotropic=False, ratio=False):
    """Random valid ModelSpec on the given sites.

    isotropic: gamma_b = rho_a, rho_b = gamma_a, omega_a = omega_b, xi1 = 0,
    which makes Delta_ab = 0 and the model SU(2) symmetric.
    ratio: use explicit alpha/beta arrays with a common ratio t != 1 instead
    of the default symmetric square-root weights.
    """
    p = float(rng.uniform(0.4, 1.6))
    g_a = float(rng.uniform(0.6, 1.4))
    g_b = float(rng.uniform(0.6, 1.4))
    eta = float(rng.uniform(0.5, 1.5)) * float(rng.choice([-1.0, 1.0]))
    if isotropic:
        gammas = dict(gamma_a=g_a, rho_a=p / g_a, gamma_b=p / g_a, rho_b=g_a)
        w = float(rng.uniform(-1.0, 1.0))
        rest = dict(eta=eta, omega_a=w, omega_b=w,
                    xi0=float(rng.uniform(0.5, 1.5)), xi1=0.0)
    else:
        gammas = dict(gamma_a=g_a, rho_a=p / g_a, gamma_b=g_b, rho_b=p / g_b)
        rest = dict(eta=eta,
                    omega_a=float(rng.uniform(-1.0, 1.0)),
                    omega_b=float(rng.uniform(-1.0, 1.0)),
                    xi0=float(rng.uniform(0.5, 1.5)),
                    xi1=float(rng.uniform(-0.5, 0.5)))
    if not ratio:
        return ModelSpec.with_default_coefficients(sites, **gammas, **rest)
    t = float(rng.uniform(0.7, 1.4))
    root_p = float(np.sqrt(p))
    n, m = len(sites.spins_a), len(sites.spins_b)
    return ModelSpec(sites=sites, **gammas, **rest,
                     alpha_a=(t * root_p,) * n, beta_a=(root_p / t,) * n,
                     alpha_b=(t * root_p,) * m, beta_b=(root_p / t,) * m)


def smallest_iso_spec():
    """One spin-1/2 per species, unit parameters: H = 2 S_a . S_b."""
    sites = SiteList(spins_a=(HALF,), spins_b=(HALF,))
    return ModelSpec.with_default_coefficients(
        sites, gamma_a=1.0, rho_a=1.0, gamma_b=1.0, rho_b=1.0,
        eta=1.0, omega_a=0.0, omega_b=0.0, xi0=1.0, xi1=0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)
