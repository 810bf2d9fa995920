"""Integrable structure of the two-species spin cluster.

The building blocks are the rational 4x4 R-matrix

    R(u) = [[1, 0, 0, 0],
            [0, b, c, 0],
            [0, c, b, 0],
            [0, 0, 0, 1]],   b = u/(u+eta),  c = eta/(u+eta),

one Lax operator per species acting on a two-dimensional auxiliary space
with operator entries on the full cluster Hilbert space,

    L_a(u) = [[gamma_a u I - eta gamma_a Sum_j Sz_aj,  -eta Sum_j alpha_aj S+_aj],
              [-eta Sum_j beta_aj S-_aj,  rho_a u I + eta rho_a Sum_j Sz_aj]],

(species b analogous, summed over b-sites), the monodromy

    T(u) = L_a(u + omega_a) L_b(u - omega_b)

with blocks A, B, C, D, and the transfer matrix t(u) = A(u) + D(u).

t(u) is a quadratic operator polynomial in u; t(0), its linear coefficient
and its quadratic coefficient are the three commuting charges C0, C1, C2.
Exchange relations hold exactly when alpha*beta = gamma*rho per site with a
site-independent alpha/beta ratio shared by both species.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    ConstraintError,
    InternalConsistencyError,
    LaxConstraintError,
    PoleError,
)
from .spins import SiteList, species_sum

POLE_TOL = 1e-9
CHARGE_CONSISTENCY_TOL = 1e-10
_CONSTRAINT_TOL = 1e-9


@dataclass(frozen=True)
class ModelSpec:
    """Full parameter set of the integrable cluster model.

    gamma/rho are the diagonal Lax weights per species, eta the quantum
    parameter, omega_a/omega_b the auxiliary-argument shifts, alpha/beta the
    per-site off-diagonal coefficients, xi0/xi1 the Hamiltonian mixing
    parameters.  Constraints (checked by validate):

      - alpha_aj * beta_aj = gamma_a * rho_a at every a-site (b analogous)
      - gamma_a * rho_a = gamma_b * rho_b
      - alpha/beta is one common ratio across all sites of both species
      - eta != 0, xi0 != 0, all gamma and rho nonzero
    """

    sites: SiteList
    gamma_a: float
    rho_a: float
    gamma_b: float
    rho_b: float
    eta: float
    omega_a: float
    omega_b: float
    alpha_a: tuple
    beta_a: tuple
    alpha_b: tuple
    beta_b: tuple
    xi0: float
    xi1: float

    def __post_init__(self):
        object.__setattr__(self, "alpha_a", tuple(float(x) for x in self.alpha_a))
        object.__setattr__(self, "beta_a", tuple(float(x) for x in self.beta_a))
        object.__setattr__(self, "alpha_b", tuple(float(x) for x in self.alpha_b))
        object.__setattr__(self, "beta_b", tuple(float(x) for x in self.beta_b))
        if len(self.alpha_a) != self.sites.n or len(self.beta_a) != self.sites.n:
            raise ConstraintError(
                f"need {self.sites.n} alpha_a/beta_a coefficients, "
                f"got {len(self.alpha_a)}/{len(self.beta_a)}"
            )
        if len(self.alpha_b) != self.sites.m or len(self.beta_b) != self.sites.m:
            raise ConstraintError(
                f"need {self.sites.m} alpha_b/beta_b coefficients, "
                f"got {len(self.alpha_b)}/{len(self.beta_b)}"
            )

    @classmethod
    def with_default_coefficients(cls, sites: SiteList, *, gamma_a=1.0, rho_a=1.0,
                                  gamma_b=1.0, rho_b=1.0, eta=1.0, omega_a=0.0,
                                  omega_b=0.0, xi0=1.0, xi1=0.0):
        """Spec with the default coefficient choice alpha = beta = sqrt(gamma*rho).

        Requires gamma*rho > 0 per species; this choice makes all couplings
        real and the Hamiltonian Hermitian.
        """
        ga_ra = gamma_a * rho_a
        gb_rb = gamma_b * rho_b
        if ga_ra <= 0 or gb_rb <= 0:
            raise ConstraintError(
                "default coefficients alpha = beta = sqrt(gamma*rho) need "
                f"gamma*rho > 0 per species, got {ga_ra} and {gb_rb}"
            )
        ca = math.sqrt(ga_ra)
        cb = math.sqrt(gb_rb)
        return cls(
            sites=sites,
            gamma_a=float(gamma_a), rho_a=float(rho_a),
            gamma_b=float(gamma_b), rho_b=float(rho_b),
            eta=float(eta), omega_a=float(omega_a), omega_b=float(omega_b),
            alpha_a=(ca,) * sites.n, beta_a=(ca,) * sites.n,
            alpha_b=(cb,) * sites.m, beta_b=(cb,) * sites.m,
            xi0=float(xi0), xi1=float(xi1),
        )

    # -- derived scalar combinations ------------------------------------

    @property
    def sigma_ab(self) -> float:
        """Symmetric weight combination gamma_a gamma_b + rho_a rho_b."""
        return self.gamma_a * self.gamma_b + self.rho_a * self.rho_b

    @property
    def delta_ab(self) -> float:
        """Antisymmetric weight combination gamma_a gamma_b - rho_a rho_b."""
        return self.gamma_a * self.gamma_b - self.rho_a * self.rho_b

    @property
    def omega_diff(self) -> float:
        """Shift difference omega_a - omega_b."""
        return self.omega_a - self.omega_b

    @property
    def omega_prod(self) -> float:
        """Shift product omega_a * omega_b."""
        return self.omega_a * self.omega_b

    @property
    def xi2(self) -> float:
        """Identity-cancelling mixing parameter.

        xi2 = (omega_a - omega_b)(1 + xi1 sigma_ab (omega_a - omega_b))
              - xi0 omega_a omega_b
        """
        w = self.omega_diff
        return w * (1.0 + self.xi1 * self.sigma_ab * w) - self.xi0 * self.omega_prod

    # -- validation ------------------------------------------------------

    def constraint_violations(self, tol=_CONSTRAINT_TOL):
        """List human-readable violations of the structural constraints."""
        out = []
        if self.eta == 0:
            out.append("eta must be nonzero")
        if self.xi0 == 0:
            out.append("xi0 must be nonzero")
        for name in ("gamma_a", "rho_a", "gamma_b", "rho_b"):
            if getattr(self, name) == 0:
                out.append(f"{name} must be nonzero")
        scale = max(1.0, abs(self.gamma_a * self.rho_a), abs(self.gamma_b * self.rho_b))
        for j, (al, be) in enumerate(zip(self.alpha_a, self.beta_a)):
            if abs(al * be - self.gamma_a * self.rho_a) > tol * scale:
                out.append(
                    f"alpha_a[{j}]*beta_a[{j}] = {al * be} != gamma_a*rho_a = "
                    f"{self.gamma_a * self.rho_a}"
                )
        for k, (al, be) in enumerate(zip(self.alpha_b, self.beta_b)):
            if abs(al * be - self.gamma_b * self.rho_b) > tol * scale:
                out.append(
                    f"alpha_b[{k}]*beta_b[{k}] = {al * be} != gamma_b*rho_b = "
                    f"{self.gamma_b * self.rho_b}"
                )
        if abs(self.gamma_a * self.rho_a - self.gamma_b * self.rho_b) > tol * scale:
            out.append(
                f"gamma_a*rho_a = {self.gamma_a * self.rho_a} != "
                f"gamma_b*rho_b = {self.gamma_b * self.rho_b}"
            )
        # cross-multiplied ratio uniformity: alpha_i beta_j = alpha_j beta_i
        pairs = [(al, be) for al, be in zip(self.alpha_a, self.beta_a)]
        pairs += [(al, be) for al, be in zip(self.alpha_b, self.beta_b)]
        pscale = max([1e-300] + [abs(a) * abs(b2) for a, _ in pairs for _, b2 in pairs])
        for i in range(len(pairs)):
            for j in range(i + 1, len(pairs)):
                ai, bi = pairs[i]
                aj, bj = pairs[j]
                if abs(ai * bj - aj * bi) > tol * max(1.0, pscale):
                    out.append(
                        "alpha/beta ratio must be site-independent across both "
                        f"species (sites {i} and {j} differ)"
                    )
        return out

    def ensure_valid(self):
        violations = self.constraint_violations()
        if violations:
            raise ConstraintError("; ".join(violations))


@dataclass(frozen=True)
class AuxBlock:
    """2x2 auxiliary-space matrix with operator entries A, B, C, D."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def __getitem__(self, ij):
        return ((self.A, self.B), (self.C, self.D))[ij[0]][ij[1]]


@dataclass(frozen=True)
class ChargeSet:
    """Commuting charges C0, C1, C2 and the scalar combinations they carry."""

    c0: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    sigma_ab: float
    delta_ab: float
    omega_diff: float
    omega_prod: float


def r_matrix(u, eta):
    """Rational 4x4 R-matrix on aux (x) aux; pole at u = -eta."""
    den = u + eta
    if abs(den) <= POLE_TOL:
        raise PoleError(f"R-matrix pole: |u + eta| = {abs(den)} <= {POLE_TOL}")
    b = u / den
    c = eta / den
    return np.array(
        [
            [1, 0, 0, 0],
            [0, b, c, 0],
            [0, c, b, 0],
            [0, 0, 0, 1],
        ],
        dtype=complex,
    )


def _embed_pair_13(r4):
    """Lift a 4x4 two-space matrix onto spaces 1 and 3 of a 2x2x2 triple."""
    r = r4.reshape(2, 2, 2, 2)  # [i1, i3, j1, j3]
    eye = np.eye(2)
    return np.einsum("acbd,mn->amcbnd", r, eye).reshape(8, 8)


def ybe_residual(u, v, eta):
    """Max-abs residual of R12(u-v) R13(u) R23(v) - R23(v) R13(u) R12(u-v)."""
    r12 = np.kron(r_matrix(u - v, eta), np.eye(2))
    r23 = np.kron(np.eye(2), r_matrix(v, eta))
    r13 = _embed_pair_13(r_matrix(u, eta))
    lhs = r12 @ r13 @ r23
    rhs = r23 @ r13 @ r12
    return float(np.max(np.abs(lhs - rhs)))


@lru_cache(maxsize=64)
def _species_operators(spec: ModelSpec):
    """Cache the species-summed spin operators entering the Lax entries."""
    s = spec.sites
    return {
        "sz_a": species_sum("z", "a", s),
        "sp_a": species_sum("+", "a", s, spec.alpha_a),
        "sm_a": species_sum("-", "a", s, spec.beta_a),
        "sz_b": species_sum("z", "b", s),
        "sp_b": species_sum("+", "b", s, spec.alpha_b),
        "sm_b": species_sum("-", "b", s, spec.beta_b),
    }


def _check_lax_constraint(spec: ModelSpec, species: str):
    gr = spec.gamma_a * spec.rho_a if species == "a" else spec.gamma_b * spec.rho_b
    alphas = spec.alpha_a if species == "a" else spec.alpha_b
    betas = spec.beta_a if species == "a" else spec.beta_b
    scale = max(1.0, abs(gr))
    for j, (al, be) in enumerate(zip(alphas, betas)):
        if abs(al * be - gr) > _CONSTRAINT_TOL * scale:
            raise LaxConstraintError(
                f"species {species} site {j}: alpha*beta = {al * be} != "
                f"gamma*rho = {gr}"
            )


def lax_a(u, spec: ModelSpec, check=True):
    """Species-a Lax operator at spectral parameter u, on the full space."""
    if check:
        _check_lax_constraint(spec, "a")
    ops = _species_operators(spec)
    eye = np.eye(spec.sites.dim, dtype=complex)
    eta = spec.eta
    return AuxBlock(
        A=spec.gamma_a * (u * eye - eta * ops["sz_a"]),
        B=-eta * ops["sp_a"],
        C=-eta * ops["sm_a"],
        D=spec.rho_a * (u * eye + eta * ops["sz_a"]),
    )


def lax_b(u, spec: ModelSpec, check=True):
    """Species-b Lax operator at spectral parameter u, on the full space."""
    if check:
        _check_lax_constraint(spec, "b")
    ops = _species_operators(spec)
    eye = np.eye(spec.sites.dim, dtype=complex)
    eta = spec.eta
    return AuxBlock(
        A=spec.gamma_b * (u * eye - eta * ops["sz_b"]),
        B=-eta * ops["sp_b"],
        C=-eta * ops["sm_b"],
        D=spec.rho_b * (u * eye + eta * ops["sz_b"]),
    )


def aux_product(left: AuxBlock, right: AuxBlock) -> AuxBlock:
    """Matrix product in the auxiliary space, operator product in the entries."""
    return AuxBlock(
        A=left.A @ right.A + left.B @ right.C,
        B=left.A @ right.B + left.B @ right.D,
        C=left.C @ right.A + left.D @ right.C,
        D=left.C @ right.B + left.D @ right.D,
    )


def rll_residual(u, v, lax, eta):
    """Max-abs residual of R12(u-v) L1(u) L2(v) - L2(v) L1(u) R12(u-v).

    lax is any AuxBlock-valued function of the spectral parameter; the
    exchange relation is evaluated on aux (x) aux (x) full space without
    materializing the Kronecker-lifted operators.
    """
    r = r_matrix(u - v, eta).reshape(2, 2, 2, 2)  # [(a1,a2), (c1,c2)]
    lu = lax(u)
    lv = lax(v)
    dim = lu.dim
    worst = 0.0
    for a1 in range(2):
        for a2 in range(2):
            for b1 in range(2):
                for b2 in range(2):
                    left = np.zeros((dim, dim), dtype=complex)
                    right = np.zeros((dim, dim), dtype=complex)
                    for c1 in range(2):
                        for c2 in range(2):
                            rc = r[a1, a2, c1, c2]
                            if rc != 0:
                                left += rc * (lu[c1, b1] @ lv[c2, b2])
                            rc = r[c1, c2, b1, b2]
                            if rc != 0:
                                right += (lv[a2, c2] @ lu[a1, c1]) * rc
                    worst = max(worst, float(np.max(np.abs(left - right))))
    return worst


def monodromy(u, spec: ModelSpec, check=True) -> AuxBlock:
    """Two-species monodromy T(u) = L_a(u + omega_a) L_b(u - omega_b)."""
    la = lax_a(u + spec.omega_a, spec, check=check)
    lb = lax_b(u - spec.omega_b, spec, check=check)
    return aux_product(la, lb)


def transfer(u, spec: ModelSpec, check=True):
    """Transfer matrix t(u) = A(u) + D(u), an operator quadratic in u."""
    t = monodromy(u, spec, check=check)
    return t.A + t.D


def charges(spec: ModelSpec) -> ChargeSet:
    """Extract the commuting charges from the quadratic transfer matrix.

    C0 = t(0); C1 is recovered by exact interpolation from t at u in
    {0, 1, -1}; C2 = sigma_ab * I by construction.  The interpolation is
    certified against the analytic C2 and against a fourth node u = 2.
    """
    spec.ensure_valid()
    t0 = transfer(0.0, spec)
    t_plus = transfer(1.0, spec)
    t_minus = transfer(-1.0, spec)
    c1 = (t_plus - t_minus) / 2.0
    c2_interp = (t_plus + t_minus) / 2.0 - t0
    eye = np.eye(spec.sites.dim, dtype=complex)
    c2 = spec.sigma_ab * eye
    scale = max(
        1.0,
        float(np.max(np.abs(t0))),
        float(np.max(np.abs(t_plus))),
        float(np.max(np.abs(t_minus))),
    )
    dev = float(np.max(np.abs(c2_interp - c2)))
    if dev > CHARGE_CONSISTENCY_TOL * scale:
        raise InternalConsistencyError(
            f"quadratic coefficient of t(u) deviates from sigma_ab*I by {dev} "
            f"(scale {scale}); transfer matrix is not quadratic"
        )
    t_two = transfer(2.0, spec)
    dev4 = float(np.max(np.abs(t0 + 2.0 * c1 + 4.0 * c2 - t_two)))
    if dev4 > CHARGE_CONSISTENCY_TOL * max(scale, float(np.max(np.abs(t_two)))):
        raise InternalConsistencyError(
            f"three-node charge interpolation fails at the certification node "
            f"u=2 by {dev4}"
        )
    return ChargeSet(
        c0=t0,
        c1=c1,
        c2=c2,
        sigma_ab=spec.sigma_ab,
        delta_ab=spec.delta_ab,
        omega_diff=spec.omega_diff,
        omega_prod=spec.omega_prod,
    )
