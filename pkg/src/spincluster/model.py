"""Physical couplings of the cluster Hamiltonian and their two construction routes.

The Hamiltonian is

    H = Sum_j Bz_aj Sz_aj + Sum_k Bz_bk Sz_bk
      + Sum_j D_aj (Sz_aj)^2 + Sum_k D_bk (Sz_bk)^2
      + Sum_{i<j} Jz_aiaj Sz_ai Sz_aj + Sum_{k<l} Jz_bkbl Sz_bk Sz_bl
      + Sum_{j,k} Jz_ajbk Sz_aj Sz_bk
      + (1/2) Sum_{j,k} Jxy_ajbk (S+_aj S-_bk + S-_aj S+_bk),

with intra-species sums over unordered pairs carrying each J once.  The
same operator is produced from the commuting charges as

    H = xi0 C0 + C1 (1 + xi1 C1) - xi2 C2,

with xi2 chosen so the identity component cancels.  The coupling values an
integrable spec generates are

    Bz_aj   = eta Delta (xi0 omega_b - 2 xi1 sigma (omega_a - omega_b) - 1)
    Bz_bk   = -eta Delta (xi0 omega_a + 2 xi1 sigma (omega_a - omega_b) + 1)
    D       = xi1 eta^2 Delta^2            (every site, both species)
    Jz_intra = 2 xi1 eta^2 Delta^2         (every unordered same-species pair)
    Jz_ajbk = eta^2 (xi0 sigma + 2 xi1 Delta^2)
    Jxy_ajbk = 2 xi0 eta^2 alpha_aj beta_bk = 2 xi0 eta^2 alpha_bk beta_aj

where sigma = gamma_a gamma_b + rho_a rho_b and Delta = gamma_a gamma_b
- rho_a rho_b.  fit_parameters inverts this map where possible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ModelSpec, charges
from .errors import ConstraintError, InternalConsistencyError, ShapeError
from .spins import SiteList, site_sm, site_sp, site_sz

_JXY_SYMMETRY_TOL = 1e-12
EDGE_TOL = 1e-12


@dataclass(frozen=True)
class CouplingSet:
    """Site-resolved couplings of the cluster Hamiltonian.

    bz_*: longitudinal fields; d_*: single-ion anisotropies; jz_aa/jz_bb:
    symmetric zero-diagonal intra-species Ising matrices; jz_ab/jxy_ab:
    n x m cross-species Ising and exchange matrices.  xi2 is carried as
    derived metadata when the set came from an integrable spec.
    """

    bz_a: np.ndarray
    bz_b: np.ndarray
    d_a: np.ndarray
    d_b: np.ndarray
    jz_aa: np.ndarray
    jz_bb: np.ndarray
    jz_ab: np.ndarray
    jxy_ab: np.ndarray
    xi2: float | None = None

    def __post_init__(self):
        for name in ("bz_a", "bz_b", "d_a", "d_b", "jz_aa", "jz_bb", "jz_ab", "jxy_ab"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n = self.bz_a.shape[0] if self.bz_a.ndim == 1 else -1
        m = self.bz_b.shape[0] if self.bz_b.ndim == 1 else -1
        if n < 1 or m < 1:
            raise ShapeError("bz_a and bz_b must be 1d with at least one entry")
        if self.d_a.shape != (n,) or self.d_b.shape != (m,):
            raise ShapeError("d_a/d_b shapes must match bz_a/bz_b")
        if self.jz_aa.shape != (n, n) or self.jz_bb.shape != (m, m):
            raise ShapeError("jz_aa/jz_bb must be square in the site counts")
        if self.jz_ab.shape != (n, m) or self.jxy_ab.shape != (n, m):
            raise ShapeError("jz_ab/jxy_ab must be n x m")
        for name in ("jz_aa", "jz_bb"):
            mat = getattr(self, name)
            if np.max(np.abs(mat - mat.T)) > 0:
                raise ConstraintError(f"{name} must be symmetric")
            if np.max(np.abs(np.diag(mat))) > 0:
                raise ConstraintError(f"{name} must have a zero diagonal")

    @property
    def n(self) -> int:
        return self.bz_a.shape[0]

    @property
    def m(self) -> int:
        return self.bz_b.shape[0]

    def max_abs(self) -> float:
        return max(
            float(np.max(np.abs(getattr(self, name))))
            for name in ("bz_a", "bz_b", "d_a", "d_b", "jz_aa", "jz_bb", "jz_ab", "jxy_ab")
        )


def couplings_from_spec(spec: ModelSpec) -> CouplingSet:
    """Coupling values generated by an integrable parameter set."""
    spec.ensure_valid()
    n, m = spec.sites.n, spec.sites.m
    eta, xi0, xi1 = spec.eta, spec.xi0, spec.xi1
    sigma, delta = spec.sigma_ab, spec.delta_ab
    w = spec.omega_diff
    bz_a = eta * delta * (xi0 * spec.omega_b - 2 * xi1 * sigma * w - 1.0)
    bz_b = -eta * delta * (xi0 * spec.omega_a + 2 * xi1 * sigma * w + 1.0)
    d_val = xi1 * eta**2 * delta**2
    jz_intra = 2.0 * d_val
    jz_cross = eta**2 * (xi0 * sigma + 2 * xi1 * delta**2)
    alpha_a = np.asarray(spec.alpha_a)
    beta_a = np.asarray(spec.beta_a)
    alpha_b = np.asarray(spec.alpha_b)
    beta_b = np.asarray(spec.beta_b)
    jxy = 2.0 * xi0 * eta**2 * np.outer(alpha_a, beta_b)
    jxy_alt = 2.0 * xi0 * eta**2 * np.outer(beta_a, alpha_b)
    scale = max(1.0, float(np.max(np.abs(jxy))))
    if float(np.max(np.abs(jxy - jxy_alt))) > _JXY_SYMMETRY_TOL * scale:
        raise InternalConsistencyError(
            "the two exchange coupling expressions disagree; alpha/beta ratio "
            "is not site-independent"
        )
    off_diag = 1.0 - np.eye(n)
    off_diag_b = 1.0 - np.eye(m)
    return CouplingSet(
        bz_a=np.full(n, bz_a),
        bz_b=np.full(m, bz_b),
        d_a=np.full(n, d_val),
        d_b=np.full(m, d_val),
        jz_aa=jz_intra * off_diag,
        jz_bb=jz_intra * off_diag_b,
        jz_ab=np.full((n, m), jz_cross),
        jxy_ab=jxy,
        xi2=spec.xi2,
    )


def build_hamiltonian(couplings: CouplingSet, sites: SiteList):
    """Assemble the dense Hamiltonian directly from site couplings."""
    if couplings.n != sites.n or couplings.m != sites.m:
        raise ShapeError(
            f"couplings are for {couplings.n}+{couplings.m} sites, "
            f"site list has {sites.n}+{sites.m}"
        )
    dim = sites.dim
    h = np.zeros((dim, dim), dtype=complex)
    sz_a = [site_sz(sites.a_site_index(j), sites) for j in range(sites.n)]
    sz_b = [site_sz(sites.b_site_index(k), sites) for k in range(sites.m)]
    for j in range(sites.n):
        h += couplings.bz_a[j] * sz_a[j]
        h += couplings.d_a[j] * (sz_a[j] @ sz_a[j])
    for k in range(sites.m):
        h += couplings.bz_b[k] * sz_b[k]
        h += couplings.d_b[k] * (sz_b[k] @ sz_b[k])
    for i in range(sites.n):
        for j in range(i + 1, sites.n):
            if couplings.jz_aa[i, j] != 0:
                h += couplings.jz_aa[i, j] * (sz_a[i] @ sz_a[j])
    for k in range(sites.m):
        for l in range(k + 1, sites.m):
            if couplings.jz_bb[k, l] != 0:
                h += couplings.jz_bb[k, l] * (sz_b[k] @ sz_b[l])
    sp_a = [site_sp(sites.a_site_index(j), sites) for j in range(sites.n)]
    sm_a = [site_sm(sites.a_site_index(j), sites) for j in range(sites.n)]
    sp_b = [site_sp(sites.b_site_index(k), sites) for k in range(sites.m)]
    sm_b = [site_sm(sites.b_site_index(k), sites) for k in range(sites.m)]
    for j in range(sites.n):
        for k in range(sites.m):
            if couplings.jz_ab[j, k] != 0:
                h += couplings.jz_ab[j, k] * (sz_a[j] @ sz_b[k])
            if couplings.jxy_ab[j, k] != 0:
                h += 0.5 * couplings.jxy_ab[j, k] * (
                    sp_a[j] @ sm_b[k] + sm_a[j] @ sp_b[k]
                )
    return h


def hamiltonian_from_charges(spec: ModelSpec):
    """Assemble H = xi0 C0 + C1 (1 + xi1 C1) - xi2 C2 from the charges."""
    ch = charges(spec)
    return (
        spec.xi0 * ch.c0
        + ch.c1
        + spec.xi1 * (ch.c1 @ ch.c1)
        - spec.xi2 * ch.c2
    )


@dataclass
class FitResult:
    """Outcome of inverting the coupling map.

    feasible: whether an integrable spec reproduces the couplings;
    spec: the reconstructed parameters (gauge: eta = 1, rho_a = 1,
    |xi0| = 1 with the sign of Jxy, Delta >= 0, omega = 0 at Delta = 0);
    violations: reasons when infeasible; max_relative_error: round-trip
    defect of the reconstructed couplings.
    """

    feasible: bool
    spec: ModelSpec | None = None
    violations: list = field(default_factory=list)
    max_relative_error: float | None = None


def _uniform_value(arr, utol):
    """Return (value, True) when all entries agree within utol."""
    arr = np.asarray(arr, dtype=float).ravel()
    if arr.size == 0:
        return 0.0, True
    v = float(np.mean(arr))
    return v, bool(np.max(np.abs(arr - v)) <= utol)


def fit_parameters(couplings: CouplingSet, sites: SiteList) -> FitResult:
    """Invert the coupling map in closed form, or report why that fails.

    Solves, with the gauge eta = 1, rho_a = 1, xi0 = sign(Jxy):

        sigma = |Jz_ab - 2 D|,    Delta = sqrt((Jz_ab - 2 D)^2 - Jxy^2),
        xi1 = D / Delta^2,        omega_a, omega_b from the two Bz values,

    and distributes gamma/rho from sigma and Delta.  Real weights require
    |Jz_ab - 2 D| >= |Jxy| with matching signs.
    """
    if couplings.n != sites.n or couplings.m != sites.m:
        raise ShapeError(
            f"couplings are for {couplings.n}+{couplings.m} sites, "
            f"site list has {sites.n}+{sites.m}"
        )
    scale = max(1.0, couplings.max_abs())
    utol = 1e-9 * scale
    violations = []

    jxy, ok = _uniform_value(couplings.jxy_ab, utol)
    if not ok:
        violations.append("Jxy must be uniform")
    elif abs(jxy) <= utol:
        violations.append("Jxy must be nonzero (xi0, eta and the weights are all nonzero)")
    jz, ok = _uniform_value(couplings.jz_ab, utol)
    if not ok:
        violations.append("Jz_ab must be uniform")
    d_val, ok = _uniform_value(np.concatenate([couplings.d_a, couplings.d_b]), utol)
    if not ok:
        violations.append("single-ion D must be one value across both species")
    bza, ok = _uniform_value(couplings.bz_a, utol)
    if not ok:
        violations.append("Bz must be uniform within species a")
    bzb, ok = _uniform_value(couplings.bz_b, utol)
    if not ok:
        violations.append("Bz must be uniform within species b")
    intra = []
    for name in ("jz_aa", "jz_bb"):
        mat = getattr(couplings, name)
        k = mat.shape[0]
        if k > 1:
            intra.extend(mat[np.triu_indices(k, 1)].tolist())
    if intra:
        jz_intra, ok = _uniform_value(intra, utol)
        if not ok or abs(jz_intra - 2.0 * d_val) > utol:
            violations.append("intra-species Jz must be uniform and equal 2*D")
    if violations:
        return FitResult(feasible=False, violations=violations)

    k_val = jz - 2.0 * d_val
    if abs(k_val) < abs(jxy) - utol:
        violations.append(
            "requires |Jz_ab - 2*D| >= |Jxy|: real weights cannot reach this point"
        )
    elif k_val * jxy <= 0:
        violations.append("requires sign(Jz_ab - 2*D) = sign(Jxy)")
    if violations:
        return FitResult(feasible=False, violations=violations)

    eta = 1.0
    xi0 = math.copysign(1.0, jxy)
    sigma = k_val / xi0
    delta_sq = max(k_val**2 - jxy**2, 0.0)
    delta = math.sqrt(delta_sq)
    iso = delta <= math.sqrt(utol)
    if iso:
        delta = 0.0
        if abs(d_val) > utol:
            violations.append("single-ion D requires distinct weight products (Delta != 0)")
        if abs(bza) > utol or abs(bzb) > utol:
            violations.append("longitudinal fields require distinct weight products (Delta != 0)")
        if violations:
            return FitResult(feasible=False, violations=violations)
        xi1 = 0.0
        omega_a = omega_b = 0.0
    else:
        xi1 = d_val / (eta**2 * delta_sq)
        det = -xi0 * (xi0 + 4.0 * xi1 * sigma)
        if abs(det) < 1e-12 * max(1.0, abs(xi0) + abs(xi1 * sigma)) ** 2:
            return FitResult(
                feasible=False,
                violations=["degenerate shift system: xi0 + 4*xi1*sigma = 0"],
            )
        rhs = np.array([bza / (eta * delta) + 1.0, -bzb / (eta * delta) - 1.0])
        mat = np.array(
            [
                [-2.0 * xi1 * sigma, xi0 + 2.0 * xi1 * sigma],
                [xi0 + 2.0 * xi1 * sigma, -2.0 * xi1 * sigma],
            ]
        )
        omega_a, omega_b = np.linalg.solve(mat, rhs)

    x = (sigma + delta) / 2.0
    y = (sigma - delta) / 2.0
    g = math.sqrt(max(x * y, 0.0))
    spec = ModelSpec.with_default_coefficients(
        sites,
        gamma_a=g, rho_a=1.0, gamma_b=x / g, rho_b=y,
        eta=eta, omega_a=float(omega_a), omega_b=float(omega_b),
        xi0=xi0, xi1=xi1,
    )
    rebuilt = couplings_from_spec(spec)
    err = 0.0
    for name in ("bz_a", "bz_b", "d_a", "d_b", "jz_aa", "jz_bb", "jz_ab", "jxy_ab"):
        err = max(err, float(np.max(np.abs(getattr(rebuilt, name) - getattr(couplings, name)))))
    return FitResult(feasible=True, spec=spec, max_relative_error=err / scale)


@dataclass(frozen=True)
class InteractionGraph:
    """Vertices a1..an, b1..bm and typed coupling edges.

    Edges are (kind, i, j) with kind in {'aa', 'bb', 'ab'}; indices are
    0-based within each species; aa/bb edges have i < j.
    """

    n: int
    m: int
    edges: tuple

    @property
    def vertex_labels(self) -> tuple:
        return tuple(f"a{j + 1}" for j in range(self.n)) + tuple(
            f"b{k + 1}" for k in range(self.m)
        )

    def edge_count(self, kind=None) -> int:
        if kind is None:
            return len(self.edges)
        return sum(1 for e in self.edges if e[0] == kind)


def interaction_graph(couplings: CouplingSet, tol=EDGE_TOL) -> InteractionGraph:
    """Edges wherever a pairwise coupling exceeds tol in magnitude."""
    edges = []
    for i in range(couplings.n):
        for j in range(i + 1, couplings.n):
            if abs(couplings.jz_aa[i, j]) > tol:
                edges.append(("aa", i, j))
    for k in range(couplings.m):
        for l in range(k + 1, couplings.m):
            if abs(couplings.jz_bb[k, l]) > tol:
                edges.append(("bb", k, l))
    for j in range(couplings.n):
        for k in range(couplings.m):
            if abs(couplings.jz_ab[j, k]) > tol or abs(couplings.jxy_ab[j, k]) > tol:
                edges.append(("ab", j, k))
    return InteractionGraph(n=couplings.n, m=couplings.m, edges=tuple(edges))


_DOT_EDGE_ATTRS = {
    "aa": '[style="dashed,dotted", color=green]',
    "bb": '[style=dashed, color=orange]',
    "ab": '[style=solid, color=black]',
}


def to_dot(graph: InteractionGraph) -> str:
    """Render the interaction graph in DOT form.

    Exact format contract (vertex order, edge order, attributes) is
    documented in the cli module.
    """
    lines = ["graph interactions {"]
    for j in range(graph.n):
        lines.append(f'  a{j + 1} [species=a, color=green];')
    for k in range(graph.m):
        lines.append(f'  b{k + 1} [species=b, color=orange];')
    for kind, i, j in graph.edges:
        if kind == "aa":
            lines.append(f"  a{i + 1} -- a{j + 1} {_DOT_EDGE_ATTRS['aa']};")
        elif kind == "bb":
            lines.append(f"  b{i + 1} -- b{j + 1} {_DOT_EDGE_ATTRS['bb']};")
        else:
            lines.append(f"  a{i + 1} -- b{j + 1} {_DOT_EDGE_ATTRS['ab']};")
    lines.append("}")
    return "\n".join(lines) + "\n"
