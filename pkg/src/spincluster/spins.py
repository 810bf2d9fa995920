"""Spin-s matrices and their embedding into a two-species cluster Hilbert space.

Conventions (hbar = 1):
  - single-site basis ordered by descending magnetic number m = s, s-1, ..., -s
  - S+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>, S- = (S+)^dagger
  - full space = (x)_j a-sites 1..n  tensor  (x)_k b-sites 1..m, in that order

All operators are dense complex numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionCapError, EmbeddingError, InvalidSpinError

DEFAULT_DIMENSION_CAP = 16384

_HALF_INT_TOL = 1e-12


def _check_spin(s) -> float:
    """Validate a single spin magnitude and return it as a float."""
    s = float(s)
    if not np.isfinite(s) or s <= 0:
        raise InvalidSpinError(f"spin magnitude must be positive, got {s}")
    if abs(2 * s - round(2 * s)) > _HALF_INT_TOL:
        raise InvalidSpinError(f"spin magnitude must be a half-integer, got {s}")
    return round(2 * s) / 2


@dataclass(frozen=True)
class SiteList:
    """Ordered site magnitudes for the two species.

    spins_a: magnitudes of the n a-sites (n >= 1)
    spins_b: magnitudes of the m b-sites (m >= 1)
    dimension_cap: refuse to build spaces larger than this
    """

    spins_a: tuple
    spins_b: tuple
    dimension_cap: int = DEFAULT_DIMENSION_CAP

    def __post_init__(self):
        spins_a = tuple(_check_spin(s) for s in self.spins_a)
        spins_b = tuple(_check_spin(s) for s in self.spins_b)
        if not spins_a or not spins_b:
            raise InvalidSpinError("each species needs at least one site")
        object.__setattr__(self, "spins_a", spins_a)
        object.__setattr__(self, "spins_b", spins_b)
        if self.dim > self.dimension_cap:
            raise DimensionCapError(
                f"Hilbert space dimension {self.dim} exceeds cap {self.dimension_cap}"
            )

    @property
    def n(self) -> int:
        return len(self.spins_a)

    @property
    def m(self) -> int:
        return len(self.spins_b)

    @property
    def spins(self) -> tuple:
        """All site magnitudes, a-sites first."""
        return self.spins_a + self.spins_b

    @property
    def dims(self) -> tuple:
        """Local dimensions 2s+1 per site, a-sites first."""
        return tuple(int(round(2 * s + 1)) for s in self.spins)

    @property
    def dim(self) -> int:
        """Total Hilbert space dimension, product of the local dimensions."""
        d = 1
        for k in self.dims:
            d *= k
        return d

    @property
    def weight_a(self) -> float:
        """Sum of a-site magnitudes: the a-species vacuum weight M_a."""
        return float(sum(self.spins_a))

    @property
    def weight_b(self) -> float:
        """Sum of b-site magnitudes: the b-species vacuum weight M_b."""
        return float(sum(self.spins_b))

    def a_site_index(self, j: int) -> int:
        """Global site index of a-site j (0-based)."""
        if not 0 <= j < self.n:
            raise EmbeddingError(f"a-site index {j} out of range for n={self.n}")
        return j

    def b_site_index(self, k: int) -> int:
        """Global site index of b-site k (0-based)."""
        if not 0 <= k < self.m:
            raise EmbeddingError(f"b-site index {k} out of range for m={self.m}")
        return self.n + k


def spin_matrices(s):
    """Return (Sz, Splus, Sminus) for one spin-s site.

    Basis is |s>, |s-1>, ..., |-s>, so Sz = diag(s, ..., -s) and Splus has
    superdiagonal entries sqrt(s(s+1) - m(m+1)) taking m to m+1.
    """
    s = _check_spin(s)
    d = int(round(2 * s + 1))
    m = s - np.arange(d)
    sz = np.diag(m.astype(complex))
    sp = np.zeros((d, d), dtype=complex)
    for i in range(1, d):
        # entry (i-1, i): raises the state with magnetic number m[i] to m[i]+1
        sp[i - 1, i] = np.sqrt(s * (s + 1) - m[i] * (m[i] + 1))
    sm = sp.conj().T
    return sz, sp, sm


def embed(op, site: int, sites: SiteList):
    """Embed a single-site operator at global site index into the full space.

    Sites are ordered a_1..a_n, b_1..b_m; identity acts everywhere else.
    """
    dims = sites.dims
    if not 0 <= site < len(dims):
        raise EmbeddingError(f"site index {site} out of range for {len(dims)} sites")
    op = np.asarray(op, dtype=complex)
    d = dims[site]
    if op.shape != (d, d):
        raise EmbeddingError(
            f"operator shape {op.shape} does not match local dimension {d} at site {site}"
        )
    left = int(np.prod(dims[:site], dtype=np.int64)) if site else 1
    right = int(np.prod(dims[site + 1:], dtype=np.int64)) if site + 1 < len(dims) else 1
    full = np.kron(np.kron(np.eye(left), op), np.eye(right))
    return full.astype(complex)


def site_sz(site: int, sites: SiteList):
    """Embedded Sz of one site."""
    return embed(spin_matrices(sites.spins[site])[0], site, sites)


def site_sp(site: int, sites: SiteList):
    """Embedded S+ of one site."""
    return embed(spin_matrices(sites.spins[site])[1], site, sites)


def site_sm(site: int, sites: SiteList):
    """Embedded S- of one site."""
    return embed(spin_matrices(sites.spins[site])[2], site, sites)


def species_sum(kind: str, species: str, sites: SiteList, weights=None):
    """Weighted sum of embedded one-site operators over one species.

    kind: 'z', '+' or '-'; species: 'a' or 'b'; weights default to 1 per site.
    """
    pick = {"z": site_sz, "+": site_sp, "-": site_sm}[kind]
    if species == "a":
        indices = [sites.a_site_index(j) for j in range(sites.n)]
    elif species == "b":
        indices = [sites.b_site_index(k) for k in range(sites.m)]
    else:
        raise EmbeddingError(f"unknown species {species!r}")
    if weights is None:
        weights = np.ones(len(indices))
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (len(indices),):
        raise EmbeddingError(
            f"need {len(indices)} weights for species {species}, got shape {weights.shape}"
        )
    total = np.zeros((sites.dim, sites.dim), dtype=complex)
    for w, idx in zip(weights, indices):
        total += w * pick(idx, sites)
    return total


def total_sz(sites: SiteList):
    """Total z-magnetization operator of the cluster."""
    return species_sum("z", "a", sites) + species_sum("z", "b", sites)


def total_spin_squared(sites: SiteList):
    """Total-spin Casimir (S_T)^2 = Sz^2 + (S+S- + S-S+)/2 over all sites."""
    sz = total_sz(sites)
    sp = species_sum("+", "a", sites) + species_sum("+", "b", sites)
    sm = species_sum("-", "a", sites) + species_sum("-", "b", sites)
    return sz @ sz + 0.5 * (sp @ sm + sm @ sp)
