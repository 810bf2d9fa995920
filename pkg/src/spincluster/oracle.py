"""Exact-diagonalization reference spectra and spectrum matching.

The oracle never touches the Bethe machinery: it diagonalizes dense
Hamiltonians directly (symmetric eigensolver for Hermitian input, Schur
factorization otherwise) and decomposes them into total-Sz sectors by
permuting the product basis.  Bethe results are compared against these
spectra with a greedy nearest-neighbour match inside each sector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import HermiticityError, NotBlockDiagonalError, ShapeError
from .spins import SiteList, total_sz

HERMITICITY_TOL = 1e-10
BLOCK_TOL = 1e-10
DEGENERACY_TOL = 1e-8


@dataclass
class Spectrum:
    """Eigenvalues (ascending for Hermitian input) plus optional extras."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None
    sectors: np.ndarray | None = None
    hermitian: bool = True


@dataclass
class Sector:
    """One total-Sz block: its label, basis indices and spectrum."""

    sz: float
    indices: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return len(self.indices)


def _hermiticity_defect(h) -> float:
    scale = max(1.0, float(np.max(np.abs(h))))
    return float(np.max(np.abs(h - h.conj().T))) / scale


def exact_spectrum(h, hermitian=True, want_vectors=False) -> Spectrum:
    """Diagonalize a dense operator.

    hermitian=True uses the symmetric eigensolver after certifying
    ||H - H^dagger|| <= 1e-10 ||H|| (raises otherwise); hermitian=False
    takes the Schur route and returns complex eigenvalues sorted by
    (real, imag).
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {h.shape}")
    if hermitian:
        defect = _hermiticity_defect(h)
        if defect > HERMITICITY_TOL:
            raise HermiticityError(
                f"matrix is not Hermitian: relative defect {defect} > {HERMITICITY_TOL}"
            )
        if want_vectors:
            vals, vecs = np.linalg.eigh(h)
            return Spectrum(eigenvalues=vals, eigenvectors=vecs, hermitian=True)
        return Spectrum(eigenvalues=np.linalg.eigvalsh(h), hermitian=True)
    t, z = scipy.linalg.schur(h.astype(complex), output="complex")
    vals = np.diag(t)
    order = np.lexsort((vals.imag, vals.real))
    vals = vals[order]
    vecs = None
    if want_vectors:
        _, vecs = scipy.linalg.eig(h)
    return Spectrum(eigenvalues=vals, eigenvectors=vecs, hermitian=False)


def sz_sector_indices(sites: SiteList):
    """Basis indices grouped by total-Sz value, in descending Sz order."""
    diag = np.real(np.diag(total_sz(sites)))
    keys = np.round(2.0 * diag) / 2.0
    order = {}
    for idx, key in enumerate(keys):
        order.setdefault(float(key), []).append(idx)
    return [
        (sz, np.array(idxs, dtype=int))
        for sz, idxs in sorted(order.items(), key=lambda kv: -kv[0])
    ]


def sector_decompose(h, sites: SiteList, hermitian=True, want_vectors=False):
    """Split H into total-Sz blocks and diagonalize each.

    Requires [H, Sz_total] = 0 to 1e-10 ||H||; raises otherwise.  Returns a
    list of Sector objects in descending Sz order.  The multiset union of
    block spectra equals the full spectrum (certified in the test suite).
    """
    h = np.asarray(h)
    sz_op = total_sz(sites)
    scale = max(1.0, float(np.max(np.abs(h))))
    comm = float(np.max(np.abs(h @ sz_op - sz_op @ h)))
    if comm > BLOCK_TOL * scale:
        raise NotBlockDiagonalError(
            f"[H, Sz] = {comm} exceeds {BLOCK_TOL} * scale {scale}; "
            "cannot decompose into Sz sectors"
        )
    sectors = []
    for sz, idxs in sz_sector_indices(sites):
        block = h[np.ix_(idxs, idxs)]
        spec = exact_spectrum(block, hermitian=hermitian, want_vectors=want_vectors)
        sectors.append(
            Sector(sz=sz, indices=idxs, eigenvalues=spec.eigenvalues,
                   eigenvectors=spec.eigenvectors)
        )
    return sectors


def sector_spectrum(sectors) -> Spectrum:
    """Flatten a sector decomposition into one labelled spectrum."""
    vals = np.concatenate([s.eigenvalues for s in sectors])
    labels = np.concatenate([np.full(len(s.eigenvalues), s.sz) for s in sectors])
    order = np.lexsort((labels, vals.real))
    return Spectrum(eigenvalues=vals[order], sectors=labels[order])


def group_degenerate(values, scale=1.0, tol=DEGENERACY_TOL):
    """Group sorted eigenvalues into degenerate clusters within tol*scale."""
    values = np.sort(np.asarray(values).real)
    groups = []
    for v in values:
        if groups and abs(v - groups[-1][0][-1]) <= tol * max(1.0, scale):
            groups[-1][0].append(v)
        else:
            groups.append(([v],))
    return [(float(np.mean(g)), len(g)) for (g,) in groups]


@dataclass
class MatchReport:
    """Outcome of matching computed levels against oracle levels by sector."""

    matched: list = field(default_factory=list)  # (sector, computed, oracle, gap)
    unmatched_computed: list = field(default_factory=list)  # (sector, energy)
    unmatched_oracle: list = field(default_factory=list)  # (sector, energy)
    tolerance: float = 0.0

    @property
    def max_gap(self) -> float:
        return max((m[3] for m in self.matched), default=0.0)

    @property
    def complete(self) -> bool:
        """True when every oracle level found a computed partner."""
        return not self.unmatched_oracle


def match_spectra(computed, computed_sectors, oracle, oracle_sectors,
                  tolerance) -> MatchReport:
    """Greedy nearest matching of two labelled level lists within sectors.

    Both inputs are flat arrays of energies with parallel sector labels.
    Each computed level claims the nearest unclaimed oracle level in its
    sector if within tolerance; ties resolve in ascending-energy order.
    """
    computed = np.asarray(computed, dtype=float)
    oracle = np.asarray(oracle, dtype=float)
    computed_sectors = np.asarray(computed_sectors, dtype=float)
    oracle_sectors = np.asarray(oracle_sectors, dtype=float)
    if computed.shape != computed_sectors.shape or oracle.shape != oracle_sectors.shape:
        raise ShapeError("energies and sector labels must have matching shapes")
    report = MatchReport(tolerance=float(tolerance))
    sector_keys = sorted(
        set(np.round(2 * computed_sectors) / 2) | set(np.round(2 * oracle_sectors) / 2),
        reverse=True,
    )
    for sz in sector_keys:
        comp = np.sort(computed[np.round(2 * computed_sectors) / 2 == sz])
        orac = np.sort(oracle[np.round(2 * oracle_sectors) / 2 == sz])
        used = np.zeros(len(orac), dtype=bool)
        for e in comp:
            # O(n) nearest unused scan; sector sizes are desk-scale
            best = -1
            best_gap = np.inf
            for idx in range(len(orac)):
                if used[idx]:
                    continue
                gap = abs(orac[idx] - e)
                if gap < best_gap:
                    best_gap = gap
                    best = idx
            if best >= 0 and best_gap <= tolerance:
                used[best] = True
                report.matched.append((sz, float(e), float(orac[best]), float(best_gap)))
            else:
                report.unmatched_computed.append((sz, float(e)))
        for idx in range(len(orac)):
            if not used[idx]:
                report.unmatched_oracle.append((sz, float(orac[idx])))
    return report
