"""Exact-diagonalization oracle, sector decomposition and spectrum matching."""

import numpy as np
import pytest
from conftest import random_spec

from spincluster import (
    HermiticityError,
    NotBlockDiagonalError,
    ShapeError,
    SiteList,
    build_hamiltonian,
    couplings_from_spec,
    exact_spectrum,
    group_degenerate,
    match_spectra,
    sector_decompose,
    sector_spectrum,
    site_sp,
    site_sz,
    sz_sector_indices,
)


def test_exact_spectrum_known_eigenvalues(rng):
    # conjugating a diagonal matrix by an orthogonal one keeps the spectrum
    d = np.array([-2.0, -0.5, 0.0, 1.25, 3.0])
    q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
    h = q @ np.diag(d) @ q.T
    spec = exact_spectrum(h)
    assert np.allclose(spec.eigenvalues, d)
    assert spec.hermitian


def test_exact_spectrum_vectors(rng):
    h = rng.standard_normal((6, 6))
    h = h + h.T
    spec = exact_spectrum(h, want_vectors=True)
    recon = spec.eigenvectors @ np.diag(spec.eigenvalues) @ spec.eigenvectors.conj().T
    assert np.allclose(recon, h, atol=1e-10)


def test_exact_spectrum_rejects_non_hermitian():
    with pytest.raises(HermiticityError):
        exact_spectrum(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ShapeError):
        exact_spectrum(np.zeros((2, 3)))


def test_exact_spectrum_non_hermitian_path():
    h = np.array([[1.0, 1.0], [0.0, 2.0]])  # upper triangular: eigenvalues 1, 2
    spec = exact_spectrum(h, hermitian=False)
    assert np.allclose(spec.eigenvalues, [1.0, 2.0])
    assert not spec.hermitian


def test_ising_diagonal_oracle():
    # H = Sz_0 Sz_1 + Sz_1 Sz_2 is diagonal; enumerate its entries directly
    sites = SiteList((0.5, 0.5), (0.5,))
    h = (site_sz(0, sites) @ site_sz(1, sites)
         + site_sz(1, sites) @ site_sz(2, sites))
    expect = []
    for b0 in (0.5, -0.5):
        for b1 in (0.5, -0.5):
            for b2 in (0.5, -0.5):
                expect.append(b0 * b1 + b1 * b2)
    got = exact_spectrum(h).eigenvalues
    assert len(got) == 8
    assert np.allclose(got, np.sort(expect))


def test_sz_sector_indices_smallest():
    sites = SiteList((0.5,), (0.5,))
    sectors = sz_sector_indices(sites)
    labels = [sz for sz, _ in sectors]
    dims = [len(idx) for _, idx in sectors]
    assert labels == [1.0, 0.0, -1.0]
    assert dims == [1, 2, 1]


def test_sector_decompose_covers_full_spectrum(rng):
    sites = SiteList((0.5, 0.5), (0.5,))
    spec = random_spec(sites, rng)
    h = build_hamiltonian(couplings_from_spec(spec), sites)
    sectors = sector_decompose(h, sites)
    assert sum(s.dim for s in sectors) == sites.dim
    union = np.sort(np.concatenate([s.eigenvalues for s in sectors]))
    assert np.allclose(union, exact_spectrum(h).eigenvalues, atol=1e-10)


def test_sector_decompose_rejects_sz_breaking():
    sites = SiteList((0.5,), (0.5,))
    h = site_sp(0, sites) + site_sp(0, sites).conj().T  # transverse field
    with pytest.raises(NotBlockDiagonalError):
        sector_decompose(h, sites)


def test_sector_spectrum_ordering(rng):
    sites = SiteList((0.5, 0.5), (0.5,))
    spec = random_spec(sites, rng)
    h = build_hamiltonian(couplings_from_spec(spec), sites)
    flat = sector_spectrum(sector_decompose(h, sites))
    assert np.all(np.diff(flat.eigenvalues.real) >= -1e-12)
    assert flat.sectors.shape == flat.eigenvalues.shape


def test_group_degenerate():
    groups = group_degenerate([1.0, 1.0 + 1e-10, 2.0, 2.0, 5.0])
    assert [(round(v, 6), k) for v, k in groups] == [(1.0, 2), (2.0, 2), (5.0, 1)]


def test_match_spectra_exact_and_shifted():
    vals = np.array([-1.0, 0.0, 2.0])
    secs = np.array([0.0, 1.0, 0.0])
    rep = match_spectra(vals, secs, vals, secs, tolerance=1e-12)
    assert rep.complete and not rep.unmatched_computed
    assert rep.max_gap == 0.0

    shifted = vals + np.array([0.0, 1e-3, 0.0])
    rep2 = match_spectra(shifted, secs, vals, secs, tolerance=1e-6)
    assert len(rep2.unmatched_computed) == 1
    assert len(rep2.unmatched_oracle) == 1
    assert not rep2.complete


def test_match_spectra_respects_sectors():
    # identical energies in different sectors must not cross-match
    computed = np.array([1.0])
    oracle = np.array([1.0])
    rep = match_spectra(computed, np.array([0.0]), oracle, np.array([1.0]),
                        tolerance=1e-6)
    assert rep.unmatched_computed == [(0.0, 1.0)]
    assert rep.unmatched_oracle == [(1.0, 1.0)]


def test_match_spectra_degenerate_levels():
    # two computed levels claim two distinct degenerate oracle copies
    computed = np.array([0.5, 0.5])
    oracle = np.array([0.5, 0.5])
    secs = np.zeros(2)
    rep = match_spectra(computed, secs, oracle, secs, tolerance=1e-9)
    assert len(rep.matched) == 2
    assert rep.complete
