"""Bethe equations, root solver, eigenvalues, vectors and multiplet spectra."""

import numpy as np
import pytest
from conftest import random_spec, smallest_iso_spec

from spincluster import (
    ConstraintError,
    OffShellError,
    SiteList,
    SolverConfig,
    apply_transfer,
    bae_jacobian,
    bae_residual,
    bethe_multiplet_levels,
    bethe_vector,
    build_hamiltonian,
    conjugation_defect,
    couplings_from_spec,
    energy,
    expand_multiplets,
    match_spectra,
    polynomial_root_candidates,
    relative_bae_residual,
    sector_decompose,
    sector_spectrum,
    singular_flags,
    solve_bae,
    spin_multiplicities,
    su2_symmetric,
    total_sz,
    transfer,
    transfer_eigenvalue,
    vacuum_data,
    verify_eigenpair,
)

FAST = SolverConfig(grid_re=5, grid_im=3, max_seeds=400)


def test_vacuum_polynomials_smallest():
    # M_a = M_b = 1/2 at unit parameters: a(u) = (u - 1/2)^2, d(u) = (u + 1/2)^2
    spec = smallest_iso_spec()
    vac = vacuum_data(spec)
    assert np.allclose(vac.a_coeffs, [1.0, -1.0, 0.25])
    assert np.allclose(vac.d_coeffs, [1.0, 1.0, 0.25])
    assert vac.weight_a == 0.5 and vac.weight_b == 0.5
    # vacuum = all spins up = first basis state
    assert np.argmax(np.abs(vac.state)) == 0


def test_vacuum_is_transfer_eigenvector(rng):
    spec = random_spec(SiteList((0.5, 1.0), (0.5,)), rng)
    vac = vacuum_data(spec)
    for u in (0.0, 0.63, -1.2 + 0.4j):
        lam = np.polyval(vac.a_coeffs, u) + np.polyval(vac.d_coeffs, u)
        resid = np.linalg.norm(transfer(u, spec) @ vac.state - lam * vac.state)
        assert resid < 1e-11 * max(1.0, abs(lam))


def test_weights_override_drops_state():
    spec = smallest_iso_spec()
    vac = vacuum_data(spec, weights=(1.0, 1.0))
    assert vac.state is None
    assert vac.weight_a == 1.0 and vac.weight_b == 1.0


def test_bae_residual_single_root_closed_form(rng):
    # for N = 1 the cleared equation is F(v) = a(v) - d(v)
    spec = random_spec(SiteList((0.5, 0.5), (0.5,)), rng)
    vac = vacuum_data(spec)
    poly = np.asarray(vac.a_coeffs) - np.asarray(vac.d_coeffs)
    for v in (0.3, -1.7 + 0.2j, 2.5j):
        f = bae_residual([v], spec)
        assert np.allclose(f, [np.polyval(poly, v)])


def test_bae_residual_permutation_symmetry(rng):
    spec = random_spec(SiteList((0.5, 0.5), (0.5, 0.5)), rng)
    v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    f = bae_residual(v, spec)
    perm = [2, 0, 1]
    f_perm = bae_residual(v[perm], spec)
    assert np.allclose(f_perm, f[perm])


def test_bae_jacobian_matches_finite_differences(rng):
    spec = random_spec(SiteList((0.5, 0.5), (0.5,)), rng)
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    jac = bae_jacobian(v, spec)
    h = 1e-7
    for j in range(2):
        dv = np.zeros(2, dtype=complex)
        dv[j] = h
        col = (bae_residual(v + dv, spec) - bae_residual(v - dv, spec)) / (2 * h)
        assert np.max(np.abs(col - jac[:, j])) < 1e-5 * max(1.0, np.max(np.abs(jac)))


def test_solve_bae_sector_bounds():
    spec = smallest_iso_spec()
    with pytest.raises(ConstraintError):
        solve_bae(3, spec)  # beyond 2 * min capacity of the cluster
    empty = solve_bae(0, spec)
    assert len(empty) == 1 and empty[0].n_roots == 0
    assert empty[0].converged


def test_smallest_instance_frozen_solution():
    # N = 1: the single rapidity sits at the origin and is singular;
    # Lambda(u) = 2u^2 - 3/2 and E = -3/2 (the singlet)
    spec = smallest_iso_spec()
    sols = solve_bae(1, spec, config=FAST)
    assert len(sols) == 1
    rs = sols[0]
    assert rs.converged and rs.isolated
    assert abs(rs.roots[0]) < 1e-8
    assert rs.any_singular
    lam0 = transfer_eigenvalue(0.0, rs.roots, spec)
    assert np.isclose(lam0, -1.5, atol=1e-9)
    lam = transfer_eigenvalue(0.7, rs.roots, spec)
    assert np.isclose(lam, 2 * 0.7**2 - 1.5, atol=1e-9)
    assert np.isclose(energy(rs.roots, spec), -1.5, atol=1e-9)


def test_smallest_instance_continuous_family():
    # N = 2 solutions form a one-parameter family (v1 v2 = -1/4) sharing
    # Lambda; the solver reports a single non-isolated representative
    spec = smallest_iso_spec()
    sols = solve_bae(2, spec, config=FAST)
    families = [s for s in sols if not s.isolated]
    assert len(families) == 1
    rs = families[0]
    assert np.isclose(np.prod(rs.roots), -0.25, atol=1e-6)
    _, norm = bethe_vector(rs.roots, spec)
    assert norm < 1e-8  # family states are null vectors


def test_n1_solutions_match_closed_form(rng):
    spec = random_spec(SiteList((0.5, 0.5), (0.5,)), rng)
    vac = vacuum_data(spec)
    closed = np.roots(np.asarray(vac.a_coeffs) - np.asarray(vac.d_coeffs))
    sols = solve_bae(1, spec, config=FAST)
    got = sorted((complex(s.roots[0]) for s in sols if s.converged),
                 key=lambda z: (round(z.real, 8), round(z.imag, 8)))
    want = sorted((complex(z) for z in closed),
                  key=lambda z: (round(z.real, 8), round(z.imag, 8)))
    assert len(got) == len(want)
    assert all(abs(g - w) < 1e-7 for g, w in zip(got, want))


def test_polynomial_candidates_cover_solutions(rng):
    # every converged Newton solution appears among the eigenproblem seeds
    spec = random_spec(SiteList((0.5, 0.5), (0.5,)), rng, isotropic=True)
    sols = solve_bae(1, spec, config=FAST)
    cands = polynomial_root_candidates(1, spec)
    for s in sols:
        gap = min(np.max(np.abs(np.sort_complex(c) - np.sort_complex(s.roots)))
                  for c in cands)
        assert gap < 1e-6


def test_two_spin_block_candidates():
    # weights (1, 1), N = 2 at the unit isotropic point: v = +/- 1/sqrt(3)
    spec = smallest_iso_spec()
    sols = solve_bae(2, spec, weights=(1.0, 1.0), config=FAST)
    good = [s for s in sols if s.isolated and not s.any_singular]
    assert len(good) >= 1
    target = np.sort([-1 / np.sqrt(3), 1 / np.sqrt(3)])
    hit = any(np.allclose(np.sort(s.roots.real), target, atol=1e-7)
              and np.max(np.abs(s.roots.imag)) < 1e-7 for s in good)
    assert hit


def test_solver_deterministic(rng):
    spec = random_spec(SiteList((0.5, 0.5), (0.5,)), rng)
    a = solve_bae(1, spec, config=FAST)
    b = solve_bae(1, spec, config=FAST)
    assert len(a) == len(b)
    for ra, rb in zip(a, b):
        assert np.array_equal(ra.roots, rb.roots)


def test_singular_flags():
    assert singular_flags([0.0], 1.0).tolist() == [True]
    assert singular_flags([0.4], 1.0).tolist() == [False]
    # an eta-string pair is flagged on both members
    assert singular_flags([0.5, -0.5], 1.0).tolist() == [True, True]
    assert singular_flags([0.5 + 5e-9, -0.5], 1.0).tolist() == [True, True]
    # displacements beyond the tolerance are regular
    assert singular_flags([0.5 + 1e-4, -0.5], 1.0).tolist() == [False, False]


def test_conjugation_defect():
    assert conjugation_defect([0.3, -1.2]) < 1e-15
    assert conjugation_defect([0.3 + 0.4j, 0.3 - 0.4j]) < 1e-15
    assert conjugation_defect([1j]) == pytest.approx(2.0)


def test_eigenvalue_polynomial_identity(rng):
    # a(v_i) Q(v_i + eta) + d(v_i) Q(v_i - eta) = eta F_i at any point,
    # so the division remainder vanishes exactly on shell
    spec = random_spec(SiteList((0.5, 0.5), (0.5, 0.5)), rng)
    vac = vacuum_data(spec)
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    numerator = np.polyadd(
        np.polymul(vac.a_coeffs, np.poly(v - spec.eta)),
        np.polymul(vac.d_coeffs, np.poly(v + spec.eta)),
    )
    lhs = np.polyval(numerator, v)
    rhs = spec.eta * bae_residual(v, spec)
    assert np.max(np.abs(lhs - rhs)) < 1e-12 * max(1.0, np.max(np.abs(lhs)))


def test_transfer_eigenvalue_off_shell_paths(rng):
    spec = random_spec(SiteList((0.5, 0.5), (0.5,)), rng)
    bad = np.array([0.37, -0.82])  # arbitrary, not a solution
    assert relative_bae_residual(bad, spec) > 1e-6
    with pytest.raises(OffShellError):
        transfer_eigenvalue(0.5, bad, spec)
    with pytest.raises(OffShellError):
        energy(bad, spec)
    # rational evaluation still works away from the rapidities
    vac = vacuum_data(spec)
    u = 1.9
    lam = transfer_eigenvalue(u, bad, spec, allow_off_shell=True)
    manual = (np.polyval(vac.a_coeffs, u) * np.prod((u - bad + spec.eta) / (u - bad))
              + np.polyval(vac.d_coeffs, u) * np.prod((u - bad - spec.eta) / (u - bad)))
    assert np.isclose(lam, manual)


def test_energy_scales_with_xi0(rng):
    # the same rapidities under a rescaled xi0 shift the energy by
    # (xi0' - xi0) Lambda(0) plus the xi2 bookkeeping term
    import dataclasses

    spec = random_spec(SiteList((0.5, 0.5), (0.5,)), rng, isotropic=True)
    sols = solve_bae(1, spec, config=FAST)
    roots = sols[0].roots
    lam0 = transfer_eigenvalue(0.0, roots, spec)
    doubled = dataclasses.replace(spec, xi0=2 * spec.xi0)
    e1 = energy(roots, spec)
    e2 = energy(roots, doubled)
    lhs1 = e1 + spec.xi2 * spec.sigma_ab
    lhs2 = e2 + doubled.xi2 * doubled.sigma_ab
    assert np.isclose(lhs2 - lhs1, spec.xi0 * lam0.real, atol=1e-9)


def test_bethe_vector_sector_and_alignment(rng):
    # each rapidity lowers total Sz by one; on-shell pairs give the same
    # state in either order (generic anisotropic point so the N = 2 sector
    # carries regular highest-residual-free states)
    spec = random_spec(SiteList((0.5, 0.5), (0.5,)), rng)
    sites = spec.sites
    sz = total_sz(sites)
    sols = [s for s in solve_bae(2, spec, config=FAST)
            if s.isolated and s.converged]
    picked = None
    for s in sols:
        vec, norm = bethe_vector(s.roots, spec)
        if norm > 1e-8:
            picked = (s, vec, norm)
            break
    assert picked is not None
    s, vec, norm = picked
    expect_sz = sites.weight_a + sites.weight_b - 2
    got_sz = np.real(vec.conj() @ (sz @ vec)) / norm**2
    assert np.isclose(got_sz, expect_sz, atol=1e-9)

    swapped, norm2 = bethe_vector(s.roots[::-1], spec)
    alignment = abs(vec.conj() @ swapped) / (norm * norm2)
    assert alignment > 1 - 1e-9


def test_verify_eigenpair_on_shell(rng):
    spec = random_spec(SiteList((0.5, 0.5), (0.5,)), rng)
    h = build_hamiltonian(couplings_from_spec(spec), spec.sites)
    flat = sector_spectrum(sector_decompose(h, spec.sites))
    sols = solve_bae(1, spec, config=FAST)
    for s in sols:
        rep = verify_eigenpair(s.roots, spec, oracle_energies=flat.eigenvalues,
                               oracle_sectors=flat.sectors)
        assert rep.on_shell
        assert rep.sector == spec.sites.weight_a + spec.sites.weight_b - 1
        if not rep.null_vector:
            assert max(r for _, r in rep.eigen_residuals) < 1e-8
            assert rep.oracle_gap < 1e-8


def test_verify_eigenpair_off_shell(rng):
    spec = random_spec(SiteList((0.5, 0.5), (0.5,)), rng)
    rep = verify_eigenpair(np.array([0.9, -0.1]), spec)
    assert not rep.on_shell
    assert rep.energy is None
    assert any("off shell" in note for note in rep.notes)


def test_spin_multiplicities():
    assert spin_multiplicities([0.5, 0.5]) == {0.0: 1, 1.0: 1}
    assert spin_multiplicities([0.5, 0.5, 0.5]) == {0.5: 2, 1.5: 1}
    assert spin_multiplicities([1.0, 0.5]) == {0.5: 1, 1.5: 1}
    assert spin_multiplicities([1.0, 1.0]) == {0.0: 1, 1.0: 1, 2.0: 1}
    # multiplicity-weighted dimensions reproduce the product dimension
    mult = spin_multiplicities([0.5, 1.0, 1.5])
    assert sum(c * int(round(2 * j + 1)) for j, c in mult.items()) == 2 * 3 * 4


def test_su2_symmetric_predicate(rng):
    assert su2_symmetric(smallest_iso_spec())
    iso = random_spec(SiteList((0.5, 0.5), (0.5,)), rng, isotropic=True)
    assert su2_symmetric(iso)
    generic = random_spec(SiteList((0.5, 0.5), (0.5,)), rng)
    assert not su2_symmetric(generic)


def test_multiplet_levels_require_symmetry(rng):
    generic = random_spec(SiteList((0.5,), (0.5,)), rng)
    with pytest.raises(ConstraintError):
        bethe_multiplet_levels(generic)


def test_multiplet_completeness_two_plus_one(rng):
    # (1/2,1/2) + (1/2): 8 levels, matched to exact diagonalization
    sites = SiteList((0.5, 0.5), (0.5,))
    spec = random_spec(sites, rng, isotropic=True)
    levels = bethe_multiplet_levels(spec)
    energies, sectors = expand_multiplets(levels)
    assert len(energies) == sites.dim

    h = build_hamiltonian(couplings_from_spec(spec), sites)
    flat = sector_spectrum(sector_decompose(h, sites))
    report = match_spectra(energies, sectors, flat.eigenvalues.real,
                           flat.sectors, tolerance=1e-7)
    assert report.complete
    assert not report.unmatched_computed
    assert report.max_gap < 1e-9


def test_expand_multiplets_counts():
    spec = smallest_iso_spec()
    levels = bethe_multiplet_levels(spec)
    # blocks: (1/2, 1/2) with N = 0 (triplet) and N = 1 (singlet)
    assert len(levels) == 2
    by_n = {lev.n_roots: lev for lev in levels}
    assert by_n[0].total_spin == 1.0 and by_n[1].total_spin == 0.0
    energies, sectors = expand_multiplets(levels)
    assert len(energies) == 4
    assert sorted(sectors.tolist()) == [-1.0, 0.0, 0.0, 1.0]
    assert np.isclose(by_n[1].energy, -1.5)
    assert np.isclose(by_n[0].energy, 0.5)
