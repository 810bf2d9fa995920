"""Coupling map, Hamiltonian equality, parameter fitting and graph output."""

import dataclasses

import numpy as np
import pytest
from conftest import (
    SHAPES_HALF,
    SHAPES_MIXED,
    random_spec,
    sitelists,
    smallest_iso_spec,
)

from spincluster import (
    ConstraintError,
    CouplingSet,
    ShapeError,
    SiteList,
    build_hamiltonian,
    couplings_from_spec,
    fit_parameters,
    hamiltonian_from_charges,
    interaction_graph,
    to_dot,
    total_spin_squared,
    total_sz,
)


def comm(a, b):
    return a @ b - b @ a


def replace_coupling(cs, **kw):
    fields = {f.name: getattr(cs, f.name) for f in dataclasses.fields(CouplingSet)}
    fields.update(kw)
    return CouplingSet(**fields)


def test_smallest_iso_couplings():
    # unit isotropic point: sigma = 2, delta = 0, so H = 2 S_a . S_b
    spec = smallest_iso_spec()
    cs = couplings_from_spec(spec)
    assert np.allclose(cs.bz_a, 0) and np.allclose(cs.bz_b, 0)
    assert np.allclose(cs.d_a, 0) and np.allclose(cs.d_b, 0)
    assert np.allclose(cs.jz_ab, [[2.0]])
    assert np.allclose(cs.jxy_ab, [[2.0]])
    h = build_hamiltonian(cs, spec.sites)
    expect = np.array(
        [
            [0.5, 0, 0, 0],
            [0, -0.5, 1.0, 0],
            [0, 1.0, -0.5, 0],
            [0, 0, 0, 0.5],
        ]
    )
    assert np.allclose(h, expect)
    assert np.allclose(np.sort(np.linalg.eigvalsh(h)), [-1.5, 0.5, 0.5, 0.5])


def test_hamiltonian_equality(rng):
    # direct coupling assembly equals the charge combination on every shape
    for sites in sitelists(SHAPES_HALF + SHAPES_MIXED[:2]):
        for k in range(3):
            spec = random_spec(sites, rng, isotropic=(k == 0), ratio=(k == 1))
            h_direct = build_hamiltonian(couplings_from_spec(spec), sites)
            h_charges = hamiltonian_from_charges(spec)
            scale = max(1.0, np.max(np.abs(h_direct)))
            assert np.max(np.abs(h_direct - h_charges)) < 1e-10 * scale


def test_hamiltonian_hermitian_and_conserves_sz(rng):
    for sites in sitelists([SHAPES_HALF[1], SHAPES_MIXED[0]]):
        spec = random_spec(sites, rng)
        h = build_hamiltonian(couplings_from_spec(spec), sites)
        scale = max(1.0, np.max(np.abs(h)))
        assert np.max(np.abs(h - h.conj().T)) < 1e-12 * scale
        assert np.max(np.abs(comm(h, total_sz(sites)))) < 1e-11 * scale


def test_su2_symmetry_only_at_isotropic_point(rng):
    sites = SiteList((0.5, 0.5), (0.5,))
    s2 = total_spin_squared(sites)

    iso = random_spec(sites, rng, isotropic=True)
    h_iso = build_hamiltonian(couplings_from_spec(iso), sites)
    assert np.max(np.abs(comm(h_iso, s2))) < 1e-11 * max(1.0, np.max(np.abs(h_iso)))

    generic = random_spec(sites, rng)
    assert abs(generic.delta_ab) > 1e-3  # the draw keeps weights uneven
    h_gen = build_hamiltonian(couplings_from_spec(generic), sites)
    assert np.max(np.abs(comm(h_gen, s2))) > 1e-6


def test_build_hamiltonian_shape_check(rng):
    spec = random_spec(SiteList((0.5,), (0.5,)), rng)
    cs = couplings_from_spec(spec)
    with pytest.raises(ShapeError):
        build_hamiltonian(cs, SiteList((0.5, 0.5), (0.5,)))


def test_coupling_set_validation():
    ok = dict(
        bz_a=np.zeros(2), bz_b=np.zeros(1), d_a=np.zeros(2), d_b=np.zeros(1),
        jz_aa=np.zeros((2, 2)), jz_bb=np.zeros((1, 1)),
        jz_ab=np.ones((2, 1)), jxy_ab=np.ones((2, 1)),
    )
    CouplingSet(**ok)

    asym = dict(ok, jz_aa=np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(ConstraintError):
        CouplingSet(**asym)

    diag = dict(ok, jz_aa=np.array([[1.0, 0.0], [0.0, 1.0]]))
    with pytest.raises(ConstraintError):
        CouplingSet(**diag)

    misshapen = dict(ok, jz_ab=np.ones((1, 2)))
    with pytest.raises(ShapeError):
        CouplingSet(**misshapen)


def test_fit_round_trip(rng):
    shapes = SHAPES_HALF + SHAPES_MIXED
    for k in range(25):
        sites = SiteList(*shapes[k % len(shapes)])
        spec = random_spec(sites, rng, isotropic=(k % 3 == 0), ratio=(k % 2 == 0))
        cs = couplings_from_spec(spec)
        result = fit_parameters(cs, sites)
        assert result.feasible, result.violations
        assert result.max_relative_error < 1e-8
        rebuilt = couplings_from_spec(result.spec)
        for name in ("bz_a", "bz_b", "d_a", "d_b", "jz_aa", "jz_bb", "jz_ab", "jxy_ab"):
            scale = max(1.0, cs.max_abs())
            assert np.max(np.abs(getattr(rebuilt, name) - getattr(cs, name))) < 1e-8 * scale
        # fitted parameters reproduce the full Hamiltonian, not just couplings
        h1 = build_hamiltonian(cs, sites)
        h2 = build_hamiltonian(rebuilt, sites)
        assert np.max(np.abs(h1 - h2)) < 1e-8 * max(1.0, np.max(np.abs(h1)))


def test_fit_rejects_nonuniform_exchange(rng):
    spec = random_spec(SiteList((0.5, 0.5), (0.5,)), rng)
    cs = couplings_from_spec(spec)
    jxy = cs.jxy_ab.copy()
    jxy[0, 0] *= 1.3
    bad = replace_coupling(cs, jxy_ab=jxy)
    result = fit_parameters(bad, spec.sites)
    assert not result.feasible
    assert any("Jxy must be uniform" in v for v in result.violations)


def test_fit_rejects_unreachable_anisotropy():
    # |K| < |Jxy| needs complex weights; the fit must refuse
    sites = SiteList((0.5,), (0.5,))
    cs = CouplingSet(
        bz_a=[0.0], bz_b=[0.0], d_a=[0.0], d_b=[0.0],
        jz_aa=np.zeros((1, 1)), jz_bb=np.zeros((1, 1)),
        jz_ab=[[0.5]], jxy_ab=[[2.0]],
    )
    result = fit_parameters(cs, sites)
    assert not result.feasible
    assert any("real weights" in v for v in result.violations)


def test_fit_rejects_sign_mismatch():
    sites = SiteList((0.5,), (0.5,))
    cs = CouplingSet(
        bz_a=[0.0], bz_b=[0.0], d_a=[0.0], d_b=[0.0],
        jz_aa=np.zeros((1, 1)), jz_bb=np.zeros((1, 1)),
        jz_ab=[[-2.0]], jxy_ab=[[1.0]],
    )
    result = fit_parameters(cs, sites)
    assert not result.feasible
    assert any("sign" in v for v in result.violations)


def test_fit_rejects_field_without_anisotropy():
    # Bz != 0 with Delta = 0 (Jz = Jxy) cannot come from these models
    sites = SiteList((0.5,), (0.5,))
    cs = CouplingSet(
        bz_a=[0.3], bz_b=[0.0], d_a=[0.0], d_b=[0.0],
        jz_aa=np.zeros((1, 1)), jz_bb=np.zeros((1, 1)),
        jz_ab=[[2.0]], jxy_ab=[[2.0]],
    )
    result = fit_parameters(cs, sites)
    assert not result.feasible
    assert any("distinct weight products" in v for v in result.violations)


def test_fit_rejects_zero_exchange():
    sites = SiteList((0.5,), (0.5,))
    cs = CouplingSet(
        bz_a=[0.0], bz_b=[0.0], d_a=[0.0], d_b=[0.0],
        jz_aa=np.zeros((1, 1)), jz_bb=np.zeros((1, 1)),
        jz_ab=[[1.0]], jxy_ab=[[0.0]],
    )
    result = fit_parameters(cs, sites)
    assert not result.feasible
    assert any("nonzero" in v for v in result.violations)


def test_fit_rejects_intra_jz_mismatch(rng):
    spec = random_spec(SiteList((0.5, 0.5), (0.5,)), rng)
    cs = couplings_from_spec(spec)
    jz_aa = cs.jz_aa.copy()
    jz_aa[0, 1] = jz_aa[1, 0] = jz_aa[0, 1] + 0.7
    bad = replace_coupling(cs, jz_aa=jz_aa)
    result = fit_parameters(bad, spec.sites)
    assert not result.feasible
    assert any("intra-species" in v for v in result.violations)


def test_graph_complete_when_anisotropic(rng):
    # xi1 != 0 and Delta != 0 turn on every intra edge: K8 on 4+4 sites
    sites = SiteList((0.5,) * 4, (0.5,) * 4)
    spec = random_spec(sites, rng)
    assert spec.xi1 != 0 and abs(spec.delta_ab) > 1e-3
    g = interaction_graph(couplings_from_spec(spec))
    assert g.edge_count() == 28
    assert g.edge_count("aa") == 6
    assert g.edge_count("bb") == 6
    assert g.edge_count("ab") == 16


def test_graph_bipartite_at_isotropic_point(rng):
    sites = SiteList((0.5,) * 4, (0.5,) * 4)
    spec = random_spec(sites, rng, isotropic=True)
    g = interaction_graph(couplings_from_spec(spec))
    assert g.edge_count() == 16
    assert g.edge_count("aa") == 0 and g.edge_count("bb") == 0


def test_graph_vertices_and_dot_format():
    spec = smallest_iso_spec()
    g = interaction_graph(couplings_from_spec(spec))
    assert g.vertex_labels == ("a1", "b1")
    expect = (
        "graph interactions {\n"
        "  a1 [species=a, color=green];\n"
        "  b1 [species=b, color=orange];\n"
        "  a1 -- b1 [style=solid, color=black];\n"
        "}\n"
    )
    assert to_dot(g) == expect


def test_dot_edge_styles(rng):
    sites = SiteList((0.5, 0.5), (0.5, 0.5))
    spec = random_spec(sites, rng)
    dot = to_dot(interaction_graph(couplings_from_spec(spec)))
    assert 'a1 -- a2 [style="dashed,dotted", color=green];' in dot
    assert "b1 -- b2 [style=dashed, color=orange];" in dot
    assert "a1 -- b1 [style=solid, color=black];" in dot
    # deterministic output
    assert dot == to_dot(interaction_graph(couplings_from_spec(spec)))
