"""Command line interface: verify | spectrum | bethe | graph | fit.

Every command reads a TOML config (--config, required; see config module
for the schema) and writes reports into --out (default: the config's
[output] directory).

Output contracts:

- JSON reports: keys sorted, 2-space indent, floats printed with 17
  significant digits so reruns are byte-identical.  Complex numbers
  appear as [re, im] pairs.  Every residual entry carries the threshold
  it is judged against and the relation it certifies.
- CSV spectra: header ``index,sector,eigenvalue``; one row per level,
  sorted by ascending eigenvalue with ties broken by descending sector;
  sector is the total-Sz value.
- DOT graphs: an undirected ``graph interactions { ... }``.  Vertices are
  named a1..an then b1..bm, each with species and color attributes; edges
  follow, ordered aa pairs, bb pairs, then ab pairs, with attributes
  ``[style="dashed,dotted", color=green]`` (aa), ``[style=dashed,
  color=orange]`` (bb), ``[style=solid, color=black]`` (ab).
- Figures: when [output] figures = true, PNG renderings are written next
  to the delimited reports (graph.png, spectrum.png, roots.png).

Exit codes: 0 success, 1 check or capacity failure, 2 usage/parse
failure.

The environment variable SPINCLUSTER_THREADS bounds the thread count for
the randomized verification sweeps (default: available cores).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import bethe as bt
from .config import RunConfig, load_config
from .core import charges, lax_a, lax_b, r_matrix, rll_residual, transfer, ybe_residual
from .errors import ConfigError, SpinClusterError
from .model import (
    CouplingSet,
    build_hamiltonian,
    couplings_from_spec,
    fit_parameters,
    hamiltonian_from_charges,
    interaction_graph,
    to_dot,
)
from .oracle import match_spectra, sector_decompose, sector_spectrum
from .spins import total_spin_squared, total_sz

MATCH_TOL = 1e-6
COMPLETENESS_TOL = 1e-7
EIGENPAIR_TOL = 1e-8


# ---------------------------------------------------------------------------
# Deterministic serialization
# ---------------------------------------------------------------------------


def _fmt_float(x) -> str:
    x = float(x)
    if x != x or x in (float("inf"), float("-inf")):
        return json.dumps(str(x))
    return format(x, ".17g")


def _emit_json(obj, indent=0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [
            f"{inner}{json.dumps(str(k))}: {_emit_json(obj[k], indent + 1)}"
            for k in sorted(obj)
        ]
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            return "[]"
        parts = [f"{inner}{_emit_json(v, indent + 1)}" for v in seq]
        return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return _emit_json([obj.real, obj.imag], indent)
    if isinstance(obj, np.ndarray):
        return _emit_json(obj.tolist(), indent)
    return json.dumps(str(obj))


def _write_json(path, obj):
    with open(path, "w") as handle:
        handle.write(_emit_json(obj) + "\n")
    return path


def _write_text(path, text):
    with open(path, "w") as handle:
        handle.write(text)
    return path


def _spectrum_rows(energies, sectors):
    order = np.lexsort((-np.asarray(sectors), np.asarray(energies)))
    lines = ["index,sector,eigenvalue"]
    for idx, k in enumerate(order):
        lines.append(f"{idx},{format(float(sectors[k]), '.17g')},"
                     f"{format(float(energies[k]), '.17g')}")
    return "\n".join(lines) + "\n"


def _thread_count() -> int:
    raw = os.environ.get("SPINCLUSTER_THREADS", "")
    if raw.strip():
        try:
            return max(1, int(raw))
        except ValueError as exc:
            raise ConfigError(f"SPINCLUSTER_THREADS must be an integer: {raw!r}") from exc
    return os.cpu_count() or 1


def _map(fn, items):
    items = list(items)
    workers = min(_thread_count(), len(items)) if items else 1
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _spec_dict(spec):
    return {
        "spins_a": list(spec.sites.spins_a),
        "spins_b": list(spec.sites.spins_b),
        "dimension": spec.sites.dim,
        "gamma_a": spec.gamma_a, "rho_a": spec.rho_a,
        "gamma_b": spec.gamma_b, "rho_b": spec.rho_b,
        "eta": spec.eta, "omega_a": spec.omega_a, "omega_b": spec.omega_b,
        "xi0": spec.xi0, "xi1": spec.xi1,
        "alpha_a": list(spec.alpha_a), "beta_a": list(spec.beta_a),
        "alpha_b": list(spec.alpha_b), "beta_b": list(spec.beta_b),
    }


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _guarded_points(rng, count, radius, eta):
    """Random complex pairs with all R-matrix arguments kept off the pole."""
    guard = 1e-3 * max(1.0, abs(eta))
    points = []
    while len(points) < count:
        u, v = rng.uniform(-radius, radius, 2) + 1j * rng.uniform(-radius, radius, 2)
        if min(abs(u + eta), abs(v + eta), abs(u - v + eta)) > guard:
            points.append((complex(u), complex(v)))
    return points


def _check(name, certifies, residual, threshold, note=None):
    entry = {
        "name": name,
        "certifies": certifies,
        "residual": residual,
        "threshold": threshold,
        "passed": bool(residual is not None and residual <= threshold),
    }
    if note:
        entry["note"] = note
    return entry


def _failed_check(name, certifies, threshold, exc):
    return {
        "name": name, "certifies": certifies, "residual": None,
        "threshold": threshold, "passed": False, "note": str(exc),
    }


def cmd_verify(run: RunConfig, out_dir, figures) -> int:
    spec = run.spec
    rng = np.random.default_rng(run.verify_seed)
    eta = spec.eta
    checks = []

    points = _guarded_points(rng, run.verify_samples, run.verify_radius, eta)
    ybe_max = max(_map(lambda p: ybe_residual(p[0], p[1], eta), points))
    checks.append(_check(
        "yang_baxter", "R12(u-v) R13(u) R23(v) = R23(v) R13(u) R12(u-v)",
        ybe_max, 1e-12,
    ))

    rll_points = points[: min(len(points), 25)]
    for species, lax in (("a", lax_a), ("b", lax_b)):
        def lax_fn(u, _lax=lax):
            return _lax(u, spec, check=False)
        rll_max = max(_map(
            lambda p, fn=lax_fn: rll_residual(p[0], p[1], fn, eta),
            rll_points,
        ))
        checks.append(_check(
            f"rll_{species}",
            f"R(u-v) [L{species}(u) x L{species}(v)]"
            f" = [L{species}(v) x L{species}(u)] R(u-v)",
            rll_max, 1e-11,
        ))

    pair_points = points[: min(len(points), 20)]

    def commute_residual(pair):
        tu = transfer(pair[0], spec, check=False)
        tv = transfer(pair[1], spec, check=False)
        scale = max(np.max(np.abs(tu)) * np.max(np.abs(tv)), 1e-30)
        return float(np.max(np.abs(tu @ tv - tv @ tu))) / scale
    checks.append(_check(
        "transfer_commutativity", "[t(u), t(v)] = 0",
        max(_map(commute_residual, pair_points)), 1e-10,
    ))

    herm_u = [complex(u) for u, _ in points[:5]]

    def conj_residual(u):
        tu = transfer(u, spec, check=False)
        tc = transfer(np.conj(u), spec, check=False)
        scale = max(float(np.max(np.abs(tu))), 1e-30)
        return float(np.max(np.abs(tu.conj().T - tc))) / scale
    checks.append(_check(
        "transfer_conjugation", "t(u)^dagger = t(conj(u))",
        max(_map(conj_residual, herm_u)), 1e-10,
    ))

    vac = np.zeros(spec.sites.dim, dtype=complex)
    vac[0] = 1.0
    vdata = bt.vacuum_data(spec)

    def vacuum_residual(u):
        lam = np.polyval(vdata.a_coeffs, u) + np.polyval(vdata.d_coeffs, u)
        return float(np.linalg.norm(bt.apply_transfer(u, spec, vac) - lam * vac))
    checks.append(_check(
        "vacuum_eigenpair", "t(u)|0> = (a(u) + d(u)) |0>",
        max(_map(vacuum_residual, herm_u + [0.0, 1.0])), 1e-11,
    ))

    charge_certifies = "[C0, C1] = [C0, C2] = [C1, C2] = 0"
    h_certifies = ("coupling-built H equals"
                   " xi0 C0 + C1 (1 + xi1 C1) - xi2 C2")
    try:
        ch = charges(spec)
        ops = {"C0": ch.c0, "C1": ch.c1, "C2": ch.c2}
        residual = 0.0
        for x in ops.values():
            for y in ops.values():
                scale = max(np.max(np.abs(x)) * np.max(np.abs(y)), 1e-30)
                residual = max(residual, float(np.max(np.abs(x @ y - y @ x))) / scale)
        checks.append(_check("charge_commutativity", charge_certifies, residual, 1e-10))

        h_direct = build_hamiltonian(couplings_from_spec(spec), spec.sites)
        h_charges = hamiltonian_from_charges(spec)
        h_scale = max(float(np.max(np.abs(h_direct))), 1e-30)
        checks.append(_check(
            "h_equality", h_certifies,
            float(np.max(np.abs(h_direct - h_charges))) / h_scale, 1e-10,
        ))

        herm = float(np.max(np.abs(h_direct - h_direct.conj().T))) / h_scale
        checks.append(_check("hermiticity", "H = H^dagger", herm, 1e-10))

        sz = total_sz(spec.sites)
        cons = float(np.max(np.abs(h_direct @ sz - sz @ h_direct))) / h_scale
        checks.append(_check("conservation_sz", "[H, total Sz] = 0", cons, 1e-11))

        if bt.su2_symmetric(spec):
            s2 = total_spin_squared(spec.sites)
            cons2 = float(np.max(np.abs(h_direct @ s2 - s2 @ h_direct))) / h_scale
            checks.append(_check(
                "conservation_s2",
                "[H, total S^2] = 0 at the SU(2)-symmetric point",
                cons2, 1e-11,
            ))
    except SpinClusterError as exc:
        checks.append(_failed_check("charge_commutativity", charge_certifies, 1e-10, exc))
        checks.append(_failed_check("h_equality", h_certifies, 1e-10, exc))

    all_passed = all(c["passed"] for c in checks)
    report = {
        "all_passed": all_passed,
        "checks": checks,
        "samples": run.verify_samples,
        "seed": run.verify_seed,
        "spec": _spec_dict(spec),
        "constraint_violations": spec.constraint_violations(),
    }
    path = _write_json(os.path.join(out_dir, "verify.json"), report)
    for c in checks:
        tag = "PASS" if c["passed"] else "FAIL"
        shown = "n/a" if c["residual"] is None else format(c["residual"], ".3e")
        print(f"[{tag}] {c['name']}: residual {shown} vs {c['threshold']:g}")
    print(f"wrote {path}")
    return 0 if all_passed else 1


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------


def _load_couplings(path) -> CouplingSet:
    try:
        with open(path) as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read couplings file {path}: {exc}") from exc
    keys = ("bz_a", "bz_b", "d_a", "d_b", "jz_aa", "jz_bb", "jz_ab", "jxy_ab")
    missing = [k for k in keys if k not in data]
    if missing:
        raise ConfigError(f"couplings file {path} lacks: {', '.join(missing)}")
    try:
        return CouplingSet(**{k: np.asarray(data[k], dtype=float) for k in keys})
    except (ValueError, SpinClusterError) as exc:
        raise ConfigError(f"couplings file {path}: {exc}") from exc


def cmd_spectrum(run: RunConfig, out_dir, figures, from_couplings=None) -> int:
    sites = run.spec.sites
    summary = {"dimension": sites.dim,
               "spins_a": list(sites.spins_a), "spins_b": list(sites.spins_b)}
    if from_couplings is not None:
        coup = _load_couplings(from_couplings)
        if coup.n != sites.n or coup.m != sites.m:
            raise ConfigError(
                f"couplings are for {coup.n}+{coup.m} sites, config has "
                f"{sites.n}+{sites.m}"
            )
        fit = fit_parameters(coup, sites)
        summary["fit"] = {
            "feasible": fit.feasible,
            "violations": list(fit.violations),
            "max_relative_error": fit.max_relative_error,
        }
        if fit.feasible:
            summary["fit"]["parameters"] = _spec_dict(fit.spec)
        h = build_hamiltonian(coup, sites)
    else:
        coup = couplings_from_spec(run.spec)
        h_charges = hamiltonian_from_charges(run.spec)
        h = build_hamiltonian(coup, sites)
        scale = max(float(np.max(np.abs(h))), 1e-30)
        summary["h_equality"] = {
            "certifies": "coupling-built H equals xi0 C0 + C1 (1 + xi1 C1) - xi2 C2",
            "residual": float(np.max(np.abs(h - h_charges))) / scale,
            "threshold": 1e-10,
        }
    sectors = sector_decompose(h, sites)
    spectrum = sector_spectrum(sectors)
    energies = spectrum.eigenvalues.real
    labels = spectrum.sectors
    summary["sectors"] = [{"sz": s.sz, "dimension": s.dim} for s in sectors]
    summary["trace_checks"] = {
        "sum_of_eigenvalues": float(np.sum(energies)),
        "trace_of_h": float(np.trace(h).real),
        "sum_of_squares": float(np.sum(energies ** 2)),
        "trace_of_h_squared": float(np.trace(h @ h).real),
    }
    csv_path = _write_text(os.path.join(out_dir, "spectrum.csv"),
                           _spectrum_rows(energies, labels))
    json_path = _write_json(os.path.join(out_dir, "spectrum.json"), summary)
    print(f"wrote {csv_path} ({sites.dim} levels, {len(sectors)} sectors)")
    print(f"wrote {json_path}")
    if figures:
        from .figures import render_spectrum

        print(f"wrote {render_spectrum(energies, labels, os.path.join(out_dir, 'spectrum.png'))}")
    return 0


# ---------------------------------------------------------------------------
# bethe
# ---------------------------------------------------------------------------


def _solution_record(report: bt.EigenpairReport, rs: bt.BetheRootSet):
    rec = {
        "roots": [[v.real, v.imag] for v in report.roots],
        "singular": [bool(f) for f in report.singular],
        "bae_residual": report.bae_residual,
        "division_remainder": report.division_remainder,
        "on_shell": report.on_shell,
        "converged": rs.converged,
        "isolated": rs.isolated,
        "vector_norm": report.vector_norm,
        "null_vector": report.null_vector,
        "sector": report.sector,
        "energy": report.energy,
        "oracle_energy": report.oracle_energy,
        "oracle_gap": report.oracle_gap,
        "eigenpair_residual_max": (max(r for _, r in report.eigen_residuals)
                                   if report.eigen_residuals else None),
        "notes": list(report.notes),
    }
    if not rs.isolated:
        rec["notes"].append(
            "representative of a continuous solution family (singular Jacobian)"
        )
    return rec


def cmd_bethe(run: RunConfig, out_dir, figures, nmax=None) -> int:
    spec = run.spec
    spec.ensure_valid()
    max_n = int(round(2 * (spec.sites.weight_a + spec.sites.weight_b)))
    requested = max_n if nmax is None else nmax
    warnings = []
    for n in range(max_n + 1, requested + 1):
        warnings.append(f"empty sector: N = {n} exceeds 2(M_a + M_b) = {max_n}")
    h = build_hamiltonian(couplings_from_spec(spec), spec.sites)
    oracle = sector_spectrum(sector_decompose(h, spec.sites))
    oracle_e, oracle_sz = oracle.eigenvalues.real, oracle.sectors

    sector_reports = []
    computed_e, computed_sz = [], []
    all_ok = True
    root_sets = []
    for n in range(min(requested, max_n) + 1):
        solutions = bt.solve_bae(n, spec, config=run.solver)
        records = []
        for rs in solutions:
            rep = bt.verify_eigenpair(rs.roots, spec, oracle_energies=oracle_e,
                                      oracle_sectors=oracle_sz)
            records.append(_solution_record(rep, rs))
            root_sets.append(rs)
            if rep.on_shell and not rep.null_vector and rs.isolated:
                if rep.energy is not None:
                    computed_e.append(rep.energy)
                    computed_sz.append(rep.sector)
                bad_pair = (rep.eigen_residuals
                            and max(r for _, r in rep.eigen_residuals) > EIGENPAIR_TOL)
                bad_gap = rep.oracle_gap is None or rep.oracle_gap > MATCH_TOL
                if bad_pair or bad_gap:
                    all_ok = False
        sector_reports.append({"n_roots": n, "solutions": records,
                               "solution_count": len(records)})
    match = match_spectra(np.asarray(computed_e), np.asarray(computed_sz),
                          oracle_e, oracle_sz, tolerance=MATCH_TOL)
    report = {
        "sectors": sector_reports,
        "warnings": warnings,
        "thresholds": {"match": MATCH_TOL, "eigenpair": EIGENPAIR_TOL,
                       "completeness": COMPLETENESS_TOL},
        "match": {
            "matched": [[s, c, o, g] for s, c, o, g in match.matched],
            "unmatched_computed": [[s, c] for s, c in match.unmatched_computed],
            "unmatched_oracle": [[s, e] for s, e in match.unmatched_oracle],
            "max_gap": match.max_gap,
        },
        "spec": _spec_dict(spec),
    }
    if match.unmatched_computed:
        all_ok = False
    if bt.su2_symmetric(spec):
        try:
            levels = bt.bethe_multiplet_levels(spec, config=run.solver)
            exp_e, exp_sz = bt.expand_multiplets(levels)
            cmatch = match_spectra(exp_e, exp_sz, oracle_e, oracle_sz,
                                   tolerance=COMPLETENESS_TOL)
            report["completeness"] = {
                "multiplets": len(levels),
                "expanded_levels": len(exp_e),
                "oracle_levels": len(oracle_e),
                "unmatched_oracle_count": len(cmatch.unmatched_oracle),
                "unmatched_computed_count": len(cmatch.unmatched_computed),
                "max_gap": cmatch.max_gap,
                "complete": cmatch.complete,
            }
            if not cmatch.complete:
                all_ok = False
        except SpinClusterError as exc:
            report["completeness"] = {"error": str(exc), "complete": False}
            all_ok = False
    path = _write_json(os.path.join(out_dir, "bethe.json"), report)
    for w in warnings:
        print(f"warning: {w}")
    total = sum(r["solution_count"] for r in sector_reports)
    print(f"wrote {path} ({total} root sets, max match gap "
          f"{format(match.max_gap, '.3e') if match.matched else 'n/a'})")
    if figures:
        from .figures import render_roots

        print(f"wrote {render_roots(root_sets, spec.eta, os.path.join(out_dir, 'roots.png'))}")
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# graph / fit
# ---------------------------------------------------------------------------


def cmd_graph(run: RunConfig, out_dir, figures) -> int:
    coup = couplings_from_spec(run.spec)
    graph = interaction_graph(coup)
    path = _write_text(os.path.join(out_dir, "graph.dot"), to_dot(graph))
    print(f"wrote {path} ({graph.n + graph.m} vertices, {len(graph.edges)} edges)")
    if figures:
        from .figures import render_graph

        print(f"wrote {render_graph(graph, os.path.join(out_dir, 'graph.png'))}")
    return 0


def cmd_fit(run: RunConfig, out_dir, from_couplings=None) -> int:
    sites = run.spec.sites
    if from_couplings is not None:
        coup = _load_couplings(from_couplings)
        if coup.n != sites.n or coup.m != sites.m:
            raise ConfigError(
                f"couplings are for {coup.n}+{coup.m} sites, config has "
                f"{sites.n}+{sites.m}"
            )
        source = str(from_couplings)
    else:
        coup = couplings_from_spec(run.spec)
        source = "config model (round trip)"
    fit = fit_parameters(coup, sites)
    report = {
        "source": source,
        "feasible": fit.feasible,
        "violations": list(fit.violations),
        "max_relative_error": fit.max_relative_error,
        "parameters": _spec_dict(fit.spec) if fit.feasible else None,
    }
    path = _write_json(os.path.join(out_dir, "fit.json"), report)
    print(f"wrote {path} (feasible: {fit.feasible})")
    for v in fit.violations:
        print(f"  violation: {v}")
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _add_common(sub):
    sub.add_argument("--config", required=True, help="TOML run configuration")
    sub.add_argument("--out", default=None, help="output directory (default: config)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spincluster",
        description="Construct, certify and solve the two-species spin-cluster model.",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for name in ("verify", "spectrum", "bethe", "graph", "fit"):
        sub = subs.add_parser(name)
        _add_common(sub)
        if name == "bethe":
            sub.add_argument("--nmax", type=int, default=None,
                             help="highest rapidity count (default: 2(M_a+M_b))")
        if name in ("fit", "spectrum"):
            sub.add_argument("--from-couplings", default=None,
                             help="JSON file with coupling arrays")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        run = load_config(args.config)
        out_dir = args.out if args.out is not None else run.out_dir
        os.makedirs(out_dir, exist_ok=True)
        if args.command == "verify":
            return cmd_verify(run, out_dir, run.figures)
        if args.command == "spectrum":
            return cmd_spectrum(run, out_dir, run.figures,
                                from_couplings=args.from_couplings)
        if args.command == "bethe":
            return cmd_bethe(run, out_dir, run.figures, nmax=args.nmax)
        if args.command == "graph":
            return cmd_graph(run, out_dir, run.figures)
        return cmd_fit(run, out_dir, from_couplings=args.from_couplings)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SpinClusterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
