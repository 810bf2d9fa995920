"""TOML run configuration.

Schema (sections [model], [solver], [verify], [output]; only [model] is
required):

    [model]
    spins_a = ["1/2", "1/2"]   # rational strings avoid float ambiguity
    spins_b = ["1"]
    gamma_a = 1.0              # scalars default to the isotropic values
    rho_a = 1.0
    gamma_b = 1.0
    rho_b = 1.0
    eta = 1.0
    omega_a = 0.0
    omega_b = 0.0
    xi0 = 1.0
    xi1 = 0.0
    dimension_cap = 16384
    # alpha_a / beta_a / alpha_b / beta_b: optional per-site arrays; give
    # all four or none (the default is alpha = beta = sqrt(gamma*rho)).

    [solver]
    max_iterations = 200
    max_halvings = 30
    divergence_radius = 1e6
    residual_tol = 1e-10
    dedup_tol = 1e-7
    grid_re = 9
    grid_im = 5
    max_seeds = 2000
    use_lattice_seeds = true
    use_polynomial_seeds = true
    seeds = [[[0.5, 0.0], [-0.5, 0.0]]]   # optional extra Newton seeds,
                                          # one [re, im] pair per rapidity

    [verify]
    samples = 50
    seed = 12345
    radius = 10.0

    [output]
    directory = "out"
    figures = true

Malformed files raise ConfigError (a usage error); a dimension over the
cap raises DimensionCapError (a capacity error) so callers can map the
two to different exit codes.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from fractions import Fraction

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .bethe import SolverConfig
from .core import ModelSpec
from .errors import ConfigError, ConstraintError, InvalidSpinError
from .spins import DEFAULT_DIMENSION_CAP, SiteList

_MODEL_KEYS = {
    "spins_a", "spins_b", "gamma_a", "rho_a", "gamma_b", "rho_b", "eta",
    "omega_a", "omega_b", "xi0", "xi1", "dimension_cap",
    "alpha_a", "beta_a", "alpha_b", "beta_b",
}
_SOLVER_KEYS = {
    "max_iterations", "max_halvings", "divergence_radius", "residual_tol",
    "dedup_tol", "grid_re", "grid_im", "max_seeds", "use_lattice_seeds",
    "use_polynomial_seeds", "seeds",
}
_VERIFY_KEYS = {"samples", "seed", "radius"}
_OUTPUT_KEYS = {"directory", "figures"}


@dataclass
class RunConfig:
    """Everything a command needs: the model, solver knobs, verify knobs, output."""

    spec: ModelSpec
    solver: SolverConfig
    verify_samples: int
    verify_seed: int
    verify_radius: float
    out_dir: str
    figures: bool


def _check_keys(table, allowed, section):
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(unknown)}")


def _number(table, key, default, section):
    value = table.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"[{section}] {key} must be a number")
    return float(value)


def _integer(table, key, default, section):
    value = table.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"[{section}] {key} must be an integer")
    return value


def _boolean(table, key, default, section):
    value = table.get(key, default)
    if not isinstance(value, bool):
        raise ConfigError(f"[{section}] {key} must be true or false")
    return value


def _spin_values(raw, key):
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"[model] {key} must be a non-empty list")
    values = []
    for item in raw:
        if isinstance(item, str):
            try:
                values.append(float(Fraction(item)))
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"[model] {key}: bad rational {item!r}") from exc
        elif isinstance(item, (int, float)) and not isinstance(item, bool):
            values.append(float(item))
        else:
            raise ConfigError(f"[model] {key}: entries must be rationals like \"1/2\"")
    return tuple(values)


def _coefficient_array(table, key, length):
    raw = table[key]
    if (not isinstance(raw, list) or len(raw) != length
            or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in raw)):
        raise ConfigError(f"[model] {key} must be a list of {length} numbers")
    return tuple(float(x) for x in raw)


def _build_spec(model):
    _check_keys(model, _MODEL_KEYS, "model")
    for key in ("spins_a", "spins_b"):
        if key not in model:
            raise ConfigError(f"[model] missing required key {key}")
    spins_a = _spin_values(model["spins_a"], "spins_a")
    spins_b = _spin_values(model["spins_b"], "spins_b")
    cap = _integer(model, "dimension_cap", DEFAULT_DIMENSION_CAP, "model")
    try:
        sites = SiteList(spins_a=spins_a, spins_b=spins_b, dimension_cap=cap)
    except InvalidSpinError as exc:
        raise ConfigError(f"[model] {exc}") from exc
    scalars = {
        key: _number(model, key, default, "model")
        for key, default in (
            ("gamma_a", 1.0), ("rho_a", 1.0), ("gamma_b", 1.0), ("rho_b", 1.0),
            ("eta", 1.0), ("omega_a", 0.0), ("omega_b", 0.0),
            ("xi0", 1.0), ("xi1", 0.0),
        )
    }
    weight_keys = [k for k in ("alpha_a", "beta_a", "alpha_b", "beta_b") if k in model]
    if not weight_keys:
        try:
            return ModelSpec.with_default_coefficients(sites, **scalars)
        except ConstraintError as exc:
            raise ConfigError(
                f"[model] {exc}; give alpha/beta arrays explicitly instead"
            ) from exc
    if len(weight_keys) != 4:
        raise ConfigError(
            "[model] give all of alpha_a, beta_a, alpha_b, beta_b or none"
        )
    return ModelSpec(
        sites=sites,
        alpha_a=_coefficient_array(model, "alpha_a", sites.n),
        beta_a=_coefficient_array(model, "beta_a", sites.n),
        alpha_b=_coefficient_array(model, "alpha_b", sites.m),
        beta_b=_coefficient_array(model, "beta_b", sites.m),
        **scalars,
    )


def _build_solver(table):
    _check_keys(table, _SOLVER_KEYS, "solver")
    config = SolverConfig(
        max_iterations=_integer(table, "max_iterations", 200, "solver"),
        max_halvings=_integer(table, "max_halvings", 30, "solver"),
        divergence_radius=_number(table, "divergence_radius", 1e6, "solver"),
        residual_tol=_number(table, "residual_tol", 1e-10, "solver"),
        dedup_tol=_number(table, "dedup_tol", 1e-7, "solver"),
        grid_re=_integer(table, "grid_re", 9, "solver"),
        grid_im=_integer(table, "grid_im", 5, "solver"),
        max_seeds=_integer(table, "max_seeds", 2000, "solver"),
        use_lattice_seeds=_boolean(table, "use_lattice_seeds", True, "solver"),
        use_polynomial_seeds=_boolean(table, "use_polynomial_seeds", True, "solver"),
    )
    if config.residual_tol <= 0 or config.dedup_tol <= 0 or config.divergence_radius <= 0:
        raise ConfigError("[solver] tolerances must be positive")
    if min(config.max_iterations, config.max_halvings, config.grid_re,
           config.grid_im, config.max_seeds) < 1:
        raise ConfigError("[solver] iteration and grid counts must be >= 1")
    for seed in table.get("seeds", []):
        try:
            config.extra_seeds.append([complex(p[0], p[1]) for p in seed])
        except (TypeError, IndexError) as exc:
            raise ConfigError(
                "[solver] seeds must be lists of [re, im] pairs, one per rapidity"
            ) from exc
    return config


def load_config(path) -> RunConfig:
    """Parse and validate a TOML run configuration."""
    try:
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config {path} is not valid TOML: {exc}") from exc
    _check_keys(data, {"model", "solver", "verify", "output"}, "top level")
    if "model" not in data or not isinstance(data["model"], dict):
        raise ConfigError("config needs a [model] section")
    spec = _build_spec(data["model"])
    solver = _build_solver(data.get("solver", {}))
    verify = data.get("verify", {})
    _check_keys(verify, _VERIFY_KEYS, "verify")
    samples = _integer(verify, "samples", 50, "verify")
    if samples < 1:
        raise ConfigError("[verify] samples must be >= 1")
    radius = _number(verify, "radius", 10.0, "verify")
    if radius <= 0:
        raise ConfigError("[verify] radius must be positive")
    output = data.get("output", {})
    _check_keys(output, _OUTPUT_KEYS, "output")
    directory = output.get("directory", "out")
    if not isinstance(directory, str):
        raise ConfigError("[output] directory must be a string")
    return RunConfig(
        spec=spec,
        solver=solver,
        verify_samples=samples,
        verify_seed=_integer(verify, "seed", 12345, "verify"),
        verify_radius=radius,
        out_dir=directory,
        figures=_boolean(output, "figures", True, "output"),
    )
