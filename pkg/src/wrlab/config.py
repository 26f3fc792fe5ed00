"""JSON run configurations: geometry, coefficient forms, coupling, params.

A run configuration is a single JSON document.  Coefficients use a small
closed-form vocabulary so configs stay language-neutral and diffable:

    {"form": "constant", "value": 1.0}
    {"form": "poly", "coefficients": [c0, c1, ...]}      (c0 + c1 x + ...)
    {"form": "trig", "amp": a, "freq": k, "phase": p}    (a sin(k x + p))
    {"form": "table", "x": [...], "values": [...]}       (linear interpolation)

A bare number is accepted as shorthand for a constant.  Unknown keys are
rejected at every level so typos fail loudly instead of silently running a
different problem.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .assembly import (
    CoefficientSet,
    DiscreteGenerator,
    NonlocalCoupling,
    assemble_generator,
    build_kernel_blocks,
)
from .errors import ConfigurationError
from .meshspace import Grid1D

#: keys allowed in the command-parameter section
PARAM_KEYS = {
    "tau", "t_final", "samples", "horizon", "probes", "tol", "count",
    "steps", "tau_min", "tau_max", "u0", "rescale", "method", "box",
    "quad_points", "mode",
}

COEFFICIENT_KEYS = {"a", "b", "c", "c_prime", "eta"}


def _reject_unknown(mapping, allowed, where):
    unknown = set(mapping) - set(allowed)
    if unknown:
        raise ConfigurationError(
            f"unknown keys {sorted(unknown)} in {where}; "
            f"allowed: {sorted(allowed)}"
        )


def coefficient_from_spec(spec, where="coefficient"):
    """Turn a closed-form coefficient spec into a callable (or constant)."""
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return float(spec)
    if not isinstance(spec, dict) or "form" not in spec:
        raise ConfigurationError(
            f"{where}: expected a number or a dict with 'form', got {spec!r}"
        )
    form = spec["form"]
    if form == "constant":
        _reject_unknown(spec, {"form", "value"}, where)
        return float(spec.get("value", 0.0))
    if form == "poly":
        _reject_unknown(spec, {"form", "coefficients"}, where)
        coeffs = [float(v) for v in spec.get("coefficients", [])]
        if not coeffs:
            raise ConfigurationError(f"{where}: poly needs coefficients")
        poly = np.polynomial.Polynomial(coeffs)
        return lambda x: poly(np.asarray(x, dtype=float))
    if form == "trig":
        _reject_unknown(spec, {"form", "amp", "freq", "phase"}, where)
        amp = float(spec.get("amp", 1.0))
        freq = float(spec.get("freq", 1.0))
        phase = float(spec.get("phase", 0.0))
        return lambda x: amp * np.sin(freq * np.asarray(x, dtype=float) + phase)
    if form == "table":
        _reject_unknown(spec, {"form", "x", "values"}, where)
        xs = np.asarray(spec.get("x", ()), dtype=float)
        vals = np.asarray(spec.get("values", ()), dtype=float)
        if xs.ndim != 1 or xs.shape != vals.shape or xs.size < 2:
            raise ConfigurationError(
                f"{where}: table needs matching 1-d 'x' and 'values' (>= 2 points)"
            )
        if np.any(np.diff(xs) <= 0):
            raise ConfigurationError(f"{where}: table abscissae must increase")
        return lambda x: np.interp(np.asarray(x, dtype=float), xs, vals)
    raise ConfigurationError(f"{where}: unknown coefficient form {form!r}")


def coefficients_from_config(section) -> CoefficientSet:
    """Build the bulk coefficient set from the 'coefficients' section."""
    if section is None:
        return CoefficientSet(a=1.0, eta=0.5)
    _reject_unknown(section, COEFFICIENT_KEYS, "coefficients")
    kwargs = {}
    for name in ("a", "b", "c", "c_prime"):
        if name in section:
            kwargs[name] = coefficient_from_spec(section[name], f"coefficients.{name}")
    if not kwargs and "eta" not in section:
        return CoefficientSet(a=1.0, eta=0.5)
    kwargs.setdefault("a", 1.0)
    if "eta" in section:
        kwargs["eta"] = float(section["eta"])
    elif isinstance(kwargs["a"], float):
        kwargs["eta"] = kwargs["a"] / 2.0
    else:
        raise ConfigurationError(
            "coefficients: non-constant diffusion needs an explicit 'eta'"
        )
    return CoefficientSet(**kwargs)


def coupling_from_config(grid: Grid1D, section) -> NonlocalCoupling:
    """Build the coupling from the 'coupling' section.

    The separable/skew profile 'f' may itself be a coefficient spec.
    """
    if section is None:
        section = {"kind": "zero"}
    if not isinstance(section, dict):
        raise ConfigurationError(f"coupling section must be a dict, got {section!r}")
    descriptor = dict(section)
    if isinstance(descriptor.get("f"), dict):
        descriptor["f"] = coefficient_from_spec(descriptor["f"], "coupling.f")
    return build_kernel_blocks(grid, descriptor)


def initial_state_from_spec(spec, grid: Grid1D) -> np.ndarray:
    """Initial datum: "ones", a basis/nodal descriptor, or raw values."""
    if spec is None or spec == "ones":
        return np.ones(grid.size)
    if isinstance(spec, dict):
        kind = spec.get("kind")
        if kind == "ones":
            _reject_unknown(spec, {"kind"}, "u0")
            return np.ones(grid.size)
        if kind == "basis":
            _reject_unknown(spec, {"kind", "index"}, "u0")
            idx = int(spec.get("index", 0))
            if not -grid.size <= idx < grid.size:
                raise ConfigurationError(f"u0: basis index {idx} out of range")
            u = np.zeros(grid.size)
            u[idx] = 1.0
            return u
        if kind == "nodal":
            _reject_unknown(spec, {"kind", "profile"}, "u0")
            fn = coefficient_from_spec(spec.get("profile"), "u0.profile")
            if isinstance(fn, float):
                return np.full(grid.size, fn)
            return np.asarray(fn(grid.nodes), dtype=float)
        raise ConfigurationError(f"u0: unknown kind {kind!r}")
    u = np.asarray(spec, dtype=float)
    if u.shape != (grid.size,):
        raise ConfigurationError(
            f"u0: expected {grid.size} nodal values, got shape {u.shape}"
        )
    return u


@dataclass
class RunConfig:
    """Validated run configuration ready for dispatch."""

    n: int
    coefficients: CoefficientSet
    coupling_descriptor: dict
    params: dict = field(default_factory=dict)

    def grid(self) -> Grid1D:
        return Grid1D(self.n)

    def build(self) -> DiscreteGenerator:
        grid = self.grid()
        coupling = coupling_from_config(grid, self.coupling_descriptor)
        return assemble_generator(grid, self.coefficients, coupling)


def parse_config(document) -> RunConfig:
    """Validate a decoded JSON document into a RunConfig."""
    if not isinstance(document, dict):
        raise ConfigurationError("config document must be a JSON object")
    _reject_unknown(document, {"geometry", "coefficients", "coupling", "params"},
                    "config")
    geometry = document.get("geometry", {})
    _reject_unknown(geometry, {"n"}, "geometry")
    n = int(geometry.get("n", 200))

    coeffs = coefficients_from_config(document.get("coefficients"))
    coupling = document.get("coupling", {"kind": "zero"})
    if not isinstance(coupling, dict):
        raise ConfigurationError("coupling section must be a JSON object")

    params = document.get("params", {})
    _reject_unknown(params, PARAM_KEYS, "params")
    return RunConfig(n=n, coefficients=coeffs,
                     coupling_descriptor=dict(coupling), params=dict(params))


def load_config(path_or_stream) -> RunConfig:
    """Load and validate a JSON config from a path or open stream."""
    try:
        if hasattr(path_or_stream, "read"):
            document = json.load(path_or_stream)
        else:
            with open(path_or_stream, "r", encoding="utf-8") as fh:
                document = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config is not valid JSON: {exc}") from exc
    return parse_config(document)
