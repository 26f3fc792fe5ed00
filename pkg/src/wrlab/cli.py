"""Batch command-line front end.

Subcommands: thresholds | classify | sweep | spectrum | evolve | check |
eigenfunction | proj-rank.  Every command is deterministic given a config;
JSON documents carry a schema_version field and sorted keys, CSV is the
delimited contract, and --format svg renders a static matplotlib figure
next to the delimited output.

Exit codes: 0 success, 1 usage or config error, 2 numerical failure,
3 internal inconsistency (independent routes disagree).
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import os
import sys

import numpy as np

from . import exact1d
from .assembly import CoefficientSet
from .config import RunConfig, initial_state_from_spec, load_config
from .errors import (
    CoefficientError,
    ConfigurationError,
    ConsistencyError,
    DimensionError,
    DomainError,
    PreconditionError,
    WrlabError,
)
from .orderchecks import certify_markov
from .semigroup import (
    asymptotic_classify,
    empirical_eventual_positivity,
    empirical_positivity,
    evolve,
    expm,
)
from .spectral import (
    eventual_positivity_spectral,
    spectral_projection_contour,
    spectrum,
)

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_INCONSISTENT = 3


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------

@contextlib.contextmanager
def _open_out(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _json_default(value):
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def _emit_json(doc, path):
    doc = dict(doc)
    doc.setdefault("schema_version", SCHEMA_VERSION)
    with _open_out(path) as fh:
        json.dump(doc, fh, sort_keys=True, indent=2, default=_json_default)
        fh.write("\n")


def _emit_csv(header, rows, path):
    with _open_out(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _figure_path(out, command):
    if out is None:
        return f"wrlab-{command}.svg"
    root, ext = os.path.splitext(str(out))
    return str(out) if ext == ".svg" else root + ".svg"


def _data_path(out):
    # with --format svg the figure may claim the --out path itself
    if out is None or str(out).endswith(".svg"):
        return None
    return out


# ---------------------------------------------------------------------------
# config resolution
# ---------------------------------------------------------------------------

def _effective_config(args) -> RunConfig:
    """Config file plus flag overrides, or the --tau/--n shortcut.

    Without --config, --tau builds the boundary-rotation preset
    "example-8.1" at that coupling strength; omitting --tau gives the
    uncoupled configuration.
    """
    if getattr(args, "config", None):
        source = sys.stdin if args.config == "-" else args.config
        cfg = load_config(source)
        if getattr(args, "n", None):
            cfg.n = int(args.n)
        tau = getattr(args, "tau", None)
        if tau is not None:
            cfg.params["tau"] = float(tau)
            desc = cfg.coupling_descriptor
            if desc.get("kind") == "preset" and desc.get("name") == "example-8.1":
                desc["tau"] = float(tau)
    else:
        tau = getattr(args, "tau", None)
        if tau is not None:
            coupling = {"kind": "preset", "name": "example-8.1", "tau": float(tau)}
        else:
            coupling = {"kind": "zero"}
        cfg = RunConfig(
            n=int(args.n) if getattr(args, "n", None) else 200,
            coefficients=CoefficientSet(),
            coupling_descriptor=coupling,
            params={} if tau is None else {"tau": float(tau)},
        )
    for name in ("t_final", "samples", "tol"):
        value = getattr(args, name, None)
        if value is not None:
            cfg.params[name] = value
    return cfg


def _require_format(args, allowed):
    fmt = args.format or allowed[0]
    if fmt not in allowed:
        raise ConfigurationError(
            f"--format {fmt} is not supported here (allowed: {', '.join(allowed)})"
        )
    return fmt


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_thresholds(args) -> int:
    _require_format(args, ("json",))
    ts = exact1d.compute_thresholds()
    chain_ok = 0.0 < ts.tau_p < ts.tau_s < ts.tau_star
    doc = ts.to_dict()
    doc["ordering_chain"] = "ok" if chain_ok else "violated"
    doc["defining_equations"] = {
        "mu_p": "cot(mu) = mu on (0, pi)",
        "tau_p": "tau_p = mu_p / sin(mu_p) = sqrt(mu_p^2 + mu_p^4)",
        "mu_s": "d/dmu [mu^2 (2 mu cot(mu) + 1 - mu^2)] = 0 on (mu_p, pi)",
        "tau_s": "tau_s = mu_s sqrt(2 mu_s cot(mu_s) + 1 - mu_s^2)",
        "lambda2_0": "2 mu cos(mu) = (mu^2 - 1) sin(mu), lambda = -mu^2, mu in (pi/2, pi)",
        "lambda3_0": "2 mu cos(mu) = (mu^2 - 1) sin(mu), lambda = -mu^2, mu in (pi, 2 pi)",
        "tau_star": "tau_star = (lambda2_0 - lambda3_0) / 2",
    }
    _emit_json(doc, args.out)
    return EXIT_OK


def cmd_classify(args) -> int:
    _require_format(args, ("json",))
    if args.tau is None:
        raise ConfigurationError("classify needs --tau")
    result = exact1d.classify(float(args.tau))
    _emit_json(result.to_dict(), args.out)
    return EXIT_OK


def _classification_row(tau):
    result = exact1d.classify(tau)
    lead = list(result.leading_eigenvalues) + [complex(np.nan, np.nan)] * 2
    l1, l2 = lead[0], lead[1]
    return {
        "tau": tau,
        "regime": result.regime.name,
        "re1": float(l1.real), "im1": float(l1.imag),
        "re2": float(l2.real), "im2": float(l2.imag),
    }


def cmd_sweep(args) -> int:
    fmt = _require_format(args, ("csv", "json", "svg"))
    if args.steps < 2:
        raise ConfigurationError(f"sweep needs steps >= 2, got {args.steps}")
    taus = np.linspace(float(args.tau_min), float(args.tau_max), int(args.steps))
    rows = [_classification_row(float(t)) for t in taus]

    # diagnostic only: observed monotone decay of lambda_1 on the real window
    ts = exact1d.compute_thresholds()
    window = [r for r in rows if 0.0 <= r["tau"] < ts.tau_s]
    re1 = [r["re1"] for r in window]
    monotone = bool(all(x > y for x, y in zip(re1, re1[1:]))) if len(re1) > 1 else None

    header = ["tau", "regime", "re1", "im1", "re2", "im2"]
    table = [[r[k] for k in header] for r in rows]
    if fmt == "json":
        _emit_json({"rows": rows,
                    "diagnostics": {"lambda1_monotone_decreasing": monotone}},
                   args.out)
        return EXIT_OK
    _emit_csv(header, table, _data_path(args.out))
    if monotone is not None:
        print(f"# diagnostic: lambda1 monotone decreasing on [0, tau_s): {monotone}",
              file=sys.stderr)
    if fmt == "svg":
        from .plots import save_sweep_figure
        path = save_sweep_figure(rows, _figure_path(args.out, "sweep"),
                                 thresholds=ts)
        print(f"# figure: {path}", file=sys.stderr)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    fmt = _require_format(args, ("json", "csv", "svg"))
    cfg = _effective_config(args)
    gen = cfg.build()
    count = int(cfg.params.get("count", 8))
    rep = spectrum(gen, count=count)
    if fmt == "json":
        _emit_json(rep.to_dict(), args.out)
        return EXIT_OK
    header = ["index", "re", "im"]
    rows = [[i, float(z.real), float(z.imag)]
            for i, z in enumerate(rep.eigenvalues)]
    _emit_csv(header, rows, _data_path(args.out))
    if fmt == "svg":
        from .plots import save_spectrum_figure
        path = save_spectrum_figure(rep.eigenvalues,
                                    _figure_path(args.out, "spectrum"))
        print(f"# figure: {path}", file=sys.stderr)
    return EXIT_OK


def cmd_evolve(args) -> int:
    fmt = _require_format(args, ("csv", "json", "svg"))
    cfg = _effective_config(args)
    gen = cfg.build()
    u0 = initial_state_from_spec(cfg.params.get("u0"), cfg.grid())
    t_final = float(cfg.params.get("t_final", 5.0))
    samples = int(cfg.params.get("samples", 64))
    method = str(cfg.params.get("method", "pade"))

    rescale = cfg.params.get("rescale")
    if rescale is True:
        rescale = spectrum(gen).spectral_bound
    elif rescale is not None:
        rescale = float(rescale)

    trace = evolve(gen, u0, t_final, samples, method=method, rescale=rescale)
    if fmt == "json":
        doc = trace.summary()
        doc["rescale"] = rescale
        _emit_json(doc, args.out)
        return EXIT_OK
    rows = iter(trace.csv_rows())
    header = next(rows)
    _emit_csv(header, rows, _data_path(args.out))
    if fmt == "svg":
        from .plots import save_evolution_figure
        path = save_evolution_figure(trace, _figure_path(args.out, "evolve"))
        print(f"# figure: {path}", file=sys.stderr)
    return EXIT_OK


def cmd_check(args) -> int:
    _require_format(args, ("json",))
    cfg = _effective_config(args)
    gen = cfg.build()
    tol = float(cfg.params.get("tol", 1e-8))

    cert = certify_markov(gen.coeffs, gen.coupling, gen.grid)
    probe = empirical_positivity(gen, times=(0.01, 0.1, 1.0), tol=max(tol, 1e-10))

    rep = spectrum(gen)
    verdict = eventual_positivity_spectral(gen, report=rep)
    empirical = empirical_eventual_positivity(gen, report=rep)

    ones = np.ones(gen.size)
    E1 = expm(gen.G, 1.0)
    conservation_residual = float(np.abs(E1 @ ones - ones).max())
    sub_markov_excess = float((E1 @ ones - ones).max())

    kernel_dimension = int(np.sum(np.abs(rep.all_eigenvalues) <= 1e-6))

    try:
        asymptotic = asymptotic_classify(gen, report=rep).to_dict()
    except WrlabError as exc:
        asymptotic = None
        asymptotic_note = str(exc)
    else:
        asymptotic_note = None

    # agreement semantics: the block certificate is sufficient-only, so a
    # false certificate with a positive probe is not an inconsistency; a
    # decisive spectral verdict must match the empirical tail.
    inconsistencies = []
    if cert.positive and not probe.holds:
        inconsistencies.append("certified positive but propagator has negative entries")
    if cert.markov and conservation_residual > max(tol, 1e-8):
        inconsistencies.append(
            f"certified conservative but exp(G) drifts by {conservation_residual:.3e}")
    if cert.sub_markov and sub_markov_excess > max(tol, 1e-8):
        inconsistencies.append(
            f"certified sub-conservative but exp(G)1 exceeds 1 by {sub_markov_excess:.3e}")
    decisive_negative = verdict.reason.name in (
        "EigvecSignChanging", "ComplexDominantPair")
    eventual_agreement = None
    if verdict.holds or decisive_negative:
        eventual_agreement = bool(verdict.holds == empirical.holds_up_to_horizon)
        if not eventual_agreement:
            inconsistencies.append(
                f"spectral eventual-positivity verdict {verdict.holds} "
                f"({verdict.reason.name}) but empirical probe says "
                f"{empirical.holds_up_to_horizon}")

    doc = {
        "positive": bool(cert.positive and probe.holds),
        "markov": bool(cert.markov),
        "sub_markov": bool(cert.sub_markov),
        "eventual": bool(empirical.holds_up_to_horizon),
        "kernel_dimension": kernel_dimension,
        "asymptotic": None if asymptotic is None else asymptotic["kind"],
        "order": {
            "algebraic": cert.to_dict(),
            "empirical": {
                "positivity_holds": bool(probe.holds),
                "first_violation": probe.first_violation,
                "conservation_residual_t1": conservation_residual,
                "sub_markov_excess_t1": sub_markov_excess,
            },
            "agreement": bool(not (cert.positive and not probe.holds)),
        },
        "spectrum": rep.to_dict(),
        "eventual_positivity": {
            "algebraic": verdict.to_dict(),
            "empirical": empirical.to_dict(),
            "agreement": eventual_agreement,
        },
        "asymptotic_detail": asymptotic,
        "asymptotic_note": asymptotic_note,
        "inconsistencies": inconsistencies,
    }
    _emit_json(doc, args.out)
    return EXIT_INCONSISTENT if inconsistencies else EXIT_OK


def cmd_eigenfunction(args) -> int:
    fmt = _require_format(args, ("csv", "json", "svg"))
    if args.tau is None:
        raise ConfigurationError("eigenfunction needs --tau")
    tau = float(args.tau)
    mode = int(args.mode)
    roots = exact1d.real_eigenvalues(tau)
    if mode >= len(roots):
        raise ConfigurationError(
            f"mode {mode} out of range: {len(roots)} real eigenvalues at tau={tau}")
    root = roots[mode]
    sample = exact1d.eigenfunction(tau, root.mu, samples=int(args.samples or 401))

    if fmt == "json":
        doc = {
            "tau": tau, "mu": root.mu, "lambda": root.lam, "mode": mode,
            "zero": sample.zero, "zero_kind": sample.zero_kind,
            "x": [float(v) for v in sample.x],
            "values": [float(v) for v in sample.values],
        }
        _emit_json(doc, args.out)
        return EXIT_OK
    rows = [[float(x), float(v)] for x, v in zip(sample.x, sample.values)]
    _emit_csv(["x", "value"], rows, _data_path(args.out))
    if fmt == "svg":
        from .plots import save_eigenfunction_figure
        path = save_eigenfunction_figure(
            sample, _figure_path(args.out, "eigenfunction"))
        print(f"# figure: {path}", file=sys.stderr)
    return EXIT_OK


def cmd_proj_rank(args) -> int:
    _require_format(args, ("json",))
    cfg = _effective_config(args)
    gen = cfg.build()
    box = cfg.params.get("box")
    box = tuple(float(v) for v in box) if box else exact1d.analysis_box()
    quad_points = int(cfg.params.get("quad_points", 64))

    rep = spectrum(gen)
    result = spectral_projection_contour(gen, box, quad_points=quad_points,
                                         report=rep)
    analytic_count = None
    desc = cfg.coupling_descriptor
    if desc.get("kind") == "preset" and desc.get("name") == "example-8.1":
        analytic_count = exact1d.count_zeros_in_box(float(desc["tau"]), box)

    consistent = result.consistent and (
        analytic_count is None or analytic_count == result.rank)
    doc = {
        "box": list(result.box),
        "rank": result.rank,
        "eigenvalue_count_inside": result.count_inside,
        "argument_principle_count": analytic_count,
        "idempotency_residual": result.idempotency_residual,
        "quad_points": result.quad_points,
        "consistent": bool(consistent),
    }
    _emit_json(doc, args.out)
    return EXIT_OK if consistent else EXIT_INCONSISTENT


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="wrlab",
        description="Numerical laboratory for second-order operators on (0,1) "
                    "with non-local dynamic boundary coupling.",
    )
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    def add(name, func, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", metavar="PATH",
                        help="JSON run configuration ('-' for stdin)")
        sp.add_argument("--tau", type=float, help="coupling strength")
        sp.add_argument("--n", type=int, help="number of cells")
        sp.add_argument("--t-final", dest="t_final", type=float,
                        help="final time for evolution")
        sp.add_argument("--samples", type=int, help="number of samples")
        sp.add_argument("--out", metavar="PATH", help="output file (default stdout)")
        sp.add_argument("--format", choices=("json", "csv", "svg"),
                        help="output format (svg renders a figure next to the data)")
        sp.add_argument("--tol", type=float, help="tolerance override")
        sp.set_defaults(func=func)
        return sp

    add("thresholds", cmd_thresholds,
        "analytic threshold constants with residuals")
    add("classify", cmd_classify,
        "analytic regime classification at one coupling strength")
    sp = add("sweep", cmd_sweep, "regime sweep over a coupling range")
    sp.add_argument("--tau-min", dest="tau_min", type=float, default=0.0)
    sp.add_argument("--tau-max", dest="tau_max", type=float, default=5.5)
    sp.add_argument("--steps", type=int, default=111)
    add("spectrum", cmd_spectrum, "leading discrete eigenvalues")
    add("evolve", cmd_evolve, "sampled trajectory with trace statistics")
    add("check", cmd_check,
        "certification report: algebraic vs empirical, with agreement flags")
    sp = add("eigenfunction", cmd_eigenfunction,
             "analytic eigenfunction profile and zero location")
    sp.add_argument("--mode", type=int, default=0,
                    help="index into the real eigenvalue list (0 = leading)")
    add("proj-rank", cmd_proj_rank,
        "contour projection rank vs eigenvalue and argument-principle counts")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, CoefficientError, DimensionError,
            DomainError, PreconditionError) as exc:
        print(f"wrlab: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConsistencyError as exc:
        print(f"wrlab: inconsistency: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except WrlabError as exc:
        print(f"wrlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
