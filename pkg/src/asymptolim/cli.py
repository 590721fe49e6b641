"""Command-line frontend.

Subcommands: ``solve`` runs a named problem at one index, ``sweep`` (alias
``probe``) drives the CDF convergence probe across an index list,
``integrate`` evaluates Stieltjes integrals against named CDFs, and
``special`` evaluates the special-function kernel.  Reports are JSON or CSV,
echo the full configuration, and are byte-identical for identical
configurations except for the timestamp field.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, fields
from datetime import datetime, timezone
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__
from .convergence import DEFAULT_GRID, cdf_sequence_probe
from .problems import (
    DivergentResult,
    PolySpec,
    SolveResult,
    arcsin_cdf,
    canonical_uniform_family,
    dirichlet_weak,
    frac_limit_smooth_cdf,
    frac_n_over_i_cdf,
    frac_n_over_i_mean,
    interval_proportion_sin,
    polynomial_family,
    reciprocal_frac_family,
    root_cdf,
    sequence_average,
    sin_sqrt_frac_family,
    sqrt_frac_family,
    uniform_cdf,
)
from .special import (
    digamma,
    frac_limit_cdf,
    frac_limit_cdf_series,
    frac_limit_density,
    harmonic,
    hurwitz_zeta,
    trigamma,
)
from .stieltjes import (
    HyperBox,
    QuadratureError,
    VariationError,
    integrate_by_parts,
    integrate_smooth,
    riemann_stieltjes_oracle,
)

SCHEMA_VERSION = 1
THREADS_ENV = "ASYMPTOLIM_THREADS"

SOLVE_PROBLEMS = ("example1", "example2", "example3", "example4", "dirichlet", "poly")
SWEEP_PROBLEMS = ("canonical-uniform", "example1", "example2", "example3")
SPECIAL_FUNCTIONS = (
    "digamma",
    "trigamma",
    "hurwitz",
    "harmonic",
    "frac-limit-cdf",
    "frac-limit-density",
    "frac-limit-series",
)


class CliError(ValueError):
    """Invalid configuration or arguments (exit code 2)."""


@dataclass(frozen=True)
class RunConfig:
    """Normalized run configuration; echoed verbatim into every report."""

    command: str
    problem: Optional[str] = None
    n: Optional[int] = None
    n_list: Optional[tuple[int, ...]] = None
    grid: Optional[tuple[float, ...]] = None
    f: Optional[str] = None
    lo: Optional[float] = None
    hi: Optional[float] = None
    t: Optional[float] = None
    x: Optional[float] = None
    s: Optional[float] = None
    k_max: Optional[int] = None
    poly_p: Optional[tuple[float, ...]] = None
    poly_r: Optional[int] = None
    poly_b: Optional[float] = None
    phi: Optional[str] = None
    lower: Optional[float] = None
    upper: Optional[float] = None
    method: Optional[str] = None
    levels: Optional[int] = None
    tolerance: float = 1e-9
    output_format: str = "json"
    output_path: Optional[str] = None
    threads: int = 1

    _INT_FIELDS = ("n", "k_max", "poly_r", "levels", "threads")
    _FLOAT_FIELDS = ("lo", "hi", "t", "x", "s", "poly_b", "lower", "upper", "tolerance")
    _INT_TUPLE_FIELDS = ("n_list",)
    _FLOAT_TUPLE_FIELDS = ("grid", "poly_p")

    def to_dict(self) -> dict:
        out: dict = {}
        for fld in fields(self):
            value = getattr(self, fld.name)
            if value is None:
                continue
            out[fld.name] = list(value) if isinstance(value, tuple) else value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        kwargs: dict = {}
        names = {fld.name for fld in fields(cls)}
        for key, value in data.items():
            if key not in names:
                raise CliError(f"unknown config field {key!r}")
            kwargs[key] = cls._coerce(key, value)
        return cls(**kwargs)

    @classmethod
    def _coerce(cls, key: str, value):
        if value is None:
            return None
        if key in cls._INT_FIELDS:
            return int(value)
        if key in cls._FLOAT_FIELDS:
            return float(value)
        if key in cls._INT_TUPLE_FIELDS:
            if isinstance(value, str):
                value = value.split(";")
            return tuple(int(v) for v in value)
        if key in cls._FLOAT_TUPLE_FIELDS:
            if isinstance(value, str):
                value = value.split(";")
            return tuple(float(v) for v in value)
        return str(value)


# ---------------------------------------------------------------------------
# Named callbacks and CDFs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NamedFunction:
    name: str
    fn: Callable
    derivative: Callable


def _const(value: float) -> Callable:
    def g(t):
        if isinstance(t, np.ndarray):
            return np.full_like(t, value, dtype=float)
        return value

    return g


def resolve_function(name: str) -> NamedFunction:
    """Look up a callback by registry name.

    Known names: ``sin``, ``cos``, ``id``, ``const1`` and
    ``poly:c0,c1,...`` (ascending coefficients).
    """
    if name == "sin":
        return NamedFunction("sin", np.sin, np.cos)
    if name == "cos":
        return NamedFunction("cos", np.cos, lambda t: -np.sin(t))
    if name == "id":
        return NamedFunction("id", lambda t: t, _const(1.0))
    if name == "const1":
        return NamedFunction("const1", _const(1.0), _const(0.0))
    if name.startswith("poly:"):
        try:
            coeffs = [float(c) for c in name[len("poly:") :].split(",")]
        except ValueError as exc:
            raise CliError(f"bad polynomial spec {name!r}") from exc
        if not coeffs:
            raise CliError("polynomial needs at least one coefficient")
        c = np.asarray(coeffs, dtype=float)
        dc = c[1:] * np.arange(1, len(c))

        def p(t):
            return np.polynomial.polynomial.polyval(t, c)

        def dp(t):
            if dc.size == 0:
                return _const(0.0)(t)
            return np.polynomial.polynomial.polyval(t, dc)

        return NamedFunction(name, p, dp)
    raise CliError(f"unknown function {name!r}")


def resolve_cdf(name: str):
    if name == "uniform":
        return uniform_cdf()
    if name == "sqrt":
        return root_cdf(2)
    if name.startswith("root:"):
        try:
            return root_cdf(int(name[len("root:") :]))
        except ValueError as exc:
            raise CliError(f"bad root spec {name!r}") from exc
    if name == "frac-limit":
        return frac_limit_smooth_cdf()
    if name == "arcsin":
        return arcsin_cdf()
    raise CliError(f"unknown cdf {name!r}")


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="asymptolim",
        description="Solvers, convergence probes, Stieltjes integrals and "
        "special functions for asymptotic limit problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--tol", type=float, default=1e-9, dest="tolerance")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--output", default=None, help="output file (default stdout)")
        p.add_argument("--threads", type=int, default=None)

    p_solve = sub.add_parser("solve", help="run one problem at a single index")
    p_solve.add_argument("problem", choices=SOLVE_PROBLEMS)
    p_solve.add_argument("--n", type=int, required=True)
    p_solve.add_argument("--f", default=None, help="callback name (sin, cos, id, const1, poly:c0,c1,...)")
    p_solve.add_argument("--lo", type=float, default=None)
    p_solve.add_argument("--hi", type=float, default=None)
    p_solve.add_argument("--t", type=float, default=None)
    p_solve.add_argument("--poly-p", default=None, help="coefficients of P, descending, comma separated")
    p_solve.add_argument("--poly-r", type=int, default=None)
    p_solve.add_argument("--poly-b", type=float, default=None)
    add_common(p_solve)

    p_sweep = sub.add_parser(
        "sweep", aliases=["probe"], help="CDF convergence probe across an index list"
    )
    p_sweep.add_argument("problem", choices=SWEEP_PROBLEMS)
    p_sweep.add_argument("--n", required=True, help="comma-separated increasing indices")
    p_sweep.add_argument("--grid", default=None, help="t1,t2,... or start:stop:step")
    add_common(p_sweep)

    p_int = sub.add_parser("integrate", help="Stieltjes integral of f against a named CDF")
    p_int.add_argument("--f", required=True)
    p_int.add_argument("--phi", required=True, help="uniform, sqrt, root:q, frac-limit, arcsin")
    p_int.add_argument("--lower", type=float, default=None)
    p_int.add_argument("--upper", type=float, default=None)
    p_int.add_argument("--method", choices=("density", "parts", "oracle"), default="density")
    p_int.add_argument("--levels", type=int, default=12)
    add_common(p_int)

    p_special = sub.add_parser("special", help="evaluate a special function")
    p_special.add_argument("problem", choices=SPECIAL_FUNCTIONS)
    p_special.add_argument("--x", type=float, default=None)
    p_special.add_argument("--s", type=float, default=None)
    p_special.add_argument("--t", type=float, default=None)
    p_special.add_argument("--n", type=int, default=None)
    p_special.add_argument("--k-max", type=int, default=None)
    add_common(p_special)

    return parser


def _parse_grid(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        raise CliError("grid must not be empty")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise CliError("grid range must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise CliError("grid range needs stop >= start and step > 0")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + j * step for j in range(count))
    pts = tuple(float(p) for p in text.split(",") if p.strip())
    if not pts:
        raise CliError("grid must not be empty")
    return pts


def _resolve_threads(explicit: Optional[int]) -> int:
    if explicit is None:
        env = os.environ.get(THREADS_ENV)
        if env is None:
            return 1
        try:
            explicit = int(env)
        except ValueError as exc:
            raise CliError(f"{THREADS_ENV} must be an integer") from exc
    if explicit < 1:
        raise CliError("threads must be >= 1")
    return explicit


def config_from_args(args: argparse.Namespace) -> RunConfig:
    command = "sweep" if args.command == "probe" else args.command
    common = dict(
        tolerance=args.tolerance,
        output_format=args.format,
        output_path=args.output,
        threads=_resolve_threads(args.threads),
    )
    if common["tolerance"] <= 0:
        raise CliError("tolerance must be positive")
    if command == "solve":
        poly_p = None
        if args.poly_p is not None:
            try:
                poly_p = tuple(float(c) for c in args.poly_p.split(","))
            except ValueError as exc:
                raise CliError("bad --poly-p coefficient list") from exc
        return RunConfig(
            command="solve",
            problem=args.problem,
            n=args.n,
            f=args.f,
            lo=args.lo,
            hi=args.hi,
            t=args.t,
            poly_p=poly_p,
            poly_r=args.poly_r,
            poly_b=args.poly_b,
            **common,
        )
    if command == "sweep":
        try:
            n_list = tuple(int(v) for v in args.n.split(",") if v.strip())
        except ValueError as exc:
            raise CliError("bad --n index list") from exc
        if not n_list:
            raise CliError("--n must list at least one index")
        grid = _parse_grid(args.grid) if args.grid is not None else None
        return RunConfig(
            command="sweep", problem=args.problem, n_list=n_list, grid=grid, **common
        )
    if command == "integrate":
        return RunConfig(
            command="integrate",
            f=args.f,
            phi=args.phi,
            lower=args.lower,
            upper=args.upper,
            method=args.method,
            levels=args.levels,
            **common,
        )
    if command == "special":
        return RunConfig(
            command="special",
            problem=args.problem,
            x=args.x,
            s=args.s,
            t=args.t,
            n=args.n,
            k_max=args.k_max,
            **common,
        )
    raise CliError(f"unknown command {args.command!r}")


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

def _require(value, flag: str):
    if value is None:
        raise CliError(f"{flag} is required here")
    return value


def _solve_result_dict(res) -> dict:
    if isinstance(res, DivergentResult):
        return {
            "empirical": float(res.empirical),
            "verdict": res.verdict,
            "n": res.n,
            "meta": res.meta,
        }
    return {
        "empirical": float(res.empirical),
        "closed_form": float(res.closed_form),
        "abs_error": float(res.abs_error),
        "n": res.n,
        "meta": res.meta,
    }


def _run_solve(config: RunConfig) -> dict:
    n = _require(config.n, "--n")
    if n < 1:
        raise CliError("--n must be >= 1")
    threads = config.threads
    problem = config.problem
    if problem == "example1":
        named = resolve_function(config.f or "sin")
        res = sequence_average(n, named.fn, threads=threads, tol=config.tolerance)
    elif problem == "example2":
        lo = -0.5 if config.lo is None else config.lo
        hi = 0.5 if config.hi is None else config.hi
        res = interval_proportion_sin(n, lo, hi, threads=threads)
    elif problem == "example3":
        t = 0.5 if config.t is None else config.t
        res = frac_n_over_i_cdf(n, t, threads=threads)
    elif problem == "example4":
        fn = resolve_function(config.f).fn if config.f else None
        res = frac_n_over_i_mean(n, fn, threads=threads, tol=config.tolerance)
    elif problem == "dirichlet":
        res = dirichlet_weak(n, threads=threads)
    elif problem == "poly":
        coeffs = config.poly_p if config.poly_p is not None else (1.0, 0.0, 0.0)
        spec = PolySpec.make(
            coeffs,
            config.poly_r if config.poly_r is not None else len(coeffs) - 1,
            config.poly_b if config.poly_b is not None else 1.0,
            resolve_function(config.f or "id").fn,
        )
        res = polynomial_family(spec, n, threads=threads, tol=config.tolerance)
    else:
        raise CliError(f"unknown solve problem {config.problem!r}")
    return _solve_result_dict(res)


_SWEEP_SETUPS = {
    "canonical-uniform": (canonical_uniform_family, uniform_cdf, (0.0, 1.0)),
    "example1": (sqrt_frac_family, uniform_cdf, (0.0, 1.0)),
    "example2": (sin_sqrt_frac_family, arcsin_cdf, (-1.0, 1.0)),
    "example3": (reciprocal_frac_family, frac_limit_smooth_cdf, (0.0, 1.0)),
}


def _run_sweep(config: RunConfig) -> dict:
    try:
        family_factory, cdf_factory, domain = _SWEEP_SETUPS[config.problem]
    except KeyError:
        raise CliError(f"problem {config.problem!r} does not support sweep") from None
    n_list = _require(config.n_list, "--n")
    if any(n < 1 for n in n_list):
        raise CliError("indices must be >= 1")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise CliError("--n must be strictly increasing")
    if config.grid is None:
        if domain == (0.0, 1.0):
            grid = DEFAULT_GRID
        else:
            grid = tuple(-0.9 + 0.1 * j for j in range(19))
    else:
        grid = config.grid
    if any(not (domain[0] < t < domain[1]) for t in grid):
        raise CliError(f"grid must lie strictly inside {domain}")
    report = cdf_sequence_probe(
        family_factory(), cdf_factory(), grid=grid, n_list=n_list
    )
    return {
        "grid": [float(t) for t in report.grid],
        "n_list": [int(n) for n in report.n_list],
        "cdf_values": [[float(v) for v in row] for row in report.cdf_values],
        "target_values": [float(v) for v in report.target_values],
        "sup_errors": [float(e) for e in report.sup_errors],
        "monotone_decay": [bool(b) for b in report.monotone_decay],
        "excluded": [int(j) for j in report.excluded],
    }


def _run_integrate(config: RunConfig) -> dict:
    named = resolve_function(_require(config.f, "--f"))
    phi = resolve_cdf(_require(config.phi, "--phi"))
    lower = phi.support.lower[0] if config.lower is None else config.lower
    upper = phi.support.upper[0] if config.upper is None else config.upper
    if not (math.isfinite(lower) and math.isfinite(upper) and lower <= upper):
        raise CliError("need finite --lower <= --upper")
    method = config.method or "density"
    if method == "density":
        res = integrate_smooth(
            named.fn, phi, HyperBox(lower, upper), tol=config.tolerance
        )
        return {"value": float(res.value), "error_estimate": float(res.error)}
    if method == "parts":
        res = integrate_by_parts(
            named.fn, named.derivative, phi.value, (lower, upper), tol=config.tolerance
        )
        return {"value": float(res.value), "error_estimate": float(res.error)}
    if method == "oracle":
        sums = riemann_stieltjes_oracle(
            named.fn, phi.value, (lower, upper), levels=config.levels or 12
        )
        return {"levels": [float(s) for s in sums], "value": float(sums[-1])}
    raise CliError(f"unknown method {method!r}")


def _run_special(config: RunConfig) -> dict:
    name = config.problem
    if name == "digamma":
        return {"value": float(digamma(_require(config.x, "--x")))}
    if name == "trigamma":
        return {"value": float(trigamma(_require(config.x, "--x")))}
    if name == "hurwitz":
        return {
            "value": float(
                hurwitz_zeta(_require(config.s, "--s"), _require(config.x, "--x"))
            )
        }
    if name == "harmonic":
        return {"value": float(harmonic(_require(config.n, "--n")))}
    if name == "frac-limit-cdf":
        return {"value": float(frac_limit_cdf(_require(config.t, "--t")))}
    if name == "frac-limit-density":
        return {"value": float(frac_limit_density(_require(config.t, "--t")))}
    if name == "frac-limit-series":
        res = frac_limit_cdf_series(
            _require(config.t, "--t"),
            config.k_max if config.k_max is not None else 80,
        )
        return {
            "value": float(res.value),
            "truncation_bound": float(res.truncation_bound),
        }
    raise CliError(f"unknown special function {name!r}")


def execute(config: RunConfig) -> dict:
    """Run the configured command and assemble the full report."""
    if config.command == "solve":
        result = _run_solve(config)
    elif config.command == "sweep":
        result = _run_sweep(config)
    elif config.command == "integrate":
        result = _run_integrate(config)
    elif config.command == "special":
        result = _run_special(config)
    else:
        raise CliError(f"unknown command {config.command!r}")
    return {
        "schema": SCHEMA_VERSION,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": config.to_dict(),
        "result": result,
    }


# ---------------------------------------------------------------------------
# Report rendering
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, (list, tuple)):
        return ";".join(_fmt(v) for v in value)
    return str(value)


def render_report(report: dict, output_format: str) -> str:
    if output_format == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    if output_format == "csv":
        return _render_csv(report)
    raise CliError(f"unknown output format {output_format!r}")


def _render_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("key", "value"))
    writer.writerow(("schema", _fmt(report["schema"])))
    writer.writerow(("version", report["version"]))
    writer.writerow(("timestamp", report["timestamp"]))
    for key in sorted(report["config"]):
        writer.writerow((f"config.{key}", _fmt(report["config"][key])))
    result = report["result"]
    if report["config"]["command"] == "sweep":
        for key in ("grid", "target_values", "sup_errors", "monotone_decay", "excluded"):
            writer.writerow((f"result.{key}", _fmt(result[key])))
        writer.writerow(())
        writer.writerow(
            ["n"] + [f"phi@{_fmt(t)}" for t in result["grid"]] + ["sup_error"]
        )
        for n, row, sup in zip(
            result["n_list"], result["cdf_values"], result["sup_errors"]
        ):
            writer.writerow([_fmt(n)] + [_fmt(v) for v in row] + [_fmt(sup)])
    else:
        for key in sorted(result):
            writer.writerow((f"result.{key}", _fmt(result[key])))
    return buf.getvalue()


def parse_config_from_report(text: str, output_format: str) -> RunConfig:
    """Recover the echoed RunConfig from a rendered report."""
    if output_format == "json":
        return RunConfig.from_dict(json.loads(text)["config"])
    raw: dict = {}
    for row in csv.reader(io.StringIO(text)):
        if len(row) == 2 and row[0].startswith("config."):
            raw[row[0][len("config.") :]] = row[1]
    return RunConfig.from_dict(raw)


def write_output(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
    except OSError as exc:
        raise CliError(f"cannot write output to {path!r}: {exc}") from exc


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        config = config_from_args(args)
        report = execute(config)
        text = render_report(report, config.output_format)
        write_output(text, config.output_path)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (QuadratureError, VariationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
