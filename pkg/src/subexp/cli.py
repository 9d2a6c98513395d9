"""Command-line front end.

Thin adapter only: every command parses flags, calls the corresponding
library function, and serialises the result.  No numerical logic lives
here, which the test suite enforces by diffing CLI outputs against
direct module calls.

Conventions
-----------
exit codes   0 success, 2 validation error, 3 data error, 4 internal error
errors       one machine-parsable line on stderr:
             {"error": {"code": <int>, "message": "..."}}
outputs      JSON or CSV, always carrying a reproducibility header
             (version, command, seed, config digest); files are written
             atomically (temp file + rename), so failed runs leave no
             partial output
config       --config FILE reads flat key=value lines; explicit flags
             win over file values, environment variables are ignored
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .axioms import run_axiom_suite
from .envelope import ColumnSpec, DataError, EnvelopeConfig, ingest_csv, rolling_local_variance, variance_envelope
from .joint import indicator_approx
from .lln import MeanPolicy, NoiseSpec, SimConfig, SimulationError, empirical_lln, log_schedule, rate_check
from .maximal import GridSpec, MaximalDist, eval_maximal
from .mle import SampleSet, mle_estimate
from .scenarios import BoundedLipschitzFn, EvaluationError, ScenarioFamily, sublinear_expect

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4

COMMANDS = ("verify-axioms", "eval", "lln", "rate", "estimate", "envelope")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


class _Parser(argparse.ArgumentParser):
    """argparse that reports problems through CliError instead of exiting."""

    def error(self, message):  # noqa: A003 - argparse API
        raise CliError(EXIT_VALIDATION, message)


# ---------------------------------------------------------------------------
# test-function registry


def build_fn(spec: str, radius: float) -> BoundedLipschitzFn:
    """Construct a named test function with a Lipschitz constant valid on
    [-radius, radius].

    Grammar: name[:arg1,arg2,...] with names identity, square, abs[:c],
    sin[:w], cos[:w], poly:c0,c1,..., indicator:x_star,k.
    """
    name, _, argstr = spec.partition(":")
    try:
        args = [float(a) for a in argstr.split(",")] if argstr else []
    except ValueError:
        raise CliError(EXIT_VALIDATION, f"bad numeric arguments in function spec {spec!r}")
    R = float(radius)
    if name == "identity":
        return BoundedLipschitzFn(lambda x: float(x), 1.0, bound=R, name=spec)
    if name == "square":
        return BoundedLipschitzFn(lambda x: float(x) * float(x), 2.0 * R, bound=R * R, name=spec)
    if name == "abs":
        c = args[0] if args else 0.0
        return BoundedLipschitzFn(lambda x: abs(float(x) - c), 1.0, bound=R + abs(c), name=spec)
    if name == "sin":
        w = args[0] if args else 1.0
        return BoundedLipschitzFn(lambda x: math.sin(w * float(x)), abs(w), bound=1.0, name=spec)
    if name == "cos":
        w = args[0] if args else 1.0
        return BoundedLipschitzFn(lambda x: math.cos(w * float(x)), abs(w), bound=1.0, name=spec)
    if name == "poly":
        if not args:
            raise CliError(EXIT_VALIDATION, "poly needs coefficients, e.g. poly:0,0,-1")
        coeffs = args
        lip = sum(k * abs(c) * R ** (k - 1) for k, c in enumerate(coeffs) if k >= 1)
        bnd = sum(abs(c) * R**k for k, c in enumerate(coeffs))

        def p(x, coeffs=tuple(coeffs)):
            x = float(x)
            acc = 0.0
            for c in reversed(coeffs):
                acc = acc * x + c
            return acc

        return BoundedLipschitzFn(p, lip, bound=bnd, name=spec)
    if name == "indicator":
        if len(args) != 2:
            raise CliError(EXIT_VALIDATION, "indicator needs x_star and k, e.g. indicator:2,5")
        return indicator_approx(args[0], int(args[1]))
    raise CliError(EXIT_VALIDATION, f"unknown function {name!r} (try identity, square, abs, sin, cos, poly, indicator)")


# ---------------------------------------------------------------------------
# small spec parsers


def _parse_noise(text: str) -> NoiseSpec:
    name, _, argstr = text.partition(":")
    try:
        if name == "none":
            return NoiseSpec.none()
        if name == "uniform":
            return NoiseSpec.uniform(float(argstr))
        if name == "two_point":
            return NoiseSpec.two_point(float(argstr))
    except ValueError as exc:
        raise CliError(EXIT_VALIDATION, f"bad noise spec {text!r}: {exc}")
    raise CliError(EXIT_VALIDATION, f"unknown noise kind {name!r} (none, uniform:a, two_point:a)")


def _parse_policy(text: str) -> MeanPolicy:
    name, _, argstr = text.partition(":")
    if name == "adversarial":
        raise CliError(EXIT_VALIDATION, "adversarial policies take a callback and are library-only")
    try:
        vals = [float(a) for a in argstr.split(",")] if argstr else []
    except ValueError:
        raise CliError(EXIT_VALIDATION, f"bad policy spec {text!r}")
    if name == "constant":
        if len(vals) != 1:
            raise CliError(EXIT_VALIDATION, f"constant policy needs exactly one mean, got {text!r}")
        return MeanPolicy.constant(vals[0])
    if name == "periodic":
        if not vals:
            raise CliError(EXIT_VALIDATION, f"periodic policy needs means, got {text!r}")
        return MeanPolicy.periodic(vals)
    if name == "random":
        if not vals:
            raise CliError(EXIT_VALIDATION, f"random policy needs means, got {text!r}")
        return MeanPolicy.random_choice(vals)
    raise CliError(EXIT_VALIDATION, f"unknown policy kind {name!r} (constant:mu, periodic:a,b, random:a,b)")


def _parse_schedule(text: str) -> list[int]:
    try:
        vals = sorted({int(v) for v in text.split(",")})
    except ValueError:
        raise CliError(EXIT_VALIDATION, f"bad schedule {text!r}, expected comma-separated integers")
    if not vals or vals[0] < 1:
        raise CliError(EXIT_VALIDATION, f"schedule entries must be >= 1, got {text!r}")
    return vals


def _parse_column(text: str | None) -> int | str | None:
    if text is None:
        return None
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        return text


def _column_spec(args) -> ColumnSpec:
    header = {"auto": None, "yes": True, "no": False}[args.header]
    value = _parse_column(args.column)
    return ColumnSpec(
        value=0 if value is None else value,
        timestamp=_parse_column(args.timestamp_column),
        header=header,
    )


# ---------------------------------------------------------------------------
# parser construction


def _add_common(p: _Parser) -> None:
    p.add_argument("--config", help="flat key=value file; explicit flags override it")
    p.add_argument("--seed", type=int, default=0, help="base RNG seed (replication r uses seed+r)")
    p.add_argument("-o", "--output", help="write here instead of stdout (atomic)")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> _Parser:
    parser = _Parser(prog="subexp", description="worst-case expectation toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify-axioms", help="randomized check of the sublinear-expectation axioms")
    p.add_argument("--cases", type=int, default=1000)
    _add_common(p)

    p = sub.add_parser("eval", help="worst-case expectation of a named test function")
    p.add_argument("--mu-lo", type=float)
    p.add_argument("--mu-hi", type=float)
    p.add_argument("--family", help="JSON file: array of {'atoms': [[point, weight], ...]}")
    p.add_argument("--fn", required=True, help="test function, e.g. square or poly:0,0,-1")
    p.add_argument("--step", type=float, help="grid spacing (default 1e-4)")
    p.add_argument("--points", type=int, help="explicit grid node count (instead of --step)")
    p.add_argument("--refine", action=argparse.BooleanOptionalAction, default=False)
    _add_common(p)

    p = sub.add_parser("lln", help="empirical averages against the worst-case target")
    p.add_argument("--mu-lo", type=float, required=True)
    p.add_argument("--mu-hi", type=float, required=True)
    p.add_argument("--fn", required=True)
    p.add_argument("--policy", action="append", default=None, metavar="SPEC",
                   help="repeatable: constant:mu | periodic:a,b | random:a,b")
    p.add_argument("--noise", default="none")
    p.add_argument("--n-max", type=int, default=1000)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--n-schedule", help="comma-separated n values (default log-spaced)")
    p.add_argument("--step", type=float, help="target-evaluation grid spacing (default 1e-4)")
    p.add_argument("--points", type=int)
    _add_common(p)

    p = sub.add_parser("rate", help="convergence-rate check for the squared interval distance")
    p.add_argument("--mu-lo", type=float, required=True)
    p.add_argument("--mu-hi", type=float, required=True)
    p.add_argument("--policy", action="append", default=None, metavar="SPEC")
    p.add_argument("--noise", default="none")
    p.add_argument("--n-max", type=int, default=10000)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--n-schedule", help="comma-separated n values (default log-spaced)")
    _add_common(p)

    p = sub.add_parser("estimate", help="minimax interval estimate from a sample")
    p.add_argument("--input", help="CSV file of observations")
    p.add_argument("--values", help="inline comma-separated observations")
    p.add_argument("--column", help="value column, 0-based index or header name (default 0)")
    p.add_argument("--timestamp-column")
    p.add_argument("--header", choices=("auto", "yes", "no"), default="auto")
    _add_common(p)

    p = sub.add_parser("envelope", help="rolling-window variance envelope")
    p.add_argument("--input", required=True)
    p.add_argument("--window", type=int, required=True, help="window length L (>= 2)")
    p.add_argument("--num-windows", type=int, required=True, help="number of windows K (>= 1)")
    p.add_argument("--demean", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--t-index", type=int, help="reference position (default: end of series)")
    p.add_argument("--column", help="value column, 0-based index or header name (default 0)")
    p.add_argument("--timestamp-column")
    p.add_argument("--header", choices=("auto", "yes", "no"), default="auto")
    _add_common(p)

    return parser


# ---------------------------------------------------------------------------
# config file merging


def _scan_config_path(rest: list[str]) -> str | None:
    for i, tok in enumerate(rest):
        if tok == "--config":
            if i + 1 >= len(rest):
                raise CliError(EXIT_VALIDATION, "--config needs a file path")
            return rest[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _subparser_actions(parser: _Parser, command: str) -> dict[str, argparse.Action]:
    for action in parser._actions:  # noqa: SLF001 - argparse offers no public walk
        if isinstance(action, argparse._SubParsersAction):
            sub = action.choices[command]
            table = {}
            for act in sub._actions:
                for opt in act.option_strings:
                    if opt.startswith("--"):
                        table[opt[2:]] = act
            return table
    raise AssertionError("subparsers not found")


def _config_tokens(path: str, table: dict[str, argparse.Action], user_rest: list[str]) -> list[str]:
    """Turn key=value lines into argv tokens placed before the user's flags.

    argparse keeps the last occurrence for ordinary options, which gives
    explicit flags precedence.  For repeatable options (append), file
    values are dropped entirely whenever the user passed the flag.
    """
    if not os.path.exists(path):
        raise CliError(EXIT_DATA, f"config file does not exist: {path}")
    user_flags = set()
    for tok in user_rest:
        if tok.startswith("--"):
            user_flags.add(tok[2:].split("=", 1)[0])
    tokens: list[str] = []
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise CliError(EXIT_VALIDATION, f"{path}:{ln}: expected key=value, got {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if key in ("config",):
                raise CliError(EXIT_VALIDATION, f"{path}:{ln}: config files cannot nest")
            act = table.get(key)
            if act is None:
                raise CliError(EXIT_VALIDATION, f"{path}:{ln}: unknown config key {key!r}")
            if isinstance(act, argparse.BooleanOptionalAction):
                low = value.lower()
                if low in ("true", "1", "yes"):
                    tokens.append(f"--{key}")
                elif low in ("false", "0", "no"):
                    tokens.append(f"--no-{key}")
                else:
                    raise CliError(EXIT_VALIDATION, f"{path}:{ln}: {key} must be true or false, got {value!r}")
            elif key in user_flags:
                continue  # explicit flag wins outright, including repeatables
            else:
                tokens.extend([f"--{key}", value])
    return tokens


# ---------------------------------------------------------------------------
# output plumbing


def _config_digest(args: argparse.Namespace) -> str:
    cfg = {k: v for k, v in vars(args).items() if k not in ("output", "config")}
    blob = json.dumps(cfg, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".subexp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, meta: dict, payload: dict, csv_table: tuple[list, list[list]] | None) -> None:
    if args.format == "json":
        text = json.dumps({"meta": meta, "result": payload}, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        for key in ("version", "command", "seed", "config_digest"):
            buf.write(f"# {key}={meta[key]}\n")
        writer = csv.writer(buf, lineterminator="\n")
        if csv_table is None:
            raise CliError(EXIT_VALIDATION, f"{meta['command']} has no CSV form; use --format json")
        header, rows = csv_table
        writer.writerow(header)
        writer.writerows(rows)
        text = buf.getvalue()
    if args.output:
        _atomic_write(args.output, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# command handlers: return (payload, csv_table, exit_code)


def _load_family(path: str) -> ScenarioFamily:
    if not os.path.exists(path):
        raise DataError(f"family file does not exist: {path}")
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path} is not valid JSON: {exc}")
    try:
        return ScenarioFamily.from_list(obj)
    except (ValueError, TypeError) as exc:
        raise DataError(f"{path}: {exc}")


def _cmd_verify_axioms(args):
    report = run_axiom_suite(cases=args.cases, seed=args.seed)
    payload = report.to_json_obj()
    rows = [[c.name, repr(c.max_violation), repr(c.tolerance), c.passed] for c in report.checks]
    code = EXIT_OK if report.passed else EXIT_INTERNAL
    return payload, (["check", "max_violation", "tolerance", "pass"], rows), code


def _grid_from_args(args, default_step: float = 1e-4) -> GridSpec:
    step = getattr(args, "step", None)
    points = getattr(args, "points", None)
    refine = bool(getattr(args, "refine", False))
    if step is not None and points is not None:
        raise CliError(EXIT_VALIDATION, "give either --step or --points, not both")
    if points is not None:
        return GridSpec(num=points, refine=refine)
    return GridSpec(step=step if step is not None else default_step, refine=refine)


def _cmd_eval(args):
    if (args.family is None) == (args.mu_lo is None and args.mu_hi is None):
        raise CliError(EXIT_VALIDATION, "give either --family or both --mu-lo and --mu-hi")
    if args.family is not None:
        fam = _load_family(args.family)
        radius = max((abs(p) for p in fam.support()), default=1.0)
        fn = build_fn(args.fn, radius)
        res = sublinear_expect(fam, fn)
        payload = {"value": res.value, "argmax_index": res.argmax_index, "error_bound": 0.0}
        row = [repr(res.value), res.argmax_index, repr(0.0)]
        return payload, (["value", "argmax_index", "error_bound"], [row]), EXIT_OK
    if args.mu_lo is None or args.mu_hi is None:
        raise CliError(EXIT_VALIDATION, "need both --mu-lo and --mu-hi")
    d = MaximalDist(args.mu_lo, args.mu_hi)
    fn = build_fn(args.fn, max(abs(d.mu_lo), abs(d.mu_hi)))
    res = eval_maximal(d, fn, _grid_from_args(args))
    payload = {"value": res.value, "argmax": res.argmax, "error_bound": res.error_bound}
    row = [repr(res.value), repr(res.argmax), repr(res.error_bound)]
    return payload, (["value", "argmax", "error_bound"], [row]), EXIT_OK


def _report_csv(report) -> tuple[list, list[list]]:
    return list(report.CSV_COLUMNS), report.csv_rows()


def _cmd_lln(args):
    d = MaximalDist(args.mu_lo, args.mu_hi)
    if not args.policy:
        raise CliError(EXIT_VALIDATION, "need at least one --policy")
    policies = [_parse_policy(s) for s in args.policy]
    noise = _parse_noise(args.noise)
    cfg = SimConfig(n=args.n_max, reps=args.reps, seed=args.seed)
    schedule = _parse_schedule(args.n_schedule) if args.n_schedule else None
    fn = build_fn(args.fn, max(abs(d.mu_lo), abs(d.mu_hi)) + noise.half_width)
    report = empirical_lln(d, fn, policies, noise, cfg, _grid_from_args(args), schedule)
    return report.to_json_obj(), _report_csv(report), EXIT_OK


def _default_rate_policies(d: MaximalDist) -> list[MeanPolicy]:
    mid = (d.mu_lo + d.mu_hi) / 2.0
    policies = [MeanPolicy.constant(d.mu_lo), MeanPolicy.constant(mid), MeanPolicy.constant(d.mu_hi)]
    if not d.degenerate:
        policies.append(MeanPolicy.periodic((d.mu_lo, d.mu_hi)))
    seen = set()
    out = []
    for p in policies:
        if p.policy_id not in seen:
            seen.add(p.policy_id)
            out.append(p)
    return out


def _cmd_rate(args):
    d = MaximalDist(args.mu_lo, args.mu_hi)
    policies = [_parse_policy(s) for s in args.policy] if args.policy else _default_rate_policies(d)
    noise = _parse_noise(args.noise)
    cfg = SimConfig(n=args.n_max, reps=args.reps, seed=args.seed)
    schedule = _parse_schedule(args.n_schedule) if args.n_schedule else log_schedule(args.n_max)
    report = rate_check(d, policies, noise, cfg, schedule)
    return report.to_json_obj(), _report_csv(report), EXIT_OK


def _cmd_estimate(args):
    if (args.input is None) == (args.values is None):
        raise CliError(EXIT_VALIDATION, "give exactly one of --input or --values")
    if args.input is not None:
        series = ingest_csv(args.input, _column_spec(args))
        values = series.values
    else:
        try:
            values = tuple(float(v) for v in args.values.split(","))
        except ValueError:
            raise CliError(EXIT_VALIDATION, f"bad --values list {args.values!r}")
    sample = SampleSet(values)
    res = mle_estimate(sample)
    payload = res.to_dict(n=sample.n)
    row = [repr(res.mu_lo_hat), repr(res.mu_hi_hat), repr(res.delta), sample.n]
    return payload, (["mu_lo_hat", "mu_hi_hat", "delta", "n"], [row]), EXIT_OK


def _cmd_envelope(args):
    series = ingest_csv(args.input, _column_spec(args))
    cfg = EnvelopeConfig(window=args.window, num_windows=args.num_windows, demean=args.demean)
    sigmas = rolling_local_variance(series, cfg, args.t_index)
    env = variance_envelope(sigmas)
    payload = env.to_dict()
    payload.update({"L": args.window, "K": args.num_windows, "demean": args.demean})
    rows = [[j, repr(v)] for j, v in env.per_window]
    return payload, (["j", "sigma_sq"], rows), EXIT_OK


_HANDLERS = {
    "verify-axioms": _cmd_verify_axioms,
    "eval": _cmd_eval,
    "lln": _cmd_lln,
    "rate": _cmd_rate,
    "estimate": _cmd_estimate,
    "envelope": _cmd_envelope,
}


# ---------------------------------------------------------------------------


def _run(argv: list[str]) -> int:
    parser = build_parser()
    if not argv or argv[0] not in COMMANDS:
        parser.parse_args(argv)  # raises CliError with a helpful message
        raise CliError(EXIT_VALIDATION, "missing command")
    command, rest = argv[0], list(argv[1:])
    cfg_path = _scan_config_path(rest)
    if cfg_path is not None:
        table = _subparser_actions(parser, command)
        rest = _config_tokens(cfg_path, table, rest) + rest
    args = parser.parse_args([command] + rest)
    meta = {
        "version": __version__,
        "command": command,
        "seed": args.seed,
        "config_digest": _config_digest(args),
    }
    payload, csv_table, code = _HANDLERS[command](args)
    _emit(args, meta, payload, csv_table)
    return code


def _fail(code: int, message: str) -> int:
    line = json.dumps({"error": {"code": code, "message": " ".join(str(message).split())}})
    print(line, file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        return _run(argv)
    except CliError as exc:
        return _fail(exc.code, exc.message)
    except DataError as exc:
        return _fail(EXIT_DATA, str(exc))
    except (ValueError, TypeError, EvaluationError, SimulationError) as exc:
        return _fail(EXIT_VALIDATION, str(exc))
    except Exception as exc:  # pragma: no cover - safety net
        return _fail(EXIT_INTERNAL, f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    raise SystemExit(main())
