"""Command-line interface.

Subcommands:

* ``rates``     -- steady-state rate pair(s) at one power-split ratio.
* ``region``    -- rate frontier sweep over a log-spaced grid of ratios.
* ``pe-curve``  -- analytic error probability versus blocklength.
* ``simulate``  -- Monte Carlo transmission runs with moment summaries.
* ``validate``  -- Monte Carlo consistency checks of the model recursions.

Every option can also be supplied through a flat ``key=value`` config file
named by ``--config`` or the ``GBCF_CONFIG`` environment variable; explicit
flags win over the file, the file wins over built-in defaults. Reports are
delimited text or JSON; the sweep and curve reports additionally render a
figure next to the output file unless ``--no-plot`` or stdout output is
selected. Exit status is 0 on success, 1 when a computation or validation
check fails, and 2 for usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import __version__
from .analysis import combined_region, pe_curve, rate_region
from .channel import ChannelParams
from .eol import eol_trajectory
from .errors import GbcfError
from .ol import ol_fixed_point, ol_rates, ol_trajectory
from .simulate import SimConfig, dump_trajectories, run_ensemble

__all__ = ["main"]

_TRUE_WORDS = frozenset({"1", "true", "yes", "on"})
_FALSE_WORDS = frozenset({"0", "false", "no", "off"})


@dataclass
class _Opt:
    """One CLI option that may also come from the config file."""

    flag: str
    type: Callable[[str], Any]
    default: Any
    help: str
    choices: Optional[tuple] = None
    is_flag: bool = False
    hidden: bool = False
    metavar: Optional[str] = None

    @property
    def dest(self) -> str:
        return self.flag.lstrip("-").replace("-", "_")

    def add_to(self, parser: argparse.ArgumentParser) -> None:
        # argparse sees default=None (so the config file can fill gaps), so
        # substitute the real built-in default into the help text ourselves.
        if self.hidden:
            help_text = argparse.SUPPRESS
        else:
            help_text = self.help.replace("%(default)s", str(self.default))
        if self.is_flag:
            parser.add_argument(
                self.flag,
                action="store_const",
                const=True,
                default=None,
                help=help_text,
            )
        else:
            parser.add_argument(
                self.flag,
                type=self.type,
                default=None,
                choices=self.choices,
                help=help_text,
                metavar=self.metavar,
            )

    def parse_config_value(self, raw: str) -> Any:
        if self.is_flag:
            word = raw.lower()
            if word in _TRUE_WORDS:
                return True
            if word in _FALSE_WORDS:
                return False
            raise ValueError(f"expected a boolean for {self.dest}, got {raw!r}")
        value = self.type(raw)
        if self.choices is not None and value not in self.choices:
            raise ValueError(
                f"{self.dest} must be one of {', '.join(map(str, self.choices))}, "
                f"got {raw!r}"
            )
        return value


def _channel_opts() -> list[_Opt]:
    return [
        _Opt("--p", float, 2.0, "average transmit power (default: %(default)s)"),
        _Opt("--s1", float, 1.0, "receiver 1 noise variance (default: %(default)s)"),
        _Opt("--s2", float, 1.0, "receiver 2 noise variance (default: %(default)s)"),
        _Opt(
            "--rho-z",
            float,
            0.0,
            "noise correlation across receivers (default: %(default)s)",
        ),
    ]


def _out_opts() -> list[_Opt]:
    return [
        _Opt(
            "--out",
            str,
            "-",
            "output path, or - for stdout (default: stdout)",
            metavar="PATH",
        ),
        _Opt(
            "--format",
            str,
            "csv",
            "output format (default: %(default)s)",
            choices=("csv", "json"),
        ),
    ]


_CONFIG_OPT = _Opt(
    "--config",
    str,
    None,
    "key=value config file; GBCF_CONFIG names one too (flags win)",
    metavar="PATH",
)


def _load_config_file(path: str) -> dict[str, str]:
    data: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            data[key.strip()] = value.strip()
    return data


def _resolve_options(
    args: argparse.Namespace,
    opts: Sequence[_Opt],
    parser: argparse.ArgumentParser,
) -> None:
    """Apply flag > config file > built-in default precedence in place."""
    path = args.config if args.config is not None else os.environ.get("GBCF_CONFIG")
    by_dest = {opt.dest: opt for opt in opts}
    from_file: dict[str, Any] = {}
    if path:
        try:
            raw_items = _load_config_file(path)
        except OSError as exc:
            parser.error(f"cannot read config file: {exc}")
        except ValueError as exc:
            parser.error(str(exc))
        for key, raw in raw_items.items():
            opt = by_dest.get(key)
            if opt is None:
                parser.error(f"unknown config key {key!r} in {path}")
            try:
                from_file[key] = opt.parse_config_value(raw)
            except ValueError as exc:
                parser.error(f"bad config value for {key!r}: {exc}")
    for opt in opts:
        if getattr(args, opt.dest) is None:
            setattr(args, opt.dest, from_file.get(opt.dest, opt.default))


def _channel_from_args(
    args: argparse.Namespace, parser: argparse.ArgumentParser
) -> ChannelParams:
    try:
        return ChannelParams(
            p=args.p, sigma1_sq=args.s1, sigma2_sq=args.s2, rho_z=args.rho_z
        )
    except ValueError as exc:
        parser.error(str(exc))


def _fmt(value: float) -> str:
    return repr(float(value))


def _json_safe(value: float) -> Optional[float]:
    value = float(value)
    return value if math.isfinite(value) else None


def _meta(command: str, params: ChannelParams) -> dict:
    return {
        "version": __version__,
        "command": command,
        "params": {
            "p": params.p,
            "sigma1_sq": params.sigma1_sq,
            "sigma2_sq": params.sigma2_sq,
            "rho_z": params.rho_z,
        },
    }


class _Output:
    """Destination for one report: stdout or a file, plus the figure path."""

    def __init__(self, out: str, want_figure: bool):
        self.to_stdout = out in ("-", "")
        self.path = None if self.to_stdout else out
        self.figure_path = None
        if want_figure and self.path is not None:
            self.figure_path = os.path.splitext(self.path)[0] + ".png"

    def write_text(self, text: str) -> None:
        if self.to_stdout:
            sys.stdout.write(text)
        else:
            with open(self.path, "w", newline="") as fh:
                fh.write(text)


def _rows_to_csv(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _schemes(arg: str) -> list[str]:
    return ["ol", "eol"] if arg == "both" else [arg]


def _warn_failed_points(points) -> None:
    for p in points:
        if p.error is not None:
            print(
                f"warning: {p.scheme} solve failed at g={p.g:g}: {p.error}",
                file=sys.stderr,
            )


# ---------------------------------------------------------------------------
# rates


def cmd_rates(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    params = _channel_from_args(args, parser)
    if args.g <= 0:
        parser.error(f"g must be > 0, got {args.g}")
    points = []
    for scheme in _schemes(args.scheme):
        points.extend(rate_region(params, scheme, [args.g]))
    _warn_failed_points(points)
    if all(p.error is not None for p in points):
        print("error: no operating point could be solved", file=sys.stderr)
        return 1
    output = _Output(args.out, want_figure=False)
    if args.format == "csv":
        rows = [
            [p.scheme, _fmt(p.g), _fmt(p.r1), _fmt(p.r2), _fmt(p.rho_ss)]
            for p in points
        ]
        output.write_text(
            _rows_to_csv(["scheme", "g", "r1", "r2", "rho_ss"], rows)
        )
    else:
        obj = {
            "meta": _meta("rates", params),
            "points": [
                {
                    "scheme": p.scheme,
                    "g": p.g,
                    "r1": _json_safe(p.r1),
                    "r2": _json_safe(p.r2),
                    "rho_ss": _json_safe(p.rho_ss),
                    "error": p.error,
                }
                for p in points
            ],
        }
        output.write_text(_dump_json(obj))
    return 0


# ---------------------------------------------------------------------------
# region


def cmd_region(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    params = _channel_from_args(args, parser)
    if args.g_min <= 0 or args.g_max < args.g_min:
        parser.error(
            f"need 0 < g-min <= g-max, got ({args.g_min}, {args.g_max})"
        )
    if args.g_points < 1:
        parser.error(f"g-points must be >= 1, got {args.g_points}")
    if args.jobs < 1:
        parser.error(f"jobs must be >= 1, got {args.jobs}")
    grid = np.logspace(
        math.log10(args.g_min), math.log10(args.g_max), args.g_points
    )
    by_scheme = {}
    for scheme in _schemes(args.scheme):
        by_scheme[scheme] = rate_region(params, scheme, grid, jobs=args.jobs)
        _warn_failed_points(by_scheme[scheme])
    all_points = [p for pts in by_scheme.values() for p in pts]
    if all(p.error is not None for p in all_points):
        print("error: every operating point failed to solve", file=sys.stderr)
        return 1
    combined = None
    if args.combined:
        combined = combined_region(
            by_scheme.get("ol", []), by_scheme.get("eol", [])
        )
    output = _Output(args.out, want_figure=not args.no_plot)
    if args.format == "csv":
        rows = [
            [p.scheme, _fmt(p.g), _fmt(p.r1), _fmt(p.r2), _fmt(p.rho_ss)]
            for p in all_points
        ]
        if combined:
            rows.extend(
                ["combined", "", _fmt(q), _fmt(r2), ""] for q, r2 in combined
            )
        output.write_text(
            _rows_to_csv(["scheme", "g", "r1", "r2", "rho_ss"], rows)
        )
    else:
        obj = {
            "meta": _meta("region", params),
            "points": [
                {
                    "scheme": p.scheme,
                    "g": p.g,
                    "r1": _json_safe(p.r1),
                    "r2": _json_safe(p.r2),
                    "rho_ss": _json_safe(p.rho_ss),
                    "error": p.error,
                }
                for p in all_points
            ],
            "combined": (
                [[q, r2] for q, r2 in combined] if combined else None
            ),
        }
        output.write_text(_dump_json(obj))
    if output.figure_path is not None:
        from .plotting import save_region_figure

        save_region_figure(by_scheme, combined, output.figure_path)
    return 0


# ---------------------------------------------------------------------------
# pe-curve


def cmd_pe_curve(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    params = _channel_from_args(args, parser)
    if args.g <= 0:
        parser.error(f"g must be > 0, got {args.g}")
    if args.n_max < 2:
        parser.error(f"n-max must be >= 2, got {args.n_max}")
    if args.rate_fraction <= 0:
        parser.error(f"rate-fraction must be > 0, got {args.rate_fraction}")
    init_modes = (
        ["natural", "fixed-point"] if args.init == "both" else [args.init]
    )
    n_range = range(2, args.n_max + 1)
    curves = {}
    try:
        for scheme in _schemes(args.scheme):
            for mode in init_modes:
                tag = scheme if len(init_modes) == 1 else f"{scheme}@{mode}"
                curves[tag] = pe_curve(
                    params,
                    scheme,
                    args.g,
                    args.rate_fraction,
                    n_range,
                    init_mode=mode,
                )
    except GbcfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    output = _Output(args.out, want_figure=not args.no_plot)
    if args.format == "csv":
        rows = [
            [
                tag,
                str(pt.n),
                _fmt(pt.beta1),
                _fmt(pt.pe1),
                _fmt(pt.beta2),
                _fmt(pt.pe2),
            ]
            for tag, points in curves.items()
            for pt in points
        ]
        output.write_text(
            _rows_to_csv(
                ["scheme", "n", "beta1", "pe1", "beta2", "pe2"], rows
            )
        )
    else:
        obj = {
            "meta": _meta("pe-curve", params),
            "rate_fraction": args.rate_fraction,
            "g": args.g,
            "curves": {
                tag: [
                    {
                        "n": pt.n,
                        "beta1": _json_safe(pt.beta1),
                        "pe1": _json_safe(pt.pe1),
                        "beta2": _json_safe(pt.beta2),
                        "pe2": _json_safe(pt.pe2),
                    }
                    for pt in points
                ]
                for tag, points in curves.items()
            },
        }
        output.write_text(_dump_json(obj))
    if output.figure_path is not None:
        from .plotting import save_pe_figure

        save_pe_figure(curves, output.figure_path)
    return 0


# ---------------------------------------------------------------------------
# simulate


def _target_rates(
    params: ChannelParams, args: argparse.Namespace
) -> tuple[float, float]:
    """Per-user message rates: explicit --rate for both, else a fraction of
    the memoryless scheme's steady rates."""
    if args.rate is not None:
        return args.rate, args.rate
    fp = ol_fixed_point(params, args.g)
    r1, r2 = ol_rates(params, args.g, fp.rho_ol)
    return args.rate_fraction * r1, args.rate_fraction * r2


def cmd_simulate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    params = _channel_from_args(args, parser)
    if args.jobs < 1:
        parser.error(f"jobs must be >= 1, got {args.jobs}")
    try:
        rate1, rate2 = _target_rates(params, args)
    except GbcfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        config = SimConfig(
            scheme=args.scheme,
            n=args.n,
            rate1=rate1,
            rate2=rate2,
            g=args.g,
            trials=args.trials,
            seed=args.seed,
            record_trajectories=args.dump is not None,
            init=args.init,
        )
    except ValueError as exc:
        parser.error(str(exc))
    try:
        result = run_ensemble(config, params, jobs=args.jobs)
    except GbcfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    rows = _simulate_rows(result)
    output = _Output(args.out, want_figure=False)
    if args.format == "csv":
        header = ["quantity", "user", "k", "value", "se", "ci_low", "ci_high"]
        output.write_text(_rows_to_csv(header, rows))
    else:
        obj = {
            "meta": _meta("simulate", params),
            "config": {
                "scheme": config.scheme,
                "n": config.n,
                "rate1": config.rate1,
                "rate2": config.rate2,
                "g": config.g,
                "trials": config.trials,
                "seed": config.seed,
                "init": config.init,
                "m1": config.m1,
                "m2": config.m2,
            },
            "rows": [
                {
                    "quantity": q,
                    "user": int(user) if user else None,
                    "k": int(k) if k else None,
                    "value": float(value),
                    "se": float(se) if se else None,
                    "ci_low": float(lo) if lo else None,
                    "ci_high": float(hi) if hi else None,
                }
                for q, user, k, value, se, lo, hi in rows
            ],
        }
        output.write_text(_dump_json(obj))
    if args.dump is not None:
        dump_trajectories(result, args.dump, compress=args.gzip)
    return 0


def _simulate_rows(result) -> list[list[str]]:
    """Long-format report rows for a Monte Carlo run."""
    rows = []
    for user in (1, 2):
        est = result.pe_estimate(user)
        rows.append(
            [
                "pe",
                str(user),
                "",
                _fmt(est.pe),
                "",
                _fmt(est.ci_low),
                _fmt(est.ci_high),
            ]
        )
    n = result.config.n
    per_use = [
        ("x2", "x2", None),
        ("eps2", "eps2_1", 1),
        ("eps2", "eps2_2", 2),
        ("e1e2", "e1e2", None),
    ]
    for label, key, user in per_use:
        for k in range(1, n + 1):
            mean, se = result.mean_se(key, k)
            rows.append(
                [
                    label,
                    str(user) if user else "",
                    str(k),
                    _fmt(mean),
                    _fmt(se),
                    "",
                    "",
                ]
            )
    for user in (1, 2):
        for k in range(1, n):
            mean, se = result.mean_se(f"yy_{user}", k)
            rows.append(["yy", str(user), str(k), _fmt(mean), _fmt(se), "", ""])
    for k in range(1, n + 1):
        rows.append(["rho", "", str(k), _fmt(result.rho_emp(k)), "", "", ""])
    return rows


# ---------------------------------------------------------------------------
# validate


@dataclass
class _Check:
    name: str
    passed: bool
    detail: str


def _check_embedding(params: ChannelParams, g: float) -> _Check:
    """The two-output recursion with its memory terms clamped to zero must
    retrace the memoryless recursion."""
    steps = 50
    ol_states = ol_trajectory(params, g, steps)
    clamped = eol_trajectory(params, g, steps, clamp_lambda=True)
    worst = 0.0
    for a, b in zip(ol_states, clamped):
        for x, y in (
            (a.alpha1, b.alpha1),
            (a.alpha2, b.alpha2),
            (a.rho, b.rho),
        ):
            scale = max(abs(x), abs(y), 1e-300)
            worst = max(worst, abs(x - y) / scale)
    return _Check(
        name="embedding",
        passed=worst <= 1e-12,
        detail=f"max relative deviation {worst:.3e} over {steps} steps",
    )


def _check_covariance(result) -> _Check:
    """Measured consecutive-output covariances against the recursion."""
    sched = result.schedule
    worst = 0.0
    where = ""
    for user in (1, 2):
        lam = sched.lambda1 if user == 1 else sched.lambda2
        for k in range(3, 9):
            mean, se = result.mean_se(f"yy_{user}", k)
            dev = abs(mean - lam[k]) / se
            if dev > worst:
                worst, where = dev, f"user {user}, k={k}"
    return _Check(
        name="covariance",
        passed=worst <= 4.0,
        detail=f"worst {worst:.2f} s.e. at {where}",
    )


def _check_orthogonality(result) -> _Check:
    """Post-refinement errors must be uncorrelated with both outputs used."""
    worst = 0.0
    where = ""
    for user in (1, 2):
        for key in (f"ey_now_{user}", f"ey_prev_{user}"):
            for k in range(4, 9):
                mean, se = result.mean_se(key, k)
                dev = abs(mean) / se
                if dev > worst:
                    worst, where = dev, f"{key}, k={k}"
    return _Check(
        name="orthogonality",
        passed=worst <= 4.0,
        detail=f"worst {worst:.2f} s.e. at {where}",
    )


def _check_power(result) -> _Check:
    """Transmissions must average the power budget: exactly P from use 3 on,
    at most P for the two init uses (the message grid sits just inside)."""
    p = result.params.p
    worst = 0.0
    where = ""
    init_violation = ""
    for k in range(1, result.config.n + 1):
        mean, se = result.mean_se("x2", k)
        if k <= 2:
            if mean > p + 5.0 * se:
                init_violation = init_violation or f"use {k} exceeds the budget"
        else:
            dev = abs(mean - p) / se
            if dev > worst:
                worst, where = dev, f"k={k}"
    ok = worst <= 5.0 and not init_violation
    detail = f"worst {worst:.2f} s.e. at {where}"
    if init_violation:
        detail += f"; {init_violation}"
    return _Check(name="power", passed=ok, detail=detail)


def cmd_validate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    params = _channel_from_args(args, parser)
    if args.g <= 0:
        parser.error(f"g must be > 0, got {args.g}")
    if args.jobs < 1:
        parser.error(f"jobs must be >= 1, got {args.jobs}")
    trials = 100000 if args.quick else args.trials
    checks = [_check_embedding(params, args.g)]
    try:
        fp = ol_fixed_point(params, args.g)
        r1, r2 = ol_rates(params, args.g, fp.rho_ol)
        config = SimConfig(
            scheme="eol",
            n=10,
            rate1=args.rate_fraction * r1,
            rate2=args.rate_fraction * r2,
            g=args.g,
            trials=trials,
            seed=args.seed,
        )
        result = run_ensemble(
            config,
            params,
            jobs=args.jobs,
            _lambda_corruption=args.corrupt_lambda,
        )
    except (GbcfError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    checks.append(_check_covariance(result))
    checks.append(_check_orthogonality(result))
    checks.append(_check_power(result))
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"CHECK {check.name}: {status} ({check.detail})")
    return 0 if all(c.passed for c in checks) else 1


# ---------------------------------------------------------------------------
# parser assembly


def _build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="gbcf",
        description=(
            "Linear-feedback schemes for the two-user Gaussian broadcast "
            "channel with noiseless feedback: steady-state rates, error "
            "probability curves, and Monte Carlo validation."
        ),
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    registry = {}

    def register(name, func, help_text, opts):
        p = sub.add_parser(name, help=help_text)
        for opt in opts:
            opt.add_to(p)
        _CONFIG_OPT.add_to(p)
        p.set_defaults(func=func)
        registry[name] = (p, list(opts) + [_CONFIG_OPT])

    scheme3 = _Opt(
        "--scheme",
        str,
        "both",
        "which scheme(s) to evaluate (default: %(default)s)",
        choices=("ol", "eol", "both"),
    )
    g_opt = _Opt(
        "--g", float, 1.0, "power-split ratio between the two error "
        "signals (default: %(default)s)"
    )
    jobs_opt = _Opt(
        "--jobs", int, 1, "worker threads (default: %(default)s)"
    )
    no_plot = _Opt(
        "--no-plot", float, False, "skip the figure next to the output file",
        is_flag=True,
    )

    register(
        "rates",
        cmd_rates,
        "steady-state rate pair at one power-split ratio",
        _channel_opts() + [g_opt, scheme3] + _out_opts(),
    )
    register(
        "region",
        cmd_region,
        "rate frontier over a log-spaced ratio grid",
        _channel_opts()
        + [
            scheme3,
            _Opt("--g-min", float, 0.01, "grid start (default: %(default)s)"),
            _Opt("--g-max", float, 100.0, "grid end (default: %(default)s)"),
            _Opt(
                "--g-points",
                int,
                200,
                "grid size (default: %(default)s)",
            ),
            _Opt(
                "--combined",
                float,
                False,
                "append the componentwise-best envelope of both schemes",
                is_flag=True,
            ),
            jobs_opt,
            no_plot,
        ]
        + _out_opts(),
    )
    register(
        "pe-curve",
        cmd_pe_curve,
        "analytic error probability versus blocklength",
        _channel_opts()
        + [
            g_opt,
            scheme3,
            _Opt(
                "--rate-fraction",
                float,
                0.9,
                "target rates as a fraction of the memoryless scheme's "
                "steady rates (default: %(default)s)",
            ),
            _Opt(
                "--n-max",
                int,
                60,
                "largest blocklength (default: %(default)s)",
            ),
            _Opt(
                "--init",
                str,
                "fixed-point",
                "link model: steady-state contraction, the actual "
                "transient, or both (default: %(default)s)",
                choices=("natural", "fixed-point", "both"),
            ),
            no_plot,
        ]
        + _out_opts(),
    )
    register(
        "simulate",
        cmd_simulate,
        "Monte Carlo transmission runs",
        _channel_opts()
        + [
            g_opt,
            _Opt(
                "--scheme",
                str,
                "ol",
                "scheme to simulate (default: %(default)s)",
                choices=("ol", "eol"),
            ),
            _Opt("--n", int, 10, "channel uses per trial (default: %(default)s)"),
            _Opt(
                "--rate",
                float,
                None,
                "explicit per-user rate in bits/use (overrides "
                "--rate-fraction)",
            ),
            _Opt(
                "--rate-fraction",
                float,
                0.9,
                "target rates as a fraction of the memoryless scheme's "
                "steady rates (default: %(default)s)",
            ),
            _Opt("--trials", int, 100000, "trial count (default: %(default)s)"),
            _Opt("--seed", int, 12345, "RNG seed (default: %(default)s)"),
            jobs_opt,
            _Opt(
                "--init",
                str,
                "natural",
                "gain schedule seeding (default: %(default)s)",
                choices=("natural", "fixed-point"),
            ),
            _Opt(
                "--dump",
                str,
                None,
                "also write per-use trajectories to this file",
                metavar="PATH",
            ),
            _Opt(
                "--gzip",
                float,
                False,
                "gzip-compress the trajectory dump",
                is_flag=True,
            ),
        ]
        + _out_opts(),
    )
    register(
        "validate",
        cmd_validate,
        "Monte Carlo consistency checks of the model recursions",
        _channel_opts()
        + [
            g_opt,
            _Opt(
                "--rate-fraction",
                float,
                0.5,
                "message load of the validation ensemble "
                "(default: %(default)s)",
            ),
            _Opt(
                "--trials",
                int,
                1000000,
                "trial count (default: %(default)s)",
            ),
            _Opt("--seed", int, 12345, "RNG seed (default: %(default)s)"),
            jobs_opt,
            _Opt(
                "--quick",
                float,
                False,
                "cap the ensemble at 100000 trials",
                is_flag=True,
            ),
            _Opt(
                "--corrupt-lambda",
                float,
                0.0,
                "scale the memory terms fed to the receiver taps "
                "(testing hook)",
                hidden=True,
            ),
        ],
    )
    return parser, registry


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser, registry = _build_parser()
    args = parser.parse_args(argv)
    sub_parser, opts = registry[args.command]
    _resolve_options(args, opts, sub_parser)
    return args.func(args, sub_parser)


if __name__ == "__main__":
    sys.exit(main())
