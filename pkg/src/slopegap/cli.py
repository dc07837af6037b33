"""Command-line entry point: ``slopegap <command> [options]``.

Exit status is 0 on success, 2 for bad arguments, invalid input files or
unwritable outputs, and 1 for anything unexpected.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .export import to_csv, to_json

COMMANDS = ("farey", "orbit", "hall", "surface", "count", "equidist", "sl2")


class UsageError(Exception):
    pass


def _int_list(text):
    try:
        vals = [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _grid(text):
    try:
        lo, hi, n = str(text).split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"grid must look like LO:HI:N, got {text!r}") from exc
    if not (n >= 2 and hi > lo):
        raise argparse.ArgumentTypeError("grid needs HI > LO and N >= 2")
    return (lo, hi, n)


def _point(text):
    try:
        a, b = (Fraction(v.strip()) for v in str(text).split(","))
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"start must look like A,B (e.g. 1/5,1), got {text!r}") from exc
    return (a, b)


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slopegap",
        description="Slope-gap distributions via the BCZ map on the horocycle transversal.",
    )
    parser.add_argument("--version", action="version", version=f"slopegap {__version__}")
    parser.add_argument("--config", help="JSON file whose keys mirror the command-line flags")
    sub = parser.add_subparsers(dest="command", metavar="command")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    common.add_argument("--output", "-o", help="output file (default: stdout; required for svg)")
    common.add_argument("--plot", help="also render a figure to this path (.svg/.png/.pdf)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=_positive_int, default=10**6)

    p = sub.add_parser("farey", parents=[common], help="Farey sequence or renormalized gaps")
    p.add_argument("--Q", type=_positive_int, required=True)
    p.add_argument("--what", choices=("sequence", "gaps"), default="sequence")

    p = sub.add_parser("orbit", parents=[common], help="BCZ orbit dump")
    p.add_argument("--Q", type=int, help="seed the closed horocycle (1/Q, 1)")
    p.add_argument("--start", type=_point, help="start point A,B (fractions allowed)")
    p.add_argument("--steps", type=int, help="default: one full period when --Q is given")
    p.add_argument("--mode", choices=("auto", "exact", "float"), default="auto")

    p = sub.add_parser("hall", parents=[common], help="Hall CDF/density table and kink report")
    p.add_argument("--grid", type=_grid, default=(1.0, 10.0, 1000))
    p.add_argument("--h", type=float, default=1e-4, help="step of the numeric derivative")
    p.add_argument("--kinks", action="store_true", help="report points of non-analyticity")

    p = sub.add_parser("surface", parents=[common], help="validate a surface and tabulate its gap CDF")
    p.add_argument("--surface", default="torus", help="surface JSON file or 'torus'")
    p.add_argument("--grid", type=_grid, default=(0.5, 10.0, 200))
    p.add_argument("--validate-only", action="store_true")

    p = sub.add_parser("count", parents=[common], help="Farey counts and counting deviations")
    p.add_argument("--Qs", type=_int_list, default=[10, 100, 1000, 10000])

    p = sub.add_parser("equidist", parents=[common], help="equidistribution errors and decay fits")
    p.add_argument("--quantity", choices=("ks", "counting", "rho_error"), default="ks")
    p.add_argument("--Qs", type=_int_list, default=[100, 300, 1000, 3000])

    p = sub.add_parser("sl2", parents=[common], help="UAK round trip and measure identity reports")
    p.add_argument("--report", choices=("uak", "measure"), default="uak")
    p.add_argument("--width", type=float, default=0.5, help="thickening width w")
    return parser


def _config_tokens(cfg: dict) -> list[str]:
    tokens = []
    for key, value in cfg.items():
        flag = "--" + key.replace("_", "-") if key not in ("Q", "Qs", "h") else "--" + key
        if isinstance(value, bool):
            if value:
                tokens.append(flag)
            continue
        if value is None:
            continue
        if isinstance(value, (list, tuple)):
            value = (":" if key == "grid" else ",").join(str(v) for v in value)
        tokens += [flag, str(value)]
    return tokens


def _apply_config(argv):
    """Splice config-file settings in before the explicit flags, which therefore win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return argv
    try:
        cfg = json.loads(Path(known.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    cfg = dict(cfg)
    cfg_command = cfg.pop("command", None)
    given = [a for a in rest if a in COMMANDS]
    if given:
        i = rest.index(given[0])
        head, tail = rest[: i + 1], rest[i + 1 :]
    else:
        if cfg_command not in COMMANDS:
            raise UsageError("config needs a valid 'command' when none is given on the command line")
        head, tail = rest + [cfg_command], []
    return head + _config_tokens(cfg) + tail


def _resolved(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k == "config":
            continue
        if isinstance(v, tuple):
            v = [str(x) if isinstance(x, Fraction) else x for x in v]
        out[k] = v
    return out


def _emit(args, text: str):
    if args.output:
        try:
            Path(args.output).write_text(text)
        except OSError as exc:
            raise UsageError(f"cannot write {args.output}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _figure(args, draw):
    """Run ``draw(path)`` for ``--plot`` and for ``--format svg``."""
    targets = []
    if args.plot:
        targets.append(args.plot)
    if args.format == "svg":
        if not args.output:
            raise UsageError("--format svg needs --output")
        targets.append(args.output)
    for path in targets:
        try:
            draw(path)
        except OSError as exc:
            raise UsageError(f"cannot write {path}: {exc}") from exc


def _table(args, columns, rows, payload):
    config = _resolved(args)
    if args.format == "csv":
        _emit(args, to_csv(columns, rows, config))
    elif args.format == "json":
        _emit(args, to_json(payload, config))


def cmd_farey(args):
    from .exact import farey_sequence, renormalized_gaps

    if args.what == "sequence":
        seq = farey_sequence(args.Q)
        rows = [(i, t.numerator, t.denominator) for i, t in enumerate(seq.terms)]
        columns = ("index", "numerator", "denominator")
        payload = {"order": args.Q, "count": len(rows), "terms": [f"{t}" for t in seq.terms]}
        gaps_for_plot = None
    else:
        gm = renormalized_gaps(args.Q)
        q2 = args.Q * args.Q
        rows = []
        for i, d in enumerate(gm.products):
            g = Fraction(q2, int(d))
            rows.append((i, g.numerator, g.denominator, q2 / int(d)))
        columns = ("index", "gap_numerator", "gap_denominator", "gap_float")
        payload = {"order": args.Q, "count": len(rows), "gaps": [str(Fraction(q2, int(d))) for d in gm.products]}
        gaps_for_plot = gm.as_float()
    _table(args, columns, rows, payload)

    def draw(path):
        from . import plotting
        from .hall import hall_cdf_array

        if gaps_for_plot is None:
            x = [float(t) for t in seq.terms]
            plotting.plot_points(x[:-1], x[1:], path, title=f"Consecutive Farey fractions, Q={args.Q}")
        else:
            hx = np.linspace(0.5, max(10.0, float(np.quantile(gaps_for_plot, 0.99))), 600)
            h = 1e-3
            hy = (hall_cdf_array(hx + h) - hall_cdf_array(hx - h)) / (2 * h)
            plotting.plot_gaps(gaps_for_plot, path, title=f"Renormalized Farey gaps, Q={args.Q}", hall=(hx, hy))

    _figure(args, draw)


def cmd_orbit(args):
    from .bcz import orbit
    from .exact import farey_count

    if (args.Q is None) == (args.start is None):
        raise UsageError("give exactly one of --Q or --start")
    if args.Q is not None:
        if args.Q < 2:
            raise UsageError("--Q must be >= 2")
        start = (Fraction(1, args.Q), Fraction(1))
        steps = args.steps if args.steps is not None else farey_count(args.Q) - 1
    else:
        start = args.start
        if args.steps is None:
            raise UsageError("--steps is required with --start")
        steps = args.steps
    rec = orbit(start, steps, mode=args.mode)
    exact = all(p.is_exact for p in rec.points) if rec.points else args.mode != "float"
    if exact and rec.points:
        columns = ("step", "a_num", "a_den", "b_num", "b_den", "rt_num", "rt_den", "a", "b", "return_time")
        rows = [
            (i, p.a.numerator, p.a.denominator, p.b.numerator, p.b.denominator,
             r.numerator, r.denominator, float(p.a), float(p.b), float(r))
            for i, (p, r) in enumerate(zip(rec.points, rec.return_times))
        ]
    else:
        columns = ("step", "a", "b", "return_time")
        rows = [(i, float(p.a), float(p.b), float(r)) for i, (p, r) in enumerate(zip(rec.points, rec.return_times))]
    payload = {
        "steps": steps,
        "horocycle_length": str(rec.horocycle_length) if exact else float(rec.horocycle_length),
        "flagged_steps": list(rec.flagged_steps),
        "points": [[str(p.a), str(p.b)] if exact else [float(p.a), float(p.b)] for p in rec.points],
        "return_times": [str(r) if exact else float(r) for r in rec.return_times],
    }
    _table(args, columns, rows, payload)

    def draw(path):
        from . import plotting

        pts = np.array([p.as_float() for p in rec.points]) if rec.points else np.zeros((0, 2))
        plotting.plot_points(pts[:, 0], pts[:, 1], path, title=f"BCZ orbit, {steps} steps")

    _figure(args, draw)


def cmd_hall(args):
    from .hall import detect_nonanalyticity, hall_cdf_array

    lo, hi, n = args.grid
    x = np.linspace(lo, hi, n)
    cdf = hall_cdf_array(x)
    h = args.h
    if h <= 0:
        raise UsageError("--h must be positive")
    dens = (hall_cdf_array(x + h) - hall_cdf_array(x - h)) / (2 * h)
    payload = {"x": x.tolist(), "cdf": cdf.tolist(), "density": dens.tolist()}
    if args.kinks:
        payload["kinks"] = detect_nonanalyticity(x)
    if args.format == "csv" and args.kinks:
        args_kinks = payload["kinks"]
        _table(args, ("x", "cdf", "density", "kink"), [(a, b, c, int(a in args_kinks)) for a, b, c in zip(x, cdf, dens)], payload)
    else:
        _table(args, ("x", "cdf", "density"), zip(x, cdf, dens), payload)

    def draw(path):
        from . import plotting

        plotting.plot_cdf(x, cdf, path, title="Hall distribution", density=dens)

    _figure(args, draw)


def cmd_surface(args):
    from .surface import SurfaceValidationError, load_surface, min_return_time, surface_gap_cdf

    try:
        spec = load_surface(args.surface)
    except SurfaceValidationError as exc:
        report = {"valid": False, "errors": exc.errors}
        if args.format == "json":
            _emit(args, to_json(report, _resolved(args)))
        raise UsageError(str(exc)) from exc
    except OSError as exc:
        raise UsageError(f"cannot read {args.surface}: {exc}") from exc
    rmin = min_return_time(spec)
    if args.validate_only:
        _emit(args, to_json({"valid": True, "name": spec.name, "min_return_time": rmin}, _resolved(args)))
        return
    lo, hi, n = args.grid
    x = np.linspace(lo, hi, n)
    cdf = [surface_gap_cdf(spec, float(v)) for v in x]
    payload = {"valid": True, "name": spec.name, "min_return_time": rmin, "x": x.tolist(), "cdf": cdf}
    _table(args, ("x", "cdf"), zip(x, cdf), payload)

    def draw(path):
        from . import plotting

        plotting.plot_cdf(x, cdf, path, title=f"Gap CDF: {spec.name}")

    _figure(args, draw)


def cmd_count(args):
    from .equidist import counting_deviation, fit_power_law
    from .exact import farey_count

    Qs = sorted(args.Qs)
    if Qs[0] < 2:
        raise UsageError("every Q must be >= 2")
    rows = []
    for Q in Qs:
        N = farey_count(Q)
        rows.append((Q, Q * Q, N, N - 1, counting_deviation(Q), counting_deviation(Q, "closed")))
    columns = ("Q", "L", "farey_count", "hits", "deviation", "deviation_closed")
    payload = {"rows": [dict(zip(columns, r)) for r in rows]}
    if len(Qs) >= 2:
        fit = fit_power_law([r[1] for r in rows], [r[4] for r in rows], quantity="counting", Qs=Qs)
        payload["fit"] = fit.report()
    _table(args, columns, rows, payload)

    def draw(path):
        from . import plotting

        plotting.plot_decay([r[1] for r in rows], [r[4] for r in rows], fit.slope, fit.intercept, path,
                            title="Counting deviation", bound=fit.bound)

    if len(Qs) >= 2:
        _figure(args, draw)
    elif args.format == "svg":
        raise UsageError("a plot needs at least two values of Q")


def cmd_equidist(args):
    from .equidist import calibrate_bound, fit_decay

    if min(args.Qs) < 2:
        raise UsageError("every Q must be >= 2")
    fit = fit_decay(args.quantity, args.Qs)
    payload = fit.report()
    if args.quantity == "ks":
        C, bounds, holds = calibrate_bound(fit.Qs, fit.errors, 1.0 / 15.0)
        payload["calibration"] = {"C": C, "bounds": bounds, "holds": holds}
    rows = [(q, L, e) for q, L, e in zip(fit.Qs, fit.lengths, fit.errors)]
    _table(args, ("Q", "L", "error"), rows, payload)

    def draw(path):
        from . import plotting

        plotting.plot_decay(fit.lengths, fit.errors, fit.slope, fit.intercept, path,
                            title=f"{args.quantity} decay", bound=fit.bound)

    _figure(args, draw)


def cmd_sl2(args):
    from . import sl2

    rng = np.random.default_rng(args.seed)
    if args.report == "uak":
        n = min(args.samples, 10**5)
        rows = []
        worst = 0.0
        from .hall import sample_triangle

        aa, bb = sample_triangle(rng, n)
        signs = rng.choice((-1.0, 1.0), size=n)
        mags = 10 ** rng.uniform(-3, 3, size=n)
        for a, b, s in zip(aa.tolist(), bb.tolist(), (signs * mags).tolist()):
            p = sl2.SuspensionPoint(a, b, s)
            c = sl2.uak_decompose(p)
            err = p.element().distance(c.element())
            worst = max(worst, err)
            rows.append((a, b, s, c.u, c.t, c.theta, err))
        worked = sl2.uak_decompose(sl2.SuspensionPoint(1.0, 0.0, 1.0))
        payload = {
            "samples": n,
            "max_frobenius_error": worst,
            "worked_example": {
                "point": [1, 0, 1],
                "u": worked.u,
                "t": worked.t,
                "theta": worked.theta,
                "error_vs_h1": worked.element().distance(sl2.horocycle_unstable(1.0)),
            },
        }
        _table(args, ("a", "b", "s", "u", "t", "theta", "frobenius_error"), rows, payload)
        if args.plot or args.format == "svg":
            def draw(path):
                from . import plotting

                errs = np.array([r[-1] for r in rows])
                ss = np.abs(np.array([r[2] for r in rows]))
                plotting.plot_decay(np.sort(ss), errs[np.argsort(ss)], 0.0, float(np.log(max(worst, 1e-300))),
                                    path, title="UAK reconstruction error vs |s|")

            _figure(args, draw)
        return

    from .hall import region_measure
    from .equidist import return_time_indicator

    if args.format == "svg" or args.plot:
        raise UsageError("the measure report has no figure")
    w = args.width
    tests = [("indicator_R_1_2", return_time_indicator(1.0, 2.0), region_measure(1.0, 2.0))]
    fns = sl2.StepFunction
    for k in range(5):
        f = fns.random(np.random.default_rng([args.seed, k]))
        tests.append((f"step_{k}", f, f.lebesgue_measure()))
    rows = []
    for i, (name, f, m) in enumerate(tests):
        est = sl2.suspension_integral(sl2.thicken(f, w), samples=args.samples, seed=args.seed + i)
        z = (est.value - m) / est.stderr if est.stderr > 0 else math.inf
        rows.append((name, m, est.value, est.stderr, z, abs(z) <= 3))
    payload = {"width": w, "rows": [dict(zip(("name", "m", "mu", "stderr", "z", "within_3sigma"), r)) for r in rows]}
    _table(args, ("name", "m", "mu", "stderr", "z", "within_3sigma"), rows, payload)


HANDLERS = {
    "farey": cmd_farey,
    "orbit": cmd_orbit,
    "hall": cmd_hall,
    "surface": cmd_surface,
    "count": cmd_count,
    "equidist": cmd_equidist,
    "sl2": cmd_sl2,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(argv)
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 2
        HANDLERS[args.command](args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"slopegap: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, TypeError) as exc:
        print(f"slopegap: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - last resort
        print(f"slopegap: internal error: {exc!r}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
