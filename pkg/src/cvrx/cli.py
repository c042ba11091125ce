"""Command-line front end: writes receiver data as CSV or JSON.

Commands: ``sweep``, ``noisy``, ``resources``, ``decompose``, ``pie``,
``converge``. Exit codes: 0 success, 1 numeric failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from functools import partial

import numpy as np

from . import fock, information, receivers
from .decomposition import (
    SCHEMES,
    approximation_error,
    gate_count_comparison,
    receiver_plan,
    resource_table,
)
from .errors import CvrxError
from .noise import DetectorModel, LossModel

RECEIVERS = (
    "helstrom",
    "homodyne",
    "kennedy",
    "opt_disp",
    "opt_disp_squeeze",
    "sh_exact",
    "decomposed",
)
CONVERGE_TARGETS = ("sh_exact", "decomposed", "noisy", "opt_disp_squeeze", "circuit_error")
FLOAT_FMT = "%.12g"


class UsageError(Exception):
    pass


# --- argument helpers --------------------------------------------------------


def parse_grid(text: str, log: bool = False) -> np.ndarray:
    """``start:stop:count`` with inclusive endpoints; a bare number is a one-point grid."""
    parts = str(text).split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        if len(parts) != 3:
            raise ValueError
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"grid {text!r} is not of the form start:stop:count") from None
    if count < 1:
        raise UsageError("grid count must be >= 1")
    if min(start, stop) < 0:
        raise UsageError("mean photon numbers must be nonnegative")
    if count == 1:
        return np.array([start])
    if log:
        if min(start, stop) <= 0:
            raise UsageError("--log needs a strictly positive grid")
        return np.geomspace(start, stop, count)
    return np.linspace(start, stop, count)


def parse_receivers(text: str, order: int) -> list[tuple[str, str, int]]:
    """Return ``(column, kind, order)`` triples; ``sh_exact@M`` selects the order inline."""
    out = []
    for name in (s.strip() for s in str(text).split(",")):
        if not name:
            continue
        kind, _, m = name.partition("@")
        if kind not in RECEIVERS:
            raise UsageError(f"unknown receiver {kind!r}; choose from {', '.join(RECEIVERS)}")
        if m and kind != "sh_exact":
            raise UsageError(f"only sh_exact takes an order suffix, got {name!r}")
        try:
            mm = int(m) if m else order
        except ValueError:
            raise UsageError(f"bad order in {name!r}") from None
        if mm < 1:
            raise UsageError("order must be >= 1")
        out.append((name, kind, mm))
    if not out:
        raise UsageError("no receivers requested")
    if len({c for c, _, _ in out}) != len(out):
        raise UsageError("duplicate receiver columns")
    return out


def parse_annotations(items) -> list[tuple[str, float]]:
    out = []
    for item in items or []:
        label, sep, value = str(item).partition("=")
        try:
            if not sep or not label:
                raise ValueError
            out.append((label, float(value)))
        except ValueError:
            raise UsageError(f"annotation {item!r} is not LABEL=NBAR") from None
    return out


def _dim_arg(text: str) -> int:
    d = int(text)
    if d < 2:
        raise argparse.ArgumentTypeError("dimension must be >= 2")
    return d


def _positive_int(text: str) -> int:
    k = int(text)
    if k < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return k


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT % v
    return str(v)


# --- receiver evaluation (module level so worker processes can pickle it) ----


def _result_for(kind: str, alpha: float, order: int, d: int, iterations: int, restarts: int, seed: int):
    if kind == "helstrom":
        return receivers.ErrorRateResult.symmetric(receivers.helstrom(alpha))
    if kind == "homodyne":
        return receivers.ErrorRateResult.symmetric(receivers.homodyne(alpha))
    if kind == "kennedy":
        return receivers.kennedy_result(alpha)
    if kind == "opt_disp":
        return receivers.optimized_displacement(alpha, d).result
    if kind == "opt_disp_squeeze":
        return receivers.optimized_displacement_squeezing(alpha, d, restarts=restarts, seed=seed).result
    if kind == "sh_exact":
        return receivers.sh_exact(alpha, order, d)
    return receivers.decomposed(alpha, iterations, d)


def _scalar_for(kind, alpha, order, d, iterations, restarts, seed) -> float:
    # the closed forms are returned directly so a column matches its formula bit for bit
    if kind == "helstrom":
        return receivers.helstrom(alpha)
    if kind == "homodyne":
        return receivers.homodyne(alpha)
    if kind == "kennedy":
        return receivers.kennedy(alpha)
    if kind == "opt_disp":
        return receivers.optimized_displacement(alpha, d).p
    if kind == "opt_disp_squeeze":
        return receivers.optimized_displacement_squeezing(alpha, d, restarts=restarts, seed=seed).p
    return _result_for(kind, alpha, order, d, iterations, restarts, seed).p_err


def _sweep_point(nbar: float, recs, d: int, iterations: int, restarts: int, seed: int) -> dict:
    alpha = math.sqrt(nbar)
    row = {"nbar": nbar}
    for col, kind, order in recs:
        row[col] = _scalar_for(kind, alpha, order, d, iterations, restarts, seed)
    return row


def _pie_point(nbar: float, recs, d: int, iterations: int, restarts: int, seed: int) -> dict:
    alpha = math.sqrt(nbar)
    row = {"nbar": nbar, "bound": information.pie_bound(alpha)}
    for col, kind, order in recs:
        res = _result_for(kind, alpha, order, d, iterations, restarts, seed)
        row[col] = information.pie(information.BinaryChannel.from_result(res), nbar)
    return row


def _noisy_point(nbar: float, opts: dict) -> dict:
    alpha = math.sqrt(nbar)
    cfg = receivers.ReceiverConfig(
        alpha,
        iterations=opts["iterations"],
        detector=DetectorModel(nu=opts["nu"], eta_q=opts["eta_q"]),
        loss=LossModel(eta_bs=opts["eta_bs"]),
        mode=opts["mode"],
        sandwich=opts["sandwich"],
        d=opts["d"],
    )
    row = {"nbar": nbar}
    if not opts["mitigate"]:
        row["unmitigated"] = receivers.decomposed_noisy(cfg).p_err
        return row
    mit = receivers.optimize_squeezing_mitigation(
        cfg, restarts=opts["restarts"], seed=opts["seed"], max_evals=opts["max_evals"]
    )
    row["unmitigated"] = mit.unmitigated.p_err
    row["mitigated"] = mit.result.p_err
    row["gain"] = mit.unmitigated.p_err - mit.result.p_err
    row["evaluations"] = mit.report.evaluations
    row["converged"] = mit.converged
    for i, r in enumerate(mit.params):
        row[f"r{i}"] = r
    return row


def _map_grid(func, grid, jobs: int) -> list[dict]:
    points = [float(x) for x in grid]
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(func, points))
    else:
        rows = [func(x) for x in points]
    # completion order never leaks into the output
    return sorted(rows, key=lambda r: r["nbar"])


# --- output -----------------------------------------------------------------


def render_rows(rows: list[dict], fmt: str, meta: dict | None = None, comments=()) -> str:
    if fmt == "json":
        doc = {"meta": meta or {}, "rows": rows, "annotations": [dict(label=l, nbar=n) for l, n in comments]}
        return json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    columns = list(rows[0]) if rows else []
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in columns])
    for key, value in (meta or {}).items():
        buf.write(f"# {key}={_fmt(value)}\n")
    for label, nbar in comments:
        buf.write(f"# annotate {label} nbar={_fmt(nbar)}\n")
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def _emit(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# --- commands ---------------------------------------------------------------


def cmd_sweep(args) -> str:
    recs = parse_receivers(args.receivers, args.order)
    grid = parse_grid(args.nbar, args.log)
    d = args.dim or fock.default_dim()
    func = partial(_sweep_point, recs=recs, d=d, iterations=args.iterations, restarts=args.restarts, seed=args.seed)
    rows = _map_grid(func, grid, args.jobs)
    meta = {"dim": d, "iterations": args.iterations, "seed": args.seed}
    return render_rows(rows, args.format, meta, parse_annotations(args.annotate))


def cmd_noisy(args) -> str:
    grid = parse_grid(args.nbar, args.log)
    d = args.dim or fock.default_dim()
    opts = dict(
        iterations=args.iterations,
        nu=args.nu,
        eta_q=args.eta_q,
        eta_bs=args.eta_bs,
        mode=args.mode,
        sandwich=args.sandwich,
        d=d,
        mitigate=args.mitigate,
        restarts=args.restarts,
        seed=args.seed,
        max_evals=args.max_evals,
    )
    # fail on bad noise parameters before any worker starts
    DetectorModel(nu=args.nu, eta_q=args.eta_q)
    LossModel(eta_bs=args.eta_bs)
    rows = _map_grid(partial(_noisy_point, opts=opts), grid, args.jobs)
    meta = {
        "dim": d,
        "iterations": args.iterations,
        "eta_bs": args.eta_bs,
        "eta_q": args.eta_q,
        "nu": args.nu,
        "mitigate": args.mitigate,
        "mode": args.mode,
        "sandwich": args.sandwich,
        "seed": args.seed,
    }
    return render_rows(rows, args.format, meta)


def cmd_resources(args) -> str:
    if args.compare:
        grid = parse_grid(args.nbar, args.log)
        if np.any(grid <= 0):
            raise UsageError("the gate-count comparison needs positive mean photon numbers")
        rows = [asdict(r) for r in gate_count_comparison(np.sqrt(grid), args.budget)]
        return render_rows(rows, args.format, {"error_budget": args.budget})
    schemes = SCHEMES if args.scheme == "both" else (args.scheme,)
    try:
        ts = [float(t) for t in str(args.t).split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad --t list {args.t!r}") from None
    if not ts or min(ts) <= 0:
        raise UsageError("--t needs positive strengths")
    rows = []
    for scheme in schemes:
        for t in ts:
            c = resource_table(scheme, t)
            rows.append({"scheme": scheme, "t_elem": t, "linear": c.linear, "quadratic": c.quadratic, "cubic": c.cubic})
    return render_rows(rows, args.format)


def cmd_decompose(args) -> str:
    if (args.alpha is None) == (args.nbar is None):
        raise UsageError("give exactly one of --alpha and --nbar")
    alpha = args.alpha if args.alpha is not None else math.sqrt(float(args.nbar))
    plan = receiver_plan(alpha, args.iterations, args.scheme)
    seq = plan.sequence()
    if args.format == "json":
        doc = {
            "alpha": alpha,
            "scheme": plan.scheme,
            "t_total": plan.t_total,
            "iterations": plan.iterations,
            "gates": [{"kind": g.kind, "strength": g.strength} for g in seq],
        }
        return json.dumps(doc, indent=2) + "\n"
    return seq.render()


def cmd_pie(args) -> str:
    recs = parse_receivers(args.receivers, args.order)
    grid = parse_grid(args.nbar, args.log)
    if np.any(grid <= 0):
        raise UsageError("photon information efficiency needs positive mean photon numbers")
    d = args.dim or fock.default_dim()
    func = partial(_pie_point, recs=recs, d=d, iterations=args.iterations, restarts=args.restarts, seed=args.seed)
    rows = _map_grid(func, grid, args.jobs)
    return render_rows(rows, args.format, {"dim": d, "iterations": args.iterations, "seed": args.seed})


def _converge_compute(args, alpha: float):
    if args.target == "sh_exact":
        return lambda d: receivers.sh_exact(alpha, args.order, d).p_err
    if args.target == "decomposed":
        return lambda d: receivers.decomposed(alpha, args.iterations, d).p_err
    if args.target == "noisy":
        return lambda d: receivers.decomposed_noisy(
            receivers.ReceiverConfig.reference_noise(alpha, iterations=args.iterations, d=d)
        ).p_err
    if args.target == "opt_disp_squeeze":
        return lambda d: receivers.optimized_displacement_squeezing(alpha, d, seed=args.seed).p
    # circuit_error: block fixed at the base dimension so doubling compares like with like
    k = fock.low_block(args.dim or fock.default_dim())
    return lambda d: approximation_error(receiver_plan(alpha, args.iterations), d, k)


def cmd_converge(args) -> str:
    grid = parse_grid(args.nbar, args.log)
    d = args.dim or fock.default_dim()
    rows = []
    for nbar in grid:
        rep = fock.doubling_check(_converge_compute(args, math.sqrt(nbar)), d, args.tol)
        rows.append(
            {
                "target": args.target,
                "nbar": float(nbar),
                "dim": rep.dim,
                "value": rep.value,
                "doubled_dim": rep.doubled_dim,
                "doubled_value": rep.doubled_value,
                "delta": rep.delta,
                "converged": rep.converged,
            }
        )
    if args.strict and not all(r["converged"] for r in rows):
        args.exit_code = 1
    return render_rows(rows, args.format, {"tol": args.tol})


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of flag values; command-line flags win")
    common.add_argument("--dim", type=_dim_arg, default=None, help="Fock dimension (default: CVRX_DEFAULT_DIM or 40)")
    common.add_argument("-o", "--output", default=None, help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=0, help="seed for optimizer restarts")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--nbar", default="0.01:0.5:50", help="mean photon number grid start:stop:count")
    grid.add_argument("--log", action="store_true", help="logarithmic grid spacing")
    grid.add_argument("--jobs", type=_positive_int, default=1, help="worker processes")
    grid.add_argument("--iterations", type=_positive_int, default=10, help="splitting steps K")

    p = argparse.ArgumentParser(prog="cvrx", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", parents=[common, grid], help="error rates over a photon-number grid")
    s.add_argument("--receivers", default="helstrom,homodyne,kennedy", help=f"comma list of {', '.join(RECEIVERS)}")
    s.add_argument("--order", type=_positive_int, default=1, help="order M for sh_exact")
    s.add_argument("--restarts", type=int, default=4, help="random restarts for opt_disp_squeeze")
    s.add_argument("--annotate", action="append", metavar="LABEL=NBAR", help="add a marker comment line")
    s.set_defaults(func=cmd_sweep)

    n = sub.add_parser("noisy", parents=[common, grid], help="decomposed receiver with loss and detector noise")
    n.set_defaults(nbar="0.05:0.3:6")
    n.add_argument("--eta-bs", type=float, default=0.01, help="beamsplitter reflectivity per cubic gate")
    n.add_argument("--eta-q", type=float, default=0.8, help="detector quantum efficiency")
    n.add_argument("--nu", type=float, default=0.001, help="dark-count parameter")
    n.add_argument("--mitigate", action="store_true", help="optimise squeezing before each cubic gate")
    n.add_argument("--mode", choices=receivers.MITIGATION_MODES, default="position")
    n.add_argument("--sandwich", action="store_true", help="undo each squeezer after its cubic gate")
    n.add_argument("--restarts", type=int, default=2)
    n.add_argument("--max-evals", type=_positive_int, default=400, help="evaluation budget per start")
    n.set_defaults(func=cmd_noisy)

    r = sub.add_parser("resources", parents=[common], help="gate counts per scheme")
    r.add_argument("--scheme", choices=SCHEMES + ("both",), default="both")
    r.add_argument("--t", default="0.1,0.01,0.001", help="comma list of elementary strengths")
    r.add_argument("--compare", action="store_true", help="model gate-count comparison over --nbar instead")
    r.add_argument("--nbar", default="0.001:0.3:30")
    r.add_argument("--log", action="store_true")
    r.add_argument("--budget", type=float, default=0.01, help="total approximation-error budget for --compare")
    r.set_defaults(func=cmd_resources)

    g = sub.add_parser("decompose", parents=[common], help="canonical gate listing for the receiver")
    g.add_argument("--alpha", type=float, default=None)
    g.add_argument("--nbar", type=float, default=None)
    g.add_argument("--iterations", type=_positive_int, default=10)
    g.add_argument("--scheme", choices=SCHEMES, default="splitting")
    g.set_defaults(func=cmd_decompose)

    q = sub.add_parser("pie", parents=[common, grid], help="photon information efficiency")
    q.set_defaults(nbar="0.001:0.5:30")
    q.add_argument("--receivers", default="decomposed,kennedy,homodyne")
    q.add_argument("--order", type=_positive_int, default=1)
    q.add_argument("--restarts", type=int, default=4)
    q.set_defaults(func=cmd_pie)

    c = sub.add_parser("converge", parents=[common, grid], help="dimension-doubling convergence study")
    c.set_defaults(nbar="0.05")
    c.add_argument("--target", choices=CONVERGE_TARGETS, default="sh_exact")
    c.add_argument("--order", type=_positive_int, default=1)
    c.add_argument("--tol", type=float, default=1e-8)
    c.add_argument("--strict", action="store_true", help="exit 1 when any point fails to converge")
    c.set_defaults(func=cmd_converge)
    return p


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config {args.config!r}: {exc}")
    if not isinstance(cfg, dict):
        parser.error("config file must hold a JSON object")
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in subparser._actions}
    values = {}
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest in ("config", "func", "command") or dest not in known:
            parser.error(f"unknown config key {key!r} for {args.command}")
        values[dest] = value
    subparser.set_defaults(**values)
    # parse again so explicit flags override the file
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text = args.func(args)
    except UsageError as exc:
        print(f"cvrx {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (CvrxError, ArithmeticError) as exc:
        print(f"cvrx {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"cvrx {args.command}: error: {exc}", file=sys.stderr)
        return 2
    _emit(text, args.output)
    code = getattr(args, "exit_code", 0)
    if code:
        print(f"cvrx {args.command}: not converged within tolerance", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
