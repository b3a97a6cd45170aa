"""Command-line front end.

Exit codes: 0 success, 1 runtime or verification failure, 2 usage error.
Settings are resolved as defaults < ``--config`` JSON file < explicit flags;
``EPHUNT_THREADS`` is consulted when no thread count is given.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .errors import EPHuntError, EvenNRejected, InvalidSpec
from .hunt import SweepSpec, detect_eps, make_grid, run_sweep, scaling_run
from .io import (
    RunConfig,
    curve_from_csv,
    curve_to_csv,
    curve_to_json,
    emit_plot_data,
    report_to_json,
    scaling_fit_json,
    scaling_to_csv,
    write_json,
)
from .models import SshGroundState, ToyModel
from .verify import format_report, run_checks

log = logging.getLogger("ephunt")


class UsageError(Exception):
    pass


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


S = argparse.SUPPRESS


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--config", default=S, help="JSON run configuration; flags override it")
    g.add_argument("--out", default=S, help="output directory (default: .)")
    g.add_argument("--format", choices=("csv", "json"), default=S)
    g.add_argument("--epsilon", type=float, default=S, help="parameter step (default 1e-4)")
    g.add_argument("--richardson", type=_bool, default=S, help="Richardson extrapolation (default true)")
    g.add_argument("--threads", type=int, default=S)
    g.add_argument("--plot", action="store_const", const=True, default=S, help="also write plot data")
    g.add_argument("-v", "--verbose", action="store_true", default=False)

    p = argparse.ArgumentParser(prog="ephunt", description="Fidelity susceptibility and exceptional-point hunting")
    sub = p.add_subparsers(dest="command", required=True)

    toy = sub.add_parser("toy-sweep", parents=[common], help="sweep r for the 2x2 PT-symmetric model")
    toy.add_argument("--r-min", dest="grid_min", type=float, default=S)
    toy.add_argument("--r-max", dest="grid_max", type=float, default=S)
    toy.add_argument("--step", type=float, default=S)
    toy.add_argument("--band", type=int, default=S)
    toy.add_argument("--find-eps", dest="find_eps", action="store_const", const=True, default=S)
    toy.add_argument("--threshold", type=float, default=S)

    ssh = sub.add_parser("ssh-sweep", parents=[common], help="sweep w for the non-Hermitian SSH ring")
    ssh.add_argument("--n", type=int, default=S)
    ssh.add_argument("--u", type=float, default=S)
    ssh.add_argument("--v", type=float, default=S)
    ssh.add_argument("--w-min", dest="grid_min", type=float, default=S)
    ssh.add_argument("--w-max", dest="grid_max", type=float, default=S)
    ssh.add_argument("--step", type=float, default=S)
    ssh.add_argument("--method", choices=("auto", "closed-form", "fd"), default=S)
    ssh.add_argument("--find-eps", dest="find_eps", action="store_const", const=True, default=S)
    ssh.add_argument("--threshold", type=float, default=S)

    sc = sub.add_parser("scaling", parents=[common], help="chi0 at the Hermitian critical point versus N")
    sc.add_argument("--n", dest="n_list", type=_int_list, default=S, help="comma-separated odd sizes")
    sc.add_argument("--v", type=float, default=S)

    ep = sub.add_parser("ep-find", parents=[common], help="detect EPs in an existing sweep CSV")
    ep.add_argument("--input", default=S, required=False)
    ep.add_argument("--model", choices=("toy", "ssh"), default=S)
    ep.add_argument("--n", type=int, default=S)
    ep.add_argument("--u", type=float, default=S)
    ep.add_argument("--v", type=float, default=S)
    ep.add_argument("--threshold", type=float, default=S)

    ver = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    ver.add_argument("--seed", type=int, default=S)
    ver.add_argument("--perturb-metric", dest="perturb_metric", type=float, default=S)
    return p


_PARAM_KEYS = ("n", "u", "v")


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    given = {k: v for k, v in vars(ns).items() if k not in ("verbose",)}
    if "config" in given:
        try:
            cfg = RunConfig.load(given.pop("config"))
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
    else:
        cfg = RunConfig()
    cfg.command = given.pop("command")
    params = dict(cfg.params)
    for key in _PARAM_KEYS:
        if key in given:
            params[key] = given.pop(key)
    cfg.params = params
    for key, value in given.items():
        setattr(cfg, key, value)
    if "threads" not in vars(ns) and os.environ.get("EPHUNT_THREADS"):
        try:
            cfg.threads = int(os.environ["EPHUNT_THREADS"])
        except ValueError:
            raise UsageError("EPHUNT_THREADS must be an integer")
    return cfg


def _require(cfg: RunConfig, *names: str) -> None:
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise UsageError(f"missing required option(s): {', '.join(missing)}")


def _param(cfg: RunConfig, key: str, default=None):
    if key in cfg.params:
        return cfg.params[key]
    if default is None:
        raise UsageError(f"missing required option --{key}")
    return default


def _grid(cfg: RunConfig):
    _require(cfg, "grid_min", "grid_max", "step")
    try:
        return make_grid(cfg.grid_min, cfg.grid_max, cfg.step)
    except InvalidSpec as exc:
        raise UsageError(str(exc)) from exc


def _write_curve(cfg: RunConfig, curve, stem: str) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.format == "json":
        path = write_json(curve_to_json(curve), out / f"{stem}.json")
    else:
        path = curve_to_csv(curve, out / f"{stem}.csv")
    if cfg.plot:
        emit_plot_data(curve, out / f"{stem}.dat")
    return path


def _hunt(cfg: RunConfig, curve, model, stem: str) -> None:
    report = detect_eps(curve, model, cfg.threshold)
    path = write_json(report_to_json(report), Path(cfg.out) / f"{stem}.json")
    print(f"{len(report)} exceptional point(s) -> {path}")
    for c in report.candidates:
        print(f"  {curve.parameter} = {c.lambda_ep:.10f}  bracket [{c.bracket[0]:.6g}, {c.bracket[1]:.6g}]")
    if cfg.plot and report.candidates:
        emit_plot_data(report, Path(cfg.out) / f"{stem}.dat")


def cmd_toy_sweep(cfg: RunConfig) -> int:
    grid = _grid(cfg)
    model = ToyModel()
    curve = run_sweep(SweepSpec(model, grid, cfg.band, cfg.epsilon, cfg.richardson, threads=cfg.threads))
    path = _write_curve(cfg, curve, "toy_sweep")
    print(f"{len(curve)} rows -> {path}")
    if cfg.find_eps:
        _hunt(cfg, curve, model, "toy_eps")
    return 0


def cmd_ssh_sweep(cfg: RunConfig) -> int:
    grid = _grid(cfg)
    try:
        model = SshGroundState(_param(cfg, "u"), _param(cfg, "v", 1.0), float(grid[0]), _param(cfg, "n"))
        spec = SweepSpec(model, grid, 0, cfg.epsilon, cfg.richardson, cfg.method, cfg.threads)
    except InvalidSpec as exc:
        raise UsageError(str(exc)) from exc
    curve = run_sweep(spec)
    path = _write_curve(cfg, curve, "ssh_sweep")
    print(f"{len(curve)} rows -> {path}")
    if cfg.find_eps:
        _hunt(cfg, curve, model, "ssh_eps")
    return 0


def cmd_scaling(cfg: RunConfig) -> int:
    if not cfg.n_list:
        raise UsageError("--n is required")
    try:
        result = scaling_run(cfg.n_list, _param(cfg, "v", 1.0))
    except (EvenNRejected, InvalidSpec) as exc:
        raise UsageError(str(exc)) from exc
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    scaling_to_csv(result, out / "scaling.csv")
    write_json(scaling_fit_json(result), out / "scaling_fit.json")
    for n, chi in zip(result.n, result.chi0):
        print(f"N = {n:5d}  chi0 = {chi:.12g}")
    if result.slope is None:
        print("single size: fit skipped")
    else:
        print(f"slope = {result.slope:.12g}  intercept = {result.intercept:.3g}")
    return 0


def cmd_ep_find(cfg: RunConfig) -> int:
    _require(cfg, "input")
    try:
        curve = curve_from_csv(cfg.input)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    kind = cfg.model or curve.model
    if kind == "toy":
        model = ToyModel()
    elif kind == "ssh":
        try:
            model = SshGroundState(_param(cfg, "u"), _param(cfg, "v", 1.0), 1.0, _param(cfg, "n"))
        except InvalidSpec as exc:
            raise UsageError(str(exc)) from exc
    else:
        raise UsageError("cannot tell which model produced the input; pass --model")
    Path(cfg.out).mkdir(parents=True, exist_ok=True)
    _hunt(cfg, curve, model, "eps")
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    results = run_checks(cfg.seed, cfg.perturb_metric)
    print(format_report(results))
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {
    "toy-sweep": cmd_toy_sweep,
    "ssh-sweep": cmd_ssh_sweep,
    "scaling": cmd_scaling,
    "ep-find": cmd_ep_find,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(ns)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"ephunt {ns.command}: error: {exc}", file=sys.stderr)
        return 2
    except (EPHuntError, OSError, ValueError) as exc:
        print(f"ephunt {ns.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
