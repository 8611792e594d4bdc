"""Command line entry point: ``optoblockade point|sweep|fig|validate``."""

from __future__ import annotations

import argparse
import logging
import math
import sys

import numpy as np

from . import presets
from .analytic import analytic_g2
from .bell import chsh_closed_form, chsh_from_state, mode_transformation_check
from .lindblad import liouvillian, stationarity_residual, steady_state, trace_row
from .model import ModelParams, build_effective_hamiltonian, collapse_operators
from .hilbert import HilbertSpec
from .sweep import (
    OUTPUTS,
    ConfigError,
    SweepSpec,
    apply_value,
    evaluate_point,
    load_config,
    run_sweep,
    write_csv,
    write_json,
)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2


def _parse_sets(pairs):
    out = []
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        try:
            out.append((key.strip(), float(raw)))
        except ValueError:
            raise ConfigError(f"--set {key}: {raw!r} is not a number") from None
    return out


def cmd_point(args) -> int:
    if args.config:
        params, spec, sweep = load_config(args.config)
    else:
        params, spec, sweep = ModelParams(), None, SweepSpec()
    try:
        for key, value in _parse_sets(args.set):
            params = apply_value(params, key, value)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    outputs = tuple(OUTPUTS) if args.all else sweep.outputs
    values, status = evaluate_point(params, outputs, args.engine, spec, sweep.chsh_cross_term)
    if status.startswith("master:solver_error") or "solver_error" in status:
        print(f"solver failure: {status}", file=sys.stderr)
        return EXIT_SOLVER
    width = max(len(k) for k in values)
    for key in sorted(values):
        v = values[key]
        print(f"{key:<{width}}  {'NA' if v is None else format(v, '.10g')}")
    print(f"{'status':<{width}}  {status}")
    return EXIT_OK


def _write(rows, args) -> None:
    write_csv(rows, args.out)
    if args.json:
        write_json(rows, args.json)
    print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)


def cmd_sweep(args) -> int:
    _, _, sweep = load_config(args.config)
    rows = run_sweep(sweep, workers=args.workers)
    _write(rows, args)
    return EXIT_OK


def cmd_fig(args) -> int:
    kwargs = {}
    if args.preset not in ("fig3c", "fig6"):
        kwargs["workers"] = args.workers
    if args.engine:
        if args.preset in ("fig3c", "fig6"):
            raise ConfigError(f"{args.preset} is a time-domain preset and has no engine choice")
        kwargs["engine"] = args.engine
    if args.spot_check:
        if args.preset not in ("fig4", "fig5"):
            raise ConfigError("--spot-check applies to fig4 and fig5 only")
        kwargs["spot_check"] = True
    rows = presets.figure_preset(args.preset, **kwargs)
    _write(rows, args)
    return EXIT_OK


def run_validation(verbose: bool = True) -> bool:
    """Mode-transformation identities plus a small invariant suite."""
    rng = np.random.default_rng(12345)
    results: list[tuple[str, bool, str]] = []

    for theta, phi in [(0.0, 0.0), (math.pi / 4, math.pi / 8)] + [tuple(rng.uniform(0, 2 * math.pi, 2)) for _ in range(8)]:
        rep = mode_transformation_check(theta, phi)
        worst = max(rep.residuals.values())
        results.append((f"mode transformation th={theta:.3f} ph={phi:.3f}", rep.ok, f"{worst:.1e}"))

    spec = HilbertSpec.optical(5)
    params = ModelParams()
    lv = liouvillian(build_effective_hamiltonian(params, spec), collapse_operators(params, spec))
    leak = float(np.max(np.abs(trace_row(spec.dim) @ lv)))
    results.append(("Liouvillian trace preservation", leak < 1e-9, f"{leak:.1e}"))
    rho = steady_state(lv)
    resid = stationarity_residual(lv, rho)
    results.append(("steady-state stationarity", resid < 1e-10, f"{resid:.1e}"))

    spec3 = HilbertSpec.optical(3)
    worst = 0.0
    for _ in range(5):
        g = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
        r = g @ g.conj().T
        r /= np.trace(r)
        worst = max(worst, abs(chsh_from_state(r, spec=spec3) - chsh_closed_form(r, spec3)))
    results.append(("CHSH angle sum vs closed form", worst < 1e-10, f"{worst:.1e}"))

    worst = 0.0
    for _ in range(5):
        p = ModelParams(u1=0.0, u2=0.0, delta1=rng.uniform(-2, 2), j_hop=rng.uniform(0.1, 2))
        p = p.with_(delta2=p.delta1)
        worst = max(worst, max(abs(x - 1) for x in analytic_g2(p)))
    results.append(("harmonic limit g2 = 1 (analytic)", worst < 1e-9, f"{worst:.1e}"))

    ok = all(passed for _, passed, _ in results)
    if verbose:
        for name, passed, detail in results:
            print(f"{'PASS' if passed else 'FAIL'}  {name}  [{detail}]")
    return ok


def cmd_validate(args) -> int:
    return EXIT_OK if run_validation() else EXIT_SOLVER


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="optoblockade", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("point", help="evaluate a single parameter point")
    p.add_argument("--config", help="INI file; only [model], [hilbert] and [sweep] outputs are used")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a model parameter")
    p.add_argument("--engine", choices=("master", "analytic", "both"), default="master")
    p.add_argument("--all", action="store_true", help="report every available output")
    p.set_defaults(func=cmd_point)

    s = sub.add_parser("sweep", help="run the sweep described by a config file")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--json", help="also write a JSON mirror to this path")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    f = sub.add_parser("fig", help="regenerate the data behind a figure")
    f.add_argument("preset", choices=sorted(presets.PRESETS))
    f.add_argument("--out", required=True)
    f.add_argument("--json")
    f.add_argument("--workers", type=int, default=1)
    f.add_argument("--engine", choices=("master", "analytic", "both"))
    f.add_argument("--spot-check", action="store_true", help="add a 5x5 master-equation subgrid (fig4, fig5)")
    f.set_defaults(func=cmd_fig)

    v = sub.add_parser("validate", help="run the built-in identity and invariant checks")
    v.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
