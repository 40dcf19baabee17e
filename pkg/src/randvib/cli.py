"""Command line entry point.

    randvib simulate --model duffing-vdp --b 1 --c 1 --lambda 3.4 --dt 1e-4 --T 1 \\
        --x0 2 --v0 0 --seed 7 --interpretation strat-dpf --stepper euler \\
        --jump-solver ode:64 --emit path,trajectory,ledger,summary --out runs/s7
    randvib converge --dt-list 1e-2,1e-3,1e-4 --out runs/conv
    randvib ensemble --n-paths 100 --interpretations ito,strat-dpf --out runs/ens

``--config FILE`` reads flat ``key=value`` lines using the long option names
(``lambda=3.4``, ``jump-solver=series:15``); flags on the command line win.

Exit codes: 0 success, 2 configuration error, 3 divergence, 4 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ConfigurationError, DivergenceError, OutputError
from .harness import EMIT_CHOICES, JUMP_WORK_MODES, RunConfig, convergence_study, ensemble_run, run_simulation
from .model import MODELS
from .noise import NoiseConfig
from .output import emit_outputs, read_keyvalue, write_failure
from .schemes import Interpretation, JumpSolver, Stepper

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("randvib")


def _csv_list(text):
    return [s.strip() for s in text.split(",") if s.strip()]


def _add_run_options(p):
    p.add_argument("--config", type=Path, help="key=value file with defaults for these options")
    p.add_argument("--model", default="duffing-vdp", choices=sorted(MODELS))
    p.add_argument("--b", type=float, default=1.0, help="Brownian weight")
    p.add_argument("--c", type=float, default=1.0, help="jump weight")
    p.add_argument("--lambda", dest="intensity", type=float, default=3.4, help="jump intensity")
    p.add_argument("--jump-dist", default="standard-normal",
                   help="standard-normal | constant:<v> | uniform:<a>,<b>")
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--x0", type=float, default=2.0)
    p.add_argument("--v0", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--interpretation", default="strat-dpf", choices=[i.value for i in Interpretation])
    p.add_argument("--stepper", default="euler", choices=[s.value for s in Stepper])
    p.add_argument("--jump-solver", default="ode:64", help="ode:<n> | ode-euler:<n> | series:<terms>")
    p.add_argument("--jump-work", default="coupled", choices=JUMP_WORK_MODES,
                   help="jump-work integral for the ledger ('literal' is diagnostic only)")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="randvib",
        description="Simulate a nonlinear oscillator under Gaussian and Poisson white noise "
                    "and audit the energy-work balance.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="one path", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_run_options(p)
    p.add_argument("--emit", default=",".join(EMIT_CHOICES), help="comma list of " + "|".join(EMIT_CHOICES))

    p = sub.add_parser("converge", help="discrepancy versus dt on one refined path",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_run_options(p)
    p.add_argument("--dt-list", default="1e-2,1e-3,1e-4")
    p.add_argument("--interpretations", default="ito,strat-dpf")

    p = sub.add_parser("ensemble", help="many seeds, aggregated discrepancy statistics",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_run_options(p)
    p.add_argument("--n-paths", type=int, default=100)
    p.add_argument("--interpretations", default="ito,strat-dpf")
    p.add_argument("--workers", type=int, default=1)
    return parser


def _config_defaults(subparser, path):
    """Map a key=value file onto the subparser's option destinations."""
    try:
        raw = read_keyvalue(path)
    except (OSError, ValueError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    by_flag = {}
    for action in subparser._actions:
        for opt in action.option_strings:
            if opt.startswith("--"):
                by_flag[opt[2:]] = action
    defaults = {}
    for key, value in raw.items():
        action = by_flag.get(key) or by_flag.get(key.replace("_", "-"))
        if action is None or action.dest == "config":
            raise ConfigurationError(f"{path}: unknown key {key!r}")
        conv = action.type or str
        try:
            defaults[action.dest] = conv(value)
        except ValueError:
            raise ConfigurationError(f"{path}: bad value for {key!r}: {value!r}") from None
    return defaults


def _run_config(args, emit=frozenset(EMIT_CHOICES)):
    noise = NoiseConfig(
        b=args.b, c=args.c, intensity=args.intensity, jump_dist=args.jump_dist,
        T=args.T, dt=args.dt, seed=args.seed,
    )
    return RunConfig(
        noise=noise,
        model_label=args.model,
        interpretation=Interpretation(args.interpretation),
        stepper=Stepper(args.stepper),
        jump_solver=JumpSolver.parse(args.jump_solver),
        initial_x=args.x0,
        initial_v=args.v0,
        output_dir=args.out,
        emit=emit,
        jump_work_mode=args.jump_work,
    )


def _interpretations(text):
    try:
        return [Interpretation(s) for s in _csv_list(text)]
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None


def _prepare_out(path: Path):
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {path}: {exc.strerror or exc}", path=path) from exc


def _cmd_simulate(args):
    emit = frozenset(_csv_list(args.emit))
    if not emit:
        raise ConfigurationError("--emit needs at least one target")
    config = _run_config(args, emit)
    _prepare_out(args.out)
    try:
        result = run_simulation(config)
    except DivergenceError as exc:
        write_failure(exc, args.out)
        raise
    for p in emit_outputs(result, args.out, emit):
        log.info("wrote %s", p)
    led = result.ledger
    print(f"jumps={len(result.path.jumps)} max_abs_discrepancy={led.max_abs_discrepancy:.6g} "
          f"max_rel_discrepancy={led.max_rel_discrepancy:.6g}")


def _cmd_converge(args):
    config = _run_config(args)
    try:
        dts = [float(s) for s in _csv_list(args.dt_list)]
    except ValueError:
        raise ConfigurationError(f"bad --dt-list {args.dt_list!r}") from None
    _prepare_out(args.out)
    rows = convergence_study(config, dts, _interpretations(args.interpretations))
    print(f"{'interpretation':<15}{'dt':>10}{'max_abs':>14}{'max_rel':>12}")
    for r in rows:
        print(f"{r.interpretation:<15}{r.dt:>10.3g}{r.max_abs_discrepancy:>14.6g}{r.max_rel_discrepancy:>12.4g}")


def _cmd_ensemble(args):
    config = _run_config(args)
    _prepare_out(args.out)
    summary = ensemble_run(config, args.n_paths, _interpretations(args.interpretations), args.workers)
    for name, agg in summary.aggregates.items():
        print(f"{name}: ok={agg['n_ok']} diverged={agg['n_diverged']} "
              f"rel median={agg['rel_median']:.4g} p95={agg['rel_p95']:.4g} abs median={agg['abs_median']:.4g}")


COMMANDS = {"simulate": _cmd_simulate, "converge": _cmd_converge, "ensemble": _cmd_ensemble}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config is not None:
            sub = parser._subparsers._group_actions[0].choices[args.command]
            sub.set_defaults(**_config_defaults(sub, args.config))
            args = parser.parse_args(argv)
        COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"diverged at step {exc.step}: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
