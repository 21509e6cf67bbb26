"""``quench-echo`` command line.

Exit status: 0 when every row succeeded, 2 when some rows failed or the run
was interrupted, 1 for usage and configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__, selftest
from .errors import QuenchEchoError, ValidationError
from .fidelity import DEFAULT_DELTA
from .sweep import (
    FIDELITY_HEADER,
    SCALING_HEADER,
    SweepConfig,
    meta_path,
    run_fidelity_compare,
    run_scaling,
    run_sweep,
    table_csv,
)

EXIT_OK, EXIT_USAGE, EXIT_PARTIAL = 0, 1, 2

log = logging.getLogger("quench_echo")


def _add_config_args(p):
    p.add_argument("--config", required=True, type=Path, help="JSON sweep configuration")
    p.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    p.add_argument("--stdout", action="store_true", help="write the CSV to standard output")
    p.add_argument("--output", help="override output_path")
    p.add_argument("--size", type=int, help="override size (L or N)")
    p.add_argument("--lambda-i", type=float, help="override lambda_i")
    p.add_argument("--grid", nargs=3, metavar=("START", "STOP", "COUNT"), help="override lambda_f_grid")
    p.add_argument("--derivative-step", type=float, help="override derivative_step")
    p.add_argument("--degeneracy-tol", type=float, help="override degeneracy_tol")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quench-echo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-q", "--quiet", action="store_true", help="suppress progress messages")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="L_bar, eta and chi over a grid of final parameters")
    _add_config_args(p)
    p.add_argument("--record-wall-time", action="store_true", help="store wall time in the meta file")

    p = sub.add_parser("scaling", help="peak location/height of the transition signal versus size")
    _add_config_args(p)
    p.add_argument("--sizes", type=int, nargs="+", required=True)

    p = sub.add_parser("fidelity", help="chi_delta from finite quenches versus 4 chi_F")
    _add_config_args(p)
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)

    sub.add_parser("selftest", help="run the oracle-equivalence checks")
    return parser


def load_config(args) -> SweepConfig:
    cfg = SweepConfig.from_json(args.config)
    overrides = {}
    if args.output is not None:
        overrides["output_path"] = args.output
    if args.size is not None:
        overrides["size"] = args.size
    if args.lambda_i is not None:
        overrides["lambda_i"] = args.lambda_i
    if args.grid is not None:
        start, stop, count = args.grid
        try:
            overrides["lambda_f_grid"] = (float(start), float(stop), int(count))
        except ValueError:
            raise ValidationError(f"--grid expects START STOP COUNT, got {args.grid}") from None
    if args.derivative_step is not None:
        overrides["derivative_step"] = args.derivative_step
    if args.degeneracy_tol is not None:
        overrides["degeneracy_tol"] = args.degeneracy_tol
    return cfg.replace(**overrides) if overrides else cfg


def _emit(text: str, cfg: SweepConfig, to_stdout: bool, meta: str | None = None):
    if to_stdout or cfg.output_path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        out = Path(cfg.output_path)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        log.info("wrote %s", out)
    if meta is not None and cfg.output_path is not None:
        mp = meta_path(cfg.output_path)
        mp.parent.mkdir(parents=True, exist_ok=True)
        mp.write_text(meta)
        log.info("wrote %s", mp)


def cmd_sweep(args) -> int:
    cfg = load_config(args)
    res = run_sweep(cfg, threads=args.threads, record_wall_time=args.record_wall_time)
    _emit(res.to_csv(), cfg, args.stdout, res.meta_json())
    return EXIT_PARTIAL if res.failed or res.partial else EXIT_OK


def cmd_scaling(args) -> int:
    cfg = load_config(args)
    table = run_scaling(cfg, args.sizes, threads=args.threads)
    _emit(table_csv(SCALING_HEADER, ((r.size, r.peak_location, r.peak_height) for r in table)), cfg, args.stdout)
    return EXIT_OK


def cmd_fidelity(args) -> int:
    cfg = load_config(args)
    table = run_fidelity_compare(cfg, delta=args.delta, threads=args.threads)
    _emit(table_csv(FIDELITY_HEADER, table), cfg, args.stdout)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(asctime)s %(levelname)s %(message)s",
    )
    if args.command == "selftest":
        return EXIT_OK if selftest.run(sys.stdout) else EXIT_PARTIAL
    handler = {"sweep": cmd_sweep, "scaling": cmd_scaling, "fidelity": cmd_fidelity}[args.command]
    try:
        return handler(args)
    except (ValidationError, OSError) as exc:
        print(f"quench-echo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QuenchEchoError as exc:
        print(f"quench-echo: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    except KeyboardInterrupt:
        print("quench-echo: interrupted", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
