"""Command line entry point: ``farf run | sweep | ablate | infer-schema``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .core import ConfigError, SchemaError
from .dataio import DatasetConfig, LoadError, infer_domains
from .harness import (
    DEFAULT_ALPHAS, LEARNERS, RunConfig, ablate, dataset_config_path, dumps_json, run, sweep_alpha,
    write_table,
)
from .sampling import MODES

log = logging.getLogger("farf")

# flag name -> RunConfig field
_RUN_FLAGS = {
    "data": "data", "data_dir": "data_dir", "learner": "learner", "m": "m", "alpha": "alpha",
    "mode": "mode", "seed": "seed", "window": "window", "delta": "delta", "tie": "tie",
    "grace": "grace", "bins": "bins", "drift_delta": "drift_delta", "criterion": "criterion",
    "out": "out", "dump_predictions": "dump_predictions", "plot": "plot",
}


def _float_list(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--config", help="JSON run config; explicit flags override it")
    p.add_argument("--data", default=S, help="dataset config JSON, preset name (adult, census) "
                   "or synth:stationary / synth:flip")
    p.add_argument("--data-dir", default=S, help="directory holding the raw data files")
    p.add_argument("--learner", choices=LEARNERS, default=S)
    p.add_argument("--m", type=int, default=S, help="ensemble size")
    p.add_argument("--alpha", type=float, default=S, help="custom sampling ratio")
    p.add_argument("--mode", choices=MODES, default=S, help="sampling mode")
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--window", type=int, default=S, help="instances per logged window")
    p.add_argument("--delta", type=float, default=S, help="Hoeffding bound confidence")
    p.add_argument("--tie", type=float, default=S, help="tie threshold")
    p.add_argument("--grace", type=float, default=S, help="instances between split attempts")
    p.add_argument("--bins", type=int, default=S, help="numeric histogram bins")
    p.add_argument("--drift-delta", type=float, default=S, help="ADWIN confidence")
    p.add_argument("--criterion", choices=("fairness", "accuracy"), default=S)
    p.add_argument("--out", default=S, help="output directory")
    p.add_argument("--dump-predictions", action="store_true", default=S)
    p.add_argument("--plot", action="store_true", default=S, help="also render PNG figures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="farf", description="Fair and adaptive random forests "
                                     "for discriminated data streams.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="prequential run of one learner")
    _add_run_flags(p_run)

    p_sweep = sub.add_parser("sweep", help="custom sampling ratio sweep")
    _add_run_flags(p_sweep)
    p_sweep.add_argument("--alphas", type=_float_list, default=list(DEFAULT_ALPHAS))
    p_sweep.add_argument("--seeds", type=_int_list, default=None,
                         help="average over these seeds (default: --seed)")

    p_abl = sub.add_parser("ablate", help="sampling strategy comparison")
    _add_run_flags(p_abl)
    p_abl.add_argument("--seeds", type=_int_list, default=None)

    p_inf = sub.add_parser("infer-schema", help="fill empty nominal domains from the data")
    p_inf.add_argument("dataset", help="dataset config JSON or preset name")
    p_inf.add_argument("--data-dir", default=None)
    p_inf.add_argument("--out", default=None, help="write the completed config here (default stdout)")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    base = {}
    if getattr(args, "config", None):
        try:
            base = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(base, dict):
            raise ConfigError("config file must hold a JSON object")
    for flag, name in _RUN_FLAGS.items():
        if hasattr(args, flag):
            base[name] = getattr(args, flag)
    cfg = RunConfig.from_dict(base)
    cfg.validate()
    return cfg


def _echo(cfg: RunConfig) -> None:
    text = dumps_json(cfg.to_dict())
    sys.stdout.write(text)
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "resolved_config.json").write_text(text)


def _cmd_run(args) -> int:
    cfg = resolve_config(args)
    _echo(cfg)
    result = run(cfg)
    if not cfg.out:
        sys.stdout.write(dumps_json(result.summary))
    return 0


def _cmd_sweep(args) -> int:
    cfg = resolve_config(args)
    _echo(cfg)
    if not args.alphas:
        raise ConfigError("alpha sweep needs at least one alpha")
    rows = sweep_alpha(dataclasses.replace(cfg, out=None), args.alphas, args.seeds)
    _emit_table(cfg, rows, "alpha", "sweep")
    return 0


def _cmd_ablate(args) -> int:
    cfg = resolve_config(args)
    _echo(cfg)
    rows = ablate(dataclasses.replace(cfg, out=None), args.seeds)
    _emit_table(cfg, rows, "strategy", "ablation")
    return 0


def _emit_table(cfg: RunConfig, rows: list, key: str, stem: str) -> None:
    doc = [{key: k, **s} for k, s in rows]
    if not cfg.out:
        sys.stdout.write(dumps_json(doc))
        return
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_table(rows, key, out / f"{stem}.csv")
    (out / f"{stem}.json").write_text(dumps_json(doc))
    if cfg.plot:
        from . import report
        draw = report.plot_sweep if stem == "sweep" else report.plot_ablation
        draw(rows, out / f"{stem}.png")


def _cmd_infer(args) -> int:
    cfg = DatasetConfig.from_json(dataset_config_path(args.dataset))
    cfg.schema = infer_domains(cfg, args.data_dir)
    text = dumps_json(cfg.to_dict())
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "ablate": _cmd_ablate, "infer-schema": _cmd_infer}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, SchemaError) as exc:
        print(f"farf: config error: {exc}", file=sys.stderr)
        return 2
    except (LoadError, OSError, RuntimeError, ValueError) as exc:
        print(f"farf: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
