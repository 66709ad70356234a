"""Command line front end: ``train``, ``infer`` and ``trace`` experiments from a YAML file.

Exit codes: 0 on success, 1 on a runtime failure, 2 on an invalid
configuration or mismatched inputs.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import build_dataset, build_network, dump_config, load_config
from .errors import ConfigurationError, DataError, FormatError, ShapeError
from .runtime import RStdpLearning, run_sample, train_epoch

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


def _out_dir(cfg, override) -> Path:
    out = Path(override if override is not None else cfg.run.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg)


def _weight_path(out: Path, stage: int) -> Path:
    return out / "weights" / f"stage_{stage}.snnw"


def _load_all_weights(net, path: Path) -> None:
    if path.is_dir():
        for i, st in enumerate(net.stages):
            f = path / f"stage_{i}.snnw"
            if not f.exists():
                raise FormatError(f"{path}: missing weights for stage {i} ({f.name})")
            io.load_weights(st.connection, f)
    else:
        if len(net.stages) != 1:
            raise FormatError(
                f"{path}: a single weight file only fits a one-stage network; pass the weights directory"
            )
        io.load_weights(net.stages[0].connection, path)


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    if not cfg.run.schedule:
        raise ConfigurationError("run.schedule: train needs at least one entry")
    out = _out_dir(cfg, args.out_dir)
    dump_config(cfg, out / "config.resolved.yaml")
    net = build_network(cfg)
    data = build_dataset(cfg)
    epoch = 0
    with (out / "epochs.csv").open("w", newline="") as fh:
        summary = csv.writer(fh)
        summary.writerow(("epoch", "stage", "mode", "samples", "spikes", "winner_churn", "accuracy"))
        for entry in cfg.run.schedule:
            learning = net.stages[entry.stage].learning
            mode = "train-rstdp" if isinstance(learning, RStdpLearning) else "train-stdp"
            for _ in range(entry.epochs):
                m = train_epoch(net, data, mode, train_stage=entry.stage)
                io.write_metrics_csv(m.records, out / f"metrics_epoch_{epoch:03d}.csv")
                summary.writerow((
                    epoch, entry.stage, mode, m.n_samples, int(m.spike_totals.sum()),
                    f"{m.winner_churn:.6f}", "" if m.accuracy is None else f"{m.accuracy:.6f}",
                ))
                _say(args, f"epoch {epoch} stage {entry.stage} {mode}: {m.summary()}")
                epoch += 1
    (out / "weights").mkdir(exist_ok=True)
    for i, st in enumerate(net.stages):
        io.save_weights(st.connection, _weight_path(out, i))
    _say(args, f"weights written to {out / 'weights'}")
    return EXIT_OK


def cmd_infer(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(cfg, args.out_dir)
    net = build_network(cfg)
    _load_all_weights(net, Path(args.weights))
    data = build_dataset(cfg)
    m = train_epoch(net, data, "inference")
    with (out / "decisions.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("sample", "label", "decision"))
        for i, rec in enumerate(m.records):
            writer.writerow((
                i,
                "" if rec.label is None else rec.label,
                "" if rec.decision is None else rec.decision,
            ))
    io.write_metrics_csv(m.records, out / "metrics_infer.csv")
    _say(args, f"inference: {m.summary()}")
    return EXIT_OK


def cmd_trace(args) -> int:
    cfg = load_config(args.config)
    try:
        neuron = tuple(int(v) for v in args.neuron.split(","))
    except ValueError:
        raise ConfigurationError(f"--neuron must be four integers s,m,y,x, got {args.neuron!r}") from None
    if len(neuron) != 4:
        raise ConfigurationError(f"--neuron must be four integers s,m,y,x, got {args.neuron!r}")
    out = _out_dir(cfg, args.out_dir)
    net = build_network(cfg)
    if args.weights:
        _load_all_weights(net, Path(args.weights))
    data = build_dataset(cfg)
    if not 0 <= args.sample < len(data):
        raise ConfigurationError(f"--sample {args.sample} outside dataset of {len(data)} samples")
    sample, label = data[args.sample]
    rec = run_sample(net, sample, "inference", label=label, trace=neuron)
    tr = rec.trace
    with (out / "trace.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("step", "potential_mV", "adaptation", "spike"))
        for t in range(rec.duration):
            writer.writerow((
                t,
                np.format_float_positional(tr["potential"][t], trim="-"),
                np.format_float_positional(tr["adaptation"][t], trim="-"),
                int(tr["spike"][t]),
            ))
    _say(args, f"trace of neuron {neuron} over sample {args.sample}: {int(tr['spike'].sum())} spikes")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spikestep", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=None, help="override run.output_dir")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[common], help="train the configured network")
    p.add_argument("config")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", parents=[common], help="run inference with saved weights")
    p.add_argument("config")
    p.add_argument("weights", help="weights directory (stage_<i>.snnw) or a single weight file")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("trace", parents=[common], help="record one neuron's membrane trace")
    p.add_argument("config")
    p.add_argument("--neuron", required=True, help="stage,map,y,x")
    p.add_argument("--sample", type=int, default=0)
    p.add_argument("--weights", default=None)
    p.set_defaults(func=cmd_trace)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, FormatError, ShapeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, OSError, ValueError, RuntimeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
