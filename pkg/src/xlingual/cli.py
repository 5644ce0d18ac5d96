"""Command-line surface: gen, train, eval, ablate-parallel, report, project.

Exit codes: 0 success, 2 config or precondition problems, 3 data and
artifact problems, 4 training divergence. Malformed input files never
produce a traceback; they map to code 3 with a path-and-line message.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, experiment
from .config import ExperimentConfig, load_config
from .errors import (
    ConfigError,
    ContractError,
    CorruptCheckpointError,
    DataFormatError,
    DegenerateVectorError,
    EmptySentenceError,
    LexiconError,
    NotFittedError,
    ShapeError,
    TrainingDivergenceError,
    UndefinedCorrelationError,
    VocabularyError,
)


def _resolve_out(args, config: ExperimentConfig) -> Path:
    out = args.out or config.paths.out_dir
    if out is None:
        raise ConfigError("no output directory: pass --out or set paths.out_dir")
    return Path(out)


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def cmd_gen(args) -> int:
    config = load_config(args.config, seed_override=args.seed)
    corpus_dir = _resolve_out(args, config) / "corpus"
    result = experiment.generate_corpus(config, corpus_dir)
    total = sum(result["counts"].values())
    _say(args, f"wrote {len(result['files'])} corpora ({total} records) to {corpus_dir}")
    return 0


def cmd_train(args) -> int:
    config = load_config(args.config, seed_override=args.seed)
    root = _resolve_out(args, config)
    corpus_dir = Path(args.corpus) if args.corpus else root / "corpus"
    out_dir = root / "train"
    result = experiment.run_training(config, corpus_dir, out_dir)
    if result.loss_log:
        _say(args, f"trained {result.steps} steps, "
                   f"final loss {result.loss_log[-1][1]:.6f}; "
                   f"checkpoint at {out_dir / 'checkpoint.ckpt'}")
    else:
        _say(args, f"trained 0 steps; checkpoint at {out_dir / 'checkpoint.ckpt'}")
    return 0


def cmd_eval(args) -> int:
    config = load_config(args.config, seed_override=args.seed)
    root = _resolve_out(args, config)
    corpus_dir = Path(args.corpus) if args.corpus else root / "corpus"
    checkpoint = Path(args.checkpoint) if args.checkpoint else root / "train" / "checkpoint.ckpt"
    out_dir = root / "eval"
    reports = experiment.run_eval(config, corpus_dir, out_dir, checkpoint=checkpoint)
    for name, report in reports.items():
        _say(args, f"{report['metric']}: {report['value']:.4f} ({name})")
    return 0


def cmd_ablate(args) -> int:
    config = load_config(args.config, seed_override=args.seed)
    root = _resolve_out(args, config)
    seeds = args.seeds if args.seeds else [config.train.seed + i for i in range(3)]
    result = experiment.run_ablation(config, args.counts, seeds, root / "ablate",
                                     max_steps=args.steps)
    for count in args.counts:
        _say(args, f"count {count}: retrieval {result['per_count'][count]:.4f}")
    rho = result["spearman_rho"]
    _say(args, f"trend spearman rho: {'undefined' if rho is None else f'{rho:.4f}'}")
    return 0


def cmd_report(args) -> int:
    manifests = experiment.collect_run_manifests(args.inputs)
    columns, rows = experiment.summarize_runs(manifests)
    csv_path, md_path = experiment.write_summary_tables(columns, rows, args.out)
    _say(args, f"joined {len(manifests)} manifests into {len(rows)} rows: "
               f"{csv_path}, {md_path}")
    return 0


def cmd_project(args) -> int:
    config = load_config(args.config, seed_override=args.seed)
    root = _resolve_out(args, config)
    corpus_dir = Path(args.corpus) if args.corpus else root / "corpus"
    checkpoint = Path(args.checkpoint) if args.checkpoint else root / "train" / "checkpoint.ckpt"
    out_dir = root / "project"
    report = experiment.run_projection(config, corpus_dir, out_dir,
                                       checkpoint=checkpoint)
    _say(args, f"projected to {report['details']['out_dim']} dims, "
               f"explained variance {report['value']:.4f}; "
               f"CSV at {out_dir / 'projection.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xlingual",
        description="Cross-lingual contrastive sentence-embedding laboratory.",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="TOML experiment config")
        p.add_argument("--out", default=None,
                       help="run directory (default: paths.out_dir from the config)")
        p.add_argument("--seed", type=int, default=None,
                       help="override every seed in the config")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")

    p = sub.add_parser("gen", help="generate the synthetic corpora")
    common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train the encoder on generated corpora")
    common(p)
    p.add_argument("--corpus", default=None,
                   help="corpus directory (default: OUT/corpus)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="run the evaluator suite on a checkpoint")
    common(p)
    p.add_argument("--corpus", default=None,
                   help="corpus directory (default: OUT/corpus)")
    p.add_argument("--checkpoint", default=None,
                   help="checkpoint path (default: OUT/train/checkpoint.ckpt)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate-parallel",
                       help="sweep the number of parallel training pairs")
    common(p)
    p.add_argument("--counts", type=int, nargs="+",
                   default=[0, 100, 1000, 10000],
                   help="ascending parallel-pair counts (default: 0 100 1000 10000)")
    p.add_argument("--seeds", type=int, nargs="+", default=None,
                   help="training seeds (default: three consecutive from train.seed)")
    p.add_argument("--steps", type=int, default=None,
                   help="override max training steps per run")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("report", help="join run manifests into comparison tables")
    p.add_argument("inputs", nargs="+",
                   help="run manifest files or directories to scan")
    p.add_argument("--out", required=True, help="directory for report.csv/report.md")
    p.add_argument("--quiet", action="store_true", help="suppress progress output")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("project", help="export a 2-d PCA projection CSV")
    common(p)
    p.add_argument("--corpus", default=None,
                   help="corpus directory (default: OUT/corpus)")
    p.add_argument("--checkpoint", default=None,
                   help="checkpoint path (default: OUT/train/checkpoint.ckpt)")
    p.set_defaults(func=cmd_project)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ContractError) as exc:
        return _fail(exc, 2)
    except TrainingDivergenceError as exc:
        return _fail(exc, 4)
    except (VocabularyError, ShapeError, CorruptCheckpointError, LexiconError,
            EmptySentenceError, DegenerateVectorError, UndefinedCorrelationError,
            DataFormatError, NotFittedError, OSError,
            json.JSONDecodeError) as exc:
        return _fail(exc, 3)


def _fail(exc: Exception, code: int) -> int:
    print(f"error: {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
