import argparse
import sys
from pathlib import Path
from typing import Dict, List, Optional

import pydantic

from src.data.corpus import format_summary_line, save_corpus, save_cue_corpus, summarize_corpus
from src.data.synthetic import planted_sentence
from src.detector.bundle import load_bundle, save_bundle
from src.detector.predict import predict
from src.encoder.checkpoint import save_checkpoint
from src.encoder.vocab import save_vocab, surface_tokens
from src.evaluation import pipeline, reference
from src.evaluation.config import ExperimentConfig, load_experiment
from src.evaluation.error_analysis import error_breakdown, plot_breakdown
from src.evaluation.harness import ablation_run, cross_platform_eval, cross_target_eval, split_by_target
from src.evaluation.heatmap import export_heatmap
from src.evaluation.metrics import macro_f1
from src.evaluation.reports import write_ablation, write_breakdown, write_matrix
from src.utils.errors import PeaceError
from src.utils.hashing import write_json
from src.utils.logging_utils import configure_logging
from src.utils.manifest import write_run_manifest

def _finish(cfg: ExperimentConfig, command: str, run_dir: Path, extra: Optional[Dict] = None) -> None:
    manifest = write_run_manifest(run_dir, command, cfg.hash_payload(), cfg.seed, extra)
    print(f"[OK] {command} finished")
    print(f"  Run directory: {run_dir}")
    print(f"  Manifest: {manifest}")

def _print_matrix(matrix) -> None:
    print(f"\n{matrix.name} macro-F1 (rows: source, columns: target)")
    print(matrix.to_frame().to_string(float_format=lambda v: f"{v:.4f}", na_rep="-"))
    print(f"  Off-diagonal mean: {matrix.off_diagonal_mean():.4f}")

def _experiment_data(cfg: ExperimentConfig):
    corpora = pipeline.load_platform_corpora(cfg)
    for corpus in corpora.values():
        print(format_summary_line(corpus))
    splits = pipeline.split_platforms(cfg, corpora)
    cue_corpora = pipeline.load_cue_corpora(cfg)
    vocab = pipeline.shared_vocabulary(cfg, [s[0] for s in splits.values()], cue_corpora.values())
    return splits, cue_corpora, vocab

def cmd_ingest(cfg: ExperimentConfig, run_dir: Path) -> None:
    corpora = pipeline.load_platform_corpora(cfg)
    summaries = []
    for platform, corpus in corpora.items():
        print(format_summary_line(corpus))
        save_corpus(corpus, run_dir / "corpora" / f"{platform}.jsonl")
        summaries.append(summarize_corpus(corpus))
    write_json({"corpora": summaries}, run_dir / "summary.json")

def cmd_gen_synth(cfg: ExperimentConfig, run_dir: Path) -> None:
    for platform, corpus in pipeline.load_platform_corpora(cfg).items():
        save_corpus(corpus, run_dir / f"{platform}.jsonl")
        print(format_summary_line(corpus))
    target_corpus = pipeline.load_target_corpus(cfg)
    save_corpus(target_corpus, run_dir / "targets.jsonl")
    print(format_summary_line(target_corpus))
    for task, corpus in pipeline.load_cue_corpora(cfg).items():
        save_cue_corpus(corpus, run_dir / f"cue_{task}.jsonl")
        print(f"{task} cue corpus: {len(corpus)} examples")

def cmd_pretrain_cue(cfg: ExperimentConfig, run_dir: Path, task: str) -> None:
    splits, cue_corpora, vocab = _experiment_data(cfg)
    logs = {}
    sentiment, aggression = pipeline.prepare_cue_modules(cfg, vocab, cue_corpora, logs)
    save_vocab(vocab, run_dir / "vocab.txt")
    states = {"sentiment": sentiment, "aggression": aggression}
    for name in (("sentiment", "aggression") if task == "both" else (task,)):
        save_checkpoint(states[name], run_dir / f"{name}.ckpt")
        write_json(logs[name].model_dump(), run_dir / f"{name}_log.json")
        print(f"  {name}: best val accuracy {logs[name].best_val_accuracy:.4f} "
              f"(majority baseline {logs[name].majority_baseline:.4f})")

def cmd_train(cfg: ExperimentConfig, run_dir: Path, source: Optional[str]) -> None:
    splits, cue_corpora, vocab = _experiment_data(cfg)
    source = source or next(iter(splits))
    if source not in splits:
        raise PeaceError(f"unknown source platform {source!r}; choose from {sorted(splits)}")
    sentiment, aggression = pipeline.prepare_cue_modules(cfg, vocab, cue_corpora)
    logs = {}
    factory = pipeline.peace_factory(vocab, cfg.encoder_config(), sentiment, aggression, cfg.model, logs)
    train_split, val_split, test_split = splits[source]
    model = factory(train_split, val_split, cfg.train)

    scores = {target: macro_f1(model.predict_labels(s[2].texts), s[2].labels) for target, s in splits.items()}
    save_bundle(model, run_dir / "bundle", cfg.hash_payload(), cfg.train.seed, {"schedule": cfg.train.model_dump()})
    write_json({"source": source, "test_macro_f1": scores, "log": next(iter(logs.values())).model_dump()},
               run_dir / "training.json")
    for target, score in scores.items():
        print(f"  {source} -> {target}: macro-F1 {score:.4f}")

def cmd_eval_cross(cfg: ExperimentConfig, run_dir: Path) -> None:
    splits, cue_corpora, vocab = _experiment_data(cfg)
    sentiment, aggression = pipeline.prepare_cue_modules(cfg, vocab, cue_corpora)
    factory = pipeline.peace_factory(vocab, cfg.encoder_config(), sentiment, aggression, cfg.model)
    matrix = cross_platform_eval(factory, splits, cfg.train, cfg.model.variant, cfg.max_workers)
    write_matrix(matrix, run_dir, "cross_platform")
    _print_matrix(matrix)

def cmd_eval_target(cfg: ExperimentConfig, run_dir: Path) -> None:
    corpus = pipeline.load_target_corpus(cfg)
    print(format_summary_line(corpus))
    target_splits = split_by_target(corpus, cfg.target_eval.targets, cfg.split)
    cue_corpora = pipeline.load_cue_corpora(cfg)
    vocab = pipeline.shared_vocabulary(cfg, [s[0] for s in target_splits.values()], cue_corpora.values())
    sentiment, aggression = pipeline.prepare_cue_modules(cfg, vocab, cue_corpora)
    factory = pipeline.peace_factory(vocab, cfg.encoder_config(), sentiment, aggression, cfg.model)
    matrix = cross_target_eval(factory, corpus, cfg.target_eval.targets, cfg.train, cfg.split,
                               cfg.model.variant, cfg.max_workers)
    write_matrix(matrix, run_dir, "cross_target")
    for source in matrix.sources:
        for target in matrix.targets:
            if source != target:
                print(f"  {source} -> {target}: macro-F1 {matrix.score(source, target):.4f}")

def cmd_ablate(cfg: ExperimentConfig, run_dir: Path) -> None:
    splits, cue_corpora, vocab = _experiment_data(cfg)
    sentiment, aggression = pipeline.prepare_cue_modules(cfg, vocab, cue_corpora)
    factories = pipeline.variant_factories(vocab, cfg.encoder_config(), sentiment, aggression, cfg.model)
    reports = ablation_run(factories, splits, cfg.train, cfg.ablation.seeds, cfg.ablation.variants, cfg.max_workers)
    write_ablation(reports, run_dir)
    print("\nvariant            off-diagonal mean   std      delta vs full")
    for r in reports:
        delta = "-" if r.delta_from_full is None else f"{r.delta_from_full:+.4f}"
        print(f"  {r.variant:<16} {r.off_diagonal_mean:.4f}              {r.off_diagonal_std:.4f}   {delta}")

def cmd_errors(cfg: ExperimentConfig, run_dir: Path, bundle: str) -> None:
    model = load_bundle(bundle)
    # the bundle was trained on the platform suite, so the whole target corpus is unseen
    corpus = pipeline.load_target_corpus(cfg)
    for dimension in cfg.errors.dimensions:
        breakdown = error_breakdown(model, corpus, dimension, cfg.errors.hateful_only)
        write_breakdown(breakdown, run_dir)
        if cfg.errors.chart:
            plot_breakdown(breakdown, run_dir / f"errors_{dimension}.png")
        print(f"\nError rate by {dimension} ({breakdown.excluded} records without the field)")
        for name, group in breakdown.groups.items():
            print(f"  {name}: {group.errors}/{group.evaluated} wrong, rate {group.error_rate:.4f}")

def cmd_explain(cfg: ExperimentConfig, run_dir: Path, bundle: str, text: Optional[str], label: Optional[int]) -> None:
    model = load_bundle(bundle)
    texts = [text] if text else [planted_sentence(kind, seed=cfg.seed)[0] for kind in ("polarity", "aggression")]
    for i, sample in enumerate(texts):
        pred = predict(sample, model)
        doc = export_heatmap(pred, surface_tokens(sample, model.config.max_len), run_dir / f"heatmap_{i}.html",
                             text=sample, label=label)
        print(f"  [{i}] {'hateful' if doc.prediction else 'non-hateful'} (p(hate) = {doc.probs[1]:.3f}): {sample}")

def cmd_reference() -> None:
    print("Dataset statistics")
    print(reference.dataset_table().to_string(index=False))
    for title, matrices in (("Cross-platform", reference.CROSS_PLATFORM), ("Cross-target", reference.CROSS_TARGET)):
        for matrix in matrices.values():
            print(f"\n{title}:")
            _print_matrix(matrix)
    print("\nCross-platform gain of PEACE over HateBERT per source:")
    for source, gain in reference.cross_platform_gains().items():
        print(f"  {source}: {gain:+.4f}")

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="peace", description="Cue-guided cross-platform hate speech detection")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def with_config(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", required=True, help="Experiment TOML file")
        return sub

    with_config("ingest", "Load and normalize corpora, print their summaries")
    with_config("gen-synth", "Write the synthetic shift suite, target corpus and cue corpora")
    pretrain = with_config("pretrain-cue", "Pretrain and freeze the cue classifiers")
    pretrain.add_argument("--task", choices=["sentiment", "aggression", "both"], default="both")
    train_parser = with_config("train", "Train one model and save a bundle")
    train_parser.add_argument("--source", help="Source platform (default: first configured)")
    with_config("eval-cross", "Cross-platform macro-F1 matrix")
    with_config("eval-target", "Cross-target macro-F1 in both directions")
    with_config("ablate", "Compare full, sentiment_only, aggression_only and base variants")
    errors_parser = with_config("errors", "Error rate by hate target and hate type")
    errors_parser.add_argument("--bundle", required=True, help="Model bundle directory")
    explain = with_config("explain", "Token-importance heatmaps")
    explain.add_argument("--bundle", required=True, help="Model bundle directory")
    explain.add_argument("--text", help="Text to explain (default: planted cue sentences)")
    explain.add_argument("--label", type=int, choices=[0, 1], help="Gold label to show next to the verdict")
    subparsers.add_parser("reference", help="Print the published reference tables")
    return parser

def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    try:
        configure_logging()
        if args.command == "reference":
            cmd_reference()
            return 0

        cfg = load_experiment(args.config)
        pipeline.configure_torch()
        run_dir = cfg.run_dir(args.command)
        run_dir.mkdir(parents=True, exist_ok=True)

        if args.command == "ingest":
            cmd_ingest(cfg, run_dir)
        elif args.command == "gen-synth":
            cmd_gen_synth(cfg, run_dir)
        elif args.command == "pretrain-cue":
            cmd_pretrain_cue(cfg, run_dir, args.task)
        elif args.command == "train":
            cmd_train(cfg, run_dir, args.source)
        elif args.command == "eval-cross":
            cmd_eval_cross(cfg, run_dir)
        elif args.command == "eval-target":
            cmd_eval_target(cfg, run_dir)
        elif args.command == "ablate":
            cmd_ablate(cfg, run_dir)
        elif args.command == "errors":
            cmd_errors(cfg, run_dir, args.bundle)
        elif args.command == "explain":
            cmd_explain(cfg, run_dir, args.bundle, args.text, args.label)
        _finish(cfg, args.command, run_dir)
        return 0
    except (PeaceError, pydantic.ValidationError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1

if __name__ == "__main__":
    sys.exit(main())
