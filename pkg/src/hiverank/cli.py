"""Command-line entry points.

Subcommands cover the full experiment cycle: make-data (synthetic fixture
generation), pretrain (colony search for initial weights), train (the
reinforcement loop), evaluate (ranking metrics), sweep-lambda and sweep-f
(the two hyperparameter curves), and bench-abc (standard vs mutual colony
on analytic functions).  Every run writes its CSV artifacts and rendered
figures under --out, stamped with the effective config hash.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from .benchmarks import BENCHMARKS, as_fitness, objective_of_fitness
from .bees import ColonyConfig, run_abc
from .checkpoint import load_checkpoint, save_checkpoint
from .config import RunConfig
from .data import EmbeddedDataset, load_dataset, load_embeddings
from .encoding import dimension, flatten, unflatten
from .errors import ConfigError, HiverankError, NumericError
from .fitness import pretrain_weights
from .metrics import map_score, mrr_score, rank_dataset
from .params import ModelConfig, PolicyParams
from .reports import (convergence_figure, line_figure, score_histogram,
                      training_figure, write_csv)
from .rl import minority_recall, predict_scores, train as run_training
from .synthetic import SyntheticSpec, generate_files

LAMBDA_GRID = [round(0.1 * i, 1) for i in range(1, 11)]
FACTOR_GRID = [0.5, 1.0, 1.5, 2.0, 2.5, 3.5, 4.0, 4.5, 5.0]


def _run_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if getattr(args, "config", None) else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "episodes", None) is not None:
        cfg.train = replace(cfg.train, episodes=args.episodes)
    if getattr(args, "lam", None) is not None:
        cfg.train = replace(cfg.train, lam=args.lam)
    if getattr(args, "factor_f", None) is not None:
        cfg.pretrain = replace(cfg.pretrain, factor=args.factor_f)
    if getattr(args, "abc_evaluations", None) is not None:
        cfg.pretrain = replace(cfg.pretrain, max_evaluations=args.abc_evaluations)
    # one master seed drives every stage of a run
    cfg.train = replace(cfg.train, seed=cfg.seed)
    return cfg


def _load_embedded(args, cfg: RunConfig, dataset_path=None):
    path = dataset_path or args.dataset
    dataset = load_dataset(path, split=getattr(args, "split", "train") or "train")
    store = load_embeddings(args.embeddings)
    if store.dim != cfg.model.embedding_dim:
        raise ConfigError(
            f"embedding file {args.embeddings} has dim {store.dim} but the model "
            f"expects {cfg.model.embedding_dim}; set model.embedding_dim in the config")
    embedded = EmbeddedDataset.build(dataset, store, cfg.model.max_len)
    return dataset, store, embedded


def _initial_params(args, cfg: RunConfig) -> PolicyParams:
    if getattr(args, "init", None):
        params, _ = load_checkpoint(args.init, expect_model=cfg.model)
        return params
    return PolicyParams.glorot(cfg.model, np.random.default_rng(cfg.seed))


def _outdir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def cmd_make_data(args) -> int:
    out = _outdir(args)
    spec = SyntheticSpec(
        n_questions=args.questions,
        negatives=args.negatives,
        embedding_dim=args.embedding_dim,
        seed=args.seed if args.seed is not None else 0,
    )
    data_path = os.path.join(out, "pairs.tsv")
    emb_path = os.path.join(out, "embeddings.txt")
    dataset, store = generate_files(spec, data_path, emb_path)
    config_path = os.path.join(out, "config.json")
    skeleton = {
        "model": {"embedding_dim": spec.embedding_dim, "hidden_dim": 8,
                  "attn_dim": 8, "dense_hidden": [8], "blstm_layers": 1,
                  "max_len": 80},
        "seed": spec.seed,
    }
    with open(config_path, "w", encoding="utf-8") as fh:
        json.dump(skeleton, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {data_path} ({dataset.summary()})")
    print(f"wrote {emb_path} ({store.size} vectors, dim {store.dim})")
    print(f"wrote {config_path} (matching model dims)")
    return 0


def cmd_pretrain(args) -> int:
    cfg = _run_config(args)
    out = _outdir(args)
    _, _, embedded = _load_embedded(args, cfg)
    d = dimension(cfg.model)
    colony_cfg = cfg.pretrain.colony_config(d, cfg.seed)
    result = pretrain_weights(embedded, cfg.model, colony_cfg,
                              subsample=cfg.pretrain.subsample, seed=cfg.seed)
    ckpt = os.path.join(out, "pretrained.ckpt")
    save_checkpoint(result.best_position, cfg.model, ckpt,
                    config_hash=cfg.config_hash())
    csv_path = os.path.join(out, "pretrain_history.csv")
    write_csv(csv_path,
              ["iteration", "best_fitness", "mean_fitness", "abandonments"],
              [(r.iteration, r.best_fitness, r.mean_fitness, r.abandonments)
               for r in result.records])
    line_figure(os.path.join(out, "pretrain_history.png"),
                [r.iteration for r in result.records],
                {"best": [r.best_fitness for r in result.records],
                 "colony mean": [r.mean_fitness for r in result.records]},
                "iteration", "fitness", "colony search progress")
    print(f"searched {d} weights with {result.evaluations} evaluations "
          f"({cfg.pretrain.mode} mode)")
    print(f"best fitness {result.best_fitness:.6f}; checkpoint at {ckpt}")
    return 0


def cmd_train(args) -> int:
    cfg = _run_config(args)
    out = _outdir(args)
    _, _, embedded = _load_embedded(args, cfg)
    init = _initial_params(args, cfg)
    ckpt = os.path.join(out, "trained.ckpt")
    config_hash = cfg.config_hash()

    def persist(params):
        save_checkpoint(params, cfg.model, ckpt, config_hash=config_hash)

    try:
        result = run_training(embedded, init, cfg.model, cfg.train,
                              checkpoint_fn=persist)
    except NumericError as exc:
        raise NumericError(f"{exc}; last finite state saved to {ckpt}")
    write_csv(os.path.join(out, "training_log.csv"),
              ["episode", "steps", "cumulative_reward", "mean_loss", "epsilon"],
              [(r.episode, r.steps, r.cumulative_reward, r.mean_loss, r.epsilon)
               for r in result.episodes])
    training_figure(os.path.join(out, "training_log.png"), result.episodes)
    recall = minority_recall(result.params, embedded)
    print(f"trained {cfg.train.episodes} episodes, "
          f"{result.gradient_steps} gradient steps")
    print(f"minority recall at 0.5: {recall:.3f}; checkpoint at {ckpt}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _run_config(args)
    out = _outdir(args)
    dataset, _, embedded = _load_embedded(args, cfg)
    params, _ = load_checkpoint(args.init, expect_model=cfg.model)
    scores = predict_scores(params, embedded)
    results = rank_dataset(dataset, scores)
    included = [r for r in results if r.has_relevant]
    map_v = map_score(results)
    mrr_v = mrr_score(results)
    write_csv(os.path.join(out, "evaluation.csv"),
              ["dataset", "split", "map", "mrr", "n_questions", "n_pairs",
               "config_hash"],
              [(os.path.basename(args.dataset), dataset.split, map_v, mrr_v,
                len(included), len(dataset), cfg.config_hash())])
    score_histogram(os.path.join(out, "evaluation.png"), scores,
                    embedded.labels, "score separation by class")
    print(f"MAP {map_v:.4f}  MRR {mrr_v:.4f} over {len(included)} questions "
          f"({len(dataset)} pairs)")
    return 0


def cmd_sweep_lambda(args) -> int:
    cfg = _run_config(args)
    out = _outdir(args)
    dataset, _, embedded = _load_embedded(args, cfg)
    init = flatten(_initial_params(args, cfg))  # shared start across the grid
    rows = []
    for lam in LAMBDA_GRID:
        tcfg = replace(cfg.train, lam=lam)
        result = run_training(embedded, init, cfg.model, tcfg)
        scores = predict_scores(result.params, embedded)
        results = rank_dataset(dataset, scores)
        rows.append((lam, map_score(results), mrr_score(results),
                     minority_recall(result.params, embedded)))
        print(f"lambda {lam:.1f}: MAP {rows[-1][1]:.4f} MRR {rows[-1][2]:.4f} "
              f"recall {rows[-1][3]:.3f}")
    write_csv(os.path.join(out, "sweep_lambda.csv"),
              ["lambda", "map", "mrr", "minority_recall"], rows)
    line_figure(os.path.join(out, "sweep_lambda.png"),
                [r[0] for r in rows],
                {"MAP": [r[1] for r in rows], "MRR": [r[2] for r in rows]},
                "majority reward weight", "score", "reward-weight sweep")
    return 0


def cmd_sweep_f(args) -> int:
    cfg = _run_config(args)
    out = _outdir(args)
    dataset, _, embedded = _load_embedded(args, cfg)
    d = dimension(cfg.model)
    rows = []
    for factor in FACTOR_GRID:
        pcfg = replace(cfg.pretrain, factor=factor, mode="mutual")
        result = pretrain_weights(embedded, cfg.model,
                                  pcfg.colony_config(d, cfg.seed),
                                  subsample=pcfg.subsample, seed=cfg.seed)
        params = unflatten(result.best_position, cfg.model)
        scores = predict_scores(params, embedded)
        results = rank_dataset(dataset, scores)
        rows.append((factor, result.best_fitness, map_score(results),
                     mrr_score(results)))
        print(f"F {factor:.1f}: fitness {rows[-1][1]:.5f} MAP {rows[-1][2]:.4f} "
              f"MRR {rows[-1][3]:.4f}")
    write_csv(os.path.join(out, "sweep_f.csv"),
              ["factor", "best_fitness", "map", "mrr"], rows)
    line_figure(os.path.join(out, "sweep_f.png"),
                [r[0] for r in rows],
                {"MAP": [r[2] for r in rows], "MRR": [r[3] for r in rows]},
                "mutual learning factor", "score", "perturbation-factor sweep")
    return 0


def cmd_bench_abc(args) -> int:
    out = _outdir(args)
    base_seed = args.seed if args.seed is not None else 0
    rows = []
    curves = {}
    for name, objective in BENCHMARKS.items():
        curves[name] = {"standard": [], "mutual": []}
        for mode in ("standard", "mutual"):
            for rep in range(args.repeats):
                colony_cfg = ColonyConfig(
                    dim=args.dim, lower=-5.0, upper=5.0, colony_size=100,
                    max_evaluations=args.evaluations, mode=mode,
                    seed=base_seed + rep)
                result = run_abc(as_fitness(objective), colony_cfg)
                best_obj = objective_of_fitness(result.best_fitness)
                rows.append((name, mode, base_seed + rep, best_obj,
                             result.evaluations, len(result.history) - 1))
                curves[name][mode].append(
                    [objective_of_fitness(f) for f in result.history])
            med = float(np.median([r[3] for r in rows
                                   if r[0] == name and r[1] == mode]))
            print(f"{name:<12} {mode:<9} median best objective {med:.6g}")
    write_csv(os.path.join(out, "bench_abc.csv"),
              ["function", "mode", "seed", "best_objective", "evaluations",
               "iterations"], rows)
    convergence_figure(os.path.join(out, "bench_abc.png"), curves,
                       "neighbor-rule comparison")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hiverank",
        description="Answer-pair ranking: colony pretraining, reinforcement "
                    "training, and ranking evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, dataset=True, init=False):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--seed", type=int, help="master seed (overrides config)")
        p.add_argument("--out", required=True, help="output directory")
        if dataset:
            p.add_argument("--dataset", required=True, help="tab-separated pair file")
            p.add_argument("--embeddings", required=True, help="embedding vector file")
        if init:
            p.add_argument("--init", required=(init == "required"),
                           help="starting weight checkpoint")

    p = sub.add_parser("make-data", help="generate a synthetic ranking task")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--questions", type=int, default=200)
    p.add_argument("--negatives", type=int, default=9)
    p.add_argument("--embedding-dim", type=int, default=8)
    p.set_defaults(func=cmd_make_data)

    p = sub.add_parser("pretrain", help="colony search for initial weights")
    common(p)
    p.add_argument("--factor-f", type=float, dest="factor_f",
                   help="mutual learning factor F")
    p.add_argument("--abc-evaluations", type=int, dest="abc_evaluations",
                   help="fitness evaluation budget")
    p.set_defaults(func=cmd_pretrain)

    p = sub.add_parser("train", help="run the reinforcement training loop")
    common(p, init=True)
    p.add_argument("--episodes", type=int)
    p.add_argument("--lambda", type=float, dest="lam",
                   help="majority-class reward weight")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="MAP/MRR report for a checkpoint")
    common(p, init="required")
    p.add_argument("--split", default="test", help="split tag for the report")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep-lambda", help="train/evaluate across the "
                                            "majority-reward grid")
    common(p, init=True)
    p.add_argument("--episodes", type=int)
    p.set_defaults(func=cmd_sweep_lambda)

    p = sub.add_parser("sweep-f", help="pretrain/evaluate across the mutual "
                                       "factor grid")
    common(p)
    p.add_argument("--abc-evaluations", type=int, dest="abc_evaluations")
    p.set_defaults(func=cmd_sweep_f)

    p = sub.add_parser("bench-abc", help="standard vs mutual colony on "
                                         "analytic functions")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--dim", type=int, default=10)
    p.add_argument("--evaluations", type=int, default=3000)
    p.add_argument("--repeats", type=int, default=5)
    p.set_defaults(func=cmd_bench_abc)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HiverankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc.filename or exc} not found", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
