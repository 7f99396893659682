"""Command-line entry point: ``metaopt <subcommand> --config FILE [overrides]``."""

import argparse
import logging
import sys
from pathlib import Path

from .checkpoint import load_checkpoint, save_checkpoint
from .config import default_config_text, load_config, parse_method
from .errors import MetaOptError
from .evaluation import compare_methods, eval_stream, heldout_tasks, run_method
from .export import (export_comparison, export_errors_csv, export_learning_curve,
                     export_meta_curve, export_trajectory_csv, safe_name)
from .meta import adapt, meta_train
from .rl import train_rl
from .streams import Stream

log = logging.getLogger("metaopt")


def _config(args):
    overrides = dict(kv.split("=", 1) for kv in args.set or [])
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    if args.out is not None:
        overrides["out"] = args.out
    if getattr(args, "adapt_steps", None) is not None:
        overrides["eval.adapt_steps"] = str(args.adapt_steps)
    if getattr(args, "stochastic_eval", False):
        overrides["eval.stochastic"] = "true"
    if getattr(args, "method", None):
        overrides["method"] = args.method[0]
        overrides["eval.methods"] = ",".join(args.method)
    cfg = load_config(args.config, {k.strip(): v.strip() for k, v in overrides.items()})
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    return cfg


def _progress(every, label):
    def report(it, row):
        if it % every == 0:
            log.info("%s %d: %s", label, it, ", ".join(f"{v:.4g}" for v in row[1:]))
    return report


def _policies(cfg, labels, checkpoint=None):
    needed = {parse_method(m)[0] for m in labels} & {"meta", "rl"}
    out = {}
    for name in sorted(needed):
        path = Path(checkpoint) if checkpoint else cfg.checkpoint_path(name)
        out[name] = load_checkpoint(path, cfg.policy.output_scale)
    return out


def cmd_train_rl(args):
    cfg = _config(args)
    theta, curve = train_rl(cfg.rl_task, cfg.train, Stream(cfg.seed).child("train-rl"),
                            cfg.policy, progress=_progress(25, "iteration"))
    save_checkpoint(theta, cfg.checkpoint_path("rl"))
    export_learning_curve(curve, cfg.out_dir / "learning_curve.csv")
    if curve:
        print(f"train-rl: return {curve[0][1]:.4f} -> {curve[-1][1]:.4f}; "
              f"wrote {cfg.checkpoint_path('rl')}")
    return 0


def cmd_train_meta(args):
    cfg = _config(args)
    theta, curve = meta_train(cfg.dist, cfg.meta, Stream(cfg.seed).child("train-meta"),
                              cfg.policy, progress=_progress(10, "meta-iteration"))
    save_checkpoint(theta, cfg.checkpoint_path("meta"))
    export_meta_curve(curve, cfg.out_dir / "meta_curve.csv")
    if curve:
        print(f"train-meta: post-adaptation return {curve[0][2]:.4f} -> {curve[-1][2]:.4f}; "
              f"wrote {cfg.checkpoint_path('meta')}")
    return 0


def cmd_adapt(args):
    cfg = _config(args)
    path = Path(args.checkpoint) if args.checkpoint else cfg.checkpoint_path("meta")
    theta = load_checkpoint(path, cfg.policy.output_scale)
    task = heldout_tasks(cfg, args.task + 1)[args.task]
    mcfg = cfg.meta.__class__(**{**cfg.meta.__dict__, "inner_steps": max(cfg.adapt_steps, 1)})
    res = adapt(theta, task, mcfg, eval_stream(cfg, args.task).child("adapt"))
    dest = cfg.out_dir / f"adapted_task{args.task}.ckpt"
    save_checkpoint(res.theta_task, dest)
    print(f"adapt: task {args.task} ({task.path_kind}) return "
          f"{res.pre_return:.4f} -> {res.post_return:.4f}; wrote {dest}")
    return 0


def _evaluate_methods(cfg, labels, checkpoint=None):
    policies = _policies(cfg, labels, checkpoint)
    tasks = heldout_tasks(cfg)
    for label in labels:
        reports = []
        for j, task in enumerate(tasks):
            rep = run_method(label, task, cfg, eval_stream(cfg, j), policies)
            export_trajectory_csv(rep, task, cfg.out_dir / f"trajectory_{safe_name(label)}_{j}.csv")
            reports.append((j, rep))
        export_errors_csv(reports, cfg.out_dir / f"errors_{safe_name(label)}.csv")
        mean = sum(r.mean_error for _, r in reports) / len(reports)
        print(f"{label}: mean tracking error {mean:.6f} over {len(reports)} tasks")


def cmd_eval(args):
    cfg = _config(args)
    _evaluate_methods(cfg, list(args.method or [cfg.method]), args.checkpoint)
    return 0


def cmd_baseline(args):
    cfg = _config(args)
    _evaluate_methods(cfg, ["mppi-baseline"])
    return 0


def cmd_compare(args):
    cfg = _config(args)
    policies = _policies(cfg, cfg.methods)
    comp = compare_methods(cfg, cfg.n_eval_tasks, policies)
    for label in comp.methods:
        reports = [(j, per[label]) for j, per in enumerate(comp.reports)]
        for j, rep in reports:
            export_trajectory_csv(rep, comp.tasks[j],
                                  cfg.out_dir / f"trajectory_{safe_name(label)}_{j}.csv")
        export_errors_csv(reports, cfg.out_dir / f"errors_{safe_name(label)}.csv")
    export_comparison(comp, cfg.out_dir / "comparison.csv",
                      cfg.out_dir / "comparison_summary.csv")
    rows, ties = comp.summary()
    for r in rows:
        print(f"{r['method']:>15}: mean {r['mean']:.6f}  median {r['median']:.6f}  wins {r['wins']}")
    print(f"{'ties':>15}: {ties}")
    return 0


def cmd_show_config(args):
    sys.stdout.write(default_config_text())
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="metaopt", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log training progress")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override any configuration key (repeatable)")
        p.set_defaults(func=func)
        return p

    add("train-rl", cmd_train_rl, "train a single-task RL optimizer")
    add("train-meta", cmd_train_meta, "meta-train an optimizer over the task distribution")
    p = add("adapt", cmd_adapt, "adapt a meta optimizer to one held-out task")
    p.add_argument("--adapt-steps", type=int)
    p.add_argument("--task", type=int, default=0, help="held-out task index")
    p.add_argument("--checkpoint")
    p = add("eval", cmd_eval, "evaluate one method on held-out tasks")
    p.add_argument("--adapt-steps", type=int)
    p.add_argument("--method", action="append",
                   help="meta, meta:N, rl, mppi-baseline or random-update (repeatable)")
    p.add_argument("--checkpoint")
    p.add_argument("--stochastic-eval", action="store_true",
                   help="sample updates from the policy instead of using its mean")
    p = add("compare", cmd_compare, "compare methods on held-out tasks")
    p.add_argument("--adapt-steps", type=int)
    p.add_argument("--method", action="append", help="repeat to select several methods")
    p.add_argument("--stochastic-eval", action="store_true",
                   help="sample updates from the policy instead of using its mean")
    add("baseline", cmd_baseline, "run the classic MPPI baseline on held-out tasks")
    sub.add_parser("show-config", help="print every configuration key with its default"
                   ).set_defaults(func=cmd_show_config)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    try:
        return args.func(args)
    except MetaOptError as exc:
        print(f"metaopt: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"metaopt: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
