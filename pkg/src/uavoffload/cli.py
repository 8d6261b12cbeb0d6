"""Command line harness: train, eval, sweep and oracle verbs, all writing CSV.

    uavoffload train  --config cfg.json --seed 0 --policy gnn --checkpoint gnn.ckpt --out log.csv
    uavoffload eval   --config cfg.json --seeds 0..9 --policy gnn --checkpoint gnn.ckpt
    uavoffload sweep  --experiment capacity --seeds 0..4 --policy hfc --policy gnn --checkpoint gnn.ckpt
    uavoffload oracle --seed 0 --out scores.csv
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from contextlib import contextmanager
from pathlib import Path

from .checkpoint import CheckpointError, load_network, save_network
from .experiments import COLUMNS, KINDS, POLICIES, SweepSpec, evaluate, make_policy, run_sweep, write_rows
from .gnn.chain import ChainConfig
from .oracle import SmallInstance, enumerate_optimal, tiny_instance
from .rl.dqn import TrainConfig, train
from .scenario import ScenarioConfig, load_config


def parse_seeds(text: str) -> list[int]:
    """``N..M`` (inclusive), a comma list, or a single integer."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise argparse.ArgumentTypeError(f"empty seed range {text!r}")
        return list(range(lo, hi + 1))
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None


def _config(args) -> ScenarioConfig:
    return load_config(args.config) if args.config else ScenarioConfig()


def _networks(paths) -> dict:
    nets = {}
    for path in paths or []:
        net = load_network(path)
        nets[net.kind] = net
    return nets


@contextmanager
def _sink(path):
    if path is None or str(path) == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _write(rows, columns, path) -> None:
    with _sink(path) as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\r\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def cmd_train(args) -> int:
    config = _config(args)
    if args.policy not in ("gnn", "dqn"):
        raise SystemExit("train needs --policy gnn or dqn")
    if not args.checkpoint:
        raise SystemExit("train needs --checkpoint PATH for the trained network")
    tc = TrainConfig(episodes=args.episodes, batch_size=args.batch_size, rng_seed=args.seed,
                     replay_capacity=max(args.replay, args.batch_size), fixed_workload=args.fixed_workload)
    chain = ChainConfig(hidden=tuple(args.hidden), latent=args.latent)
    net, trainlog = train(config, tc, args.policy, chain)
    save_network(net, args.checkpoint)
    _write(trainlog.rows, trainlog.COLUMNS, args.out)
    return 0


def cmd_eval(args) -> int:
    config = _config(args)
    nets = _networks(args.checkpoint)
    rows = []
    for seed in args.seeds or [args.seed]:
        for name in args.policy or ["hfc"]:
            res = evaluate(make_policy(name, nets, seed), config, seed)
            rows.append({"kind": "eval", "policy": name, "sweep_value": "", "seed": seed, "status": "ok",
                         "violations": res.violations, "num_tasks": res.num_tasks,
                         "min_remaining_energy": res.min_remaining, "objective": res.objective})
    _write(rows, COLUMNS, args.out)
    return 0


def cmd_sweep(args) -> int:
    if not args.experiment:
        raise SystemExit(f"sweep needs --experiment, one of {', '.join(KINDS)}")
    spec = SweepSpec(args.experiment, list(args.values or []), args.seeds or [args.seed],
                     args.policy or ["hfc", "hrr"])
    rows = run_sweep(spec, _config(args), _networks(args.checkpoint))
    if args.out is None or str(args.out) == "-":
        _write(rows, COLUMNS, None)
    else:
        write_rows(rows, args.out)
    return 0


def cmd_oracle(args) -> int:
    if args.config:
        instance = SmallInstance.from_config(load_config(args.config), args.seed)
    else:
        instance = tiny_instance(args.seed)
    result = enumerate_optimal(instance)
    _write(result.table_rows(), ["index", "schedule", "violations", "min_remaining_energy", "objective"], args.out)
    best = "".join(str(b) for b in result.schedule.ravel())
    print(f"optimum {result.objective!r} at schedule {best}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uavoffload", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log training progress")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp):
        sp.add_argument("--config", type=Path, help="scenario JSON file (library defaults if omitted)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", type=Path, help="CSV output path (stdout if omitted)")

    sp = sub.add_parser("train", help="train a Q-network and write a checkpoint")
    common(sp)
    sp.add_argument("--policy", choices=["gnn", "dqn"], default="gnn")
    sp.add_argument("--checkpoint", type=Path)
    sp.add_argument("--episodes", type=int, default=TrainConfig.episodes)
    sp.add_argument("--batch-size", type=int, default=TrainConfig.batch_size)
    sp.add_argument("--replay", type=int, default=TrainConfig.replay_capacity)
    sp.add_argument("--hidden", type=int, nargs="+", default=list(ChainConfig.hidden))
    sp.add_argument("--latent", type=int, default=ChainConfig.latent)
    sp.add_argument("--fixed-workload", action="store_true", help="replay one workload every episode")
    sp.set_defaults(func=cmd_train)

    for verb, func, help_ in (("eval", cmd_eval, "evaluate policies on seeded workloads"),
                              ("sweep", cmd_sweep, "run one experiment sweep")):
        sp = sub.add_parser(verb, help=help_)
        common(sp)
        sp.add_argument("--seeds", type=parse_seeds, help="N..M inclusive or a comma list")
        sp.add_argument("--policy", action="append", choices=POLICIES)
        sp.add_argument("--checkpoint", action="append", type=Path, help="trained network (repeatable)")
        if verb == "sweep":
            sp.add_argument("--experiment", choices=KINDS)
            sp.add_argument("--values", type=float, nargs="+", help="override the default sweep grid")
        sp.set_defaults(func=func)

    sp = sub.add_parser("oracle", help="enumerate every schedule of a small instance")
    common(sp)
    sp.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (CheckpointError, KeyError, ValueError) as exc:
        print(f"uavoffload: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
