"""Command-line interface.

Subcommands: train, evaluate, heuristic-search, optimal, theory, compare.
Every command exits 0 on success; failures print one machine-parseable
line `error: <code>: <message>` to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from .config import (
    EnvConfig,
    ExperimentConfig,
    load_env_config,
    load_experiment_config,
)
from .errors import ConfigError, LostSalesError
from .params import DemandModel, ItemParams


def _env_from_args(args) -> EnvConfig:
    if getattr(args, "config", None):
        return load_env_config(args.config)
    return EnvConfig.single()


def _add_common(p):
    p.add_argument("--config", help="environment YAML (defaults to the standard single-item setup)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output path or directory")


def cmd_train(args) -> int:
    from .experiment import run_experiment

    if args.config:
        exp = load_experiment_config(args.config)
    else:
        exp = ExperimentConfig(env=EnvConfig.single())
    agent_updates = {}
    if args.fg is not None:
        agent_updates["use_fg"] = args.fg == "on"
    if args.no_intrinsic:
        agent_updates["use_intrinsic"] = False
    elif args.intrinsic is not None:
        agent_updates["use_intrinsic"] = args.intrinsic == "on"
    if args.heads is not None:
        agent_updates["heads"] = args.heads
    if args.epsilon is not None:
        agent_updates["epsilon"] = args.epsilon
    if args.alpha is not None:
        agent_updates["alpha"] = args.alpha
    if args.hidden is not None:
        agent_updates["hidden"] = args.hidden
    agent = dataclasses.replace(exp.agent, **agent_updates)
    exp_updates = {"agent": agent}
    if args.agent is not None:
        exp_updates["agent_kind"] = args.agent
    if args.seeds is not None:
        exp_updates["seeds"] = tuple(args.seeds)
    elif args.seed is not None:
        exp_updates["seeds"] = (args.seed,)
    for name in ("episodes", "steps", "eval_steps", "fg_dims", "fg_cap", "beta0", "beta_decay"):
        val = getattr(args, name)
        if val is not None:
            key = "steps_per_episode" if name == "steps" else name
            exp_updates[key] = val
    if args.no_intrinsic:
        exp_updates["beta0"] = 0.0
    exp = dataclasses.replace(exp, **exp_updates)
    out_dir = args.out or "runs"
    run_experiment(exp, out_dir, workers=args.workers)
    print(f"wrote per-seed run logs and summary.csv under {out_dir}")
    return 0


def cmd_evaluate(args) -> int:
    from .heuristics import HeuristicParams, bracket, policy_action_table
    from .optimal import evaluate_policy, load_policy

    env = _env_from_args(args)
    if env.mode != "single":
        raise ConfigError("evaluate drives the single-item environment")
    item = env.item
    if args.policy == "optimal":
        if not args.policy_file:
            raise ConfigError("--policy-file required for --policy optimal")
        header, table = load_policy(args.policy_file)
        if (header["y_max"], header["a_max"], header["L"]) != (item.y_max, item.a_max, item.L):
            raise ConfigError("policy file header does not match the environment")
        policy = table
    elif args.policy == "bracket":
        hp = HeuristicParams(r_h=args.r, theta_h=args.theta)
        policy = lambda t, s: bracket(t, hp, item)  # noqa: E731
    else:
        hp = HeuristicParams(r_h=args.r, S_h=args.S)
        policy = policy_action_table(args.policy, hp, item)
    res = evaluate_policy(
        policy, item, episodes=args.episodes, steps=args.steps,
        seed=args.seed, warmup=args.warmup,
    )
    print(f"mean_cost_per_period={res.mean_cost:.6g} std={res.std_cost:.6g}")
    return 0


def cmd_heuristic_search(args) -> int:
    from .heuristics import default_grids, grid_search
    from .runlog import fmt

    env = _env_from_args(args)
    if env.mode != "single":
        raise ConfigError("heuristic-search drives the single-item environment")
    item = env.item
    grids = default_grids(args.policy, item)
    if args.s_max is not None and "S_h" in grids:
        grids["S_h"] = list(range(args.s_max + 1))
    if args.r_max is not None and "r_h" in grids:
        if args.policy == "bracket":
            grids["r_h"] = [round(0.05 * i, 2) for i in range(20 * args.r_max + 1)]
        else:
            grids["r_h"] = list(range(args.r_max + 1))
    best, cost, results = grid_search(
        args.policy, item, grids=grids, eval_episodes=args.episodes,
        seed=args.seed, steps=args.steps, warmup=args.warmup,
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("r_h,S_h,theta_h,mean_cost\n")
            for hp, c in results:
                fh.write(f"{fmt(float(hp.r_h))},{hp.S_h},{fmt(float(hp.theta_h))},{fmt(c)}\n")
    print(
        f"best {args.policy}: r_h={best.r_h} S_h={best.S_h} theta_h={best.theta_h} "
        f"mean_cost={cost:.6g}"
    )
    return 0


def cmd_optimal(args) -> int:
    from .optimal import evaluate_policy, save_policy, value_iteration

    env = _env_from_args(args)
    if env.mode != "single":
        raise ConfigError("optimal drives the single-item environment")
    item = env.item
    res = value_iteration(item, tol=args.tol)
    print(f"value iteration: {res.sweeps} sweeps, final change {res.deltas[-1]:.3g}")
    if args.out:
        save_policy(args.out, item, res.policy)
        print(f"wrote greedy policy to {args.out}")
    if args.evaluate:
        ev = evaluate_policy(
            res.policy, item, episodes=args.episodes, steps=args.steps,
            seed=args.seed, warmup=args.warmup,
        )
        print(f"simulated mean_cost_per_period={ev.mean_cost:.6g} std={ev.std_cost:.6g}")
    return 0


def cmd_theory(args) -> int:
    from . import theory

    if args.theory_cmd == "verify-mu":
        if args.config:
            env = load_env_config(args.config)
            if env.mode != "single":
                raise ConfigError("verify-mu needs a single-item config")
            mdp = theory.TinyMDP(env.item, DemandModel.from_params(env.item))
        else:
            mdp = theory.TinyMDP.default()
        report = theory.verify_update_probabilities(mdp, steps=args.steps, seed=args.seed)
        viol = report.max_violation()
        linf = float(np.abs(report.mu_tilde - report.mc_update_freq).max())
        print(f"pairs={report.mu.size}")
        print(f"mu_min={report.mu_min:.6g} mu_tilde_min={report.mu_tilde_min:.6g}")
        print(f"improvement_factor={report.improvement_factor:.6g}")
        print(f"max(mu - mu_tilde)={viol:.3g} (inequality holds: {viol <= 0})")
        print(f"Linf(exact vs monte-carlo)={linf:.4g} over {args.steps} steps")
        print(f"note: {report.notes}")
        return 0
    if args.theory_cmd == "graph-numbers":
        item = ItemParams()
        if args.config:
            env = load_env_config(args.config)
            item = env.item
        gn = theory.graph_numbers(args.y, args.censored, item)
        print(f"omega={gn.omega} alpha={gn.alpha} zeta={gn.zeta}")
        n_pairs = item.n_states * item.n_actions
        print(f"chain zeta<=alpha<=omega<=|S||A|({n_pairs}): {gn.chain_holds(n_pairs)}")
        return 0
    if args.theory_cmd == "lemma5":
        item = ItemParams(c=0.0, h=1.0, p=4.0, L=1, a_max=2, y_max=5, d_max=2, d_mean=1.0)
        if args.config:
            env = load_env_config(args.config)
            item = env.item
        out = theory.verify_lemma_factor(item, args.d)
        print(
            f"factor={out['factor']:.6g} bound={out['bound']:.6g} holds={out['holds']}"
        )
        return 0
    raise ConfigError(f"unknown theory subcommand {args.theory_cmd!r}")


def cmd_compare(args) -> int:
    from .runlog import compare_runs, read_summary

    rep = compare_runs(read_summary(args.a), read_summary(args.b), threshold=args.threshold)
    print(rep.to_text())
    if args.out:
        rep.write_csv(args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lostsales", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    t = sub.add_parser("train", help="train an agent and log evaluation curves")
    _add_common(t)
    t.add_argument("--agent", choices=["qtable", "dqn"])
    t.add_argument("--fg", choices=["on", "off"])
    t.add_argument("--intrinsic", choices=["on", "off"])
    t.add_argument("--no-intrinsic", action="store_true", help="shortcut for beta0=0")
    t.add_argument("--seeds", type=int, nargs="+")
    t.add_argument("--episodes", type=int)
    t.add_argument("--steps", type=int)
    t.add_argument("--eval-steps", dest="eval_steps", type=int)
    t.add_argument("--fg-dims", dest="fg_dims", type=int)
    t.add_argument("--fg-cap", dest="fg_cap", type=int)
    t.add_argument("--beta0", type=float)
    t.add_argument("--beta-decay", dest="beta_decay", type=float)
    t.add_argument("--heads", type=int)
    t.add_argument("--epsilon", type=float)
    t.add_argument("--alpha", type=float)
    t.add_argument("--hidden", type=int)
    t.add_argument("--workers", type=int, default=1)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evaluate", help="simulate a fixed policy")
    _add_common(e)
    e.add_argument("--policy", required=True,
                   choices=["constant", "base-stock", "capped-base-stock",
                            "bracket", "myopic1", "myopic2", "optimal"])
    e.add_argument("--r", type=float, default=0.0)
    e.add_argument("--S", type=int, default=0)
    e.add_argument("--theta", type=float, default=0.0)
    e.add_argument("--policy-file", dest="policy_file")
    e.add_argument("--episodes", type=int, default=100)
    e.add_argument("--steps", type=int, default=400)
    e.add_argument("--warmup", type=int, default=100)
    e.set_defaults(func=cmd_evaluate)

    h = sub.add_parser("heuristic-search", help="brute-force policy parameters")
    _add_common(h)
    h.add_argument("--policy", required=True,
                   choices=["constant", "bracket", "base-stock", "capped-base-stock"])
    h.add_argument("--episodes", type=int, default=30)
    h.add_argument("--steps", type=int, default=400)
    h.add_argument("--warmup", type=int, default=100)
    h.add_argument("--s-max", dest="s_max", type=int)
    h.add_argument("--r-max", dest="r_max", type=int)
    h.set_defaults(func=cmd_heuristic_search)

    o = sub.add_parser("optimal", help="exact dynamic-programming policy")
    _add_common(o)
    o.add_argument("--tol", type=float, default=1e-6)
    o.add_argument("--evaluate", action="store_true")
    o.add_argument("--episodes", type=int, default=100)
    o.add_argument("--steps", type=int, default=400)
    o.add_argument("--warmup", type=int, default=100)
    o.set_defaults(func=cmd_optimal)

    th = sub.add_parser("theory", help="update-probability and graph verifiers")
    ths = th.add_subparsers(dest="theory_cmd", required=True)
    vm = ths.add_parser("verify-mu")
    _add_common(vm)
    vm.add_argument("--steps", type=int, default=10**6)
    vm.set_defaults(func=cmd_theory)
    gn = ths.add_parser("graph-numbers")
    _add_common(gn)
    gn.add_argument("--y", type=int, required=True)
    gn.add_argument("--censored", action="store_true")
    gn.set_defaults(func=cmd_theory)
    l5 = ths.add_parser("lemma5")
    _add_common(l5)
    l5.add_argument("--d", type=int, required=True)
    l5.set_defaults(func=cmd_theory)

    c = sub.add_parser("compare", help="compare two summary CSVs")
    c.add_argument("--a", required=True)
    c.add_argument("--b", required=True)
    c.add_argument("--threshold", type=float)
    c.add_argument("--out")
    c.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except LostSalesError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
