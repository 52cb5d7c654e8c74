"""Command-line front end.

Exit codes: 0 success, 2 usage or bad input, 3 enumeration cap refused,
4 a verification failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import subprocess
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import factor_revealing as fr
from . import lp as lpc
from . import minimax as mm
from . import structure as st
from . import zero_one as zo
from .instances import (
    BUILTINS,
    DEFAULT_PERM_CAP,
    CapExceeded,
    InstanceFormatError,
    RankingSpec,
    appendix_example,
    binary_search_duel,
    builtin_instance,
    compression_duel_epsilon,
    format_bst,
    format_leaf_tree,
    format_ordering,
    load_instance,
    ranking_duel,
)
from .model import guarantee, optimal_cost, optimal_welfare, social_welfare

EXIT_OK, EXIT_USAGE, EXIT_CAP, EXIT_VERIFY = 0, 2, 3, 4
TABLE_LIMIT = 24  # largest game whose pure payoff table is printed


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    builtin: str | None = None
    seed: int = 0
    cap_perms: int = DEFAULT_PERM_CAP
    format: str = "json"
    out: str | None = None
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.cap_perms < 1:
            raise UsageError("--cap-perms must be at least 1")
        if self.format not in ("json", "csv"):
            raise UsageError("--format must be json or csv")


def version_string() -> str:
    """``git describe`` of the source tree when available, else the package version."""
    try:
        out = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"v{__version__}-g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return f"v{__version__}"


def tolerance_set() -> dict:
    return {
        "lp_feasibility": lpc.FEAS_TOL,
        "lp_gap": lpc.GAP_TOL,
        "certificate_value": lpc.CERT_VALUE_TOL,
        "minimax": mm.MINIMAX_TOL,
        "marginal": mm.MARGINAL_TOL,
        "birkhoff_input": mm.BIRKHOFF_INPUT_TOL,
        "structure_slack": st.SLACK_TOL,
        "layer": zo.LAYER_TOL,
    }


def thread_cap() -> int:
    raw = os.environ.get("DUELBENCH_THREADS", "")
    try:
        cap = int(raw)
    except ValueError:
        cap = os.cpu_count() or 1
    return max(1, cap)


# ---------------------------------------------------------------- helpers


def _label(g, s: int) -> str:
    kind = g.meta.get("kind")
    item = g.catalog[s] if g.catalog is not None else s
    if kind == "ranking":
        return format_ordering(item)
    if kind == "compression":
        return format_leaf_tree(item)
    if kind == "bst":
        return format_bst(item)
    return str(item)


def _load(cfg: RunConfig):
    if cfg.input and cfg.builtin:
        raise UsageError("give either --input or --builtin, not both")
    if cfg.builtin:
        try:
            return builtin_instance(cfg.builtin)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
    if cfg.input:
        try:
            return load_instance(cfg.input, cap_perms=cfg.cap_perms)
        except OSError as exc:
            raise UsageError(f"{cfg.input}: {exc.strerror}") from None
    raise UsageError("an instance is required: --input FILE or --builtin NAME")


def _support(g, x) -> list:
    return [{"strategy": _label(g, int(s)), "weight": float(x.weights[s])} for s in x.support()]


def _payoff_table(g) -> dict:
    U = g.payoff_matrix
    labels = [_label(g, s) for s in range(g.m)]
    return {"labels": labels, "rows": [[round(float(v), 12) for v in row] for row in U]}


def _flatten(obj, prefix="") -> list[tuple[str, str]]:
    if isinstance(obj, dict):
        out = []
        for k, v in obj.items():
            out += _flatten(v, f"{prefix}.{k}" if prefix else str(k))
        return out
    if isinstance(obj, list):
        out = []
        for i, v in enumerate(obj):
            out += _flatten(v, f"{prefix}[{i}]")
        return out
    return [(prefix, repr(obj) if isinstance(obj, float) else str(obj))]


def emit(report: dict, cfg: RunConfig, table: list[list] | None = None) -> None:
    """Write ``report`` as JSON, or as CSV (``table`` if given, else key,value rows)."""
    if cfg.format == "json":
        text = json.dumps(report, indent=2, default=_json_default) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if table is not None:
            w.writerows(table)
        else:
            w.writerow(["key", "value"])
            w.writerows(_flatten(json.loads(json.dumps(report, default=_json_default))))
        text = buf.getvalue()
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _envelope(cfg: RunConfig, body: dict) -> dict:
    return {"command": cfg.command, "version": version_string(), "seed": cfg.seed,
            "tolerances": tolerance_set(), **body}


# ---------------------------------------------------------------- commands


def cmd_solve(cfg: RunConfig) -> int:
    g = _load(cfg)
    value = mm.game_value(g)
    body = {"instance": g.name, "n": g.n, "strategies": g.m, "mode": g.mode, "game_value": value}
    summary = []
    if g.mode == "welfare":
        opt, s_opt = optimal_welfare(g)
        worst, xw = mm.worst_minimax_welfare(g)
        best, _ = mm.best_minimax_welfare(g)
        poc = mm._ratio(worst, opt)
        body.update(opt=opt, opt_strategy=_label(g, s_opt), worst_minimax=worst,
                    best_minimax=best, poc=poc, worst_minimax_support=_support(g, xw))
        summary.append(f"PoC <= {poc + 5e-5:.4f}")
    else:
        opt, s_opt = optimal_cost(g)
        worst, xw = mm.worst_minimax_cost(g)
        best, _ = mm.best_minimax_cost(g)
        poc = mm._ratio(worst, opt)
        body.update(opt=opt, opt_strategy=_label(g, s_opt), worst_minimax=worst,
                    best_minimax=best, poc_cost=poc, worst_minimax_support=_support(g, xw))
        summary.append(f"PoC_cost >= {poc - 5e-5:.4f}")
    if g.name == "appendix-example":
        _, xs = appendix_example()
        sw = social_welfare(g, xs)
        body["designated_xstar"] = {"support": _support(g, xs), "guarantee": guarantee(g, xs),
                                    "welfare": sw, "poc_upper_bound": sw / opt}
        summary.append(f"designated x* guarantee {guarantee(g, xs):+.3g}, SW {sw:.4g}, OPT {opt:.4g}")
    if g.m <= TABLE_LIMIT:
        body["payoff_table"] = _payoff_table(g)
    body["summary"] = summary
    emit(_envelope(cfg, body), cfg)
    return EXIT_OK


def cmd_poc(cfg: RunConfig, args) -> int:
    if args.p is not None:
        p = [float(v) for v in args.p.split(",")]
        spec = RankingSpec.linear(p, mode="cost" if args.cost else "welfare")
        if spec.mode == "welfare" and spec.n > cfg.cap_perms:
            poc = mm.price_of_competition_marginal(spec)
            emit(_envelope(cfg, {"n": spec.n, "path": "marginal", "poc": poc}), cfg)
            return EXIT_OK
        g = ranking_duel(spec, cap=cfg.cap_perms)
    else:
        g = _load(cfg)
    if g.mode == "welfare":
        body = {"poc": mm.price_of_competition(g)}
    else:
        body = {"poc_cost": mm.price_of_competition_cost(g)}
    emit(_envelope(cfg, {"instance": g.name, "n": g.n, "path": "explicit", **body}), cfg)
    return EXIT_OK


def cmd_alpha_curve(cfg: RunConfig, args) -> int:
    if args.k_max < 2:
        raise UsageError("--k-max must be at least 2")
    rows = fr.alpha_curve(args.k_max)
    if cfg.format == "csv":
        emit({}, cfg, table=[["k", "alpha_k"]] + [[k, repr(a)] for k, a in rows])
    else:
        emit(_envelope(cfg, {"curve": [{"k": k, "alpha_k": a} for k, a in rows]}), cfg)
    return EXIT_OK


def cmd_certify(cfg: RunConfig) -> int:
    rep = fr.verify_paper_certificate()
    body = {"k": fr.PUBLISHED_K, "claimed_theta": fr.PUBLISHED_THETA, **rep.as_dict()}
    emit(_envelope(cfg, body), cfg)
    return EXIT_OK if rep.valid else EXIT_VERIFY


def _construct_compression(eps: float) -> dict:
    c = compression_duel_epsilon(eps)
    g = c.game
    U = g.payoff_rows(np.array([c.xstar_index]))[0]
    sw_x = float(g.pure_scores[c.xstar_index])
    sw_opt = float(g.pure_scores[c.opt_index])
    bound = sw_x / sw_opt
    ok = bool(U.min() >= -mm.MINIMAX_TOL and bound <= eps)
    return {
        "construction": "compression", "epsilon": eps, "strategies": g.m,
        "xstar": format_leaf_tree(c.xstar_tree), "opt": format_leaf_tree(c.opt_tree),
        "xstar_min_payoff": float(U.min()), "xstar_minimax": bool(U.min() >= -mm.MINIMAX_TOL),
        "sw_opt": sw_opt, "sw_xstar": sw_x, "poc_bound": bound, "verified": ok,
    }


def _construct_bst(beta: float, seed: int, samples: int) -> dict:
    b = binary_search_duel(beta)
    rng = np.random.default_rng(seed)
    D = b.sample_depths(rng, samples)
    pay = b.payoffs(b.xstar_depths, D)
    vs_opt = float(b.payoffs(b.xstar_depths, b.depth_vector(b.opt_witness))[0])
    cond = b.case_conditions()
    ok = bool(pay.min() >= -mm.MINIMAX_TOL and vs_opt >= -mm.MINIMAX_TOL
              and cond["root_one_outweighed"] and cond["xstar_depth_of_1_is_2"]
              and cond["xstar_within_k_plus_2"] and b.poc_bound < beta)
    return {
        "construction": "binary-search", "beta": beta, "epsilon": b.epsilon, "k": b.k, "n": b.n,
        "note": "n = 3 * 2^k >= 24 for every beta in (0, 1)",
        "samples": samples, "xstar": format_bst(b.xstar_tree),
        "xstar_min_sampled_payoff": float(pay.min()), "xstar_payoff_vs_opt_witness": vs_opt,
        "case_conditions": cond, "sw_opt_lower_bound": b.welfare(b.opt_witness),
        "sw_xstar": b.xstar_welfare, "poc_bound": b.poc_bound, "verified": ok,
    }


def cmd_construct(cfg: RunConfig, args) -> int:
    if args.epsilon is not None:
        if not 0 < args.epsilon <= 1:
            raise UsageError("--epsilon must lie in (0, 1]")
        body = _construct_compression(args.epsilon)
    else:
        if not 0 < args.beta < 1:
            raise UsageError("--beta must lie in (0, 1)")
        if args.samples < 1:
            raise UsageError("--samples must be positive")
        body = _construct_bst(args.beta, cfg.seed, args.samples)
    emit(_envelope(cfg, body), cfg)
    return EXIT_OK if body["verified"] else EXIT_VERIFY


def _random_structure_case(seed_seq: np.random.SeedSequence, n_max: int):
    rng = np.random.default_rng(seed_seq)
    n = int(rng.integers(2, n_max + 1))
    p = rng.dirichlet(np.ones(n))
    f = np.sort(rng.random(n))[::-1]
    g = ranking_duel(RankingSpec.explicit(p, f, "welfare"))
    _, x = mm.worst_minimax_welfare(g)
    return st.structure_report(g, x)


def _merge(total: dict, rep: dict) -> None:
    for name, row in rep.items():
        acc = total.setdefault(name, {"pass": 0, "fail": 0, "vacuous": 0, "worst_slack": None})
        for key in ("pass", "fail", "vacuous"):
            acc[key] += row[key]
        if row.get("alternate_reading_changes_verdict"):
            acc["alternate_reading_changes_verdict"] = (
                acc.get("alternate_reading_changes_verdict", 0) + row["alternate_reading_changes_verdict"])
        if row["worst_slack"] is not None and (acc["worst_slack"] is None or row["worst_slack"] < acc["worst_slack"]):
            acc["worst_slack"] = row["worst_slack"]


def cmd_check_structure(cfg: RunConfig, args) -> int:
    if cfg.input or cfg.builtin:
        g = _load(cfg)
        if g.meta.get("kind") != "ranking" or g.mode != "welfare":
            raise UsageError("check-structure needs a welfare ranking instance")
        _, x = mm.worst_minimax_welfare(g)
        lemmas = st.structure_report(g, x)
        body = {"instance": g.name, "lemmas": lemmas}
    else:
        if args.count < 1 or not 2 <= args.n_max <= cfg.cap_perms:
            raise UsageError("--count must be positive and 2 <= --n-max <= --cap-perms")
        seeds = np.random.SeedSequence(cfg.seed).spawn(args.count)
        workers = min(thread_cap(), args.count)
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                reports = list(pool.map(_random_structure_case, seeds, [args.n_max] * args.count))
        else:
            reports = [_random_structure_case(s, args.n_max) for s in seeds]
        lemmas: dict = {}
        for rep in reports:
            _merge(lemmas, rep)
        body = {"instances": args.count, "n_max": args.n_max, "lemmas": lemmas}
    emit(_envelope(cfg, body), cfg)
    failed = any(row["fail"] for row in body["lemmas"].values())
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_zero_one(cfg: RunConfig) -> int:
    g = _load(cfg)
    if g.mode != "welfare":
        raise UsageError("zero-one applies to welfare instances")
    worst, x = mm.worst_minimax_welfare(g)
    profile = zo.zero_one_profile(g, x)
    bound = min(v for _, v in profile)
    poc = mm._ratio(worst, optimal_welfare(g)[0])
    sw, layered = zo.layer_decomposition(g, x)
    if cfg.format == "csv":
        emit({}, cfg, table=[["alpha", "poc_alpha"]] + [[repr(a), repr(v)] for a, v in profile])
    else:
        emit(_envelope(cfg, {
            "instance": g.name, "profile": [{"alpha": a, "poc_alpha": v} for a, v in profile],
            "zero_one_bound": bound, "poc": poc, "welfare": sw, "layered_welfare": layered,
        }), cfg)
    ok = bound <= poc + 1e-9 and abs(sw - layered) <= zo.LAYER_TOL
    return EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="instance JSON file")
    common.add_argument("--builtin", choices=BUILTINS, help="named built-in instance")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--cap-perms", type=int, default=DEFAULT_PERM_CAP,
                        help="largest n for which n! orderings are enumerated")
    common.add_argument("--out", help="write the report here instead of stdout")

    parser = argparse.ArgumentParser(prog="duelbench", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"duelbench {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="game value, minimax welfare range and PoC")
    p = sub.add_parser("poc", parents=[common], help="price of competition")
    p.add_argument("--p", help="comma-separated probabilities for a linear ranking duel")
    p.add_argument("--cost", action="store_true", help="with --p, use linear cost")
    p = sub.add_parser("alpha-curve", parents=[common], help="optimal values of the factor-revealing LP")
    p.add_argument("--k-max", type=int, default=10)
    sub.add_parser("certify-dual", parents=[common], help="check the published k=10 dual point")
    p = sub.add_parser("construct", parents=[common], help="verify a lower-bound construction")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--epsilon", type=float, help="compression duel parameter")
    g.add_argument("--beta", type=float, help="binary search duel target ratio")
    p.add_argument("--samples", type=int, default=100_000)
    p = sub.add_parser("check-structure", parents=[common], help="run the structural checks")
    p.add_argument("--count", type=int, default=50, help="random instances when no instance is given")
    p.add_argument("--n-max", type=int, default=5)
    sub.add_parser("zero-one", parents=[common], help="threshold profile and 0-1 bound")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt = args.format or ("csv" if args.command == "alpha-curve" else "json")
    try:
        cfg = RunConfig(args.command, args.input, args.builtin, args.seed, args.cap_perms, fmt, args.out)
        if args.command == "solve":
            return cmd_solve(cfg)
        if args.command == "poc":
            return cmd_poc(cfg, args)
        if args.command == "alpha-curve":
            return cmd_alpha_curve(cfg, args)
        if args.command == "certify-dual":
            return cmd_certify(cfg)
        if args.command == "construct":
            return cmd_construct(cfg, args)
        if args.command == "check-structure":
            return cmd_check_structure(cfg, args)
        return cmd_zero_one(cfg)
    except (UsageError, InstanceFormatError) as exc:
        print(f"duelbench {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceeded as exc:
        print(f"duelbench {args.command}: refused: {exc}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
