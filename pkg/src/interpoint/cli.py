"""Command-line entry point: ``interpoint <subcommand> ...``.

Exit status is 0 on success, 2 on invalid input and 1 on runtime failure.
Diagnostics go to stderr as a single line; results go to stdout, as JSON
when ``--json`` is given.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import chen_stein_interpoint, default_threshold, mdp_estimate
from .distance import DistanceSpec, max_interpoint
from .distributions import parse_distribution
from .errors import InterpointError, ParameterError
from .io import emit_scatter_svg, read_matrix_csv, read_results_csv, write_results_csv, write_summary_json
from .law import GrowthRegime, normalized_statistic, regime_sequence
from .moments import analytic_profile, check_condition, gaussian_profile, profile_from_data, profile_from_sampler
from .montecarlo import SimulationConfig, reproduce_paper_figures, run_simulation


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _pairs(text: str) -> tuple[tuple[int, int], ...]:
    out = []
    for tok in text.split(","):
        p, sep, n = tok.strip().partition(":")
        if not sep:
            raise argparse.ArgumentTypeError(f"pair {tok!r} is not of the form p:n")
        try:
            out.append((int(p), int(n)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"pair {tok!r} is not of the form p:n") from None
    return tuple(out)


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _dist(text: str):
    try:
        return parse_distribution(text)
    except InterpointError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # SUPPRESS keeps a subparser from resetting a --json given before the subcommand
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="emit machine-readable JSON on stdout")
    parser = _Parser(prog="interpoint", description=__doc__.splitlines()[0], parents=[common])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", parents=[common], help="run the z simulation")
    s.add_argument("--dist", type=_dist, default="normal")
    s.add_argument("--pairs", type=_pairs, default="150:100,200:200,500:250,600:400")
    s.add_argument("--iters", type=int, default=300)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--q", type=float, default=2.0)
    s.add_argument("--profile-source", choices=["analytic", "monte_carlo"], default="analytic")
    s.add_argument("--threads", type=int, default=None)
    s.add_argument("--out", type=Path, required=True, help="results CSV; the summary JSON goes next to it")

    s = sub.add_parser("stat", parents=[common], help="maximum interpoint distance and z of a data file")
    s.add_argument("--input", type=Path, required=True)
    s.add_argument("--q", type=float, default=2.0)
    s.add_argument("--profile", default="estimate", help="'estimate' or 'analytic:<distribution>'")
    s.add_argument("--kernel", choices=["naive", "blocked_gram"], default=None)

    s = sub.add_parser("check", parents=[common], help="moment and correlation conditions")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--dist", type=_dist)
    g.add_argument("--input", type=Path)
    s.add_argument("--q", type=float, default=2.0)
    s.add_argument("--tau", type=float, default=None)
    s.add_argument("--mc-samples", type=int, default=0, help="also report a sampled estimate with this many triples")
    s.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("chenstein", parents=[common], help="Chen-Stein Poisson approximation check")
    s.add_argument("--dist", type=_dist, required=True)
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--t", type=float, default=None, help="threshold (default sqrt(3.9 ln p), normalized scale)")
    s.add_argument("--scale", choices=["raw", "normalized"], default=None)
    s.add_argument("--mode", choices=["exact", "monte_carlo", "auto"], default="auto")
    s.add_argument("--budget", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--q", type=float, default=2.0)

    s = sub.add_parser("mdp", parents=[common], help="moderate-deviation tail ratio")
    s.add_argument("--dist", type=_dist, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--iters", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("regime", parents=[common], help="(n, p) sequence for a growth regime")
    s.add_argument("--kind", choices=["polynomial", "exponential"], required=True)
    s.add_argument("--tau", type=float, default=1.0)
    s.add_argument("--c1", type=float, default=1.0)
    s.add_argument("--c2", type=float, default=1.0)
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--beta", type=float, default=0.25)
    s.add_argument("--c", type=float, default=1.0)
    s.add_argument("--n-values", type=_ints, default="100,200,400")

    s = sub.add_parser("reproduce-figures", parents=[common], help="the K=300 four-pair normal protocol")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-dir", type=Path, required=True)
    s.add_argument("--threads", type=int, default=None)

    s = sub.add_parser("plot", parents=[common], help="SVG scatter of z values")
    s.add_argument("--input", type=Path, required=True, help="results CSV or a one-column file of values")
    s.add_argument("--reference", type=float, default=2.0)
    s.add_argument("--pair-index", type=int, default=None)
    s.add_argument("--out", type=Path, required=True)
    return parser


def _config_hash(args: argparse.Namespace) -> str:
    items = {k: (v.describe() if hasattr(v, "describe") else v) for k, v in sorted(vars(args).items()) if k != "json"}
    blob = json.dumps(items, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Path):
        return str(x)
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def _emit(args, payload: dict, lines: list[str]):
    prov = {"version": __version__, "seed": getattr(args, "seed", None), "config_hash": _config_hash(args)}
    if getattr(args, "json", False):
        print(json.dumps(_jsonable({"provenance": prov, **payload}), indent=2, sort_keys=True))
    else:
        print(f"# interpoint {prov['version']} seed={prov['seed']} config={prov['config_hash']}")
        for line in lines:
            print(line)


def _cmd_simulate(args):
    config = SimulationConfig(
        dist=args.dist, pairs=args.pairs, iterations=args.iters, master_seed=args.seed,
        q=args.q, profile_source=args.profile_source,
    )
    result = run_simulation(config, args.threads)
    csv_path = write_results_csv(result, args.out)
    json_path = write_summary_json(result, args.out.with_suffix(".json"))
    summary = result.summary_dict()
    lines = [f"results: {csv_path}", f"summary: {json_path}"]
    for s in summary["pairs"]:
        lines.append(
            f"(p, n) = ({s['p']}, {s['n']}): K={s['K']} mean={s['mean']:.4f} sd={s['sd']:.4f} "
            f"min={s['min']:.4f} max={s['max']:.4f} in[1.5,2.5]={s['frac_in_band']:.3f}"
        )
    hyp = result.provenance["hypotheses"]
    if not hyp["within_hypotheses"]:
        lines.append("warning: outside the law's hypotheses: " + "; ".join(hyp["reasons"]))
    _emit(args, {"files": {"csv": csv_path, "json": json_path}, **summary}, lines)


def _cmd_stat(args):
    matrix = read_matrix_csv(args.input)
    kernel = args.kernel or ("blocked_gram" if args.q == 2 else "naive")
    res = max_interpoint(matrix, DistanceSpec(q=args.q, kernel=kernel))
    if args.profile == "estimate":
        profile = profile_from_data(matrix, args.q)
    elif args.profile.startswith("analytic:"):
        dist = parse_distribution(args.profile.split(":", 1)[1])
        if args.q == 2:
            profile = analytic_profile(dist)
        elif dist.family == "normal" and dist.mu == 0 and dist.sigma == 1:
            profile = gaussian_profile(args.q)
        else:
            profile = profile_from_sampler(dist, args.q)
    else:
        raise ParameterError(f"--profile must be 'estimate' or 'analytic:<distribution>', got {args.profile!r}")
    law = normalized_statistic(res.value_pow_q, matrix.n, matrix.p, profile)
    cond = check_condition(profile)
    payload = {
        "p": matrix.p, "n": matrix.n, "q": args.q, "kernel": kernel,
        "value_pow_q": res.value_pow_q, "value": res.value, "pair": [res.arg_i + 1, res.arg_j + 1],
        "center": law.center, "scale": law.scale, "z": law.z,
        "profile": profile.to_dict(), "condition": vars(cond),
    }
    lines = [
        f"p={matrix.p} n={matrix.n} q={args.q:g}",
        f"M^q = {res.value_pow_q:.17g}  M = {res.value:.17g}  pair (1-based) = ({res.arg_i + 1}, {res.arg_j + 1})",
        f"z = {law.z:.10g}  (center {law.center:.10g}, scale {law.scale:.10g}, profile {profile.source})",
        f"rho = {cond.rho:.6g}  passes(rho < 1/3) = {cond.passes}",
    ]
    _emit(args, payload, lines)


def _cmd_check(args):
    if args.dist is not None:
        dist = args.dist
        if args.q == 2:
            profile = analytic_profile(dist)
        else:
            profile = profile_from_sampler(dist, args.q, seed=args.seed)
        cond = check_condition(profile, tau=args.tau, dist=dist)
    else:
        dist = None
        profile = profile_from_data(read_matrix_csv(args.input), args.q, seed=args.seed)
        cond = check_condition(profile)
    payload = {"profile": profile.to_dict(), "condition": vars(cond)}
    lines = [
        f"source={profile.source} q={profile.q:g} m2={profile.m2:.10g} m4={profile.m4:.10g}",
        f"rho = {cond.rho:.10g}  passes(rho < 1/3) = {cond.passes}",
        f"kurtosis ratio m4/m2^2 = {cond.kurtosis_ratio:.10g}  passes(m4 < 5 m2^2) = {cond.equivalent_passes}",
    ]
    if profile.q != 2 and cond.rho_sq is not None:
        lines.append(f"rho at q=2 = {cond.rho_sq:.10g}")
    if cond.moment_order_checked is not None:
        lines.append(f"moment of order {cond.moment_order_checked:g} finite for this family")
    if args.mc_samples and dist is not None:
        est = profile_from_sampler(dist, args.q, args.mc_samples, args.seed)
        payload["monte_carlo"] = est.to_dict()
        lines.append(f"Monte Carlo rho = {est.rho:.6g} +/- {est.stderr['rho']:.2g}")
    _emit(args, payload, lines)


def _cmd_chenstein(args):
    scale = args.scale or ("normalized" if args.t is None else "raw")
    t = args.t if args.t is not None else default_threshold(args.p)
    rep = chen_stein_interpoint(
        args.dist, args.p, args.n, t, mode=args.mode, budget=args.budget, seed=args.seed, q=args.q, scale=scale
    )
    d = rep.to_dict()
    lines = [
        f"mode={rep.mode} scale={rep.scale} t={rep.t:.10g}",
        f"lambda={rep.lam:.10g} b1={rep.b1:.10g} b2={rep.b2:.10g} b3={rep.b3:g}",
        f"P(max <= t)={rep.p_max_le_t:.10g} exp(-lambda)={rep.poisson_approx:.10g}",
        f"gap={rep.gap:.10g} bound={rep.bound:.10g} gap<=bound={rep.gap <= rep.bound}",
    ]
    _emit(args, d, lines)


def _cmd_mdp(args):
    est = mdp_estimate(args.dist, args.n, args.x, args.iters, args.seed)
    lines = [
        f"P(S_n/sqrt(n) >= {est.x:g}) = {est.tail_prob:.6g} ({est.exceedances}/{est.iters})",
        f"1 - Phi(x) = {est.normal_tail:.6g}",
        f"ratio = {est.ratio:.6g} +/- {est.stderr:.2g}" + ("  [low count]" if est.low_count else ""),
    ]
    _emit(args, vars(est), lines)


def _cmd_regime(args):
    regime = GrowthRegime(
        kind=args.kind, tau=args.tau, c1=args.c1, c2=args.c2, alpha=args.alpha, beta=args.beta, c=args.c
    )
    seq = regime_sequence(regime, args.n_values)
    _emit(args, {"regime": vars(regime), "pairs": [{"n": n, "p": p} for n, p in seq]},
          [f"n={n} p={p}" for n, p in seq])


def _cmd_reproduce(args):
    files = reproduce_paper_figures(args.seed, args.out_dir, args.threads)
    result = files.pop("result")
    summary = result.summary_dict()
    lines = [f"wrote {f}" for f in files["csv"] + [files["json"]] + files["svg"]]
    for s in summary["pairs"]:
        lines.append(f"(p, n) = ({s['p']}, {s['n']}): mean z = {s['mean']:.4f}, sd = {s['sd']:.4f}")
    _emit(args, {"files": files, **summary}, lines)


def _load_values(path: Path, pair_index):
    with open(path, encoding="utf-8") as fh:
        head = [line for line in fh if line.strip() and not line.startswith("#")][:1]
    if head and head[0].strip().split(",")[0] == "pair_index":
        prov, cols = read_results_csv(path)
        if pair_index is None:
            present = sorted(set(cols["pair_index"].tolist()))
            if len(present) > 1:
                raise ParameterError(f"{path} holds pairs {present}; choose one with --pair-index")
            return cols["z"], prov
        mask = cols["pair_index"] == pair_index
        if not mask.any():
            raise ParameterError(f"no rows with pair_index {pair_index} in {path}")
        return cols["z"][mask], prov
    m = read_matrix_csv(path)
    if m.n != 1:
        raise ParameterError(f"{path}: expected a results CSV or a single column of values")
    return m.values[:, 0], None


def _cmd_plot(args):
    values, prov = _load_values(args.input, args.pair_index)
    out = emit_scatter_svg(values, args.reference, args.out, provenance=prov)
    _emit(args, {"file": out, "points": len(values)}, [f"wrote {out} ({len(values)} points)"])


def _warn_line(message, category, *_args, **_kwargs):
    print(f"interpoint: warning: {message}", file=sys.stderr)


COMMANDS = {
    "simulate": _cmd_simulate,
    "stat": _cmd_stat,
    "check": _cmd_check,
    "chenstein": _cmd_chenstein,
    "mdp": _cmd_mdp,
    "regime": _cmd_regime,
    "reproduce-figures": _cmd_reproduce,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = _warn_line
            COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"interpoint: error: {exc}", file=sys.stderr)
        return 2
    except InterpointError as exc:
        print(f"interpoint: error: {' '.join(str(exc).split())}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures (I/O, numerical) map to status 1
        print(f"interpoint: failed: {type(exc).__name__}: {' '.join(str(exc).split())}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
