"""Command-line front end.

Exit codes: 0 success, 1 input/parse error, 2 usage error, 3 run truncated
by ``--max-seconds``, 4 exact oracle timed out.
"""

from __future__ import annotations

import argparse
import inspect
import json
import logging
import math
import os
import sys
import time

import numpy as np

from . import __version__
from . import bounds as B
from .engine import RunConfig, phase1_deltas
from .engine import run as run_approx
from .errors import OracleTimeout, ParameterError, ProgBCError
from .estimator import EstimatorState, Sampler
from .graph import (brandes_exact, load_edge_list,
                    vertex_diameter_upper_bound, write_centrality_csv)
from .sampler import DEFAULT_BAG_CAP
from .topk import run_topk

log = logging.getLogger("progbc")

EXIT_OK, EXIT_INPUT, EXIT_USAGE, EXIT_TRUNCATED, EXIT_TIMEOUT = 0, 1, 2, 3, 4


def _open_unit(name):
    def parse(text):
        try:
            x = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number")
        if not 0 < x < 1:
            raise argparse.ArgumentTypeError(f"{name} must be in (0, 1)")
        return x
    return parse


def _positive_int(text):
    try:
        x = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer")
    if x < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return x


def _add_graph(p):
    p.add_argument("-g", "--graph", required=True, help="edge-list file")
    d = p.add_mutually_exclusive_group()
    d.add_argument("--directed", dest="directed", action="store_true")
    d.add_argument("--undirected", dest="directed", action="store_false")
    p.set_defaults(directed=False)


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=_positive_int,
                   default=os.cpu_count() or 1)
    p.add_argument("--max-seconds", type=float, default=None)
    p.add_argument("--out", default=None,
                   help="output directory (default: report on stdout)")


def _add_sampling(p, eps=True):
    if eps:
        p.add_argument("-e", "--epsilon", type=_open_unit("epsilon"),
                       default=0.01)
    p.add_argument("-d", "--delta", type=_open_unit("delta"), default=0.05)
    p.add_argument("-c", "--trials", type=_positive_int, default=25)
    p.add_argument("--lambda", dest="lam", type=_open_unit("lambda"),
                   default=0.1)
    p.add_argument("--base-a", type=float, default=2.0)
    p.add_argument("--ratio", type=float, default=1.2)
    p.add_argument("--bag-cap", type=_positive_int, default=DEFAULT_BAG_CAP)
    p.add_argument("--diameter-override", type=_positive_int, default=None)


def _add_topk(p, required):
    p.add_argument("-k", type=_positive_int, required=required, default=None)
    p.add_argument("--eta", type=_open_unit("eta"), default=0.1)
    p.add_argument("--kappa", type=_positive_int, default=5)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="progbc",
        description="Betweenness centrality with probabilistic guarantees.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("approx", help="additive approximation of all nodes")
    _add_graph(p)
    _add_sampling(p)
    _add_common(p)

    p = sub.add_parser("topk", help="relative approximation of the top k")
    _add_graph(p)
    _add_sampling(p, eps=False)
    _add_topk(p, required=True)
    _add_common(p)

    p = sub.add_parser("exact", help="exact betweenness (Brandes)")
    _add_graph(p)
    _add_common(p)

    p = sub.add_parser("stats", help="graph statistics")
    _add_graph(p)
    p.add_argument("--probe", type=_positive_int, default=1000,
                   help="samples used for the rho and max-centrality probe")
    p.add_argument("-d", "--delta", type=_open_unit("delta"), default=0.05)
    p.add_argument("--lambda", dest="lam", type=_open_unit("lambda"),
                   default=0.1)
    p.add_argument("--bag-cap", type=_positive_int, default=DEFAULT_BAG_CAP)
    p.add_argument("--diameter-override", type=_positive_int, default=None)
    _add_common(p)

    p = sub.add_parser("bounds-eval", help="evaluate one bound formula")
    p.add_argument("formula", choices=sorted(FORMULAS))
    p.add_argument("params", nargs="*", metavar="NAME=VALUE")

    p = sub.add_parser("validate", help="check guarantees against the "
                       "exact oracle over repeated seeded runs")
    _add_graph(p)
    _add_sampling(p)
    _add_topk(p, required=False)
    p.add_argument("--runs", type=_positive_int, default=10)
    _add_common(p)
    return ap


FORMULAS = {
    "g": B.g,
    "h": B.h,
    "h1": B.h1,
    "era": B.era_upper_bound,
    "eps": B.eps_bound,
    "nu": B.var_upper_bound,
    "log-term": B.schedule_log_term,
    "sufficient-samples": B.sufficient_samples,
    "sufficient-samples-approx": B.sufficient_samples_approx,
    "relative-deviation": B.relative_deviation,
    "invert-ci": B.invert_ci,
    "rho-bernstein": B.rho_bound_bernstein,
    "rho-empirical-bernstein": B.rho_bound_empirical_bernstein,
    "fixed-point": B.fixed_point,
}


def _config(args):
    return RunConfig(
        epsilon=getattr(args, "epsilon", 0.01), delta=args.delta,
        c=args.trials, lam=args.lam, a=args.base_a, ratio=args.ratio,
        bag_cap=args.bag_cap, seed=args.seed, threads=args.threads,
        diameter=args.diameter_override, max_seconds=args.max_seconds)


def _graph_stats(g):
    return {"nodes": int(g.n), "edges": int(g.n_edges),
            "directed": bool(g.directed)}


def _command_echo(args):
    # where the report goes is not part of what was computed
    return {k: v for k, v in sorted(vars(args).items())
            if k not in ("verbose", "out")}


def _emit(args, name, payload, timing=None):
    """Report JSON goes to ``--out/<name>`` or stdout; wall time is kept in a
    sidecar so reports of identical runs are byte-identical."""
    text = json.dumps(payload, indent=2, sort_keys=False) + "\n"
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, name), "w") as fh:
            fh.write(text)
        if timing is not None:
            with open(os.path.join(args.out, "timing.json"), "w") as fh:
                json.dump({"wall_time_s": timing}, fh)
                fh.write("\n")
    else:
        sys.stdout.write(text)


def _csv_path(args, name):
    if not args.out:
        return None
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def cmd_approx(args, g):
    rep = run_approx(g, _config(args))
    csv = _csv_path(args, "estimates.csv")
    if csv:
        write_centrality_csv(csv, g, rep.estimates, header="node,bc_estimate")
    payload = rep.to_json(_graph_stats(g), csv and "estimates.csv",
                          include_time=False)
    payload["command"] = _command_echo(args)
    _emit(args, "report.json", payload, rep.wall_time_s)
    return EXIT_OK if rep.guaranteed else EXIT_TRUNCATED


def cmd_topk(args, g):
    res = run_topk(g, args.k, args.eta, cfg=_config(args), kappa=args.kappa)
    payload = res.to_json(g.labels, include_time=False)
    payload["command"] = _command_echo(args)
    _emit(args, "topk.json", payload, res.wall_time_s)
    return EXIT_OK if res.guaranteed else EXIT_TRUNCATED


def cmd_exact(args, g):
    t0 = time.monotonic()
    bc = brandes_exact(g, max_seconds=args.max_seconds)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_centrality_csv(os.path.join(args.out, "exact.csv"), g, bc)
        _emit(args, "exact.json", {"command": _command_echo(args),
                                   "graph_stats": _graph_stats(g),
                                   "rho": float(bc.sum()),
                                   "max_bc": float(bc.max())},
              time.monotonic() - t0)
    else:
        write_centrality_csv(sys.stdout, g, bc)
    return EXIT_OK


def graph_stats_report(g, probe=1000, delta=0.05, lam=0.1,
                       bag_cap=DEFAULT_BAG_CAP, seed=0, diameter=None):
    """|V|, |E|, vertex-diameter bound, rho bound and max-centrality probe."""
    D = max(vertex_diameter_upper_bound(g, rng=seed, override=diameter), 2)
    st = EstimatorState(g.n, 1)
    Sampler(g, seed, math.log(1 / lam), bag_cap, 1).fill(st, 0, probe)
    lam_s = st.lam if st.m >= 2 else 0.0
    rho = B.rho_bound_empirical_bernstein(min(st.rho_tilde, D), lam_s, D,
                                          st.m, delta / 2)
    rho = min(rho, float(D))
    est = st.estimates
    vmax = int(np.argmax(est))
    nu = min(0.25, B.var_upper_bound(float(st.wimpy.max()), st.m,
                                     math.log(2 / delta)))
    _, xi = B.invert_ci(float(est[vmax]), st.m, delta / 2, nu, rho, g.n)
    return {
        "nodes": int(g.n), "edges": int(g.n_edges),
        "directed": bool(g.directed),
        "vertex_diameter_bound": int(D),
        "diameter_certified": not g.directed or diameter is not None
        or g.n < 2048,
        "rho_bound": float(rho), "rho_estimate": float(st.rho_tilde),
        "max_estimate": float(est[vmax]), "max_upper_bound": float(xi),
        "probe_samples": int(st.m), "delta": delta,
    }


def cmd_stats(args, g):
    rep = graph_stats_report(g, args.probe, args.delta, args.lam,
                             args.bag_cap, args.seed, args.diameter_override)
    rep["command"] = _command_echo(args)
    _emit(args, "stats.json", rep)
    return EXIT_OK


def _coerce(text):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def cmd_bounds_eval(args):
    fn = FORMULAS[args.formula]
    kwargs = {}
    for item in args.params:
        if "=" not in item:
            raise ParameterError(f"expected NAME=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        kwargs[k.replace("-", "_")] = _coerce(v)
    try:
        inspect.signature(fn).bind(**kwargs)
    except TypeError as exc:
        raise ParameterError(f"{args.formula}: {exc}") from None
    val = fn(**kwargs)
    if isinstance(val, tuple):
        print(" ".join(f"{x:.12g}" for x in val))
    else:
        print(f"{val:.12g}")
    return EXIT_OK


def topk_conditions(b, nodes, estimates, k, eta):
    """Booleans for containment, relative accuracy and near-k-th membership
    of a reported top-k set against exact values ``b``."""
    bk = float(np.sort(b)[::-1][k - 1])
    top = set(np.flatnonzero(b >= bk).tolist())
    reported = set(int(v) for v in nodes)
    contain = top <= reported
    accurate = all(abs(b[v] - e) <= eta * b[v] for v, e in zip(nodes,
                                                                estimates))
    near = all(b[v] >= bk * ((1 - eta) / (1 + eta)) ** 2
               for v in reported - top)
    return contain, accurate, near


def cmd_validate(args, g):
    if g.n > 100_000:
        raise ParameterError("graph too large for the exact oracle")
    if g.n > 10_000:
        log.warning("exact oracle on %d nodes may be slow", g.n)
    t0 = time.monotonic()
    try:
        b = brandes_exact(g, max_seconds=args.max_seconds)
    except OracleTimeout as exc:
        log.error("%s", exc)
        return EXIT_TIMEOUT
    runs = []
    failures = 0
    for r in range(args.runs):
        cfg = _config(args)
        cfg.seed = args.seed + r
        cfg.max_seconds = None
        if args.k:
            res = run_topk(g, args.k, args.eta, cfg=cfg, kappa=args.kappa)
            ok = topk_conditions(b, res.nodes,
                                 [e.estimate for e in res.entries],
                                 args.k, args.eta)
            failures += not all(ok)
            runs.append({"seed": cfg.seed, "containment": ok[0],
                         "relative_accuracy": ok[1], "near_kth": ok[2],
                         "m_final": res.m_final, "size": len(res.entries)})
        else:
            rep = run_approx(g, cfg)
            dev = float(np.abs(rep.estimates - b).max())
            failures += dev > cfg.epsilon
            runs.append({"seed": cfg.seed, "sup_deviation": dev,
                         "m_final": rep.m_final,
                         "stop_reason": rep.stop_reason})
    rate = failures / args.runs
    payload = {"command": _command_echo(args), "graph_stats": _graph_stats(g),
               "mode": "topk" if args.k else "approx", "runs": runs,
               "failures": failures, "failure_rate": rate,
               "delta": args.delta, "within_delta": rate <= args.delta}
    _emit(args, "validation.json", payload, time.monotonic() - t0)
    return EXIT_OK


COMMANDS = {"approx": cmd_approx, "topk": cmd_topk, "exact": cmd_exact,
            "stats": cmd_stats, "validate": cmd_validate}


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(
        level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose,
                                                                 2)],
        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "bounds-eval":
        try:
            return cmd_bounds_eval(args)
        except ProgBCError as exc:
            ap.error(str(exc))
    if getattr(args, "threads", None):
        import numba
        numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
    try:
        g = load_edge_list(args.graph, directed=args.directed)
    except (OSError, ProgBCError) as exc:
        log.error("cannot load graph: %s", exc)
        return EXIT_INPUT
    try:
        return COMMANDS[args.command](args, g)
    except ParameterError as exc:
        ap.error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
