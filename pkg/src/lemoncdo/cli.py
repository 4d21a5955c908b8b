"""Command-line entry point.

Exit status: 0 on success or PASS, 1 on a verification FAIL or a violated
bound, 2 on malformed input or usage errors.  Canonical outputs carry no
timestamps; progress messages go to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .adversary import (
    DEFAULT_BUDGET,
    search_worst,
    theoretical_bounds,
    valuediff_bound,
)
from .cdo_model import read_model, read_tranches, tv_vector, validate_model, value_profile
from .exceptions import FormatError, GuardExceeded, InfeasibleInstance
from .expander import (
    NeighborCounts,
    build_cdo_graph,
    read_certificate,
    read_graph,
    verify_expansion,
    write_certificate,
    write_graph,
)
from .validation import parse_index_list

log = logging.getLogger("lemoncdo")

TOL = 1e-9


class UsageError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write_or_print(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_valuation(args):
    G = read_graph(args.graph)
    M = read_model(args.model)
    T = read_tranches(args.tranches)
    if G.r is None:
        raise UsageError(f"{args.graph}: graph is not right-regular")
    if abs(T.size - G.r) > 1e-12:
        raise UsageError(f"last attachment point {T.size} differs from CDO size r = {G.r}")
    return G, M, T, value_profile(M, T, G.r)


def cmd_construct(args) -> int:
    G, cert = build_cdo_graph(args.alpha, args.n, args.m, args.d, args.r, args.mode)
    write_graph(G, args.out)
    cert_path = args.cert or f"{args.out}.cert"
    write_certificate(cert, cert_path)
    print(f"wrote {args.out} ({G.n} {G.m} {G.d} {G.r}) and {cert_path}"
          f"{' [vacuous certificate]' if cert.vacuous else ''}")
    return 0


def cmd_verify(args) -> int:
    G = read_graph(args.graph)
    rep = verify_expansion(G, args.k, args.gamma, args.mode, threads=args.threads)
    print(rep.summary())
    return 0 if rep.passed else 1


def cmd_value(args) -> int:
    G, M, T, profile = _load_valuation(args)
    if args.lemons is not None:
        placements = [parse_index_list(args.lemons)]
    elif args.placements:
        text = Path(args.placements).read_text()
        placements = [parse_index_list(line) for line in text.splitlines() if line.strip()]
    else:
        placements = [()]
    rows = []
    for L in placements:
        tv = tv_vector(G, profile, L)
        rows.append({"lemons": list(L), "tv": [float(x) for x in tv.totals]})
    _write_or_print(_dump({"tranches": list(T.points), "values": rows}), args.out)
    return 0


def cmd_attack(args) -> int:
    G, M, T, profile = _load_valuation(args)
    start = time.perf_counter()
    res = search_worst(G, profile, T, args.ell, args.mode, budget=args.budget,
                       seed=args.seed, threads=args.threads)
    log.info("attack examined %d placements in %.3fs", res.placements_examined,
             time.perf_counter() - start)
    dom = validate_model(M)
    report = {
        "config": {"ell": args.ell, "mode": args.mode, "seed": args.seed,
                   "budget": args.budget, "n": G.n, "m": G.m, "d": G.d, "r": G.r,
                   "tranches": list(T.points)},
        "model": {"mu": dom.mu, "lambda": dom.lam, "delta": dom.delta,
                  "dominated": dom.dominated},
        "empirical": res.to_dict(),
    }
    _write_or_print(_dump(report), args.out)
    return 0


def _bound_report(args, G, M, T, profile, ell):
    cert = read_certificate(args.cert)
    dom = validate_model(M)
    d = G.d
    k_max = cert.k_max_thm
    vacuous = cert.vacuous
    unique_delta = d - cert.gamma_unique
    if args.unique_delta == "verified":
        rep = verify_expansion(G, max(ell, 1), 0, "unique", threads=getattr(args, "threads", 1))
        unique_delta = float(d - rep.worst_ratio)
        k_max, vacuous = max(ell, 1), unique_delta >= d
    elif args.unique_delta is not None:
        unique_delta = float(args.unique_delta)
    b = theoretical_bounds(d, G.r, cert.delta, unique_delta, ell, dom.mu, dom.delta, G.m, T,
                           dom.dominated, k_max, vacuous=vacuous)
    return b, dom, unique_delta


def cmd_bound(args) -> int:
    G, M, T, profile = _load_valuation(args)
    b, dom, unique_delta = _bound_report(args, G, M, T, profile, args.ell)
    out = {"bounds": b.to_dict(), "applicability": b.applicability,
           "parameters": {"d": b.d, "r": b.r, "m": b.m, "ell": b.ell,
                          "unique_delta": unique_delta, "mu": dom.mu, "delta": dom.delta,
                          "dominated": dom.dominated}}
    _write_or_print(_dump(out), args.out)
    return 0


def cmd_report(args) -> int:
    G, M, T, profile = _load_valuation(args)
    attack = json.loads(Path(args.attack).read_text())
    emp = attack["empirical"]
    ell = emp["ell"]
    b, dom, unique_delta = _bound_report(args, G, M, T, profile, ell)
    b.valuediff_refined = np.asarray([
        valuediff_bound(NeighborCounts(tuple(c)), profile, unique_delta, ell, i)
        for i, c in enumerate(emp["counts_min"])])
    b.applicability["valuediff_refined"] = b.applicability["unique"]
    gaps = emp["gap_per_tranche"]
    violations = []
    per_tranche = {"trivial": b.trivial_tranche, "unique": b.unique_tranche,
                   "explicit": b.explicit_tranche, "general": b.general_tranche}
    for name, bound in per_tranche.items():
        if b.applicability[name]:
            violations += [f"{name} tranche {i}" for i, g in enumerate(gaps) if g > bound + TOL]
    if b.applicability["unique"]:
        violations += [f"valuediff tranche {i}" for i, (g, v) in
                       enumerate(zip(gaps, b.valuediff_refined)) if g > v + TOL]
        if emp["gap_l1"] > b.unique_l1 + TOL:
            violations.append("unique l1")
    if b.applicability["explicit"] and emp["gap_l1"] > b.explicit_l1 + TOL:
        violations.append("explicit l1")
    witness = {"L_min": emp["L_min"], "L_max": emp["L_max"], "l1_pair": emp["l1_pair"]}
    report = {
        "bounds": b.to_dict(),
        "empirical": {k: v for k, v in emp.items() if k not in ("L_min", "L_max", "l1_pair")},
        "applicability": b.applicability,
        "witness_placements": witness,
        "violations": violations,
        "parameters": {"unique_delta": unique_delta, "mu": dom.mu, "delta": dom.delta,
                       "dominated": dom.dominated},
    }
    _write_or_print(_dump(report), args.out)
    if args.csv:
        Path(args.csv).write_text(_report_csv(T, b, emp))
    for v in violations:
        log.error("bound violated: %s", v)
    return 1 if violations else 0


def _report_csv(T, b, emp) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tranche", "a", "b", "trivial", "unique", "explicit", "general",
                "valuediff", "gap", "eps"])
    for i in range(T.s):
        w.writerow([i, T.points[i], T.points[i + 1], b.trivial_tranche, b.unique_tranche,
                    b.explicit_tranche, b.general_tranche, b.valuediff_refined[i],
                    emp["gap_per_tranche"][i], emp["eps_per_tranche"][i]])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lemoncdo", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build a CDO family graph and certificate")
    c.add_argument("--alpha", type=float, required=True)
    for name in ("n", "m", "d", "r"):
        c.add_argument(f"--{name}", type=int, required=True)
    c.add_argument("--mode", choices=("direct", "theorem"), default="direct")
    c.add_argument("--out", required=True)
    c.add_argument("--cert", help="certificate path (default: <out>.cert)")
    c.add_argument("--threads", type=int, default=1)
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", help="exhaustively verify expansion")
    v.add_argument("--graph", required=True)
    v.add_argument("--k", type=int, required=True)
    v.add_argument("--gamma", type=int, required=True)
    v.add_argument("--mode", choices=("neighbor", "unique"), default="neighbor")
    v.add_argument("--threads", type=int, default=1)
    v.set_defaults(func=cmd_verify)

    def valuation(sp):
        sp.add_argument("--graph", required=True)
        sp.add_argument("--model", required=True)
        sp.add_argument("--tranches", required=True)
        sp.add_argument("--out")

    val = sub.add_parser("value", help="tranche totals for lemon placements")
    valuation(val)
    val.add_argument("--lemons", help="inline lemon indices, e.g. '0,3,7'")
    val.add_argument("--placements", help="file with one placement per line")
    val.set_defaults(func=cmd_value)

    a = sub.add_parser("attack", help="search lemon placements")
    valuation(a)
    a.add_argument("--ell", type=int, required=True)
    a.add_argument("--mode", choices=("exhaustive", "greedy", "random"), default="exhaustive")
    a.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--threads", type=int, default=1)
    a.set_defaults(func=cmd_attack)

    def unique_delta(sp):
        sp.add_argument("--cert", required=True)
        sp.add_argument("--unique-delta", default=None,
                        help="unique-neighbor deficiency: a number, or 'verified' to "
                             "measure it by brute force (default: from the certificate)")
        sp.add_argument("--threads", type=int, default=1)

    bnd = sub.add_parser("bound", help="theoretical error bounds")
    valuation(bnd)
    unique_delta(bnd)
    bnd.add_argument("--ell", type=int, required=True)
    bnd.set_defaults(func=cmd_bound)

    rep = sub.add_parser("report", help="merge an attack result with bounds")
    valuation(rep)
    unique_delta(rep)
    rep.add_argument("--attack", required=True)
    rep.add_argument("--csv")
    rep.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (FormatError, UsageError, GuardExceeded, InfeasibleInstance, OSError,
            ValueError, KeyError, IndexError, json.JSONDecodeError) as exc:
        print(f"lemoncdo {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
