"""twisted-k3 command line.

Exit codes: 0 success, 1 mathematical rejection (reason printed), 2 usage
error.
"""

from __future__ import annotations

import argparse
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional

from .assoc import (
    NotAdmissible,
    construct_witness,
    covering_index_bound,
    decide_associated,
    matches_K,
    verify_certificate,
)
from .discform import (
    Structure,
    UnclassifiedStructure,
    disc_form_K,
    disc_form_Tw,
    order_of_w,
    qform_iso,
    structure_of_disc,
    wsquare,
)
from .lattice import gram_T0, invariant_factors_formula, smith_normal_form
from .moduli import (
    DEFAULT_MERGE_BOUND,
    component_census,
    merge_rule_k_zero,
    satisfies_star2,
    square_obstruction,
    star2_reason,
)
from .report import ReportDocument, render_text
from .wclass import WClass


class UsageError(Exception):
    pass


class Rejection(Exception):
    def __init__(self, doc: ReportDocument):
        self.doc = doc


# --- commands ----------------------------------------------------------------

def cmd_check_dstar(dprime: int, workers: int = 1) -> ReportDocument:
    if dprime < 1:
        raise UsageError(f"d' must be >= 1, got {dprime}")
    rep = decide_associated(dprime, workers=workers)
    results = {
        "dprime": dprime,
        "satisfies": rep.satisfies,
        "decompositions": [
            {"d": d, "r": r, "verified": ok, "witness": [c.n, c.k], "x": c.x}
            for (d, r), c, ok in zip(rep.decompositions, rep.certificates, rep.verified)
        ],
    }
    if not rep.satisfies:
        results["reason"] = f"no decomposition d' = d r^2 with d satisfying (**)"
    doc = ReportDocument("check-dstar", {"dprime": dprime}, results, rep.certificates)
    if not rep.satisfies:
        raise Rejection(doc)
    return doc


def _check_wclass(d: int, r: int, n: int = 0, k: int = 0) -> WClass:
    try:
        return WClass(d, r, n, k)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_witness(d: int, r: int) -> ReportDocument:
    _check_wclass(d, r)
    inputs = {"d": d, "r": r}
    try:
        cert = construct_witness(d, r)
    except NotAdmissible:
        doc = ReportDocument("witness", inputs,
                             {"admissible": False, "reason": star2_reason(d)})
        raise Rejection(doc)
    ok = verify_certificate(cert)
    results = {"admissible": True, "verified": ok.ok, "witness": [cert.n, cert.k],
               "canonical": list(cert.canonical), "x": cert.x, "branch": cert.branch}
    if not ok:
        results["failed_check"] = ok.failed
    return ReportDocument("witness", inputs, results, [cert])


def cmd_components(d: int, r: int, bound: int = DEFAULT_MERGE_BOUND) -> ReportDocument:
    _check_wclass(d, r)
    rep = component_census(d, r, bound)
    results = {
        "grid_size": len(rep.representatives),
        "upper_bound": rep.upper_bound,
        "lower_bound": rep.lower_bound,
        "group_count": rep.group_count,
        "groups": [[list(cell) for cell in g] for g in rep.groups],
        "merges": rep.merges,
        "separations": rep.separations,
    }
    return ReportDocument("components", {"d": d, "r": r, "bound": bound}, results)


def cmd_disc(d: int, r: int, n: int, k: int) -> ReportDocument:
    c = _check_wclass(d, r, n, k)
    G = gram_T0(c)
    results = {
        "gram": [list(row) for row in G],
        "smith_factors": list(smith_normal_form(G).factors),
        "formula_factors": list(invariant_factors_formula(c).factors),
        "structure": structure_of_disc(c).value,
        "order_of_w": order_of_w(c),
        "w_square": wsquare(c),
    }
    try:
        results["form"] = disc_form_Tw(c)
    except UnclassifiedStructure as exc:
        results["form"] = None
        results["unclassified_factors"] = list(exc.factors)
    m = matches_K(c)
    results["matches_K"] = m.matches
    results["matches_K_x"] = m.x
    if m.reason:
        results["matches_K_reason"] = m.reason
    return ReportDocument("disc", {"d": d, "r": r, "n": n, "k": k}, results)


def _example_c8() -> dict:
    m11, m01, m00 = (matches_K(WClass(2, 2, n, k)) for n, k in ((1, 1), (0, 1), (0, 0)))
    checks = {
        "w11_matches_with_x_3": bool(m11) and m11.x == 3,
        "w01_fails": not m01,
        "w00_fails": not m00,
        "w00_w10_merge": merge_rule_k_zero(WClass(2, 2, 0, 0), WClass(2, 2, 1, 0)),
        "covering_index_1": covering_index_bound(WClass(2, 2, 1, 1)) == 1,
    }
    return {"checks": checks, "w11_x": m11.x, "w01_reason": m01.reason,
            "w00_reason": m00.reason}


def _example_c14() -> dict:
    c1, c2 = WClass(14, 7, 0, 1), WClass(14, 7, 1, 3)
    K = disc_form_K(686)
    i1, i2 = qform_iso(disc_form_Tw(c1), K), qform_iso(disc_form_Tw(c2), K)
    obs = square_obstruction(c1, c2)
    checks = {"w01_iso_K686": i1.isomorphic, "w13_iso_K686": i2.isomorphic,
              "square_obstruction": obs == "obstructed"}
    return {"checks": checks, "units": [i1.unit, i2.unit],
            "residues_mod_7": [c1.disc % 7, c2.disc % 7], "obstruction": obs}


EXAMPLES = {"c8": _example_c8, "c14": _example_c14}


def cmd_example(name: str) -> ReportDocument:
    if name not in EXAMPLES:
        raise UsageError(f"unknown example {name!r}; choose from {sorted(EXAMPLES)}")
    results = EXAMPLES[name]()
    results["all_passed"] = all(results["checks"].values())
    return ReportDocument("example", {"name": name}, results)


def _sweep_cell(args):
    d, r = args
    cert = construct_witness(d, r)
    ok = verify_certificate(cert)
    return d, r, ok.ok, ok.failed


def cmd_sweep(dmax: int, rmax: int, seed: int = 0, samples: int = 200,
              workers: int = 1) -> ReportDocument:
    cells = [(d, r) for d in range(2, dmax + 1, 2) if satisfies_star2(d)
             for r in range(1, rmax + 1)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            out = list(ex.map(_sweep_cell, cells, chunksize=8))
    else:
        out = [_sweep_cell(c) for c in cells]
    failures = [{"d": d, "r": r, "failed": f} for d, r, ok, f in out if not ok]

    # random agreement checks between the congruence test and form isometry
    rng = random.Random(seed)
    disagreements = []
    for _ in range(samples):
        d = 2 * rng.randint(1, max(1, dmax // 2))
        r = rng.randint(1, rmax)
        c = WClass(d, r, rng.randrange(r), rng.randrange(2 * d))
        if c.dprime % 6 not in (0, 2) or structure_of_disc(c) is Structure.OTHER:
            continue
        if bool(matches_K(c)) != bool(qform_iso(disc_form_Tw(c), disc_form_K(c.dprime))):
            disagreements.append([c.d, c.r, c.n, c.k])
    results = {"cells": len(cells), "failures": failures,
               "sampled": samples, "disagreements": disagreements,
               "passed": not failures and not disagreements}
    doc = ReportDocument("sweep", {"dmax": dmax, "rmax": rmax, "seed": seed,
                                   "workers": workers}, results)
    if not results["passed"]:
        raise Rejection(doc)
    return doc


# --- argument handling -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="twisted-k3",
        description="Discriminant forms of twisted K3 lattices and witnesses "
                    "for T_w = K_{d'}^perp.")
    p.add_argument("--json", action="store_true", help="emit a JSON report")
    p.add_argument("--sweep", nargs=2, type=int, metavar=("DMAX", "RMAX"),
                   help="build and verify witnesses for all d <= DMAX with (**) and r <= RMAX")
    p.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
    p.add_argument("--samples", type=int, default=200, help="sampled agreement checks in --sweep")
    p.add_argument("--bound", type=int, default=DEFAULT_MERGE_BOUND,
                   help="coefficient bound of the merge search box")
    p.add_argument("--workers", type=int, default=1, help="worker processes for sweeps")
    sub = p.add_subparsers(dest="command")

    s = sub.add_parser("check-dstar", help="decide (**') for d' and certify each decomposition")
    s.add_argument("dprime", type=int)
    s = sub.add_parser("witness", help="construct a certified witness for (d, r)")
    s.add_argument("d", type=int)
    s.add_argument("r", type=int)
    s = sub.add_parser("components", help="component census of the (n, k) grid")
    s.add_argument("d", type=int)
    s.add_argument("r", type=int)
    s = sub.add_parser("disc", help="discriminant data of T_w for w_{n,k}")
    for name in ("d", "r", "n", "k"):
        s.add_argument(name, type=int)
    s = sub.add_parser("example", help="reproduce a worked example")
    s.add_argument("name", choices=sorted(EXAMPLES))
    return p


def run(argv: Optional[List[str]] = None) -> ReportDocument:
    args = build_parser().parse_args(argv)
    if args.bound < 0 or args.workers < 1 or args.samples < 0:
        raise UsageError("--bound and --samples must be >= 0, --workers >= 1")
    if args.command is None:
        if args.sweep is None:
            raise UsageError("give a subcommand or --sweep DMAX RMAX")
        dmax, rmax = args.sweep
        if dmax < 2 or rmax < 1:
            raise UsageError("--sweep needs DMAX >= 2 and RMAX >= 1")
        return cmd_sweep(dmax, rmax, args.seed, args.samples, args.workers)
    if args.command == "check-dstar":
        return cmd_check_dstar(args.dprime, args.workers)
    if args.command == "witness":
        return cmd_witness(args.d, args.r)
    if args.command == "components":
        return cmd_components(args.d, args.r, args.bound)
    if args.command == "disc":
        return cmd_disc(args.d, args.r, args.n, args.k)
    return cmd_example(args.name)


def main(argv: Optional[List[str]] = None) -> int:
    as_json = "--json" in (argv if argv is not None else sys.argv[1:])
    try:
        doc = run(argv)
        code = 0
    except UsageError as exc:
        print(f"twisted-k3: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse
        return int(exc.code or 0)
    except Rejection as rej:
        doc, code = rej.doc, 1
    print(doc.to_json() if as_json else render_text(doc))
    return code


if __name__ == "__main__":
    sys.exit(main())
