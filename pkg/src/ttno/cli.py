"""Command-line surface: build, bench, cayley, oqs, plotdata.

Exit codes: 0 success, 2 parse error, 3 validation error, 4 verification
mismatch, 5 dense cap exceeded.  CSVs carry a header row; floats are printed
with 17 significant digits.  Seeds are mandatory for benchmarks and seed 0
is refused.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings

import numpy as np

from . import assembly, closedform, diagram, oqs, svdref
from .errors import (DenseCapExceededError, DuplicateTermError,
                     UnknownOperatorError, ValidationError)
from .operators import (Hamiltonian, OperatorRegistry, ProductTerm,
                        SiteOperator, to_dense)
from .tree import TreeTopology

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_VERIFY = 4
EXIT_CAP = 5

FLOAT_FMT = "%.17g"


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise _ParseFailure(
            f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise _ParseFailure(f"{path}: {exc}") from exc


class _ParseFailure(Exception):
    pass


def load_hamiltonian(tree: TreeTopology, data: dict) -> tuple[Hamiltonian,
                                                              OperatorRegistry]:
    registry = OperatorRegistry()
    for label, spec in (data.get("operators") or {}).items():
        dim = int(spec["dim"])
        flat = spec["matrix"]
        if len(flat) != dim * dim:
            raise ValidationError(
                f"matrix for {label!r} must hold {dim * dim} row-major entries")
        mat = np.array([complex(re, im) for re, im in flat],
                       dtype=complex).reshape(dim, dim)
        registry.register(label, mat)
    terms = []
    for raw in data.get("terms", []):
        re, im = raw.get("coeff", [1.0, 0.0])
        factors = {}
        for site_str, label in raw.get("factors", {}).items():
            site = int(site_str)
            if site not in tree.phys_dims:
                raise ValidationError(f"term factor on unknown site {site}")
            factors[site] = SiteOperator(label, tree.phys_dim(site))
        terms.append(ProductTerm(complex(re, im), factors))
    if not terms:
        raise ValidationError("hamiltonian has no terms")
    return Hamiltonian(tree, terms), registry


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _bond_report_csv(dims: dict, opt: dict | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if opt is None:
        w.writerow(["edge", "alg_dim"])
        for e in sorted(dims):
            w.writerow([f"{e[0]}-{e[1]}", dims[e]])
    else:
        w.writerow(["edge", "alg_dim", "opt_dim"])
        for e in sorted(dims):
            w.writerow([f"{e[0]}-{e[1]}", dims[e], opt[e]])
    return buf.getvalue()


def verify_dump_against(path: str, h: Hamiltonian,
                        registry: OperatorRegistry,
                        cap: int | None = None) -> bool:
    """Re-read a TTNO dump and compare its contraction to the dense build."""
    ttno = assembly.read_ttno(path)
    got = assembly.contract_to_dense(ttno, cap=cap)
    want = to_dense(h, registry=registry, cap=cap)
    return bool(np.allclose(got, want, atol=1e-12, rtol=0.0))


def cmd_build(args) -> int:
    tree = TreeTopology.from_json_dict(_load_json(args.tree))
    h, registry = load_hamiltonian(tree, _load_json(args.hamiltonian))
    g = diagram.from_hamiltonian(h)
    ttno = assembly.emit_tensors(g, registry=registry)
    assembly.write_ttno(ttno, args.out)
    if args.report:
        _write(args.report, _bond_report_csv(g.bond_dimensions()))
    if args.verify:
        if not verify_dump_against(args.out, h, registry):
            print("verification FAILED: contraction differs from dense build",
                  file=sys.stderr)
            return EXIT_VERIFY
        print("verification passed")
    dims = g.bond_dimensions()
    print(f"built TTNO: {len(tree.nodes)} sites, "
          f"max bond {max(dims.values()) if dims else 1}")
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.seed == 0:
        raise ValidationError("seed 0 is refused; pick an explicit seed")
    tree = TreeTopology.from_json_dict(_load_json(args.tree))
    if args.root_at_leaf:
        leaves = [s for s in tree.nodes
                  if len(tree.neighbours(s)) == 1]
        tree = tree.re_root(min(leaves))
    term_counts = [int(x) for x in args.terms.split(",") if x]
    if not term_counts:
        raise ValidationError("--terms must list at least one term count")
    labels = [x for x in args.labels.split(",") if x]
    with warnings.catch_warnings():
        if args.root_at_leaf:
            warnings.simplefilter("ignore")
        results = svdref.run_bench(tree, term_counts, args.samples, args.seed,
                                   op_labels=labels,
                                   max_support=args.max_support)
    _write(args.out, svdref.detail_csv(results))
    if args.summary:
        _write(args.summary, svdref.summary_csv(results))
    return EXIT_OK


def cmd_cayley(args) -> int:
    spec = closedform.CayleyTreeSpec(args.degree, args.depth)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["degree", "depth", "chi", "closed_form", "brute_force"])
    mismatch_in_regime = False
    if args.all_to_all:
        cf = closedform.all_to_all_bound(spec)
        bf = closedform.brute_force_all_to_all_bond(spec)
        w.writerow([spec.degree, spec.depth, "all", cf, bf])
        mismatch_in_regime = cf != bf
    else:
        chis = ([args.range] if args.range is not None
                else list(range(1, 2 * spec.depth)))
        for chi in chis:
            cf = closedform.fixed_range_bond_bound(spec, chi)
            bf = closedform.brute_force_root_bond(spec, chi)
            w.writerow([spec.degree, spec.depth, chi, cf, bf])
            if chi <= spec.depth and cf != bf:
                mismatch_in_regime = True
    _write(args.out, buf.getvalue())
    return EXIT_VALIDATION if mismatch_in_regime else EXIT_OK


def cmd_oqs(args) -> int:
    g_val = complex(args.g_re, args.g_im)
    spec = oqs.OQSSpec(args.spins, args.baths, coupling=args.coupling,
                       g=g_val, omega=args.omega, boson_dim=args.boson_dim)
    h = oqs.oqs_hamiltonian(spec, args.topology)
    g = diagram.from_hamiltonian(h)
    ttno = assembly.emit_tensors(g)
    if args.out:
        assembly.write_ttno(ttno, args.out)
    if args.report:
        dims = g.bond_dimensions()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["edge", "bond_dim"])
        for e in sorted(dims):
            w.writerow([f"{e[0]}-{e[1]}", dims[e]])
        w.writerow(["element_count", assembly.element_count(ttno)])
        w.writerow(["dense_element_count", assembly.dense_element_count(ttno)])
        _write(args.report, buf.getvalue())
    dims = g.bond_dimensions()
    print(f"{args.topology}: {len(h.tree.nodes)} sites, "
          f"max bond {max(dims.values()) if dims else 1}, "
          f"elements {assembly.element_count(ttno)}")
    return EXIT_OK


def cmd_plotdata(args) -> int:
    try:
        with open(args.csv) as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise _ParseFailure(f"{args.csv}: {exc}") from exc
    if not rows:
        raise _ParseFailure(f"{args.csv}: empty or header-only CSV")
    required = {"n_terms", "alg_dim", "opt_dim"}
    if not required.issubset(rows[0]):
        raise _ParseFailure(
            f"{args.csv}: need columns {sorted(required)}")

    hist: dict[tuple[int, int], int] = {}
    by_terms: dict[int, list[int]] = {}
    for row in rows:
        try:
            alg = int(row["alg_dim"])
            opt = int(row["opt_dim"])
            n_terms = int(row["n_terms"])
        except (KeyError, TypeError, ValueError) as exc:
            raise _ParseFailure(f"{args.csv}: bad row {row}") from exc
        hist[(alg, opt)] = hist.get((alg, opt), 0) + 1
        by_terms.setdefault(n_terms, []).append(alg - opt)

    prefix = args.out_prefix
    lines = ["alg_dim opt_dim count"]
    for (alg, opt) in sorted(hist):
        lines.append(f"{alg} {opt} {hist[(alg, opt)]}")
    _write(f"{prefix}_hist.dat", "\n".join(lines) + "\n")

    lines = ["n_terms r_diff"]
    for n_terms in sorted(by_terms):
        diffs = by_terms[n_terms]
        lines.append(f"{n_terms} {FLOAT_FMT % (sum(diffs) / len(diffs))}")
    _write(f"{prefix}_rdiff.dat", "\n".join(lines) + "\n")

    lo = min(min(a, o) for a, o in hist)
    hi = max(max(a, o) for a, o in hist)
    lines = ["dim dim"] + [f"{v} {v}" for v in range(lo, hi + 1)]
    _write(f"{prefix}_diag.dat", "\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ttno",
        description="Tree tensor network operator construction toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="compile a Hamiltonian file into a TTNO")
    b.add_argument("tree", help="tree JSON file")
    b.add_argument("hamiltonian", help="Hamiltonian JSON file")
    b.add_argument("--out", required=True, help="TTNO dump path")
    b.add_argument("--report", help="bond-dimension CSV path")
    b.add_argument("--verify", action="store_true",
                   help="re-read the dump and compare against the dense build")
    b.set_defaults(func=cmd_build)

    be = sub.add_parser("bench", help="random-Hamiltonian bond-dimension study")
    be.add_argument("tree")
    be.add_argument("--terms", default="5,10,20,30",
                    help="comma-separated term counts")
    be.add_argument("--samples", type=int, required=True)
    be.add_argument("--seed", type=int, required=True)
    be.add_argument("--labels", default="X,Y,Z")
    be.add_argument("--max-support", type=int, default=None)
    be.add_argument("--root-at-leaf", action="store_true",
                    help="re-root the tree at its smallest leaf first")
    be.add_argument("--out", required=True, help="per-edge detail CSV")
    be.add_argument("--summary", help="summary CSV (n_terms, r_diff)")
    be.set_defaults(func=cmd_bench)

    c = sub.add_parser("cayley", help="fixed-range bond bounds on Cayley trees")
    c.add_argument("--degree", type=int, required=True)
    c.add_argument("--depth", type=int, required=True)
    c.add_argument("--range", type=int, default=None, dest="range",
                   help="interaction range (default: sweep 1..2*depth-1)")
    c.add_argument("--all-to-all", action="store_true")
    c.add_argument("--out", default="-", help="output CSV (default stdout)")
    c.set_defaults(func=cmd_cayley)

    o = sub.add_parser("oqs", help="spin-boson model TTNO on a chosen topology")
    o.add_argument("--topology", choices=oqs.TOPOLOGIES, required=True)
    o.add_argument("--spins", type=int, required=True)
    o.add_argument("--baths", type=int, required=True)
    o.add_argument("--boson-dim", type=int, default=2)
    o.add_argument("--coupling", type=float, default=1.0)
    o.add_argument("--g-re", type=float, default=0.5)
    o.add_argument("--g-im", type=float, default=0.25)
    o.add_argument("--omega", type=float, default=1.5)
    o.add_argument("--out", help="TTNO dump path")
    o.add_argument("--report", help="per-edge bond dims + element counts CSV")
    o.set_defaults(func=cmd_oqs)

    pl = sub.add_parser("plotdata", help="gnuplot-ready files from a bench CSV")
    pl.add_argument("csv", help="per-edge detail CSV from `ttno bench`")
    pl.add_argument("--out-prefix", required=True)
    pl.set_defaults(func=cmd_plotdata)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _ParseFailure as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DenseCapExceededError as exc:
        print(f"dense cap exceeded: {exc}\n"
              "raise TTNO_DENSE_CAP or shrink the system", file=sys.stderr)
        return EXIT_CAP
    except (ValidationError, DuplicateTermError, UnknownOperatorError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
