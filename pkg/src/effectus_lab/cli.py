"""Command-line entry point: ``effectus-lab check | enumerate | verify``.

Exit codes: 0 all checks pass, 1 a law or axiom fails, 2 the input is invalid.
"""

from __future__ import annotations

import argparse
import fnmatch
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Sequence

from . import __version__
from . import effect_core as ec
from . import effectus_cat as cat
from .diamond import DIAMOND_LAWS, run_diamond_laws
from .jordan_matrix import JORDAN_LAWS, BlockSignature, run_jordan_laws
from .reports import LawReport
from .tensor_monoidal import TENSOR_CHECKS, TensorTooLarge, run_tensor_laws
from .tolerances import DEFAULT

RUN_MANIFEST_SCHEMA = "effectus-lab/run-manifest/1"
CHECK_REPORT_SCHEMA = "effectus-lab/check-report/1"
ENUMERATION_SCHEMA = "effectus-lab/enumeration/1"
THREADS_ENV = "EFFECTUS_LAB_THREADS"

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


# -- law catalog ----------------------------------------------------------------------

@dataclass(frozen=True)
class CatalogEntry:
    law_id: str
    group: str
    backends: tuple[str, ...]
    statement: str


_EFFECTUS_COMMON = (
    ("effectus.pcm", "ovee on each hom-set is a partial commutative monoid with unit 0"),
    ("effectus.biadditive", "composition distributes over ovee on both sides"),
    ("effectus.zero_reflect", "1 o f = 0 implies f = 0"),
    ("effectus.coproduct", "partial projections satisfy p_i k_i = id and p_i k_j = 0"),
    ("effectus.untying", "f, g summable implies k1 f, k2 g summable"),
)
_EFFECTUS_MATRIX = (
    ("effectus.pred_functor", "predicates pull back contravariantly: (g f)* = f* g*"),
    ("effectus.tupling", "a compatible pair tuples into the coproduct and projects back"),
    ("effectus.image", "im f o f = 1 o f, im f is minimal, im(g f) <= im g, equality for isomorphisms"),
    ("effectus.summable_units", "f, g are summable exactly when 1 o f + 1 o g <= 1"),
)
_SPLIT = (
    ("split.alpha_iso", "the comparison map [pi_s, pi_s'] is invertible"),
    ("split.roundtrip_fg", "alpha o F(G(f)) o alpha^-1 = f"),
    ("split.roundtrip_gf", "G(F(f1, f2)) = (f1, f2)"),
    ("split.functor", "G preserves identities and composition"),
    ("split.predicates", "p = s.p + s'.p"),
    ("split.boolean_component", "predicates of the set part form a Boolean effect monoid"),
)


def build_catalog() -> list[CatalogEntry]:
    out: list[CatalogEntry] = []
    for law in JORDAN_LAWS:
        out.append(CatalogEntry(law.law_id, "jordan", ("matrix",), law.statement))
    for law in DIAMOND_LAWS:
        out.append(CatalogEntry(law.law_id, "diamond", ("matrix",), law.statement))
    out.append(CatalogEntry("sharp.oml", "diamond", ("matrix",),
                            "sharp predicates form an orthomodular lattice; meet via the Galois formula"))
    for law_id, statement, _ in TENSOR_CHECKS:
        out.append(CatalogEntry(law_id, "tensor", ("matrix",), statement))
    for law_id, st in _EFFECTUS_COMMON:
        out.append(CatalogEntry(law_id, "effectus", ("matrix", "set", "product"), st))
    for law_id, st in _EFFECTUS_MATRIX:
        out.append(CatalogEntry(law_id, "effectus", ("matrix",), st))
    for by in ("states", "predicates"):
        out.append(CatalogEntry(f"separation.{by}", "separation", ("matrix", "set"),
                                f"distinct maps are told apart by a finite family of {by}"))
    out.append(CatalogEntry("tomography.finite", "tomography", ("matrix", "set", "product"),
                            "each bundled object has a separating predicate family of size <= k"))
    out.append(CatalogEntry("convex.action", "convex", ("matrix", "product"),
                            "the [0,1] action on effects satisfies the four convex-action laws"))
    out.append(CatalogEntry("pred.boolean", "pred", ("set",),
                            "predicates on a finite set form a Boolean effect monoid"))
    for law_id, st in _SPLIT:
        out.append(CatalogEntry(law_id, "split", ("product",), st))
    return out


CATALOG = build_catalog()


def select_laws(backend: str, patterns: Sequence[str]) -> list[CatalogEntry]:
    avail = [e for e in CATALOG if backend in e.backends]
    chosen = []
    for e in avail:
        if any(fnmatch.fnmatchcase(e.law_id, pat) for pat in patterns):
            chosen.append(e)
    unmatched = [p for p in patterns if not any(fnmatch.fnmatchcase(e.law_id, p) for e in avail)]
    if unmatched:
        raise InputError(f"unknown law id or pattern for backend {backend}: {', '.join(unmatched)}")
    return chosen


# -- verify ------------------------------------------------------------------------------

@dataclass(frozen=True)
class SuiteConfig:
    backend: str
    dims: tuple[int, ...]
    sizes: tuple[int, ...]
    tensor_dims: tuple[int, ...]
    laws: tuple[str, ...]
    trials: int
    seed: int
    tol: float
    split: tuple[int, float]
    tomography_k: int

    def to_json(self) -> dict[str, Any]:
        return {
            "backend": self.backend, "dims": list(self.dims), "sizes": list(self.sizes),
            "tensor_dims": list(self.tensor_dims), "laws": list(self.laws), "trials": self.trials,
            "seed": self.seed, "tol": self.tol, "split": list(self.split), "tomography_k": self.tomography_k,
        }


def _group_runners(cfg: SuiteConfig) -> dict[str, Callable[[set[str]], list[LawReport]]]:
    sig = BlockSignature(cfg.dims)
    tol = cfg.tol
    b = cat.backend(cfg.backend)

    def effectus(ids: set[str]) -> list[LawReport]:
        if cfg.backend == "matrix":
            objs = None
        elif cfg.backend == "set":
            objs = list(cfg.sizes)
        else:
            objs = [cat.ProductObject(n, sig) for n in cfg.sizes]
        return [r for r in cat.run_effectus_laws(b, cfg.trials, cfg.seed, tol, objs) if r.law in ids]

    def separation(ids: set[str]) -> list[LawReport]:
        objs: list[Any] = [sig] if cfg.backend == "matrix" else list(cfg.sizes)
        return [cat.check_separation(o, law.split(".")[1], cfg.trials, cfg.seed)
                for law in sorted(ids) for o in objs]

    def tomography(ids: set[str]) -> list[LawReport]:
        return [cat.finite_tomography_check(b, cfg.tomography_k)]

    def convex(ids: set[str]) -> list[LawReport]:
        return [cat.convex_action_report(sig, cfg.trials, cfg.seed, tol)]

    def pred(ids: set[str]) -> list[LawReport]:
        out = []
        for n in cfg.sizes:
            if n > 4:
                raise InputError("set sizes above 4 exceed the powerset check budget")
            t = ec.powerset_table(n)
            mon = ec.check_effect_monoid(t)
            wit = ec.boolean_witness(t)
            ok = mon.passed and wit is None
            out.append(LawReport("pred.boolean", f"P({n})", ok, 0.0 if ok else 1.0,
                                 None if ok else (mon.counterexample or wit)))
        return out

    def split(ids: set[str]) -> list[LawReport]:
        sp = cat.split_by_scalar(b, cfg.split)  # type: ignore[arg-type]
        objs = [cat.ProductObject(n, sig) for n in cfg.sizes]
        reports = [r for r in sp.verify(cfg.trials, cfg.seed, min(tol, DEFAULT.choi), objs) if r.law in ids]
        if "split.boolean_component" in ids:
            for o in objs:
                reports.append(cat.decompose_pred_space(o, cfg.trials, cfg.seed).boolean_report)
        return reports

    return {
        "jordan": lambda ids: run_jordan_laws(sig, cfg.trials, cfg.seed, tol, laws=ids),
        "diamond": lambda ids: run_diamond_laws(sig, cfg.trials, cfg.seed, tol, laws=ids),
        "tensor": lambda ids: run_tensor_laws(sig, BlockSignature(cfg.tensor_dims), cfg.trials,
                                              cfg.seed, tol, laws=ids),
        "effectus": effectus,
        "separation": separation,
        "tomography": tomography,
        "convex": convex,
        "pred": pred,
        "split": split,
    }


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise InputError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def run_suite(cfg: SuiteConfig, threads: int = 1) -> list[LawReport]:
    entries = select_laws(cfg.backend, cfg.laws)
    order = {e.law_id: i for i, e in enumerate(entries)}
    groups: dict[str, set[str]] = {}
    for e in entries:
        groups.setdefault(e.group, set()).add(e.law_id)
    runners = _group_runners(cfg)
    jobs = list(groups.items())
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda job: runners[job[0]](job[1]), jobs))
    else:
        results = [runners[g](ids) for g, ids in jobs]
    reports = [r for chunk in results for r in chunk]
    reports.sort(key=lambda r: order.get(r.law, len(order)))
    return reports


def build_manifest(cfg: SuiteConfig, reports: Sequence[LawReport],
                   elapsed: float | None = None) -> dict[str, Any]:
    statements = {e.law_id: e.statement for e in CATALOG}
    out: dict[str, Any] = {
        "schema": RUN_MANIFEST_SCHEMA,
        "version": __version__,
        "config": cfg.to_json(),
        "reports": [dict(r.to_json(), statement=statements.get(r.law, "")) for r in reports],
        "passed": all(r.passed for r in reports),
        "counts": {"pass": sum(r.passed for r in reports), "fail": sum(not r.passed for r in reports)},
    }
    if elapsed is not None:
        out["wall_clock_s"] = round(elapsed, 3)
    return out


def _write_json(path: str, data: Any) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    tmp = p.with_name(p.name + ".tmp")
    tmp.write_text(json.dumps(data, indent=2) + "\n")
    tmp.replace(p)


def cmd_verify(args: argparse.Namespace) -> int:
    if args.trials < 1:
        raise InputError("--trials must be at least 1")
    if args.tol is not None and not args.tol > 0:
        raise InputError("--tol must be positive")
    cfg = SuiteConfig(
        backend=args.backend, dims=tuple(args.dims), sizes=tuple(args.sizes),
        tensor_dims=tuple(args.tensor_dims), laws=tuple(args.laws), trials=args.trials,
        seed=args.seed, tol=DEFAULT.law if args.tol is None else args.tol,
        split=args.split, tomography_k=args.tomography_k,
    )
    if args.list:
        for e in select_laws(cfg.backend, cfg.laws):
            print(f"{e.law_id:32s} {e.statement}")
        return EXIT_PASS
    start = time.perf_counter()
    try:
        reports = run_suite(cfg, thread_count())
    except (cat.TrivialScalar, ec.NotIdempotent, ec.BudgetExceeded, TensorTooLarge, ValueError) as exc:
        raise InputError(str(exc)) from exc
    elapsed = time.perf_counter() - start
    for r in reports:
        print(r.line())
    manifest = build_manifest(cfg, reports, elapsed if args.timing else None)
    c = manifest["counts"]
    print(f"{'PASS' if manifest['passed'] else 'FAIL'}: {c['pass']} passed, {c['fail']} failed")
    if args.json:
        _write_json(args.json, manifest)
    return EXIT_PASS if manifest["passed"] else EXIT_FAIL


# -- check ---------------------------------------------------------------------------------

def load_table(path: str) -> ec.EffectTable:
    if path.startswith("bundled:"):
        try:
            text = resources.files("effectus_lab").joinpath("data", path.split(":", 1)[1]).read_text()
        except OSError:
            raise InputError(f"no bundled table named {path.split(':', 1)[1]!r}") from None
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return ec.EffectTable.from_json(data)
    except ec.MalformedTable as exc:
        raise InputError(f"malformed table: {exc}") from None


def cmd_check(args: argparse.Namespace) -> int:
    t = load_table(args.file)
    reports = [ec.check_effect_algebra(t)]
    notes: list[str] = []
    if reports[0].passed and args.kind in ("monoid", "sea"):
        if t.product is None:
            raise InputError(f"kind {args.kind} needs a product table")
        rep = ec.check_effect_monoid(t) if args.kind == "monoid" else ec.check_sea_table(t)
        reports.append(rep)
        if args.kind == "monoid" and rep.passed:
            notes.append(f"boolean: {ec.is_boolean(t)}")
        if not rep.passed and t.size <= ec.MAX_ENUMERATION_SIZE:
            base = ec.EffectTable(t.names, t.zero, t.one, t.ovee, t.perp)
            found = ec.sea_products(base) if args.kind == "sea" else ec.effect_monoid_products(base)
            word = "sequential" if args.kind == "sea" else "effect-monoid"
            notes.append(f"exhaustive search: {len(found)} valid {word} product(s) on this effect algebra")
    passed = all(r.passed for r in reports)
    for r in reports:
        print(r.line())
    for n in notes:
        print(n)
    print("PASS" if passed else "FAIL")
    if args.json:
        _write_json(args.json, {"schema": CHECK_REPORT_SCHEMA, "file": args.file, "kind": args.kind,
                                "pass": passed, "reports": [r.to_json() for r in reports], "notes": notes})
    return EXIT_PASS if passed else EXIT_FAIL


# -- enumerate -----------------------------------------------------------------------------

def cmd_enumerate(args: argparse.Namespace) -> int:
    try:
        structures = ec.enumerate_effect_monoids(args.max_size)
    except ec.BudgetExceeded as exc:
        raise InputError(str(exc)) from None
    counts = ec.enumeration_counts(structures, args.max_size)
    rows = []
    per_size: dict[int, int] = {}
    for s in structures:
        k = per_size.get(s.table.size, 0)
        per_size[s.table.size] = k + 1
        name = f"monoid_size{s.table.size}_{k}.json"
        rows.append({"file": name, "size": s.table.size, "boolean": s.boolean})
        if args.out:
            _write_json(os.path.join(args.out, name), s.table.to_json())
    summary = {
        "schema": ENUMERATION_SCHEMA,
        "max_size": args.max_size,
        "counts": {k: {str(n): c for n, c in v.items()} for k, v in counts.items()},
        "structures": rows,
        "all_boolean": all(r["boolean"] for r in rows),
    }
    if args.out:
        _write_json(os.path.join(args.out, "summary.json"), summary)
    shown = {n: c for n, c in counts["monoid_iso"].items()}
    print(f"effect monoids up to isomorphism by size: {shown}")
    print(f"distinct underlying effect algebras by size: {counts['algebra_iso']}")
    print(f"all Boolean: {summary['all_boolean']}")
    return EXIT_PASS if summary["all_boolean"] else EXIT_FAIL


# -- argument parsing ------------------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return vals


def _scalar(text: str) -> tuple[int, float]:
    parts = text.split(",")
    try:
        if len(parts) != 2:
            raise ValueError
        return int(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'bit,value' such as 1,0, got {text!r}") from None


def _globs(text: str) -> list[str]:
    return [g.strip() for g in text.split(",") if g.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="effectus-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"effectus-lab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="check an effect-table JSON file")
    c.add_argument("file", help="path, or bundled:boolean4.json / bundled:chain3.json")
    c.add_argument("--kind", choices=("ea", "monoid", "sea"), required=True)
    c.add_argument("--json", help="write the report as JSON to this path")
    c.set_defaults(func=cmd_check)

    e = sub.add_parser("enumerate", help="enumerate finite effect monoids up to isomorphism")
    e.add_argument("--max-size", type=int, required=True)
    e.add_argument("--out", help="directory for one JSON file per structure plus summary.json")
    e.set_defaults(func=cmd_enumerate)

    v = sub.add_parser("verify", help="run law suites on sampled instances")
    v.add_argument("--backend", choices=("matrix", "set", "product"), default="matrix")
    v.add_argument("--dims", type=_int_list, default=[2], help="block dims of the matrix object, e.g. 2,3")
    v.add_argument("--sizes", type=_int_list, default=[1, 2, 3], help="set sizes for set/product backends")
    v.add_argument("--tensor-dims", type=_int_list, default=[2], help="right tensor factor for tensor laws")
    v.add_argument("--laws", type=_globs, default=["*"], help="comma-separated globs over law ids")
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tol", type=float, default=None, help=f"law tolerance (default {DEFAULT.law})")
    v.add_argument("--split", type=_scalar, default=(1, 0.0), help="idempotent scalar for split laws")
    v.add_argument("--tomography-k", type=int, default=16)
    v.add_argument("--json", help="write the run manifest to this path")
    v.add_argument("--timing", action="store_true", help="include wall-clock time in the manifest")
    v.add_argument("--list", action="store_true", help="list the selected laws and exit")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
