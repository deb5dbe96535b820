"""The eight acceptance criteria, each run at its stated tolerance.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""

import itertools
import json
import time

import numpy as np
import pytest

from effectus_lab import cli
from effectus_lab import effect_core as ec
from effectus_lab import effectus_cat as cat
from effectus_lab import jordan_matrix as jm
from effectus_lab import tensor_monoidal as tm
from effectus_lab.diamond import comprehension, dagger, filter_map, mutant_ceil, run_diamond_laws
from effectus_lab.effectus_cat import choi_distance
from effectus_lab.jordan_matrix import BlockSignature, make_D, run_jordan_laws

SEED = 7


def failures(reports):
    return [r.line() for r in reports if not r.passed]


@pytest.mark.acceptance(1, "finite effect monoids: enumerate up to size 5, all Boolean, sizes {1, 2, 4}")
def test_finite_effect_monoid_classification(tmp_path):
    start = time.perf_counter()
    code = cli.main(["enumerate", "--max-size", "5", "--out", str(tmp_path)])
    elapsed = time.perf_counter() - start
    assert code == 0
    assert elapsed < 60.0
    summary = json.loads((tmp_path / "summary.json").read_text())
    sizes = set()
    for row in summary["structures"]:
        t = ec.EffectTable.from_json(json.loads((tmp_path / row["file"]).read_text()))
        assert ec.check_effect_monoid(t).passed
        assert ec.boolean_witness(t) is None and ec.is_boolean(t)
        sizes.add(t.size)
    assert sizes == {1, 2, 4}
    assert summary["counts"]["monoid_iso"]["3"] == 0
    assert summary["counts"]["monoid_iso"]["5"] == 0


def _meet_by_order(t):
    """Greatest lower bound from the order x <= y iff y = x + z for some z."""
    n = t.size
    leq = [[any(t.ovee[x][z] == y for z in range(n)) for y in range(n)] for x in range(n)]
    meet = [[None] * n for _ in range(n)]
    for x, y in itertools.product(range(n), repeat=2):
        lower = [z for z in range(n) if leq[z][x] and leq[z][y]]
        top = [z for z in lower if all(leq[w][z] for w in lower)]
        meet[x][y] = top[0] if len(top) == 1 else None
    return meet


@pytest.mark.acceptance(2, "orthoalgebra SEAs of size <= 5 have product = meet and are Boolean")
def test_orthoalgebra_sea_collapse():
    tables = [s.table for s in ec.enumerate_sea_tables(5)]
    ortho = [t for t in tables if ec.check_orthoalgebra(t).passed]
    assert ortho, "no orthoalgebra SEA found: the check would be vacuous"
    exceptions = []
    for t in ortho:
        assert ec.check_sea_table(t).passed
        meet = _meet_by_order(t)
        by_order = all(t.product[x][y] == meet[x][y] for x in range(t.size) for y in range(t.size))
        if not (ec.product_is_meet(t) and by_order and ec.is_boolean(t)):
            exceptions.append(t.describe())
    assert exceptions == []


JORDAN_ACCEPTANCE = ["sea.a", "sea.b", "sea.c", "sea.d", "sea.e", "jordan.identity",
                     "jordan.square_positive", "jordan.quadratic_assoc", "seq.compressible",
                     "seq.quadratic"]
FLOORCEIL = [f"floorceil.{c}" for c in "abcdef"]


@pytest.mark.acceptance(3, "Jordan/SEA suite on [2] and [2,3], 200 trials, residual <= 1e-8, <= 120 s")
def test_jordan_sea_suite():
    start = time.perf_counter()
    reports = []
    for dims in ([2], [2, 3]):
        reports += run_jordan_laws(dims, 200, SEED, tol=1e-8, laws=JORDAN_ACCEPTANCE)
        reports += run_diamond_laws(dims, 200, SEED, tol=1e-8, laws=FLOORCEIL)
    elapsed = time.perf_counter() - start
    assert {r.law for r in reports} == set(JORDAN_ACCEPTANCE) | set(FLOORCEIL)
    assert failures(reports) == []
    assert max(r.residual for r in reports) <= 1e-8
    assert elapsed <= 120.0


DIAMOND_ACCEPTANCE = [f"galois.{c}" for c in "abcdefgh"] + [
    "assert.image", "assert.coimage", "assert.square", "dagger.laws", "pure.factorization", "sharp.oml"]


@pytest.mark.acceptance(4, "diamond suite on [2], [3], [2,2], 100 trials per object")
def test_diamond_structure_suite():
    reports = []
    dagger_gap = 0.0
    rng = np.random.default_rng(SEED)
    for dims in ([2], [3], [2, 2]):
        reports += run_diamond_laws(dims, 100, SEED, tol=1e-8, laws=DIAMOND_ACCEPTANCE)
        sig = BlockSignature(dims)
        for _ in range(100):
            p = jm.random_projection(rng, sig)
            dagger_gap = max(dagger_gap, choi_distance(dagger(comprehension(p).map), filter_map(p).map))
    assert {r.law for r in reports} == set(DIAMOND_ACCEPTANCE)
    assert failures(reports) == []
    by_law = {}
    for r in reports:
        by_law[r.law] = max(by_law.get(r.law, 0.0), r.residual)
    assert by_law["dagger.laws"] <= 1e-9
    assert dagger_gap <= 1e-9
    assert by_law["pure.factorization"] <= 1e-8


@pytest.mark.acceptance(5, "order derivations: exp(t D_p) keeps 50 PSD inputs PSD for 20 sharp p on [2,3]")
def test_order_derivation_positivity():
    rng = np.random.default_rng(SEED)
    sig = BlockSignature((2, 3))
    ts = [-10.0, -5.0, -1.0, -0.5, 0.5, 1.0, 5.0, 10.0]
    worst = 0.0
    for k in range(20):
        p = jm.random_projection(rng, sig)
        rep = jm.check_order_derivation(make_D(p), ts, 50, SEED + k, tol=1e-8)
        assert rep.passed, rep.line()
        assert rep.details["samples"] == len(ts) * 50
        worst = max(worst, rep.residual)
    assert worst <= 1e-8


TENSOR_ACCEPTANCE = ["tensor.assert", "tensor.quadratic", "tensor.jordan_embedding", "tensor.symmetry_exchange"]


@pytest.mark.acceptance(6, "tensor suite on [2]x[2] and [2]x[3], 100 trials, residual <= 1e-8, <= 120 s")
def test_tensor_suite():
    start = time.perf_counter()
    reports = []
    for b_sig in ((2,), (3,)):
        reports += tm.run_tensor_laws((2,), b_sig, 100, SEED, tol=1e-8, laws=TENSOR_ACCEPTANCE)
    elapsed = time.perf_counter() - start
    assert len(reports) == 8
    assert failures(reports) == []
    assert max(r.residual for r in reports) <= 1e-8
    assert elapsed <= 120.0


@pytest.mark.acceptance(7, "split of set x matrix at s=(1,0): round trips <= 1e-9 on 50 maps, Boolean + convex")
def test_splitting():
    prod = cat.ProductBackend()
    sp = cat.split_by_scalar(prod, (1, 0.0))
    assert isinstance(sp.factors[0], cat.SetBackend)
    assert isinstance(sp.factors[1], cat.MatrixBackend)
    reports = sp.verify(50, SEED, tol=1e-9)
    assert failures(reports) == []
    assert max(r.residual for r in reports) <= 1e-9
    for obj in (prod.obj(1, [1]), prod.obj(2, [2]), prod.obj(3, [2, 1])):
        d = cat.decompose_pred_space(obj, 100, SEED)
        assert d.boolean_report.passed and ec.is_boolean(d.boolean_table)
        assert d.boolean_table.size == 2 ** obj.set_part
        assert d.convex_report.passed


@pytest.mark.acceptance(8, "mutants: threshold ceiling and pqp product are each flagged with a counterexample")
def test_mutant_detection():
    pqp = run_jordan_laws([2], 200, SEED, seq=jm.seq_product_pqp)
    flagged = [r for r in pqp if not r.passed]
    assert flagged
    assert all(r.counterexample for r in flagged)
    ceil_reports = run_diamond_laws([2], 100, SEED, ceil_fn=mutant_ceil)
    flagged = [r for r in ceil_reports if not r.passed]
    assert flagged
    assert all(r.counterexample for r in flagged)
    assert "floorceil.d" in {r.law for r in flagged}
