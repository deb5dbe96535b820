import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from effectus_lab import jordan_matrix as jm
from effectus_lab.jordan_matrix import (BlockSignature, MatrixEffect, Projection, SelfAdjoint,
                                        SuperOperator, ceil, check_order_derivation, floor,
                                        jordan_product, make_D, make_T, quadratic, run_jordan_laws,
                                        seq_product, seq_product_pqp, spectral, sqrt_effect, triple)

SX = np.array([[0, 1], [1, 0]], complex)
SY = np.array([[0, -1j], [1j, 0]])
PLUS = 0.5 * np.array([[1, 1], [1, 1]], complex)


def sa(*blocks):
    return SelfAdjoint(blocks)


def close(a, b, tol=1e-12):
    return a.dist(b) <= tol


# -- construction ---------------------------------------------------------------------

def test_non_hermitian_rejected():
    with pytest.raises(jm.NotHermitian):
        sa(np.array([[0, 1], [0, 0]]))


def test_effect_range_enforced():
    with pytest.raises(jm.NotAnEffect):
        MatrixEffect([np.diag([1.5, 0.0])])
    with pytest.raises(jm.NotSharp):
        Projection([np.diag([1.0, 0.5])])


def test_signature_mismatch():
    with pytest.raises(jm.SignatureMismatch):
        jordan_product(sa(np.eye(2)), sa(np.eye(3)))


def test_json_round_trip():
    rng = np.random.default_rng(1)
    a = jm.random_hermitian(rng, BlockSignature((2, 3)))
    assert close(SelfAdjoint.from_json(a.to_json()), a, 0.0)


# -- products -------------------------------------------------------------------------

def test_jordan_product_examples():
    assert close(jordan_product(jm.diag(1, 2), jm.diag(3, 4)), jm.diag(3, 8))
    assert close(jordan_product(sa(SX), jm.diag(1, 0)), sa(0.5 * SX))
    rng = np.random.default_rng(2)
    a = jm.random_hermitian(rng, BlockSignature((3,)))
    assert close(jordan_product(a, jm.identity([3])), a)


def test_quadratic_examples():
    assert close(quadratic(sa(SX), jm.diag(1, 0)), jm.diag(0, 1))
    assert close(quadratic(jm.diag(2, 0), jm.diag(1, 1)), jm.diag(4, 0))
    rng = np.random.default_rng(3)
    b = jm.random_hermitian(rng, BlockSignature((2, 2)))
    assert close(quadratic(jm.identity([2, 2]), b), b)


def test_triple_examples():
    rng = np.random.default_rng(4)
    sig = BlockSignature((3,))
    a, b, c = (jm.random_hermitian(rng, sig) for _ in range(3))
    assert close(triple(a, a, c), quadratic(a, c), 1e-12)
    x, y, z = a.blocks[0], b.blocks[0], c.blocks[0]
    assert close(triple(a, b, c), sa(0.5 * (x @ z @ y + y @ z @ x)), 1e-12)
    assert close(triple(a, b, c), triple(b, a, c), 1e-12)
    a2 = jm.random_hermitian(rng, sig)
    assert close(triple(a + a2, b, c), triple(a, b, c) + triple(a2, b, c), 1e-12)
    p, q = jm.diag(1, 0), jm.diag(0, 1)
    assert close(triple(p, q, jm.identity([2])), sa(np.zeros((2, 2))))


def test_spectral_examples():
    out = spectral(jm.diag(1, 1, 0.5))
    assert [v for v, _ in out] == pytest.approx([1.0, 0.5])
    assert close(out[0][1], jm.diag(1, 1, 0), 1e-12)
    assert close(out[1][1], jm.diag(0, 0, 1), 1e-12)
    out = spectral(sa(SX))
    assert [v for v, _ in out] == pytest.approx([1.0, -1.0])
    assert close(out[0][1], sa(0.5 * (np.eye(2) + SX)), 1e-12)
    assert close(out[1][1], sa(0.5 * (np.eye(2) - SX)), 1e-12)


def test_spectral_reconstruction():
    rng = np.random.default_rng(5)
    a = jm.random_hermitian(rng, BlockSignature((4,)))
    total = sa(np.zeros((4, 4)))
    for v, p in spectral(a):
        total = total + v * p
    assert close(total, a, 1e-9)


def test_floor_and_ceil_examples():
    p = MatrixEffect([np.diag([1, 0.5, 0])])
    assert close(floor(p), jm.diag(1, 0, 0))
    assert close(ceil(p), jm.diag(1, 1, 0))
    r = jm.diag(1, 0, 1)
    assert close(floor(r), r) and close(ceil(r), r)
    q = MatrixEffect([0.7 * 0.5 * (np.eye(2) + SX)])
    assert close(floor(q), jm.zeros([2]), 1e-12)
    assert close(ceil(q), sa(0.5 * (np.eye(2) + SX)), 1e-12)


def test_sqrt_effect_against_scipy():
    rng = np.random.default_rng(6)
    p = jm.random_effect(rng, BlockSignature((3,)))
    ref = scipy.linalg.sqrtm(p.blocks[0])
    assert np.allclose(sqrt_effect(p).blocks[0], ref, atol=1e-10)


def test_seq_product_examples():
    assert close(seq_product(MatrixEffect([np.diag([0.5, 1])]), MatrixEffect([np.diag([1, 0])])),
                 jm.diag(0.5, 0), 1e-12)
    out = seq_product(MatrixEffect([PLUS]), MatrixEffect([np.diag([1, 0])]))
    assert np.allclose(out.blocks[0], 0.25 * np.ones((2, 2)))
    rng = np.random.default_rng(7)
    q = jm.random_effect(rng, BlockSignature((2, 1)))
    assert close(seq_product(jm.identity([2, 1]), q), q, 1e-12)


def test_seq_product_against_scipy_sqrtm():
    rng = np.random.default_rng(8)
    sig = BlockSignature((3,))
    for _ in range(5):
        p, q = jm.random_effect(rng, sig), jm.random_effect(rng, sig)
        r = scipy.linalg.sqrtm(p.blocks[0])
        assert np.allclose(seq_product(p, q).blocks[0], r @ q.blocks[0] @ r, atol=1e-10)


# -- order derivations -------------------------------------------------------------------

def test_T_and_D_examples():
    t = make_T(jm.diag(1, 0))
    assert close(t(sa(SX)), sa(0.5 * SX), 1e-12)
    one = jm.identity([2])
    eye = SuperOperator.identity(one.signature)
    assert make_T(one).dist(eye) <= 1e-12
    assert make_D(one).dist(eye) <= 1e-12
    assert make_D(jm.zeros([2])).dist(-1.0 * eye) <= 1e-12


def test_D_requires_projection():
    with pytest.raises(jm.NotSharp):
        make_D(jm.diag(0.5, 0))


def test_order_derivation_examples():
    assert check_order_derivation(make_D(jm.diag(1, 0)), [-5, -1, 1, 5], 20, 0).passed
    assert check_order_derivation(SuperOperator.identity(BlockSignature((2,))), [-1, 1], 20, 0).passed


def test_order_derivation_exploration_case_is_reported():
    # q -> sx q sx - q: the verdict is recorded, no expected value is claimed
    d = SuperOperator.from_function(lambda q: quadratic(sa(SX), q) - q, BlockSignature((2,)))
    rep = check_order_derivation(d, [-1, 1], 10, 0)
    assert rep.law == "orderderiv.positive"
    assert isinstance(rep.passed, bool)


def test_order_derivation_exponential_against_scipy():
    rng = np.random.default_rng(9)
    d = make_D(jm.random_projection(rng, BlockSignature((3,))))
    for t in (-2.0, 0.7):
        assert np.allclose(d.expm(t).matrix, scipy.linalg.expm(t * d.matrix), atol=1e-9)


# -- law suite ----------------------------------------------------------------------------

def test_law_suite_passes_on_small_objects():
    for sig in ([1], [2], [1, 2]):
        reports = run_jordan_laws(sig, 25, 7)
        assert all(r.passed for r in reports), [r.line() for r in reports if not r.passed]


def test_law_suite_on_scalars_is_exact():
    for r in run_jordan_laws([1], 20, 3):
        assert r.residual <= 1e-12, r.line()


def test_law_suite_filter_and_determinism():
    a = run_jordan_laws([2], 10, 11, laws=["sea.a", "sea.b"])
    b = run_jordan_laws([2], 10, 11, laws=["sea.b", "sea.a"])
    assert [r.law for r in a] == ["sea.a", "sea.b"]
    assert [r.to_json() for r in a] == [r.to_json() for r in b]


def test_pqp_mutant_keeps_additivity_but_is_flagged():
    reports = {r.law: r for r in run_jordan_laws([2], 40, 7, seq=seq_product_pqp)}
    assert reports["sea.a"].passed
    failing = [law for law, r in reports.items() if not r.passed]
    assert failing
    assert all(reports[law].counterexample for law in failing)


def test_trials_must_be_positive():
    with pytest.raises(ValueError):
        run_jordan_laws([2], 0, 0)


# -- properties ------------------------------------------------------------------------

sigs = st.sampled_from([(1,), (2,), (3,), (1, 2), (2, 2)])


@settings(max_examples=30, deadline=None)
@given(sigs, st.integers(0, 2**32 - 1))
def test_floor_below_effect_below_ceil(dims, seed):
    rng = np.random.default_rng(seed)
    p = jm.random_effect(rng, BlockSignature(dims))
    assert jm.leq_residual(floor(p), p) <= 1e-9
    assert jm.leq_residual(p, ceil(p)) <= 1e-9
    assert close(floor(p).perp, ceil(p.perp), 1e-9)


@settings(max_examples=30, deadline=None)
@given(sigs, st.integers(0, 2**32 - 1))
def test_jordan_identity_and_quadratic_match_associative_product(dims, seed):
    rng = np.random.default_rng(seed)
    sig = BlockSignature(dims)
    a, b = jm.random_hermitian(rng, sig), jm.random_hermitian(rng, sig)
    a2 = jordan_product(a, a)
    scale = max(1.0, a.norm()) ** 3 * max(1.0, b.norm())
    lhs = jordan_product(jordan_product(a, b), a2)
    rhs = jordan_product(a, jordan_product(b, a2))
    assert lhs.dist(rhs) <= 1e-12 * scale
    aba = SelfAdjoint._trusted(x @ y @ x for x, y in zip(a.blocks, b.blocks))
    assert quadratic(a, b).dist(aba) <= 1e-12 * scale


@settings(max_examples=30, deadline=None)
@given(sigs, st.integers(0, 2**32 - 1))
def test_seq_product_of_projections_quadratic_identity(dims, seed):
    rng = np.random.default_rng(seed)
    sig = BlockSignature(dims)
    p, q = jm.random_projection(rng, sig), jm.random_projection(rng, sig)
    pq = seq_product(p, q)
    assert SelfAdjoint._trusted(x @ x for x in pq.blocks).dist(seq_product(p, seq_product(q, p))) <= 1e-10
