import json

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from effectus_lab import diamond as dm
from effectus_lab import jordan_matrix as jm
from effectus_lab.diamond import (PureMap, assert_map, box, comprehension, dagger, diamond,
                                  filter_map, lower_diamond, pure_factorize, sharp_join, sharp_meet)
from effectus_lab.effectus_cat import (ChannelMap, Kraus, choi_distance, compose, identity_map, image,
                                       scale_map, zero_map)
from effectus_lab.jordan_matrix import BlockSignature, MatrixEffect, Projection

KET0 = np.array([1.0, 0.0])
PLUS = np.array([1.0, 1.0]) / np.sqrt(2)


def proj(v):
    return Projection([np.outer(v, np.conj(v))])


def kraus_map(src, tgt, *mats):
    return ChannelMap(src, tgt, [Kraus(0, 0, m) for m in mats], check=False)


# -- pure maps and dagger ------------------------------------------------------------

def test_pure_map_rejects_non_injective_pairing():
    with pytest.raises(dm.NotPure):
        PureMap([1, 1], [1], [Kraus(0, 0, [[0.5]]), Kraus(1, 0, [[0.5]])])


def test_from_channel_merges_proportional_kraus_and_rejects_rank_two():
    a = np.array([[0.3, 0.1], [0.0, 0.2]])
    f = kraus_map([2], [2], a, 2 * a)
    pf = PureMap.from_channel(f)
    assert len(pf.kraus) == 1 and choi_distance(pf, f) <= 1e-12
    with pytest.raises(dm.NotPure):
        PureMap.from_channel(kraus_map([2], [2], np.diag([0.5, 0]), np.diag([0, 0.5])))


def test_dagger_example():
    a = np.array([[0, 1], [0, 0]], complex)
    f = PureMap([2], [2], [Kraus(0, 0, a)])
    g = dagger(f)
    q = jm.random_hermitian(np.random.default_rng(0), BlockSignature((2,)))
    assert g.heisenberg(q).dist(jm.SelfAdjoint([a @ q.blocks[0] @ a.conj().T])) <= 1e-12
    assert choi_distance(dagger(g), f) <= 1e-12


def test_dagger_of_assert_is_assert():
    p = jm.random_effect(np.random.default_rng(1), BlockSignature((3,)))
    assert choi_distance(dagger(assert_map(p)), assert_map(p)) <= 1e-12


def test_dagger_of_comprehension_is_filter():
    p = jm.random_projection(np.random.default_rng(2), BlockSignature((2, 3)))
    assert choi_distance(dagger(comprehension(p).map), filter_map(p).map) <= 1e-9


def test_pure_map_json():
    f = dm.random_pure_map(np.random.default_rng(3), BlockSignature((2, 1)), BlockSignature((2,)))
    data = json.loads(json.dumps(f.to_json()))
    assert data["schema"] == dm.PURE_MAP_SCHEMA and data["pure"] is True
    assert choi_distance(PureMap.from_json(data), f) <= 1e-12


# -- assert maps -----------------------------------------------------------------------

def test_assert_examples():
    rng = np.random.default_rng(4)
    q = jm.random_hermitian(rng, BlockSignature((2,)))
    a = assert_map(MatrixEffect([np.diag([1.0, 0.0])]))
    p = np.diag([1.0, 0.0])
    assert a.heisenberg(q).dist(jm.SelfAdjoint([p @ q.blocks[0] @ p])) <= 1e-12
    half = assert_map(MatrixEffect([np.diag([0.5, 0.5])]))
    assert choi_distance(half, scale_map(identity_map([2]), 0.5)) <= 1e-12
    r = jm.random_effect(rng, BlockSignature((3,)))
    assert image(assert_map(r)).dist(jm.ceil(r)) <= 1e-9


# -- comprehension and filter --------------------------------------------------------------

def test_comprehension_example():
    w = comprehension(MatrixEffect([np.diag([1.0, 1.0, 0.5])]), certify=10)
    assert w.carrier == BlockSignature((2,))
    v = w.isometries[0]
    assert np.allclose(v @ v.conj().T, np.diag([1, 1, 0]), atol=1e-12)
    assert np.allclose(v.conj().T @ v, np.eye(2), atol=1e-12)
    assert max(w.certificate.values()) <= 1e-9


def test_comprehension_of_sharp_predicate():
    p = jm.random_projection(np.random.default_rng(5), BlockSignature((3,)))
    pi, xi = comprehension(p).map, filter_map(p).map
    assert choi_distance(compose(pi, xi), assert_map(p)) <= 1e-9
    assert choi_distance(compose(xi, pi), identity_map(pi.source)) <= 1e-9


def test_comprehension_without_unit_eigenvalue_is_zero_object():
    rng = np.random.default_rng(6)
    r = jm.random_projection(rng, BlockSignature((2,)))
    while r.trace() != pytest.approx(1.0):
        r = jm.random_projection(rng, BlockSignature((2,)))
    w = comprehension(MatrixEffect.of(0.3 * r))
    assert w.carrier == BlockSignature(()) and w.carrier.is_zero


def test_filter_example():
    p = MatrixEffect([np.diag([1.0, 0.5, 0.0])])
    w = filter_map(p, certify=10)
    assert w.carrier == BlockSignature((2,))
    expected = kraus_map([3], [2], np.array([[1, 0, 0], [0, 1 / np.sqrt(2), 0]]))
    assert choi_distance(w.map, expected) <= 1e-12
    assert max(w.certificate.values()) <= 1e-9


def test_filter_of_one_is_identity():
    assert choi_distance(filter_map(jm.identity([2, 1])).map, identity_map([2, 1])) <= 1e-12


def test_filter_composition_is_a_filter():
    rng = np.random.default_rng(7)
    sig = BlockSignature((3,))
    q = jm.random_effect(rng, sig)
    xq = filter_map(q).map
    p = jm.random_effect(rng, xq.target)
    comp = compose(filter_map(p).map, xq)
    # 1 o (xi^p xi^q) = p o xi^q, and the composite is epic onto its carrier
    assert comp.unit().dist(xq.heisenberg(p)) <= 1e-9
    assert image(comp).dist(jm.identity(comp.target)) <= 1e-9


# -- pure factorisation ------------------------------------------------------------------

def test_factorize_assert_of_sharp_predicate():
    p = jm.random_projection(np.random.default_rng(8), BlockSignature((3,)))
    fac = pure_factorize(assert_map(p))
    assert dm.unitarity_residual(fac.theta) <= 1e-9
    assert choi_distance(fac.theta, identity_map(fac.theta.source)) <= 1e-9
    assert choi_distance(fac.recompose(), assert_map(p)) <= 1e-9


def test_factorize_invertible_conjugation_matches_polar_decomposition():
    rng = np.random.default_rng(9)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    a = a / np.linalg.norm(a, 2)
    f = PureMap([3], [3], [Kraus(0, 0, a)])
    fac = pure_factorize(f)
    assert fac.comprehension.carrier == BlockSignature((3,))
    u, pos = scipy.linalg.polar(a)
    v, w = fac.comprehension.isometries[0], fac.filter.isometries[0]
    assert np.allclose(v @ fac.theta.kraus[0].matrix @ w.conj().T, u, atol=1e-9)
    assert fac.assertion.unit().dist(jm.SelfAdjoint([pos @ pos])) <= 1e-9
    assert choi_distance(fac.recompose(), f) <= 1e-9


def test_factorize_zero_map():
    fac = pure_factorize(PureMap([2], [2], []))
    assert fac.comprehension.carrier.is_zero and fac.filter.carrier.is_zero
    assert choi_distance(fac.recompose(), zero_map([2], [2])) == 0.0


# -- possibilistic maps and the sharp lattice ---------------------------------------------

def test_identity_acts_as_identity():
    p = jm.random_projection(np.random.default_rng(10), BlockSignature((2, 2)))
    idm = identity_map([2, 2])
    for op in (diamond, box, lower_diamond):
        assert op(idm, p).dist(p) <= 1e-9


def test_diamond_example():
    f = assert_map(MatrixEffect([np.diag([0.5, 1.0])]))
    assert diamond(f, Projection([np.diag([1.0, 0.0])])).dist(jm.diag(1, 0)) <= 1e-12


def test_half_map_has_same_diamond():
    rng = np.random.default_rng(11)
    for _ in range(5):
        f = dm.random_pure_map(rng, BlockSignature((3,)), BlockSignature((2,)))
        p = jm.random_projection(rng, BlockSignature((2,)))
        assert diamond(scale_map(f, 0.5), p).dist(diamond(f, p)) <= 1e-9


def test_meet_and_join_examples():
    p, q = Projection([np.diag([1.0, 0.0])]), jm.identity([2])
    assert sharp_meet(p, q).dist(p) <= 1e-12
    assert sharp_join(p, q).dist(q) <= 1e-12
    a, b = proj(KET0), proj(PLUS)
    assert sharp_meet(a, b).dist(jm.zeros([2])) <= 1e-9
    assert sharp_join(a, b).dist(jm.identity([2])) <= 1e-9
    r = jm.random_projection(np.random.default_rng(12), BlockSignature((3,)))
    assert sharp_join(r, r.perp).dist(jm.identity([3])) <= 1e-9


def test_oml_check():
    assert dm.check_oml([3], 20, 0).passed


# -- law suite -------------------------------------------------------------------------

@pytest.mark.parametrize("dims", [[1], [2], [2, 3]])
def test_diamond_laws_pass(dims):
    reports = dm.run_diamond_laws(dims, 15, 7)
    assert all(r.passed for r in reports), [r.line() for r in reports if not r.passed]


def test_diamond_laws_on_scalars_are_exact():
    for r in dm.run_diamond_laws([1], 10, 2):
        assert r.residual <= 1e-12, r.line()


def test_mutant_ceiling_fails_floorceil_d():
    reports = {r.law: r for r in dm.run_diamond_laws([2], 30, 7, ceil_fn=dm.mutant_ceil,
                                                      laws=["floorceil.d"])}
    rep = reports["floorceil.d"]
    assert not rep.passed and rep.counterexample


def test_laws_selection():
    reports = dm.run_diamond_laws([2], 3, 0, laws=["galois.a", "sharp.oml"])
    assert [r.law for r in reports] == ["galois.a", "sharp.oml"]


# -- properties ------------------------------------------------------------------------

sigs = st.sampled_from([(2,), (3,), (2, 2), (1, 2)])


@settings(max_examples=25, deadline=None)
@given(sigs, sigs, st.integers(0, 2**32 - 1))
def test_galois_connection_property(src, tgt, seed):
    rng = np.random.default_rng(seed)
    f = dm.random_pure_map(rng, BlockSignature(src), BlockSignature(tgt))
    p = jm.random_projection(rng, BlockSignature(src))
    q = jm.random_projection(rng, BlockSignature(tgt))
    # f_diamond(p) <= q iff p <= f^box(q)
    assert dm.leq(lower_diamond(f, p), q) == dm.leq(p, box(f, q))


@settings(max_examples=25, deadline=None)
@given(sigs, st.integers(0, 2**32 - 1))
def test_meet_matches_range_intersection(dims, seed):
    rng = np.random.default_rng(seed)
    p, q, _ = dm.random_sharp_pair_with_common_part(rng, BlockSignature(dims))
    assert sharp_meet(p, q).dist(dm.range_intersection(p, q)) <= 1e-8


@settings(max_examples=25, deadline=None)
@given(sigs, sigs, st.integers(0, 2**32 - 1))
def test_pure_factorization_round_trip(src, tgt, seed):
    rng = np.random.default_rng(seed)
    f = dm.random_pure_map(rng, BlockSignature(src), BlockSignature(tgt))
    fac = pure_factorize(f)
    assert dm.unitarity_residual(fac.theta) <= 1e-8
    assert choi_distance(fac.recompose(), f) <= 1e-8
