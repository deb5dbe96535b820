import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from effectus_lab import jordan_matrix as jm
from effectus_lab import tensor_monoidal as tm
from effectus_lab.diamond import PureMap, assert_map, dagger, random_pure_map
from effectus_lab.effectus_cat import (choi_distance, compose, identity_map, is_total, ovee_maps,
                                       random_channel, scale_map)
from effectus_lab.jordan_matrix import BlockSignature, MatrixEffect, Projection, SelfAdjoint

SX = np.array([[0, 1], [1, 0]], complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)


def sa(m):
    return SelfAdjoint([m])


def test_signature_layout_and_cap():
    t = tm.tensor_signature([1, 2], [2, 3])
    assert t.flattened == BlockSignature((2, 3, 4, 6))
    assert t.to_json() == {"factors": [[1, 2], [2, 3]]}
    with pytest.raises(tm.TensorTooLarge):
        tm.tensor_signature([6], [7])


def test_tensor_effect_examples():
    out = tm.tensor_effects(Projection([np.diag([1.0, 0.0])]), jm.identity([2]))
    assert out.dist(jm.diag(1, 1, 0, 0)) == 0.0
    assert isinstance(out, Projection)
    s, t = 0.3, 0.6
    assert tm.tensor_effects(s * jm.identity([2]), t * jm.identity([3])).dist((s * t) * jm.identity([6])) <= 1e-15


def test_tensor_maps_biadditive_in_choi():
    rng = np.random.default_rng(0)
    f, g = (scale_map(random_channel(rng, [2], [2]), 0.5) for _ in range(2))
    h = random_channel(rng, [1, 2], [2])
    lhs = tm.tensor_maps(ovee_maps(f, g), h)
    rhs = ovee_maps(tm.tensor_maps(f, h), tm.tensor_maps(g, h))
    assert choi_distance(lhs, rhs) <= 1e-9


def test_tensor_of_pure_is_pure_and_dagger_distributes():
    rng = np.random.default_rng(1)
    f = random_pure_map(rng, BlockSignature((2,)), BlockSignature((2, 1)))
    g = random_pure_map(rng, BlockSignature((1, 2)), BlockSignature((3,)))
    fg = tm.tensor_maps(f, g)
    assert isinstance(fg, PureMap)
    assert choi_distance(dagger(fg), tm.tensor_maps(dagger(f), dagger(g))) <= 1e-12


def test_tensor_superops_against_kronecker_conjugation():
    rng = np.random.default_rng(2)
    a = jm.random_hermitian(rng, BlockSignature((2,)))
    b = jm.random_hermitian(rng, BlockSignature((3,)))
    s = tm.tensor_superops(jm.quadratic_superop(a), jm.quadratic_superop(b))
    k = np.kron(a.blocks[0], b.blocks[0])
    for _ in range(3):
        z = jm.random_hermitian(rng, BlockSignature((6,)))
        assert s(z).dist(sa(k @ z.blocks[0] @ k)) <= 1e-10


def test_quadratic_example_sx_sz():
    a, b = sa(SX), sa(SZ)
    ab = tm.tensor_effects(a, b)
    k = np.kron(SX, SZ)
    c = jm.random_hermitian(np.random.default_rng(3), BlockSignature((4,)))
    assert jm.quadratic(ab, c).dist(sa(k @ c.blocks[0] @ k)) <= 1e-12
    lhs = jm.quadratic_superop(ab)
    rhs = tm.tensor_superops(jm.quadratic_superop(a), jm.quadratic_superop(b))
    assert lhs.dist(rhs) <= 1e-10


def test_quadratic_with_identity_factor():
    b = jm.random_hermitian(np.random.default_rng(4), BlockSignature((2,)))
    lhs = tm.tensor_superops(jm.quadratic_superop(jm.identity([2])), jm.quadratic_superop(b))
    rhs = tm.tensor_superops(jm.SuperOperator.identity(BlockSignature((2,))), jm.quadratic_superop(b))
    assert lhs.dist(rhs) <= 1e-12


def test_assert_with_unit_factor():
    b = jm.random_effect(np.random.default_rng(5), BlockSignature((2,)))
    lhs = assert_map(tm.tensor_effects(jm.identity([2]), b))
    assert choi_distance(lhs, tm.tensor_maps(identity_map([2]), assert_map(b))) <= 1e-12


def test_embedding_examples():
    a1 = tm.tensor_effects(sa(SX), jm.identity([2]))
    b1 = tm.tensor_effects(jm.identity([2]), sa(SY))
    ta, tb = jm.jordan_superop(a1), jm.jordan_superop(b1)
    assert (ta @ tb).dist(tb @ ta) <= 1e-10
    one = tm.tensor_effects(jm.identity([2]), jm.identity([2]))
    assert one.dist(jm.identity([4])) == 0.0
    rng = np.random.default_rng(6)
    a, a2 = (jm.random_hermitian(rng, BlockSignature((2,))) for _ in range(2))
    lhs = tm.tensor_effects(a, jm.identity([2])) - tm.tensor_effects(a2, jm.identity([2]))
    assert lhs.norm() == pytest.approx((a - a2).norm(), abs=1e-12)


def test_symmetry_exchange_example():
    s = sa(SX)
    p, q = Projection([np.diag([1.0, 0.0])]), Projection([np.diag([0.0, 1.0])])
    assert jm.quadratic(s, p).dist(q) <= 1e-12
    ss = tm.tensor_effects(s, s)
    assert jm.quadratic(ss, tm.tensor_effects(p, p)).dist(tm.tensor_effects(q, q)) <= 1e-12
    assert jm.quadratic(jm.identity([2]), p).dist(p) == 0.0
    rng = np.random.default_rng(7)
    s1, s2 = jm.random_symmetry(rng, BlockSignature((2,))), jm.random_symmetry(rng, BlockSignature((3,)))
    k = tm.tensor_effects(s1, s2).blocks[0]
    assert np.allclose(k @ k, np.eye(6), atol=1e-10)


def test_coherence_maps():
    br = tm.braiding([2], [3])
    assert is_total(br)
    back = compose(tm.braiding([3], [2]), br)
    assert choi_distance(back, identity_map([6])) <= 1e-12
    rng = np.random.default_rng(8)
    a = jm.random_hermitian(rng, BlockSignature((2,)))
    b = jm.random_hermitian(rng, BlockSignature((3,)))
    # braiding pulls b (x) a back to a (x) b
    assert br.heisenberg(tm.tensor_effects(b, a)).dist(tm.tensor_effects(a, b)) <= 1e-12
    assert is_total(tm.associator([2], [1, 2], [2]))
    assert is_total(tm.left_unitor([2, 1])) and is_total(tm.right_unitor([3]))


@pytest.mark.parametrize("a_sig,b_sig", [((2,), (2,)), ((1, 2), (2,))])
def test_tensor_laws_pass(a_sig, b_sig):
    reports = tm.run_tensor_laws(a_sig, b_sig, 15, 7)
    assert len(reports) == len(tm.TENSOR_CHECKS)
    assert all(r.passed for r in reports), [r.line() for r in reports if not r.passed]


def test_tensor_laws_selection():
    reports = tm.run_tensor_laws((2,), (2,), 3, 0, laws=["tensor.assert"])
    assert [r.law for r in reports] == ["tensor.assert"]


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([(2,), (1, 2), (3,)]), st.sampled_from([(2,), (2, 1)]), st.integers(0, 2**32 - 1))
def test_assert_tensor_property(a_dims, b_dims, seed):
    rng = np.random.default_rng(seed)
    a = jm.random_effect(rng, BlockSignature(a_dims))
    b = jm.random_effect(rng, BlockSignature(b_dims))
    lhs = assert_map(MatrixEffect.of(tm.tensor_effects(a, b)))
    assert choi_distance(lhs, tm.tensor_maps(assert_map(a), assert_map(b))) <= 1e-9
