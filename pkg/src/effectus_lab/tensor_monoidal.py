"""Monoidal structure on the matrix effectus.

The tensor of signatures ``A = [a_0..]`` and ``B = [b_0..]`` has blocks
``a_i * b_j`` at index ``i * len(B) + j``; inside a block the Kronecker
product puts the left factor on the slow index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .diamond import PureMap, assert_map, dagger, random_pure_map
from .effectus_cat import (ChannelMap, Kraus, choi_distance, compose, identity_map, ovee_maps,
                           random_channel, scale_map)
from .jordan_matrix import (BlockSignature, MatrixEffect, Projection, SelfAdjoint, SuperOperator,
                            identity, is_sharp, jordan_product, jordan_superop, quadratic,
                            quadratic_superop, random_effect, random_hermitian, random_projection,
                            random_symmetry, triple, vectorize)
from .reports import LawReport, Residual, law_rng
from .tolerances import DEFAULT

MAX_TENSOR_DIM = 36


class TensorTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class TensorObject:
    factors: tuple[BlockSignature, BlockSignature]
    flattened: BlockSignature

    def to_json(self) -> dict:
        return {"factors": [list(f.dims) for f in self.factors]}


def tensor_signature(a: BlockSignature | Iterable[int], b: BlockSignature | Iterable[int]) -> TensorObject:
    a, b = BlockSignature.of(a), BlockSignature.of(b)
    flat = BlockSignature(tuple(x * y for x in a.dims for y in b.dims))
    if sum(flat.dims) > MAX_TENSOR_DIM:
        raise TensorTooLarge(f"tensor dimension {sum(flat.dims)} exceeds {MAX_TENSOR_DIM}")
    return TensorObject((a, b), flat)


def tensor_effects(a: SelfAdjoint, b: SelfAdjoint) -> SelfAdjoint:
    tensor_signature(a.signature, b.signature)
    blocks = [np.kron(x, y) for x in a.blocks for y in b.blocks]
    out = SelfAdjoint._trusted(blocks)
    if isinstance(a, Projection) and isinstance(b, Projection):
        return Projection.of(out)
    if isinstance(a, MatrixEffect) and isinstance(b, MatrixEffect):
        return MatrixEffect.of(out)
    return out


def tensor_maps(f: ChannelMap, g: ChannelMap) -> ChannelMap:
    src = tensor_signature(f.source, g.source).flattened
    tgt = tensor_signature(f.target, g.target).flattened
    ns, nt = len(g.source), len(g.target)
    ks = [Kraus(kf.sb * ns + kg.sb, kf.tb * nt + kg.tb, np.kron(kf.matrix, kg.matrix))
          for kf in f.kraus for kg in g.kraus]
    cls = PureMap if isinstance(f, PureMap) and isinstance(g, PureMap) else ChannelMap
    return cls(src, tgt, ks, check=False)


def _product_basis(sa: BlockSignature, sb: BlockSignature):
    from .jordan_matrix import hermitian_basis

    ea, eb = hermitian_basis(sa), hermitian_basis(sb)
    pairs = [(x, y) for x in ea for y in eb]
    g = np.column_stack([vectorize(tensor_effects(x, y)) for x, y in pairs])
    return pairs, g


def tensor_superops(s: SuperOperator, t: SuperOperator) -> SuperOperator:
    """The superoperator acting as x (x) y -> S(x) (x) T(y).

    Built on the product basis of Hermitian basis elements, which spans the
    Hermitian part of the tensor algebra.
    """
    pairs_in, g_in = _product_basis(s.sig_in, t.sig_in)
    out = np.column_stack([vectorize(tensor_effects(s(x), t(y))) for x, y in pairs_in])
    matrix = out @ np.linalg.inv(g_in)
    return SuperOperator(tensor_signature(s.sig_in, t.sig_in).flattened,
                         tensor_signature(s.sig_out, t.sig_out).flattened, matrix)


def pair_quadratic_superop(a: SelfAdjoint, b: SelfAdjoint) -> SuperOperator:
    """Q_{a,b}: c -> {a c b}, the polarised quadratic map."""
    return SuperOperator.from_function(lambda c: triple(a, b, c), a.signature, a.signature)


# -- coherence maps -----------------------------------------------------------------------

def _swap_matrix(da: int, db: int) -> np.ndarray:
    """Permutation sending e_i (x) e_j to e_j (x) e_i."""
    p = np.zeros((da * db, da * db))
    for i in range(da):
        for j in range(db):
            p[j * da + i, i * db + j] = 1.0
    return p


def braiding(a: BlockSignature | Iterable[int], b: BlockSignature | Iterable[int]) -> ChannelMap:
    a, b = BlockSignature.of(a), BlockSignature.of(b)
    src = tensor_signature(a, b).flattened
    tgt = tensor_signature(b, a).flattened
    ks = [Kraus(i * len(b) + j, j * len(a) + i, _swap_matrix(da, db))
          for i, da in enumerate(a.dims) for j, db in enumerate(b.dims)]
    return PureMap(src, tgt, ks, check=False)


def associator(a, b, c) -> ChannelMap:
    """(A (x) B) (x) C -> A (x) (B (x) C); identity on the flattened blocks."""
    ab = tensor_signature(a, b).flattened
    left = tensor_signature(ab, c).flattened
    bc = tensor_signature(b, c).flattened
    right = tensor_signature(a, bc).flattened
    if left != right:
        raise AssertionError("flattening is not associative")
    return identity_map(left)


def left_unitor(a: BlockSignature | Iterable[int]) -> ChannelMap:
    """I (x) A -> A with I = [1]."""
    a = BlockSignature.of(a)
    return identity_map(tensor_signature(BlockSignature((1,)), a).flattened)


def right_unitor(a: BlockSignature | Iterable[int]) -> ChannelMap:
    a = BlockSignature.of(a)
    return identity_map(tensor_signature(a, BlockSignature((1,))).flattened)


def scalar_id(sig: BlockSignature, s: float) -> ChannelMap:
    return scale_map(identity_map(sig), s)


# -- checks -----------------------------------------------------------------------------

def _pair(a_sig, b_sig) -> tuple[BlockSignature, BlockSignature, str]:
    a, b = BlockSignature.of(a_sig), BlockSignature.of(b_sig)
    tensor_signature(a, b)
    return a, b, f"{a}x{b}"


def _sharp_residual(p: SelfAdjoint) -> float:
    return max((float(np.max(np.abs(x @ x - x))) for x in p.blocks if x.size), default=0.0)


def check_tensor_assert(trials: int, seed: int, tol: float | None = None,
                        a_sig=(2,), b_sig=(2,)) -> LawReport:
    tol = DEFAULT.law if tol is None else tol
    a_s, b_s, name = _pair(a_sig, b_sig)
    rng = law_rng(seed, "tensor.assert")
    res = Residual(tol)
    for k in range(trials):
        u = rng.random()
        if u < 0.2:
            a, b = random_projection(rng, a_s), random_projection(rng, b_s)
        elif u < 0.3:
            a, b = identity(a_s), random_effect(rng, b_s)
        else:
            a, b = random_effect(rng, a_s), random_effect(rng, b_s)
        ab = tensor_effects(a, b)
        lhs, rhs = assert_map(ab), tensor_maps(assert_map(a), assert_map(b))
        res.add(choi_distance(lhs, rhs), {"trial": k, "law": "asrt_(a(x)b) = asrt_a (x) asrt_b"})
        res.add(lhs.superop().dist(rhs.superop()), {"trial": k, "law": "superoperator form"})
        sq = tensor_effects(quadratic(a, identity(a_s)), quadratic(b, identity(b_s)))
        res.add(sq.dist(quadratic(ab, identity(ab.signature))), {"trial": k, "law": "a^2 (x) b^2 = (a (x) b)^2"})
        p, q = random_projection(rng, a_s), random_projection(rng, b_s)
        res.add(_sharp_residual(tensor_effects(p, q)), {"trial": k, "law": "sharp (x) sharp is sharp"})
    return res.report("tensor.assert", f"{name} trials={trials}",
                      statement="asrt_(a(x)b) = asrt_a (x) asrt_b; squares and sharpness are preserved")


def _signed_parts(a: SelfAdjoint) -> tuple[SelfAdjoint, SelfAdjoint]:
    from .jordan_matrix import apply_function

    plus = apply_function(a, lambda v: np.maximum(v, 0.0))
    return plus, plus - a


def check_tensor_quadratic(trials: int, seed: int, tol: float | None = None,
                           a_sig=(2,), b_sig=(2,)) -> LawReport:
    tol = DEFAULT.law if tol is None else tol
    a_s, b_s, name = _pair(a_sig, b_sig)
    rng = law_rng(seed, "tensor.quadratic")
    res = Residual(tol)
    for k in range(trials):
        a, b = random_hermitian(rng, a_s), random_hermitian(rng, b_s)
        if rng.random() < 0.1:
            a = identity(a_s)
        scale = max(1.0, a.norm() * b.norm()) ** 2
        ab = tensor_effects(a, b)
        qa_qb = tensor_superops(quadratic_superop(a), quadratic_superop(b))
        res.add(quadratic_superop(ab).dist(qa_qb) / scale, {"trial": k, "law": "Q_(a(x)b) = Q_a (x) Q_b"})
        # the same identity through positive parts: a (x) b = sum of signed positive tensors
        ap, am = _signed_parts(a)
        bp, bm = _signed_parts(b)
        terms = [(1.0, tensor_effects(ap, bp)), (-1.0, tensor_effects(ap, bm)),
                 (-1.0, tensor_effects(am, bp)), (1.0, tensor_effects(am, bm))]
        sig = ab.signature
        total = None
        for si, x in terms:
            for sj, y in terms:
                term = pair_quadratic_superop(x, y) * (si * sj)
                total = term if total is None else total + term
        res.add(total.dist(qa_qb) / scale, {"trial": k, "law": "signed decomposition"})
        a2 = random_hermitian(rng, a_s)
        lhs = pair_quadratic_superop(tensor_effects(a, b), tensor_effects(a2, b))
        rhs = tensor_superops(pair_quadratic_superop(a, a2), quadratic_superop(b))
        res.add(lhs.dist(rhs) / max(scale, a2.norm() ** 2 * b.norm() ** 2),
                {"trial": k, "law": "Q_(a1(x)b, a2(x)b) = Q_(a1,a2) (x) Q_b"})
    return res.report("tensor.quadratic", f"{name} trials={trials}",
                      statement="Q_(a(x)b) = Q_a (x) Q_b for Hermitian a, b (residual relative to |a|^2|b|^2)")


def check_jordan_embedding(trials: int, seed: int, tol: float | None = None,
                           a_sig=(2,), b_sig=(2,)) -> LawReport:
    tol = DEFAULT.law if tol is None else tol
    a_s, b_s, name = _pair(a_sig, b_sig)
    rng = law_rng(seed, "tensor.jordan_embedding")
    res = Residual(tol)
    one_a, one_b = identity(a_s), identity(b_s)
    ident_b = SuperOperator.identity(b_s)
    for k in range(trials):
        a1, a2 = random_hermitian(rng, a_s), random_hermitian(rng, a_s)
        b = random_hermitian(rng, b_s)
        scale = max(1.0, a1.norm() * a2.norm())
        e1, e2 = tensor_effects(a1, one_b), tensor_effects(a2, one_b)
        res.add(jordan_product(e1, e2).dist(tensor_effects(jordan_product(a1, a2), one_b)) / scale,
                {"trial": k, "law": "homomorphism"})
        ta, tb = jordan_superop(e1), jordan_superop(tensor_effects(one_a, b))
        comm = (ta @ tb) - (tb @ ta)
        res.add(float(np.max(np.abs(comm.matrix))) / max(1.0, a1.norm() * b.norm()),
                {"trial": k, "law": "a(x)1 and 1(x)b operator commute"})
        res.add(ta.dist(tensor_superops(jordan_superop(a1), ident_b)) / max(1.0, a1.norm()),
                {"trial": k, "law": "T_(a(x)1) = T_a (x) id"})
        diff = (e1 - e2).norm() - (a1 - a2).norm()
        res.add(abs(diff) / scale, {"trial": k, "law": "isometric, hence injective"})
    res.add(tensor_effects(one_a, one_b).dist(identity(tensor_signature(a_s, b_s).flattened)),
            {"law": "unit maps to unit"})
    return res.report("tensor.jordan_embedding", f"{name} trials={trials}",
                      statement="a -> a(x)1 is an injective Jordan homomorphism; a(x)1 and 1(x)b operator commute")


def check_symmetry_exchange(trials: int, seed: int, tol: float | None = None,
                            a_sig=(2,), b_sig=(2,)) -> LawReport:
    tol = DEFAULT.law if tol is None else tol
    a_s, b_s, name = _pair(a_sig, b_sig)
    rng = law_rng(seed, "tensor.symmetry_exchange")
    res = Residual(tol)
    for k in range(trials):
        s1 = identity(a_s) if rng.random() < 0.1 else random_symmetry(rng, a_s)
        s2 = random_symmetry(rng, b_s)
        p1, p2 = random_projection(rng, a_s), random_projection(rng, b_s)
        q1, q2 = quadratic(s1, p1), quadratic(s2, p2)
        s = tensor_effects(s1, s2)
        ts = tensor_signature(a_s, b_s).flattened
        res.add(quadratic(s, identity(ts)).dist(identity(ts)), {"trial": k, "law": "(s1(x)s2)^2 = 1"})
        res.add(max(_sharp_residual(q1), _sharp_residual(q2)), {"trial": k, "law": "exchanged are projections"})
        res.add(quadratic(s, tensor_effects(p1, p2)).dist(tensor_effects(q1, q2)),
                {"trial": k, "law": "Q_(s1(x)s2)(p1(x)p2) = q1(x)q2"})
    return res.report("tensor.symmetry_exchange", f"{name} trials={trials}",
                      statement="symmetries s_i exchanging p_i, q_i give s1(x)s2 exchanging p1(x)p2 and q1(x)q2")


def check_monoidal(trials: int, seed: int, tol: float | None = None,
                   a_sig=(2,), b_sig=(2,)) -> LawReport:
    """Biadditivity, units, scalars, coherence naturality, and pure maps under the tensor."""
    tol = DEFAULT.law if tol is None else tol
    a_s, b_s, name = _pair(a_sig, b_sig)
    rng = law_rng(seed, "tensor.monoidal")
    res = Residual(tol)
    one = BlockSignature((1,))
    for k in range(trials):
        f1, f2 = random_channel(rng, a_s, a_s), random_channel(rng, a_s, a_s)
        lam = rng.uniform(0.1, 0.9)
        f1, f2 = scale_map(f1, lam), scale_map(f2, 1 - lam)
        h = random_channel(rng, b_s, b_s)
        lhs = tensor_maps(ovee_maps(f1, f2), h)
        rhs = ovee_maps(tensor_maps(f1, h), tensor_maps(f2, h))
        res.add(choi_distance(lhs, rhs), {"trial": k, "law": "(f + g)(x)h = f(x)h + g(x)h"})
        s, t = rng.random(2)
        res.add(choi_distance(tensor_maps(scalar_id(one, s), scalar_id(one, t)), scalar_id(one, s * t)),
                {"trial": k, "law": "s (x) t = st"})
        sf = compose(left_unitor(a_s), compose(tensor_maps(scalar_id(one, s), f1), left_unitor(a_s)))
        res.add(choi_distance(sf, scale_map(f1, s)), {"trial": k, "law": "lambda (s (x) f) lambda^-1 = s.f"})
        g = random_channel(rng, b_s, b_s)
        sigma = braiding(a_s, b_s)
        res.add(choi_distance(compose(sigma, tensor_maps(f1, g)), compose(tensor_maps(g, f1), sigma)),
                {"trial": k, "law": "braiding natural"})
        res.add(choi_distance(compose(braiding(b_s, a_s), sigma), identity_map(sigma.source)),
                {"trial": k, "law": "braiding involutive"})
        c_s = BlockSignature((1, 2))
        m = random_channel(rng, c_s, c_s)
        alpha = associator(a_s, b_s, c_s)
        res.add(choi_distance(compose(alpha, tensor_maps(tensor_maps(f1, g), m)),
                              compose(tensor_maps(f1, tensor_maps(g, m)), alpha)),
                {"trial": k, "law": "associator natural"})
        p, q = random_pure_map(rng, a_s, a_s), random_pure_map(rng, b_s, b_s)
        pq = tensor_maps(p, q)
        res.flag(isinstance(pq, PureMap), {"trial": k, "law": "pure (x) pure is pure"})
        res.add(choi_distance(dagger(pq), tensor_maps(dagger(p), dagger(q))),
                {"trial": k, "law": "(f(x)g)^+ = f^+ (x) g^+"})
        e = random_effect(rng, a_s)
        res.add(choi_distance(assert_map(tensor_effects(e, identity(b_s))),
                              tensor_maps(assert_map(e), identity_map(b_s))),
                {"trial": k, "law": "asrt_(a(x)1) = asrt_a (x) id"})
    ts = tensor_signature(a_s, b_s).flattened
    res.add(tensor_effects(identity(a_s), identity(b_s)).dist(identity(ts)), {"law": "1 (x) 1 = 1"})
    for unit in (braiding(a_s, b_s), left_unitor(a_s), right_unitor(a_s)):
        res.add(unit.unit().dist(identity(unit.source)), {"law": "coherence maps total"})
    return res.report("tensor.monoidal", f"{name} trials={trials}",
                      statement="tensor is biadditive, unital, respects scalars, has natural coherence maps, "
                                "and preserves pure maps and their dagger")


TENSOR_CHECKS = (
    ("tensor.assert", "asrt_(a(x)b) = asrt_a (x) asrt_b; squares and sharpness are preserved",
     check_tensor_assert),
    ("tensor.quadratic", "Q_(a(x)b) = Q_a (x) Q_b for Hermitian a, b", check_tensor_quadratic),
    ("tensor.jordan_embedding", "a -> a(x)1 is an injective Jordan homomorphism commuting with 1(x)b",
     check_jordan_embedding),
    ("tensor.symmetry_exchange", "s1(x)s2 exchanges p1(x)p2 and q1(x)q2", check_symmetry_exchange),
    ("tensor.monoidal", "biadditive, unital, scalar-compatible tensor with natural coherence maps",
     check_monoidal),
)


def run_tensor_laws(a_sig, b_sig, trials: int, seed: int, tol: float | None = None,
                    laws: Iterable[str] | None = None) -> list[LawReport]:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    wanted = None if laws is None else set(laws)
    return [fn(trials, seed, tol, a_sig, b_sig) for law_id, _, fn in TENSOR_CHECKS
            if wanted is None or law_id in wanted]
