"""Filters, comprehensions, assert maps and pure maps on the matrix effectus,
together with the possibilistic maps on sharp predicates.

For a map ``f: A -> B`` and projections ``p`` on ``B``, ``q`` on ``A``::

    diamond(f, p)        = ceil(p o f)            (on A)
    box(f, p)            = diamond(f, p')'        (on A)
    lower_diamond(f, q)  = im(f o pi_q)           (on B)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .effectus_cat import (ChannelMap, Kraus, choi_distance, compose, identity_map, image,
                           random_channel, random_unitary_map, scale_map, zero_map)
from .jordan_matrix import (BlockSignature, MatrixEffect, NotSharp, Projection, SelfAdjoint,
                            SignatureMismatch, ceil, floor, identity, is_sharp, leq_residual,
                            random_effect, random_projection, random_subprojection, sqrt_effect,
                            support_isometries, unit_isometries, zeros)
from .reports import LawReport, Residual, law_rng
from .tolerances import DEFAULT, Tolerances

PURE_MAP_SCHEMA = "effectus-lab/pure-map/1"

CeilFn = Callable[[SelfAdjoint], Projection]


class NotPure(ValueError):
    pass


# -- pure maps ----------------------------------------------------------------------

class PureMap(ChannelMap):
    """Channel with at most one Kraus operator per block pair and an injective pairing."""

    def __init__(self, source: BlockSignature | Iterable[int], target: BlockSignature | Iterable[int],
                 kraus: Iterable[Kraus | tuple[int, int, Any]] = (), tol: Tolerances = DEFAULT,
                 check: bool = True):
        super().__init__(source, target, kraus, tol, check)
        sbs = [k.sb for k in self.kraus]
        tbs = [k.tb for k in self.kraus]
        if len(set(sbs)) != len(sbs) or len(set(tbs)) != len(tbs):
            raise NotPure("block pairing is not injective")

    @classmethod
    def from_channel(cls, f: ChannelMap, tol: Tolerances = DEFAULT) -> "PureMap":
        """Merge Kraus operators per block pair when the pair's Choi matrix has rank <= 1."""
        if isinstance(f, PureMap):
            return f
        pairs: dict[tuple[int, int], list[np.ndarray]] = {}
        for k in f.kraus:
            pairs.setdefault((k.sb, k.tb), []).append(k.matrix)
        ks = []
        for (sb, tb), mats in sorted(pairs.items()):
            if len(mats) == 1:
                ks.append(Kraus(sb, tb, mats[0]))
                continue
            vs = np.column_stack([m.reshape(-1) for m in mats])
            u, s, _ = np.linalg.svd(vs, full_matrices=False)
            if s.size > 1 and s[1] > tol.choi * max(1.0, s[0]):
                raise NotPure(f"block pair {sb}->{tb} has Kraus rank > 1")
            if s[0] > 0:
                ks.append(Kraus(sb, tb, (s[0] * u[:, 0]).reshape(mats[0].shape)))
        return cls(f.source, f.target, ks, tol, check=False)

    def to_json(self) -> dict[str, Any]:
        out = super().to_json()
        out["schema"] = PURE_MAP_SCHEMA
        out["pure"] = True
        return out

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "PureMap":
        return cls.from_channel(ChannelMap.from_json(data))

    def __repr__(self) -> str:
        return f"PureMap({self.source} -> {self.target}, pairs={[(k.sb, k.tb) for k in self.kraus]})"


def dagger(f: ChannelMap) -> PureMap:
    f = PureMap.from_channel(f)
    return PureMap(f.target, f.source, [Kraus(k.tb, k.sb, k.matrix.conj().T) for k in f.kraus],
                   check=False)


def compose_pure(g: ChannelMap, f: ChannelMap) -> PureMap:
    return PureMap.from_channel(compose(g, f))


def _block_map(sig: BlockSignature, isos: Sequence[np.ndarray]) -> tuple[BlockSignature, tuple[int, ...]]:
    """Carrier signature keeping non-empty blocks, and the kept block indices."""
    kept = tuple(i for i, v in enumerate(isos) if v.shape[1] > 0)
    return BlockSignature(tuple(isos[i].shape[1] for i in kept)), kept


def assert_map(p: SelfAdjoint) -> PureMap:
    """q -> sqrt(p) q sqrt(p) on the object of p."""
    r = sqrt_effect(MatrixEffect.of(p))
    return PureMap(p.signature, p.signature, [Kraus(i, i, b) for i, b in enumerate(r.blocks)], check=False)


# -- comprehension and filter -------------------------------------------------------------

@dataclass
class ComprehensionWitness:
    predicate: MatrixEffect
    carrier: BlockSignature
    map: PureMap
    isometries: tuple[np.ndarray, ...]
    blocks: tuple[int, ...]
    certificate: dict[str, Any] = field(default_factory=dict)

    def mediator(self, f: ChannelMap) -> ChannelMap:
        """The unique fbar with pi o fbar = f, for f with p o f = 1 o f."""
        pos = {b: j for j, b in enumerate(self.blocks)}
        ks = [Kraus(k.sb, pos[k.tb], self.isometries[k.tb].conj().T @ k.matrix)
              for k in f.kraus if k.tb in pos]
        return ChannelMap(f.source, self.carrier, ks, check=False)


@dataclass
class FilterWitness:
    predicate: MatrixEffect
    carrier: BlockSignature
    map: PureMap
    isometries: tuple[np.ndarray, ...]
    blocks: tuple[int, ...]
    certificate: dict[str, Any] = field(default_factory=dict)

    def mediator(self, f: ChannelMap) -> ChannelMap:
        return filter_mediator(self.map, f)


def filter_mediator(xi: ChannelMap, f: ChannelMap) -> ChannelMap:
    """fbar with fbar o xi = f, for a pure epic xi and f with 1 o f <= c (1 o xi).

    Solved with the pseudo-inverse of the single Kraus operator of xi per block.
    """
    xi = PureMap.from_channel(xi)
    route = {k.sb: (k.tb, np.linalg.pinv(k.matrix)) for k in xi.kraus}
    ks = []
    for k in f.kraus:
        if k.sb in route:
            tb, inv = route[k.sb]
            ks.append(Kraus(tb, k.tb, k.matrix @ inv))
    return ChannelMap(xi.target, f.target, ks, check=False)


def comprehension(p: SelfAdjoint, tol: Tolerances = DEFAULT, certify: int = 0,
                  seed: int = 0) -> ComprehensionWitness:
    """pi_p: B -> V^dagger B V with V an isometry onto the eigenvalue-1 space of p."""
    p = MatrixEffect.of(p)
    isos = unit_isometries(p, tol)
    carrier, kept = _block_map(p.signature, isos)
    pi = PureMap(carrier, p.signature, [Kraus(j, i, isos[i]) for j, i in enumerate(kept)], check=False)
    w = ComprehensionWitness(p, carrier, pi, tuple(isos), kept)
    if certify:
        w.certificate = certify_comprehension(w, certify, seed, tol)
    return w


def filter_map(p: SelfAdjoint, tol: Tolerances = DEFAULT, certify: int = 0,
               seed: int = 0) -> FilterWitness:
    """xi^p: q -> sqrt(p) W q W^dagger sqrt(p) with W an isometry onto the support of p."""
    p = MatrixEffect.of(p)
    isos = support_isometries(p, tol)
    r = sqrt_effect(p)
    carrier, kept = _block_map(p.signature, isos)
    xi = PureMap(p.signature, carrier,
                 [Kraus(i, j, isos[i].conj().T @ r.blocks[i]) for j, i in enumerate(kept)], check=False)
    w = FilterWitness(p, carrier, xi, tuple(isos), kept)
    if certify:
        w.certificate = certify_filter(w, certify, seed, tol)
    return w


def _range_restricted_channel(rng: np.random.Generator, source: BlockSignature,
                              q: Projection) -> ChannelMap:
    """Random map whose Kraus ranges lie inside the projection q."""
    f = random_channel(rng, source, q.signature)
    return ChannelMap(source, q.signature, [Kraus(k.sb, k.tb, q.blocks[k.tb] @ k.matrix) for k in f.kraus])


def certify_comprehension(w: ComprehensionWitness, trials: int, seed: int,
                          tol: Tolerances = DEFAULT) -> dict[str, Any]:
    rng = law_rng(seed, "comprehension.universal")
    p, pi = w.predicate, w.map
    fl = floor(p, tol)
    cert = {
        "defining": pi.heisenberg(identity(p.signature)).dist(pi.heisenberg(p)),
        "total": pi.unit().dist(identity(w.carrier)),
        "monic": max((float(np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1]))))
                      for v in w.isometries if v.shape[1]), default=0.0),
        "mediators": 0.0,
    }
    for _ in range(trials):
        f = _range_restricted_channel(rng, BlockSignature((2,)), fl)
        cert["mediators"] = max(cert["mediators"], choi_distance(compose(pi, w.mediator(f)), f))
    return cert


def certify_filter(w: FilterWitness, trials: int, seed: int, tol: Tolerances = DEFAULT) -> dict[str, Any]:
    rng = law_rng(seed, "filter.universal")
    p, xi = w.predicate, w.map
    epic = 0.0
    for k in xi.kraus:
        m = k.matrix
        epic = max(epic, float(np.max(np.abs(m @ np.linalg.pinv(m) - np.eye(m.shape[0])))))
    cert = {"defining": xi.unit().dist(p), "epic": epic, "mediators": 0.0}
    asrt = assert_map(p)
    for _ in range(trials):
        g = random_channel(rng, p.signature, BlockSignature((2,)))
        f = compose(g, asrt)
        cert["mediators"] = max(cert["mediators"], choi_distance(compose(w.mediator(f), xi), f))
    return cert


# -- pure factorisation -----------------------------------------------------------------

@dataclass
class PureFactorization:
    comprehension: ComprehensionWitness
    theta: PureMap
    filter: FilterWitness
    assertion: PureMap

    def recompose(self) -> ChannelMap:
        return compose(self.comprehension.map, compose(self.theta, compose(self.filter.map, self.assertion)))


def pure_factorize(f: ChannelMap, tol: Tolerances = DEFAULT) -> PureFactorization:
    """f = pi_{im f} o Theta o xi^{ceil(1 o f)} o asrt_{1 o f} with Theta unitary."""
    f = PureMap.from_channel(f, tol)
    p = MatrixEffect.of(f.unit(), tol)
    comp = comprehension(image(f, tol), tol)
    filt = filter_map(ceil(p, tol), tol)
    asrt = assert_map(p)
    r = sqrt_effect(p)
    cpos = {b: j for j, b in enumerate(comp.blocks)}
    fpos = {b: j for j, b in enumerate(filt.blocks)}
    ks = []
    for k in f.kraus:
        if k.sb not in fpos or k.tb not in cpos:
            continue
        v = comp.isometries[k.tb]
        w = filt.isometries[k.sb]
        theta = v.conj().T @ k.matrix @ np.linalg.pinv(r.blocks[k.sb]) @ w
        ks.append(Kraus(fpos[k.sb], cpos[k.tb], theta))
    th = PureMap(filt.carrier, comp.carrier, ks, check=False)
    return PureFactorization(comp, th, filt, asrt)


def unitarity_residual(theta: ChannelMap) -> float:
    """How far Theta is from an isomorphism with inverse Theta^dagger."""
    worst = 0.0
    if len(theta.kraus) != len(theta.source) or len(theta.kraus) != len(theta.target):
        return 1.0
    for k in theta.kraus:
        m = k.matrix
        if m.shape[0] != m.shape[1]:
            return 1.0
        worst = max(worst, float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))))
    return worst


# -- possibilistic maps ------------------------------------------------------------------

def _sharp(p: SelfAdjoint, tol: Tolerances = DEFAULT) -> Projection:
    if isinstance(p, Projection):
        return p
    return Projection.of(p, tol)


def diamond(f: ChannelMap, p: SelfAdjoint, ceil_fn: CeilFn = ceil) -> Projection:
    """f^diamond(p) = ceil(p o f)."""
    return ceil_fn(f.heisenberg(_sharp(p)))


def box(f: ChannelMap, p: SelfAdjoint, ceil_fn: CeilFn = ceil) -> Projection:
    return diamond(f, _sharp(p).perp, ceil_fn).perp


def lower_diamond(f: ChannelMap, q: SelfAdjoint) -> Projection:
    """f_diamond(q) = im(f o pi_q)."""
    return image(compose(f, comprehension(_sharp(q)).map))


def sharp_meet(p: SelfAdjoint, q: SelfAdjoint, ceil_fn: CeilFn = ceil) -> Projection:
    """p /\\ q = (pi_p)_diamond((pi_p)^box(q))."""
    p, q = _sharp(p), _sharp(q)
    if p.signature != q.signature:
        raise SignatureMismatch("meet of projections on different objects")
    pi = comprehension(p).map
    return lower_diamond(pi, box(pi, q, ceil_fn))


def sharp_join(p: SelfAdjoint, q: SelfAdjoint, ceil_fn: CeilFn = ceil) -> Projection:
    return sharp_meet(_sharp(p).perp, _sharp(q).perp, ceil_fn).perp


def range_intersection(p: SelfAdjoint, q: SelfAdjoint, tol: Tolerances = DEFAULT) -> Projection:
    """Projection onto ran p intersect ran q: the null space of p' + q'."""
    p, q = _sharp(p), _sharp(q)
    s = p.perp + q.perp
    isos = []
    for vals, vecs in s.eig():
        isos.append(vecs[:, vals <= tol.sharp])
    return Projection._from_isometries(p.signature, isos)


def leq(p: SelfAdjoint, q: SelfAdjoint, tol: float = DEFAULT.sharp) -> bool:
    return leq_residual(p, q) <= tol


# -- sampling -------------------------------------------------------------------------------

def random_pure_map(rng: np.random.Generator, source: BlockSignature, target: BlockSignature,
                    invertible: bool = False) -> PureMap:
    """Single Kraus per pair with an injective block pairing, scaled to be subunital."""
    n = min(len(source), len(target))
    sbs = rng.permutation(len(source))[:n]
    tbs = rng.permutation(len(target))[:n]
    ks = []
    for sb, tb in zip(sbs, tbs):
        ds, dt = source.dims[sb], target.dims[tb]
        m = rng.standard_normal((dt, ds)) + 1j * rng.standard_normal((dt, ds))
        if not invertible and ds > 1 and rng.random() < 0.3:
            u, s, vh = np.linalg.svd(m, full_matrices=False)
            s[-1] = 0.0
            m = (u * s) @ vh
        ks.append(Kraus(int(sb), int(tb), m))
    top = ChannelMap(source, target, ks, check=False).unit().max_eig()
    if top > 0:
        r = np.sqrt(rng.uniform(0.5, 1.0) / top)
        ks = [Kraus(k.sb, k.tb, r * k.matrix) for k in ks]
    return PureMap(source, target, ks)


def random_sharp_pair_with_common_part(rng: np.random.Generator,
                                       sig: BlockSignature) -> tuple[Projection, Projection, Projection]:
    """(p, q, c) with c <= p and c <= q, so that the meet is at least c."""
    c = random_subprojection(rng, random_projection(rng, sig))
    rest = c.perp
    a = random_subprojection(rng, Projection.of(rest))
    b = random_subprojection(rng, Projection.of(rest))
    return Projection.of(c + a), sharp_join(c, b), c


# -- lattice check ---------------------------------------------------------------------

def check_oml(obj: BlockSignature | Iterable[int], trials: int, seed: int,
              tol: float | None = None, ceil_fn: CeilFn = ceil) -> LawReport:
    sig = BlockSignature.of(obj)
    tol = DEFAULT.law if tol is None else tol
    rng = law_rng(seed, "sharp.oml")
    res = Residual(tol)
    one, zero = identity(sig), zeros(sig)
    hits = 0
    for k in range(trials):
        p, q, c = random_sharp_pair_with_common_part(rng, sig)
        r = random_projection(rng, sig)
        m = sharp_meet(p, q, ceil_fn)
        res.add(m.dist(range_intersection(p, q)), {"trial": k, "law": "meet = range intersection"})
        res.add(m.dist(sharp_meet(q, p, ceil_fn)), {"trial": k, "law": "meet commutative"})
        res.add(max(leq_residual(m, p), leq_residual(m, q), leq_residual(c, m)),
                {"trial": k, "law": "meet is the greatest lower bound"})
        hits += int(c.trace() > 0.5)
        res.add(sharp_meet(sharp_meet(p, q, ceil_fn), r, ceil_fn).dist(
            sharp_meet(p, sharp_meet(q, r, ceil_fn), ceil_fn)), {"trial": k, "law": "meet associative"})
        j = sharp_join(p, q, ceil_fn)
        res.add(sharp_meet(p, j, ceil_fn).dist(p), {"trial": k, "law": "absorption"})
        res.add(sharp_meet(p, p.perp, ceil_fn).dist(zero), {"trial": k, "law": "p /\\ p' = 0"})
        res.add(sharp_join(p, p.perp, ceil_fn).dist(one), {"trial": k, "law": "p \\/ p' = 1"})
        res.add(p.perp.perp.dist(p), {"trial": k, "law": "p'' = p"})
        # p <= q: orthomodularity and antitone complement
        s = Projection.of(c)
        res.add(leq_residual(p.perp, s.perp), {"trial": k, "law": "c <= p implies p' <= c'"})
        res.add(sharp_join(s, sharp_meet(p, s.perp, ceil_fn), ceil_fn).dist(p),
                {"trial": k, "law": "orthomodular"})
    out = res.report("sharp.oml", f"{sig} trials={trials}",
                     statement="sharp predicates form an orthomodular lattice; meet via the Galois formula",
                     nonvacuous=hits)
    return out


# -- law suite ------------------------------------------------------------------------

@dataclass(frozen=True)
class DiamondLaw:
    law_id: str
    statement: str
    fn: Callable[..., Residual]


def _pick_map(rng: np.random.Generator, sig: BlockSignature, pure: bool = False) -> ChannelMap:
    if pure:
        return random_pure_map(rng, sig, sig)
    u = rng.random()
    if u < 0.2:
        return random_pure_map(rng, sig, sig)
    if u < 0.3:
        return assert_map(random_effect(rng, sig))
    return random_channel(rng, sig, sig, kraus_per_pair=int(rng.integers(1, 3)))


def _kill_map(rng: np.random.Generator, sig: BlockSignature, p: MatrixEffect) -> ChannelMap:
    """Map whose Kraus ranges avoid the support of p, so p o f = 0."""
    return _range_restricted_channel(rng, sig, ceil(p).perp)


def _fl_a(rng, sig, trials, tol, ceil_fn):
    res = Residual(tol)
    for k in range(trials):
        p = random_effect(rng, sig)
        res.add(max(leq_residual(floor(p), p), leq_residual(p, ceil_fn(p))), {"trial": k})
    return res


def _fl_b(rng, sig, trials, tol, ceil_fn):
    res = Residual(tol)
    for k in range(trials):
        p = random_effect(rng, sig)
        fl = image(comprehension(p).map)
        res.add(image(comprehension(fl).map).dist(fl), {"trial": k})
        res.add(fl.dist(floor(p)), {"trial": k, "law": "im(pi_p) = spectral floor"})
    return res


def _fl_c(rng, sig, trials, tol, ceil_fn):
    res = Residual(tol)
    for k in range(trials):
        p = random_effect(rng, sig)
        q = _below(rng, p)
        res.add(max(leq_residual(floor(q), floor(p)), leq_residual(ceil_fn(q), ceil_fn(p))), {"trial": k})
    return res


def _below(rng: np.random.Generator, p: MatrixEffect) -> MatrixEffect:
    """Random q <= p: sqrt(p) e sqrt(p) for a random effect e, sometimes with e = 1."""
    e = identity(p.signature) if rng.random() < 0.25 else random_effect(rng, p.signature)
    return MatrixEffect.of(assert_map(p).heisenberg(e))


def _fl_d(rng, sig, trials, tol, ceil_fn):
    res = Residual(tol)
    for k in range(trials):
        p = random_effect(rng, sig)
        f = _pick_map(rng, sig)
        lhs = ceil_fn(f.heisenberg(p))
        rhs = ceil_fn(f.heisenberg(ceil_fn(p)))
        res.add(lhs.dist(rhs), lambda k=k, p=p, lhs=lhs, rhs=rhs: {
            "trial": k, "p_eigenvalues": [round(float(x), 6) for x in p.eigvals()],
            "rank_ceil(p o f)": round(lhs.trace()), "rank_ceil(ceil(p) o f)": round(rhs.trace())})
    return res


def _fl_e(rng, sig, trials, tol, ceil_fn):
    res = Residual(0.5)
    res.hits = 0  # type: ignore[attr-defined]
    for k in range(trials):
        p = random_effect(rng, sig)
        f = _kill_map(rng, sig, p) if rng.random() < 0.5 else _pick_map(rng, sig)
        a = ceil_fn(p)
        zero_ceil = f.heisenberg(a).norm() <= tol
        zero_p = f.heisenberg(p).norm() <= tol
        res.hits += int(zero_p)  # type: ignore[attr-defined]
        res.flag(zero_ceil == zero_p, {"trial": k, "ceil(p) o f = 0": zero_ceil, "p o f = 0": zero_p})
    return res


def _fl_f(rng, sig, trials, tol, ceil_fn):
    res = Residual(0.5)
    for k in range(trials):
        p = random_projection(rng, sig) if rng.random() < 0.5 else random_effect(rng, sig)
        fixed = floor(p).dist(p) <= tol
        res.flag(fixed == is_sharp(p), {"trial": k, "sharp": is_sharp(p)})
    return res


def _ga_a(rng, sig, trials, tol, ceil_fn):
    res = Residual(tol)
    for k in range(trials):
        f = _pick_map(rng, sig)
        p = random_projection(rng, sig)
        q = sharp_join(p, random_projection(rng, sig))
        res.add(leq_residual(diamond(f, p, ceil_fn), diamond(f, q, ceil_fn)), {"trial": k, "map": "diamond"})
        res.add(leq_residual(box(f, p, ceil_fn), box(f, q, ceil_fn)), {"trial": k, "map": "box"})
    return res


def _ga_b(rng, sig, trials, tol, ceil_fn):
    res = Residual(0.5)
    res.hits = 0  # type: ignore[attr-defined]
    for k in range(trials):
        f = _pick_map(rng, sig)
        p = random_projection(rng, sig)
        up = diamond(f, p, ceil_fn)
        q = random_subprojection(rng, up.perp) if rng.random() < 0.5 else random_projection(rng, sig)
        left = leq(up, q.perp)
        right = leq(lower_diamond(f, q), p.perp)
        res.hits += int(left)  # type: ignore[attr-defined]
        res.flag(left == right, {"trial": k, "left": left, "right": right})
    return res


def _ga_c(rng, sig, trials, tol, ceil_fn):
    res = Residual(0.5)
    res.hits = 0  # type: ignore[attr-defined]
    for k in range(trials):
        f = _pick_map(rng, sig)
        q = random_projection(rng, sig)
        low = lower_diamond(f, q)
        p = sharp_join(low, random_subprojection(rng, low.perp)) if rng.random() < 0.5 \
            else random_projection(rng, sig)
        left = leq(low, p)
        right = leq(q, box(f, p, ceil_fn))
        res.hits += int(left)  # type: ignore[attr-defined]
        res.flag(left == right, {"trial": k, "left": left, "right": right})
    return res


def _ga_d(rng, sig, trials, tol, ceil_fn):
    res = Residual(tol)
    for k in range(trials):
        f = _pick_map(rng, sig)
        q = random_projection(rng, sig)
        p = random_subprojection(rng, q)
        res.add(leq_residual(lower_diamond(f, p), lower_diamond(f, q)), {"trial": k})
    return res


def _ga_e(rng, sig, trials, tol, ceil_fn):
    res = Residual(tol)
    for k in range(trials):
        f = _pick_map(rng, sig)
        q = random_projection(rng, sig)
        once = lower_diamond(f, q)
        res.add(lower_diamond(f, box(f, once, ceil_fn)).dist(once), {"trial": k})
    return res


def _ga_f(rng, sig, trials, tol, ceil_fn):
    res = Residual(tol)
    ident = identity_map(sig)
    for k in range(trials):
        p = random_projection(rng, sig)
        res.add(max(diamond(ident, p, ceil_fn).dist(p), lower_diamond(ident, p).dist(p),
                    box(ident, p, ceil_fn).dist(p)), {"trial": k})
    return res


def _ga_g(rng, sig, trials, tol, ceil_fn):
    res = Residual(tol)
    for k in range(trials):
        f, g = _pick_map(rng, sig), _pick_map(rng, sig)
        p = random_projection(rng, sig)
        gf = compose(g, f)
        res.add(diamond(gf, p, ceil_fn).dist(diamond(f, diamond(g, p, ceil_fn), ceil_fn)),
                {"trial": k, "map": "diamond"})
        res.add(box(gf, p, ceil_fn).dist(box(f, box(g, p, ceil_fn), ceil_fn)), {"trial": k, "map": "box"})
        res.add(diamond(scale_map(f, 0.5), p, ceil_fn).dist(diamond(f, p, ceil_fn)),
                {"trial": k, "map": "half f"})
    return res


def _ga_h(rng, sig, trials, tol, ceil_fn):
    res = Residual(tol)
    for k in range(trials):
        f, g = _pick_map(rng, sig), _pick_map(rng, sig)
        q = random_projection(rng, sig)
        res.add(lower_diamond(compose(g, f), q).dist(lower_diamond(g, lower_diamond(f, q))), {"trial": k})
    return res


def _adjoint_symmetry(rng, sig, trials, tol, ceil_fn):
    """Pure maps are diamond-adjoint to their dagger, in both directions."""
    res = Residual(tol)
    for k in range(trials):
        f = random_pure_map(rng, sig, sig)
        g = dagger(f)
        p = random_projection(rng, sig)
        res.add(diamond(f, p, ceil_fn).dist(lower_diamond(g, p)), {"trial": k, "side": "f^d = g_d"})
        res.add(diamond(g, p, ceil_fn).dist(lower_diamond(f, p)), {"trial": k, "side": "g^d = f_d"})
        a = assert_map(random_effect(rng, sig))
        res.add(diamond(a, p, ceil_fn).dist(lower_diamond(a, p)), {"trial": k, "side": "assert self-adjoint"})
    return res


def _assert_image(rng, sig, trials, tol, ceil_fn):
    res = Residual(0.5)
    res.hits = 0  # type: ignore[attr-defined]
    for k in range(trials):
        p = random_projection(rng, sig)
        a = assert_map(p)
        f = _pick_map(rng, sig)
        if rng.random() < 0.5:
            f = compose(a, f)
        left = leq(image(f), p)
        right = choi_distance(compose(a, f), f) <= tol
        res.hits += int(left)  # type: ignore[attr-defined]
        res.flag(left == right, {"trial": k, "im f <= p": left, "asrt_p f = f": right})
    return res


def _assert_coimage(rng, sig, trials, tol, ceil_fn):
    res = Residual(0.5)
    res.hits = 0  # type: ignore[attr-defined]
    for k in range(trials):
        p = random_projection(rng, sig)
        a = assert_map(p)
        g = _pick_map(rng, sig)
        if rng.random() < 0.5:
            g = compose(g, a)
        left = leq(g.unit(), p)
        right = choi_distance(compose(g, a), g) <= tol
        res.hits += int(left)  # type: ignore[attr-defined]
        res.flag(left == right, {"trial": k, "1 o g <= p": left, "g asrt_p = g": right})
    return res


def _assert_square(rng, sig, trials, tol, ceil_fn):
    res = Residual(tol)
    for k in range(trials):
        p = random_effect(rng, sig)
        a = assert_map(p)
        p2 = MatrixEffect.of(_square(p))
        res.add(choi_distance(compose(a, a), assert_map(p2)), {"trial": k})
        res.add(a.unit().dist(p), {"trial": k, "law": "1 o asrt_p = p"})
        res.add(image(a).dist(ceil(p)), {"trial": k, "law": "im asrt_p = ceil p"})
    return res


def _square(p: SelfAdjoint) -> SelfAdjoint:
    return SelfAdjoint._trusted(b @ b for b in p.blocks)


def _assert_idempotent(rng, sig, trials, tol, ceil_fn):
    res = Residual(0.5)
    for k in range(trials):
        p = random_projection(rng, sig) if rng.random() < 0.5 else random_effect(rng, sig)
        a = assert_map(p)
        idem = choi_distance(compose(a, a), a) <= tol
        res.flag(idem == is_sharp(p), {"trial": k, "sharp": is_sharp(p), "idempotent": idem})
    return res


def _compatibility(rng, sig, trials, tol, ceil_fn):
    res = Residual(DEFAULT.choi)
    for k in range(trials):
        p = random_projection(rng, sig)
        pi, xi = comprehension(p).map, filter_map(p).map
        res.add(choi_distance(compose(xi, pi), identity_map(pi.source)), {"trial": k, "law": "xi pi = id"})
        res.add(choi_distance(compose(pi, xi), assert_map(p)), {"trial": k, "law": "pi xi = asrt"})
    return res


def _dagger_laws(rng, sig, trials, tol, ceil_fn):
    res = Residual(DEFAULT.choi)
    for k in range(trials):
        p = random_projection(rng, sig)
        res.add(choi_distance(dagger(comprehension(p).map), filter_map(p).map), {"trial": k, "law": "pi^+ = xi"})
        f, g = random_pure_map(rng, sig, sig), random_pure_map(rng, sig, sig)
        res.add(choi_distance(dagger(dagger(f)), f), {"trial": k, "law": "f^++ = f"})
        res.add(choi_distance(dagger(compose(g, f)), compose(dagger(f), dagger(g))),
                {"trial": k, "law": "(g f)^+ = f^+ g^+"})
        e = random_effect(rng, sig)
        res.add(choi_distance(dagger(assert_map(e)), assert_map(e)), {"trial": k, "law": "asrt^+ = asrt"})
        u = random_unitary_map(rng, sig)
        res.add(choi_distance(compose(dagger(u), u), identity_map(sig)), {"trial": k, "law": "Theta^+ = Theta^-1"})
    return res


def _factorization(rng, sig, trials, tol, ceil_fn):
    res = Residual(tol)
    for k in range(trials):
        f = random_pure_map(rng, sig, sig)
        fac = pure_factorize(f)
        res.add(choi_distance(fac.recompose(), f), {"trial": k, "law": "recompose"})
        res.add(unitarity_residual(fac.theta), {"trial": k, "law": "Theta unitary"})
    return res


def _pure_chain_link(rng: np.random.Generator, sig: BlockSignature) -> ChannelMap:
    """pi_s o xi^p with s a unitary conjugate of ceil p, so the carriers agree."""
    p = random_effect(rng, sig)
    u = random_unitary_map(rng, sig)
    s = Projection.of(u.heisenberg(ceil(p)))
    return compose(comprehension(s).map, filter_map(p).map)


def _closure(rng, sig, trials, tol, ceil_fn):
    res = Residual(tol)
    for k in range(trials):
        chain = compose(_pure_chain_link(rng, sig), _pure_chain_link(rng, sig))
        fac = pure_factorize(chain)
        res.add(choi_distance(fac.recompose(), chain), {"trial": k})
        res.add(unitarity_residual(fac.theta), {"trial": k, "law": "Theta unitary"})
    return res


def _filter_composition(rng, sig, trials, tol, ceil_fn):
    res = Residual(tol)
    for k in range(trials):
        q = random_effect(rng, sig)
        xq = filter_map(q).map
        if not xq.target.dims:
            continue
        p = random_effect(rng, xq.target)
        xp = filter_map(p).map
        comp = compose(xp, xq)
        r = MatrixEffect.of(xq.heisenberg(p))
        res.add(comp.unit().dist(r), {"trial": k, "law": "1 o xi^p xi^q = p o xi^q"})
        res.add(image(comp).dist(identity(comp.target)), {"trial": k, "law": "im = 1"})
        g = random_channel(rng, sig, BlockSignature((2,)))
        f = compose(g, assert_map(r))
        res.add(choi_distance(compose(filter_mediator(comp, f), comp), f), {"trial": k, "law": "initial"})
    return res


def _comprehension_universal(rng, sig, trials, tol, ceil_fn):
    res = Residual(tol)
    for k in range(trials):
        p = random_effect(rng, sig)
        seed = int(rng.integers(2 ** 31))
        c = comprehension(p, certify=2, seed=seed).certificate
        x = filter_map(p, certify=2, seed=seed).certificate
        res.add(max(c.values()), {"trial": k, "object": "comprehension", **c})
        res.add(max(x.values()), {"trial": k, "object": "filter", **x})
    return res


def _sharp_sum(rng, sig, trials, tol, ceil_fn):
    res = Residual(tol)
    for k in range(trials):
        p = random_projection(rng, sig)
        q = random_subprojection(rng, p.perp)
        s = p + q
        idem = max((float(np.max(np.abs(b @ b - b))) for b in s.blocks if b.size), default=0.0)
        res.add(idem, {"trial": k, "law": "p + q sharp"})
        res.add(s.dist(sharp_join(p, q, ceil_fn)), {"trial": k, "law": "p + q = p \\/ q"})
    return res


DIAMOND_LAWS: tuple[DiamondLaw, ...] = (
    DiamondLaw("floorceil.a", "floor p <= p <= ceil p", _fl_a),
    DiamondLaw("floorceil.b", "floor floor p = floor p, with floor p = im(pi_p)", _fl_b),
    DiamondLaw("floorceil.c", "q <= p implies floor q <= floor p and ceil q <= ceil p", _fl_c),
    DiamondLaw("floorceil.d", "ceil(p o f) = ceil(ceil(p) o f)", _fl_d),
    DiamondLaw("floorceil.e", "ceil(p) o f = 0 iff p o f = 0", _fl_e),
    DiamondLaw("floorceil.f", "p is sharp iff floor p = p", _fl_f),
    DiamondLaw("galois.a", "f^diamond and f^box are monotone", _ga_a),
    DiamondLaw("galois.b", "f^diamond(p) <= q' iff f_diamond(q) <= p'", _ga_b),
    DiamondLaw("galois.c", "f_diamond(q) <= p iff q <= f^box(p)", _ga_c),
    DiamondLaw("galois.d", "f_diamond is monotone", _ga_d),
    DiamondLaw("galois.e", "f_diamond f^box f_diamond = f_diamond", _ga_e),
    DiamondLaw("galois.f", "identity acts as identity under all three maps", _ga_f),
    DiamondLaw("galois.g", "(g f)^diamond = f^diamond g^diamond, same for box; (f/2)^diamond = f^diamond", _ga_g),
    DiamondLaw("galois.h", "(g f)_diamond = g_diamond f_diamond", _ga_h),
    DiamondLaw("galois.adjoint_symmetry", "f^diamond = g_diamond iff g^diamond = f_diamond (pure f, g = f^+)",
               _adjoint_symmetry),
    DiamondLaw("assert.image", "for sharp p: im f <= p iff asrt_p o f = f", _assert_image),
    DiamondLaw("assert.coimage", "for sharp p: 1 o g <= p iff g o asrt_p = g", _assert_coimage),
    DiamondLaw("assert.square", "asrt_p o asrt_p = asrt_{p^2}, 1 o asrt_p = p, im asrt_p = ceil p", _assert_square),
    DiamondLaw("assert.idempotent", "asrt_p is idempotent iff p is sharp", _assert_idempotent),
    DiamondLaw("compat.sharp", "for sharp p: xi^p pi_p = id and pi_p xi^p = asrt_p", _compatibility),
    DiamondLaw("dagger.laws", "pi_p^+ = xi^p, involution, contravariance, asrt^+ = asrt, Theta^+ = Theta^-1",
               _dagger_laws),
    DiamondLaw("pure.factorization", "f = pi_{im f} Theta xi^{ceil(1 o f)} asrt_{1 o f}, Theta unitary",
               _factorization),
    DiamondLaw("pure.closure", "pi xi pi' xi' re-factorises as a pure map", _closure),
    DiamondLaw("filter.composition", "xi^p o xi^q is a filter for p o xi^q", _filter_composition),
    DiamondLaw("universal.mediators", "comprehension and filter mediators exist and recompose", _comprehension_universal),
    DiamondLaw("sharp.sum", "orthogonal sharp p, q: p + q is sharp and equals p \\/ q", _sharp_sum),
)


def run_diamond_laws(obj: BlockSignature | Iterable[int], trials: int, seed: int,
                     tol: float | None = None, ceil_fn: CeilFn = ceil,
                     laws: Iterable[str] | None = None) -> list[LawReport]:
    """Run the filter/comprehension/possibilistic law catalog on one object."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    sig = BlockSignature.of(obj)
    tol = DEFAULT.law if tol is None else tol
    wanted = None if laws is None else set(laws)
    out = []
    inst = f"{sig} trials={trials} seed={seed}"
    for law in DIAMOND_LAWS:
        if wanted is not None and law.law_id not in wanted:
            continue
        res = law.fn(law_rng(seed, law.law_id), sig, trials, tol, ceil_fn)
        out.append(res.report(law.law_id, inst, statement=law.statement,
                              nonvacuous=getattr(res, "hits", None)))
    if wanted is None or "sharp.oml" in wanted:
        out.append(check_oml(sig, trials, seed, tol, ceil_fn))
    return out


def mutant_ceil(p: SelfAdjoint, tol: Tolerances = DEFAULT) -> Projection:
    """Deliberately wrong ceiling: keeps eigenvalues above 1/2 instead of the support."""
    isos = []
    for vals, vecs in p.eig():
        isos.append(vecs[:, vals > 0.5])
    return Projection._from_isometries(p.signature, isos)
