"""Two concrete effectuses and their product.

Matrix backend: objects are block signatures, morphisms are completely
positive subunital maps in Kraus form. A morphism ``f: A -> B`` carries Kraus
operators ``K`` of shape ``dim(B_tb) x dim(A_sb)``; predicates on ``B`` pull
back along ``f`` by ``p o f = sum K^dagger p K``.

Set backend: objects are finite sets ``{0..n-1}``, morphisms are partial
functions, predicates are subsets.

Product backend: literal pairs of the two.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import effect_core as ec
from .jordan_matrix import (BlockSignature, MatrixEffect, Projection, SelfAdjoint,
                            SignatureMismatch, SuperOperator, identity, random_effect,
                            random_projection, random_unitary, support_isometries, zeros)
from .reports import LawReport, Residual, law_rng
from .tolerances import DEFAULT, Tolerances

CHANNEL_MAP_SCHEMA = "effectus-lab/channel-map/1"


class NotSummable(ValueError):
    pass


class NotSubunital(ValueError):
    pass


class BackendMismatch(ValueError):
    pass


class TrivialScalar(ValueError):
    pass


# -- matrix backend -------------------------------------------------------------------

@dataclass(frozen=True)
class Kraus:
    sb: int
    tb: int
    matrix: np.ndarray


class ChannelMap:
    """CP subunital map ``source -> target`` given by routed Kraus operators."""

    def __init__(self, source: BlockSignature | Iterable[int], target: BlockSignature | Iterable[int],
                 kraus: Iterable[Kraus | tuple[int, int, Any]] = (), tol: Tolerances = DEFAULT,
                 check: bool = True):
        self.source = BlockSignature.of(source)
        self.target = BlockSignature.of(target)
        ks = []
        for k in kraus:
            if not isinstance(k, Kraus):
                k = Kraus(int(k[0]), int(k[1]), np.asarray(k[2], dtype=complex))
            m = np.array(k.matrix, dtype=complex)
            if not (0 <= k.sb < len(self.source) and 0 <= k.tb < len(self.target)):
                raise SignatureMismatch(f"Kraus routes {k.sb}->{k.tb} outside {self.source}->{self.target}")
            shape = (self.target.dims[k.tb], self.source.dims[k.sb])
            if m.shape != shape:
                raise SignatureMismatch(f"Kraus shape {m.shape}, expected {shape}")
            m.setflags(write=False)
            ks.append(Kraus(k.sb, k.tb, m))
        self.kraus = tuple(ks)
        if check:
            top = self.unit().max_eig()
            if top > 1 + tol.psd:
                raise NotSubunital(f"1 o f has eigenvalue {top:.6g} > 1")

    def heisenberg(self, p: SelfAdjoint) -> SelfAdjoint:
        """p o f: pull a target element back to the source."""
        if p.signature != self.target:
            raise SignatureMismatch(f"{p.signature} is not on {self.target}")
        out = [np.zeros((d, d), complex) for d in self.source.dims]
        for k in self.kraus:
            out[k.sb] = out[k.sb] + k.matrix.conj().T @ p.blocks[k.tb] @ k.matrix
        return SelfAdjoint._trusted(out)

    def schrodinger(self, rho: SelfAdjoint) -> SelfAdjoint:
        """Push a source element (e.g. a density) forward to the target."""
        if rho.signature != self.source:
            raise SignatureMismatch(f"{rho.signature} is not on {self.source}")
        out = [np.zeros((d, d), complex) for d in self.target.dims]
        for k in self.kraus:
            out[k.tb] = out[k.tb] + k.matrix @ rho.blocks[k.sb] @ k.matrix.conj().T
        return SelfAdjoint._trusted(out)

    def unit(self) -> SelfAdjoint:
        """1 o f."""
        return self.heisenberg(identity(self.target))

    def pred(self, p: SelfAdjoint) -> MatrixEffect:
        return MatrixEffect.of(self.heisenberg(p))

    def superop(self) -> SuperOperator:
        """Heisenberg action as a superoperator target -> source."""
        return SuperOperator.from_function(self.heisenberg, self.target, self.source)

    def __repr__(self) -> str:
        return f"ChannelMap({self.source} -> {self.target}, {len(self.kraus)} Kraus)"

    def to_json(self) -> dict[str, Any]:
        return {
            "schema": CHANNEL_MAP_SCHEMA,
            "source": list(self.source.dims),
            "target": list(self.target.dims),
            "kraus": [{"sb": k.sb, "tb": k.tb,
                       "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in k.matrix]}
                      for k in self.kraus],
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "ChannelMap":
        ks = [Kraus(int(k["sb"]), int(k["tb"]),
                    np.array([[complex(re, im) for re, im in row] for row in k["matrix"]]))
              for k in data["kraus"]]
        return cls(data["source"], data["target"], ks)


def identity_map(sig: BlockSignature | Iterable[int]) -> ChannelMap:
    sig = BlockSignature.of(sig)
    return ChannelMap(sig, sig, [Kraus(i, i, np.eye(d)) for i, d in enumerate(sig.dims)], check=False)


def zero_map(source: BlockSignature | Iterable[int], target: BlockSignature | Iterable[int]) -> ChannelMap:
    return ChannelMap(source, target, [], check=False)


def compose(g: ChannelMap, f: ChannelMap) -> ChannelMap:
    """g o f (apply f first)."""
    if f.target != g.source:
        raise SignatureMismatch(f"cannot compose {f.source}->{f.target} then {g.source}->{g.target}")
    ks = [Kraus(kf.sb, kg.tb, kg.matrix @ kf.matrix)
          for kg in g.kraus for kf in f.kraus if kf.tb == kg.sb]
    return ChannelMap(f.source, g.target, ks, check=False)


def summable(f: ChannelMap, g: ChannelMap, tol: Tolerances = DEFAULT) -> bool:
    if (f.source, f.target) != (g.source, g.target):
        raise SignatureMismatch("maps have different types")
    return (f.unit() + g.unit()).max_eig() <= 1 + tol.psd


def ovee_maps(f: ChannelMap, g: ChannelMap, tol: Tolerances = DEFAULT) -> ChannelMap:
    if not summable(f, g, tol):
        raise NotSummable("1 o f + 1 o g exceeds 1")
    return ChannelMap(f.source, f.target, f.kraus + g.kraus, check=False)


def scale_map(f: ChannelMap, s: float) -> ChannelMap:
    if not 0.0 <= s <= 1.0:
        raise ValueError("scalar must lie in [0, 1]")
    r = np.sqrt(s)
    return ChannelMap(f.source, f.target, [Kraus(k.sb, k.tb, r * k.matrix) for k in f.kraus], check=False)


def is_total(f: ChannelMap, tol: Tolerances = DEFAULT) -> bool:
    return f.unit().dist(identity(f.source)) <= tol.law


def choi_blocks(f: ChannelMap) -> dict[tuple[int, int], np.ndarray]:
    """Per block pair, sum over Kraus of vec(K) vec(K)^dagger."""
    out: dict[tuple[int, int], np.ndarray] = {}
    for k in f.kraus:
        v = k.matrix.reshape(-1, 1)
        key = (k.sb, k.tb)
        out[key] = out.get(key, 0) + v @ v.conj().T
    return out


def choi_distance(f: ChannelMap, g: ChannelMap) -> float:
    if (f.source, f.target) != (g.source, g.target):
        raise SignatureMismatch("maps have different types")
    cf, cg = choi_blocks(f), choi_blocks(g)
    worst = 0.0
    for key in set(cf) | set(cg):
        a = cf.get(key)
        b = cg.get(key)
        diff = (a if a is not None else 0) - (b if b is not None else 0)
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def maps_equal(f: ChannelMap, g: ChannelMap, tol: Tolerances = DEFAULT) -> bool:
    return choi_distance(f, g) <= tol.choi


def image(f: ChannelMap, tol: Tolerances = DEFAULT) -> Projection:
    """Support of sum K K^dagger per target block."""
    out = [np.zeros((d, d), complex) for d in f.target.dims]
    for k in f.kraus:
        out[k.tb] = out[k.tb] + k.matrix @ k.matrix.conj().T
    return Projection._from_isometries(f.target, support_isometries(SelfAdjoint._trusted(out), tol))


@dataclass(frozen=True)
class Coproduct:
    obj: Any
    kappa: tuple[Any, Any]
    proj: tuple[Any, Any]


def coproduct(a: BlockSignature | Iterable[int], b: BlockSignature | Iterable[int]) -> Coproduct:
    a, b = BlockSignature.of(a), BlockSignature.of(b)
    ab = BlockSignature(a.dims + b.dims)
    off = len(a)
    k1 = ChannelMap(a, ab, [Kraus(i, i, np.eye(d)) for i, d in enumerate(a.dims)], check=False)
    k2 = ChannelMap(b, ab, [Kraus(i, off + i, np.eye(d)) for i, d in enumerate(b.dims)], check=False)
    p1 = ChannelMap(ab, a, [Kraus(i, i, np.eye(d)) for i, d in enumerate(a.dims)], check=False)
    p2 = ChannelMap(ab, b, [Kraus(off + i, i, np.eye(d)) for i, d in enumerate(b.dims)], check=False)
    return Coproduct(ab, (k1, k2), (p1, p2))


def tuple_maps(f1: ChannelMap, f2: ChannelMap) -> ChannelMap:
    """<f1, f2>: C -> A + B for a compatible pair (1 o f1 + 1 o f2 <= 1)."""
    if f1.source != f2.source:
        raise SignatureMismatch("tupled maps need a common source")
    off = len(f1.target)
    target = BlockSignature(f1.target.dims + f2.target.dims)
    ks = list(f1.kraus) + [Kraus(k.sb, off + k.tb, k.matrix) for k in f2.kraus]
    return ChannelMap(f1.source, target, ks)


def cotuple_maps(f: ChannelMap, g: ChannelMap) -> ChannelMap:
    """[f, g]: A + B -> C."""
    if f.target != g.target:
        raise SignatureMismatch("cotupled maps need a common target")
    off = len(f.source)
    source = BlockSignature(f.source.dims + g.source.dims)
    ks = list(f.kraus) + [Kraus(off + k.sb, k.tb, k.matrix) for k in g.kraus]
    return ChannelMap(source, f.target, ks, check=False)


def sum_maps(f: ChannelMap, g: ChannelMap) -> ChannelMap:
    """f + g: A + B -> C + D, acting blockwise."""
    off_s, off_t = len(f.source), len(f.target)
    ks = list(f.kraus) + [Kraus(off_s + k.sb, off_t + k.tb, k.matrix) for k in g.kraus]
    return ChannelMap(BlockSignature(f.source.dims + g.source.dims),
                      BlockSignature(f.target.dims + g.target.dims), ks, check=False)


def predicate_map(p: MatrixEffect) -> ChannelMap:
    """The predicate p as a map A -> [1]."""
    ks = []
    for i, (vals, vecs) in enumerate(p.eig()):
        for lam, v in zip(vals, vecs.T):
            if lam > 0:
                ks.append(Kraus(i, 0, np.sqrt(lam) * v.conj().reshape(1, -1)))
    return ChannelMap(p.signature, [1], ks)


def state_map(rho: SelfAdjoint) -> ChannelMap:
    """A density (trace 1) as a total map [1] -> A."""
    ks = []
    for i, (vals, vecs) in enumerate(rho.eig()):
        for lam, v in zip(vals, vecs.T):
            if lam > 0:
                ks.append(Kraus(0, i, np.sqrt(lam) * v.reshape(-1, 1)))
    return ChannelMap([1], rho.signature, ks)


def scalar_value(s: ChannelMap) -> float:
    if s.source.dims != (1,) or s.target.dims != (1,):
        raise SignatureMismatch("scalars are maps [1] -> [1]")
    return float(s.unit().blocks[0][0, 0].real)


def scalar_map(x: float) -> ChannelMap:
    return ChannelMap([1], [1], [Kraus(0, 0, np.array([[np.sqrt(x)]]))])


def random_channel(rng: np.random.Generator, source: BlockSignature | Iterable[int],
                   target: BlockSignature | Iterable[int], kraus_per_pair: int = 2,
                   density: float = 0.7, total: bool = False) -> ChannelMap:
    """Random CP map with Kraus operators on a random subset of block pairs.

    Subunital maps are rescaled so that 1 o f has top eigenvalue uniform in
    (0.5, 1]; total maps are normalised by (sum K^dagger K)^(-1/2) per source block.
    """
    source, target = BlockSignature.of(source), BlockSignature.of(target)
    ks: list[Kraus] = []
    if not source.dims or not target.dims:
        return zero_map(source, target)
    for sb, ds in enumerate(source.dims):
        pairs = [tb for tb in range(len(target)) if rng.random() < density]
        if not pairs or total:
            pairs = sorted(set(pairs) | {int(rng.integers(len(target)))})
        for tb in pairs:
            dt = target.dims[tb]
            for _ in range(kraus_per_pair):
                m = rng.standard_normal((dt, ds)) + 1j * rng.standard_normal((dt, ds))
                ks.append(Kraus(sb, tb, m))
    f = ChannelMap(source, target, ks, check=False)
    if total:
        unit = f.unit()
        inv_sqrt = []
        for vals, vecs in unit.eig():
            inv_sqrt.append((vecs / np.sqrt(vals)) @ vecs.conj().T)
        return ChannelMap(source, target, [Kraus(k.sb, k.tb, k.matrix @ inv_sqrt[k.sb]) for k in ks])
    top = f.unit().max_eig()
    if top <= 0:
        return f
    r = np.sqrt(rng.uniform(0.5, 1.0) / top)
    return ChannelMap(source, target, [Kraus(k.sb, k.tb, r * k.matrix) for k in ks])


def random_unitary_map(rng: np.random.Generator, sig: BlockSignature) -> ChannelMap:
    return ChannelMap(sig, sig, [Kraus(i, i, random_unitary(rng, d)) for i, d in enumerate(sig.dims)])


# -- set backend --------------------------------------------------------------------

@dataclass(frozen=True)
class PartialFunctionMap:
    source: int
    target: int
    graph: tuple[int | None, ...]

    def __post_init__(self) -> None:
        if len(self.graph) != self.source:
            raise SignatureMismatch("graph length must equal source size")
        for y in self.graph:
            if y is not None and not 0 <= y < self.target:
                raise SignatureMismatch(f"value {y} outside target of size {self.target}")

    def domain(self) -> frozenset[int]:
        return frozenset(x for x, y in enumerate(self.graph) if y is not None)

    def pred(self, s: Iterable[int]) -> frozenset[int]:
        s = frozenset(s)
        return frozenset(x for x, y in enumerate(self.graph) if y is not None and y in s)


def set_identity(n: int) -> PartialFunctionMap:
    return PartialFunctionMap(n, n, tuple(range(n)))


def set_zero(n: int, m: int) -> PartialFunctionMap:
    return PartialFunctionMap(n, m, (None,) * n)


def set_compose(g: PartialFunctionMap, f: PartialFunctionMap) -> PartialFunctionMap:
    if f.target != g.source:
        raise SignatureMismatch("partial functions not composable")
    return PartialFunctionMap(f.source, g.target,
                              tuple(None if y is None else g.graph[y] for y in f.graph))


def set_ovee(f: PartialFunctionMap, g: PartialFunctionMap) -> PartialFunctionMap:
    if (f.source, f.target) != (g.source, g.target):
        raise SignatureMismatch("maps have different types")
    if f.domain() & g.domain():
        raise NotSummable("domains overlap")
    return PartialFunctionMap(f.source, f.target,
                              tuple(a if a is not None else b for a, b in zip(f.graph, g.graph)))


def set_image(f: PartialFunctionMap) -> frozenset[int]:
    return frozenset(y for y in f.graph if y is not None)


def set_coproduct(n: int, m: int) -> Coproduct:
    k1 = PartialFunctionMap(n, n + m, tuple(range(n)))
    k2 = PartialFunctionMap(m, n + m, tuple(range(n, n + m)))
    p1 = PartialFunctionMap(n + m, n, tuple(range(n)) + (None,) * m)
    p2 = PartialFunctionMap(n + m, m, (None,) * n + tuple(range(m)))
    return Coproduct(n + m, (k1, k2), (p1, p2))


def random_partial_function(rng: np.random.Generator, n: int, m: int,
                            total: bool = False) -> PartialFunctionMap:
    graph = []
    for _ in range(n):
        if m == 0 or (not total and rng.random() < 0.3):
            graph.append(None)
        else:
            graph.append(int(rng.integers(m)))
    return PartialFunctionMap(n, m, tuple(graph))


def set_comprehension(n: int, s: Iterable[int]) -> tuple[PartialFunctionMap, PartialFunctionMap]:
    """(pi_S, xi^S) for a subset S of {0..n-1}."""
    elems = sorted(set(s))
    pos = {x: i for i, x in enumerate(elems)}
    pi = PartialFunctionMap(len(elems), n, tuple(elems))
    xi = PartialFunctionMap(n, len(elems), tuple(pos.get(x) for x in range(n)))
    return pi, xi


# -- backends -----------------------------------------------------------------------

class MatrixBackend:
    name = "matrix"

    def identity(self, a: BlockSignature) -> ChannelMap:
        return identity_map(a)

    def zero(self, a: BlockSignature, b: BlockSignature) -> ChannelMap:
        return zero_map(a, b)

    def compose(self, g: ChannelMap, f: ChannelMap) -> ChannelMap:
        return compose(g, f)

    def ovee(self, f: ChannelMap, g: ChannelMap) -> ChannelMap | None:
        return ovee_maps(f, g) if summable(f, g) else None

    def dist(self, f: ChannelMap, g: ChannelMap) -> float:
        return choi_distance(f, g)

    def unit(self, f: ChannelMap) -> SelfAdjoint:
        return f.unit()

    def unit_dist(self, f: ChannelMap, g: ChannelMap) -> float:
        return f.unit().dist(g.unit())

    def is_zero_unit(self, f: ChannelMap) -> bool:
        return f.unit().norm() <= DEFAULT.law

    def coproduct(self, a: BlockSignature, b: BlockSignature) -> Coproduct:
        return coproduct(a, b)

    def sample_map(self, rng: np.random.Generator, a: BlockSignature, b: BlockSignature) -> ChannelMap:
        return random_channel(rng, a, b)

    def sample_partition(self, rng: np.random.Generator, a: BlockSignature,
                         b: BlockSignature, k: int = 2) -> tuple[ChannelMap, ...]:
        """k maps whose sum is defined: random maps scaled by Dirichlet weights."""
        weights = rng.dirichlet(np.ones(k))
        return tuple(scale_map(random_channel(rng, a, b), float(w)) for w in weights)


class SetBackend:
    name = "set"

    def identity(self, a: int) -> PartialFunctionMap:
        return set_identity(a)

    def zero(self, a: int, b: int) -> PartialFunctionMap:
        return set_zero(a, b)

    def compose(self, g: PartialFunctionMap, f: PartialFunctionMap) -> PartialFunctionMap:
        return set_compose(g, f)

    def ovee(self, f: PartialFunctionMap, g: PartialFunctionMap) -> PartialFunctionMap | None:
        return None if f.domain() & g.domain() else set_ovee(f, g)

    def dist(self, f: PartialFunctionMap, g: PartialFunctionMap) -> float:
        return 0.0 if f == g else 1.0

    def unit(self, f: PartialFunctionMap) -> frozenset[int]:
        return f.domain()

    def unit_dist(self, f: PartialFunctionMap, g: PartialFunctionMap) -> float:
        return 0.0 if f.domain() == g.domain() else 1.0

    def is_zero_unit(self, f: PartialFunctionMap) -> bool:
        return not f.domain()

    def coproduct(self, a: int, b: int) -> Coproduct:
        return set_coproduct(a, b)

    def sample_map(self, rng: np.random.Generator, a: int, b: int) -> PartialFunctionMap:
        return random_partial_function(rng, a, b)

    def sample_partition(self, rng: np.random.Generator, a: int, b: int,
                         k: int = 2) -> tuple[PartialFunctionMap, ...]:
        """k partial functions with pairwise disjoint domains."""
        f = random_partial_function(rng, a, b, total=True)
        side = rng.integers(k, size=a)
        return tuple(PartialFunctionMap(a, b, tuple(y if s == j else None for y, s in zip(f.graph, side)))
                     for j in range(k))


@dataclass(frozen=True)
class ProductObject:
    set_part: int
    matrix_part: BlockSignature

    def __str__(self) -> str:
        return f"({self.set_part},{self.matrix_part})"


@dataclass(frozen=True)
class ProductMap:
    set_part: PartialFunctionMap
    matrix_part: ChannelMap

    @property
    def source(self) -> ProductObject:
        return ProductObject(self.set_part.source, self.matrix_part.source)

    @property
    def target(self) -> ProductObject:
        return ProductObject(self.set_part.target, self.matrix_part.target)


class ProductBackend:
    """Componentwise effectus on pairs (finite set, block signature)."""

    name = "product"

    def __init__(self) -> None:
        self.left = SetBackend()
        self.right = MatrixBackend()

    def obj(self, n: int, dims: Iterable[int]) -> ProductObject:
        return ProductObject(n, BlockSignature.of(dims))

    def identity(self, a: ProductObject) -> ProductMap:
        return ProductMap(set_identity(a.set_part), identity_map(a.matrix_part))

    def zero(self, a: ProductObject, b: ProductObject) -> ProductMap:
        return ProductMap(set_zero(a.set_part, b.set_part), zero_map(a.matrix_part, b.matrix_part))

    def compose(self, g: ProductMap, f: ProductMap) -> ProductMap:
        return ProductMap(set_compose(g.set_part, f.set_part), compose(g.matrix_part, f.matrix_part))

    def ovee(self, f: ProductMap, g: ProductMap) -> ProductMap | None:
        s = self.left.ovee(f.set_part, g.set_part)
        m = self.right.ovee(f.matrix_part, g.matrix_part)
        return None if s is None or m is None else ProductMap(s, m)

    def dist(self, f: ProductMap, g: ProductMap) -> float:
        return max(self.left.dist(f.set_part, g.set_part), self.right.dist(f.matrix_part, g.matrix_part))

    def unit(self, f: ProductMap) -> tuple[frozenset[int], SelfAdjoint]:
        return f.set_part.domain(), f.matrix_part.unit()

    def unit_dist(self, f: ProductMap, g: ProductMap) -> float:
        return max(self.left.unit_dist(f.set_part, g.set_part),
                   self.right.unit_dist(f.matrix_part, g.matrix_part))

    def is_zero_unit(self, f: ProductMap) -> bool:
        return self.left.is_zero_unit(f.set_part) and self.right.is_zero_unit(f.matrix_part)

    def coproduct(self, a: ProductObject, b: ProductObject) -> Coproduct:
        cs = set_coproduct(a.set_part, b.set_part)
        cm = coproduct(a.matrix_part, b.matrix_part)
        return Coproduct(ProductObject(cs.obj, cm.obj),
                         tuple(ProductMap(x, y) for x, y in zip(cs.kappa, cm.kappa)),  # type: ignore[arg-type]
                         tuple(ProductMap(x, y) for x, y in zip(cs.proj, cm.proj)))  # type: ignore[arg-type]

    def sample_map(self, rng: np.random.Generator, a: ProductObject, b: ProductObject) -> ProductMap:
        return ProductMap(random_partial_function(rng, a.set_part, b.set_part),
                          random_channel(rng, a.matrix_part, b.matrix_part))

    def sample_partition(self, rng: np.random.Generator, a: ProductObject,
                         b: ProductObject, k: int = 2) -> tuple[ProductMap, ...]:
        ss = self.left.sample_partition(rng, a.set_part, b.set_part, k)
        ms = self.right.sample_partition(rng, a.matrix_part, b.matrix_part, k)
        return tuple(ProductMap(x, y) for x, y in zip(ss, ms))

    def cotuple(self, f: ProductMap, g: ProductMap) -> ProductMap:
        if f.set_part.target != g.set_part.target:
            raise SignatureMismatch("cotupled maps need a common target")
        graph = f.set_part.graph + g.set_part.graph
        s = PartialFunctionMap(f.set_part.source + g.set_part.source, f.set_part.target, graph)
        return ProductMap(s, cotuple_maps(f.matrix_part, g.matrix_part))

    def tuple(self, f: ProductMap, g: ProductMap) -> ProductMap:
        n1 = f.set_part.target
        if f.set_part.domain() & g.set_part.domain():
            raise NotSummable("set components of a tupled pair must have disjoint domains")
        graph = tuple(a if a is not None else (None if b is None else n1 + b)
                      for a, b in zip(f.set_part.graph, g.set_part.graph))
        s = PartialFunctionMap(f.set_part.source, n1 + g.set_part.target, graph)
        return ProductMap(s, tuple_maps(f.matrix_part, g.matrix_part))

    def sum(self, f: ProductMap, g: ProductMap) -> ProductMap:
        """f + g between coproducts."""
        n1, m1 = f.set_part.source, f.set_part.target
        graph = f.set_part.graph + tuple(None if y is None else m1 + y for y in g.set_part.graph)
        s = PartialFunctionMap(n1 + g.set_part.source, m1 + g.set_part.target, graph)
        return ProductMap(s, sum_maps(f.matrix_part, g.matrix_part))


Backend = MatrixBackend | SetBackend | ProductBackend


def backend(name: str) -> Backend:
    if name == "matrix":
        return MatrixBackend()
    if name == "set":
        return SetBackend()
    if name == "product":
        return ProductBackend()
    raise ValueError(f"unknown backend {name!r}")


# -- scalars ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarDescriptor:
    backend: str
    kind: str  # "boolean", "interval" or "boolean x interval"
    table: ec.EffectTable | None
    idempotents: tuple[Any, ...]
    irreducible: bool


def find_idempotent_scalars(b: Backend, grid: int = 1000) -> tuple[Any, ...]:
    """Scalars s with s o s = s, found by composing the backend's own maps.

    The set backend has two scalars (identity and empty). For the interval
    the search composes the maps with Kraus sqrt(x) on a grid containing the
    endpoints and keeps the exact fixed points.
    """
    if isinstance(b, SetBackend):
        cands = [PartialFunctionMap(1, 1, (0,)), PartialFunctionMap(1, 1, (None,))]
        return tuple(sorted(int(bool(s.domain())) for s in cands if set_compose(s, s) == s))
    if isinstance(b, MatrixBackend):
        out = []
        for k in range(grid + 1):
            x = k / grid
            s = scalar_map(x)
            if abs(scalar_value(compose(s, s)) - x) <= 1e-12:
                out.append(x)
        return tuple(out)
    left = find_idempotent_scalars(b.left)
    right = find_idempotent_scalars(b.right, grid)
    return tuple(itertools.product(left, right))


def scalar_monoid(b: Backend) -> ScalarDescriptor:
    if isinstance(b, SetBackend):
        t = ec.powerset_table(1)
        t = ec.EffectTable(("0", "1"), 0, 1, t.ovee, t.perp, t.product)
        return ScalarDescriptor("set", "boolean", t, find_idempotent_scalars(b), True)
    if isinstance(b, MatrixBackend):
        return ScalarDescriptor("matrix", "interval", None, find_idempotent_scalars(b), True)
    idem = find_idempotent_scalars(b)
    return ScalarDescriptor("product", "boolean x interval", None, idem, len(idem) <= 2)


# -- splitting along an idempotent scalar ----------------------------------------

@dataclass
class Splitting:
    """Product backend split along the idempotent scalar ``s = (s_set, s_matrix)``.

    ``to_factors`` is the functor G, ``from_factors`` the functor F, and
    ``alpha(A): F(G(A)) -> A`` the comparison isomorphism.
    """

    prod: ProductBackend
    s: tuple[int, float]
    factors: tuple[Backend, Backend]
    swapped: bool

    def _parts(self, a: ProductObject) -> tuple[tuple[ProductMap, ProductMap], tuple[ProductMap, ProductMap]]:
        """(pi, xi) for s.1_A and for its complement."""
        from .diamond import comprehension, filter_map

        out = []
        for bit, val in (self.s, (1 - self.s[0], 1.0 - self.s[1])):
            subset = range(a.set_part) if bit else ()
            p_set, x_set = set_comprehension(a.set_part, subset)
            q = val * identity(a.matrix_part)
            p_mat = comprehension(MatrixEffect.of(q)).map
            x_mat = filter_map(MatrixEffect.of(q)).map
            out.append((ProductMap(p_set, p_mat), ProductMap(x_set, x_mat)))
        return out[0], out[1]

    def carrier(self, a: ProductObject) -> tuple[ProductObject, ProductObject]:
        (pi1, _), (pi2, _) = self._parts(a)
        return pi1.source, pi2.source

    def to_factors(self, f: ProductMap) -> tuple[ProductMap, ProductMap]:
        (pa1, _), (pa2, _) = self._parts(f.source)
        (_, xb1), (_, xb2) = self._parts(f.target)
        c = self.prod.compose
        return c(xb1, c(f, pa1)), c(xb2, c(f, pa2))

    def from_factors(self, f1: ProductMap, f2: ProductMap) -> ProductMap:
        return self.prod.sum(f1, f2)

    def alpha(self, a: ProductObject) -> ProductMap:
        (pi1, _), (pi2, _) = self._parts(a)
        return self.prod.cotuple(pi1, pi2)

    def alpha_inv(self, a: ProductObject) -> ProductMap:
        (_, xi1), (_, xi2) = self._parts(a)
        return self.prod.tuple(xi1, xi2)

    def embed(self, f: ProductMap) -> Any:
        """Identify a factor morphism with a morphism of the plain backend."""
        side = f.set_part if (self.s[0] == 1) != self.swapped else f.matrix_part
        return side

    def verify(self, trials: int, seed: int, tol: float = 1e-9,
               objects: Sequence[ProductObject] | None = None) -> list[LawReport]:
        rng = law_rng(seed, "split.roundtrip")
        prod = self.prod
        if objects is None:
            objects = [prod.obj(1, [1]), prod.obj(2, [2]), prod.obj(3, [2, 1]), prod.obj(0, [3]),
                       prod.obj(2, [])]
        inst = f"s={self.s} trials={trials}"
        iso = Residual(tol)
        fg = Residual(tol)
        gf = Residual(tol)
        func = Residual(tol)
        preds = Residual(tol)
        for a in objects:
            al, ali = self.alpha(a), self.alpha_inv(a)
            iso.add(prod.dist(prod.compose(al, ali), prod.identity(a)), {"object": str(a), "side": "alpha o alpha^-1"})
            fga = prod.identity(al.source)
            iso.add(prod.dist(prod.compose(ali, al), fga), {"object": str(a), "side": "alpha^-1 o alpha"})
            g1, g2 = self.to_factors(prod.identity(a))
            c1, c2 = self.carrier(a)
            func.add(max(prod.dist(g1, prod.identity(c1)), prod.dist(g2, prod.identity(c2))),
                     {"object": str(a), "law": "G(id) = id"})
        for k in range(trials):
            a, b, c = (objects[int(rng.integers(len(objects)))] for _ in range(3))
            f = prod.sample_map(rng, a, b)
            g = prod.sample_map(rng, b, c)
            f1, f2 = self.to_factors(f)
            back = prod.compose(self.alpha(b), prod.compose(self.from_factors(f1, f2), self.alpha_inv(a)))
            fg.add(prod.dist(back, f), {"trial": k, "source": str(a), "target": str(b)})
            h1, h2 = self.to_factors(self.from_factors(f1, f2))
            gf.add(max(prod.dist(h1, f1), prod.dist(h2, f2)), {"trial": k})
            gc1, gc2 = self.to_factors(prod.compose(g, f))
            g1, g2 = self.to_factors(g)
            func.add(max(prod.dist(gc1, prod.compose(g1, f1)), prod.dist(gc2, prod.compose(g2, f2))),
                     {"trial": k, "law": "G(g o f) = G(g) o G(f)"})
            # predicates: p = s.p + s'.p, and the split preserves sums
            p = ProductMap(random_partial_function(rng, a.set_part, 1),
                           predicate_map(random_effect(rng, a.matrix_part)) if a.matrix_part.dims
                           else zero_map(a.matrix_part, [1]))
            sp, tp = self._scaled_pred(p, self.s), self._scaled_pred(p, (1 - self.s[0], 1 - self.s[1]))
            total = prod.ovee(sp, tp)
            preds.add(1.0 if total is None else prod.dist(total, p), {"trial": k, "object": str(a)})
        return [
            iso.report("split.alpha_iso", inst, note="alpha = [pi_s, pi_s'] is invertible"),
            fg.report("split.roundtrip_fg", inst, note="alpha o F(G(f)) o alpha^-1 = f"),
            gf.report("split.roundtrip_gf", inst, note="G(F(f1, f2)) = (f1, f2)"),
            func.report("split.functor", inst, note="G preserves identities and composition"),
            preds.report("split.predicates", inst, note="p = s.p + s'.p"),
        ]

    def _scaled_pred(self, p: ProductMap, s: tuple[int, float]) -> ProductMap:
        set_part = p.set_part if s[0] else set_zero(p.set_part.source, 1)
        return ProductMap(set_part, scale_map(p.matrix_part, s[1]))


def split_by_scalar(prod: ProductBackend, s: tuple[int, float]) -> Splitting:
    bit, val = int(s[0]), float(s[1])
    if bit not in (0, 1) or val not in (0.0, 1.0):
        raise ec.NotIdempotent(f"scalar {s} is not idempotent")
    if bit == int(val):
        raise TrivialScalar(f"scalar {s} is 0 or 1")
    swapped = bit == 0
    factors: tuple[Backend, Backend] = (prod.left, prod.right) if not swapped else (prod.right, prod.left)
    return Splitting(prod, (bit, val), factors, swapped)


# -- predicate-space decomposition ------------------------------------------------

@dataclass(frozen=True)
class PredDecomposition:
    boolean_table: ec.EffectTable
    boolean_report: LawReport
    convex_report: LawReport


def convex_action_report(sig: BlockSignature, trials: int, seed: int,
                         tol: float = DEFAULT.law) -> LawReport:
    """Check the four scalar-action laws on effects of ``sig``."""
    rng = law_rng(seed, "convex.action")
    res = Residual(tol)
    if not sig.dims:
        return res.report("convex.action", f"{sig} trials={trials}")
    for k in range(trials):
        x = random_effect(rng, sig)
        lam, mu = rng.random(2)
        res.add((lam * (mu * x)).dist((lam * mu) * x), {"law": "l(mx) = (lm)x", "trial": k})
        if lam + mu <= 1:
            s = lam * x + mu * x
            res.add(max(0.0, s.max_eig() - 1.0), {"law": "lx, mx summable", "trial": k})
            res.add(s.dist((lam + mu) * x), {"law": "lx + mx = (l+m)x", "trial": k})
        res.add((1.0 * x).dist(x), {"law": "1x = x", "trial": k})
        y, z = random_effect(rng, sig), random_effect(rng, sig)
        y = MatrixEffect.of(0.5 * y)
        z = MatrixEffect.of(0.5 * z)
        res.add((lam * (y + z)).dist(lam * y + lam * z), {"law": "l(x+y) = lx + ly", "trial": k})
    return res.report("convex.action", f"{sig} trials={trials}")


def decompose_pred_space(obj: ProductObject, trials: int = 100, seed: int = 0) -> PredDecomposition:
    if obj.set_part > 4:
        raise ec.BudgetExceeded("Boolean component limited to sets of size <= 4")
    table = ec.powerset_table(obj.set_part)
    mon = ec.check_effect_monoid(table)
    witness = ec.boolean_witness(table)
    passed = mon.passed and witness is None
    boolean = LawReport("split.boolean_component", f"P({obj.set_part})", passed,
                        0.0 if passed else 1.0, None if passed else (mon.counterexample or witness),
                        {"size": table.size})
    return PredDecomposition(table, boolean, convex_action_report(obj.matrix_part, trials, seed))


# -- separation and tomography ----------------------------------------------------------

def basis_effects(sig: BlockSignature) -> list[MatrixEffect]:
    """Rank-one effects |v><v| with v in {e_k, (e_k+e_l)/sqrt2, (e_k+i e_l)/sqrt2}, per block."""
    out = []
    for i, d in enumerate(sig.dims):
        vecs = [np.eye(d)[k] for k in range(d)]
        for k, l in itertools.combinations(range(d), 2):
            vecs.append((np.eye(d)[k] + np.eye(d)[l]) / np.sqrt(2))
            vecs.append((np.eye(d)[k] + 1j * np.eye(d)[l]) / np.sqrt(2))
        for v in vecs:
            blocks = [np.zeros((e, e), complex) for e in sig.dims]
            blocks[i] = np.outer(v, v.conj())
            out.append(MatrixEffect(blocks))
    return out


def span_rank(elems: Sequence[SelfAdjoint]) -> int:
    from .jordan_matrix import vectorize

    if not elems:
        return 0
    return int(np.linalg.matrix_rank(np.column_stack([vectorize(e) for e in elems]), tol=1e-10))


def check_separation(obj: Any, by: str, trials: int, seed: int,
                     tol: Tolerances = DEFAULT) -> LawReport:
    """Separation by states or predicates.

    Matrix objects are certified by a spanning family of rank-one effects
    (as predicates) or their normalised densities (as states), then sampled
    distinct pairs are checked to be told apart by the family.
    """
    if by not in ("states", "predicates"):
        raise ValueError("by must be 'states' or 'predicates'")
    rng = law_rng(seed, f"separation.{by}")
    law = f"separation.{by}"
    if isinstance(obj, int):
        res = Residual(0.5)
        for k in range(trials):
            f = random_partial_function(rng, 2, obj) if by == "predicates" else random_partial_function(rng, obj, 2)
            g = random_partial_function(rng, 2, obj) if by == "predicates" else random_partial_function(rng, obj, 2)
            if f == g:
                continue
            if by == "predicates":
                told = any(f.pred({x}) != g.pred({x}) for x in range(obj))
            else:
                told = any(f.graph[x] != g.graph[x] for x in range(obj))
            res.flag(told, {"trial": k})
        return res.report(law, f"set {obj}", certificate=f"{obj} singletons / points")
    sig = BlockSignature.of(obj)
    family = basis_effects(sig)
    rank = span_rank(family)
    res = Residual(tol.law)
    res.flag(rank == sig.real_dim, {"rank": rank, "needed": sig.real_dim})
    probe = BlockSignature((2,))
    for k in range(trials):
        if by == "predicates":
            f, g = random_channel(rng, probe, sig), random_channel(rng, probe, sig)
            gap = max(f.heisenberg(p).dist(g.heisenberg(p)) for p in family)
        else:
            f, g = random_channel(rng, sig, probe), random_channel(rng, sig, probe)
            states = [MatrixEffect.of(p) for p in family]
            gap = max(f.schrodinger(w).dist(g.schrodinger(w)) for w in states)
        if choi_distance(f, g) > 1e-6:
            res.flag(gap > 1e-9, {"trial": k})
    return res.report(law, f"matrix {sig}", certificate={"family_size": len(family), "span_rank": rank})


def finite_tomography_check(b: Backend, k: int, objects: Sequence[Any] | None = None) -> LawReport:
    """Find separating predicate families of size <= k and report the scalar shape."""
    rows = []
    ok = True
    if isinstance(b, SetBackend):
        objects = objects or [1, 2, 3, 4]
        for n in objects:
            size = n
            rows.append({"object": n, "family": size, "separating": True})
            ok &= size <= k
        shape = {"boolean_atoms": 1, "interval_copies": 0}
    elif isinstance(b, MatrixBackend):
        objects = objects or [[1], [2], [3], [2, 2]]
        for dims in objects:
            sig = BlockSignature.of(dims)
            fam = basis_effects(sig)
            sep = span_rank(fam) == sig.real_dim
            rows.append({"object": list(sig.dims), "family": len(fam), "separating": sep})
            ok &= sep and len(fam) <= k
        shape = {"boolean_atoms": 0, "interval_copies": 1}
    else:
        objects = objects or [(1, [1]), (2, [2])]
        for n, dims in objects:
            sig = BlockSignature.of(dims)
            fam = basis_effects(sig)
            sep = span_rank(fam) == sig.real_dim
            size = n + len(fam)
            rows.append({"object": [n, list(sig.dims)], "family": size, "separating": sep})
            ok &= sep and size <= k
        shape = {"boolean_atoms": 1, "interval_copies": 1}
    return LawReport("tomography.finite", f"{b.name} k={k}", ok, 0.0 if ok else 1.0,
                     None if ok else {"objects": rows}, {"objects": rows, "scalar_shape": shape})


# -- effectus law suite ----------------------------------------------------------------------

def _objects_for(b: Backend) -> list[Any]:
    if isinstance(b, SetBackend):
        return [1, 2, 3]
    if isinstance(b, MatrixBackend):
        return [BlockSignature((2,)), BlockSignature((1, 2)), BlockSignature((3,))]
    return [ProductObject(1, BlockSignature((2,))), ProductObject(2, BlockSignature((1, 2)))]


def run_effectus_laws(b: Backend, trials: int, seed: int, tol: float | None = None,
                      objects: Sequence[Any] | None = None) -> list[LawReport]:
    """Hom-set PCM, enrichment, coproduct and predicate-functor laws on sampled maps."""
    tol = DEFAULT.law if tol is None else tol
    objs = list(objects) if objects is not None else _objects_for(b)
    inst = f"{b.name} trials={trials}"
    pick_rng = law_rng(seed, "effectus")

    def pick() -> Any:
        return objs[int(pick_rng.integers(len(objs)))]

    pcm, bi, eff, cop, unt = (Residual(tol) for _ in range(5))
    for k in range(trials):
        a, c, d = pick(), pick(), pick()
        f, g, r = b.sample_partition(pick_rng, a, c, 3)
        fg = b.ovee(f, g)
        pcm.flag(fg is not None, {"trial": k, "law": "constructed pair summable"})
        if fg is None:
            continue
        pcm.add(b.dist(fg, b.ovee(g, f)), {"trial": k, "law": "commutative"})
        pcm.add(b.dist(b.ovee(f, b.zero(a, c)), f), {"trial": k, "law": "zero unit"})
        gr = b.ovee(g, r)
        left, right = b.ovee(fg, r), (None if gr is None else b.ovee(f, gr))
        pcm.add(1.0 if left is None or right is None else b.dist(left, right),
                {"trial": k, "law": "associative"})
        h = b.sample_map(pick_rng, c, d)
        e = b.sample_map(pick_rng, d, a)
        post = b.ovee(b.compose(h, f), b.compose(h, g))
        bi.add(1.0 if post is None else b.dist(b.compose(h, fg), post), {"trial": k, "side": "post"})
        pre = b.ovee(b.compose(f, e), b.compose(g, e))
        bi.add(1.0 if pre is None else b.dist(b.compose(fg, e), pre), {"trial": k, "side": "pre"})
        # 1 o f = 0 implies f = 0, on a map scaled to zero and on the sample
        for m in (f, b.compose(b.zero(c, c), f)):
            if b.is_zero_unit(m):
                eff.add(b.dist(m, b.zero(a, c)), {"trial": k, "law": "1 o f = 0 => f = 0"})
        # coproduct structure
        cp = b.coproduct(a, c)
        k1, k2 = cp.kappa
        p1, p2 = cp.proj
        cop.add(b.dist(b.compose(p1, k1), b.identity(a)), {"trial": k, "law": "p1 k1 = id"})
        cop.add(b.dist(b.compose(p2, k2), b.identity(c)), {"trial": k, "law": "p2 k2 = id"})
        cop.add(b.dist(b.compose(p1, k2), b.zero(c, a)), {"trial": k, "law": "p1 k2 = 0"})
        cop.add(b.dist(b.compose(p2, k1), b.zero(a, c)), {"trial": k, "law": "p2 k1 = 0"})
        # untying: f, g summable into A implies k1 f, k2 g summable into A + A
        cpa = b.coproduct(c, c)
        ku = b.ovee(b.compose(cpa.kappa[0], f), b.compose(cpa.kappa[1], g))
        unt.flag(ku is not None, {"trial": k})
    reports = [
        pcm.report("effectus.pcm", inst),
        bi.report("effectus.biadditive", inst),
        eff.report("effectus.zero_reflect", inst),
        cop.report("effectus.coproduct", inst),
        unt.report("effectus.untying", inst),
    ]
    if isinstance(b, MatrixBackend):
        reports.extend(_matrix_only_laws(trials, seed, tol, objs))
    return reports


def _matrix_only_laws(trials: int, seed: int, tol: float, objs: Sequence[BlockSignature]) -> list[LawReport]:
    rng = law_rng(seed, "effectus.matrix")
    inst = f"matrix trials={trials}"
    pred, tup, img, summ = (Residual(tol) for _ in range(4))
    for k in range(trials):
        a, c, d = (objs[int(rng.integers(len(objs)))] for _ in range(3))
        f = random_channel(rng, a, c)
        g = random_channel(rng, c, d)
        p = random_effect(rng, d)
        # Pred(g o f) = Pred(f) o Pred(g)
        pred.add(compose(g, f).heisenberg(p).dist(f.heisenberg(g.heisenberg(p))), {"trial": k})
        # tupling a compatible pair
        f1 = random_channel(rng, a, c)
        f2 = random_channel(rng, a, d)
        lam = rng.uniform(0.1, 0.9)
        f1, f2 = scale_map(f1, lam), scale_map(f2, 1 - lam)
        t = tuple_maps(f1, f2)
        cp = coproduct(c, d)
        tup.add(max(choi_distance(compose(cp.proj[0], t), f1), choi_distance(compose(cp.proj[1], t), f2)),
                {"trial": k})
        # images: im f o f = 1 o f, minimality, composition
        im = image(f)
        img.add(f.heisenberg(im).dist(f.unit()), {"trial": k, "law": "im(f) o f = 1 o f"})
        # minimality: removing any direction from im(f) loses 1 o f
        isos = support_isometries(im)
        blocks = [i for i, v in enumerate(isos) if v.shape[1]]
        if blocks:
            i = blocks[int(rng.integers(len(blocks)))]
            v = isos[i] @ (rng.standard_normal(isos[i].shape[1]) + 1j * rng.standard_normal(isos[i].shape[1]))
            v = v / np.linalg.norm(v)
            smaller = [x.copy() for x in im.blocks]
            smaller[i] = smaller[i] - np.outer(v, v.conj())
            lost = f.heisenberg(SelfAdjoint._trusted(smaller)).dist(f.unit())
            img.flag(lost > tol, {"trial": k, "law": "im(f) minimal"})
        img.add(max(0.0, -(image(g) - image(compose(g, f))).min_eig()), {"trial": k, "law": "im(g f) <= im g"})
        u = random_unitary_map(rng, c)
        img.add(image(compose(g, u)).dist(image(g)), {"trial": k, "law": "im(g u) = im g"})
        # 1 o f + 1 o g <= 1 decides summability exactly
        h = random_channel(rng, a, c)
        sums = (f.unit() + h.unit()).max_eig()
        summ.flag(summable(f, h) == (sums <= 1 + DEFAULT.psd), {"trial": k})
    return [
        pred.report("effectus.pred_functor", inst),
        tup.report("effectus.tupling", inst),
        img.report("effectus.image", inst),
        summ.report("effectus.summable_units", inst),
    ]
