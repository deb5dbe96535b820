"""Finite effect algebras, effect monoids and sequential effect algebras as tables.

Elements are stored by index; ``None`` marks an undefined partial sum. All
structures are immutable, so checks and enumeration are pure functions.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Sequence

from .reports import LawReport

EFFECT_TABLE_SCHEMA = "effectus-lab/effect-table/1"
MAX_ENUMERATION_SIZE = 6

Table = tuple[tuple[int | None, ...], ...]


class MalformedTable(ValueError):
    pass


class MissingProductTable(ValueError):
    pass


class NotIdempotent(ValueError):
    pass


class BudgetExceeded(ValueError):
    pass


@dataclass(frozen=True)
class EffectTable:
    names: tuple[str, ...]
    zero: int
    one: int
    ovee: Table
    perp: tuple[int, ...]
    product: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self) -> None:
        n = len(self.names)
        if n == 0:
            raise MalformedTable("table has no elements")
        if len(set(self.names)) != n:
            raise MalformedTable("duplicate element names")
        for label, idx in (("zero", self.zero), ("one", self.one)):
            if not 0 <= idx < n:
                raise MalformedTable(f"{label} index {idx} out of range")
        if len(self.ovee) != n or any(len(row) != n for row in self.ovee):
            raise MalformedTable("ovee table must be n x n")
        for row in self.ovee:
            for z in row:
                if z is not None and not 0 <= z < n:
                    raise MalformedTable(f"dangling element index {z} in ovee")
        if len(self.perp) != n:
            raise MalformedTable("orthosupplement must be total")
        for z in self.perp:
            if not 0 <= z < n:
                raise MalformedTable(f"dangling element index {z} in orthosupplement")
        if self.product is not None:
            if len(self.product) != n or any(len(row) != n for row in self.product):
                raise MalformedTable("product table must be total n x n")
            for row in self.product:
                for z in row:
                    if z is None or not 0 <= z < n:
                        raise MalformedTable("product table must be total with valid entries")

    @property
    def size(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(name) from None

    def sum(self, x: int | None, y: int | None) -> int | None:
        if x is None or y is None:
            return None
        return self.ovee[x][y]

    def mul(self, x: int, y: int) -> int:
        if self.product is None:
            raise MissingProductTable("table has no product")
        return self.product[x][y]

    def with_product(self, product: Sequence[Sequence[int]] | None) -> "EffectTable":
        prod = None if product is None else tuple(tuple(r) for r in product)
        return EffectTable(self.names, self.zero, self.one, self.ovee, self.perp, prod)

    def describe(self) -> str:
        return f"table[{self.size}]:" + ",".join(self.names)

    # JSON ------------------------------------------------------------

    def to_json(self) -> dict[str, Any]:
        nm = self.names
        ovee = [[nm[x], nm[y], None if z is None else nm[z]]
                for x in range(self.size) for y in range(self.size)
                if (z := self.ovee[x][y]) is not None]
        out: dict[str, Any] = {
            "schema": EFFECT_TABLE_SCHEMA,
            "elements": list(nm),
            "zero": nm[self.zero],
            "one": nm[self.one],
            "ovee": ovee,
            "orthosupplement": {nm[x]: nm[self.perp[x]] for x in range(self.size)},
        }
        if self.product is not None:
            out["product"] = [[nm[x], nm[y], nm[self.product[x][y]]]
                              for x in range(self.size) for y in range(self.size)]
        return out

    @classmethod
    def from_json(cls, data: Any) -> "EffectTable":
        if not isinstance(data, dict):
            raise MalformedTable("effect table must be a JSON object")
        for key in ("elements", "zero", "one", "ovee", "orthosupplement"):
            if key not in data:
                raise MalformedTable(f"missing field {key!r}")
        names = data["elements"]
        if not isinstance(names, list) or not all(isinstance(x, str) for x in names):
            raise MalformedTable("elements must be a list of strings")
        idx = {name: i for i, name in enumerate(names)}

        def look(name: Any) -> int:
            if not isinstance(name, str) or name not in idx:
                raise MalformedTable(f"dangling element {name!r}")
            return idx[name]

        n = len(names)
        ovee: list[list[int | None]] = [[None] * n for _ in range(n)]
        seen: set[tuple[int, int]] = set()
        for entry in data["ovee"]:
            if not isinstance(entry, list) or len(entry) != 3:
                raise MalformedTable(f"bad ovee entry {entry!r}")
            x, y = look(entry[0]), look(entry[1])
            z = None if entry[2] is None else look(entry[2])
            if (x, y) in seen:
                raise MalformedTable(f"duplicate ovee entry for {entry[0]!r},{entry[1]!r}")
            seen.add((x, y))
            ovee[x][y] = z
        perp_raw = data["orthosupplement"]
        if not isinstance(perp_raw, dict):
            raise MalformedTable("orthosupplement must be an object")
        missing = [name for name in names if name not in perp_raw]
        if missing:
            raise MalformedTable(f"orthosupplement not total, missing {missing[0]!r}")
        perp = tuple(look(perp_raw[name]) for name in names)
        product = None
        if data.get("product") is not None:
            prod: list[list[int | None]] = [[None] * n for _ in range(n)]
            for entry in data["product"]:
                if not isinstance(entry, list) or len(entry) != 3:
                    raise MalformedTable(f"bad product entry {entry!r}")
                prod[look(entry[0])][look(entry[1])] = look(entry[2])
            if any(z is None for row in prod for z in row):
                raise MalformedTable("product table must be total")
            product = tuple(tuple(int(z) for z in row) for row in prod)  # type: ignore[arg-type]
        return cls(tuple(names), look(data["zero"]), look(data["one"]),
                   tuple(tuple(r) for r in ovee), perp, product)

    @classmethod
    def loads(cls, text: str) -> "EffectTable":
        return cls.from_json(json.loads(text))


def make_table(names: Sequence[str], zero: str, one: str,
               sums: Iterable[tuple[str, str, str]],
               perp: dict[str, str],
               product: Iterable[tuple[str, str, str]] | None = None,
               symmetric: bool = True) -> EffectTable:
    """Build a table from named entries; ``symmetric`` mirrors each sum."""
    idx = {x: i for i, x in enumerate(names)}
    n = len(names)
    ovee: list[list[int | None]] = [[None] * n for _ in range(n)]
    for x, y, z in sums:
        ovee[idx[x]][idx[y]] = idx[z]
        if symmetric:
            ovee[idx[y]][idx[x]] = idx[z]
    prod = None
    if product is not None:
        table = [[idx[zero]] * n for _ in range(n)]
        for x, y, z in product:
            table[idx[x]][idx[y]] = idx[z]
        prod = tuple(tuple(r) for r in table)
    return EffectTable(tuple(names), idx[zero], idx[one], tuple(tuple(r) for r in ovee),
                       tuple(idx[perp[x]] for x in names), prod)


# -- standard examples -------------------------------------------------------

def powerset_table(k: int, with_meet: bool = True) -> EffectTable:
    """Boolean algebra of subsets of {1..k}; sum = disjoint union, product = meet."""
    masks = list(range(1 << k))
    names = tuple("{" + ",".join(str(i + 1) for i in range(k) if m >> i & 1) + "}" for m in masks)
    full = (1 << k) - 1
    ovee = tuple(tuple(a | b if a & b == 0 else None for b in masks) for a in masks)
    perp = tuple(full ^ a for a in masks)
    prod = tuple(tuple(a & b for b in masks) for a in masks) if with_meet else None
    return EffectTable(names, 0, full, ovee, perp, prod)


def chain_table(n: int) -> EffectTable:
    """The n-element chain 0 < 1/(n-1) < ... < 1 with truncation-free sums."""
    top = n - 1
    names = tuple("0" if i == 0 else "1" if i == top else f"{i}/{top}" for i in range(n))
    ovee = tuple(tuple(a + b if a + b <= top else None for b in range(n)) for a in range(n))
    perp = tuple(top - a for a in range(n))
    return EffectTable(names, 0, top, ovee, perp)


def trivial_table() -> EffectTable:
    return EffectTable(("0",), 0, 0, ((0,),), (0,), ((0,),))


# -- order -------------------------------------------------------------------

@dataclass(frozen=True)
class OrderData:
    leq: tuple[tuple[bool, ...], ...]
    atoms: frozenset[int]
    idempotents: frozenset[int] | None


def leq_matrix(t: EffectTable) -> tuple[tuple[bool, ...], ...]:
    n = t.size
    return tuple(tuple(any(t.ovee[x][z] == y for z in range(n)) for y in range(n))
                 for x in range(n))


def order_data(t: EffectTable) -> OrderData:
    leq = leq_matrix(t)
    n = t.size
    nonzero = [x for x in range(n) if x != t.zero]
    atoms = frozenset(x for x in nonzero
                      if not any(leq[y][x] and y != x for y in nonzero))
    idem = None
    if t.product is not None:
        idem = frozenset(x for x in range(n) if t.product[x][x] == x)
    return OrderData(leq, atoms, idem)


def _glb(leq: Sequence[Sequence[bool]], x: int, y: int) -> int | None:
    lower = [z for z in range(len(leq)) if leq[z][x] and leq[z][y]]
    top = [z for z in lower if all(leq[w][z] for w in lower)]
    return top[0] if top else None


def _lub(leq: Sequence[Sequence[bool]], x: int, y: int) -> int | None:
    upper = [z for z in range(len(leq)) if leq[x][z] and leq[y][z]]
    bot = [z for z in upper if all(leq[z][w] for w in upper)]
    return bot[0] if bot else None


def meet_table(t: EffectTable) -> Table:
    leq = leq_matrix(t)
    return tuple(tuple(_glb(leq, x, y) for y in range(t.size)) for x in range(t.size))


def boolean_witness(t: EffectTable) -> dict[str, Any] | None:
    """None if t is a Boolean algebra whose sum is the disjoint join, else a witness."""
    nm = t.names
    leq = leq_matrix(t)
    n = t.size
    meet = [[_glb(leq, x, y) for y in range(n)] for x in range(n)]
    join = [[_lub(leq, x, y) for y in range(n)] for x in range(n)]
    for x, y in itertools.product(range(n), repeat=2):
        if meet[x][y] is None or join[x][y] is None:
            return {"property": "lattice", "witness": [nm[x], nm[y]]}
    for x in range(n):
        if meet[x][t.perp[x]] != t.zero or join[x][t.perp[x]] != t.one:
            return {"property": "complement", "witness": [nm[x]]}
    for x, y, z in itertools.product(range(n), repeat=3):
        lhs = meet[x][join[y][z]]  # type: ignore[index]
        rhs = join[meet[x][y]][meet[x][z]]  # type: ignore[index]
        if lhs != rhs:
            return {"property": "distributivity", "witness": [nm[x], nm[y], nm[z]]}
    for x, y in itertools.product(range(n), repeat=2):
        s = t.ovee[x][y]
        if (s is not None) != (meet[x][y] == t.zero):
            return {"property": "sum-iff-disjoint", "witness": [nm[x], nm[y]]}
        if s is not None and s != join[x][y]:
            return {"property": "sum-is-join", "witness": [nm[x], nm[y]]}
    return None


def is_boolean(t: EffectTable) -> bool:
    return boolean_witness(t) is None


# -- axiom checks --------------------------------------------------------------

def _fail(law: str, t: EffectTable, axiom: str, *witness: int, **extra: Any) -> LawReport:
    cex: dict[str, Any] = {"axiom": axiom, "witness": [t.names[w] for w in witness]}
    cex.update(extra)
    return LawReport(law, t.describe(), False, 1.0, cex)


def _ok(law: str, t: EffectTable, **details: Any) -> LawReport:
    return LawReport(law, t.describe(), True, 0.0, None, details)


def _ea_violation(t: EffectTable) -> tuple[str, tuple[int, ...]] | None:
    n = t.size
    s = t.sum
    for x, y in itertools.product(range(n), repeat=2):
        if t.ovee[x][y] != t.ovee[y][x]:
            return "commutativity", (x, y)
    for x in range(n):
        if t.ovee[t.zero][x] != x:
            return "zero-unit", (x,)
    for x, y, z in itertools.product(range(n), repeat=3):
        if s(s(x, y), z) != s(x, s(y, z)):
            return "associativity", (x, y, z)
    for x in range(n):
        partners = [y for y in range(n) if t.ovee[x][y] == t.one]
        if partners != [t.perp[x]]:
            return "unique-orthosupplement", (x,)
    for x in range(n):
        if x != t.zero and t.ovee[x][t.one] is not None:
            return "zero-one", (x,)
    return None


def check_effect_algebra(t: EffectTable) -> LawReport:
    bad = _ea_violation(t)
    if bad is not None:
        return _fail("table.effect_algebra", t, bad[0], *bad[1])
    return _ok("table.effect_algebra", t)


def check_orthoalgebra(t: EffectTable) -> LawReport:
    bad = _ea_violation(t)
    if bad is not None:
        return _fail("table.orthoalgebra", t, "effect-algebra:" + bad[0], *bad[1])
    for x in range(t.size):
        if x != t.zero and t.ovee[x][x] is not None:
            return _fail("table.orthoalgebra", t, "self-summable", x)
    return _ok("table.orthoalgebra", t)


def _monoid_violation(t: EffectTable) -> tuple[str, tuple[int, ...]] | None:
    n = t.size
    m = t.product
    assert m is not None
    for a in range(n):
        if m[a][t.one] != a or m[t.one][a] != a:
            return "unit", (a,)
    for b, c in itertools.product(range(n), repeat=2):
        bc = t.ovee[b][c]
        if bc is None:
            continue
        for a in range(n):
            left = t.ovee[m[a][b]][m[a][c]]
            if left is None or left != m[a][bc]:
                return "left-distributivity", (a, b, c)
            right = t.ovee[m[b][a]][m[c][a]]
            if right is None or right != m[bc][a]:
                return "right-distributivity", (b, c, a)
    for a, b, c in itertools.product(range(n), repeat=3):
        if m[a][m[b][c]] != m[m[a][b]][c]:
            return "associativity", (a, b, c)
    return None


def check_effect_monoid(t: EffectTable) -> LawReport:
    if t.product is None:
        raise MissingProductTable("effect monoid check needs a product table")
    bad = _ea_violation(t)
    if bad is not None:
        return _fail("table.effect_monoid", t, "effect-algebra:" + bad[0], *bad[1])
    bad = _monoid_violation(t)
    if bad is not None:
        return _fail("table.effect_monoid", t, bad[0], *bad[1])
    return _ok("table.effect_monoid", t)


@dataclass(frozen=True)
class Idempotents:
    elements: frozenset[str]
    irreducible: bool


def idempotents(t: EffectTable) -> Idempotents:
    if t.product is None:
        raise MissingProductTable("idempotents need a product table")
    idem = frozenset(t.names[x] for x in range(t.size) if t.product[x][x] == x)
    return Idempotents(idem, idem == {t.names[t.zero], t.names[t.one]})


def _sea_violation(t: EffectTable) -> tuple[str, tuple[int, ...]] | None:
    n = t.size
    m = t.product
    assert m is not None

    def commute(a: int, b: int) -> bool:
        return m[a][b] == m[b][a]

    for a, b, c in itertools.product(range(n), repeat=3):
        bc = t.ovee[b][c]
        if bc is None:
            continue
        s = t.ovee[m[a][b]][m[a][c]]
        if s is None or s != m[a][bc]:
            return "a:additivity", (a, b, c)
    for a in range(n):
        if m[t.one][a] != a:
            return "b:unit", (a,)
    for a, b in itertools.product(range(n), repeat=2):
        if m[a][b] == t.zero and m[b][a] != t.zero:
            return "c:zero-symmetry", (a, b)
    for a, b in itertools.product(range(n), repeat=2):
        if not commute(a, b):
            continue
        if not commute(a, t.perp[b]):
            return "d:commutes-with-complement", (a, b)
        for c in range(n):
            if m[a][m[b][c]] != m[m[a][b]][c]:
                return "d:associativity", (a, b, c)
    for c, a, b in itertools.product(range(n), repeat=3):
        if not (commute(c, a) and commute(c, b)):
            continue
        if not commute(c, m[a][b]):
            return "e:commutes-with-product", (c, a, b)
        ab = t.ovee[a][b]
        if ab is not None and not commute(c, ab):
            return "e:commutes-with-sum", (c, a, b)
    return None


def check_sea_table(t: EffectTable) -> LawReport:
    if t.product is None:
        raise MissingProductTable("sequential effect algebra check needs a product table")
    bad = _ea_violation(t)
    if bad is not None:
        return _fail("table.sea", t, "effect-algebra:" + bad[0], *bad[1])
    bad = _sea_violation(t)
    if bad is not None:
        return _fail("table.sea", t, bad[0], *bad[1])
    return _ok("table.sea", t)


# -- constructions ---------------------------------------------------------------

def direct_sum(t1: EffectTable, t2: EffectTable) -> EffectTable:
    n2 = t2.size
    pairs = list(itertools.product(range(t1.size), range(n2)))
    names = tuple(f"({t1.names[x]},{t2.names[y]})" for x, y in pairs)

    def enc(x: int, y: int) -> int:
        return x * n2 + y

    ovee = tuple(
        tuple(None if (a := t1.ovee[x1][x2]) is None or (b := t2.ovee[y1][y2]) is None
              else enc(a, b) for x2, y2 in pairs)
        for x1, y1 in pairs)
    perp = tuple(enc(t1.perp[x], t2.perp[y]) for x, y in pairs)
    prod = None
    if t1.product is not None and t2.product is not None:
        prod = tuple(tuple(enc(t1.product[x1][x2], t2.product[y1][y2]) for x2, y2 in pairs)
                     for x1, y1 in pairs)
    return EffectTable(names, enc(t1.zero, t2.zero), enc(t1.one, t2.one), ovee, perp, prod)


def relabel(t: EffectTable, order: Sequence[int]) -> EffectTable:
    """Table whose i-th element is the old element ``order[i]``."""
    new = {old: i for i, old in enumerate(order)}

    def f(x: int | None) -> int | None:
        return None if x is None else new[x]

    ovee = tuple(tuple(f(t.ovee[x][y]) for y in order) for x in order)
    perp = tuple(new[t.perp[x]] for x in order)
    prod = None
    if t.product is not None:
        prod = tuple(tuple(new[t.product[x][y]] for y in order) for x in order)
    return EffectTable(tuple(t.names[x] for x in order), new[t.zero], new[t.one],
                       ovee, perp, prod)


def _encode(t: EffectTable, order: Sequence[int], with_product: bool) -> tuple[int, ...]:
    new = {old: i for i, old in enumerate(order)}
    code = [-1 if (z := t.ovee[x][y]) is None else new[z] for x in order for y in order]
    code += [new[t.perp[x]] for x in order]
    if with_product and t.product is not None:
        code += [new[t.product[x][y]] for x in order for y in order]
    return tuple(code)


def _relabelings(t: EffectTable) -> Iterator[tuple[int, ...]]:
    rest = [x for x in range(t.size) if x not in (t.zero, t.one)]
    for perm in itertools.permutations(rest):
        if t.zero == t.one:
            yield (t.zero, *perm)
        else:
            yield (t.zero, *perm, t.one)


def canonical_key(t: EffectTable, with_product: bool = True) -> tuple[int, ...]:
    """Lexicographically least encoding over relabelings fixing 0 and 1."""
    return min(_encode(t, order, with_product) for order in _relabelings(t))


def canonical_form(t: EffectTable, with_product: bool = True) -> EffectTable:
    order = min(_relabelings(t), key=lambda o: _encode(t, o, with_product))
    return relabel(t, order)


def is_isomorphic(t1: EffectTable, t2: EffectTable, with_product: bool = True) -> bool:
    if t1.size != t2.size or (t1.zero == t1.one) != (t2.zero == t2.one):
        return False
    if with_product and (t1.product is None) != (t2.product is None):
        return False
    return canonical_key(t1, with_product) == canonical_key(t2, with_product)


@dataclass(frozen=True)
class CornerIsomorphism:
    corner: EffectTable
    complement: EffectTable
    mapping: dict[str, str]
    verified: bool
    failure: str | None = None


def _subtable(t: EffectTable, carrier: list[int], one: int) -> EffectTable:
    assert t.product is not None
    pos = {x: i for i, x in enumerate(carrier)}
    p = one

    def f(z: int | None) -> int | None:
        return None if z is None or z not in pos else pos[z]

    ovee = tuple(tuple(f(t.ovee[x][y]) for y in carrier) for x in carrier)
    perp = tuple(pos[t.product[p][t.perp[x]]] for x in carrier)
    prod = tuple(tuple(pos[t.product[x][y]] for y in carrier) for x in carrier)
    return EffectTable(tuple(t.names[x] for x in carrier), pos[t.zero], pos[p], ovee, perp, prod)


def corner(t: EffectTable, p: str | int) -> tuple[EffectTable, CornerIsomorphism]:
    if t.product is None:
        raise MissingProductTable("corners need a product table")
    pi = t.index(p) if isinstance(p, str) else p
    if t.product[pi][pi] != pi:
        raise NotIdempotent(f"{t.names[pi]} is not idempotent")
    qi = t.perp[pi]
    if t.product[qi][qi] != qi:
        raise NotIdempotent(f"complement of {t.names[pi]} is not idempotent")
    cp = _subtable(t, sorted({t.product[pi][a] for a in range(t.size)}), pi)
    cq = _subtable(t, sorted({t.product[qi][a] for a in range(t.size)}), qi)
    total = direct_sum(cp, cq)
    image = [cp.index(t.names[t.product[pi][a]]) * cq.size + cq.index(t.names[t.product[qi][a]])
             for a in range(t.size)]
    mapping = {t.names[a]: total.names[image[a]] for a in range(t.size)}
    failure = _iso_failure(t, total, image)
    return cp, CornerIsomorphism(cp, cq, mapping, failure is None, failure)


def _iso_failure(src: EffectTable, dst: EffectTable, f: list[int]) -> str | None:
    n = src.size
    if dst.size != n or len(set(f)) != n:
        return "not a bijection"
    if f[src.zero] != dst.zero or f[src.one] != dst.one:
        return "constants not preserved"
    for x, y in itertools.product(range(n), repeat=2):
        s = src.ovee[x][y]
        d = dst.ovee[f[x]][f[y]]
        if (s is None) != (d is None) or (s is not None and f[s] != d):
            return f"sum not preserved at {src.names[x]},{src.names[y]}"
        if src.product is not None and dst.product is not None:
            if f[src.product[x][y]] != dst.product[f[x]][f[y]]:
                return f"product not preserved at {src.names[x]},{src.names[y]}"
    for x in range(n):
        if f[src.perp[x]] != dst.perp[f[x]]:
            return f"orthosupplement not preserved at {src.names[x]}"
    return None


# -- enumeration ---------------------------------------------------------------

_UNSET = -2


def _middle_names(m: int) -> list[str]:
    return [chr(ord("a") + i) for i in range(m)]


def _involution_shapes(m: int) -> Iterator[list[int]]:
    """One involution of {0..m-1} per cycle type: pairs first, then fixed points."""
    for pairs in range(m // 2 + 1):
        inv = list(range(m))
        for k in range(pairs):
            inv[2 * k], inv[2 * k + 1] = 2 * k + 1, 2 * k
        yield inv


def enumerate_effect_algebras(size: int) -> list[EffectTable]:
    """All effect algebras with exactly ``size`` elements, up to isomorphism."""
    if size > MAX_ENUMERATION_SIZE:
        raise BudgetExceeded(f"size {size} exceeds the enumeration budget {MAX_ENUMERATION_SIZE}")
    if size < 1:
        return []
    if size == 1:
        return [EffectTable(("0",), 0, 0, ((0,),), (0,))]
    m = size - 2
    found: dict[tuple[int, ...], EffectTable] = {}
    names = ["0", *_middle_names(m), "1"]
    one = size - 1
    for inv in _involution_shapes(m):
        perp = [one] + [i + 1 for i in inv] + [0]
        for table in _ea_tables(size, perp):
            t = EffectTable(tuple(names), 0, one, table, tuple(perp))
            if _ea_violation(t) is None:
                key = canonical_key(t, with_product=False)
                found.setdefault(key, canonical_form(t, with_product=False))
    return [found[k] for k in sorted(found)]


def _ea_tables(n: int, perp: list[int]) -> Iterator[Table]:
    one = n - 1
    mids = list(range(1, one))
    T = [[_UNSET] * n for _ in range(n)]
    for x in range(n):
        T[0][x] = T[x][0] = x
    for x in mids:
        T[x][one] = T[one][x] = -1
        T[x][perp[x]] = one
    T[one][one] = -1
    free = [(x, y) for x in mids for y in mids if x <= y and y != perp[x]]

    def look(x: int, y: int) -> int:
        return T[x][y]

    def consistent() -> bool:
        for x in mids:
            row = [v for v in T[x] if v >= 0]
            if len(row) != len(set(row)):  # cancellation
                return False
        for x in mids:
            for y in mids:
                xy = T[x][y]
                if xy == _UNSET:
                    continue
                for z in mids:
                    yz = T[y][z]
                    if yz == _UNSET:
                        continue
                    left = -1 if xy == -1 else look(xy, z)
                    right = -1 if yz == -1 else look(x, yz)
                    if left == _UNSET or right == _UNSET:
                        continue
                    if left != right:
                        return False
        return True

    def rec(k: int) -> Iterator[Table]:
        if k == len(free):
            yield tuple(tuple(None if v < 0 else v for v in row) for row in T)
            return
        x, y = free[k]
        for v in [-1] + [z for z in mids if z not in (x, y)]:
            T[x][y] = T[y][x] = v
            if consistent():
                yield from rec(k + 1)
        T[x][y] = T[y][x] = _UNSET

    yield from rec(0)


def _ominus(t: EffectTable, a: int, b: int) -> int | None:
    """The unique z with b + z = a, if any."""
    for z in range(t.size):
        if t.ovee[b][z] == a:
            return z
    return None


def _product_candidates(t: EffectTable, sequential: bool) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Products with unit rows fixed, pruned by a·b ≤ a (and ≤ b for monoids)."""
    n = t.size
    leq = leq_matrix(t)
    mids = [x for x in range(n) if x not in (t.zero, t.one)]
    P = [[_UNSET] * n for _ in range(n)]
    for x in range(n):
        P[t.zero][x] = P[x][t.zero] = t.zero
        P[t.one][x] = x
        P[x][t.one] = x
    cells = [(a, b) for a in mids for b in mids]

    def assign(a: int, b: int, v: int, trail: list[tuple[int, int]]) -> bool:
        if P[a][b] != _UNSET:
            return P[a][b] == v
        P[a][b] = v
        trail.append((a, b))
        # a·b⊥ is forced by a = a·b + a·b⊥
        w = _ominus(t, a, v)
        if w is None:
            return False
        nb = t.perp[b]
        if P[a][nb] == _UNSET:
            P[a][nb] = w
            trail.append((a, nb))
        elif P[a][nb] != w:
            return False
        if not sequential:
            # right version: b = a·b + a⊥·b
            w2 = _ominus(t, b, v)
            if w2 is None:
                return False
            na = t.perp[a]
            if P[na][b] == _UNSET:
                P[na][b] = w2
                trail.append((na, b))
            elif P[na][b] != w2:
                return False
        return True

    def rec(k: int) -> Iterator[tuple[tuple[int, ...], ...]]:
        while k < len(cells) and P[cells[k][0]][cells[k][1]] != _UNSET:
            k += 1
        if k == len(cells):
            yield tuple(tuple(row) for row in P)
            return
        a, b = cells[k]
        for v in range(n):
            if not leq[v][a] or (not sequential and not leq[v][b]):
                continue
            trail: list[tuple[int, int]] = []
            if assign(a, b, v, trail):
                yield from rec(k + 1)
            for i, j in trail:
                P[i][j] = _UNSET

    yield from rec(0)


def effect_monoid_products(t: EffectTable) -> list[EffectTable]:
    """Every effect-monoid product on the effect algebra ``t``."""
    out = []
    for prod in _product_candidates(t, sequential=False):
        cand = t.with_product(prod)
        if _monoid_violation(cand) is None:
            out.append(cand)
    return out


def sea_products(t: EffectTable) -> list[EffectTable]:
    """Every sequential product on the effect algebra ``t``."""
    out = []
    for prod in _product_candidates(t, sequential=True):
        cand = t.with_product(prod)
        if _sea_violation(cand) is None:
            out.append(cand)
    return out


@dataclass(frozen=True)
class EnumeratedStructure:
    table: EffectTable
    boolean: bool
    algebra_key: tuple[int, ...]


def _dedupe(tables: Iterable[EffectTable]) -> list[EnumeratedStructure]:
    seen: dict[tuple[int, ...], EnumeratedStructure] = {}
    for cand in tables:
        key = canonical_key(cand, with_product=True)
        if key not in seen:
            seen[key] = EnumeratedStructure(canonical_form(cand, True), is_boolean(cand),
                                            canonical_key(cand, with_product=False))
    return [seen[k] for k in sorted(seen)]


def enumerate_effect_monoids(max_size: int) -> list[EnumeratedStructure]:
    if max_size > MAX_ENUMERATION_SIZE:
        raise BudgetExceeded(f"max_size {max_size} exceeds the enumeration budget "
                             f"{MAX_ENUMERATION_SIZE}")
    out: list[EnumeratedStructure] = []
    for size in range(1, max_size + 1):
        if size == 1:
            out.append(EnumeratedStructure(trivial_table(), True, (0, 0)))
            continue
        cands = (m for ea in enumerate_effect_algebras(size) for m in effect_monoid_products(ea))
        out.extend(_dedupe(cands))
    return out


def enumerate_sea_tables(max_size: int) -> list[EnumeratedStructure]:
    if max_size > MAX_ENUMERATION_SIZE:
        raise BudgetExceeded(f"max_size {max_size} exceeds the enumeration budget "
                             f"{MAX_ENUMERATION_SIZE}")
    out: list[EnumeratedStructure] = []
    for size in range(1, max_size + 1):
        if size == 1:
            out.append(EnumeratedStructure(trivial_table(), True, (0, 0)))
            continue
        cands = (s for ea in enumerate_effect_algebras(size) for s in sea_products(ea))
        out.extend(_dedupe(cands))
    return out


def enumeration_counts(structures: Sequence[EnumeratedStructure],
                       max_size: int) -> dict[str, dict[int, int]]:
    """Counts per size, up to monoid isomorphism and up to effect-algebra isomorphism."""
    by_monoid = {k: 0 for k in range(1, max_size + 1)}
    algebras: dict[int, set[tuple[int, ...]]] = {k: set() for k in range(1, max_size + 1)}
    for s in structures:
        by_monoid[s.table.size] += 1
        algebras[s.table.size].add(s.algebra_key)
    return {"monoid_iso": by_monoid,
            "algebra_iso": {k: len(v) for k, v in algebras.items()}}


def product_is_meet(t: EffectTable) -> bool:
    if t.product is None:
        raise MissingProductTable("no product to compare")
    return meet_table(t) == t.product
