import json

import pytest
from hypothesis import given, settings, strategies as st

from effectus_lab import effect_core as ec

import oracles


def chain3_with_perp(perp):
    c = ec.chain_table(3)
    return ec.EffectTable(c.names, c.zero, c.one, c.ovee, perp)


# -- effect algebras and orthoalgebras ----------------------------------------------

def test_powerset_is_effect_algebra_and_orthoalgebra():
    t = ec.powerset_table(2)
    assert ec.check_effect_algebra(t).passed
    assert ec.check_orthoalgebra(t).passed


def test_chain3_is_effect_algebra():
    assert ec.check_effect_algebra(ec.chain_table(3)).passed


def test_chain3_with_wrong_orthosupplement_fails_uniqueness():
    rep = ec.check_effect_algebra(chain3_with_perp((2, 2, 0)))
    assert not rep.passed
    assert rep.counterexample == {"axiom": "unique-orthosupplement", "witness": ["1/2"]}


def test_chain3_is_not_orthoalgebra():
    rep = ec.check_orthoalgebra(ec.chain_table(3))
    assert not rep.passed
    assert rep.counterexample["witness"] == ["1/2"]


def test_malformed_tables_are_rejected():
    with pytest.raises(ec.MalformedTable):
        ec.EffectTable((), 0, 0, (), ())
    with pytest.raises(ec.MalformedTable):
        ec.EffectTable(("0", "1"), 0, 1, ((0, 1), (1, 7)), (1, 0))
    with pytest.raises(ec.MalformedTable):
        ec.EffectTable(("0", "0"), 0, 1, ((0, 1), (1, None)), (1, 0))


# -- effect monoids -----------------------------------------------------------------

def test_boolean_with_meet_is_effect_monoid():
    assert ec.check_effect_monoid(ec.powerset_table(2)).passed


def test_chain3_idempotent_half_is_not_effect_monoid():
    t = ec.chain_table(3).with_product([[0, 0, 0], [0, 1, 1], [0, 1, 2]])
    rep = ec.check_effect_monoid(t)
    assert not rep.passed
    assert rep.counterexample["witness"] == ["1/2", "1/2", "1/2"]


def test_direct_sum_of_two_point_monoids():
    b = ec.powerset_table(1)
    s = ec.direct_sum(b, b)
    assert ec.check_effect_monoid(s).passed
    assert ec.is_isomorphic(s, ec.powerset_table(2))


def test_direct_sum_with_trivial_and_with_chain():
    c = ec.chain_table(3)
    assert ec.direct_sum(ec.trivial_table(), c).size == 3
    s = ec.direct_sum(c, ec.powerset_table(1))
    assert s.size == 6
    assert ec.check_effect_algebra(s).passed


def test_missing_product_raises():
    with pytest.raises(ec.MissingProductTable):
        ec.check_effect_monoid(ec.chain_table(3))


def test_idempotents():
    two = ec.idempotents(ec.powerset_table(1))
    assert two.elements == {"{}", "{1}"} and two.irreducible
    four = ec.idempotents(ec.powerset_table(2))
    assert len(four.elements) == 4 and not four.irreducible
    b = ec.powerset_table(1)
    assert len(ec.idempotents(ec.direct_sum(b, b)).elements) == 4


def test_corners():
    t = ec.powerset_table(2)
    top, _ = ec.corner(t, "{1,2}")
    assert ec.is_isomorphic(top, t)
    bottom, _ = ec.corner(t, "{}")
    assert bottom.size == 1
    atom, iso = ec.corner(t, "{1}")
    assert ec.is_isomorphic(atom, ec.powerset_table(1))
    assert iso.verified
    assert ec.is_isomorphic(ec.direct_sum(iso.corner, iso.complement), t)


def test_corner_requires_idempotent():
    t = ec.chain_table(3).with_product([[0, 0, 0], [0, 0, 1], [0, 1, 2]])
    with pytest.raises(ec.NotIdempotent):
        ec.corner(t, "1/2")


# -- sequential effect algebras ----------------------------------------------------

def test_boolean_meet_is_sea():
    assert ec.check_sea_table(ec.powerset_table(2)).passed


def test_sea_axiom_c_violation_is_reported():
    # a&b = 0 but b&a = a on the four-element Boolean algebra
    t = ec.powerset_table(2)
    prod = [list(r) for r in t.product]
    a, b = t.index("{1}"), t.index("{2}")
    prod[b][a] = a
    rep = ec.check_sea_table(t.with_product(prod))
    assert not rep.passed
    assert rep.counterexample is not None


def test_chain3_has_no_sequential_product():
    assert ec.sea_products(ec.chain_table(3)) == []
    assert ec.effect_monoid_products(ec.chain_table(3)) == []


# -- enumeration against the brute-force oracle ---------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_effect_algebra_count_matches_oracle(n):
    assert len(ec.enumerate_effect_algebras(n)) == oracles.count_effect_algebras(n)


def test_effect_algebra_counts_frozen():
    # frozen from the brute-force oracle (n <= 5) and the library search (n = 6)
    assert [len(ec.enumerate_effect_algebras(n)) for n in range(1, 7)] == [1, 1, 1, 3, 4, 10]


def test_effect_monoid_counts_match_oracle():
    lib = ec.enumeration_counts(ec.enumerate_effect_monoids(5), 5)["monoid_iso"]
    assert lib == {n: oracles.count_effect_monoids(n) for n in range(1, 6)}
    assert lib == {1: 1, 2: 1, 3: 0, 4: 1, 5: 0}


def test_enumerate_small_sizes():
    two = ec.enumerate_effect_monoids(2)
    assert [s.table.size for s in two] == [1, 2]
    four = [s for s in ec.enumerate_effect_monoids(4) if s.table.size == 4]
    assert len(four) == 1 and ec.is_isomorphic(four[0].table, ec.powerset_table(2))


def test_enumeration_budget():
    with pytest.raises(ec.BudgetExceeded):
        ec.enumerate_effect_monoids(7)
    with pytest.raises(ec.BudgetExceeded):
        ec.enumerate_sea_tables(7)


def test_enumerated_structures_are_boolean():
    for s in ec.enumerate_effect_monoids(5):
        assert s.boolean
        assert ec.check_effect_monoid(s.table).passed


# -- JSON ----------------------------------------------------------------------------

def test_json_round_trip():
    t = ec.powerset_table(2)
    back = ec.EffectTable.from_json(json.loads(json.dumps(t.to_json())))
    assert back == t
    assert t.to_json()["schema"] == ec.EFFECT_TABLE_SCHEMA


# -- properties -----------------------------------------------------------------------

TABLES = [ec.powerset_table(1), ec.powerset_table(2), ec.powerset_table(3), ec.chain_table(3),
          ec.chain_table(4), ec.chain_table(5)]


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(TABLES), st.randoms(use_true_random=False))
def test_relabeling_preserves_verdicts_and_canonical_form(t, rnd):
    mid = list(range(t.size))
    rnd.shuffle(mid)
    r = ec.relabel(t, mid)
    assert ec.canonical_key(r, t.product is not None) == ec.canonical_key(t, t.product is not None)
    assert ec.check_effect_algebra(r).passed == ec.check_effect_algebra(t).passed
    assert ec.check_orthoalgebra(r).passed == ec.check_orthoalgebra(t).passed
    if t.product is not None:
        assert ec.check_effect_monoid(r).passed


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3))
def test_direct_sum_of_boolean_monoids_is_boolean(j, k):
    s = ec.direct_sum(ec.powerset_table(j), ec.powerset_table(k))
    assert ec.check_effect_monoid(s).passed
    assert ec.is_boolean(s)
    assert ec.product_is_meet(s)
