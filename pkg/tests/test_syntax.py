import random

import pytest

from conftest import random_formula
from msort_kit.errors import ParseError, SortCheckError
from msort_kit.syntax import (
    And,
    App,
    Eq,
    Exists,
    Not,
    PredApp,
    Signature,
    TRUE,
    Var,
    VariableSet,
    free_vars,
    parse_file,
    parse_formula,
    parse_signature,
    print_formula,
    sort_check,
)


def test_parse_signature_unary_function():
    sig = parse_signature("(sort E)(declare-fun f (E) E)")
    assert sig.sorts == ("E",)
    assert sig.functions == {"f": (("E",), "E")}


def test_parse_signature_two_sorts():
    sig = parse_signature("(sort S1)(sort S2)(declare-fun f (S2) S1)")
    assert sig.functions["f"] == (("S2",), "S1")


def test_parse_signature_single_block_split():
    sig = parse_signature("(sort A)(split ((A)))(declare-fun g (A A) A)")
    assert sig.split == (("A",),)
    assert sig.block_of("A") == 0


def test_split_rejects_cross_block_symbol():
    with pytest.raises((ParseError, SortCheckError)):
        parse_signature("(sort A)(sort B)(split ((A) (B)))(declare-fun f (A) B)")


def test_split_must_partition_sorts():
    with pytest.raises((ParseError, SortCheckError)):
        parse_signature("(sort A)(sort B)(split ((A)))")


def test_single_block_split_accepts_everything():
    # With one block no symbol can cross it.
    sig = parse_signature(
        "(sort A)(sort B)(split ((A B)))(declare-fun f (A) B)(declare-pred P (A B))"
    )
    assert sig.block_of("A") == sig.block_of("B") == 0


def test_parse_formula_injectivity():
    sig = parse_signature("(sort S1)(sort S2)(declare-fun f (S1) S2)")
    phi = parse_formula("(forall ((x S1)(y S1)) (=> (= (f x) (f y)) (= x y)))", sig)
    assert free_vars(phi).is_empty()
    sort_check(phi, sig)


def test_parse_formula_reflexive():
    sig = parse_signature("(sort E)")
    phi = parse_formula("(= x x)", sig, {"x": "E"})
    assert phi == Eq(Var("x", "E"), Var("x", "E"))


def test_parse_formula_cross_sort_equality_rejected():
    sig = parse_signature("(sort S1)(sort S2)")
    with pytest.raises(ParseError):
        parse_formula("(= x u)", sig, {"x": "S1", "u": "S2"})


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as err:
        parse_file("(sort S)\n(declare-fun f (T) S)")
    assert err.value.line == 2
    assert err.value.col is not None


def test_unbound_variable_rejected():
    sig = parse_signature("(sort E)")
    with pytest.raises(ParseError):
        parse_formula("(= x y)", sig, {"x": "E"})


def test_duplicate_symbol_rejected():
    with pytest.raises(ParseError):
        parse_file("(sort E)(declare-fun f (E) E)(declare-pred f (E))")


def test_reserved_prefix_rejected():
    with pytest.raises(ParseError):
        parse_file("(sort E)(declare-fun sk_0 (E) E)")


def test_axioms_must_be_sentences():
    with pytest.raises(ParseError):
        parse_file("(sort E)(declare-var x E)(assert (= x x))")


def test_free_vars_sentence_is_empty():
    sig = parse_signature("(sort S1)(sort S2)(declare-fun f (S1) S2)")
    phi = parse_formula("(forall ((x S1)(y S1)) (=> (= (f x) (f y)) (= x y)))", sig)
    assert free_vars(phi) == VariableSet()


def test_free_vars_excludes_bound():
    sig = parse_signature("(sort E)(declare-pred P (E))")
    phi = parse_formula(
        "(and (= x y) (exists ((z E)) (P z)))", sig, {"x": "E", "y": "E"}
    )
    assert free_vars(phi) == VariableSet({"E": ["x", "y"]})


def test_free_vars_of_witness_output():
    # The empty-theory witness adds one fresh variable per shared sort.
    from msort_kit.combination import wit_empty_theory

    phi = Eq(Var("x", "S"), Var("y", "S"))
    w = wit_empty_theory(phi, ["S"])
    assert free_vars(w) == VariableSet({"S": ["x", "y", "w_S"]})


def test_free_vars_sort_filter():
    sig = parse_signature("(sort A)(sort B)")
    phi = parse_formula("(and (= x y) (= u v))", sig,
                        {"x": "A", "y": "A", "u": "B", "v": "B"})
    assert free_vars(phi, ["A"]) == VariableSet({"A": ["x", "y"]})


def test_print_true():
    assert print_formula(TRUE) == "true"


def test_print_at_least_two():
    from msort_kit.transforms import at_least_formula

    assert print_formula(at_least_formula("E", 2)) == \
        "(exists ((x1 E)(x2 E)) (not (= x1 x2)))"


def test_nullary_symbols_round_trip():
    sig = parse_signature("(sort E)(declare-fun c () E)(declare-pred p ())")
    phi = parse_formula("(and p (= c c))", sig)
    assert phi == And((PredApp("p", ()), Eq(App("c", (), "E"), App("c", (), "E"))))
    assert parse_formula(print_formula(phi), sig) == phi


SIG_TEXT = """
(sort A)(sort B)
(declare-fun f (A) B)
(declare-fun c () A)
(declare-pred P (B))
(declare-pred R (A B))
"""


def test_round_trip_random_formulas():
    sig = parse_signature(SIG_TEXT)
    env = {"x": "A", "y": "B"}
    rng = random.Random(1)
    for _ in range(1000):
        phi = random_formula(rng, sig, env, depth=4)
        text = print_formula(phi)
        assert parse_formula(text, sig, env) == phi, text


def test_free_vars_union_property():
    sig = parse_signature(SIG_TEXT)
    env = {"x": "A", "y": "B", "z": "A"}
    rng = random.Random(2)
    for _ in range(200):
        a = random_formula(rng, sig, env, depth=3)
        b = random_formula(rng, sig, env, depth=3)
        assert free_vars(And((a, b))) == free_vars(a).union(free_vars(b))


def test_sort_check_rejects_bad_application():
    sig = parse_signature(SIG_TEXT)
    bad = PredApp("P", (Var("x", "A"),))  # P expects a B
    with pytest.raises(SortCheckError):
        sort_check(bad, sig, {"x": "A"})


def test_signature_disjoint_union():
    s1 = parse_signature("(sort S)(declare-pred P (S))")
    s2 = parse_signature("(sort S)(sort T)(declare-pred Q (T))")
    u = s1.disjoint_union(s2)
    assert set(u.sorts) == {"S", "T"}
    assert set(u.predicates) == {"P", "Q"}
    with pytest.raises(SortCheckError):
        s1.disjoint_union(parse_signature("(sort S)(declare-pred P (S))"))
