"""Acceptance suite: every criterion runs at its stated tolerance and prints
one PASS/FAIL line.  Run with `pytest tests/test_acceptance.py -v -s`."""

import itertools
import json
import random
import time

import pytest

from msort_kit.arrangements import arrangement_formula
from msort_kit.cli import main
from msort_kit.combination import (
    GammaSetup,
    TheorySolver,
    check_finitely_smooth_at,
    construct_gamma_fragment_model,
    empty_theory_solver,
    exact_cardinality_solver,
    gamma_fragments,
    minmods,
    polite_combine,
    shiny_combine,
    union_oracle,
)
from msort_kit.errors import CapExceededError
from msort_kit.ramsey import (
    Coloring,
    directed_ramsey_search,
    fubini,
    is_pattern_monochromatic,
    multi_ramsey_search,
    pattern_of,
    ramsey_number_bruteforce,
    ramsey_search,
    ramsey_upper_bound,
    rstar_bound,
    rstarstar_bound,
)
from msort_kit.semantics import (
    TheoryDef,
    check_sat_at,
    enumerate_models,
    equivalent_up_to_size,
    satisfiable_profiles,
    satisfies,
    size_profiles,
)
from msort_kit.syntax import (
    And,
    Eq,
    Not,
    Signature,
    TRUE,
    Var,
    free_vars,
    parse_formula,
    parse_signature,
    print_formula,
)
from msort_kit.transforms import (
    SplitContext,
    is_gcnf,
    is_gdnf,
    skolemize,
    split_prenex,
    to_gcnf,
    to_gdnf,
    to_pnf,
)

from conftest import random_formula


def report(cid, ok, detail=""):
    verdict = "PASS" if ok else "FAIL"
    line = f"[acceptance] {cid}: {verdict}"
    if detail:
        line += f" ({detail})"
    print(line)


# ---------------------------------------------------------------------------
# C1: pigeonhole instance through the CLI
# ---------------------------------------------------------------------------

def test_c01_pigeonhole_instance(capsys, tmp_path):
    start = time.perf_counter()
    code = main(["ramsey", "--mode", "classic", "--k", "100",
                 "--n", "1", "--m", "10", "--exact"])
    out = capsys.readouterr().out
    assert code == 0
    assert out == "901\n"
    adversarial = {"map": {str(i): i // 9 + 1 for i in range(900)}, "colors": 100}
    path = tmp_path / "adversarial.json"
    path.write_text(json.dumps(adversarial))
    code = main(["ramsey", "--mode", "classic", "--k", "100", "--n", "1",
                 "--m", "10", "--ground", "900", "--coloring", str(path)])
    out = capsys.readouterr().out
    assert code == 1
    assert out == "refuted\n"
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"took {elapsed:.2f}s"
    with capsys.disabled():
        report("C1 pigeonhole 901/900", True, f"{elapsed:.2f}s")


# ---------------------------------------------------------------------------
# C2: classical Ramsey number by exhaustion
# ---------------------------------------------------------------------------

def test_c02_triangle_ramsey_number_bruteforce():
    start = time.perf_counter()
    # Exhausting all 2^10 colorings of a 5-set leaves a survivor ...
    edges5 = list(itertools.combinations(range(5), 2))
    survivor = False
    for bits in range(1 << len(edges5)):
        mapping = {e: (bits >> i) & 1 for i, e in enumerate(edges5)}
        c = Coloring.from_map(mapping, 2, "subsets", 2)
        if ramsey_search(range(5), c, 3) is None:
            survivor = True
            break
    assert survivor
    # ... and none of the 2^15 colorings of a 6-set survives.
    value = ramsey_number_bruteforce(2, 2, 3)
    assert value == 6
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"took {elapsed:.2f}s"
    report("C2 brute-force triangle number = 6", True, f"{elapsed:.2f}s")


# ---------------------------------------------------------------------------
# C3: ordered Bell numbers against brute-force pattern counts
# ---------------------------------------------------------------------------

def test_c03_ordered_bell_numbers():
    expected = [1, 3, 13, 75, 541, 4683]
    for n in range(1, 7):
        brute = len({pattern_of(t) for t in itertools.product(range(n), repeat=n)})
        assert fubini(n) == brute == expected[n - 1]
    report("C3 ordered-Bell counts 1..6", True)


# ---------------------------------------------------------------------------
# C4: pattern-witness property suites
# ---------------------------------------------------------------------------

def test_c04a_directed_search_property_suite():
    ground_size = rstar_bound(2, 2, 2)
    assert ground_size == ramsey_upper_bound(16, 2, 3)
    ground = range(ground_size)
    for seed in range(200):
        coloring = Coloring.random(2, 2, seed=seed)
        Y = directed_ramsey_search(ground, coloring, 2)
        assert Y is not None, f"seed {seed} found nothing"
        assert len(Y) >= 2
        assert is_pattern_monochromatic(coloring, Y)
    report("C4a directed witnesses at ground rstar_bound(2,2,2)", True,
           f"ground {ground_size}")


def test_c04b_multi_search_property_suite():
    # Stated ground size: rstarstar_bound(2,(1,2),2), i.e. the witness bound
    # for one unary and one binary 2-coloring.  Its defining composition is
    # ramsey_upper_bound(4**27, 3, 5): a simultaneous-witness ground for
    # 2**54 colors at arity 3.  Any number with that property exceeds the
    # classical lower bounds for many-color hypergraph witnesses, whose
    # digit count alone is astronomical, so no implementation can return it
    # and the suite cannot run at the stated ground size.  The sibling test
    # below demonstrates the same property at a sound feasible ground.
    try:
        ground_size = rstarstar_bound(2, (1, 2), 2)
    except CapExceededError as e:
        report("C4b multi witnesses at ground rstarstar_bound(2,(1,2),2)",
               False, "stated ground size is not computable")
        pytest.fail(
            "criterion unattainable as stated: rstarstar_bound(2,(1,2),2) = "
            f"ramsey_upper_bound(4**27, 3, 5) is not representable ({e})"
        )
    # Unreachable under the analysis above; kept for completeness.
    ground = range(ground_size)
    for seed in range(200):
        fs = [Coloring.random(1, 2, seed=seed * 2),
              Coloring.random(2, 2, seed=seed * 2 + 1)]
        Y = multi_ramsey_search(ground, fs, 2)
        assert Y is not None and len(Y) >= 2
        assert is_pattern_monochromatic(fs, Y)


def test_c04c_multi_search_property_at_sound_feasible_ground():
    # For target size 2, only the diagonal tuples of each coloring constrain
    # a pair, so k**r + 1 ground elements guarantee a witness by pigeonhole
    # on the diagonal color vectors.  The property itself is exercised with
    # the same 200-case protocol as the directed half.
    k, arities = 2, (1, 2)
    ground = range(k ** len(arities) + 1)
    for seed in range(200):
        fs = [Coloring.random(n, k, seed=seed * 10 + i)
              for i, n in enumerate(arities)]
        Y = multi_ramsey_search(ground, fs, 2)
        assert Y is not None and len(Y) >= 2
        assert is_pattern_monochromatic(fs, Y)
    report("C4c multi witnesses at sound feasible ground", True,
           f"ground {k ** len(arities) + 1}")


# ---------------------------------------------------------------------------
# C5: combination procedures against the union oracle
# ---------------------------------------------------------------------------

def _random_equality_formula(rng, names):
    pool = list(itertools.combinations(names, 2))
    lits = []
    for a, b in pool:
        roll = rng.random()
        lit = Eq(Var(a, "S"), Var(b, "S"))
        if roll < 0.35:
            lits.append(lit)
        elif roll < 0.7:
            lits.append(Not(lit))
    if not lits:
        return TRUE
    body = And(tuple(lits)) if len(lits) > 1 else lits[0]
    return Not(body) if rng.random() < 0.25 else body


def test_c05_combination_oracle_equivalence():
    start = time.perf_counter()
    rng = random.Random(42)
    names = ("x", "y", "z")
    stats = {"SAT": 0, "UNSAT": 0}
    for case in range(200):
        t1 = empty_theory_solver(["S"])
        t2 = exact_cardinality_solver("S", rng.choice((1, 2, 3)))
        phi1 = _random_equality_formula(rng, rng.sample(names, 2))
        phi2 = _random_equality_formula(rng, rng.sample(names, 2))
        bound = 4
        rp = polite_combine(t1, t2, phi1, phi2, bound)
        rs = shiny_combine(t1, t2, phi1, phi2, bound)
        ro = union_oracle(t1, t2, phi1, phi2, bound)
        assert rp.status == rs.status == ro.status, (
            case, print_formula(phi1), print_formula(phi2),
            rp.status, rs.status, ro.status,
        )
        assert rp.status in ("SAT", "UNSAT")
        stats[rp.status] += 1
        for result, left_f in ((rp, t1.wit(phi1)), (rs, phi1)):
            if result.certificate is None:
                continue
            cert = result.certificate
            delta_f = arrangement_formula(cert.arrangement)
            A, nu = cert.left
            assert satisfies(A, nu, left_f) and satisfies(A, nu, delta_f)
            B, mu = cert.right
            assert satisfies(B, mu, phi2) and satisfies(B, mu, delta_f)
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0, f"took {elapsed:.1f}s"
    report("C5 polite/shiny/oracle agreement on 200 cases", True,
           f"{stats['SAT']} sat, {stats['UNSAT']} unsat, {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# C6: minimal model sizes
# ---------------------------------------------------------------------------

def test_c06_minmods_properties_and_exact_values():
    t = empty_theory_solver(["S"])
    x, y, z = (Var(n, "S") for n in ("x", "y", "z"))
    fixtures = [
        (Eq(x, x), ((1,),)),
        (Not(Eq(x, y)), ((2,),)),
        (And((Not(Eq(x, y)), Not(Eq(x, z)), Not(Eq(y, z)))), ((3,),)),
    ]
    for phi, expected in fixtures:
        assert minmods(t, ["S"], phi, 4) == expected

    rng = random.Random(43)
    checked = 0
    for _ in range(100):
        if rng.random() < 0.5:
            theory = t.theory
        else:
            theory = exact_cardinality_solver("S", rng.choice((1, 2, 3))).theory
        phi = _random_equality_formula(rng, rng.sample(("x", "y", "z"), 2))
        mins = minmods(theory, ["S"], phi, 4)
        for p, q in itertools.combinations(mins, 2):
            assert not all(a <= b for a, b in zip(p, q))
            assert not all(a >= b for a, b in zip(p, q))
        for sizes in size_profiles(theory.signature, 4):
            if check_sat_at(theory, phi, sizes) is not None:
                tup = (sizes["S"],)
                assert any(all(m <= s for m, s in zip(mn, tup)) for mn in mins)
        checked += 1
    assert checked == 100
    report("C6 minmods antichain/domination + exact fixtures", True)


# ---------------------------------------------------------------------------
# C7: constant-fragment demo
# ---------------------------------------------------------------------------

def test_c07_gamma_demo():
    sig = parse_signature("(sort S1)(sort S2)(declare-fun f (S2) S1)")
    setup = GammaSetup(
        signature=sig,
        sorts=("S1", "S2"),
        ell=0,
        constants={"S1": ("a0", "a1", "a2"), "S2": ("b0", "b1")},
        term_depth=2,
    )
    frags = gamma_fragments(setup, TRUE)
    base = TheorySolver(TheoryDef(sig, ()))
    result = construct_gamma_fragment_model(setup, TRUE, frags, base)
    assert result.sizes["S2"] >= 4  # pigeonhole arithmetic forces this
    for f in frags.all_formulas():
        assert satisfies(result.structure, {}, f)
    interp = result.constant_interpretation
    for sort, names in (("S1", ("a0", "a1", "a2")), ("S2", ("b0", "b1"))):
        values = [interp[c] for c in names]
        assert len(set(values)) == len(values)
        assert all(v in result.structure.domains[sort] for v in values)
    # Full-size parameters validated symbolically: 901 pigeons in 100 holes
    # guarantee a 10-element fiber, and 900 do not.
    assert ramsey_upper_bound(100, 1, 10) == 901
    assert ramsey_number_bruteforce(100, 1, 10) == 901
    report("C7 fragment model (desk) + symbolic 901 check", True,
           f"sizes {result.sizes}")


# ---------------------------------------------------------------------------
# C8: transformation equivalence corpus
# ---------------------------------------------------------------------------

def test_c08_transform_equivalence_corpus():
    start = time.perf_counter()
    sig = parse_signature(
        "(sort A)(sort B)(split ((A) (B)))(declare-pred P (A))(declare-pred Q (B))"
    )
    ctx = SplitContext(sig)
    rng = random.Random(44)
    env = {"x": "A", "y": "B"}
    for case in range(200):
        phi = random_formula(rng, sig, env, depth=3, max_binders=2)
        pnf = to_pnf(phi)
        gdnf = to_gdnf(phi, ctx)
        gcnf = to_gcnf(phi, ctx)
        assert is_gdnf(gdnf, ctx), print_formula(gdnf)
        assert is_gcnf(gcnf, ctx), print_formula(gcnf)
        for out in (pnf, gdnf, gcnf):
            assert equivalent_up_to_size(phi, out, sig, 3) is None, (
                case, print_formula(phi), print_formula(out)
            )
        # Skolemization: universally close, then compare satisfiable
        # profiles of the closure and its Skolemization at bound 3.
        closed = phi
        for name, sort in sorted(free_vars(phi).pairs()):
            from msort_kit.syntax import Forall

            closed = Forall(name, sort, closed)
        sig2, sk = skolemize(closed, sig)
        prefix, _ = split_prenex(sk)
        assert all(kind.__name__ == "Forall" for kind, _, _ in prefix)
        base_profiles = satisfiable_profiles(TheoryDef(sig, ()), closed, 3)
        sk_profiles = satisfiable_profiles(TheoryDef(sig2, ()), sk, 3)
        assert base_profiles == sk_profiles, (case, print_formula(closed))
    elapsed = time.perf_counter() - start
    report("C8 transform equivalence on 200 formulas", True, f"{elapsed:.1f}s")


# ---------------------------------------------------------------------------
# C9: bijection regression
# ---------------------------------------------------------------------------

def test_c09_bijection_only_at_equal_sizes():
    sig = parse_signature("(sort S1)(sort S2)(declare-fun f (S1) S2)")
    inj = parse_formula("(forall ((x S1)(y S1)) (=> (= (f x) (f y)) (= x y)))", sig)
    sur = parse_formula("(forall ((u S2)) (exists ((x S1)) (= (f x) u)))", sig)
    theory = TheoryDef(sig, (inj, sur))
    for sizes in size_profiles(sig, 4):
        models = list(enumerate_models(theory, sizes))
        if sizes["S1"] == sizes["S2"]:
            assert models, sizes
        else:
            assert models == [], sizes
    report("C9 bijection theory models only at equal sizes <= 4", True)


# ---------------------------------------------------------------------------
# C10: finite smoothness fixtures
# ---------------------------------------------------------------------------

def test_c10_finite_smoothness_fixtures():
    empty = empty_theory_solver(["S"])
    x, y = Var("x", "S"), Var("y", "S")
    rep = check_finitely_smooth_at(empty.theory, ["S"], Not(Eq(x, y)), 4)
    assert rep.passed and not rep.violations
    card2 = exact_cardinality_solver("S", 2)
    rep2 = check_finitely_smooth_at(card2.theory, ["S"], TRUE, 4)
    assert not rep2.passed
    assert {"profile": {"S": 2}, "kappa": {"S": 3}} in rep2.violations
    report("C10 smoothness fixtures (empty passes, size-2 fails at 3)", True)
