"""Bounded theory combination: solvers, witness functions, the polite and
shiny procedures, minimal model sizes, property checkers, and the
constant-fragment model construction.

All satisfiability is decided by bounded enumeration, so verdicts are
bound-relative: UNSAT is reported only when every exhausted search was run
with a bound known to be sufficient for its theory (the empty and
exact-cardinality fixture classes carry that knowledge); otherwise the
verdict is UNKNOWN.  SAT verdicts always ship a re-verifiable certificate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .arrangements import (
    Arrangement,
    arrangement_formula,
    arrangement_of_interpretation,
    enumerate_arrangements,
)
from .errors import CapExceededError, EmptySortError, MsortError, SortCheckError
from .ramsey import Coloring, multi_ramsey_search, rstarstar_bound
from .semantics import (
    FiniteStructure,
    TheoryDef,
    assignments_over,
    check_sat,
    check_sat_at,
    eval_term,
    satisfies,
    size_profiles,
)
from .syntax import (
    And,
    App,
    Bottom,
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    PredApp,
    Signature,
    Top,
    Var,
    VariableSet,
    conj,
    disj,
    free_vars,
    print_formula,
)
from .transforms import exact_cardinality_formula, is_quantifier_free

SAT = "SAT"
UNSAT = "UNSAT"
UNKNOWN = "UNKNOWN"

DEFAULT_GAMMA_FORMULA_CAP = 5_000
DEFAULT_GAMMA_FUNCTION_CAP = 20_000


# ---------------------------------------------------------------------------
# Theory solvers
# ---------------------------------------------------------------------------

@dataclass
class TheorySolver:
    """A theory plus a bounded enumeration backend.

    `wit` is an optional witness function on quantifier-free formulas.
    `completeness` is an optional predicate completeness(phi, bound,
    minimums) that returns True when exhausting the bounded search for
    `phi` decides unsatisfiability outright; fixture constructors supply
    it, arbitrary theories leave it None.
    """

    theory: TheoryDef
    wit: Optional[Callable[[Formula], Formula]] = None
    completeness: Optional[Callable] = None
    name: str = ""
    size_cap: int = 6

    @property
    def signature(self) -> Signature:
        return self.theory.signature

    def satisfiable(self, phi: Formula, bound, minimums: Optional[Mapping[str, int]] = None):
        """First bounded model+assignment of theory plus `phi`, or None."""
        return check_sat(self.theory, phi, bound, minimums)

    def conclusive(self, phi: Formula, bound, minimums: Optional[Mapping[str, int]] = None) -> bool:
        if self.completeness is None:
            return False
        return bool(self.completeness(phi, bound, minimums))


def _bound_at_least(bound, needed: Mapping[str, int]) -> bool:
    if isinstance(bound, int):
        return all(bound >= n for n in needed.values())
    return all(bound.get(s, 0) >= n for s, n in needed.items())


def _pure_equality_needed(sig: Signature, phi: Formula, minimums=None) -> dict:
    fv = free_vars(phi)
    needed = {s: max(1, len(fv.names(s))) for s in sig.sorts}
    for s, m in dict(minimums or {}).items():
        needed[s] = max(needed.get(s, 1), m)
    return needed


def empty_theory_solver(sorts: Sequence[str], designated: Optional[Sequence[str]] = None,
                        name: str = "empty") -> TheorySolver:
    """The empty theory over pure-equality sorts, with its witness function.

    Complete at any bound covering the query's per-sort variable counts:
    a satisfying interpretation restricts to the assignment's image.
    """
    sig = Signature(tuple(sorts))
    designated = tuple(designated) if designated is not None else tuple(sorts)
    theory = TheoryDef(sig, (), designated)

    def completeness(phi, bound, minimums=None):
        return _bound_at_least(bound, _pure_equality_needed(sig, phi, minimums))

    def wit(phi):
        return wit_empty_theory(phi, designated)

    return TheorySolver(theory, wit=wit, completeness=completeness, name=name)


def exact_cardinality_solver(sort: str, k: int, name: Optional[str] = None) -> TheorySolver:
    """The theory fixing `sort` to exactly k elements.

    Complete whenever the bound reaches k: every model has that exact size.
    """
    sig = Signature((sort,))
    theory = TheoryDef(sig, (exact_cardinality_formula(sort, k),), (sort,))

    def completeness(phi, bound, minimums=None):
        return _bound_at_least(bound, {sort: k})

    return TheorySolver(theory, completeness=completeness, name=name or f"card{k}")


def classify_fixture_solver(theory: TheoryDef, name: str = "") -> TheorySolver:
    """Wrap `theory`, attaching completeness knowledge when it structurally
    matches a fixture class (the empty theory, or a conjunction of
    exact-cardinality axioms on single sorts); otherwise no completeness."""
    sig = theory.signature
    if not sig.functions and not sig.predicates:
        if not theory.axioms:
            def completeness(phi, bound, minimums=None):
                return _bound_at_least(bound, _pure_equality_needed(sig, phi, minimums))

            def wit(phi):
                return wit_empty_theory(phi, theory.designated or sig.sorts)

            return TheorySolver(theory, wit=wit, completeness=completeness, name=name)
        exact: dict = {}
        for ax in theory.axioms:
            match = _match_exact_cardinality(ax, sig)
            if match is None:
                exact = {}
                break
            exact[match[0]] = match[1]
        if exact:
            def completeness(phi, bound, minimums=None):
                needed = _pure_equality_needed(sig, phi, minimums)
                needed.update(exact)
                return _bound_at_least(bound, needed)

            return TheorySolver(theory, completeness=completeness, name=name)
    return TheorySolver(theory, name=name)


def _match_exact_cardinality(ax: Formula, sig: Signature):
    """Recognize exact_cardinality_formula(sort, k) structurally."""
    for sort in sig.sorts:
        for k in range(1, 9):
            if ax == exact_cardinality_formula(sort, k):
                return (sort, k)
    return None


# ---------------------------------------------------------------------------
# Witness function for the empty theory
# ---------------------------------------------------------------------------

def wit_empty_theory(phi: Formula, shared: Iterable[str]) -> Formula:
    """phi conjoined with one reflexive equality w_s = w_s per shared sort,
    with w_s fresh, so every shared sort is mentioned by a variable.

    The conjunction is equivalent to phi once the fresh variables are
    existentially closed, and a satisfying interpretation can shrink every
    shared domain to the values its variables take.  Only defined over the
    pure-equality signature.
    """
    if not is_quantifier_free(phi):
        raise SortCheckError("witness function expects a quantifier-free formula")
    if _mentions_symbols(phi):
        raise SortCheckError("witness function is defined for the empty signature only")
    taken = {name for _, names in free_vars(phi).sorted_items() for name in names}
    parts = [phi]
    for sort in sorted(set(shared)):
        base = f"w_{sort}"
        name = base
        i = 0
        while name in taken:
            i += 1
            name = f"{base}_{i}"
        taken.add(name)
        v = Var(name, sort)
        parts.append(Eq(v, v))
    if len(parts) == 1:
        return phi
    return And(tuple(parts))


def _mentions_symbols(phi: Formula) -> bool:
    if isinstance(phi, (Top, Bottom)):
        return False
    if isinstance(phi, Eq):
        return isinstance(phi.lhs, App) or isinstance(phi.rhs, App)
    if isinstance(phi, PredApp):
        return True
    if isinstance(phi, Not):
        return _mentions_symbols(phi.body)
    if isinstance(phi, (And, Or)):
        return any(_mentions_symbols(p) for p in phi.parts)
    if isinstance(phi, Implies):
        return _mentions_symbols(phi.lhs) or _mentions_symbols(phi.rhs)
    if isinstance(phi, (Forall, Exists)):
        return _mentions_symbols(phi.body)
    raise TypeError(f"not a formula: {phi!r}")


# ---------------------------------------------------------------------------
# Combination procedures
# ---------------------------------------------------------------------------

@dataclass
class CombinationCertificate:
    arrangement: Arrangement
    left: tuple  # (FiniteStructure, assignment)
    right: tuple
    min_sizes: Optional[tuple] = None


@dataclass
class CombinationResult:
    status: str
    certificate: Optional[CombinationCertificate] = None
    arrangements_tried: int = 0

    @property
    def exit_code(self) -> int:
        return {SAT: 0, UNSAT: 1, UNKNOWN: 2}[self.status]


def shared_sorts(t1: TheorySolver, t2: TheorySolver) -> tuple:
    return tuple(s for s in t1.signature.sorts if t2.signature.has_sort(s))


def _require_disjoint(t1: TheorySolver, t2: TheorySolver):
    s1, s2 = t1.signature, t2.signature
    overlap = (set(s1.functions) | set(s1.predicates)) & (
        set(s2.functions) | set(s2.predicates)
    )
    if overlap:
        raise SortCheckError(f"theories share non-sort symbols: {sorted(overlap)}")


def polite_combine(
    t1: TheorySolver,
    t2: TheorySolver,
    phi1: Formula,
    phi2: Formula,
    bound,
) -> CombinationResult:
    """Arrangement-guided combination with `t1` supplying a witness function.

    Satisfiable iff some arrangement of the shared-sort variables passes
    both sides: wit(phi1) conjoined with the arrangement in t1, and phi2
    conjoined with the same arrangement in t2.  The arrangement ranges over
    the shared-sort variables of wit(phi1) together with those of phi2 (the
    same extension is applied to both sides).
    """
    _require_disjoint(t1, t2)
    if t1.wit is None:
        raise MsortError("polite combination needs a witness function on the first theory")
    if not (is_quantifier_free(phi1) and is_quantifier_free(phi2)):
        raise SortCheckError("combination expects quantifier-free inputs")
    shared = shared_sorts(t1, t2)
    w = t1.wit(phi1)
    V = free_vars(w, shared).union(free_vars(phi2, shared))
    tried = 0
    all_conclusive = True
    for delta in enumerate_arrangements(V):
        tried += 1
        delta_f = arrangement_formula(delta)
        left_query = conj((w, delta_f))
        right_query = conj((phi2, delta_f))
        left = t1.satisfiable(left_query, bound)
        if left is None:
            all_conclusive &= t1.conclusive(left_query, bound)
            continue
        right = t2.satisfiable(right_query, bound)
        if right is None:
            all_conclusive &= t2.conclusive(right_query, bound)
            continue
        cert = CombinationCertificate(delta, left, right)
        _verify_certificate(cert, w, phi2, V)
        return CombinationResult(SAT, cert, tried)
    return CombinationResult(UNSAT if all_conclusive else UNKNOWN, None, tried)


def minmods(theory, S: Sequence[str], phi: Formula, bound) -> tuple:
    """Minimal S-size tuples among bounded models of theory + `phi`.

    Sizes are compared in the product order; the result is the antichain of
    minima, sorted, with positions following the order of `S`.  Empty when
    the formula has no model within the bound.  Accepts a TheoryDef or a
    TheorySolver.
    """
    if isinstance(theory, TheorySolver):
        theory = theory.theory
    S = tuple(S)
    for s in S:
        if not theory.signature.has_sort(s):
            raise SortCheckError(f"unknown sort {s!r}")
    found = set()
    for sizes in size_profiles(theory.signature, bound):
        if check_sat_at(theory, phi, sizes) is not None:
            found.add(tuple(sizes[s] for s in S))
    minimal = [
        t for t in found
        if not any(other != t and _dominates(t, other) for other in found)
    ]
    return tuple(sorted(minimal))


def _dominates(t: tuple, other: tuple) -> bool:
    return all(a >= b for a, b in zip(t, other))


def shiny_combine(
    t1: TheorySolver,
    t2: TheorySolver,
    phi1: Formula,
    phi2: Formula,
    bound,
) -> CombinationResult:
    """Combination through minimal model sizes of the first theory.

    Satisfiable iff for some arrangement of the shared-sort variables of
    phi1 and phi2 there is a minimal S-size tuple of t1-models of
    phi1 + arrangement such that t2 has a model of phi2 + arrangement at
    least that large on every shared sort (within the bound).  The caller
    asserts that t1 can realize every larger finite size (checkable with
    check_finitely_smooth_at).
    """
    _require_disjoint(t1, t2)
    if not (is_quantifier_free(phi1) and is_quantifier_free(phi2)):
        raise SortCheckError("combination expects quantifier-free inputs")
    shared = shared_sorts(t1, t2)
    V = free_vars(phi1, shared).union(free_vars(phi2, shared))
    tried = 0
    all_conclusive = True
    for delta in enumerate_arrangements(V):
        tried += 1
        delta_f = arrangement_formula(delta)
        left_query = conj((phi1, delta_f))
        right_query = conj((phi2, delta_f))
        kappas = minmods(t1.theory, shared, left_query, bound)
        if not kappas:
            all_conclusive &= t1.conclusive(left_query, bound)
            continue
        decided_right = True
        hit = None
        for kappa in kappas:
            minimums = dict(zip(shared, kappa))
            right = t2.satisfiable(right_query, bound, minimums)
            if right is not None:
                hit = (kappa, right)
                break
            decided_right &= t2.conclusive(right_query, bound, minimums)
        if hit is None:
            all_conclusive &= decided_right
            continue
        kappa, right = hit
        left = t1.satisfiable(left_query, bound, dict(zip(shared, kappa)))
        cert = CombinationCertificate(delta, left, right, min_sizes=kappa)
        _verify_certificate(cert, phi1, phi2, V)
        return CombinationResult(SAT, cert, tried)
    return CombinationResult(UNSAT if all_conclusive else UNKNOWN, None, tried)


def union_oracle(
    t1: TheorySolver,
    t2: TheorySolver,
    phi1: Formula,
    phi2: Formula,
    bound,
) -> CombinationResult:
    """Direct bounded satisfiability of phi1 and phi2 in the pooled theory.

    The reference the combination procedures are validated against.
    """
    _require_disjoint(t1, t2)
    sig = t1.signature.disjoint_union(t2.signature)
    pooled = TheoryDef(sig, t1.theory.axioms + t2.theory.axioms)
    query = conj((phi1, phi2))
    hit = check_sat(pooled, query, bound)
    if hit is not None:
        cert = CombinationCertificate(
            arrangement_of_interpretation(
                hit[0], hit[1],
                free_vars(query, shared_sorts(t1, t2)),
            ),
            hit,
            hit,
        )
        return CombinationResult(SAT, cert)
    conclusive = (
        t1.completeness is not None
        and t2.completeness is not None
        and t1.conclusive(query, bound)
        and t2.conclusive(query, bound)
    )
    return CombinationResult(UNSAT if conclusive else UNKNOWN, None)


def _verify_certificate(cert: CombinationCertificate, left_f: Formula, right_f: Formula, V):
    """Re-check both witnesses and their agreement on the shared pattern.

    The pattern comparison covers the shared variables assigned on both
    sides (a variable absent from one side's formula is unconstrained
    there and carries no assignment).
    """
    delta_f = arrangement_formula(cert.arrangement)
    A, nu = cert.left
    if not (satisfies(A, nu, left_f) and satisfies(A, nu, delta_f)):
        raise MsortError("certificate failed left-side verification")
    B, mu = cert.right
    if not (satisfies(B, mu, right_f) and satisfies(B, mu, delta_f)):
        raise MsortError("certificate failed right-side verification")
    common = VariableSet(
        {
            sort: [n for n in names if n in nu and n in mu]
            for sort, names in V.sorted_items()
        }
    )
    left_arr = arrangement_of_interpretation(A, nu, common)
    right_arr = arrangement_of_interpretation(B, mu, common)
    if left_arr != right_arr:
        raise MsortError("certificate sides disagree on the shared equality pattern")


# ---------------------------------------------------------------------------
# Bounded property checkers
# ---------------------------------------------------------------------------

@dataclass
class PropertyReport:
    """Outcome of a bounded model-theoretic property check."""

    property_name: str
    passed: bool
    profiles_checked: int
    violations: list = field(default_factory=list)

    def __str__(self):
        verdict = "passes" if self.passed else "FAILS"
        lines = [
            f"{self.property_name}: {verdict} "
            f"({self.profiles_checked} satisfiable profiles checked)"
        ]
        for v in self.violations:
            lines.append(f"  violation: {v}")
        return "\n".join(lines)


def check_stably_finite_at(theory: TheoryDef, S: Sequence[str], phi: Formula, bound) -> PropertyReport:
    """For every bounded model of `phi`, confirm some model has componentwise
    smaller-or-equal finite S-sizes.  At finite scale the found model itself
    qualifies, so the check documents rather than refutes; violations would
    list any satisfiable profile with no dominated witness."""
    S = tuple(S)
    report = PropertyReport("stably-finite", True, 0)
    for sizes in size_profiles(theory.signature, bound):
        if check_sat_at(theory, phi, sizes) is None:
            continue
        report.profiles_checked += 1
        dominated = None
        for smaller in size_profiles(theory.signature, sizes):
            if all(smaller[s] <= sizes[s] for s in S):
                if check_sat_at(theory, phi, smaller) is not None:
                    dominated = smaller
                    break
        if dominated is None:
            report.passed = False
            report.violations.append(
                {"profile": dict(sizes), "reason": "no dominated finite model"}
            )
    return report


def check_finitely_smooth_at(theory: TheoryDef, S: Sequence[str], phi: Formula, bound) -> PropertyReport:
    """For every bounded model of `phi` and every target size function kappa
    with model-size <= kappa <= bound on the S-sorts, confirm a model of
    `phi` with exactly those S-sizes exists.  Violations carry the base
    profile and the unreachable kappa."""
    S = tuple(S)
    if isinstance(bound, int):
        bound_map = {s: bound for s in theory.signature.sorts}
    else:
        bound_map = dict(bound)
    report = PropertyReport("finitely-smooth", True, 0)
    sat_cache: dict = {}

    def sat_at(profile: Mapping[str, int]) -> bool:
        key = tuple(sorted(profile.items()))
        if key not in sat_cache:
            sat_cache[key] = check_sat_at(theory, phi, profile) is not None
        return sat_cache[key]

    for sizes in size_profiles(theory.signature, bound_map):
        if not sat_at(sizes):
            continue
        report.profiles_checked += 1
        targets = [range(sizes[s], bound_map[s] + 1) for s in S]
        for kappa in itertools.product(*targets):
            reached = False
            for other in size_profiles(theory.signature, bound_map):
                if all(other[s] == k for s, k in zip(S, kappa)) and sat_at(other):
                    reached = True
                    break
            if not reached:
                report.passed = False
                report.violations.append(
                    {"profile": dict(sizes), "kappa": dict(zip(S, kappa))}
                )
    return report


# ---------------------------------------------------------------------------
# Constant-fragment construction
# ---------------------------------------------------------------------------

@dataclass
class GammaSetup:
    """Inputs for the constant-fragment construction.

    `sorts` orders the designated sorts; positions at or below `ell` (1-based)
    receive exact target sizes and a covering axiom, positions above grow as
    needed.  `constants` lists fresh per-sort constant names, totally ordered
    by declaration.  Slot terms are generated from the signature up to
    `term_depth`.
    """

    signature: Signature
    sorts: tuple
    ell: int
    constants: Mapping[str, Sequence[str]]
    term_depth: int = 2

    def __post_init__(self):
        self.sorts = tuple(self.sorts)
        self.constants = {s: tuple(v) for s, v in dict(self.constants).items()}
        if sorted(self.sorts) != sorted(self.signature.sorts):
            raise SortCheckError("setup sorts must order exactly the signature sorts")
        if not (0 <= self.ell <= len(self.sorts)):
            raise SortCheckError("ell out of range")
        taken = set(self.signature.functions) | set(self.signature.predicates)
        for s in self.sorts:
            names = self.constants.get(s, ())
            if len(set(names)) != len(names):
                raise SortCheckError(f"duplicate constants for sort {s!r}")
            for c in names:
                if c in taken:
                    raise SortCheckError(f"constant {c!r} clashes with a declared symbol")
                taken.add(c)

    def constant_names(self, sort: str) -> tuple:
        return self.constants.get(sort, ())

    def extended_signature(self) -> Signature:
        consts = {}
        for s in self.sorts:
            for c in self.constant_names(s):
                consts[c] = ((), s)
        return self.signature.with_functions(consts)


@dataclass
class GammaFragments:
    distinctness: list
    pattern_equations: list
    covering: list

    def all_formulas(self) -> list:
        return list(self.distinctness) + list(self.pattern_equations) + list(self.covering)


def _slot_terms(sig: Signature, depth: int) -> dict:
    """Terms with numbered variable slots at the leaves, per result sort.

    Each leaf is a distinct slot variable u0, u1, ... numbered left to
    right; instances with repeated arguments arise by filling slots with
    equal values, so distinct slots lose no generality.
    """
    def renumber(t, counter):
        if isinstance(t, Var):
            name = f"u{counter[0]}"
            counter[0] += 1
            return Var(name, t.sort)
        return App(t.fn, tuple(renumber(a, counter) for a in t.args), t.sort)

    base: dict = {s: [Var("u", s)] for s in sig.sorts}
    for fname, (arg_sorts, res) in sig.functions.items():
        if not arg_sorts:
            base[res].append(App(fname, (), res))
    apps: dict = {s: [] for s in sig.sorts}
    current = {s: list(v) for s, v in base.items()}
    for _ in range(depth):
        nxt: dict = {s: [] for s in sig.sorts}
        for fname, (arg_sorts, res) in sig.functions.items():
            if not arg_sorts:
                continue
            pools = [current[s] for s in arg_sorts]
            for combo in itertools.product(*pools):
                nxt[res].append(App(fname, tuple(combo), res))
        for s in sig.sorts:
            apps[s].extend(nxt[s])
            current[s] = current[s] + nxt[s]
    out: dict = {s: [] for s in sig.sorts}
    seen: set = set()
    for s in sig.sorts:
        for t in apps[s]:
            fixed = renumber(t, [0])
            key = print_formula(Eq(fixed, fixed))
            if key not in seen:
                seen.add(key)
                out[s].append(fixed)
    return out


def _slots_of(t) -> list:
    """Slot variables of a term in left-to-right order."""
    out = []

    def walk(x):
        if isinstance(x, Var):
            out.append(x)
        else:
            for a in x.args:
                walk(a)

    walk(t)
    return out


def _fill(t, mapping: Mapping[str, object]):
    if isinstance(t, Var):
        return mapping[t.name]
    return App(t.fn, tuple(_fill(a, mapping) for a in t.args), t.sort)


def gamma_fragments(
    setup: GammaSetup,
    phi: Formula,
    formula_cap: int = DEFAULT_GAMMA_FORMULA_CAP,
) -> GammaFragments:
    """The three finite fragment families for `setup`.

    - distinctness: pairwise disequalities of each sort's constants;
    - pattern_equations: for each slot term of a sort above `ell`, equations
      saying the term's value is unchanged when later-sort constant
      arguments are replaced pattern-equivalently (earlier-sort constant
      arguments are fixed, ranging over all combinations);
    - covering: for each sort at or below `ell`, the axiom that every
      element is one of its constants.
    """
    from .ramsey import pattern_of

    if not is_quantifier_free(phi):
        raise SortCheckError("phi must be quantifier-free")
    ext = setup.extended_signature()
    const_term = {
        (s, c): App(c, (), s) for s in setup.sorts for c in setup.constant_names(s)
    }
    order = {
        s: {c: i for i, c in enumerate(setup.constant_names(s))} for s in setup.sorts
    }
    budget = [formula_cap]

    def spend():
        budget[0] -= 1
        if budget[0] < 0:
            raise CapExceededError(f"fragment enumeration exceeded cap {formula_cap}")

    distinctness = []
    for s in setup.sorts:
        names = setup.constant_names(s)
        for a, b in itertools.combinations(names, 2):
            spend()
            distinctness.append(Not(Eq(const_term[(s, a)], const_term[(s, b)])))

    covering = []
    for pos, s in enumerate(setup.sorts, start=1):
        if pos > setup.ell:
            continue
        names = setup.constant_names(s)
        if not names:
            raise SortCheckError(f"sort {s!r} at or below ell needs constants")
        x = Var("x", s)
        covering.append(
            Forall("x", s, disj([Eq(x, const_term[(s, c)]) for c in names]))
        )

    terms = _slot_terms(setup.signature, setup.term_depth)
    position = {s: i + 1 for i, s in enumerate(setup.sorts)}
    pattern_equations = []
    for s in setup.sorts:
        i = position[s]
        if i <= setup.ell:
            continue
        for t in terms[s]:
            slots = _slots_of(t)
            prefix_slots = [v for v in slots if position[v.sort] <= i]
            suffix_slots = [v for v in slots if position[v.sort] > i]
            if not suffix_slots:
                continue
            prefix_pools = [setup.constant_names(v.sort) for v in prefix_slots]
            if any(not p for p in prefix_pools):
                continue
            suffix_pools = [setup.constant_names(v.sort) for v in suffix_slots]
            if any(not p for p in suffix_pools):
                continue
            suffix_sorts = sorted({v.sort for v in suffix_slots}, key=lambda s2: position[s2])
            for prefix_combo in itertools.product(*prefix_pools):
                for b_combo in itertools.product(*suffix_pools):
                    for d_combo in itertools.product(*suffix_pools):
                        if b_combo >= d_combo:
                            continue
                        ok = True
                        for s2 in suffix_sorts:
                            b_vec = tuple(
                                order[s2][c] for v, c in zip(suffix_slots, b_combo)
                                if v.sort == s2
                            )
                            d_vec = tuple(
                                order[s2][c] for v, c in zip(suffix_slots, d_combo)
                                if v.sort == s2
                            )
                            if pattern_of(b_vec) != pattern_of(d_vec):
                                ok = False
                                break
                        if not ok:
                            continue
                        spend()
                        b_map = {
                            v.name: const_term[(v.sort, c)]
                            for v, c in zip(prefix_slots, prefix_combo)
                        }
                        d_map = dict(b_map)
                        for v, c in zip(suffix_slots, b_combo):
                            b_map[v.name] = const_term[(v.sort, c)]
                        for v, c in zip(suffix_slots, d_combo):
                            d_map[v.name] = const_term[(v.sort, c)]
                        pattern_equations.append(Eq(_fill(t, b_map), _fill(t, d_map)))
    return GammaFragments(distinctness, pattern_equations, covering)


@dataclass
class GammaModelResult:
    structure: FiniteStructure
    constant_interpretation: dict
    sizes: dict
    fibers: dict
    formulas_verified: int


def construct_gamma_fragment_model(
    setup: GammaSetup,
    phi: Formula,
    fragments: GammaFragments,
    base: TheorySolver,
    function_cap: int = DEFAULT_GAMMA_FUNCTION_CAP,
) -> GammaModelResult:
    """Build a finite model of phi plus all fragment formulas.

    Sizes are chosen sort by sort: exact targets up to `ell`, and above it
    at least the simultaneous pattern-witness bound for the slot-term
    functions over the earlier domains.  A base model of `phi` at those
    sizes is found by enumeration, the constants above `ell` are placed
    inside a subset on which every slot-term function is constant per
    pattern class (found by multi_ramsey_search), order-compatibly with
    their declaration order, and the resulting structure is verified to
    satisfy every supplied formula before being returned.
    """
    sig = setup.signature
    if base.signature != sig:
        raise SortCheckError("base solver must match the setup signature")
    terms = _slot_terms(sig, setup.term_depth)
    position = {s: i + 1 for i, s in enumerate(setup.sorts)}

    sizes: dict = {}
    for idx, s in enumerate(setup.sorts, start=1):
        n_constants = len(setup.constant_names(s))
        if idx <= setup.ell:
            if n_constants < 1:
                raise SortCheckError(f"sort {s!r} at or below ell needs constants")
            sizes[s] = n_constants
            continue
        colors = sum(
            sizes[s2] for s2 in setup.sorts
            if setup.ell < position[s2] < idx
        )
        arity_vec = []
        for s2 in setup.sorts:
            if not (setup.ell < position[s2] < idx):
                continue
            for t in terms[s2]:
                slots = _slots_of(t)
                n_here = sum(1 for v in slots if v.sort == s)
                if n_here == 0:
                    continue
                multiplicity = 1
                for v in slots:
                    if v.sort == s:
                        continue
                    if position[v.sort] < idx:
                        multiplicity *= sizes[v.sort]
                    else:
                        multiplicity *= len(setup.constant_names(v.sort))
                if multiplicity == 0:
                    continue
                if multiplicity > function_cap:
                    raise CapExceededError(
                        f"slot-term family for {s!r} needs {multiplicity} functions"
                    )
                arity_vec.extend([n_here] * multiplicity)
        if arity_vec and colors > 0:
            sizes[s] = max(n_constants, rstarstar_bound(colors, tuple(arity_vec), n_constants))
        else:
            sizes[s] = max(1, n_constants)

    hit = check_sat_at(base.theory, phi, sizes)
    if hit is None:
        raise MsortError(
            f"base theory has no model of the formula at sizes {sizes}"
        )
    structure, assignment = hit

    const_interp: dict = {}
    fibers: dict = {}
    for idx in range(len(setup.sorts), 0, -1):
        s = setup.sorts[idx - 1]
        names = setup.constant_names(s)
        dom = structure.domains[s]
        if idx <= setup.ell:
            for c, e in zip(names, dom):
                const_interp[c] = e
            fibers[s] = tuple(dom[: len(names)])
            continue
        colorings = []
        for s2 in setup.sorts:
            if not (setup.ell < position[s2] < idx):
                continue
            for t in terms[s2]:
                slots = _slots_of(t)
                here = [v for v in slots if v.sort == s]
                if not here:
                    continue
                others = [v for v in slots if v.sort != s]
                pools = []
                for v in others:
                    if position[v.sort] < idx:
                        pools.append([(v.name, e) for e in structure.domains[v.sort]])
                    else:
                        pools.append(
                            [(v.name, const_interp[c]) for c in setup.constant_names(v.sort)]
                        )
                for fixed in itertools.product(*pools):
                    fixed_map = dict(fixed)

                    def make_fn(term=t, base_map=fixed_map, slot_names=tuple(v.name for v in here)):
                        def fn(args):
                            env = dict(base_map)
                            for name, ie in zip(slot_names, args):
                                env[name] = dom[ie]
                            return eval_term(structure, env, term)
                        return fn

                    colorings.append(Coloring(len(here), "tuples", make_fn()))
                    if len(colorings) > function_cap:
                        raise CapExceededError("slot-term function family exceeds cap")
        if not names:
            fibers[s] = ()
            continue
        if colorings:
            Y = multi_ramsey_search(range(len(dom)), colorings, len(names))
            if Y is None:
                raise MsortError(
                    f"no simultaneous pattern-constant subset of size {len(names)} "
                    f"in sort {s!r} (domain {len(dom)})"
                )
        else:
            Y = tuple(range(len(names)))
        fiber_elems = tuple(dom[i] for i in Y)
        fibers[s] = fiber_elems
        for c, e in zip(names, fiber_elems):
            const_interp[c] = e

    ext_sig = setup.extended_signature()
    ext_functions = dict(structure.functions)
    for c, e in const_interp.items():
        ext_functions[c] = {(): e}
    extended = FiniteStructure(ext_sig, structure.domains, ext_functions, structure.predicates)

    checked = 0
    if not satisfies(extended, assignment, phi):
        raise MsortError("constructed model does not satisfy the input formula")
    checked += 1
    for f in fragments.all_formulas():
        if not satisfies(extended, {}, f):
            raise MsortError(f"constructed model violates fragment: {print_formula(f)}")
        checked += 1
    return GammaModelResult(extended, const_interp, sizes, fibers, checked)
