"""Finite structures, evaluation, bounded model finding, and model comparisons.

Domains are explicit nonempty finite sets per sort; function tables are total
maps and predicate tables are tuple sets.  Model enumeration follows a fixed
canonical order (domains labeled 0..n-1, tables in lexicographic order over
symbols in declaration order), so every stream and witness is reproducible.
Evaluation is pure; structures are safe to share across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .errors import (
    CapExceededError,
    EmptySortError,
    EvalError,
    NotASubstructureError,
    SortCheckError,
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
    Term,
    Top,
    Var,
    VariableSet,
    conj,
    free_vars,
    print_formula,
    print_term,
)

DEFAULT_FORMULA_CAP = 100_000


# ---------------------------------------------------------------------------
# Theories and structures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TheoryDef:
    """A theory presented as a finite list of axiom sentences.

    `designated` optionally names the sorts whose domain sizes the
    combination machinery tracks.
    """

    signature: Signature
    axioms: tuple = ()
    designated: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "axioms", tuple(self.axioms))
        object.__setattr__(self, "designated", tuple(self.designated))
        for s in self.designated:
            if not self.signature.has_sort(s):
                raise SortCheckError(f"designated sort {s!r} not in signature")
        for ax in self.axioms:
            if not free_vars(ax).is_empty():
                raise SortCheckError(f"axiom is not a sentence: {print_formula(ax)}")


class FiniteStructure:
    """Explicit finite interpretation of a signature.

    `domains` maps each sort to a nonempty tuple of elements, `functions`
    maps each function symbol to a total dict from argument tuples to an
    element, and `predicates` maps each predicate symbol to a frozenset of
    argument tuples.  Equality is always identity and never tabled.
    """

    __slots__ = ("signature", "domains", "functions", "predicates")

    def __init__(self, signature, domains, functions=None, predicates=None):
        domains = {s: tuple(v) for s, v in dict(domains).items()}
        functions = {f: dict(t) for f, t in dict(functions or {}).items()}
        predicates = {p: frozenset(t) for p, t in dict(predicates or {}).items()}
        if set(domains) != set(signature.sorts):
            raise SortCheckError("domains must cover exactly the declared sorts")
        for s, dom in domains.items():
            if not dom:
                raise EmptySortError(f"domain of sort {s!r} is empty")
            if len(set(dom)) != len(dom):
                raise SortCheckError(f"domain of sort {s!r} has duplicate elements")
        domain_sets = {s: set(v) for s, v in domains.items()}
        if set(functions) != set(signature.functions):
            raise SortCheckError("function tables must cover exactly the declared functions")
        for fname, table in functions.items():
            arg_sorts, res = signature.functions[fname]
            expected = 1
            for s in arg_sorts:
                expected *= len(domains[s])
            if len(table) != expected:
                raise SortCheckError(f"function table for {fname!r} is not total")
            for args, val in table.items():
                if len(args) != len(arg_sorts) or any(
                    a not in domain_sets[s] for a, s in zip(args, arg_sorts)
                ):
                    raise SortCheckError(f"bad argument tuple in table for {fname!r}")
                if val not in domain_sets[res]:
                    raise SortCheckError(f"bad value in table for {fname!r}")
        if set(predicates) != set(signature.predicates):
            raise SortCheckError("predicate tables must cover exactly the declared predicates")
        for pname, tuples in predicates.items():
            arg_sorts = signature.predicates[pname]
            for args in tuples:
                if len(args) != len(arg_sorts) or any(
                    a not in domain_sets[s] for a, s in zip(args, arg_sorts)
                ):
                    raise SortCheckError(f"bad tuple in table for {pname!r}")
        self.signature = signature
        self.domains = domains
        self.functions = functions
        self.predicates = predicates

    def sizes(self, sorts: Optional[Iterable[str]] = None) -> tuple:
        """Domain sizes as a tuple over `sorts` (default: sorted designations)."""
        names = tuple(sorts) if sorts is not None else tuple(sorted(self.domains))
        return tuple(len(self.domains[s]) for s in names)

    def __eq__(self, other):
        return (
            isinstance(other, FiniteStructure)
            and self.signature == other.signature
            and self.domains == other.domains
            and self.functions == other.functions
            and self.predicates == other.predicates
        )

    def __repr__(self):
        sizes = {s: len(d) for s, d in self.domains.items()}
        return f"FiniteStructure(sizes={sizes})"


Assignment = Mapping[str, object]


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def eval_term(structure: FiniteStructure, assignment: Assignment, t: Term):
    """Interpret `t` compositionally; raises EvalError on a missing variable."""
    if isinstance(t, Var):
        try:
            return assignment[t.name]
        except KeyError:
            raise EvalError(f"no assignment for variable {t.name!r}") from None
    args = tuple(eval_term(structure, assignment, a) for a in t.args)
    return structure.functions[t.fn][args]


def satisfies(structure: FiniteStructure, assignment: Assignment, phi: Formula) -> bool:
    """Truth of `phi` in `structure` under `assignment`.

    Quantifiers range over the finite domain of the bound sort.
    """
    env = dict(assignment)
    return _sat(structure, env, phi)


def _sat(A: FiniteStructure, env: dict, phi: Formula) -> bool:
    if isinstance(phi, Top):
        return True
    if isinstance(phi, Bottom):
        return False
    if isinstance(phi, Eq):
        return eval_term(A, env, phi.lhs) == eval_term(A, env, phi.rhs)
    if isinstance(phi, PredApp):
        args = tuple(eval_term(A, env, a) for a in phi.args)
        return args in A.predicates[phi.name]
    if isinstance(phi, Not):
        return not _sat(A, env, phi.body)
    if isinstance(phi, And):
        return all(_sat(A, env, p) for p in phi.parts)
    if isinstance(phi, Or):
        return any(_sat(A, env, p) for p in phi.parts)
    if isinstance(phi, Implies):
        return (not _sat(A, env, phi.lhs)) or _sat(A, env, phi.rhs)
    if isinstance(phi, (Forall, Exists)):
        want_all = isinstance(phi, Forall)
        name = phi.var
        missing = name not in env
        saved = env.get(name)
        try:
            for e in A.domains[phi.sort]:
                env[name] = e
                result = _sat(A, env, phi.body)
                if result != want_all:
                    return not want_all
            return want_all
        finally:
            if missing:
                env.pop(name, None)
            else:
                env[name] = saved
    raise TypeError(f"not a formula: {phi!r}")


# ---------------------------------------------------------------------------
# Bounded model enumeration
# ---------------------------------------------------------------------------

def _normalize_sizes(sig: Signature, sizes) -> dict:
    if isinstance(sizes, int):
        sizes = {s: sizes for s in sig.sorts}
    sizes = dict(sizes)
    if set(sizes) != set(sig.sorts):
        raise SortCheckError("sizes must name exactly the declared sorts")
    for s, n in sizes.items():
        if n < 1:
            raise EmptySortError(f"size of sort {s!r} must be at least 1")
    return sizes


def _table_space(keys: Sequence[tuple], values: Sequence) -> Iterator[dict]:
    """All total maps keys -> values, values varying lexicographically."""
    if not keys:
        yield {}
        return
    for combo in itertools.product(values, repeat=len(keys)):
        yield dict(zip(keys, combo))


def _structures_at(theory: TheoryDef, sizes: dict) -> Iterator[FiniteStructure]:
    sig = theory.signature
    domains = {s: tuple(range(sizes[s])) for s in sig.sorts}

    fn_names = list(sig.functions)
    pred_names = list(sig.predicates)

    def fn_tables(i):
        if i == len(fn_names):
            yield {}
            return
        name = fn_names[i]
        arg_sorts, res = sig.functions[name]
        keys = list(itertools.product(*(domains[s] for s in arg_sorts)))
        for table in _table_space(keys, domains[res]):
            for rest in fn_tables(i + 1):
                yield {name: table, **rest}

    def pred_tables(i):
        if i == len(pred_names):
            yield {}
            return
        name = pred_names[i]
        arg_sorts = sig.predicates[name]
        keys = list(itertools.product(*(domains[s] for s in arg_sorts)))
        for flags in itertools.product((False, True), repeat=len(keys)):
            chosen = frozenset(k for k, f in zip(keys, flags) if f)
            for rest in pred_tables(i + 1):
                yield {name: chosen, **rest}

    for funcs in fn_tables(0):
        for preds in pred_tables(0):
            A = FiniteStructure(sig, domains, funcs, preds)
            if all(satisfies(A, {}, ax) for ax in theory.axioms):
                yield A


def enumerate_models(theory: TheoryDef, sizes, up_to_iso: bool = False) -> Iterator[FiniteStructure]:
    """All models of `theory` with the exact per-sort `sizes`, canonical order.

    `sizes` is an int (uniform) or a per-sort mapping.  With `up_to_iso`,
    structures isomorphic to an earlier one in the stream are dropped.
    """
    sizes = _normalize_sizes(theory.signature, sizes)
    stream = _structures_at(theory, sizes)
    if not up_to_iso:
        yield from stream
        return
    reps: list = []
    for A in stream:
        if not any(isomorphic(A, B) for B in reps):
            reps.append(A)
            yield A


def size_profiles(sig: Signature, bound, minimums: Optional[Mapping[str, int]] = None) -> Iterator[dict]:
    """Size profiles with per-sort sizes from `minimums` (default 1) to `bound`,
    in ascending lexicographic order over the declaration order of sorts."""
    if isinstance(bound, int):
        bound = {s: bound for s in sig.sorts}
    minimums = dict(minimums or {})
    names = list(sig.sorts)
    ranges = [range(max(1, minimums.get(s, 1)), bound[s] + 1) for s in names]
    for combo in itertools.product(*ranges):
        yield dict(zip(names, combo))


def enumerate_models_range(theory: TheoryDef, bound, up_to_iso: bool = False) -> Iterator[FiniteStructure]:
    """Models over every size profile with all domains <= `bound`."""
    for sizes in size_profiles(theory.signature, bound):
        yield from enumerate_models(theory, sizes, up_to_iso=up_to_iso)


def assignments_over(A: FiniteStructure, variables: VariableSet) -> Iterator[dict]:
    """All assignments of `variables` into the domains of `A`, in canonical
    order (variables sorted by name, domain order per sort)."""
    pairs = sorted(variables.pairs())
    if not pairs:
        yield {}
        return
    names = [n for n, _ in pairs]
    doms = [A.domains[s] for _, s in pairs]
    for combo in itertools.product(*doms):
        yield dict(zip(names, combo))


def check_sat_at(theory: TheoryDef, phi: Formula, sizes) -> Optional[tuple]:
    """First (structure, assignment) satisfying theory + `phi` at exact sizes."""
    fv = free_vars(phi)
    for A in enumerate_models(theory, sizes):
        for nu in assignments_over(A, fv):
            if satisfies(A, nu, phi):
                return (A, nu)
    return None


def check_sat(
    theory: TheoryDef,
    phi: Formula,
    bound,
    minimums: Optional[Mapping[str, int]] = None,
) -> Optional[tuple]:
    """Bounded satisfiability: search all size profiles <= `bound`.

    Returns the first witness in canonical order, or None if no model with
    all domain sizes within the bound satisfies theory + `phi`.
    """
    for sizes in size_profiles(theory.signature, bound, minimums):
        hit = check_sat_at(theory, phi, sizes)
        if hit is not None:
            return hit
    return None


def satisfiable_profiles(theory: TheoryDef, phi: Formula, bound) -> tuple:
    """All size profiles <= `bound` at which theory + `phi` is satisfiable."""
    out = []
    for sizes in size_profiles(theory.signature, bound):
        if check_sat_at(theory, phi, sizes) is not None:
            out.append(tuple(sizes[s] for s in theory.signature.sorts))
    return tuple(out)


def equivalent_up_to_size(
    phi: Formula,
    psi: Formula,
    sig: Signature,
    bound: int,
) -> Optional[tuple]:
    """Exhaustively compare `phi` and `psi` on every structure with all
    domains <= `bound` and every assignment of their free variables.

    Returns None when they agree everywhere, else a (structure, assignment)
    counterexample.
    """
    empty = TheoryDef(sig, ())
    fv = free_vars(phi).union(free_vars(psi))
    for sizes in size_profiles(sig, bound):
        for A in enumerate_models(empty, sizes):
            for nu in assignments_over(A, fv):
                if satisfies(A, nu, phi) != satisfies(A, nu, psi):
                    return (A, nu)
    return None


# ---------------------------------------------------------------------------
# Substructures
# ---------------------------------------------------------------------------

def generated_substructure(A: FiniteStructure, seeds: Mapping[str, Iterable]) -> FiniteStructure:
    """Least substructure of `A` containing `seeds`, closed under all functions.

    Predicate tables are restricted.  Raises EmptySortError if some sort ends
    up empty.  Idempotent: applying it to its own output is the identity.
    """
    sig = A.signature
    current = {s: set(seeds.get(s, ())) for s in sig.sorts}
    for s, elems in current.items():
        bad = elems - set(A.domains[s])
        if bad:
            raise SortCheckError(f"seed elements {sorted(map(repr, bad))} not in sort {s!r}")
    changed = True
    while changed:
        changed = False
        for fname, (arg_sorts, res) in sig.functions.items():
            table = A.functions[fname]
            pools = [sorted(current[s], key=A.domains[s].index) for s in arg_sorts]
            if any(not p for p in pools):
                continue
            for args in itertools.product(*pools):
                val = table[args]
                if val not in current[res]:
                    current[res].add(val)
                    changed = True
    for s in sig.sorts:
        if not current[s]:
            raise EmptySortError(f"generated substructure has empty domain for sort {s!r}")
    domains = {s: tuple(e for e in A.domains[s] if e in current[s]) for s in sig.sorts}
    functions = {}
    for fname, (arg_sorts, res) in sig.functions.items():
        table = A.functions[fname]
        keys = itertools.product(*(domains[s] for s in arg_sorts))
        functions[fname] = {k: table[k] for k in keys}
    predicates = {}
    for pname, arg_sorts in sig.predicates.items():
        keep = set(itertools.product(*(domains[s] for s in arg_sorts)))
        predicates[pname] = frozenset(t for t in A.predicates[pname] if t in keep)
    return FiniteStructure(sig, domains, functions, predicates)


def is_substructure(A: FiniteStructure, B: FiniteStructure) -> bool:
    """True iff `A` is a substructure of `B` (domains included, tables agree)."""
    if A.signature != B.signature:
        return False
    for s in A.signature.sorts:
        if not set(A.domains[s]) <= set(B.domains[s]):
            return False
    for fname, table in A.functions.items():
        btable = B.functions[fname]
        for args, val in table.items():
            if btable[args] != val:
                return False
    for pname, tuples in A.predicates.items():
        dom_tuples = set(
            itertools.product(*(A.domains[s] for s in A.signature.predicates[pname]))
        )
        if tuples != B.predicates[pname] & frozenset(dom_tuples):
            return False
    return True


# ---------------------------------------------------------------------------
# Isomorphism
# ---------------------------------------------------------------------------

def isomorphic(A: FiniteStructure, B: FiniteStructure) -> bool:
    """Sort-respecting bijection preserving all tables both ways.

    Backtracking over per-sort bijections; intended for desk-scale domains.
    """
    if A.signature != B.signature:
        raise SortCheckError("isomorphism requires identical signatures")
    sig = A.signature
    for s in sig.sorts:
        if len(A.domains[s]) != len(B.domains[s]):
            return False
    for pname in sig.predicates:
        if len(A.predicates[pname]) != len(B.predicates[pname]):
            return False

    sort_names = list(sig.sorts)

    def extend(i, mapping):
        if i == len(sort_names):
            return _check_iso(A, B, mapping)
        s = sort_names[i]
        for perm in itertools.permutations(B.domains[s]):
            mapping[s] = dict(zip(A.domains[s], perm))
            if extend(i + 1, mapping):
                return True
        mapping.pop(s, None)
        return False

    return extend(0, {})


def _check_iso(A, B, mapping) -> bool:
    sig = A.signature
    for fname, (arg_sorts, res) in sig.functions.items():
        fa, fb = A.functions[fname], B.functions[fname]
        for args, val in fa.items():
            mapped = tuple(mapping[s][a] for s, a in zip(arg_sorts, args))
            if fb[mapped] != mapping[res][val]:
                return False
    for pname, arg_sorts in sig.predicates.items():
        pa, pb = A.predicates[pname], B.predicates[pname]
        for args in pa:
            mapped = tuple(mapping[s][a] for s, a in zip(arg_sorts, args))
            if mapped not in pb:
                return False
        if len(pa) != len(pb):
            return False
    return True


# ---------------------------------------------------------------------------
# Bounded-rank formula enumeration
# ---------------------------------------------------------------------------
#
# The checks below decide agreement on sentences up to a quantifier rank and
# per-sort variable budget.  Any such sentence is equivalent to a boolean
# combination of "basis" sentences generated by the grammar
#
#     B_0(ctx)  = atoms over ctx (terms nested up to `term_depth`)
#     B_k(ctx)  = B_{k-1}(ctx)  |  exists x . (cube of +/- literals over
#                                              B_{k-1}(ctx + x))
#
# because existential quantifiers distribute over the disjunctive normal form
# of their body.  Agreement on every basis sentence therefore implies
# agreement on every sentence within the budget, and a single disagreeing
# basis sentence is a definite separator.  The full basis is doubly
# exponential, so a positive answer is only attempted while the enumeration
# stays below the configured cap; a cheaper "chain" fragment (one nested cube
# per level) is scanned first to find separators early.

_BoundVarPrefix = "_v"


def _terms_over(sig: Signature, ctx: Sequence[tuple], depth: int) -> dict:
    """Terms of nesting depth <= `depth` over context variables, per sort."""
    by_sort: dict = {s: [] for s in sig.sorts}
    for name, sort in ctx:
        by_sort[sort].append(Var(name, sort))
    for fname, (arg_sorts, res) in sig.functions.items():
        if not arg_sorts:
            by_sort[res].append(App(fname, (), res))
    current = {s: list(v) for s, v in by_sort.items()}
    for _ in range(1, depth):
        new_layer: dict = {s: [] for s in sig.sorts}
        for fname, (arg_sorts, res) in sig.functions.items():
            if not arg_sorts:
                continue
            pools = [current[s] for s in arg_sorts]
            if any(not p for p in pools):
                continue
            for args in itertools.product(*pools):
                new_layer[res].append(App(fname, tuple(args), res))
        for s in sig.sorts:
            seen = set(map(print_term_key, current[s]))
            for t in new_layer[s]:
                k = print_term_key(t)
                if k not in seen:
                    current[s].append(t)
                    seen.add(k)
    return current


def print_term_key(t: Term) -> str:
    return print_term(t)


def _atoms_over(sig: Signature, ctx: Sequence[tuple], depth: int) -> list:
    terms = _terms_over(sig, ctx, depth)
    atoms = []
    for s in sig.sorts:
        pool = sorted(terms[s], key=print_term_key)
        for i in range(len(pool)):
            for j in range(i + 1, len(pool)):
                atoms.append(Eq(pool[i], pool[j]))
    for pname, arg_sorts in sig.predicates.items():
        pools = [sorted(terms[s], key=print_term_key) for s in arg_sorts]
        if any(not p for p in pools):
            continue
        for args in itertools.product(*pools):
            atoms.append(PredApp(pname, tuple(args)))
    return atoms


class _Budget:
    def __init__(self, cap):
        self.cap = cap
        self.used = 0

    def spend(self, n=1):
        self.used += n
        if self.used > self.cap:
            raise CapExceededError(
                f"formula enumeration exceeded cap of {self.cap}"
            )


def _full_basis(sig, ctx, rank, vars_per_sort, depth, budget) -> list:
    """The complete basis for (rank, ctx); raises CapExceededError if too big."""
    out = list(_atoms_over(sig, ctx, depth))
    budget.spend(len(out))
    if rank == 0:
        return out
    counts = {s: sum(1 for _, s2 in ctx if s2 == s) for s in sig.sorts}
    for sort in sig.sorts:
        if counts.get(sort, 0) >= vars_per_sort:
            continue
        x = f"{_BoundVarPrefix}{len(ctx)}"
        sub = _full_basis(sig, ctx + ((x, sort),), rank - 1, vars_per_sort, depth, budget)
        # Every +/-/absent selection over the sub-basis; skip the empty cube
        # of an unused bound variable only when it adds nothing new.
        n = len(sub)
        if n > 0:
            est = 3 ** n
            budget.spend(est)
        for flags in itertools.product((0, 1, 2), repeat=n):
            lits = []
            for f, sf in zip(flags, sub):
                if f == 1:
                    lits.append(sf)
                elif f == 2:
                    lits.append(Not(sf))
            if not lits:
                out.append(Exists(x, sort, Top()))
            else:
                out.append(Exists(x, sort, conj(lits)))
    return out


def _chain_formulas(sig, ctx, rank, vars_per_sort, depth, budget) -> list:
    """A cheap separator-search fragment: one nested cube per rank level."""
    if rank == 0:
        return []
    out = []
    counts = {s: sum(1 for _, s2 in ctx if s2 == s) for s in sig.sorts}
    for sort in sig.sorts:
        if counts.get(sort, 0) >= vars_per_sort:
            continue
        x = f"{_BoundVarPrefix}{len(ctx)}"
        new_ctx = ctx + ((x, sort),)
        atoms = _atoms_over(sig, new_ctx, depth)
        tails = [None] + _chain_formulas(sig, new_ctx, rank - 1, vars_per_sort, depth, budget)
        for flags in itertools.product((0, 1, 2), repeat=len(atoms)):
            lits = []
            for f, a in zip(flags, atoms):
                if f == 1:
                    lits.append(a)
                elif f == 2:
                    lits.append(Not(a))
            for tail in tails:
                budget.spend()
                body = lits + ([tail] if tail is not None else [])
                out.append(Exists(x, sort, conj(body) if body else Top()))
    return out


def _formula_order_key(phi):
    return (_formula_size(phi), print_formula(phi))


def _formula_size(phi) -> int:
    if isinstance(phi, (Top, Bottom, Eq, PredApp)):
        return 1
    if isinstance(phi, Not):
        return _formula_size(phi.body)
    if isinstance(phi, (And, Or)):
        return sum(_formula_size(p) for p in phi.parts)
    if isinstance(phi, Implies):
        return _formula_size(phi.lhs) + _formula_size(phi.rhs)
    return 1 + _formula_size(phi.body)


def elem_equiv_up_to(
    A: FiniteStructure,
    B: FiniteStructure,
    rank: int,
    vars_per_sort: int,
    term_depth: int = 1,
    cap: int = DEFAULT_FORMULA_CAP,
) -> bool:
    """Do `A` and `B` agree on all sentences up to the given quantifier rank
    and per-sort variable budget?

    Isomorphic structures agree at every rank, so that case returns True
    immediately.  Otherwise a cheap chain fragment is scanned for a
    separating sentence (a verified False), and finally the full basis is
    enumerated under `cap`, whose exhaustion without disagreement proves
    True.  Raises CapExceededError when neither route is conclusive.
    """
    if A.signature != B.signature:
        raise SortCheckError("structures must share a signature")
    if isomorphic(A, B):
        return True
    sig = A.signature
    chain = _chain_formulas(sig, (), rank, vars_per_sort, term_depth, _Budget(cap))
    for phi in sorted(chain, key=_formula_order_key):
        if satisfies(A, {}, phi) != satisfies(B, {}, phi):
            return False
    basis = _full_basis(sig, (), rank, vars_per_sort, term_depth, _Budget(cap))
    for phi in sorted(basis, key=_formula_order_key):
        if satisfies(A, {}, phi) != satisfies(B, {}, phi):
            return False
    return True


def tarski_vaught_check(
    A: FiniteStructure,
    B: FiniteStructure,
    rank: int,
    vars_per_sort: int = 1,
    term_depth: int = 1,
    cap: int = DEFAULT_FORMULA_CAP,
) -> bool:
    """Bounded existential-witness reflection test for A inside B.

    For every enumerated formula phi(ctx, v) and assignment of ctx into `A`,
    checks that `B` satisfying (exists v . phi) implies `A` does too, over
    all tested sentences of total quantifier rank <= `rank`.  Rank counts
    the tested existential itself, so rank 0 checks nothing beyond the
    substructure relation.  Raises NotASubstructureError when `A` is not a
    substructure of `B`, and CapExceededError when the enumeration cannot be
    completed within `cap`.
    """
    if not is_substructure(A, B):
        raise NotASubstructureError("first structure is not a substructure of the second")
    if A == B or rank <= 0:
        return True
    sig = A.signature

    ctx = []
    for s in sig.sorts:
        for i in range(vars_per_sort):
            ctx.append((f"x{i}_{s}", s))
    ctx = tuple(ctx)

    def reflected(phi, sort_v, ctx_vars) -> bool:
        fv = VariableSet.from_pairs(ctx_vars)
        for nu in assignments_over(A, fv):
            target = Exists(f"{_BoundVarPrefix}{len(ctx_vars)}", sort_v, phi)
            if satisfies(B, nu, target) and not satisfies(A, nu, target):
                return False
        return True

    # Chain fragment first (cheap separators), then the full basis.
    for maker in (_chain_cubes_for_tv, _full_cubes_for_tv):
        outcome = maker(sig, ctx, rank, vars_per_sort, term_depth, cap, reflected)
        if outcome is False:
            return False
        if outcome is True:
            return True
    raise CapExceededError("tarski-vaught enumeration exceeded cap")


def _chain_cubes_for_tv(sig, ctx, rank, vps, depth, cap, reflected):
    budget = _Budget(cap)
    for sort_v in sig.sorts:
        v = f"{_BoundVarPrefix}{len(ctx)}"
        inner_ctx = ctx + ((v, sort_v),)
        atoms = _atoms_over(sig, inner_ctx, depth)
        try:
            tails = [None] + _chain_formulas(sig, inner_ctx, rank - 1, vps, depth, budget)
        except CapExceededError:
            return None
        for flags in itertools.product((0, 1, 2), repeat=len(atoms)):
            lits = []
            for f, a in zip(flags, atoms):
                if f == 1:
                    lits.append(a)
                elif f == 2:
                    lits.append(Not(a))
            for tail in tails:
                body = lits + ([tail] if tail is not None else [])
                phi = conj(body) if body else Top()
                if not reflected(phi, sort_v, ctx):
                    return False
    return None


def _full_cubes_for_tv(sig, ctx, rank, vps, depth, cap, reflected):
    budget = _Budget(cap)
    for sort_v in sig.sorts:
        v = f"{_BoundVarPrefix}{len(ctx)}"
        inner_ctx = ctx + ((v, sort_v),)
        try:
            sub = _full_basis(sig, inner_ctx, rank - 1, vps, depth, budget)
            budget.spend(3 ** len(sub) if sub else 1)
        except CapExceededError:
            return None
        for flags in itertools.product((0, 1, 2), repeat=len(sub)):
            lits = []
            for f, sf in zip(flags, sub):
                if f == 1:
                    lits.append(sf)
                elif f == 2:
                    lits.append(Not(sf))
            phi = conj(lits) if lits else Top()
            if not reflected(phi, sort_v, ctx):
                return False
    return True
