"""Formula transformations: prenex form, Skolemization, block-local normal
forms for split signatures, and cardinality formula generators.

All transforms are pure and deterministic.  Quantifier pulling is
left-to-right with "_<counter>" renaming; Skolem symbols use the reserved
"sk_<counter>" prefix.  The block-local normal forms can blow up
exponentially; a node-count cap aborts with CapExceededError.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .errors import CapExceededError, SortCheckError
from .syntax import (
    And,
    App,
    Bottom,
    Eq,
    Exists,
    FALSE,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    PredApp,
    RESERVED_PREFIX,
    Signature,
    TRUE,
    Term,
    Top,
    Var,
    conj,
    disj,
    free_vars,
)

DEFAULT_NODE_CAP = 100_000


# ---------------------------------------------------------------------------
# Substitution and renaming helpers
# ---------------------------------------------------------------------------

def _subst_term(t: Term, mapping: dict) -> Term:
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    if not t.args:
        return t
    return App(t.fn, tuple(_subst_term(a, mapping) for a in t.args), t.sort)


def _subst(phi: Formula, mapping: dict) -> Formula:
    """Capture-naive substitution of variables by terms; callers guarantee
    binders never shadow mapped names (holds after renaming apart)."""
    if not mapping:
        return phi
    if isinstance(phi, (Top, Bottom)):
        return phi
    if isinstance(phi, Eq):
        return Eq(_subst_term(phi.lhs, mapping), _subst_term(phi.rhs, mapping))
    if isinstance(phi, PredApp):
        return PredApp(phi.name, tuple(_subst_term(a, mapping) for a in phi.args))
    if isinstance(phi, Not):
        return Not(_subst(phi.body, mapping))
    if isinstance(phi, And):
        return And(tuple(_subst(p, mapping) for p in phi.parts))
    if isinstance(phi, Or):
        return Or(tuple(_subst(p, mapping) for p in phi.parts))
    if isinstance(phi, Implies):
        return Implies(_subst(phi.lhs, mapping), _subst(phi.rhs, mapping))
    if isinstance(phi, (Forall, Exists)):
        inner = {k: v for k, v in mapping.items() if k != phi.var}
        ctor = type(phi)
        return ctor(phi.var, phi.sort, _subst(phi.body, inner))
    raise TypeError(f"not a formula: {phi!r}")


def _all_var_names(phi: Formula) -> set:
    names: set = set()

    def walk_term(t):
        if isinstance(t, Var):
            names.add(t.name)
        else:
            for a in t.args:
                walk_term(a)

    def walk(f):
        if isinstance(f, (Top, Bottom)):
            return
        if isinstance(f, Eq):
            walk_term(f.lhs)
            walk_term(f.rhs)
        elif isinstance(f, PredApp):
            for a in f.args:
                walk_term(a)
        elif isinstance(f, Not):
            walk(f.body)
        elif isinstance(f, (And, Or)):
            for p in f.parts:
                walk(p)
        elif isinstance(f, Implies):
            walk(f.lhs)
            walk(f.rhs)
        else:
            names.add(f.var)
            walk(f.body)

    walk(phi)
    return names


def _rename_apart(phi: Formula) -> Formula:
    """Rename bound variables so no name is bound twice anywhere in the
    formula or shadows a free variable; renames use "_<counter>" suffixes,
    smallest free counter."""
    used = set(_all_var_names(phi))
    free_names = {n for _, names in free_vars(phi).sorted_items() for n in names}
    taken = set(free_names)
    counter = [0]

    def fresh(base):
        while True:
            cand = f"{base}_{counter[0]}"
            counter[0] += 1
            if cand not in used:
                used.add(cand)
                return cand

    def walk(f, env):
        if isinstance(f, (Top, Bottom)):
            return f
        if isinstance(f, Eq):
            return Eq(_subst_term(f.lhs, env), _subst_term(f.rhs, env))
        if isinstance(f, PredApp):
            return PredApp(f.name, tuple(_subst_term(a, env) for a in f.args))
        if isinstance(f, Not):
            return Not(walk(f.body, env))
        if isinstance(f, And):
            return And(tuple(walk(p, env) for p in f.parts))
        if isinstance(f, Or):
            return Or(tuple(walk(p, env) for p in f.parts))
        if isinstance(f, Implies):
            return Implies(walk(f.lhs, env), walk(f.rhs, env))
        if isinstance(f, (Forall, Exists)):
            name = f.var
            if name in taken:
                new = fresh(name)
                env = {**env, name: Var(new, f.sort)}
                name = new
            taken.add(name)
            return type(f)(name, f.sort, walk(f.body, env))
        raise TypeError(f"not a formula: {f!r}")

    return walk(phi, {})


# ---------------------------------------------------------------------------
# Prenex normal form
# ---------------------------------------------------------------------------

def to_pnf(phi: Formula) -> Formula:
    """Equivalent formula with all quantifiers pulled to a prefix.

    Bound variables are first renamed apart (capture avoidance); the prefix
    is assembled left-to-right, flipping quantifier kinds under negation and
    in the antecedent of an implication.
    """
    prefix, matrix = _pull(_rename_apart(phi))
    out = matrix
    for kind, var, sort in reversed(prefix):
        out = kind(var, sort, out)
    return out


def _pull(phi: Formula):
    if isinstance(phi, (Top, Bottom, Eq, PredApp)):
        return [], phi
    if isinstance(phi, Not):
        prefix, matrix = _pull(phi.body)
        return [_flip(q) for q in prefix], Not(matrix)
    if isinstance(phi, (And, Or)):
        full_prefix = []
        matrices = []
        for p in phi.parts:
            prefix, matrix = _pull(p)
            full_prefix.extend(prefix)
            matrices.append(matrix)
        return full_prefix, type(phi)(tuple(matrices))
    if isinstance(phi, Implies):
        pl, ml = _pull(phi.lhs)
        pr, mr = _pull(phi.rhs)
        return [_flip(q) for q in pl] + pr, Implies(ml, mr)
    if isinstance(phi, (Forall, Exists)):
        prefix, matrix = _pull(phi.body)
        return [(type(phi), phi.var, phi.sort)] + prefix, matrix
    raise TypeError(f"not a formula: {phi!r}")


def _flip(q):
    kind, var, sort = q
    return (Exists if kind is Forall else Forall, var, sort)


def split_prenex(phi: Formula):
    """Decompose a prenex formula into (prefix, matrix)."""
    prefix = []
    while isinstance(phi, (Forall, Exists)):
        prefix.append((type(phi), phi.var, phi.sort))
        phi = phi.body
    return prefix, phi


def is_quantifier_free(phi: Formula) -> bool:
    if isinstance(phi, (Top, Bottom, Eq, PredApp)):
        return True
    if isinstance(phi, Not):
        return is_quantifier_free(phi.body)
    if isinstance(phi, (And, Or)):
        return all(is_quantifier_free(p) for p in phi.parts)
    if isinstance(phi, Implies):
        return is_quantifier_free(phi.lhs) and is_quantifier_free(phi.rhs)
    return False


# ---------------------------------------------------------------------------
# Skolemization
# ---------------------------------------------------------------------------

def skolemize(phi: Formula, sig: Signature) -> tuple:
    """Universal sentence equisatisfiable with the sentence `phi`, plus the
    signature extended with the fresh Skolem functions it uses.

    Each existential bound under universals x1..xn is replaced by a fresh
    function sk_<counter>(x1..xn); with no enclosing universals the symbol is
    a fresh constant.  Every model of `phi` expands to a model of the result
    with the same domains, and every model of the result is a model of
    `phi`, so satisfiability is preserved profile by profile.
    """
    if not free_vars(phi).is_empty():
        raise SortCheckError("skolemize expects a sentence")
    counter = 0
    for name in sig.functions:
        if name.startswith(RESERVED_PREFIX):
            tail = name[len(RESERVED_PREFIX):]
            if tail.isdigit():
                counter = max(counter, int(tail) + 1)
    prefix, matrix = split_prenex(to_pnf(phi))
    universals: list = []
    mapping: dict = {}
    new_functions: dict = {}
    for kind, var, sort in prefix:
        if kind is Forall:
            universals.append((var, sort))
        else:
            name = f"{RESERVED_PREFIX}{counter}"
            counter += 1
            arg_sorts = tuple(s for _, s in universals)
            new_functions[name] = (arg_sorts, sort)
            args = tuple(Var(v, s) for v, s in universals)
            mapping[var] = App(name, args, sort)
    matrix = _subst(matrix, mapping)
    out = matrix
    for var, sort in reversed(universals):
        out = Forall(var, sort, out)
    for name in new_functions:
        if name in sig.functions or name in sig.predicates:
            raise SortCheckError(f"symbol {name!r} already declared")
    merged = {**sig.functions, **new_functions}
    try:
        extended = Signature(sig.sorts, merged, sig.predicates, sig.split)
    except SortCheckError:
        # A witness for an existential of one block under universals of
        # another crosses blocks; the extension is then no longer split.
        extended = Signature(sig.sorts, merged, sig.predicates, None)
    return extended, out


# ---------------------------------------------------------------------------
# Split signatures and block-local normal forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitContext:
    """A signature with a validated split, plus the sort -> block map."""

    signature: Signature

    def __post_init__(self):
        if self.signature.split is None:
            raise SortCheckError("signature has no split declaration")

    @property
    def blocks(self) -> tuple:
        return self.signature.split

    def block_of(self, sort: str) -> int:
        return self.signature.block_of(sort)

    def blocks_touched(self, phi: Formula) -> frozenset:
        """Indexes of the split blocks whose sorts or symbols occur in `phi`.

        true/false touch no block and are treated as block-neutral.
        """
        acc: set = set()

        def walk_term(t):
            acc.add(self.block_of(t.sort))
            if isinstance(t, App):
                for a in t.args:
                    walk_term(a)

        def walk(f):
            if isinstance(f, (Top, Bottom)):
                return
            if isinstance(f, Eq):
                walk_term(f.lhs)
                walk_term(f.rhs)
            elif isinstance(f, PredApp):
                for a in f.args:
                    walk_term(a)
                for s in self.signature.predicates[f.name]:
                    acc.add(self.block_of(s))
            elif isinstance(f, Not):
                walk(f.body)
            elif isinstance(f, (And, Or)):
                for p in f.parts:
                    walk(p)
            elif isinstance(f, Implies):
                walk(f.lhs)
                walk(f.rhs)
            else:
                acc.add(self.block_of(f.sort))
                walk(f.body)

        walk(phi)
        return frozenset(acc)


def _is_block_local(ctx: SplitContext, phi: Formula) -> Optional[int]:
    """The unique block `phi` touches, None for block-neutral formulas.

    Raises SortCheckError if `phi` crosses blocks.
    """
    touched = ctx.blocks_touched(phi)
    if len(touched) > 1:
        raise SortCheckError("formula crosses split blocks")
    return next(iter(touched)) if touched else None


def is_gdnf(phi: Formula, ctx: SplitContext) -> bool:
    """Shape test: disjunction of conjunctions of block-local formulas with
    pairwise distinct blocks (block-neutral conjuncts allowed anywhere)."""
    parts = phi.parts if isinstance(phi, Or) else (phi,)
    return all(_is_generalized_cube(p, ctx, And) for p in parts)


def is_gcnf(phi: Formula, ctx: SplitContext) -> bool:
    """Dual shape test: conjunction of disjunctions of block-local formulas
    with pairwise distinct blocks."""
    parts = phi.parts if isinstance(phi, And) else (phi,)
    return all(_is_generalized_cube(p, ctx, Or) for p in parts)


def _is_generalized_cube(phi: Formula, ctx: SplitContext, inner) -> bool:
    # A formula touching at most one block is a one-component cube/clause
    # whatever its internal shape (the single-constituent case).
    if len(ctx.blocks_touched(phi)) <= 1:
        return True
    if not isinstance(phi, inner):
        return False
    seen: set = set()
    for p in phi.parts:
        try:
            block = _is_block_local(ctx, p)
        except SortCheckError:
            return False
        if block is None:
            continue
        if block in seen:
            return False
        seen.add(block)
    return True


# Internal normal forms are lists of cubes/clauses; a cube (clause) is a dict
# mapping block index -> list of block-local formulas, conjoined (disjoined)
# on rendering.  An empty cube list means false (true for clauses).  The
# pseudo-block _NEUTRAL holds block-free literals (falsum).

_NEUTRAL = -1

def _nnf(phi: Formula, positive: bool = True) -> Formula:
    if isinstance(phi, Top):
        return TRUE if positive else FALSE
    if isinstance(phi, Bottom):
        return FALSE if positive else TRUE
    if isinstance(phi, (Eq, PredApp)):
        return phi if positive else Not(phi)
    if isinstance(phi, Not):
        return _nnf(phi.body, not positive)
    if isinstance(phi, And):
        parts = tuple(_nnf(p, positive) for p in phi.parts)
        return And(parts) if positive else Or(parts)
    if isinstance(phi, Or):
        parts = tuple(_nnf(p, positive) for p in phi.parts)
        return Or(parts) if positive else And(parts)
    if isinstance(phi, Implies):
        if positive:
            return Or((_nnf(phi.lhs, False), _nnf(phi.rhs, True)))
        return And((_nnf(phi.lhs, True), _nnf(phi.rhs, False)))
    if isinstance(phi, Forall):
        ctor = Forall if positive else Exists
        return ctor(phi.var, phi.sort, _nnf(phi.body, positive))
    if isinstance(phi, Exists):
        ctor = Exists if positive else Forall
        return ctor(phi.var, phi.sort, _nnf(phi.body, positive))
    raise TypeError(f"not a formula: {phi!r}")


def _canon_entry(formulas) -> tuple:
    from .syntax import print_formula as pf

    seen = {}
    for f in formulas:
        seen.setdefault(pf(f), f)
    return tuple(seen[k] for k in sorted(seen))


def _canon_shape(shape: dict) -> dict:
    return {b: _canon_entry(v) for b, v in shape.items()}


def _shape_key(shape: dict) -> tuple:
    from .syntax import print_formula as pf

    return tuple(
        (b, tuple(pf(f) for f in shape[b])) for b in sorted(shape)
    )


def _dedupe_shapes(shapes: list) -> list:
    seen = set()
    out = []
    for s in shapes:
        s = _canon_shape(s)
        key = _shape_key(s)
        if key not in seen:
            seen.add(key)
            out.append(s)
    return out


def _qf_to_cubes(phi: Formula, ctx: SplitContext, cap) -> list:
    """Quantifier-free formula -> list of cubes (block -> literal tuple)."""
    nnf = _nnf(phi)

    def rec(f) -> list:
        # Truth constants stay as neutral literals rather than absorbing or
        # pruning their branch, so the free-variable set is preserved.
        if isinstance(f, Top):
            return [{_NEUTRAL: (TRUE,)}]
        if isinstance(f, Bottom):
            return [{_NEUTRAL: (FALSE,)}]
        if isinstance(f, (Eq, PredApp)) or (
            isinstance(f, Not) and isinstance(f.body, (Eq, PredApp))
        ):
            block = _is_block_local(ctx, f)
            return [{block: (f,)} if block is not None else {}]
        if isinstance(f, Or):
            out = []
            for p in f.parts:
                out.extend(rec(p))
            out = _dedupe_shapes(out)
            cap.spend(len(out))
            return out
        if isinstance(f, And):
            acc = [{}]
            for p in f.parts:
                sub = rec(p)
                cap.spend(len(acc) * len(sub))
                acc = _dedupe_shapes(
                    [_merge_cubes(a, b) for a in acc for b in sub]
                )
            return acc
        raise TypeError(f"unexpected connective in matrix: {f!r}")

    return rec(nnf)


def _merge_cubes(a: dict, b: dict) -> dict:
    out = {k: tuple(v) for k, v in a.items()}
    for k, v in b.items():
        out[k] = out.get(k, ()) + tuple(v)
    return out


class _NodeCap:
    def __init__(self, cap):
        self.cap = cap
        self.used = 0

    def spend(self, n):
        self.used += n
        if self.used > self.cap:
            raise CapExceededError(f"normal-form size exceeded cap of {self.cap}")


def _cubes_to_formula(cubes: list, ctx: SplitContext, outer=Or, inner=And) -> Formula:
    """Render; blocks in split declaration order inside each cube."""
    make_inner = conj if inner is And else disj
    make_outer = disj if outer is Or else conj
    rendered = []
    for cube in cubes:
        comps = []
        for block in sorted(cube):
            comps.append(make_inner(cube[block]))
        if not comps:
            rendered.append(TRUE if inner is And else FALSE)
        else:
            rendered.append(make_inner(comps))
    return make_outer(rendered)


def _gdnf_cubes(prefix, matrix, ctx, cap) -> list:
    if not prefix:
        return _qf_to_cubes(matrix, ctx, cap)
    (kind, var, sort), rest = prefix[0], prefix[1:]
    block = ctx.block_of(sort)
    if kind is Exists:
        cubes = _gdnf_cubes(rest, matrix, ctx, cap)
        out = []
        for cube in cubes:
            new = {k: list(v) for k, v in cube.items()}
            if block in new:
                new[block] = [Exists(var, sort, conj(new[block]))]
            # A variable of this sort can only occur in this block's
            # component, so otherwise the quantifier drops.
            out.append(new)
        return out
    clauses = _gcnf_clauses(prefix, matrix, ctx, cap)
    return _distribute(clauses, disj, cap)


def _gcnf_clauses(prefix, matrix, ctx, cap) -> list:
    if not prefix:
        cubes = _qf_to_cubes(matrix, ctx, cap)
        return _distribute(cubes, conj, cap)
    (kind, var, sort), rest = prefix[0], prefix[1:]
    block = ctx.block_of(sort)
    if kind is Forall:
        clauses = _gcnf_clauses(rest, matrix, ctx, cap)
        out = []
        for clause in clauses:
            new = {k: list(v) for k, v in clause.items()}
            if block in new:
                new[block] = [Forall(var, sort, disj(new[block]))]
            out.append(new)
        return out
    cubes = _gdnf_cubes(prefix, matrix, ctx, cap)
    return _distribute(cubes, conj, cap)


def _distribute(shapes: list, fold, cap) -> list:
    """Distributivity step turning cubes into clauses or vice versa.

    `fold` joins a source shape's block entries into one component (conj
    for cubes, disj for clauses).  Every result shape picks one (block,
    component) from each source shape, grouped by block, so components
    stay block-local.  Processing is iterative with deduplication after
    every step, which keeps the intermediate lists no larger than the
    number of distinct result shapes.  An empty shape list and an empty
    shape are the neutral and absorbing elements of the source connective;
    both dualize to the other representation's conventions.
    """
    if not shapes:
        return [{}]
    if any(not s for s in shapes):
        return []
    acc: list = [{}]
    for shape in shapes:
        choices = [(b, fold(parts)) for b, parts in sorted(shape.items())]
        cap.spend(len(acc) * len(choices))
        merged = []
        for partial in acc:
            for block, comp in choices:
                new = {k: tuple(v) for k, v in partial.items()}
                new[block] = new.get(block, ()) + (comp,)
                merged.append(new)
        acc = _dedupe_shapes(merged)
    return acc


def to_gdnf(phi: Formula, ctx: SplitContext, node_cap: int = DEFAULT_NODE_CAP) -> Formula:
    """Equivalent disjunction of generalized cubes over the split signature.

    Prenexes first, then pushes each quantifier into the component of its
    sort's block, detouring through the clause form for universal steps.
    Cube components are ordered by block index.
    """
    cap = _NodeCap(node_cap)
    prefix, matrix = split_prenex(to_pnf(phi))
    cubes = _gdnf_cubes(prefix, matrix, ctx, cap)
    out = _cubes_to_formula(cubes, ctx, outer=Or, inner=And)
    return out


def to_gcnf(phi: Formula, ctx: SplitContext, node_cap: int = DEFAULT_NODE_CAP) -> Formula:
    """Equivalent conjunction of generalized clauses; dual of to_gdnf."""
    cap = _NodeCap(node_cap)
    prefix, matrix = split_prenex(to_pnf(phi))
    clauses = _gcnf_clauses(prefix, matrix, ctx, cap)
    return _cubes_to_formula(clauses, ctx, outer=And, inner=Or)


# ---------------------------------------------------------------------------
# Cardinality formulas
# ---------------------------------------------------------------------------

def at_least_formula(sort: str, n: int) -> Formula:
    """There are at least n elements of `sort`: exists x1..xn, pairwise
    distinct.  For n <= 1 this is equivalent to true (domains are nonempty)
    and true is returned."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n <= 1:
        return TRUE
    names = [f"x{i}" for i in range(1, n + 1)]
    pairs = [
        Not(Eq(Var(a, sort), Var(b, sort)))
        for a, b in itertools.combinations(names, 2)
    ]
    body = conj(pairs)
    out = body
    for name in reversed(names):
        out = Exists(name, sort, out)
    return out


def exact_cardinality_formula(sort: str, n: int) -> Formula:
    """Satisfied exactly by structures whose `sort` has n elements."""
    if n < 1:
        raise ValueError("n must be at least 1")
    lower = at_least_formula(sort, n)
    upper = Not(at_least_formula(sort, n + 1))
    if isinstance(lower, Top):
        return upper
    return And((lower, upper))
