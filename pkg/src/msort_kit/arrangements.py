"""Set partitions of sorted variable sets and their arrangement formulas.

An arrangement fixes, per sort, an equivalence relation on a finite variable
set; its formula conjoins the implied equalities and disequalities.  Partition
enumeration uses restricted growth strings, so streams are deterministic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import CapExceededError, EvalError
from .syntax import And, Eq, Formula, Not, TRUE, Var, VariableSet, free_vars
from .semantics import Assignment, FiniteStructure, eval_term

DEFAULT_PARTITION_CAP = 10
BELL_CAP = 20


def enumerate_partitions(items: Sequence, cap: int = DEFAULT_PARTITION_CAP) -> list:
    """All set partitions of `items`, in restricted-growth-string order.

    Each partition is a tuple of blocks; each block is a tuple in the input
    order of `items`.  Blocks appear in order of their first element.
    """
    items = list(items)
    if len(set(items)) != len(items):
        raise ValueError("items must be distinct")
    if len(items) > cap:
        raise CapExceededError(f"partition enumeration capped at {cap} items")
    n = len(items)
    if n == 0:
        return [()]
    out = []
    for rgs in _growth_strings(n):
        nblocks = max(rgs) + 1
        blocks = [[] for _ in range(nblocks)]
        for idx, b in enumerate(rgs):
            blocks[b].append(items[idx])
        out.append(tuple(tuple(b) for b in blocks))
    return out


def _growth_strings(n: int) -> Iterator[tuple]:
    """Restricted growth strings of length n: a[0]=0, a[i] <= max(prefix)+1."""
    a = [0] * n

    def rec(i, mx):
        if i == n:
            yield tuple(a)
            return
        for v in range(mx + 2):
            a[i] = v
            yield from rec(i + 1, max(mx, v))

    yield from rec(1, 0) if n > 1 else iter([(0,)])


def bell(n: int) -> int:
    """Number of set partitions of an n-element set."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > BELL_CAP:
        raise CapExceededError(f"bell() capped at n <= {BELL_CAP}")
    # Bell triangle
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


@dataclass(frozen=True)
class Arrangement:
    """Per-sort partition of a sorted variable set into blocks."""

    blocks_by_sort: tuple  # tuple of (sort, tuple of blocks); sorts ascending

    @classmethod
    def from_dict(cls, mapping: Mapping[str, Iterable[Iterable[str]]]) -> "Arrangement":
        norm = []
        for sort in sorted(mapping):
            blocks = [tuple(sorted(b)) for b in mapping[sort] if tuple(b)]
            if not blocks:
                continue
            seen: set = set()
            for b in blocks:
                for x in b:
                    if x in seen:
                        raise ValueError(f"variable {x!r} in two blocks")
                    seen.add(x)
            blocks.sort(key=lambda b: b[0])
            norm.append((sort, tuple(blocks)))
        return cls(tuple(norm))

    def variables(self) -> VariableSet:
        return VariableSet(
            {sort: [x for b in blocks for x in b] for sort, blocks in self.blocks_by_sort}
        )

    def blocks(self, sort: str) -> tuple:
        for s, blocks in self.blocks_by_sort:
            if s == sort:
                return blocks
        return ()

    def same_block(self, sort: str, x: str, y: str) -> bool:
        for b in self.blocks(sort):
            if x in b:
                return y in b
        raise ValueError(f"variable {x!r} not in arrangement")


def arrangement_formula(delta: Arrangement) -> Formula:
    """Conjunction of within-block equalities and cross-block disequalities.

    Conjunct order is fixed: sorts ascending, then lexicographic variable
    pairs, equalities before disequalities per sort.  The empty arrangement
    yields true.
    """
    conjuncts = []
    for sort, blocks in delta.blocks_by_sort:
        variables = sorted(x for b in blocks for x in b)
        index = {}
        for i, b in enumerate(blocks):
            for x in b:
                index[x] = i
        equalities = []
        disequalities = []
        for x, y in itertools.combinations(variables, 2):
            lit = Eq(Var(x, sort), Var(y, sort))
            if index[x] == index[y]:
                equalities.append(lit)
            else:
                disequalities.append(Not(lit))
        conjuncts.extend(equalities)
        conjuncts.extend(disequalities)
    if not conjuncts:
        return TRUE
    return And(tuple(conjuncts))


def enumerate_arrangements(
    variables: VariableSet, cap: int = DEFAULT_PARTITION_CAP
) -> Iterator[Arrangement]:
    """All arrangements of `variables`: the cross product of per-sort
    partitions, in deterministic order.  The empty variable set yields the
    single empty arrangement."""
    items = variables.sorted_items()
    per_sort = [enumerate_partitions(names, cap=cap) for _, names in items]
    for combo in itertools.product(*per_sort):
        yield Arrangement.from_dict(
            {sort: blocks for (sort, _), blocks in zip(items, combo)}
        )


def count_arrangements(variables: VariableSet) -> int:
    """Product over sorts of Bell(|V_sort|)."""
    total = 1
    for _, names in variables.sorted_items():
        total *= bell(len(names))
    return total


def arrangement_of_interpretation(
    structure: FiniteStructure, assignment: Assignment, variables: VariableSet
) -> Arrangement:
    """Group the variables of each sort by their assigned values.

    The resulting arrangement's formula is satisfied by (structure,
    assignment).
    """
    mapping = {}
    for sort, names in variables.sorted_items():
        groups: dict = {}
        for x in names:
            if x not in assignment:
                raise EvalError(f"no assignment for variable {x!r}")
            val = eval_term(structure, assignment, Var(x, sort))
            groups.setdefault(val, []).append(x)
        mapping[sort] = [tuple(g) for g in groups.values()]
    return Arrangement.from_dict(mapping)
