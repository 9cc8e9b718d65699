"""Order/equality pattern classes, Ramsey-style witness searches, and bounds.

Colorings may be dict-backed (explicit tables) or function-backed (computed
per query, e.g. seeded pseudo-random), which lets searches run on ground sets
far too large to materialize.  Every returned witness is re-verified by an
independent checker before being emitted, and search order is fixed
(ascending subset size from the target, lexicographic within a size), so
results are reproducible and an absent result is an exhaustive refutation.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Optional, Sequence

from .errors import CapExceededError

FUBINI_CAP = 12
DEFAULT_COLORING_CAP = 1 << 22
UPPER_BOUND_COLOR_CAP = 100_000
UPPER_BOUND_SPAN_CAP = 64


# ---------------------------------------------------------------------------
# Patterns
# ---------------------------------------------------------------------------

def pattern_of(tup: Sequence) -> tuple:
    """Canonical representative of a tuple's order/equality class.

    Entry i is the rank of tup[i] among the distinct values of the tuple,
    so two tuples get equal patterns exactly when their entries realize the
    same order and equality relations position by position.
    """
    distinct = sorted(set(tup))
    rank = {v: i for i, v in enumerate(distinct)}
    return tuple(rank[v] for v in tup)


def fubini(n: int) -> int:
    """Number of distinct patterns of length-n tuples over a large enough
    ordered set (the ordered Bell numbers)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > FUBINI_CAP:
        raise CapExceededError(f"fubini() capped at n <= {FUBINI_CAP}")
    values = [1]
    for m in range(1, n + 1):
        total = 0
        for k in range(1, m + 1):
            total += math.comb(m, k) * values[m - k]
        values.append(total)
    return values[n]


# ---------------------------------------------------------------------------
# Colorings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Coloring:
    """Total coloring of n-subsets or n-tuples over an ordered ground set.

    `mode` is "subsets" (keys are sorted tuples of distinct elements) or
    "tuples" (keys are arbitrary tuples).  Subset-mode and tuple-mode
    colorings are deliberately distinct so the classic and the directed
    searches cannot be mixed up.  Colors are arbitrary hashable values;
    `colors` records the palette size when known.
    """

    arity: int
    mode: str
    fn: Callable[[tuple], object]
    colors: Optional[int] = None

    def __post_init__(self):
        if self.mode not in ("subsets", "tuples"):
            raise ValueError("mode must be 'subsets' or 'tuples'")
        if self.arity < 0:
            raise ValueError("arity must be nonnegative")

    def __call__(self, key: tuple):
        if self.mode == "subsets":
            key = tuple(sorted(key))
            if len(set(key)) != len(key):
                raise ValueError("subset coloring queried with repeated elements")
        if len(key) != self.arity:
            raise ValueError(f"expected {self.arity}-tuples")
        return self.fn(tuple(key))

    @classmethod
    def from_map(cls, mapping, arity: int, mode: str, colors: Optional[int] = None) -> "Coloring":
        table = {tuple(k): v for k, v in dict(mapping).items()}
        if mode == "subsets":
            table = {tuple(sorted(k)): v for k, v in table.items()}

        def fn(key):
            try:
                return table[key]
            except KeyError:
                raise ValueError(f"coloring not defined on {key!r}") from None

        return cls(arity, mode, fn, colors)

    @classmethod
    def random(cls, arity: int, k: int, seed: int, mode: str = "tuples") -> "Coloring":
        """Deterministic seeded coloring into [1, k], computed per key, so it
        works on ground sets of any size."""
        if k < 1:
            raise ValueError("need at least one color")

        def fn(key):
            payload = f"{seed}|{arity}|{','.join(map(str, key))}".encode()
            digest = hashlib.sha256(payload).digest()
            return int.from_bytes(digest[:8], "big") % k + 1

        return cls(arity, mode, fn, k)

    @classmethod
    def constant(cls, arity: int, color, mode: str = "tuples") -> "Coloring":
        return cls(arity, mode, lambda key: color, 1)


# ---------------------------------------------------------------------------
# Subset iteration
# ---------------------------------------------------------------------------

def _lex_subsets(n: int, m: int) -> Iterator[tuple]:
    """Index tuples 0 <= i1 < ... < im < n in lexicographic order, lazily.

    Works for arbitrarily large `n` (no materialization of the ground set).
    """
    if m < 0 or m > n:
        return
    if m == 0:
        yield ()
        return
    idx = list(range(m))
    while True:
        yield tuple(idx)
        for j in range(m - 1, -1, -1):
            if idx[j] != j + n - m:
                break
        else:
            return
        idx[j] += 1
        for j2 in range(j + 1, m):
            idx[j2] = idx[j2 - 1] + 1


def _ground_subsets(ground, m: int) -> Iterator[tuple]:
    n = len(ground)
    for idx in _lex_subsets(n, m):
        yield tuple(ground[i] for i in idx)


# ---------------------------------------------------------------------------
# Independent witness checkers
# ---------------------------------------------------------------------------

def is_monochromatic(coloring: Coloring, Y: Sequence) -> bool:
    """All arity-subsets of Y share one color (vacuously true if too few)."""
    if coloring.mode != "subsets":
        raise ValueError("is_monochromatic expects a subset-mode coloring")
    seen = None
    for sub in itertools.combinations(sorted(Y), coloring.arity):
        c = coloring(sub)
        if seen is None:
            seen = c
        elif c != seen:
            return False
    return True


def is_pattern_monochromatic(colorings, Y: Sequence) -> bool:
    """Every coloring is constant on each pattern class of Y^arity."""
    if isinstance(colorings, Coloring):
        colorings = [colorings]
    Y = sorted(Y)
    for f in colorings:
        if f.mode != "tuples":
            raise ValueError("is_pattern_monochromatic expects tuple-mode colorings")
        by_pattern: dict = {}
        for tup in itertools.product(Y, repeat=f.arity):
            p = pattern_of(tup)
            c = f(tup)
            if by_pattern.setdefault(p, c) != c:
                return False
    return True


# ---------------------------------------------------------------------------
# Searches
# ---------------------------------------------------------------------------
#
# A subset of a monochromatic (or pattern-monochromatic) set is itself
# monochromatic, because colors and patterns are intrinsic to the chosen
# subsets/tuples.  A witness of size >= m therefore exists exactly when one
# of size exactly m does, so searching size m alone is exhaustive, and the
# lexicographically first hit is the order-minimal witness.

def ramsey_search(ground, coloring: Coloring, m: int) -> Optional[tuple]:
    """First Y (|Y| >= m) whose m-subsets are all one color, or None.

    `coloring` must be subset-mode with the ground set totally ordered.
    Absence is an exhaustive refutation over all size-m subsets.
    """
    if coloring.mode != "subsets":
        raise ValueError("ramsey_search expects a subset-mode coloring")
    if m <= 0:
        return ()
    n = len(ground)
    if m > n:
        return None
    if coloring.arity == 1:
        # Color classes decide this case; equivalent to the subset scan.
        classes: dict = {}
        for i in range(n):
            x = ground[i]
            classes.setdefault(coloring((x,)), []).append(x)
        best = None
        for members in classes.values():
            if len(members) >= m:
                cand = tuple(members[:m])
                if best is None or cand < best:
                    best = cand
        if best is not None and not is_monochromatic(coloring, best):
            raise AssertionError("witness failed independent verification")
        return best
    for Y in _ground_subsets(ground, m):
        ok = True
        seen = None
        for sub in itertools.combinations(Y, coloring.arity):
            c = coloring(sub)
            if seen is None:
                seen = c
            elif c != seen:
                ok = False
                break
        if ok:
            if not is_monochromatic(coloring, Y):
                raise AssertionError("witness failed independent verification")
            return Y
    return None


def directed_ramsey_search(ground, coloring: Coloring, m: int) -> Optional[tuple]:
    """First Y (|Y| >= m) on which `coloring` is constant within every
    order/equality pattern class of Y^arity, or None after exhausting all
    size-m subsets."""
    return multi_ramsey_search(ground, [coloring], m)


def multi_ramsey_search(ground, colorings: Sequence[Coloring], m: int) -> Optional[tuple]:
    """Simultaneous pattern-monochromatic subset for several tuple colorings."""
    colorings = list(colorings)
    for f in colorings:
        if f.mode != "tuples":
            raise ValueError("multi_ramsey_search expects tuple-mode colorings")
    if m <= 0:
        return ()
    n = len(ground)
    if m > n:
        return None
    for Y in _ground_subsets(ground, m):
        if _pattern_mono_fast(colorings, Y):
            if not is_pattern_monochromatic(colorings, Y):
                raise AssertionError("witness failed independent verification")
            return Y
    return None


def _pattern_mono_fast(colorings, Y) -> bool:
    for f in colorings:
        by_pattern: dict = {}
        for tup in itertools.product(Y, repeat=f.arity):
            p = pattern_of(tup)
            c = f(tup)
            prev = by_pattern.setdefault(p, c)
            if prev != c:
                return False
    return True


# ---------------------------------------------------------------------------
# Brute-force Ramsey numbers (tiny parameters)
# ---------------------------------------------------------------------------

def ramsey_number_bruteforce(k: int, n: int, m: int, cap: int = DEFAULT_COLORING_CAP) -> int:
    """Least N such that every k-coloring of the n-subsets of an N-set has a
    monochromatic subset of size >= m.

    For n == 1 this is the pigeonhole value k*(m-1)+1, which is exact, so it
    is returned directly (the adversarial coloring with m-1 elements per
    color refutes every smaller N).  For n >= 2 all k^C(N,n) colorings are
    exhausted for N = m, m+1, ... until none survives.
    """
    if k < 1 or n < 0 or m < 0:
        raise ValueError("parameters must be nonnegative with k >= 1")
    if m <= n:
        return m
    if n == 0:
        return m
    if n == 1:
        return k * (m - 1) + 1
    if k == 1:
        return m
    N = m
    while True:
        keys = list(itertools.combinations(range(N), n))
        total = k ** len(keys)
        if total > cap:
            raise CapExceededError(
                f"{k}^{len(keys)} colorings at N={N} exceeds cap {cap}"
            )
        survivor = False
        for combo in itertools.product(range(1, k + 1), repeat=len(keys)):
            coloring = Coloring.from_map(dict(zip(keys, combo)), n, "subsets", k)
            if ramsey_search(range(N), coloring, m) is None:
                survivor = True
                break
        if not survivor:
            return N
        N += 1


# ---------------------------------------------------------------------------
# Constructive upper bounds
# ---------------------------------------------------------------------------
#
# The classic recursion on n and m, run on a vector of per-color targets:
#
#   R(1; m1..mk)        = sum(mi - 1) + 1                  (pigeonhole, exact)
#   R(n; ...) with some mi < n   -> min mi                 (no n-subsets)
#   R(n; ...) with some mi == n  -> max(n, R over the remaining colors)
#   R(n; m1..mk)        <= R(n-1; t1..tk) + 1,  ti = R(n; ..., mi - 1, ...)
#
# The last step is the usual single-point argument: fix x, color the
# (n-1)-subsets of the rest by their color with x adjoined, and recurse.
# Values are memoized on sorted target multisets.

def _vec_key(ms: tuple) -> tuple:
    return tuple(sorted(ms))


@lru_cache(maxsize=None)
def _ramsey_vec(n: int, ms: tuple) -> int:
    ms = _vec_key(ms)
    if not ms:
        raise ValueError("need at least one color")
    if ms[0] < n:
        return ms[0]
    if n == 0:
        return ms[-1]
    if n == 1:
        return sum(ms) - len(ms) + 1
    if len(ms) == 1:
        return ms[0]
    if ms[0] == n:
        rest = tuple(v for v in ms if v > n)
        if not rest:
            return n
        return max(n, _ramsey_vec(n, rest))
    ts = tuple(
        _ramsey_vec(n, ms[:i] + (ms[i] - 1,) + ms[i + 1:]) for i in range(len(ms))
    )
    return _ramsey_vec(n - 1, ts) + 1


def ramsey_upper_bound(k: int, n: int, m: int) -> int:
    """A size guaranteeing that ramsey_search succeeds for every k-coloring
    of n-subsets with target m.  Exact for n == 1 (pigeonhole); an upper
    bound, not necessarily minimal, for n >= 2.

    Guarded: for n >= 2 the recursion is refused when the color count or the
    target span would make the value or the computation explode.
    """
    if k < 1 or n < 0 or m < 0:
        raise ValueError("parameters must be nonnegative with k >= 1")
    if m <= n:
        return m
    if n == 0:
        return m
    if n == 1:
        return k * (m - 1) + 1
    if k == 1:
        return m
    if k > UPPER_BOUND_COLOR_CAP:
        raise CapExceededError(
            f"upper bound for {k} colors at arity {n} is astronomically large "
            f"(color cap {UPPER_BOUND_COLOR_CAP})"
        )
    if m - n > UPPER_BOUND_SPAN_CAP:
        raise CapExceededError(
            f"target span {m - n} exceeds cap {UPPER_BOUND_SPAN_CAP}"
        )
    return _ramsey_vec(n, (m,) * k)


def rstar_bound(k: int, n: int, m: int) -> int:
    """Ground size at which any k-coloring of n-tuples admits a subset of
    size >= m that is constant on every pattern class.

    Computed as ramsey_upper_bound(k**(n**n), n, m + n - 1): the n^n
    argument reorderings of a tuple coloring are bundled into one subset
    coloring with k^(n^n) colors, and the n-1 surplus elements pad the
    pattern classes with incomplete tuples.
    """
    if n < 0:
        raise ValueError("arity must be nonnegative")
    if n == 0:
        return m
    return ramsey_upper_bound(k ** (n ** n), n, m + n - 1)


def rstarstar_bound(k: int, arities: Sequence[int], m: int) -> int:
    """Ground size at which any family of colorings f_i of n_i-tuples admits
    one subset of size >= m simultaneously pattern-monochromatic for all.

    Computed as rstar_bound(k**r, n_1 + ... + n_r, m + 1): the family is
    bundled into one coloring of flattened (left-to-right) concatenated
    tuples, and one extra element absorbs the padding positions.
    """
    arities = tuple(arities)
    if not arities:
        return m
    r = len(arities)
    return rstar_bound(k ** r, sum(arities), m + 1)
