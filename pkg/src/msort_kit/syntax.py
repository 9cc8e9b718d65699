"""Sorted abstract syntax for many-sorted signatures, terms, and formulas.

Provides the s-expression textual format (parser + printer), free-variable
computation, and a standalone sort checker.  All values are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

from .errors import ParseError, SortCheckError

RESERVED_PREFIX = "sk_"

_KEYWORDS = {
    "true", "false", "not", "and", "or", "=>", "=", "forall", "exists",
    "sort", "split", "declare-fun", "declare-pred", "declare-var", "assert",
    "structure", "domain", "fun", "pred",
}


# ---------------------------------------------------------------------------
# Terms and formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str
    sort: str


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple
    sort: str


Term = Union[Var, App]


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bottom:
    pass


@dataclass(frozen=True)
class Eq:
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class PredApp:
    name: str
    args: tuple


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Or:
    parts: tuple


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    sort: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    sort: str
    body: "Formula"


Formula = Union[Top, Bottom, Eq, PredApp, Not, And, Or, Implies, Forall, Exists]

TRUE = Top()
FALSE = Bottom()


def term_sort(t: Term) -> str:
    return t.sort


def conj(parts: Sequence[Formula]) -> Formula:
    """Conjunction of `parts`; empty -> true, singleton -> the part itself."""
    parts = tuple(parts)
    if not parts:
        return TRUE
    if len(parts) == 1:
        return parts[0]
    return And(parts)


def disj(parts: Sequence[Formula]) -> Formula:
    """Disjunction of `parts`; empty -> false, singleton -> the part itself."""
    parts = tuple(parts)
    if not parts:
        return FALSE
    if len(parts) == 1:
        return parts[0]
    return Or(parts)


# ---------------------------------------------------------------------------
# Signatures
# ---------------------------------------------------------------------------

class Signature:
    """A set of sorts plus sorted function and predicate symbols.

    Equality on each sort is implicit and never declared.  An optional
    `split` partitions the sorts into blocks such that no symbol's arity
    crosses blocks.  Declaration order of sorts and symbols is preserved
    (it is used as the canonical order by downstream enumerations).
    """

    __slots__ = ("sorts", "functions", "predicates", "split", "_sort_set", "_block_of")

    def __init__(
        self,
        sorts: Sequence[str] = (),
        functions: Optional[Mapping[str, tuple]] = None,
        predicates: Optional[Mapping[str, tuple]] = None,
        split: Optional[Sequence[Sequence[str]]] = None,
    ):
        sorts = tuple(sorts)
        functions = dict(functions or {})
        predicates = dict(predicates or {})
        seen = set()
        for s in sorts:
            if not s:
                raise SortCheckError("empty sort name")
            if s in seen:
                raise SortCheckError(f"duplicate sort {s!r}")
            seen.add(s)
        for name, (arg_sorts, res) in functions.items():
            self._check_symbol(name, tuple(arg_sorts) + (res,), seen)
        for name, arg_sorts in predicates.items():
            if name in functions:
                raise SortCheckError(f"symbol {name!r} declared as both function and predicate")
            self._check_symbol(name, tuple(arg_sorts), seen)
        self.sorts = sorts
        self.functions = {n: (tuple(a), r) for n, (a, r) in functions.items()}
        self.predicates = {n: tuple(a) for n, a in predicates.items()}
        self._sort_set = seen
        self.split = None
        self._block_of = None
        if split is not None:
            blocks = tuple(tuple(b) for b in split)
            flat = [s for b in blocks for s in b]
            if sorted(flat) != sorted(sorts) or len(set(flat)) != len(flat):
                raise SortCheckError("split must partition the declared sorts")
            block_of = {}
            for i, b in enumerate(blocks):
                for s in b:
                    block_of[s] = i
            for name, (arg_sorts, res) in self.functions.items():
                self._check_block_local(name, arg_sorts + (res,), block_of)
            for name, arg_sorts in self.predicates.items():
                self._check_block_local(name, arg_sorts, block_of)
            self.split = blocks
            self._block_of = block_of

    @staticmethod
    def _check_symbol(name, arity_sorts, declared):
        if not name:
            raise SortCheckError("empty symbol name")
        for s in arity_sorts:
            if s not in declared:
                raise SortCheckError(f"symbol {name!r} uses undeclared sort {s!r}")

    @staticmethod
    def _check_block_local(name, arity_sorts, block_of):
        blocks = {block_of[s] for s in arity_sorts}
        if len(blocks) > 1:
            raise SortCheckError(f"symbol {name!r} crosses split blocks")

    def has_sort(self, s: str) -> bool:
        return s in self._sort_set

    def block_of(self, sort: str) -> int:
        if self._block_of is None:
            raise SortCheckError("signature has no split")
        return self._block_of[sort]

    def with_functions(self, new_functions: Mapping[str, tuple]) -> "Signature":
        """A copy of this signature extended with additional function symbols."""
        merged = dict(self.functions)
        for name, sig in new_functions.items():
            if name in merged or name in self.predicates:
                raise SortCheckError(f"symbol {name!r} already declared")
            merged[name] = sig
        return Signature(self.sorts, merged, self.predicates, self.split)

    def disjoint_union(self, other: "Signature") -> "Signature":
        """Union of two signatures that share at most sorts."""
        overlap = (set(self.functions) | set(self.predicates)) & (
            set(other.functions) | set(other.predicates)
        )
        if overlap:
            raise SortCheckError(f"signatures share symbols: {sorted(overlap)}")
        sorts = self.sorts + tuple(s for s in other.sorts if s not in self._sort_set)
        functions = {**self.functions, **other.functions}
        predicates = {**self.predicates, **other.predicates}
        return Signature(sorts, functions, predicates)

    def __eq__(self, other):
        return (
            isinstance(other, Signature)
            and self.sorts == other.sorts
            and self.functions == other.functions
            and self.predicates == other.predicates
            and self.split == other.split
        )

    def __hash__(self):
        return hash((self.sorts, tuple(self.functions.items()), tuple(self.predicates.items())))

    def __repr__(self):
        return (
            f"Signature(sorts={list(self.sorts)}, functions={self.functions}, "
            f"predicates={self.predicates}, split={self.split})"
        )


# ---------------------------------------------------------------------------
# Variable sets
# ---------------------------------------------------------------------------

class VariableSet:
    """Per-sort finite sets of variable names."""

    __slots__ = ("by_sort",)

    def __init__(self, by_sort: Mapping[str, Iterable[str]] = ()):
        cleaned = {}
        for sort, names in dict(by_sort).items():
            names = frozenset(names)
            if names:
                cleaned[sort] = names
        self.by_sort = cleaned

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple]) -> "VariableSet":
        acc: dict = {}
        for name, sort in pairs:
            acc.setdefault(sort, set()).add(name)
        return cls(acc)

    def union(self, other: "VariableSet") -> "VariableSet":
        acc = {s: set(v) for s, v in self.by_sort.items()}
        for s, v in other.by_sort.items():
            acc.setdefault(s, set()).update(v)
        return VariableSet(acc)

    def restrict(self, sorts: Iterable[str]) -> "VariableSet":
        keep = set(sorts)
        return VariableSet({s: v for s, v in self.by_sort.items() if s in keep})

    def names(self, sort: str) -> tuple:
        return tuple(sorted(self.by_sort.get(sort, ())))

    def sorted_items(self) -> list:
        return [(s, self.names(s)) for s in sorted(self.by_sort)]

    def pairs(self) -> Iterator[tuple]:
        for s in sorted(self.by_sort):
            for n in self.names(s):
                yield (n, s)

    def total(self) -> int:
        return sum(len(v) for v in self.by_sort.values())

    def is_empty(self) -> bool:
        return not self.by_sort

    def __eq__(self, other):
        return isinstance(other, VariableSet) and self.by_sort == other.by_sort

    def __hash__(self):
        return hash(tuple(sorted((s, v) for s, v in self.by_sort.items())))

    def __repr__(self):
        inner = ", ".join(f"{s}:{sorted(v)}" for s, v in sorted(self.by_sort.items()))
        return f"VariableSet({inner})"


def free_vars(phi: Formula, sorts: Optional[Iterable[str]] = None) -> VariableSet:
    """Free variables of `phi`, optionally restricted to the given sorts."""
    acc: set = set()

    def walk_term(t, bound):
        if isinstance(t, Var):
            if t.name not in bound:
                acc.add((t.name, t.sort))
        else:
            for a in t.args:
                walk_term(a, bound)

    def walk(f, bound):
        if isinstance(f, (Top, Bottom)):
            return
        if isinstance(f, Eq):
            walk_term(f.lhs, bound)
            walk_term(f.rhs, bound)
        elif isinstance(f, PredApp):
            for a in f.args:
                walk_term(a, bound)
        elif isinstance(f, Not):
            walk(f.body, bound)
        elif isinstance(f, (And, Or)):
            for p in f.parts:
                walk(p, bound)
        elif isinstance(f, Implies):
            walk(f.lhs, bound)
            walk(f.rhs, bound)
        elif isinstance(f, (Forall, Exists)):
            walk(f.body, bound | {f.var})
        else:
            raise TypeError(f"not a formula: {f!r}")

    walk(phi, frozenset())
    vs = VariableSet.from_pairs(acc)
    if sorts is not None:
        vs = vs.restrict(sorts)
    return vs


# ---------------------------------------------------------------------------
# Sort checking
# ---------------------------------------------------------------------------

def check_term(t: Term, sig: Signature, env: Mapping[str, str]) -> str:
    """Validate `t` against `sig` with variable sorts `env`; returns its sort."""
    if isinstance(t, Var):
        expected = env.get(t.name)
        if expected is None:
            raise SortCheckError(f"unbound variable {t.name!r}")
        if expected != t.sort:
            raise SortCheckError(f"variable {t.name!r} has sort {expected}, not {t.sort}")
        if not sig.has_sort(t.sort):
            raise SortCheckError(f"undeclared sort {t.sort!r}")
        return t.sort
    if isinstance(t, App):
        if t.fn not in sig.functions:
            raise SortCheckError(f"undeclared function {t.fn!r}")
        arg_sorts, res = sig.functions[t.fn]
        if len(t.args) != len(arg_sorts):
            raise SortCheckError(f"function {t.fn!r} expects {len(arg_sorts)} arguments")
        for a, s in zip(t.args, arg_sorts):
            if check_term(a, sig, env) != s:
                raise SortCheckError(f"argument of {t.fn!r} has wrong sort")
        if t.sort != res:
            raise SortCheckError(f"application of {t.fn!r} annotated with wrong sort")
        return res
    raise TypeError(f"not a term: {t!r}")


def sort_check(phi: Formula, sig: Signature, var_sorts: Optional[Mapping[str, str]] = None) -> None:
    """Raise SortCheckError unless `phi` is well sorted over `sig`."""

    def walk(f, env):
        if isinstance(f, (Top, Bottom)):
            return
        if isinstance(f, Eq):
            ls = check_term(f.lhs, sig, env)
            rs = check_term(f.rhs, sig, env)
            if ls != rs:
                raise SortCheckError(f"equality between sorts {ls} and {rs}")
        elif isinstance(f, PredApp):
            if f.name not in sig.predicates:
                raise SortCheckError(f"undeclared predicate {f.name!r}")
            arg_sorts = sig.predicates[f.name]
            if len(f.args) != len(arg_sorts):
                raise SortCheckError(f"predicate {f.name!r} expects {len(arg_sorts)} arguments")
            for a, s in zip(f.args, arg_sorts):
                if check_term(a, sig, env) != s:
                    raise SortCheckError(f"argument of {f.name!r} has wrong sort")
        elif isinstance(f, Not):
            walk(f.body, env)
        elif isinstance(f, (And, Or)):
            if not f.parts:
                raise SortCheckError("empty connective")
            for p in f.parts:
                walk(p, env)
        elif isinstance(f, Implies):
            walk(f.lhs, env)
            walk(f.rhs, env)
        elif isinstance(f, (Forall, Exists)):
            if not sig.has_sort(f.sort):
                raise SortCheckError(f"undeclared sort {f.sort!r} in binder")
            walk(f.body, {**env, f.var: f.sort})
        else:
            raise TypeError(f"not a formula: {f!r}")

    walk(phi, dict(var_sorts or {}))


# ---------------------------------------------------------------------------
# Tokenizer and s-expression reader
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Token:
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list:
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
        elif c in " \t\r":
            col += 1
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            tokens.append(_Token(c, line, col))
            col += 1
            i += 1
        else:
            start = i
            start_col = col
            while i < n and text[i] not in " \t\r\n();":
                i += 1
                col += 1
            tokens.append(_Token(text[start:i], line, start_col))
    return tokens


class _SExpr:
    """Either an atom (text) or a list of _SExpr, with source position."""

    __slots__ = ("atom", "items", "line", "col")

    def __init__(self, atom=None, items=None, line=0, col=0):
        self.atom = atom
        self.items = items
        self.line = line
        self.col = col

    @property
    def is_atom(self):
        return self.atom is not None

    def error(self, message):
        return ParseError(message, self.line, self.col)


def _read_sexprs(tokens: list) -> list:
    out = []
    pos = 0

    def read():
        nonlocal pos
        tok = tokens[pos]
        if tok.text == ")":
            raise ParseError("unexpected ')'", tok.line, tok.col)
        if tok.text == "(":
            pos += 1
            items = []
            while True:
                if pos >= len(tokens):
                    raise ParseError("unclosed '('", tok.line, tok.col)
                if tokens[pos].text == ")":
                    pos += 1
                    return _SExpr(items=items, line=tok.line, col=tok.col)
                items.append(read())
        pos += 1
        return _SExpr(atom=tok.text, line=tok.line, col=tok.col)

    while pos < len(tokens):
        out.append(read())
    return out


# ---------------------------------------------------------------------------
# Declarations and formulas from s-expressions
# ---------------------------------------------------------------------------

@dataclass
class ParsedFile:
    """Result of parsing a theory file: signature, declared variables, axioms."""

    signature: Signature
    var_sorts: dict
    axioms: tuple


def _check_fresh_name(sx: _SExpr, name: str, used: set):
    if name in _KEYWORDS:
        raise sx.error(f"{name!r} is a reserved word")
    if name.startswith(RESERVED_PREFIX):
        raise sx.error(f"symbol prefix {RESERVED_PREFIX!r} is reserved")
    if name in used:
        raise sx.error(f"duplicate symbol {name!r}")


def _atom_text(sx: _SExpr) -> str:
    if not sx.is_atom:
        raise sx.error("expected an identifier")
    return sx.atom


def _require_sort(sx: _SExpr, declared: list) -> str:
    name = _atom_text(sx)
    if name not in declared:
        raise sx.error(f"undeclared sort {name!r} (sorts must be declared first)")
    return name


def parse_file(text: str) -> ParsedFile:
    """Parse a full theory file: declarations plus asserted sentences."""
    sorts: list = []
    functions: dict = {}
    predicates: dict = {}
    split_blocks = None
    split_sx = None
    var_sorts: dict = {}
    pending_asserts: list = []
    used_symbols: set = set()

    for sx in _read_sexprs(_tokenize(text)):
        if sx.is_atom:
            raise sx.error(f"unexpected atom {sx.atom!r} at top level")
        if not sx.items or not sx.items[0].is_atom:
            raise sx.error("expected a declaration")
        head = sx.items[0].atom
        rest = sx.items[1:]
        if head == "sort":
            if len(rest) != 1:
                raise sx.error("(sort NAME)")
            name = _atom_text(rest[0])
            if name in sorts:
                raise rest[0].error(f"duplicate sort {name!r}")
            _check_fresh_name(rest[0], name, set())
            sorts.append(name)
        elif head == "split":
            if split_blocks is not None:
                raise sx.error("duplicate split declaration")
            if len(rest) != 1 or rest[0].is_atom:
                raise sx.error("(split (BLOCK ...)) where BLOCK = (SORT ...)")
            blocks = []
            for bl in rest[0].items:
                if bl.is_atom:
                    raise bl.error("each split block must be a parenthesized sort list")
                blocks.append(tuple(_atom_text(s) for s in bl.items))
            split_blocks = tuple(blocks)
            split_sx = sx
        elif head == "declare-fun":
            if len(rest) != 3 or rest[1].is_atom:
                raise sx.error("(declare-fun NAME (SORT ...) SORT)")
            name = _atom_text(rest[0])
            _check_fresh_name(rest[0], name, used_symbols | set(var_sorts))
            arg_sorts = tuple(_require_sort(a, sorts) for a in rest[1].items)
            res = _require_sort(rest[2], sorts)
            functions[name] = (arg_sorts, res)
            used_symbols.add(name)
        elif head == "declare-pred":
            if len(rest) != 2 or rest[1].is_atom:
                raise sx.error("(declare-pred NAME (SORT ...))")
            name = _atom_text(rest[0])
            _check_fresh_name(rest[0], name, used_symbols | set(var_sorts))
            predicates[name] = tuple(_require_sort(a, sorts) for a in rest[1].items)
            used_symbols.add(name)
        elif head == "declare-var":
            if len(rest) != 2:
                raise sx.error("(declare-var NAME SORT)")
            name = _atom_text(rest[0])
            _check_fresh_name(rest[0], name, used_symbols | set(var_sorts))
            var_sorts[name] = _require_sort(rest[1], sorts)
        elif head == "assert":
            if len(rest) != 1:
                raise sx.error("(assert FORMULA)")
            pending_asserts.append(rest[0])
        else:
            raise sx.error(f"unknown declaration {head!r}")

    try:
        sig = Signature(sorts, functions, predicates, split_blocks)
    except SortCheckError as e:
        anchor = split_sx if split_blocks is not None and "split" in str(e) else None
        if anchor is not None:
            raise anchor.error(str(e)) from e
        raise ParseError(str(e)) from e

    for name, sort in var_sorts.items():
        if not sig.has_sort(sort):
            raise ParseError(f"declare-var {name!r} uses undeclared sort {sort!r}")

    axioms = []
    for sx in pending_asserts:
        f = _formula_from_sexpr(sx, sig, dict(var_sorts))
        if not free_vars(f).is_empty():
            raise sx.error("asserted axiom must be a sentence")
        axioms.append(f)
    return ParsedFile(sig, var_sorts, tuple(axioms))


def parse_signature(text: str) -> Signature:
    """Parse a source text and return only its signature."""
    return parse_file(text).signature


def parse_formula(text: str, sig: Signature, var_sorts: Optional[Mapping[str, str]] = None) -> Formula:
    """Parse a single formula over `sig`; free variables come from `var_sorts`."""
    exprs = _read_sexprs(_tokenize(text))
    if len(exprs) != 1:
        raise ParseError("expected exactly one formula")
    return _formula_from_sexpr(exprs[0], sig, dict(var_sorts or {}))


def _term_from_sexpr(sx: _SExpr, sig: Signature, env: Mapping[str, str]) -> Term:
    if sx.is_atom:
        name = sx.atom
        if name in env:
            return Var(name, env[name])
        if name in sig.functions:
            arg_sorts, res = sig.functions[name]
            if arg_sorts:
                raise sx.error(f"function {name!r} expects arguments")
            return App(name, (), res)
        raise sx.error(f"unbound variable {name!r} (declare it with declare-var)")
    if not sx.items or not sx.items[0].is_atom:
        raise sx.error("expected a term")
    fn = sx.items[0].atom
    if fn not in sig.functions:
        raise sx.items[0].error(f"undeclared function {fn!r}")
    arg_sorts, res = sig.functions[fn]
    args = sx.items[1:]
    if len(args) != len(arg_sorts):
        raise sx.error(f"function {fn!r} expects {len(arg_sorts)} arguments, got {len(args)}")
    built = []
    for a, want in zip(args, arg_sorts):
        t = _term_from_sexpr(a, sig, env)
        if t.sort != want:
            raise a.error(f"argument of {fn!r} has sort {t.sort}, expected {want}")
        built.append(t)
    return App(fn, tuple(built), res)


def _binders_from_sexpr(sx: _SExpr, sig: Signature) -> list:
    if sx.is_atom:
        raise sx.error("expected a binder list ((x S) ...)")
    out = []
    for b in sx.items:
        if b.is_atom or len(b.items) != 2:
            raise b.error("each binder must be (NAME SORT)")
        name = _atom_text(b.items[0])
        sort = _atom_text(b.items[1])
        if not sig.has_sort(sort):
            raise b.items[1].error(f"undeclared sort {sort!r}")
        out.append((name, sort))
    if not out:
        raise sx.error("binder list must not be empty")
    return out


def _formula_from_sexpr(sx: _SExpr, sig: Signature, env: dict) -> Formula:
    if sx.is_atom:
        name = sx.atom
        if name == "true":
            return TRUE
        if name == "false":
            return FALSE
        if name in sig.predicates:
            if sig.predicates[name]:
                raise sx.error(f"predicate {name!r} expects arguments")
            return PredApp(name, ())
        raise sx.error(f"expected a formula, got {name!r}")
    if not sx.items or not sx.items[0].is_atom:
        raise sx.error("expected a formula")
    head = sx.items[0].atom
    rest = sx.items[1:]
    if head == "not":
        if len(rest) != 1:
            raise sx.error("(not FORMULA)")
        return Not(_formula_from_sexpr(rest[0], sig, env))
    if head in ("and", "or"):
        if not rest:
            raise sx.error(f"({head} ...) needs at least one argument")
        parts = tuple(_formula_from_sexpr(r, sig, env) for r in rest)
        return And(parts) if head == "and" else Or(parts)
    if head == "=>":
        if len(rest) != 2:
            raise sx.error("(=> FORMULA FORMULA)")
        return Implies(
            _formula_from_sexpr(rest[0], sig, env),
            _formula_from_sexpr(rest[1], sig, env),
        )
    if head == "=":
        if len(rest) != 2:
            raise sx.error("(= TERM TERM)")
        lhs = _term_from_sexpr(rest[0], sig, env)
        rhs = _term_from_sexpr(rest[1], sig, env)
        if lhs.sort != rhs.sort:
            raise sx.error(f"equality between sorts {lhs.sort} and {rhs.sort}")
        return Eq(lhs, rhs)
    if head in ("forall", "exists"):
        if len(rest) != 2:
            raise sx.error(f"({head} ((x S) ...) FORMULA)")
        binders = _binders_from_sexpr(rest[0], sig)
        inner_env = dict(env)
        for name, sort in binders:
            inner_env[name] = sort
        body = _formula_from_sexpr(rest[1], sig, inner_env)
        ctor = Forall if head == "forall" else Exists
        for name, sort in reversed(binders):
            body = ctor(name, sort, body)
        return body
    if head in sig.predicates:
        arg_sorts = sig.predicates[head]
        if len(rest) != len(arg_sorts):
            raise sx.error(f"predicate {head!r} expects {len(arg_sorts)} arguments")
        args = []
        for a, want in zip(rest, arg_sorts):
            t = _term_from_sexpr(a, sig, env)
            if t.sort != want:
                raise a.error(f"argument of {head!r} has sort {t.sort}, expected {want}")
            args.append(t)
        return PredApp(head, tuple(args))
    if head in sig.functions:
        raise sx.error(f"function {head!r} used in formula position")
    raise sx.error(f"unknown operator or predicate {head!r}")


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

def print_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.fn
    return "(" + t.fn + " " + " ".join(print_term(a) for a in t.args) + ")"


def print_formula(phi: Formula) -> str:
    """Render `phi` so that parse_formula(print_formula(phi)) == phi."""
    if isinstance(phi, Top):
        return "true"
    if isinstance(phi, Bottom):
        return "false"
    if isinstance(phi, Eq):
        return f"(= {print_term(phi.lhs)} {print_term(phi.rhs)})"
    if isinstance(phi, PredApp):
        if not phi.args:
            return phi.name
        return "(" + phi.name + " " + " ".join(print_term(a) for a in phi.args) + ")"
    if isinstance(phi, Not):
        return f"(not {print_formula(phi.body)})"
    if isinstance(phi, And):
        return "(and " + " ".join(print_formula(p) for p in phi.parts) + ")"
    if isinstance(phi, Or):
        return "(or " + " ".join(print_formula(p) for p in phi.parts) + ")"
    if isinstance(phi, Implies):
        return f"(=> {print_formula(phi.lhs)} {print_formula(phi.rhs)})"
    if isinstance(phi, (Forall, Exists)):
        kind = Forall if isinstance(phi, Forall) else Exists
        word = "forall" if kind is Forall else "exists"
        binders = []
        body = phi
        while isinstance(body, kind):
            binders.append(f"({body.var} {body.sort})")
            body = body.body
        return f"({word} ({''.join(binders)}) {print_formula(body)})"
    raise TypeError(f"not a formula: {phi!r}")


def print_signature(sig: Signature) -> str:
    """Render a signature as a sequence of declarations."""
    lines = [f"(sort {s})" for s in sig.sorts]
    if sig.split is not None:
        blocks = " ".join("(" + " ".join(b) + ")" for b in sig.split)
        lines.append(f"(split ({blocks}))")
    for name, (args, res) in sig.functions.items():
        lines.append(f"(declare-fun {name} ({' '.join(args)}) {res})")
    for name, args in sig.predicates.items():
        lines.append(f"(declare-pred {name} ({' '.join(args)}))")
    return "\n".join(lines)
