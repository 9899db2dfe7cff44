"""Sorted signatures, terms, identities and variety presentations.

Sorts and operation symbols are kept in declaration order throughout;
that order is the canonical one used by every enumeration in the rest of
the package, so construction here is deliberately strict about
duplicates and dangling references.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Tuple, Union

from .errors import SortError, ValidationError

NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


def _check_name(kind: str, name: str) -> str:
    if not NAME_RE.match(name):
        raise ValidationError(f"bad {kind} name {name!r}: must match [A-Za-z][A-Za-z0-9_]*")
    return name


@dataclass(frozen=True)
class OpDecl:
    """One operation symbol: input word over sorts plus an output sort."""

    symbol: str
    inputs: Tuple[str, ...]
    output: str

    @property
    def arity(self) -> int:
        return len(self.inputs)


@dataclass(frozen=True)
class SortedSignature:
    sorts: Tuple[str, ...]
    ops: Tuple[OpDecl, ...]
    name: str = ""

    def __post_init__(self):
        if not self.sorts:
            raise ValidationError("a signature needs at least one sort")
        seen = set()
        for s in self.sorts:
            _check_name("sort", s)
            if s in seen:
                raise ValidationError(f"duplicate sort {s!r}")
            seen.add(s)
        symbols = set()
        for op in self.ops:
            _check_name("op", op.symbol)
            if op.symbol in symbols:
                raise ValidationError(f"duplicate op symbol {op.symbol!r}")
            symbols.add(op.symbol)
            for s in (*op.inputs, op.output):
                if s not in seen:
                    raise ValidationError(f"op {op.symbol!r} uses unknown sort {s!r}")

    def op(self, symbol: str) -> OpDecl:
        for op in self.ops:
            if op.symbol == symbol:
                return op
        raise ValidationError(f"unknown op {symbol!r}")

    def has_op(self, symbol: str) -> bool:
        return any(op.symbol == symbol for op in self.ops)

    def sort_index(self, sort: str) -> int:
        try:
            return self.sorts.index(sort)
        except ValueError:
            raise ValidationError(f"unknown sort {sort!r}") from None


def signature(name: str, sorts: Sequence[str], ops: Sequence[Tuple[str, Sequence[str], str]]) -> SortedSignature:
    """Convenience constructor: ops as (symbol, inputs, output) triples."""
    return SortedSignature(
        sorts=tuple(sorts),
        ops=tuple(OpDecl(sym, tuple(ins), out) for sym, ins, out in ops),
        name=name,
    )


@dataclass(frozen=True)
class SortedSet:
    """A finite set of named elements, one ordered list per sort.

    Iteration order is: sorts in the given order, names in declared order
    within each sort.  Names are unique per sort (and, for variable sets,
    globally -- enforced where it matters, in Identity).
    """

    items: Tuple[Tuple[str, Tuple[str, ...]], ...]  # (sort, names)

    def __post_init__(self):
        for sort, names in self.items:
            if len(set(names)) != len(names):
                raise ValidationError(f"duplicate names in sort {sort!r}")

    @staticmethod
    def of(mapping: Mapping[str, Sequence[str]]) -> "SortedSet":
        return SortedSet(tuple((s, tuple(names)) for s, names in mapping.items()))

    def names(self, sort: str) -> Tuple[str, ...]:
        for s, names in self.items:
            if s == sort:
                return names
        return ()

    def sorts(self) -> Tuple[str, ...]:
        return tuple(s for s, _ in self.items)

    def sort_of(self, name: str) -> Optional[str]:
        for s, names in self.items:
            if name in names:
                return s
        return None

    def __iter__(self):
        for s, names in self.items:
            for n in names:
                yield (n, s)

    def total_size(self) -> int:
        return sum(len(names) for _, names in self.items)

    def is_empty(self) -> bool:
        return self.total_size() == 0


EMPTY_SORTED_SET = SortedSet(())


@dataclass(frozen=True)
class Var:
    name: str
    sort: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Apply:
    symbol: str
    args: Tuple["Term", ...]

    def __str__(self):
        return f"{self.symbol}({','.join(str(a) for a in self.args)})"


Term = Union[Var, Apply]


def variables_of(t: Term) -> Tuple[Var, ...]:
    """Variables in first-occurrence order (depth-first, left to right)."""
    out: list[Var] = []
    seen = set()

    def walk(u: Term):
        if isinstance(u, Var):
            if u.name not in seen:
                seen.add(u.name)
                out.append(u)
        else:
            for a in u.args:
                walk(a)

    walk(t)
    return tuple(out)


def sort_of_term(sig: SortedSignature, t: Term, vars: SortedSet, path=()) -> str:
    """Sort of a term, or SortError if ill-sorted against `sig` and `vars`."""
    if isinstance(t, Var):
        declared = vars.sort_of(t.name)
        if declared is None:
            raise SortError(f"undeclared variable {t.name!r}", path)
        if t.sort != declared:
            raise SortError(f"variable {t.name!r} used at sort {t.sort!r}, declared {declared!r}", path)
        return declared
    op = None
    for cand in sig.ops:
        if cand.symbol == t.symbol:
            op = cand
            break
    if op is None:
        raise SortError(f"unknown op {t.symbol!r}", path)
    if len(t.args) != op.arity:
        raise SortError(f"op {t.symbol!r} expects {op.arity} arguments, got {len(t.args)}", path)
    for k, (arg, expected) in enumerate(zip(t.args, op.inputs)):
        got = sort_of_term(sig, arg, vars, path + (k,))
        if got != expected:
            raise SortError(
                f"argument {k + 1} of {t.symbol!r} has sort {got!r}, expected {expected!r}",
                path + (k,),
            )
    return op.output


@dataclass(frozen=True)
class Identity:
    """An equation lhs = rhs between terms over a common variable set."""

    vars: SortedSet
    lhs: Term
    rhs: Term
    name: str = ""

    def canonical_key(self, sig: SortedSignature):
        """Key invariant under variable renaming and side swap.

        Variables are renumbered by first occurrence in each side
        separately-joined traversal; the two oriented keys are sorted so
        that identities are compared unoriented.
        """
        def key_of(first: Term, second: Term):
            numbering: dict[str, int] = {}

            def walk(u: Term):
                if isinstance(u, Var):
                    if u.name not in numbering:
                        numbering[u.name] = len(numbering)
                    return ("v", numbering[u.name], u.sort)
                return ("a", u.symbol, tuple(walk(a) for a in u.args))

            return (walk(first), walk(second))

        return tuple(sorted([key_of(self.lhs, self.rhs), key_of(self.rhs, self.lhs)]))


def check_identity(sig: SortedSignature, ident: Identity) -> Identity:
    """Validate an identity: both sides well-sorted over its variables, equal sorts."""
    for sort, _ in ident.vars.items:
        if sort not in sig.sorts:
            raise SortError(f"variable sort {sort!r} not in signature")
    ls = sort_of_term(sig, ident.lhs, ident.vars)
    rs = sort_of_term(sig, ident.rhs, ident.vars)
    if ls != rs:
        raise SortError(f"identity sides have different sorts {ls!r} and {rs!r}")
    return ident


def substitute(sig: SortedSignature, t: Term, env: Mapping[str, Term], vars: SortedSet) -> Term:
    """Homomorphic substitution; env must be total and sort-preserving on t's variables."""
    if isinstance(t, Var):
        if t.name not in env:
            raise SortError(f"no binding for variable {t.name!r}")
        replacement = env[t.name]
        rsort = sort_of_term(sig, replacement, vars)
        if rsort != t.sort:
            raise SortError(f"binding for {t.name!r} has sort {rsort!r}, expected {t.sort!r}")
        return replacement
    return Apply(t.symbol, tuple(substitute(sig, a, env, vars) for a in t.args))


def dedupe_identities(sig: SortedSignature, idents: Iterable[Identity]) -> Tuple[Identity, ...]:
    """Drop identities equal up to variable renaming (and orientation)."""
    seen = set()
    out = []
    for ident in idents:
        key = ident.canonical_key(sig)
        if key not in seen:
            seen.add(key)
            out.append(ident)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class VarietySpec:
    """A variety presented by a signature, identities, and generating algebras.

    Semantically the variety is HSP of the product of the generators; the
    identities are asserted (and re-verified on every generator at
    construction) but not proven complete for that class.
    """

    sig: SortedSignature
    identities: Tuple[Identity, ...]
    generators: tuple  # of finalg.FiniteAlgebra
    name: str = ""

    def __post_init__(self):
        if not self.generators:
            raise ValidationError("a variety needs at least one generating algebra")
        for ident in self.identities:
            check_identity(self.sig, ident)
        # late import: finalg depends on kernel
        from . import finalg

        for gen in self.generators:
            if gen.sig is not self.sig and gen.sig != self.sig:
                raise ValidationError("generator signature differs from the variety's")
            for ident in self.identities:
                ok, witness = finalg.satisfies(gen, ident)
                if not ok:
                    raise ValidationError(
                        f"generator {gen.name or '<anon>'} violates identity "
                        f"{ident.name or ident}: witness {witness}"
                    )

    def __hash__(self):
        return id(self)
