"""Finite sorted algebras: evaluation, homs, products, congruences, quotients.

Elements are indices 0..n-1 per sort with label metadata.  Operation
tables are stored row-major over the input word, first argument slowest,
which is also the order every tuple enumeration in this module uses.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .errors import SortError, ValidationError
from .kernel import (
    Apply,
    Identity,
    SortedSet,
    SortedSignature,
    Term,
    Var,
    VarietySpec,
    sort_of_term,
)
from .limits import DEFAULT_LIMITS, Limits


def _strides(sizes: Sequence[int]) -> Tuple[int, ...]:
    # row-major: first input slowest
    out = [1] * len(sizes)
    for i in range(len(sizes) - 2, -1, -1):
        out[i] = out[i + 1] * sizes[i + 1]
    return tuple(out)


def mixed_radix(sizes: Sequence[int]) -> Iterator[Tuple[int, ...]]:
    """All tuples over the given ranges in lexicographic order."""
    if any(n == 0 for n in sizes):
        return iter(())
    return itertools.product(*(range(n) for n in sizes))


@dataclass(eq=False)
class FiniteAlgebra:
    """A finite algebra for a sorted signature.

    `tables[op]` maps the row-major input index to the output element
    index.  `generators`, when present, is a per-sort set of indices
    whose closure under all ops is the full carrier.
    """

    sig: SortedSignature
    carriers: Dict[str, Tuple[str, ...]]
    tables: Dict[str, Tuple[int, ...]]
    generators: Optional[Dict[str, frozenset]] = None
    name: str = ""

    def __post_init__(self):
        for s in self.sig.sorts:
            if s not in self.carriers:
                self.carriers[s] = ()
        self._strides = {}
        for op in self.sig.ops:
            sizes = [self.size(s) for s in op.inputs]
            table = self.tables.get(op.symbol)
            if table is None:
                raise ValidationError(f"{self.name or '<alg>'}: missing table for {op.symbol!r}")
            expected = 1
            for n in sizes:
                expected *= n
            if len(table) != expected:
                raise ValidationError(
                    f"{self.name or '<alg>'}: table for {op.symbol!r} has {len(table)} entries, expected {expected}"
                )
            out_size = self.size(op.output)
            if expected > 0 and out_size == 0:
                raise ValidationError(
                    f"{self.name or '<alg>'}: op {op.symbol!r} has inhabited input but empty output carrier"
                )
            for v in table:
                if not 0 <= v < out_size:
                    raise ValidationError(f"{self.name or '<alg>'}: table entry {v} outside carrier of {op.output!r}")
            self._strides[op.symbol] = _strides(sizes)
        if self.generators is not None:
            closed = closure_indices(self, self.generators)
            for s in self.sig.sorts:
                if len(closed.get(s, frozenset())) != self.size(s):
                    raise ValidationError(
                        f"{self.name or '<alg>'}: recorded generators do not generate sort {s!r}"
                    )

    def size(self, sort: str) -> int:
        return len(self.carriers[sort])

    def total_size(self) -> int:
        return sum(self.size(s) for s in self.sig.sorts)

    def label(self, sort: str, index: int) -> str:
        return self.carriers[sort][index]

    def index_of(self, sort: str, label: str) -> int:
        try:
            return self.carriers[sort].index(label)
        except ValueError:
            raise ValidationError(f"no element {label!r} in sort {sort!r} of {self.name or '<alg>'}") from None

    def apply(self, op_symbol: str, args: Sequence[int]) -> int:
        strides = self._strides[op_symbol]
        idx = 0
        for a, st in zip(args, strides):
            idx += a * st
        return self.tables[op_symbol][idx]

    def elements(self, sort: str) -> range:
        return range(self.size(sort))

    def __repr__(self):
        sizes = ",".join(f"{s}:{self.size(s)}" for s in self.sig.sorts)
        return f"<FiniteAlgebra {self.name or '?'} [{sizes}]>"


def closure_indices(alg: FiniteAlgebra, seed: Mapping[str, Iterable[int]]) -> Dict[str, frozenset]:
    """Least per-sort subset containing seed and closed under all ops."""
    current: Dict[str, set] = {s: set(seed.get(s, ())) for s in alg.sig.sorts}
    changed = True
    while changed:
        changed = False
        for op in alg.sig.ops:
            pools = [sorted(current[s]) for s in op.inputs]
            for args in itertools.product(*pools):
                out = alg.apply(op.symbol, args)
                if out not in current[op.output]:
                    current[op.output].add(out)
                    changed = True
    return {s: frozenset(v) for s, v in current.items()}


def evaluate(t: Term, alg: FiniteAlgebra, assignment: Mapping[str, int]) -> int:
    """Evaluate a term; assignment maps variable names to carrier indices."""
    if isinstance(t, Var):
        if t.name not in assignment:
            raise SortError(f"unbound variable {t.name!r}")
        return assignment[t.name]
    args = [evaluate(a, alg, assignment) for a in t.args]
    return alg.apply(t.symbol, args)


def assignments(vars: SortedSet, alg: FiniteAlgebra, limits: Limits = DEFAULT_LIMITS) -> Iterator[Dict[str, int]]:
    """All assignments vars -> alg carriers, lexicographic in declared variable order."""
    ordered = list(vars)  # (name, sort) pairs
    sizes = [alg.size(s) for _, s in ordered]
    count = 1
    for n in sizes:
        count *= n
    limits.check_enum("assignment enumeration", count)
    for tup in mixed_radix(sizes):
        yield {name: v for (name, _), v in zip(ordered, tup)}


def satisfies(alg: FiniteAlgebra, ident: Identity, limits: Limits = DEFAULT_LIMITS):
    """Decide satisfaction; on failure return the lex-least failing assignment."""
    for assignment in assignments(ident.vars, alg, limits):
        lv = evaluate(ident.lhs, alg, assignment)
        rv = evaluate(ident.rhs, alg, assignment)
        if lv != rv:
            return False, assignment
    return True, None


def satisfies_all(alg: FiniteAlgebra, idents: Iterable[Identity], limits: Limits = DEFAULT_LIMITS) -> bool:
    return all(satisfies(alg, i, limits)[0] for i in idents)


@dataclass(eq=False)
class Homomorphism:
    source: FiniteAlgebra
    target: FiniteAlgebra
    maps: Dict[str, Tuple[int, ...]]
    name: str = ""

    def __post_init__(self):
        for s in self.source.sig.sorts:
            if len(self.maps.get(s, ())) != self.source.size(s):
                raise ValidationError(f"hom map for sort {s!r} is not total")

    def __call__(self, sort: str, index: int) -> int:
        return self.maps[sort][index]

    def key(self):
        return tuple(self.maps[s] for s in self.source.sig.sorts)

    def __eq__(self, other):
        if not isinstance(other, Homomorphism):
            return NotImplemented
        return (
            self.source is other.source
            and self.target is other.target
            and self.key() == other.key()
        )

    def __hash__(self):
        return hash((id(self.source), id(self.target), self.key()))

    def is_surjective(self) -> bool:
        return all(set(self.maps[s]) == set(range(self.target.size(s))) for s in self.source.sig.sorts)

    def is_injective(self) -> bool:
        return all(len(set(self.maps[s])) == self.source.size(s) for s in self.source.sig.sorts)

    def is_bijective(self) -> bool:
        return self.is_injective() and all(
            self.source.size(s) == self.target.size(s) for s in self.source.sig.sorts
        )

    def __repr__(self):
        return f"<Hom {self.source.name or '?'} -> {self.target.name or '?'}>"


def is_homomorphism(h: Homomorphism) -> bool:
    """Exhaustive intertwining check against every op table."""
    A, B = h.source, h.target
    for op in A.sig.ops:
        for args in mixed_radix([A.size(s) for s in op.inputs]):
            lhs = h(op.output, A.apply(op.symbol, args))
            mapped = [h(s, a) for s, a in zip(op.inputs, args)]
            if lhs != B.apply(op.symbol, mapped):
                return False
    return True


def hom(source: FiniteAlgebra, target: FiniteAlgebra, maps: Mapping[str, Sequence[int]], name: str = "") -> Homomorphism:
    h = Homomorphism(source, target, {s: tuple(v) for s, v in maps.items()}, name)
    if not is_homomorphism(h):
        raise ValidationError(f"not a homomorphism: {name or maps}")
    return h


def identity_hom(alg: FiniteAlgebra) -> Homomorphism:
    return Homomorphism(alg, alg, {s: tuple(range(alg.size(s))) for s in alg.sig.sorts})


def compose(second: Homomorphism, first: Homomorphism) -> Homomorphism:
    """second after first."""
    if first.target is not second.source:
        raise ValidationError("hom composition endpoint mismatch")
    maps = {
        s: tuple(second(s, v) for v in first.maps[s])
        for s in first.source.sig.sorts
    }
    return Homomorphism(first.source, second.target, maps)


def complete_partial_hom(
    source: FiniteAlgebra,
    target: FiniteAlgebra,
    partial: Mapping[str, Mapping[int, int]],
) -> Optional[Dict[str, Dict[int, int]]]:
    """Propagate a partial map through the op tables; None on conflict.

    Returns the least forced extension: images of everything in the
    closure of the assigned elements.  Elements outside that closure stay
    unassigned.
    """
    assigned: Dict[str, Dict[int, int]] = {s: dict(partial.get(s, {})) for s in source.sig.sorts}
    # constants are always forced
    queue = True
    while queue:
        queue = False
        for op in source.sig.ops:
            pools = [sorted(assigned[s].keys()) for s in op.inputs]
            for args in itertools.product(*pools):
                out = source.apply(op.symbol, args)
                img = target.apply(op.symbol, [assigned[s][a] for s, a in zip(op.inputs, args)])
                prev = assigned[op.output].get(out)
                if prev is None:
                    assigned[op.output][out] = img
                    queue = True
                elif prev != img:
                    return None
    return assigned


def extend_to_total_hom(
    source: FiniteAlgebra,
    target: FiniteAlgebra,
    partial: Mapping[str, Mapping[int, int]],
) -> Optional[Homomorphism]:
    """First total homomorphism extending `partial`, by backtracking; None if none.

    Unassigned elements are tried in carrier order against target
    elements in carrier order, so the result is deterministic.
    """
    forced = complete_partial_hom(source, target, partial)
    if forced is None:
        return None

    def next_unassigned(state):
        for s in source.sig.sorts:
            for i in range(source.size(s)):
                if i not in state[s]:
                    return s, i
        return None

    def search(state):
        spot = next_unassigned(state)
        if spot is None:
            maps = {s: tuple(state[s][i] for i in range(source.size(s))) for s in source.sig.sorts}
            h = Homomorphism(source, target, maps)
            return h if is_homomorphism(h) else None
        s, i = spot
        for img in range(target.size(s)):
            trial = {ss: dict(m) for ss, m in state.items()}
            trial[s][i] = img
            propagated = complete_partial_hom(source, target, trial)
            if propagated is None:
                continue
            found = search(propagated)
            if found is not None:
                return found
        return None

    return search(forced)


def _homs_full_search(A: FiniteAlgebra, B: FiniteAlgebra, limits: Limits) -> List[Homomorphism]:
    total = 1
    for s in A.sig.sorts:
        total *= max(1, B.size(s)) ** A.size(s)
    limits.check_enum(f"hom search {A.name}->{B.name}", total)
    out = []
    per_sort = []
    for s in A.sig.sorts:
        per_sort.append(list(itertools.product(range(B.size(s)), repeat=A.size(s))))
    for combo in itertools.product(*per_sort):
        maps = {s: combo[k] for k, s in enumerate(A.sig.sorts)}
        h = Homomorphism(A, B, maps)
        if is_homomorphism(h):
            out.append(h)
    return out


def _homs_generated(A: FiniteAlgebra, B: FiniteAlgebra, limits: Limits) -> List[Homomorphism]:
    gens = [(s, i) for s in A.sig.sorts for i in sorted(A.generators.get(s, ()))]
    count = 1
    for s, _ in gens:
        count *= max(1, B.size(s))
    limits.check_enum(f"hom search {A.name}->{B.name}", count)
    out = []
    choices = [range(B.size(s)) for s, _ in gens]
    for combo in itertools.product(*choices):
        partial: Dict[str, Dict[int, int]] = {s: {} for s in A.sig.sorts}
        ok = True
        for (s, i), img in zip(gens, combo):
            if i in partial[s] and partial[s][i] != img:
                ok = False
                break
            partial[s][i] = img
        if not ok:
            continue
        state = complete_partial_hom(A, B, partial)
        if state is None:
            continue
        if any(len(state[s]) != A.size(s) for s in A.sig.sorts):
            # generators failed to reach everything: recorded generators are
            # validated at construction, so this cannot happen
            continue
        maps = {s: tuple(state[s][i] for i in range(A.size(s))) for s in A.sig.sorts}
        h = Homomorphism(A, B, maps)
        if is_homomorphism(h):
            out.append(h)
    return out


def enumerate_homs(A: FiniteAlgebra, B: FiniteAlgebra, limits: Limits = DEFAULT_LIMITS) -> List[Homomorphism]:
    """All homomorphisms A -> B, sorted lexicographically by map tables.

    Uses the recorded generating subset of A when present (images of
    generators determine the map); falls back to full search otherwise.
    The result is independent of the strategy.
    """
    if A.sig != B.sig and A.sig is not B.sig:
        raise ValidationError("enumerate_homs needs a common signature")
    if A.generators is not None:
        out = _homs_generated(A, B, limits)
    else:
        out = _homs_full_search(A, B, limits)
    out.sort(key=lambda h: h.key())
    return out


def product(algs: Sequence[FiniteAlgebra], sig: Optional[SortedSignature] = None, limits: Limits = DEFAULT_LIMITS, name: str = ""):
    """Finite product with projections; the empty product is terminal."""
    if not algs:
        if sig is None:
            raise ValidationError("empty product needs an explicit signature")
        return terminal(sig), []
    sig = algs[0].sig
    for a in algs[1:]:
        if a.sig != sig and a.sig is not sig:
            raise ValidationError("product factors must share a signature")
    carriers: Dict[str, Tuple[str, ...]] = {}
    index_tuples: Dict[str, List[Tuple[int, ...]]] = {}
    for s in sig.sorts:
        tuples = list(mixed_radix([a.size(s) for a in algs]))
        index_tuples[s] = tuples
        carriers[s] = tuple("(" + ",".join(a.label(s, i) for a, i in zip(algs, tup)) + ")" for tup in tuples)
    pos: Dict[str, Dict[Tuple[int, ...], int]] = {s: {t: k for k, t in enumerate(index_tuples[s])} for s in sig.sorts}
    tables: Dict[str, Tuple[int, ...]] = {}
    for op in sig.ops:
        sizes = [len(index_tuples[s]) for s in op.inputs]
        cells = 1
        for n in sizes:
            cells *= n
        limits.check_cells(f"product table {op.symbol}", cells)
        rows = []
        for args in mixed_radix(sizes):
            arg_tuples = [index_tuples[s][a] for s, a in zip(op.inputs, args)]
            out_tuple = tuple(
                alg.apply(op.symbol, [at[k] for at in arg_tuples]) for k, alg in enumerate(algs)
            )
            rows.append(pos[op.output][out_tuple])
        tables[op.symbol] = tuple(rows)
    prod = FiniteAlgebra(sig, carriers, tables, name=name or "*".join(a.name or "?" for a in algs))
    projections = []
    for k, a in enumerate(algs):
        maps = {s: tuple(tup[k] for tup in index_tuples[s]) for s in sig.sorts}
        projections.append(Homomorphism(prod, a, maps))
    return prod, projections


def pair_into_product(prod: FiniteAlgebra, projections: Sequence[Homomorphism], homs: Sequence[Homomorphism]) -> Homomorphism:
    """The unique map into a product with the given components."""
    src = homs[0].source
    sig = src.sig
    # invert the projection tuples
    lookup: Dict[str, Dict[Tuple[int, ...], int]] = {}
    for s in sig.sorts:
        lookup[s] = {}
        for idx in range(prod.size(s)):
            lookup[s][tuple(p(s, idx) for p in projections)] = idx
    maps = {}
    for s in sig.sorts:
        maps[s] = tuple(lookup[s][tuple(h(s, i) for h in homs)] for i in range(src.size(s)))
    return Homomorphism(src, prod, maps)


def terminal(sig: SortedSignature) -> FiniteAlgebra:
    carriers = {s: ("*",) for s in sig.sorts}
    # every op table has exactly one cell since all carriers are singletons
    return FiniteAlgebra(sig, carriers, {op.symbol: (0,) for op in sig.ops}, name=f"terminal[{sig.name}]")


def subalgebra_closure(alg: FiniteAlgebra, seed: Mapping[str, Iterable[int]], name: str = ""):
    """Least subalgebra containing seed, with its inclusion hom.

    The returned algebra records the seed (re-indexed) as its generating
    subset and keeps the ambient element labels.
    """
    closed = closure_indices(alg, seed)
    order = {s: sorted(closed[s]) for s in alg.sig.sorts}
    back = {s: {amb: k for k, amb in enumerate(order[s])} for s in alg.sig.sorts}
    carriers = {s: tuple(alg.label(s, i) for i in order[s]) for s in alg.sig.sorts}
    tables = {}
    for op in alg.sig.ops:
        rows = []
        for args in mixed_radix([len(order[s]) for s in op.inputs]):
            ambient_args = [order[s][a] for s, a in zip(op.inputs, args)]
            rows.append(back[op.output][alg.apply(op.symbol, ambient_args)])
        tables[op.symbol] = tuple(rows)
    gens = {s: frozenset(back[s][i] for i in set(seed.get(s, ())) ) for s in alg.sig.sorts}
    sub = FiniteAlgebra(alg.sig, carriers, tables, generators=gens, name=name or f"sub[{alg.name}]")
    incl = Homomorphism(sub, alg, {s: tuple(order[s]) for s in alg.sig.sorts})
    return sub, incl


def image_factorization(h: Homomorphism):
    """Factor h as (mono) o (surjection onto the image subalgebra)."""
    img_sets = {s: set(h.maps[s]) for s in h.source.sig.sorts}
    img, incl = subalgebra_closure(h.target, img_sets, name=f"im[{h.source.name}->{h.target.name}]")
    # image of a hom is already closed under ops, so closure adds nothing
    back = {s: {amb: k for k, amb in enumerate(incl.maps[s])} for s in h.source.sig.sorts}
    epi = Homomorphism(h.source, img, {s: tuple(back[s][v] for v in h.maps[s]) for s in h.source.sig.sorts})
    return epi, incl


@dataclass(eq=False)
class Congruence:
    """A compatible partition, stored as canonical representatives (least index)."""

    algebra: FiniteAlgebra
    reps: Dict[str, Tuple[int, ...]]  # element index -> class representative

    def __post_init__(self):
        for s in self.algebra.sig.sorts:
            r = self.reps[s]
            for i, v in enumerate(r):
                if r[v] != v or v > i:
                    raise ValidationError("congruence representatives must be least-index canonical")

    def classes(self, sort: str) -> List[Tuple[int, ...]]:
        by_rep: Dict[int, List[int]] = {}
        for i, v in enumerate(self.reps[sort]):
            by_rep.setdefault(v, []).append(i)
        return [tuple(by_rep[r]) for r in sorted(by_rep)]

    def class_count(self, sort: str) -> int:
        return len(set(self.reps[sort]))

    def related(self, sort: str, a: int, b: int) -> bool:
        return self.reps[sort][a] == self.reps[sort][b]

    def key(self):
        return tuple(self.reps[s] for s in self.algebra.sig.sorts)

    def __eq__(self, other):
        return isinstance(other, Congruence) and self.algebra is other.algebra and self.key() == other.key()

    def __hash__(self):
        return hash((id(self.algebra), self.key()))

    def is_identity(self) -> bool:
        return all(self.reps[s] == tuple(range(self.algebra.size(s))) for s in self.algebra.sig.sorts)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        # canonical representative = least index
        if ra < rb:
            self.parent[rb] = ra
        else:
            self.parent[ra] = rb
        return True


def _canonicalize(uf_by_sort: Mapping[str, _UnionFind], alg: FiniteAlgebra) -> Congruence:
    reps = {}
    for s in alg.sig.sorts:
        uf = uf_by_sort[s]
        reps[s] = tuple(uf.find(i) for i in range(alg.size(s)))
    return Congruence(alg, reps)


def congruence_generated(alg: FiniteAlgebra, pairs: Iterable[Tuple[str, int, int]]) -> Congruence:
    """Least congruence containing the given (sort, a, b) pairs.

    Union-find merging, closed under op compatibility to a fixpoint:
    whenever two input tuples are pointwise related, their outputs merge.
    """
    uf = {s: _UnionFind(alg.size(s)) for s in alg.sig.sorts}
    for s, a, b in pairs:
        uf[s].union(a, b)
    changed = True
    while changed:
        changed = False
        for op in alg.sig.ops:
            sizes = [alg.size(s) for s in op.inputs]
            if not sizes:
                continue
            # group input tuples by their tuple of representatives
            seen: Dict[Tuple[int, ...], int] = {}
            for args in mixed_radix(sizes):
                key = tuple(uf[s].find(a) for s, a in zip(op.inputs, args))
                out = alg.apply(op.symbol, args)
                prev = seen.get(key)
                if prev is None:
                    seen[key] = out
                elif uf[op.output].union(prev, out):
                    changed = True
    return _canonicalize(uf, alg)


def identity_congruence(alg: FiniteAlgebra) -> Congruence:
    return Congruence(alg, {s: tuple(range(alg.size(s))) for s in alg.sig.sorts})


def total_congruence(alg: FiniteAlgebra) -> Congruence:
    return Congruence(alg, {s: tuple(0 for _ in range(alg.size(s))) for s in alg.sig.sorts})


def is_compatible_partition(alg: FiniteAlgebra, reps: Mapping[str, Sequence[int]]) -> bool:
    for op in alg.sig.ops:
        sizes = [alg.size(s) for s in op.inputs]
        seen: Dict[Tuple[int, ...], int] = {}
        for args in mixed_radix(sizes):
            key = tuple(reps[s][a] for s, a in zip(op.inputs, args))
            out = reps[op.output][alg.apply(op.symbol, args)]
            prev = seen.get(key)
            if prev is None:
                seen[key] = out
            elif prev != out:
                return False
    return True


def _set_partitions(n: int) -> Iterator[Tuple[int, ...]]:
    """All partitions of {0..n-1} as least-index representative vectors.

    Generated in restricted-growth order, which is deterministic.
    """
    if n == 0:
        yield ()
        return
    codes = [0] * n

    def rec(i: int, max_code: int):
        if i == n:
            # convert growth string to least-index representatives
            first: Dict[int, int] = {}
            reps = []
            for j, c in enumerate(codes):
                if c not in first:
                    first[c] = j
                reps.append(first[c])
            yield tuple(reps)
            return
        for c in range(max_code + 2):
            codes[i] = c
            yield from rec(i + 1, max(max_code, c))

    yield from rec(1, 0)


def enumerate_congruences(alg: FiniteAlgebra, limits: Limits = DEFAULT_LIMITS, size_guard: int = 12) -> List[Congruence]:
    """All congruences, by filtering products of per-sort set partitions."""
    if alg.total_size() > size_guard:
        from .errors import ResourceLimitError

        raise ResourceLimitError("congruence enumeration carrier", alg.total_size(), size_guard)
    per_sort = [list(_set_partitions(alg.size(s))) for s in alg.sig.sorts]
    count = 1
    for p in per_sort:
        count *= len(p)
    limits.check_enum("congruence enumeration", count)
    out = []
    for combo in itertools.product(*per_sort):
        reps = {s: combo[k] for k, s in enumerate(alg.sig.sorts)}
        if is_compatible_partition(alg, reps):
            out.append(Congruence(alg, reps))
    return out


def quotient(alg: FiniteAlgebra, theta: Congruence, name: str = ""):
    """Quotient algebra on canonical representatives, with the quotient hom."""
    if theta.algebra is not alg:
        raise ValidationError("congruence belongs to a different algebra")
    order = {s: sorted(set(theta.reps[s])) for s in alg.sig.sorts}
    back = {s: {rep: k for k, rep in enumerate(order[s])} for s in alg.sig.sorts}
    carriers = {
        s: tuple("[" + alg.label(s, rep) + "]" for rep in order[s]) for s in alg.sig.sorts
    }
    tables = {}
    for op in alg.sig.ops:
        rows = []
        for args in mixed_radix([len(order[s]) for s in op.inputs]):
            rep_args = [order[s][a] for s, a in zip(op.inputs, args)]
            out = alg.apply(op.symbol, rep_args)
            rows.append(back[op.output][theta.reps[op.output][out]])
        tables[op.symbol] = tuple(rows)
    gens = None
    if alg.generators is not None:
        gens = {
            s: frozenset(back[s][theta.reps[s][g]] for g in alg.generators.get(s, frozenset()))
            for s in alg.sig.sorts
        }
    q = FiniteAlgebra(alg.sig, carriers, tables, generators=gens, name=name or f"{alg.name}/~")
    qmap = Homomorphism(alg, q, {s: tuple(back[s][theta.reps[s][i]] for i in range(alg.size(s))) for s in alg.sig.sorts})
    return q, qmap


def kernel_congruence(h: Homomorphism) -> Congruence:
    uf = {s: _UnionFind(h.source.size(s)) for s in h.source.sig.sorts}
    for s in h.source.sig.sorts:
        by_img: Dict[int, int] = {}
        for i, v in enumerate(h.maps[s]):
            if v in by_img:
                uf[s].union(by_img[v], i)
            else:
                by_img[v] = i
    return _canonicalize(uf, h.source)


def preimage_congruence(h: Homomorphism, theta: Congruence) -> Congruence:
    """Pull a congruence on the target back along h."""
    if theta.algebra is not h.target:
        raise ValidationError("congruence belongs to a different algebra")
    uf = {s: _UnionFind(h.source.size(s)) for s in h.source.sig.sorts}
    for s in h.source.sig.sorts:
        by_rep: Dict[int, int] = {}
        for i, v in enumerate(h.maps[s]):
            rep = theta.reps[s][v]
            if rep in by_rep:
                uf[s].union(by_rep[rep], i)
            else:
                by_rep[rep] = i
    return _canonicalize(uf, h.source)


def meet_congruence(a: Congruence, b: Congruence) -> Congruence:
    """Common refinement (intersection of the equivalence relations)."""
    alg = a.algebra
    reps = {}
    for s in alg.sig.sorts:
        first: Dict[Tuple[int, int], int] = {}
        out = []
        for i in range(alg.size(s)):
            key = (a.reps[s][i], b.reps[s][i])
            if key not in first:
                first[key] = i
            out.append(first[key])
        reps[s] = tuple(out)
    return Congruence(alg, reps)


def inverse_hom(h: Homomorphism) -> Homomorphism:
    """Inverse of a bijective homomorphism."""
    if not h.is_bijective():
        raise ValidationError("cannot invert a non-bijective homomorphism")
    maps = {}
    for s in h.source.sig.sorts:
        inv = [0] * h.target.size(s)
        for i, v in enumerate(h.maps[s]):
            inv[v] = i
        maps[s] = tuple(inv)
    return Homomorphism(h.target, h.source, maps)


def find_isomorphism(A: FiniteAlgebra, B: FiniteAlgebra, limits: Limits = DEFAULT_LIMITS) -> Optional[Homomorphism]:
    """First bijective hom A -> B, if any (explicit construction, no canonization)."""
    if any(A.size(s) != B.size(s) for s in A.sig.sorts):
        return None
    for h in enumerate_homs(A, B, limits):
        if h.is_bijective():
            return h
    return None
