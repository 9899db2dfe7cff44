"""Constructions relative to a variety: free and presented algebras,
coproducts, imposition of identities, and the contravariant hom-lift.

Presented algebras are realized subdirectly: elements are vectors of
evaluations over the relation-respecting assignments of the generators
into G, the product of the variety's generating algebras.  For free
algebras (no relations) this is exactly Birkhoff's construction and is
valid in every variety.  With relations it computes the largest quotient
of the presented algebra that embeds in a power of G; this agrees with
the presented algebra whenever every finite algebra of the variety is a
subdirect power of G, which holds for all fixture varieties shipped with
this package.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

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
from . import finalg
from .finalg import (
    FiniteAlgebra,
    Homomorphism,
    assignments,
    closure_indices,
    complete_partial_hom,
    congruence_generated,
    enumerate_homs,
    evaluate,
    is_homomorphism,
    mixed_radix,
    quotient,
    satisfies,
)
from .limits import DEFAULT_LIMITS, Limits


def generator_product(V: VarietySpec, limits: Limits = DEFAULT_LIMITS) -> FiniteAlgebra:
    """Product of the variety's generators (cached); the single Birkhoff test algebra."""
    cached = getattr(V, "_gen_product", None)
    if cached is None:
        if len(V.generators) == 1:
            cached = V.generators[0]
        else:
            cached, _ = finalg.product(list(V.generators), limits=limits, name=f"gen[{V.name}]")
        object.__setattr__(V, "_gen_product", cached)
    return cached


def minimal_generators(alg: FiniteAlgebra) -> Dict[str, frozenset]:
    """A small generating subset, greedily: add the first element not yet generated."""
    chosen: Dict[str, set] = {s: set() for s in alg.sig.sorts}
    while True:
        closed = closure_indices(alg, chosen)
        missing = None
        for s in alg.sig.sorts:
            for i in range(alg.size(s)):
                if i not in closed[s]:
                    missing = (s, i)
                    break
            if missing:
                break
        if missing is None:
            return {s: frozenset(v) for s, v in chosen.items()}
        chosen[missing[0]].add(missing[1])


@dataclass(frozen=True)
class Presentation:
    """Generators and relations over a variety."""

    variety: VarietySpec
    gens: SortedSet
    relations: Tuple[Tuple[Term, Term], ...]
    name: str = ""

    def __post_init__(self):
        for lhs, rhs in self.relations:
            ls = sort_of_term(self.variety.sig, lhs, self.gens)
            rs = sort_of_term(self.variety.sig, rhs, self.gens)
            if ls != rs:
                raise SortError(f"relation sides have different sorts {ls!r} and {rs!r}")


def _relation_respecting_envs(
    V: VarietySpec,
    gens: SortedSet,
    relations: Sequence[Tuple[Term, Term]],
    limits: Limits,
) -> List[Dict[str, int]]:
    """All assignments gens -> G satisfying the relations (backtracking)."""
    G = generator_product(V, limits)
    ordered = list(gens)  # (name, sort)
    total = 1
    for _, s in ordered:
        total *= max(1, G.size(s))
    limits.check_enum("relation-respecting assignments", total)
    position = {name: k for k, (name, _) in enumerate(ordered)}
    # check each relation as soon as its last-mentioned generator is set
    by_last: Dict[int, List[Tuple[Term, Term]]] = {}
    for rel in relations:
        mentioned = [position[v.name] for v in _term_vars(rel[0]) + _term_vars(rel[1])]
        last = max(mentioned) if mentioned else -1
        by_last.setdefault(last, []).append(rel)
    out: List[Dict[str, int]] = []
    env: Dict[str, int] = {}

    def check(last: int) -> bool:
        for lhs, rhs in by_last.get(last, ()):
            if evaluate(lhs, G, env) != evaluate(rhs, G, env):
                return False
        return True

    def rec(k: int):
        if k == len(ordered):
            out.append(dict(env))
            return
        name, sort = ordered[k]
        for v in range(G.size(sort)):
            env[name] = v
            if check(k):
                rec(k + 1)
        env.pop(name, None)

    if check(-1):
        rec(0)
    return out


def _term_vars(t: Term) -> Tuple[Var, ...]:
    from .kernel import variables_of

    return variables_of(t)


def _pointwise_apply(G: FiniteAlgebra, op_symbol: str, vecs: Sequence[Tuple[int, ...]], ncoords: int) -> Tuple[int, ...]:
    table = G.tables[op_symbol]
    if not vecs:
        return tuple(table[0] for _ in range(ncoords))
    if len(vecs) == 1:
        a = vecs[0]
        return tuple(table[a[k]] for k in range(ncoords))
    if len(vecs) == 2:
        st = G._strides[op_symbol][0]
        a, b = vecs
        return tuple(table[a[k] * st + b[k]] for k in range(ncoords))
    strides = G._strides[op_symbol]
    return tuple(
        table[sum(v[k] * st for v, st in zip(vecs, strides))] for k in range(ncoords)
    )


@dataclass(eq=False)
class PresentedAlgebra:
    """A presented algebra with its universal-property machinery.

    `gen_elem` maps generator names to their images (the unit insertion
    for free algebras); `witnesses` gives, per element, a term over the
    generators evaluating to it.
    """

    variety: VarietySpec
    gens: SortedSet
    relations: Tuple[Tuple[Term, Term], ...]
    algebra: FiniteAlgebra
    gen_elem: Dict[str, Tuple[str, int]]
    witnesses: Dict[Tuple[str, int], Term]
    env_count: int

    def unit_map(self) -> Dict[str, Tuple[str, int]]:
        return dict(self.gen_elem)

    def mediate(
        self,
        target: FiniteAlgebra,
        images: Mapping[str, int],
        validate: bool = True,
    ) -> Homomorphism:
        """The hom induced by generator images, via witness evaluation.

        `images` maps generator names to element indices of `target`.
        The caller asserts the images respect the relations; with
        `validate` the resulting map is checked to be a homomorphism
        (which fails exactly when they do not).
        """
        maps = {}
        for s in self.algebra.sig.sorts:
            row = []
            for i in range(self.algebra.size(s)):
                row.append(evaluate(self.witnesses[(s, i)], target, images))
            maps[s] = tuple(row)
        h = Homomorphism(self.algebra, target, maps)
        if validate and not is_homomorphism(h):
            raise ValidationError("generator images do not respect the relations")
        return h


def subdirect_presentation(
    V: VarietySpec,
    gens: SortedSet,
    relations: Sequence[Tuple[Term, Term]] = (),
    envs: Optional[List[Dict[str, int]]] = None,
    name: str = "",
    limits: Limits = DEFAULT_LIMITS,
) -> PresentedAlgebra:
    """Close the generator evaluation vectors inside G^envs (see module docstring)."""
    G = generator_product(V, limits)
    sig = V.sig
    if envs is None:
        envs = _relation_respecting_envs(V, gens, relations, limits)
    ncoords = len(envs)
    elems: Dict[str, List[Tuple[int, ...]]] = {s: [] for s in sig.sorts}
    index: Dict[str, Dict[Tuple[int, ...], int]] = {s: {} for s in sig.sorts}
    witness: Dict[str, List[Term]] = {s: [] for s in sig.sorts}

    def add(sort: str, vec: Tuple[int, ...], wit: Term) -> int:
        got = index[sort].get(vec)
        if got is not None:
            return got
        idx = len(elems[sort])
        elems[sort].append(vec)
        index[sort][vec] = idx
        witness[sort].append(wit)
        limits.check_enum("presented-algebra carrier", sum(len(v) for v in elems.values()))
        return idx

    gen_elem: Dict[str, Tuple[str, int]] = {}
    for gname, gsort in gens:
        vec = tuple(env[gname] for env in envs)
        gen_elem[gname] = (gsort, add(gsort, vec, Var(gname, gsort)))

    changed = True
    while changed:
        changed = False
        for op in sig.ops:
            snapshot = [list(range(len(elems[s]))) for s in op.inputs]
            for args in itertools.product(*snapshot):
                vecs = [elems[s][a] for s, a in zip(op.inputs, args)]
                out = _pointwise_apply(G, op.symbol, vecs, ncoords)
                if out not in index[op.output]:
                    wit = Apply(op.symbol, tuple(witness[s][a] for s, a in zip(op.inputs, args)))
                    add(op.output, out, wit)
                    changed = True

    carriers = {s: tuple(f"e{i}" for i in range(len(elems[s]))) for s in sig.sorts}
    tables: Dict[str, Tuple[int, ...]] = {}
    for op in sig.ops:
        sizes = [len(elems[s]) for s in op.inputs]
        cells = 1
        for n in sizes:
            cells *= n
        limits.check_cells(f"presented table {op.symbol}", cells)
        rows = []
        for args in mixed_radix(sizes):
            vecs = [elems[s][a] for s, a in zip(op.inputs, args)]
            rows.append(index[op.output][_pointwise_apply(G, op.symbol, vecs, ncoords)])
        tables[op.symbol] = tuple(rows)
    alg = FiniteAlgebra(sig, carriers, tables, name=name or "presented")
    gens_by_sort: Dict[str, set] = {s: set() for s in sig.sorts}
    for gname, (gsort, gi) in gen_elem.items():
        gens_by_sort[gsort].add(gi)
    # prune to a small generating subset for fast hom enumeration later
    pruned = _prune_generators(alg, gens_by_sort)
    alg.generators = pruned
    witnesses = {(s, i): witness[s][i] for s in sig.sorts for i in range(len(elems[s]))}
    return PresentedAlgebra(V, gens, tuple(relations), alg, gen_elem, witnesses, ncoords)


def _prune_generators(alg: FiniteAlgebra, seed: Mapping[str, set]) -> Dict[str, frozenset]:
    """Greedy: keep only seed elements not generated by the ones kept so far."""
    kept: Dict[str, set] = {s: set() for s in alg.sig.sorts}
    closed = closure_indices(alg, kept)
    for s in alg.sig.sorts:
        for i in sorted(seed.get(s, ())):
            if i not in closed[s]:
                kept[s].add(i)
                closed = closure_indices(alg, kept)
    for s in alg.sig.sorts:
        if len(closed[s]) != alg.size(s):
            raise ValidationError("presentation generators fail to generate the closure")
    return {s: frozenset(v) for s, v in kept.items()}


def free_algebra(
    V: VarietySpec,
    X: SortedSet,
    name: str = "",
    limits: Limits = DEFAULT_LIMITS,
) -> PresentedAlgebra:
    """Birkhoff free algebra of the variety on the sorted set X.

    The unit insertion is `.gen_elem`; it is injective whenever the
    generators separate points of X, e.g. when some generator has at
    least two elements in each relevant sort.
    """
    return subdirect_presentation(V, X, (), None, name or f"F[{V.name}]({X.total_size()})", limits)


def universal_extension(
    F: PresentedAlgebra,
    B: FiniteAlgebra,
    f: Mapping[str, int],
    limits: Limits = DEFAULT_LIMITS,
) -> Homomorphism:
    """The unique hom F(X) -> B extending the sorted map f on generators."""
    return F.mediate(B, f)


def finitely_presented(P: Presentation, limits: Limits = DEFAULT_LIMITS) -> PresentedAlgebra:
    """Quotient of the free algebra by the relations, subdirectly realized."""
    return subdirect_presentation(
        P.variety, P.gens, P.relations, None, P.name or "presented", limits
    )


@dataclass(eq=False)
class Coproduct:
    """A finite coproduct with its injections and universal pairing map."""

    presented: PresentedAlgebra
    injections: List[Homomorphism]

    @property
    def algebra(self) -> FiniteAlgebra:
        return self.presented.algebra

    def copair(
        self,
        homs: Sequence[Homomorphism],
        target: Optional[FiniteAlgebra] = None,
        validate: bool = True,
    ) -> Homomorphism:
        """The unique hom out of the coproduct with the given components."""
        if target is None:
            target = homs[0].target
        images: Dict[str, int] = {}
        for k, h in enumerate(self.injections):
            src = h.source
            for s in src.sig.sorts:
                for i in range(src.size(s)):
                    images[_copr_gen(k, s, i)] = homs[k](s, i)
        return self.presented.mediate(target, images, validate=validate)

    def inject(self, k: int, sort: str, idx: int) -> int:
        return self.injections[k](sort, idx)


def _copr_gen(k: int, sort: str, i: int) -> str:
    return f"c{k}_{sort}_{i}"


def coproduct(
    V: VarietySpec,
    algs: Sequence[FiniteAlgebra],
    name: str = "",
    limits: Limits = DEFAULT_LIMITS,
) -> Coproduct:
    """Finite coproduct in the variety, presented by the canonical
    presentation (all elements as generators, all table entries as
    relations); envs come from tuples of homs into the generator product.
    """
    G = generator_product(V, limits)
    sig = V.sig
    items: List[Tuple[str, Tuple[str, ...]]] = []
    for s in sig.sorts:
        names = []
        for k, A in enumerate(algs):
            names.extend(_copr_gen(k, s, i) for i in range(A.size(s)))
        items.append((s, tuple(names)))
    gens = SortedSet(tuple(items))
    relations: List[Tuple[Term, Term]] = []
    for k, A in enumerate(algs):
        for op in sig.ops:
            for args in mixed_radix([A.size(s) for s in op.inputs]):
                lhs = Apply(op.symbol, tuple(Var(_copr_gen(k, s, a), s) for s, a in zip(op.inputs, args)))
                rhs = Var(_copr_gen(k, op.output, A.apply(op.symbol, args)), op.output)
                relations.append((lhs, rhs))
    hom_lists = [enumerate_homs(A, G, limits) for A in algs]
    count = 1
    for hl in hom_lists:
        count *= max(1, len(hl))
    limits.check_enum("coproduct probe tuples", count)
    envs: List[Dict[str, int]] = []
    for combo in itertools.product(*hom_lists):
        env = {}
        for k, h in enumerate(combo):
            for s in sig.sorts:
                for i in range(algs[k].size(s)):
                    env[_copr_gen(k, s, i)] = h(s, i)
        envs.append(env)
    presented = subdirect_presentation(
        V, gens, relations, envs, name or ("+".join(a.name or "?" for a in algs) or "coproduct"), limits
    )
    injections = []
    for k, A in enumerate(algs):
        maps = {
            s: tuple(presented.gen_elem[_copr_gen(k, s, i)][1] for i in range(A.size(s)))
            for s in sig.sorts
        }
        injections.append(Homomorphism(A, presented.algebra, maps))
    return Coproduct(presented, injections)


def initial_algebra(V: VarietySpec, limits: Limits = DEFAULT_LIMITS) -> PresentedAlgebra:
    """Free algebra on the empty sorted set (the empty coproduct)."""
    from .kernel import EMPTY_SORTED_SET

    return free_algebra(V, EMPTY_SORTED_SET, name=f"initial[{V.name}]", limits=limits)


def impose_identities(
    A: FiniteAlgebra,
    J: Sequence[Identity],
    limits: Limits = DEFAULT_LIMITS,
    name: str = "",
):
    """Universal quotient of A satisfying J, with its quotient hom.

    The congruence is generated by all instance pairs (u(e), v(e)); a
    single pass suffices because every assignment into the quotient
    lifts along the surjection.
    """
    pairs: List[Tuple[str, int, int]] = []
    for ident in J:
        sort = sort_of_term(A.sig, ident.lhs, ident.vars)
        for asg in assignments(ident.vars, A, limits):
            lv = evaluate(ident.lhs, A, asg)
            rv = evaluate(ident.rhs, A, asg)
            if lv != rv:
                pairs.append((sort, lv, rv))
    theta = congruence_generated(A, pairs)
    Q, qmap = quotient(A, theta, name=name or f"impose[{A.name}]")
    for ident in J:
        ok, witness = satisfies(Q, ident, limits)
        if not ok:
            raise ValidationError(f"imposition failed to satisfy {ident.name or ident}: {witness}")
    return Q, qmap


class VAlgebraObject:
    """A V-algebra object in an ambient variety W.

    One W-algebra per V-sort, plus for every V-op a W-homomorphism from
    the product of the input components to the output component.  The
    structure maps act per W-sort; satisfaction of V's identities is
    checked pointwise (per W-sort, per assignment) at construction.
    """

    def __init__(
        self,
        variety: VarietySpec,
        ambient: VarietySpec,
        components: Mapping[str, FiniteAlgebra],
        op_action: Callable[[str, str, Tuple[int, ...]], int],
        name: str = "",
        limits: Limits = DEFAULT_LIMITS,
    ):
        self.variety = variety
        self.ambient = ambient
        self.components = dict(components)
        self.name = name
        self.products: Dict[str, Tuple[FiniteAlgebra, List[Homomorphism]]] = {}
        self.structure: Dict[str, Homomorphism] = {}
        self._strides: Dict[str, Dict[str, Tuple[int, ...]]] = {}
        wsig = ambient.sig
        for op in variety.sig.ops:
            factors = [self.components[s] for s in op.inputs]
            prod, projections = finalg.product(factors, sig=wsig, limits=limits)
            self.products[op.symbol] = (prod, projections)
            self._strides[op.symbol] = {
                w: _mixed_strides([f.size(w) for f in factors]) for w in wsig.sorts
            }
            maps = {}
            for w in wsig.sorts:
                row = []
                for tup in mixed_radix([f.size(w) for f in factors]):
                    row.append(op_action(op.symbol, w, tup))
                maps[w] = tuple(row)
            h = Homomorphism(prod, self.components[op.output], maps)
            if not is_homomorphism(h):
                raise ValidationError(f"structure map for {op.symbol!r} is not a W-homomorphism")
            self.structure[op.symbol] = h
        for ident in variety.identities:
            ok, witness = self.check_identity_pointwise(ident, limits)
            if not ok:
                raise ValidationError(
                    f"{name or 'V-algebra object'} violates identity {ident.name or ident}: {witness}"
                )

    def component(self, sort: str) -> FiniteAlgebra:
        return self.components[sort]

    def apply_op(self, op_symbol: str, w_sort: str, args: Sequence[int]) -> int:
        """Structure map at one ambient sort: args[j] indexes component(inputs[j])."""
        strides = self._strides[op_symbol][w_sort]
        idx = 0
        for a, st in zip(args, strides):
            idx += a * st
        return self.structure[op_symbol].maps[w_sort][idx]

    def eval_term(self, t: Term, w_sort: str, asg: Mapping[str, int]) -> int:
        if isinstance(t, Var):
            return asg[t.name]
        return self.apply_op(t.symbol, w_sort, [self.eval_term(a, w_sort, asg) for a in t.args])

    def check_identity_pointwise(self, ident: Identity, limits: Limits = DEFAULT_LIMITS):
        """u_A = v_A as W-morphisms, decided per W-sort and assignment."""
        ordered = list(ident.vars)
        for w in self.ambient.sig.sorts:
            sizes = [self.components[s].size(w) for _, s in ordered]
            count = 1
            for n in sizes:
                count *= n
            limits.check_enum("pointwise identity check", count)
            for tup in mixed_radix(sizes):
                asg = {nm: v for (nm, _), v in zip(ordered, tup)}
                lv = self.eval_term(ident.lhs, w, asg)
                rv = self.eval_term(ident.rhs, w, asg)
                if lv != rv:
                    return False, (w, asg)
        return True, None


def _mixed_strides(sizes: Sequence[int]) -> Tuple[int, ...]:
    out = [1] * len(sizes)
    for i in range(len(sizes) - 2, -1, -1):
        out[i] = out[i + 1] * sizes[i + 1]
    return tuple(out)


def hom_algebra_contra(
    Aobj: VAlgebraObject,
    X: FiniteAlgebra,
    limits: Limits = DEFAULT_LIMITS,
    name: str = "",
) -> FiniteAlgebra:
    """The V-algebra Hom_W(X, A): the contravariant hom-lift.

    Carrier per V-sort s is the hom-set Hom_W(X, component(s)); a V-op
    acts through the structure map after the n-fold diagonal.
    """
    sig = Aobj.variety.sig
    wsig = Aobj.ambient.sig
    hom_lists = {s: enumerate_homs(X, Aobj.components[s], limits) for s in sig.sorts}
    positions = {s: {h.key(): k for k, h in enumerate(hom_lists[s])} for s in sig.sorts}
    carriers = {s: tuple(f"f{k}" for k in range(len(hom_lists[s]))) for s in sig.sorts}
    tables: Dict[str, Tuple[int, ...]] = {}
    for op in sig.ops:
        sizes = [len(hom_lists[s]) for s in op.inputs]
        cells = 1
        for n in sizes:
            cells *= n
        limits.check_cells(f"hom-lift table {op.symbol}", cells)
        rows = []
        for args in mixed_radix(sizes):
            fs = [hom_lists[s][a] for s, a in zip(op.inputs, args)]
            maps = {
                w: tuple(
                    Aobj.apply_op(op.symbol, w, [f(w, x) for f in fs])
                    for x in range(X.size(w))
                )
                for w in wsig.sorts
            }
            out = Homomorphism(X, Aobj.components[op.output], maps)
            rows.append(positions[op.output][out.key()])
        tables[op.symbol] = tuple(rows)
    alg = FiniteAlgebra(sig, carriers, tables, name=name or f"Hom({X.name},{Aobj.name})")
    alg.generators = minimal_generators(alg)
    for ident in Aobj.variety.identities:
        ok, witness = satisfies(alg, ident, limits)
        if not ok:
            raise ValidationError(f"hom-lift violates {ident.name or ident}: {witness}")
    return alg


def hom_algebra_contra_elements(Aobj: VAlgebraObject, X: FiniteAlgebra, limits: Limits = DEFAULT_LIMITS):
    """The hom lists backing hom_algebra_contra, in carrier order per V-sort."""
    return {s: enumerate_homs(X, Aobj.components[s], limits) for s in Aobj.variety.sig.sorts}


def hom_algebra_contra_map(
    Aobj: VAlgebraObject,
    result_for_X: FiniteAlgebra,
    result_for_Y: FiniteAlgebra,
    g: Homomorphism,
    limits: Limits = DEFAULT_LIMITS,
) -> Homomorphism:
    """Contravariant functoriality: precomposition with g: Y -> X gives
    a V-hom Hom(X, A) -> Hom(Y, A)."""
    X, Y = g.target, g.source
    homs_X = hom_algebra_contra_elements(Aobj, X, limits)
    homs_Y = hom_algebra_contra_elements(Aobj, Y, limits)
    pos_Y = {s: {h.key(): k for k, h in enumerate(homs_Y[s])} for s in Aobj.variety.sig.sorts}
    maps = {}
    for s in Aobj.variety.sig.sorts:
        row = []
        for f in homs_X[s]:
            row.append(pos_Y[s][finalg.compose(f, g).key()])
        maps[s] = tuple(row)
    h = Homomorphism(result_for_X, result_for_Y, maps)
    if not is_homomorphism(h):
        raise ValidationError("precomposition failed to be a V-homomorphism")
    return h
