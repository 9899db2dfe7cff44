"""Co-V-algebra objects: components with co-operations into finite
coproducts, co-term evaluation, co-satisfaction, and the covariant
hom-lift.

Coproducts appearing as co-operation targets are cached with fixed
injection labels at construction, so later morphism equalities are plain
table equalities.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .errors import ValidationError
from .kernel import Apply, Identity, SortedSet, Term, Var, VarietySpec
from . import finalg
from .finalg import (
    FiniteAlgebra,
    Homomorphism,
    complete_partial_hom,
    compose,
    enumerate_homs,
    is_homomorphism,
    mixed_radix,
    satisfies,
)
from .limits import DEFAULT_LIMITS, Limits
from .variety import Coproduct, coproduct, free_algebra, minimal_generators


def hom_from_generator_images(
    source: FiniteAlgebra,
    target: FiniteAlgebra,
    images: Mapping[str, Mapping[int, int]],
) -> Homomorphism:
    """Extend images of a generating subset to the unique homomorphism.

    Fails if the forced extension is partial (images were not on a
    generating set) or inconsistent, or if the result fails the
    intertwining check.
    """
    state = complete_partial_hom(source, target, images)
    if state is None:
        raise ValidationError("generator images are inconsistent with the op tables")
    for s in source.sig.sorts:
        if len(state[s]) != source.size(s):
            raise ValidationError(f"images do not determine sort {s!r}: not a generating set")
    maps = {s: tuple(state[s][i] for i in range(source.size(s))) for s in source.sig.sorts}
    h = Homomorphism(source, target, maps)
    if not is_homomorphism(h):
        raise ValidationError("generator images do not extend to a homomorphism")
    return h


class CoVObject:
    """A co-V-algebra object in the ambient variety W.

    One W-algebra per V-sort (with recorded generating subset) and, per
    V-op, a co-operation into the cached coproduct of the input
    components.  Co-satisfaction of V's identities is verified at
    construction unless `validate` is off.
    """

    def __init__(
        self,
        target_variety: VarietySpec,
        ambient: VarietySpec,
        components: Mapping[str, FiniteAlgebra],
        coop_images: Optional[Mapping[str, Mapping[str, Mapping[int, int]]]] = None,
        coops: Optional[Mapping[str, Homomorphism]] = None,
        coproducts: Optional[Mapping[str, Coproduct]] = None,
        name: str = "",
        validate: bool = True,
        limits: Limits = DEFAULT_LIMITS,
    ):
        self.target_variety = target_variety
        self.ambient = ambient
        self.components = dict(components)
        self.name = name
        for sort, comp in self.components.items():
            if comp.generators is None:
                comp.generators = minimal_generators(comp)
        self.coproducts: Dict[str, Coproduct] = {}
        self.coops: Dict[str, Homomorphism] = {}
        self._var_coproducts: Dict[tuple, Tuple[Coproduct, Dict[str, int]]] = {}
        for op in target_variety.sig.ops:
            if coproducts is not None and op.symbol in coproducts:
                copr = coproducts[op.symbol]
            else:
                copr = coproduct(
                    ambient,
                    [self.components[s] for s in op.inputs],
                    name=f"{name}.∐{op.symbol}",
                    limits=limits,
                )
            self.coproducts[op.symbol] = copr
            if coops is not None and op.symbol in coops:
                h = coops[op.symbol]
                if h.source is not self.components[op.output] or h.target is not copr.algebra:
                    raise ValidationError(f"co-operation for {op.symbol!r} has wrong endpoints")
                self.coops[op.symbol] = h
            else:
                if coop_images is None or op.symbol not in coop_images:
                    raise ValidationError(f"missing co-operation for {op.symbol!r}")
                self.coops[op.symbol] = hom_from_generator_images(
                    self.components[op.output], copr.algebra, coop_images[op.symbol]
                )
        if validate:
            for ident in target_variety.identities:
                ok, witness = co_satisfies(self, ident, limits)
                if not ok:
                    raise ValidationError(
                        f"{name or 'co-object'} fails co-satisfaction of "
                        f"{ident.name or ident}: witness {witness}"
                    )

    def sorts(self) -> Tuple[str, ...]:
        return self.target_variety.sig.sorts

    def component(self, sort: str) -> FiniteAlgebra:
        return self.components[sort]

    def var_coproduct(self, vars: SortedSet, limits: Limits = DEFAULT_LIMITS):
        """Cached coproduct of components over a variable set, with the
        injection position of each variable."""
        key = vars.items
        cached = self._var_coproducts.get(key)
        if cached is None:
            ordered = list(vars)
            copr = coproduct(
                self.ambient,
                [self.components[s] for _, s in ordered],
                name=f"{self.name}.∐vars",
                limits=limits,
            )
            cached = (copr, {nm: k for k, (nm, _) in enumerate(ordered)})
            self._var_coproducts[key] = cached
        return cached

    def __repr__(self):
        szs = ",".join(f"{s}:{self.components[s].total_size()}" for s in self.sorts())
        return f"<CoVObject {self.name or '?'} [{szs}]>"


def co_evaluate(
    B: CoVObject,
    t: Term,
    vars: SortedSet,
    limits: Limits = DEFAULT_LIMITS,
) -> Homomorphism:
    """The W-hom component(sort t) -> coproduct over `vars` that formally
    evaluates t through the co-operations; variables become injections."""
    copr, position = B.var_coproduct(vars, limits)

    def rec(u: Term) -> Homomorphism:
        if isinstance(u, Var):
            return copr.injections[position[u.name]]
        coop = B.coops[u.symbol]
        op_copr = B.coproducts[u.symbol]
        folded = op_copr.copair([rec(a) for a in u.args], target=copr.algebra)
        return compose(folded, coop)

    return rec(t)


def co_satisfies(B: CoVObject, ident: Identity, limits: Limits = DEFAULT_LIMITS):
    """Equality of the two co-evaluated homs; witness element on failure."""
    lh = co_evaluate(B, ident.lhs, ident.vars, limits)
    rh = co_evaluate(B, ident.rhs, ident.vars, limits)
    if lh == rh:
        return True, None
    for w in B.ambient.sig.sorts:
        for i, (a, b) in enumerate(zip(lh.maps[w], rh.maps[w])):
            if a != b:
                return False, (w, i)
    return False, None


def hom_cov(
    B: CoVObject,
    X: FiniteAlgebra,
    limits: Limits = DEFAULT_LIMITS,
    name: str = "",
) -> FiniteAlgebra:
    """The covariant hom-lift: carrier Hom_W(component(i), X) per V-sort i,
    ops folded through the co-operations."""
    sig = B.target_variety.sig
    hom_lists = {s: enumerate_homs(B.components[s], X, limits) for s in sig.sorts}
    positions = {s: {h.key(): k for k, h in enumerate(hom_lists[s])} for s in sig.sorts}
    carriers = {s: tuple(f"f{k}" for k in range(len(hom_lists[s]))) for s in sig.sorts}
    tables: Dict[str, Tuple[int, ...]] = {}
    for op in sig.ops:
        sizes = [len(hom_lists[s]) for s in op.inputs]
        cells = 1
        for n in sizes:
            cells *= n
        limits.check_cells(f"hom_cov table {op.symbol}", cells)
        copr = B.coproducts[op.symbol]
        coop = B.coops[op.symbol]
        rows = []
        for args in mixed_radix(sizes):
            fs = [hom_lists[s][a] for s, a in zip(op.inputs, args)]
            folded = copr.copair(list(fs), target=X, validate=False)
            out = compose(folded, coop)
            rows.append(positions[op.output][out.key()])
        tables[op.symbol] = tuple(rows)
    alg = FiniteAlgebra(sig, carriers, tables, name=name or f"Hom({B.name},{X.name})")
    alg.generators = minimal_generators(alg)
    for ident in B.target_variety.identities:
        ok, witness = satisfies(alg, ident, limits)
        if not ok:
            raise ValidationError(f"hom_cov output violates {ident.name or ident}: {witness}")
    return alg


def hom_cov_elements(B: CoVObject, X: FiniteAlgebra, limits: Limits = DEFAULT_LIMITS):
    """The hom lists backing hom_cov, in carrier order per V-sort."""
    return {s: enumerate_homs(B.components[s], X, limits) for s in B.target_variety.sig.sorts}


def hom_cov_map(
    B: CoVObject,
    result_for_X: FiniteAlgebra,
    result_for_Y: FiniteAlgebra,
    g: Homomorphism,
    limits: Limits = DEFAULT_LIMITS,
) -> Homomorphism:
    """Covariant functoriality: postcomposition with g: X -> Y."""
    X, Y = g.source, g.target
    homs_X = hom_cov_elements(B, X, limits)
    homs_Y = hom_cov_elements(B, Y, limits)
    pos_Y = {s: {h.key(): k for k, h in enumerate(homs_Y[s])} for s in B.target_variety.sig.sorts}
    maps = {}
    for s in B.target_variety.sig.sorts:
        maps[s] = tuple(pos_Y[s][compose(g, f).key()] for f in homs_X[s])
    h = Homomorphism(result_for_X, result_for_Y, maps)
    if not is_homomorphism(h):
        raise ValidationError("postcomposition failed to be a V-homomorphism")
    return h


@dataclass(eq=False)
class CoVMorphism:
    """A per-sort family of W-homs intertwining the co-operations."""

    source: CoVObject
    target: CoVObject
    components: Dict[str, Homomorphism]
    name: str = ""

    def __post_init__(self):
        for s in self.source.sorts():
            h = self.components[s]
            if h.source is not self.source.components[s] or h.target is not self.target.components[s]:
                raise ValidationError(f"component at sort {s!r} has wrong endpoints")

    def __eq__(self, other):
        if not isinstance(other, CoVMorphism):
            return NotImplemented
        return (
            self.source is other.source
            and self.target is other.target
            and all(self.components[s] == other.components[s] for s in self.source.sorts())
        )

    def __hash__(self):
        return hash(tuple(self.components[s].key() for s in self.source.sorts()))


def coproduct_functor_map(
    src_copr: Coproduct,
    dst_copr: Coproduct,
    component_homs: Sequence[Homomorphism],
    validate: bool = True,
) -> Homomorphism:
    """The induced map between coproducts from summand-wise homs."""
    legs = [compose(dst_copr.injections[j], h) for j, h in enumerate(component_homs)]
    return src_copr.copair(legs, target=dst_copr.algebra, validate=validate)


def validate_cov_morphism(f: CoVMorphism, limits: Limits = DEFAULT_LIMITS):
    """Check every co-operation square; returns (ok, first failing op)."""
    B, C = f.source, f.target
    for op in B.target_variety.sig.ops:
        phi = coproduct_functor_map(
            B.coproducts[op.symbol],
            C.coproducts[op.symbol],
            [f.components[s] for s in op.inputs],
            validate=False,
        )
        left = compose(phi, B.coops[op.symbol])
        right = compose(C.coops[op.symbol], f.components[op.output])
        if left != right:
            return False, op.symbol
    return True, None


def cov_morphism(
    source: CoVObject, target: CoVObject, components: Mapping[str, Homomorphism], name: str = ""
) -> CoVMorphism:
    f = CoVMorphism(source, target, dict(components), name)
    ok, bad = validate_cov_morphism(f)
    if not ok:
        raise ValidationError(f"co-operation square fails for op {bad!r} in {name or 'morphism'}")
    return f


def identity_cov(B: CoVObject) -> CoVMorphism:
    return CoVMorphism(B, B, {s: finalg.identity_hom(B.components[s]) for s in B.sorts()})


def compose_cov(second: CoVMorphism, first: CoVMorphism) -> CoVMorphism:
    if first.target is not second.source:
        raise ValidationError("co-morphism composition endpoint mismatch")
    comps = {s: compose(second.components[s], first.components[s]) for s in first.source.sorts()}
    return CoVMorphism(first.source, second.target, comps)


def unit_object(V: VarietySpec, limits: Limits = DEFAULT_LIMITS, name: str = "I") -> CoVObject:
    """The unit co-object of the composition product: component at sort i is
    the free algebra on one generator of sort i; the co-operation for an op
    sends that generator to the op applied to the injected generators.

    Represents the identity functor: hom_cov(I, X) is X component-wise.
    """
    sig = V.sig
    components: Dict[str, FiniteAlgebra] = {}
    gen_idx: Dict[str, Tuple[str, int]] = {}
    for s in sig.sorts:
        F = free_algebra(V, SortedSet.of({s: ("g",)}), name=f"{name}({s})", limits=limits)
        components[s] = F.algebra
        gen_idx[s] = F.gen_elem["g"]
    obj = CoVObject.__new__(CoVObject)
    obj.target_variety = V
    obj.ambient = V
    obj.components = components
    obj.name = name
    obj.coproducts = {}
    obj.coops = {}
    obj._var_coproducts = {}
    for op in sig.ops:
        copr = coproduct(V, [components[s] for s in op.inputs], name=f"{name}.∐{op.symbol}", limits=limits)
        obj.coproducts[op.symbol] = copr
        injected = [copr.inject(j, gen_idx[s][0], gen_idx[s][1]) for j, s in enumerate(op.inputs)]
        target_elem = copr.algebra.apply(op.symbol, injected)
        out_sort, out_gen = gen_idx[op.output]
        obj.coops[op.symbol] = hom_from_generator_images(
            components[op.output], copr.algebra, {out_sort: {out_gen: target_elem}}
        )
    for ident in V.identities:
        ok, witness = co_satisfies(obj, ident, limits)
        if not ok:
            raise ValidationError(f"unit object fails co-satisfaction of {ident.name}: {witness}")
    return obj
