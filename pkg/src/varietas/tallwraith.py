"""The composition product on co-V objects, Tall-Wraith monoids and their
modules, and the finite-sets instantiation (operations monoid, Kunneth
condition).

The product B1 [] B2 is computed component-wise as the left adjoint of
hom_cov(B2, -) applied to B1's components, presented by generator classes
<a, y> (a an element of the argument algebra, y a generator of a B2
component) and realized subdirectly; all canonical isomorphisms (unitors,
associator, coproduct preservation) are constructed explicitly and
validated, never assumed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .errors import ValidationError
from .kernel import SortedSet, VarietySpec
from . import finalg
from .finalg import (
    FiniteAlgebra,
    Homomorphism,
    compose,
    enumerate_homs,
    inverse_hom,
    is_homomorphism,
    mixed_radix,
)
from .limits import DEFAULT_LIMITS, Limits
from .variety import (
    Coproduct,
    PresentedAlgebra,
    VAlgebraObject,
    coproduct,
    generator_product,
    hom_algebra_contra,
    hom_algebra_contra_elements,
    minimal_generators,
    subdirect_presentation,
)
from .coalg import (
    CoVMorphism,
    CoVObject,
    cov_morphism,
    hom_cov,
    hom_cov_elements,
    hom_from_generator_images,
    unit_object,
)


class KunnethError(ValidationError):
    """Condition (1) fails: the canonical coproduct-to-product-hom map is not bijective."""


def _ladj_gen(vsort: str, a: int, wsort: str, y: int) -> str:
    return f"c_{vsort}_{a}_{wsort}_{y}"


def _cached_hom_cov_G(B: CoVObject, limits: Limits) -> FiniteAlgebra:
    cached = getattr(B, "_hom_cov_G", None)
    if cached is None:
        G = generator_product(B.ambient, limits)
        cached = hom_cov(B, G, limits, name=f"Hom({B.name},G)")
        B._hom_cov_G = cached
    return cached


def ladj_underlying(B: CoVObject, S: SortedSet, limits: Limits = DEFAULT_LIMITS) -> Coproduct:
    """H(S): one copy of B(i) per S-element of sort i, as an iterated coproduct."""
    ordered = list(S)
    return coproduct(B.ambient, [B.components[s] for _, s in ordered], name=f"H[{B.name}]", limits=limits)


@dataclass(eq=False)
class LadjResult:
    """ladj_apply(B, A): the value of the left adjoint of hom_cov(B, -) at A.

    Generator classes <a, y> are retained: `gen_class` looks one up,
    `copy_hom` is the per-copy inclusion B(i) -> result, and `mediate`
    builds the hom induced by images of all generator classes.
    """

    B: CoVObject
    A: FiniteAlgebra
    presented: PresentedAlgebra
    _copy_homs: Dict[Tuple[str, int], Homomorphism] = field(default_factory=dict)

    @property
    def algebra(self) -> FiniteAlgebra:
        return self.presented.algebra

    def gen_class(self, vsort: str, a: int, wsort: str, y: int) -> int:
        return self.presented.gen_elem[_ladj_gen(vsort, a, wsort, y)][1]

    def copy_hom(self, vsort: str, a: int) -> Homomorphism:
        """The inclusion of the copy of B(vsort) indexed by element a of A."""
        key = (vsort, a)
        h = self._copy_homs.get(key)
        if h is None:
            comp = self.B.components[vsort]
            images = {
                w: {y: self.gen_class(vsort, a, w, y) for y in sorted(comp.generators.get(w, ()))}
                for w in comp.sig.sorts
            }
            h = hom_from_generator_images(comp, self.algebra, images)
            self._copy_homs[key] = h
        return h

    def class_of(self, vsort: str, a: int, wsort: str, b: int) -> int:
        """The class of an arbitrary component element b in copy a."""
        return self.copy_hom(vsort, a).maps[wsort][b]

    def mediate(
        self,
        target: FiniteAlgebra,
        assign: Callable[[str, int, str, int], int],
        validate: bool = True,
    ) -> Homomorphism:
        """Hom out of the result determined by images of the generator classes."""
        images = {}
        for vsort in self.A.sig.sorts:
            comp = self.B.components[vsort]
            for a in range(self.A.size(vsort)):
                for w in comp.sig.sorts:
                    for y in sorted(comp.generators.get(w, ())):
                        images[_ladj_gen(vsort, a, w, y)] = assign(vsort, a, w, y)
        return self.presented.mediate(target, images, validate=validate)


def ladj_apply(
    B: CoVObject,
    A: FiniteAlgebra,
    limits: Limits = DEFAULT_LIMITS,
    name: str = "",
) -> LadjResult:
    """Quotient of H(|A|) identifying operation images with folded
    co-operation values, computed subdirectly.

    The probe assignments are exactly Hom_V(A, hom_cov(B, G)) unfolded
    along the adjunction; this enumerates the relation-respecting maps of
    the presentation without touching the 2^|gens| search space.
    """
    V = B.target_variety
    W = B.ambient
    if A.generators is None:
        A.generators = minimal_generators(A)
    hcov = _cached_hom_cov_G(B, limits)
    hom_lists = hom_cov_elements(B, generator_product(W, limits), limits)
    phis = enumerate_homs(A, hcov, limits)
    items = []
    for w in W.sig.sorts:
        names = []
        for vsort in V.sig.sorts:
            comp = B.components[vsort]
            for a in range(A.size(vsort)):
                names.extend(_ladj_gen(vsort, a, w, y) for y in sorted(comp.generators.get(w, ())))
        items.append((w, tuple(names)))
    gens = SortedSet(tuple(items))
    envs = []
    for phi in phis:
        env = {}
        for vsort in V.sig.sorts:
            comp = B.components[vsort]
            for a in range(A.size(vsort)):
                f = hom_lists[vsort][phi(vsort, a)]
                for w in comp.sig.sorts:
                    for y in sorted(comp.generators.get(w, ())):
                        env[_ladj_gen(vsort, a, w, y)] = f(w, y)
        envs.append(env)
    presented = subdirect_presentation(
        W, gens, (), envs, name or f"ladj[{B.name}]({A.name})", limits
    )
    return LadjResult(B, A, presented)


def ladj_map(L: LadjResult, L2: LadjResult, h: Homomorphism, validate: bool = True) -> Homomorphism:
    """Functoriality in the algebra slot: copy_a(y) -> copy_{h(a)}(y)."""
    return L.mediate(L2.algebra, lambda vs, a, w, y: L2.gen_class(vs, h(vs, a), w, y), validate)


def ladj_comap(f: CoVMorphism, L: LadjResult, L2: LadjResult, validate: bool = True) -> Homomorphism:
    """Functoriality in the co-object slot along f: B -> B'."""
    return L.mediate(
        L2.algebra,
        lambda vs, a, w, y: L2.class_of(vs, a, w, f.components[vs].maps[w][y]),
        validate,
    )


def ladj_unit_iso(L: LadjResult, unit_gens: Mapping[str, Tuple[str, int]]) -> Homomorphism:
    """The iso A -> ladj(I, A), inverse of the right unitor collapse."""
    maps = {}
    for vsort in L.A.sig.sorts:
        w, g = unit_gens[vsort]
        maps[vsort] = tuple(L.gen_class(vsort, a, w, g) for a in range(L.A.size(vsort)))
    h = Homomorphism(L.A, L.algebra, maps)
    if not is_homomorphism(h) or not h.is_bijective():
        raise ValidationError("unit comparison map failed to be an isomorphism")
    return h


@dataclass(eq=False)
class TwprodResult:
    """B1 [] B2 together with the per-component LadjResults that built it."""

    B1: CoVObject
    B2: CoVObject
    object: CoVObject
    ladj: Dict[str, LadjResult]


def twprod(
    B1: CoVObject,
    B2: CoVObject,
    name: str = "",
    limits: Limits = DEFAULT_LIMITS,
) -> TwprodResult:
    """Composition product: components ladj_apply(B2, B1(i)); co-operations
    are B1's co-operations pushed through the lifted left adjoint, using an
    explicit (validated) iso between ladj-of-coproduct and
    coproduct-of-ladj."""
    V = B1.target_variety
    D = B2.ambient
    name = name or f"({B1.name}[]{B2.name})"
    ladjs = {i: ladj_apply(B2, B1.components[i], limits, name=f"{name}({i})") for i in V.sig.sorts}
    components = {i: ladjs[i].algebra for i in V.sig.sorts}
    coproducts: Dict[str, Coproduct] = {}
    coops: Dict[str, Homomorphism] = {}
    for op in V.sig.ops:
        copr = coproduct(D, [components[s] for s in op.inputs], name=f"{name}.∐{op.symbol}", limits=limits)
        coproducts[op.symbol] = copr
        psi = B1.coops[op.symbol]
        mixed = ladj_apply(B2, B1.coproducts[op.symbol].algebra, limits, name=f"{name}.mix{op.symbol}")
        step1 = ladj_map(ladjs[op.output], mixed, psi, validate=True)
        lam = _coproduct_preservation_iso(B2, B1.coproducts[op.symbol], mixed, copr, op.inputs, ladjs)
        coops[op.symbol] = compose(lam, step1)
    obj = CoVObject(
        V,
        D,
        components,
        coops=coops,
        coproducts=coproducts,
        name=name,
        validate=True,
        limits=limits,
    )
    return TwprodResult(B1, B2, obj, ladjs)


def _coproduct_preservation_iso(
    B2: CoVObject,
    arg_copr: Coproduct,
    mixed: LadjResult,
    result_copr: Coproduct,
    input_sorts: Sequence[str],
    ladjs: Mapping[str, LadjResult],
) -> Homomorphism:
    """The canonical iso ladj(B2, coproduct of As) -> coproduct of ladj(B2, As).

    Defined on the generator classes over injected elements (which
    generate, by rewriting through the identification relations) and
    extended by the forced hom completion; bijectivity is checked.
    """
    partial: Dict[str, Dict[int, int]] = {w: {} for w in mixed.algebra.sig.sorts}
    for k, s in enumerate(input_sorts):
        inj = arg_copr.injections[k]
        comp = B2.components[s]
        A_k = inj.source
        for vs in A_k.sig.sorts:
            for b in range(A_k.size(vs)):
                c = inj(vs, b)
                for w in comp.sig.sorts:
                    for y in sorted(comp.generators.get(w, ())):
                        src = mixed.gen_class(vs, c, w, y)
                        dst = result_copr.injections[k].maps[w][ladjs[s].gen_class(vs, b, w, y)]
                        prev = partial[w].get(src)
                        if prev is not None and prev != dst:
                            raise ValidationError("coproduct preservation images conflict")
                        partial[w][src] = dst
    lam = hom_from_generator_images(mixed.algebra, result_copr.algebra, partial)
    if not lam.is_bijective():
        raise ValidationError("ladj failed to preserve a coproduct (not bijective)")
    return lam


def twprod_map(
    f: CoVMorphism,
    g: CoVMorphism,
    source: TwprodResult,
    target: TwprodResult,
    validate: bool = True,
) -> CoVMorphism:
    """Bifunctoriality: (f [] g): B1[]B2 -> B1'[]B2' on generator classes
    <a, y> -> <f(a), g(y)>."""
    comps = {}
    for i in source.B1.target_variety.sig.sorts:
        L, L2 = source.ladj[i], target.ladj[i]
        fi = f.components[i]
        comps[i] = L.mediate(
            L2.algebra,
            lambda vs, a, w, y, fi=fi: L2.class_of(vs, fi(vs, a), w, g.components[vs].maps[w][y]),
            validate=validate,
        )
    m = CoVMorphism(source.object, target.object, comps)
    if validate:
        from .coalg import validate_cov_morphism

        ok, bad = validate_cov_morphism(m)
        if not ok:
            raise ValidationError(f"twprod_map fails the co-operation square at {bad!r}")
    return m


def left_unitor(tp: TwprodResult, validate: bool = True) -> CoVMorphism:
    """twprod(I, B) -> B: collapse <g_i, y> -> y (iso)."""
    B = tp.B2
    comps = {}
    for i in tp.B1.target_variety.sig.sorts:
        L = tp.ladj[i]
        I_i = tp.B1.components[i]
        comp = B.components[i]
        partial: Dict[str, Dict[int, int]] = {w: {} for w in comp.sig.sorts}
        gsort, gidx = _single_generator(I_i)
        for w in comp.sig.sorts:
            for y in sorted(comp.generators.get(w, ())):
                partial[w][L.gen_class(i, gidx, w, y)] = y
        h = hom_from_generator_images(L.algebra, comp, partial)
        if validate and not h.is_bijective():
            raise ValidationError("left unitor is not bijective")
        comps[i] = h
    m = CoVMorphism(tp.object, B, comps)
    if validate:
        from .coalg import validate_cov_morphism

        ok, bad = validate_cov_morphism(m)
        if not ok:
            raise ValidationError(f"left unitor fails the co-operation square at {bad!r}")
    return m


def right_unitor(tp: TwprodResult, validate: bool = True) -> CoVMorphism:
    """twprod(B, I) -> B: collapse <b, g_j> -> b (iso)."""
    B = tp.B1
    comps = {}
    for i in B.target_variety.sig.sorts:
        L = tp.ladj[i]
        unit_gens = {vs: _single_generator(tp.B2.components[vs]) for vs in B.components[i].sig.sorts}
        inv = ladj_unit_iso(L, unit_gens)
        comps[i] = inverse_hom(inv)
    m = CoVMorphism(tp.object, B, comps)
    if validate:
        from .coalg import validate_cov_morphism

        ok, bad = validate_cov_morphism(m)
        if not ok:
            raise ValidationError(f"right unitor fails the co-operation square at {bad!r}")
    return m


def _single_generator(comp: FiniteAlgebra) -> Tuple[str, int]:
    found = None
    for w in comp.sig.sorts:
        for y in sorted(comp.generators.get(w, ())):
            if found is not None:
                raise ValidationError("component has more than one recorded generator")
            found = (w, y)
    if found is None:
        raise ValidationError("component has no recorded generator")
    return found


def ladj_assoc(
    mid: LadjResult,
    lhs: LadjResult,
    rhs: LadjResult,
    tp23: TwprodResult,
    validate: bool = True,
) -> Homomorphism:
    """The canonical iso ladj(B3, ladj(B2, A)) -> ladj(B2[]B3, A).

    mid = ladj(B2, A); lhs = ladj(B3, mid); rhs = ladj(tp23.object, A).
    Defined on classes <<a,y>, z> -> <a, <y,z>> and completed; bijective.
    """
    A = mid.A
    partial: Dict[str, Dict[int, int]] = {w: {} for w in lhs.algebra.sig.sorts}
    B2, B3 = tp23.B1, tp23.B2
    for vsort in A.sig.sorts:
        comp2 = B2.components[vsort]
        for a in range(A.size(vsort)):
            rc = rhs.copy_hom(vsort, a)
            for v2 in comp2.sig.sorts:
                for y in range(comp2.size(v2)):
                    m = mid.class_of(vsort, a, v2, y)
                    comp3 = B3.components[v2]
                    for w in comp3.sig.sorts:
                        for z in sorted(comp3.generators.get(w, ())):
                            src = lhs.gen_class(v2, m, w, z)
                            u = tp23.ladj[vsort].gen_class(v2, y, w, z)
                            dst = rc.maps[w][u]
                            prev = partial[w].get(src)
                            if prev is not None and prev != dst:
                                raise ValidationError("associator images conflict (not well defined)")
                            partial[w][src] = dst
    h = hom_from_generator_images(lhs.algebra, rhs.algebra, partial)
    if validate and not h.is_bijective():
        raise ValidationError("associator is not bijective")
    return h


def associator(
    B1: CoVObject,
    B2: CoVObject,
    B3: CoVObject,
    cache: "TwCache",
) -> CoVMorphism:
    """The canonical iso twprod(twprod(B1,B2),B3) -> twprod(B1,twprod(B2,B3)),
    on generator classes <<a,b>,c> -> <a,<b,c>>, validated bijective and
    intertwining."""
    tp12 = cache.product(B1, B2)
    tp23 = cache.product(B2, B3)
    lhs = cache.product(tp12.object, B3)
    rhs = cache.product(B1, tp23.object)
    comps = {i: ladj_assoc(tp12.ladj[i], lhs.ladj[i], rhs.ladj[i], tp23) for i in B1.sorts()}
    alpha = CoVMorphism(lhs.object, rhs.object, comps)
    from .coalg import validate_cov_morphism

    ok, bad = validate_cov_morphism(alpha)
    if not ok:
        raise ValidationError(f"associator fails the co-operation square at {bad!r}")
    return alpha


class TwCache:
    """Builds and memoizes products, unit objects and unitors by identity,
    so morphism equalities stay plain table equalities on shared objects."""

    def __init__(self, limits: Limits = DEFAULT_LIMITS):
        self.limits = limits
        self._products: Dict[Tuple[int, int], TwprodResult] = {}
        self._units: Dict[int, CoVObject] = {}

    def unit(self, V: VarietySpec) -> CoVObject:
        got = self._units.get(id(V))
        if got is None:
            got = unit_object(V, self.limits)
            self._units[id(V)] = got
        return got

    def product(self, B1: CoVObject, B2: CoVObject) -> TwprodResult:
        key = (id(B1), id(B2))
        got = self._products.get(key)
        if got is None:
            got = twprod(B1, B2, limits=self.limits)
            self._products[key] = got
        return got


@dataclass(eq=False)
class LawResult:
    name: str
    ok: bool
    witness: Optional[tuple] = None


@dataclass(eq=False)
class CertificationReport:
    subject: str
    laws: List[LawResult]

    @property
    def ok(self) -> bool:
        return all(l.ok for l in self.laws)

    def lines(self) -> List[str]:
        return [f"{'PASS' if l.ok else 'FAIL'} {self.subject}: {l.name}" + (f" witness={l.witness}" if l.witness else "") for l in self.laws]


def _cov_eq(f: CoVMorphism, g: CoVMorphism) -> Optional[tuple]:
    """None if equal; else (sort, wsort, element) where components differ."""
    for s in f.source.sorts():
        a, b = f.components[s], g.components[s]
        for w in a.source.sig.sorts:
            for i, (x, y) in enumerate(zip(a.maps[w], b.maps[w])):
                if x != y:
                    return (s, w, i)
    return None


@dataclass(eq=False)
class TallWraithMonoid:
    """A co-V object with multiplication and unit, plus its certification."""

    T: CoVObject
    mu: CoVMorphism
    eta: CoVMorphism
    report: Optional[CertificationReport] = None


@dataclass(eq=False)
class TWModule:
    monoid: TallWraithMonoid
    M: CoVObject
    rho: CoVMorphism
    report: Optional[CertificationReport] = None


def tw_monoid_check(
    T: CoVObject,
    mu: CoVMorphism,
    eta: CoVMorphism,
    cache: Optional[TwCache] = None,
    limits: Limits = DEFAULT_LIMITS,
) -> CertificationReport:
    """Associativity and both unit laws, as exact morphism equalities."""
    cache = cache or TwCache(limits)
    from .coalg import identity_cov, compose_cov

    I = eta.source
    id_T = identity_cov(T)
    TT = cache.product(T, T)
    if mu.source is not TT.object:
        raise ValidationError("mu must be defined on the cached twprod(T, T); build it via the same TwCache")
    laws = []
    TTT_l = cache.product(TT.object, T)
    TTT_r = cache.product(T, TT.object)
    assoc_comps = {
        i: ladj_assoc(TT.ladj[i], TTT_l.ladj[i], TTT_r.ladj[i], TT) for i in T.sorts()
    }
    alpha = CoVMorphism(TTT_l.object, TTT_r.object, assoc_comps)
    left = compose_cov(mu, twprod_map(mu, id_T, TTT_l, TT))
    right = compose_cov(mu, compose_cov(twprod_map(id_T, mu, TTT_r, TT), alpha))
    laws.append(LawResult("associativity", _cov_eq(left, right) is None, _cov_eq(left, right)))
    IT = cache.product(I, T)
    TI = cache.product(T, I)
    lu = left_unitor(IT)
    ru = right_unitor(TI)
    left_unit = compose_cov(mu, twprod_map(eta, id_T, IT, TT))
    w = _cov_eq(left_unit, lu)
    laws.append(LawResult("left unit", w is None, w))
    right_unit = compose_cov(mu, twprod_map(id_T, eta, TI, TT))
    w = _cov_eq(right_unit, ru)
    laws.append(LawResult("right unit", w is None, w))
    return CertificationReport(T.name or "monoid", laws)


def tw_module_check(
    monoid: TallWraithMonoid,
    M: CoVObject,
    rho: CoVMorphism,
    cache: Optional[TwCache] = None,
    limits: Limits = DEFAULT_LIMITS,
) -> CertificationReport:
    """Action square with mu and unit triangle with eta."""
    cache = cache or TwCache(limits)
    from .coalg import identity_cov, compose_cov

    T, mu, eta = monoid.T, monoid.mu, monoid.eta
    I = eta.source
    id_T = identity_cov(T)
    id_M = identity_cov(M)
    TT = cache.product(T, T)
    TM = cache.product(T, M)
    if rho.source is not TM.object:
        raise ValidationError("rho must be defined on the cached twprod(T, M); build it via the same TwCache")
    TTM = cache.product(TT.object, M)
    T_TM = cache.product(T, TM.object)
    alpha = CoVMorphism(
        TTM.object,
        T_TM.object,
        {i: ladj_assoc(TT.ladj[i], TTM.ladj[i], T_TM.ladj[i], TM) for i in T.sorts()},
    )
    laws = []
    left = compose_cov(rho, twprod_map(mu, id_M, TTM, TM))
    right = compose_cov(rho, compose_cov(twprod_map(id_T, rho, T_TM, TM), alpha))
    w = _cov_eq(left, right)
    laws.append(LawResult("action square", w is None, w))
    IM = cache.product(I, M)
    lu = left_unitor(IM)
    left_tri = compose_cov(rho, twprod_map(eta, id_M, IM, TM))
    w = _cov_eq(left_tri, lu)
    laws.append(LawResult("unit triangle", w is None, w))
    return CertificationReport(M.name or "module", laws)


# ---------------------------------------------------------------------------
# the finite-sets instantiation: operations monoid and the Kunneth condition


def kunneth_data(
    Aobj: VAlgebraObject,
    word: Sequence[str],
    limits: Limits = DEFAULT_LIMITS,
    summands: Optional[Sequence[FiniteAlgebra]] = None,
):
    """The canonical V-hom from the coproduct of the represented algebras
    into the algebra represented on the product of carriers.

    Returns (coproduct, product algebra, represented algebra, kappa).
    `summands` may supply prebuilt hom-lift algebras for the word's sorts.
    """
    V = Aobj.variety
    comps = [Aobj.components[i] for i in word]
    prod, projections = finalg.product(comps, sig=Aobj.ambient.sig, limits=limits)
    if summands is None:
        summands = [hom_algebra_contra(Aobj, Aobj.components[i], limits, name=f"T({i})") for i in word]
    target = hom_algebra_contra(Aobj, prod, limits, name="T(prod)")
    target_elems = hom_algebra_contra_elements(Aobj, prod, limits)
    positions = {s: {h.key(): k for k, h in enumerate(target_elems[s])} for s in V.sig.sorts}
    copr = coproduct(V, list(summands), name="∐T", limits=limits)
    legs = []
    for j, i in enumerate(word):
        elems_j = hom_algebra_contra_elements(Aobj, Aobj.components[i], limits)
        maps = {}
        for s in V.sig.sorts:
            maps[s] = tuple(positions[s][compose(f, projections[j]).key()] for f in elems_j[s])
        legs.append(Homomorphism(summands[j], target, maps))
    kappa = copr.copair(legs, target=target, validate=True)
    return copr, prod, target, kappa


@dataclass(eq=False)
class KunnethReport:
    word: Tuple[str, ...]
    ok: bool
    injective: bool
    surjective: bool
    witness: Optional[tuple] = None  # (sort, elem, elem') merged, or (sort, target-elem) missed


def kunneth_check(
    Aobj: VAlgebraObject,
    words: Sequence[Sequence[str]],
    limits: Limits = DEFAULT_LIMITS,
) -> List[KunnethReport]:
    """Decide condition (1) for each input word of sorts, with witnesses."""
    out = []
    for word in words:
        copr, prod, target, kappa = kunneth_data(Aobj, word, limits)
        injective, surjective = True, True
        witness = None
        for s in Aobj.variety.sig.sorts:
            seen: Dict[int, int] = {}
            for i, v in enumerate(kappa.maps[s]):
                if v in seen:
                    injective = False
                    if witness is None:
                        witness = ("merged", s, seen[v], i)
                else:
                    seen[v] = i
            if len(seen) != target.size(s):
                surjective = False
                if witness is None:
                    missed = next(v for v in range(target.size(s)) if v not in seen)
                    witness = ("missed", s, missed)
        out.append(KunnethReport(tuple(word), injective and surjective, injective, surjective, witness))
    return out


def operations_monoid(
    Aobj: VAlgebraObject,
    cache: Optional[TwCache] = None,
    limits: Limits = DEFAULT_LIMITS,
) -> TallWraithMonoid:
    """The Tall-Wraith monoid of self-operations of a V-algebra object in
    finite sets: T(i) = Hom(carrier(i), A), mu from composition of maps
    through the composition-product presentation, eta classifying the
    identity maps.

    Requires condition (1) (kunneth_check) for every op input word; raises
    KunnethError otherwise.
    """
    cache = cache or TwCache(limits)
    V = Aobj.variety
    sig = V.sig
    components = {
        i: hom_algebra_contra(Aobj, Aobj.components[i], limits, name=f"Ops({i})") for i in sig.sorts
    }
    elems = {i: hom_algebra_contra_elements(Aobj, Aobj.components[i], limits) for i in sig.sorts}
    positions = {
        i: {s: {h.key(): k for k, h in enumerate(elems[i][s])} for s in sig.sorts} for i in sig.sorts
    }
    coproducts: Dict[str, Coproduct] = {}
    coops: Dict[str, Homomorphism] = {}
    for op in sig.ops:
        copr, prod, target, kappa = kunneth_data(Aobj, op.inputs, limits)
        if not kappa.is_bijective():
            raise KunnethError(
                f"condition (1) fails for op {op.symbol!r} (input word {op.inputs})"
            )
        # rebuild the coproduct over THE component instances so the co-object
        # caches stay consistent
        copr2 = coproduct(V, [components[s] for s in op.inputs], name=f"Ops.∐{op.symbol}", limits=limits)
        iso_legs = []
        for j, s in enumerate(op.inputs):
            maps = {vs: tuple(range(components[s].size(vs))) for vs in sig.sorts}
            iso_legs.append(Homomorphism(components[s], copr.algebra, {
                vs: tuple(copr.injections[j].maps[vs]) for vs in sig.sorts
            }))
        transfer = copr2.copair(iso_legs, target=copr.algebra, validate=True)
        # omega^*: precompose with the structure map (a W-hom into comp(o))
        target_positions = {vs: {h.key(): k for k, h in enumerate(hom_algebra_contra_elements(Aobj, prod, limits)[vs])} for vs in sig.sorts}
        omega_star_maps = {}
        for vs in sig.sorts:
            row = []
            for f in elems[op.output][vs]:
                row.append(target_positions[vs][compose(f, Aobj.structure[op.symbol]).key()])
            omega_star_maps[vs] = tuple(row)
        omega_star = Homomorphism(components[op.output], target, omega_star_maps)
        if not is_homomorphism(omega_star):
            raise ValidationError("structure-map precomposition is not a V-hom")
        coop = compose(inverse_hom(kappa), omega_star)
        coop = compose(inverse_hom(transfer), coop)
        coproducts[op.symbol] = copr2
        coops[op.symbol] = coop
    T = CoVObject(V, V, components, coops=coops, coproducts=coproducts, name=f"Ops[{Aobj.name}]", validate=True, limits=limits)
    # mu: composition of maps; on generator classes <c, y> -> y o c
    TT = cache.product(T, T)
    mu_comps = {}
    for i in sig.sorts:
        L = TT.ladj[i]

        def assign(vs, a, w, y, i=i):
            c = elems[i][vs][a]
            g = elems[vs][w][y]
            return positions[i][w][compose(g, c).key()]

        mu_comps[i] = L.mediate(components[i], assign, validate=True)
    mu = cov_morphism(TT.object, T, mu_comps, name="mu")
    I = cache.unit(V)
    eta_comps = {}
    for i in sig.sorts:
        ident = finalg.identity_hom(Aobj.components[i])
        gidx = positions[i][i][ident.key()]
        gsort, gelem = _single_generator(I.components[i])
        eta_comps[i] = hom_from_generator_images(I.components[i], components[i], {gsort: {gelem: gidx}})
    eta = cov_morphism(I, T, eta_comps, name="eta")
    report = tw_monoid_check(T, mu, eta, cache, limits)
    if not report.ok:
        raise ValidationError("operations monoid failed its own certification: " + "; ".join(report.lines()))
    return TallWraithMonoid(T, mu, eta, report)


def operations_action(
    monoid: TallWraithMonoid,
    Aobj: VAlgebraObject,
    X: FiniteAlgebra,
    cache: Optional[TwCache] = None,
    limits: Limits = DEFAULT_LIMITS,
):
    """The action of the operations monoid on M = Hom(X, A), as the V-hom
    ladj(T, M) -> M sending <c, y> to y o c; returns (M, ladj result, action)."""
    cache = cache or TwCache(limits)
    T = monoid.T
    V = Aobj.variety
    M = hom_algebra_contra(Aobj, X, limits, name=f"Hom({X.name},A)")
    M_elems = hom_algebra_contra_elements(Aobj, X, limits)
    M_pos = {s: {h.key(): k for k, h in enumerate(M_elems[s])} for s in V.sig.sorts}
    T_elems = {i: hom_cov_elements(T, generator_product(V, limits), limits) for i in V.sig.sorts}
    LTM = ladj_apply(T, M, limits, name="T.M")

    def assign(vs, a, w, y):
        c = M_elems[vs][a]
        # y indexes an element of T(vs) at V-sort w: a map comp(vs) -> comp(w)
        g = hom_algebra_contra_elements(Aobj, Aobj.components[vs], limits)[w][y]
        return M_pos[w][compose(g, c).key()]

    alpha = LTM.mediate(M, assign, validate=True)
    return M, LTM, alpha


def algebra_module_check(
    monoid: TallWraithMonoid,
    M: FiniteAlgebra,
    LTM: LadjResult,
    alpha: Homomorphism,
    cache: Optional[TwCache] = None,
    limits: Limits = DEFAULT_LIMITS,
) -> CertificationReport:
    """Monad-algebra laws for an action of the monoid on a plain V-algebra:
    associativity through the canonical iso ladj(T, ladj(T, M)) =
    ladj(T[]T, M), and the unit law through ladj(I, M)."""
    T, mu, eta = monoid.T, monoid.mu, monoid.eta
    cache = cache or TwCache(limits)
    TT = cache.product(T, T)
    laws = []
    L2 = ladj_apply(T, LTM.algebra, limits)
    LTTM = ladj_apply(TT.object, M, limits)
    iso = ladj_assoc(LTM, L2, LTTM, TT)
    route1 = compose(alpha, ladj_map(L2, LTM, alpha))
    comap = ladj_comap(mu, LTTM, LTM)
    route2 = compose(alpha, compose(comap, iso))
    w = None if route1 == route2 else _first_diff(route1, route2)
    laws.append(LawResult("action square", w is None, w))
    I = cache.unit(monoid.T.target_variety)
    LIM = ladj_apply(I, M, limits)
    unit_gens = {vs: _single_generator(I.components[vs]) for vs in M.sig.sorts}
    ui = ladj_unit_iso(LIM, unit_gens)
    unit_route = compose(alpha, compose(ladj_comap(eta, LIM, LTM), ui))
    idw = None if unit_route == finalg.identity_hom(M) else _first_diff(unit_route, finalg.identity_hom(M))
    laws.append(LawResult("unit law", idw is None, idw))
    return CertificationReport(M.name or "algebra module", laws)


def _first_diff(a: Homomorphism, b: Homomorphism) -> Optional[tuple]:
    for s in a.source.sig.sorts:
        for i, (x, y) in enumerate(zip(a.maps[s], b.maps[s])):
            if x != y:
                return (s, i, x, y)
    return None
