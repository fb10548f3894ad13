"""Homogeneous rational maps between projective spaces.

Points carry polynomial coordinates, so the image of a whole hypersurface is
obtained by evaluating at a parametrized running point and regularizing, in
the same way as a constant point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from math import gcd as igcd, lcm
from pathlib import Path
from typing import Mapping, Sequence

from .poly import (
    Poly,
    PolyError,
    VarSpec,
    divide_exact,
    gcd,
    homogeneous_degree,
    merge_vars,
    parse,
    substitute,
    valuation,
)

__all__ = [
    "ProjPoint",
    "RationalMap",
    "KFactor",
    "SingularPointHit",
    "NotInversePair",
    "GenericityError",
    "MapFileError",
    "compose_raw",
    "compose",
    "pullback",
    "extract_k_factor",
    "vanishes_on",
    "singular_locus_dimension_hint",
    "specialize_polys",
    "load_map_file",
    "parse_map_text",
    "identity_map",
]


class SingularPointHit(Exception):
    """Every component of the map vanishes identically at the point."""

    def __init__(self, point, map_name=""):
        super().__init__(f"{map_name or 'map'} is undefined at {point}")
        self.point = point


class NotInversePair(Exception):
    pass


class GenericityError(Exception):
    pass


class MapFileError(ValueError):
    pass


# -- points -----------------------------------------------------------------


class ProjPoint:
    """A point of projective space with polynomial coordinates.

    The coordinates share one variable tuple (the running parameters of the
    point).  Constant points are the special case with no free symbols.
    """

    __slots__ = ("coords",)

    def __init__(self, coords: Sequence[Poly | int], variables: Sequence[str] | None = None):
        polys = [c for c in coords if isinstance(c, Poly)]
        names = merge_vars(*(p.variables for p in polys), variables or ())
        if variables is not None:
            names = merge_vars(variables, names)
        out = []
        for c in coords:
            if isinstance(c, Poly):
                out.append(c.extend(names))
            else:
                out.append(Poly.const(int(c), names))
        if all(c.is_zero() for c in out):
            raise ValueError("all coordinates of a projective point are zero")
        self.coords = tuple(out)

    @classmethod
    def constant(cls, values: Sequence[int | Fraction], variables: Sequence[str] = ()):
        den = reduce(lcm, (Fraction(v).denominator for v in values), 1)
        return cls([Poly.const(int(Fraction(v) * den), variables) for v in values], variables)

    @property
    def variables(self) -> tuple[str, ...]:
        return self.coords[0].variables

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def is_constant(self) -> bool:
        return all(c.is_constant() for c in self.coords)

    def constant_coords(self) -> tuple[int, ...]:
        return tuple(c.constant_value() for c in self.regularize().coords)

    def extend(self, variables) -> "ProjPoint":
        return ProjPoint([c.extend(variables) for c in self.coords])

    def regularize(self) -> "ProjPoint":
        """Remove the common polynomial factor and integer content; fix the sign."""
        coords, _ = regularize_factored([[c] for c in self.coords])
        return ProjPoint(coords)

    def projectively_equal(self, other: "ProjPoint") -> bool:
        if len(self) != len(other):
            return False
        names = merge_vars(self.variables, other.variables)
        a = [c.extend(names) for c in self.coords]
        b = [c.extend(names) for c in other.coords]
        # all 2x2 minors of the 2 x (N+1) matrix vanish
        pivot = next(i for i, c in enumerate(a) if not c.is_zero())
        if b[pivot].is_zero():
            return False
        return all((a[i] * b[pivot] - b[i] * a[pivot]).is_zero() for i in range(len(a)))

    def substitute(self, bindings: Mapping[str, Poly]) -> "ProjPoint":
        return ProjPoint([substitute(c, bindings) for c in self.coords])

    def __eq__(self, other):
        return isinstance(other, ProjPoint) and self.projectively_equal(other)

    def __hash__(self):
        return hash(len(self.coords))

    def __repr__(self):
        return "[" + ", ".join(str(c) for c in self.coords) + "]"


def _normalize_sign(coords: list[Poly]) -> list[Poly]:
    for c in coords:
        if not c.is_zero():
            if c.leading_coefficient() < 0:
                return [-x for x in coords]
            return coords
    return coords


def _gcd_against(p: Poly, factors: list[Poly]) -> tuple[list[Poly], list[Poly]]:
    """Split ``gcd(p, prod(factors))`` into pieces, dividing them out of ``factors``.

    Uses gcd(p, W1*W2) = gcd(p, W1) * gcd(p / gcd(p, W1), W2).
    """
    pieces = []
    rest = p
    out = list(factors)
    for j, w in enumerate(out):
        if rest.is_constant():
            break
        if w.is_constant():
            continue
        h = gcd(rest, w)
        if not h.is_constant():
            pieces.append(h)
            rest = divide_exact(rest, h)
            out[j] = divide_exact(w, h)
    return pieces, out


def regularize_factored(components: Sequence[Sequence[Poly]]) -> tuple[list[Poly], Poly]:
    """Remove the common factor of a tuple of products.

    ``components[i]`` is a list of polynomial factors whose product is the
    i-th coordinate.  Returns the expanded, coprime coordinates (primitive as
    a tuple, first nonzero leading coefficient positive) and the removed
    polynomial factor.  Raises ``ValueError`` if every coordinate is zero.
    """
    comps = [list(c) for c in components]
    variables = comps[0][0].variables if comps[0] else ()
    zero = [any(f.is_zero() for f in c) for c in comps]
    live = [i for i, z in enumerate(zero) if not z]
    if not live:
        raise ValueError("all coordinates vanish")
    # start from the cheapest live coordinate
    start = min(live, key=lambda i: sum(f.degree() for f in comps[i]))
    common = [f.primitive() for f in comps[start] if not f.is_constant()]
    for i in live:
        if i == start or not common:
            continue
        new_common = []
        remaining = comps[i]
        for piece in common:
            found, remaining = _gcd_against(piece, remaining)
            new_common.extend(found)
        common = new_common
    removed = reduce(lambda a, b: a * b, common, Poly.const(1, variables))
    out = []
    for i, c in enumerate(comps):
        if zero[i]:
            out.append(None)
            continue
        factors = list(c)
        for piece in common:
            found, factors = _gcd_against(piece, factors)
            left = reduce(lambda a, b: divide_exact(a, b), found, piece)
            if not left.is_constant():
                raise AssertionError("common factor does not divide a coordinate")
        out.append(reduce(lambda a, b: a * b, factors))
    some = next(p for p in out if p is not None)
    out = [p if p is not None else Poly.const(0, some.variables) for p in out]
    names = merge_vars(*(p.variables for p in out))
    out = [p.extend(names) for p in out]
    content = reduce(igcd, (p.content() for p in out if not p.is_zero()), 0)
    if content > 1:
        out = [Poly(p.raw / content, p.variables) if not p.is_zero() else p for p in out]
    return _normalize_sign(out), removed


# -- maps ---------------------------------------------------------------------


@dataclass(frozen=True)
class KFactor:
    """Common factor ``unit * base**exponent`` of a composition with the identity.

    The trivial factor of a linear involution is ``base == 1, exponent == 0``.
    """

    base: Poly
    exponent: int
    unit: int = 1

    def value(self) -> Poly:
        return self.base ** self.exponent * self.unit


class RationalMap:
    """``N+1`` homogeneous polynomials of a common degree, in lowest terms.

    ``guards`` are parameter polynomials that must not vanish for a
    specialization to count as generic.  ``candidates`` are hypersurface
    equations expected to carry the factors of pull-backs.  ``gauge`` lists
    parameter values that symbolic runs may fix without loss of generality
    (a rescaling of parameters combined with a linear change of coordinates
    maps the general member of the family onto the gauge-fixed one).
    """

    def __init__(self, varspec: VarSpec, components: Sequence[Poly], name: str = "",
                 guards: Sequence[Poly] = (), candidates: Sequence[Poly] = (),
                 gauge: Mapping[str, int] | None = None, check: bool = True):
        self.varspec = varspec
        names = varspec.all
        self.components = tuple(c.extend(names) for c in components)
        self.name = name
        self.guards = tuple(g.extend(names) for g in guards)
        self.candidates = tuple(c.extend(names) for c in candidates)
        self.gauge = dict(gauge or {})
        if check:
            self._check()

    def _check(self):
        degs = {homogeneous_degree(c, self.varspec.projective) for c in self.components
                if not c.is_zero()}
        if None in degs or len(degs) != 1:
            raise ValueError(f"components of {self.name or 'map'} are not homogeneous "
                             "of a common degree")
        if degs.pop() < 1:
            raise ValueError("map degree must be at least 1")
        common = reduce(gcd, self.components)
        if common.degree(self.varspec.projective) > 0:
            raise ValueError(f"components share the factor {common}")

    @property
    def dimension(self) -> int:
        return len(self.varspec.projective) - 1

    @property
    def degree(self) -> int:
        return next(homogeneous_degree(c, self.varspec.projective) for c in self.components
                    if not c.is_zero())

    @property
    def params(self) -> tuple[str, ...]:
        return self.varspec.params

    def __repr__(self):
        return f"RationalMap({self.name!r}, degree={self.degree})"

    @cached_property
    def factorization(self) -> tuple[tuple[Poly, ...], tuple[tuple[int, ...], ...], tuple[int, ...]]:
        """Coprime factor base of the components.

        Returns ``(base, exponents, units)`` with
        ``components[i] == units[i] * prod(base[j] ** exponents[i][j])``.
        """
        base: list[Poly] = []
        for c in self.components:
            if c.is_zero() or c.is_constant():
                continue
            base.append(c.primitive())
        changed = True
        while changed:
            changed = False
            for i in range(len(base)):
                for j in range(i + 1, len(base)):
                    h = gcd(base[i], base[j])
                    if h.is_constant():
                        continue
                    a, b = divide_exact(base[i], h), divide_exact(base[j], h)
                    rest = [base[k] for k in range(len(base)) if k not in (i, j)]
                    base = rest + [p.primitive() for p in (a, b, h) if not p.is_constant()]
                    changed = True
                    break
                if changed:
                    break
            # merge duplicates
            uniq = []
            for p in base:
                if p not in uniq:
                    uniq.append(p)
            base = uniq
        exps, units = [], []
        for c in self.components:
            row = [0] * len(base)
            if c.is_zero():
                exps.append(tuple(row))
                units.append(0)
                continue
            rest = c
            for j, b in enumerate(base):
                row[j], rest = valuation(rest, b)
            if not rest.is_constant():
                raise AssertionError("factor base does not cover a component")
            exps.append(tuple(row))
            units.append(rest.constant_value())
        return tuple(base), tuple(exps), tuple(units)

    def shared_factors(self) -> list[Poly]:
        """Factor-base elements dividing at least two components."""
        base, exps, _ = self.factorization
        return [b for j, b in enumerate(base) if sum(1 for row in exps if row[j]) >= 2]

    def exceptional_candidates(self) -> list[Poly]:
        return list(self.candidates) or self.shared_factors()

    # -- evaluation -----------------------------------------------------

    def _bindings(self, point: ProjPoint) -> tuple[dict[str, Poly], tuple[str, ...]]:
        if len(point) != len(self.varspec.projective):
            raise ValueError(f"point has {len(point)} coordinates, map expects "
                             f"{len(self.varspec.projective)}")
        names = merge_vars(point.variables, self.varspec.params)
        return ({v: c.extend(names) for v, c in zip(self.varspec.projective, point.coords)},
                names)

    def image_factors(self, point: ProjPoint) -> list[list[Poly]]:
        """Unreduced image coordinates, each as a list of factors."""
        bindings, names = self._bindings(point)
        base, exps, units = self.factorization
        values = [substitute(b, bindings, names).extend(names) for b in base]
        out = []
        for row, unit in zip(exps, units):
            factors = [Poly.const(unit, names)]
            for j, e in enumerate(row):
                factors.extend([values[j]] * e)
            out.append(factors)
        return out

    def raw_image(self, point: ProjPoint) -> list[Poly]:
        bindings, names = self._bindings(point)
        return [substitute(c, bindings, names).extend(names) for c in self.components]

    def evaluate(self, point: ProjPoint, regularize: bool = True) -> ProjPoint:
        """Image of ``point``; regularized unless asked otherwise.

        Raises :class:`SingularPointHit` if every component vanishes there.
        """
        if not regularize:
            raw = self.raw_image(point)
            if all(c.is_zero() for c in raw):
                raise SingularPointHit(point, self.name)
            return ProjPoint(raw)
        return self.evaluate_with_factor(point)[0]

    def evaluate_with_factor(self, point: ProjPoint) -> tuple[ProjPoint, Poly]:
        factored = self.image_factors(point)
        try:
            coords, removed = regularize_factored(factored)
        except ValueError:
            raise SingularPointHit(point, self.name) from None
        return ProjPoint(coords), removed

    def __call__(self, point: ProjPoint) -> ProjPoint:
        return self.evaluate(point)

    # -- parameters -----------------------------------------------------

    def specialize(self, values: Mapping[str, int | Fraction], name: str | None = None,
                   check_guards: bool = True) -> "RationalMap":
        """Bind some parameters to rationals; components are cleared jointly."""
        if check_guards:
            self.check_genericity(values)
        comps = specialize_polys(self.components, values)
        remaining = tuple(p for p in self.varspec.params if p not in values)
        vs = VarSpec(self.varspec.projective, remaining)
        guards = [g for g in (_spec1(g, values) for g in self.guards)
                  if not g.is_constant()]
        cands = [_spec1(c, values) for c in self.candidates]
        gauge = {k: v for k, v in self.gauge.items() if k not in values}
        return RationalMap(vs, [c.extend(vs.all) for c in comps], name or self.name,
                           guards=[g.extend(vs.all) for g in guards],
                           candidates=[c.extend(vs.all).primitive() for c in cands
                                       if not c.is_constant()],
                           gauge=gauge, check=False)

    def check_genericity(self, values: Mapping[str, int | Fraction]):
        for g in self.guards:
            if set(g.free_symbols()) <= set(values):
                val = g.evaluate({k: Fraction(v) for k, v in values.items()})
                if val == 0:
                    raise GenericityError(f"guard {g} vanishes at {dict(values)}")

    def with_gauge(self) -> "RationalMap":
        if not self.gauge:
            return self
        return self.specialize(self.gauge)


def _spec1(p: Poly, values) -> Poly:
    return specialize_polys([p], values)[0]


def specialize_polys(polys: Sequence[Poly], values: Mapping[str, int | Fraction]) -> list[Poly]:
    """Substitute rationals for symbols in several polynomials at once.

    All results are multiplied by one common positive integer, so a tuple of
    projective coordinates keeps its meaning.  Substituted symbols are dropped
    from the variable tuple.
    """
    values = {k: Fraction(v) for k, v in values.items()}
    if not polys:
        return []
    variables = polys[0].variables
    keep = tuple(v for v in variables if v not in values)
    keep_idx = [i for i, v in enumerate(variables) if v not in values]
    spec_idx = [(i, values[v]) for i, v in enumerate(variables) if v in values]
    dicts = []
    for p in polys:
        if p.variables != variables:
            raise ValueError("polynomials must share a variable tuple")
        acc: dict[tuple[int, ...], Fraction] = {}
        for mono, c in p.terms().items():
            val = Fraction(c)
            for i, x in spec_idx:
                if mono[i]:
                    val *= x ** mono[i]
            key = tuple(mono[i] for i in keep_idx)
            acc[key] = acc.get(key, 0) + val
        dicts.append({k: v for k, v in acc.items() if v})
    den = reduce(lcm, (v.denominator for d in dicts for v in d.values()), 1)
    return [Poly.from_dict({k: v * den for k, v in d.items()}, keep) for d in dicts]


def identity_map(varspec: VarSpec, name: str = "identity") -> RationalMap:
    return RationalMap(varspec, [Poly.var(v, varspec.all) for v in varspec.projective], name)


# -- composition and pull-back -------------------------------------------------


def pullback(f: RationalMap, h: Poly) -> Poly:
    """Substitute the components of ``f`` into ``h`` (a polynomial on the codomain)."""
    names = merge_vars(f.varspec.all, h.variables)
    bindings = {v: c.extend(names) for v, c in zip(f.varspec.projective, f.components)}
    return substitute(h, bindings, names).extend(names)


def compose_raw(f: RationalMap, g: RationalMap) -> list[Poly]:
    """Components of ``f o g`` with no factor removed (degree deg f * deg g)."""
    if len(f.varspec.projective) != len(g.varspec.projective):
        raise ValueError("incompatible dimensions")
    names = merge_vars(g.varspec.all, f.varspec.params)
    bindings = {v: c.extend(names) for v, c in zip(f.varspec.projective, g.components)}
    return [substitute(c.extend(merge_vars(f.varspec.all)), bindings, names).extend(names)
            for c in f.components]


def compose(f: RationalMap, g: RationalMap, name: str = "") -> RationalMap:
    raw = compose_raw(f, g)
    coords, _ = regularize_factored([[c] for c in raw])
    params = merge_vars(g.varspec.params, f.varspec.params)
    vs = VarSpec(g.varspec.projective, params)
    return RationalMap(vs, [c.extend(vs.all) for c in coords], name or f"{f.name}*{g.name}",
                       check=False)


def extract_k_factor(outer: RationalMap, inner: RationalMap) -> KFactor:
    """The factor ``K`` with ``outer o inner == K * id`` componentwise.

    Raises :class:`NotInversePair` when the composition is not proportional
    to the identity.
    """
    raw = compose_raw(outer, inner)
    names = raw[0].variables
    ids = [Poly.var(v, names) for v in inner.varspec.projective]
    for i in range(len(raw)):
        for j in range(i + 1, len(raw)):
            if not (raw[i] * ids[j] - raw[j] * ids[i]).is_zero():
                raise NotInversePair(f"{outer.name} o {inner.name} is not a multiple "
                                     "of the identity")
    K = divide_exact(raw[0], ids[0])
    if K.is_constant():
        return KFactor(Poly.const(1, names), 0, K.constant_value())
    for cand in list(inner.exceptional_candidates()) + list(outer.exceptional_candidates()):
        cand = cand.extend(merge_vars(cand.variables, names)).drop_unused(names)
        cand = cand.extend(names) if set(cand.free_symbols()) <= set(names) else None
        if cand is None or cand.is_constant():
            continue
        m, rest = valuation(K, cand)
        if m and rest.is_constant():
            return KFactor(cand, m, rest.constant_value())
    content, parts = K.raw.factor()
    if len(parts) == 1:
        base, e = parts[0]
        return KFactor(Poly(base, names), int(e), int(content))
    return KFactor(K, 1, 1)


def vanishes_on(f: RationalMap, point: ProjPoint) -> bool:
    """True when every component of ``f`` vanishes identically at ``point``."""
    return all(c.is_zero() for c in f.raw_image(point))


def singular_locus_dimension_hint(f: RationalMap,
                                  candidates: Mapping[str, ProjPoint]) -> dict[str, bool]:
    """Check supplied parametrized subvarieties for membership in the indeterminacy locus.

    Only the given candidates are tested; the locus is not computed.
    """
    return {name: vanishes_on(f, pt) for name, pt in candidates.items()}


# -- map definition files --------------------------------------------------------


def parse_map_text(text: str, name: str = "") -> RationalMap:
    """Read the plain-text map format.

    Sections ``vars:``, ``params:`` and ``components:`` (one polynomial per
    line); optional ``name:``, ``guards:`` and ``candidates:``.  ``#`` starts
    a comment.
    """
    sections: dict[str, list[str]] = {}
    current = None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, tail = line.partition(":")
        key = head.strip().lower()
        if sep and key in ("name", "vars", "params", "components", "guards", "candidates",
                           "gauge"):
            current = key
            sections.setdefault(key, [])
            if tail.strip():
                sections[key].append(tail.strip())
            continue
        if current is None:
            raise MapFileError(f"line {lineno}: content before any section")
        sections[current].append(line)
    for req in ("vars", "components"):
        if req not in sections:
            raise MapFileError(f"missing section {req!r}")

    def names(key):
        out = []
        for line in sections.get(key, []):
            out.extend(s.strip() for s in line.split(",") if s.strip())
        return out

    vs = VarSpec(names("vars"), names("params"))
    try:
        comps = [parse(line, vs.all) for line in sections["components"]]
        guards = [parse(line, vs.all) for line in sections.get("guards", [])]
        cands = [parse(line, vs.all) for line in sections.get("candidates", [])]
    except PolyError as exc:
        raise MapFileError(str(exc)) from exc
    if len(comps) != len(vs.projective):
        raise MapFileError(f"{len(comps)} components for {len(vs.projective)} variables")
    gauge = {}
    for item in names("gauge"):
        k, _, v = item.partition("=")
        gauge[k.strip()] = int(v)
    title = " ".join(sections.get("name", [])) or name
    return RationalMap(vs, comps, title, guards=guards, candidates=cands, gauge=gauge)


def load_map_file(path: str | Path) -> RationalMap:
    path = Path(path)
    return parse_map_text(path.read_text(), name=path.stem)
