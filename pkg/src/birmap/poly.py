"""Exact multivariate polynomials over the integers.

A :class:`Poly` is an immutable value: an ordered tuple of variable names and
a map from exponent vectors to integer coefficients.  Arithmetic, exact
division and gcd are delegated to FLINT's ``fmpz_mpoly``; the monomial order
is graded lexicographic over the declared variable order, which fixes the
printed form.

Rational coefficients are accepted at construction time and cleared by the
lcm of their denominators.  Every consumer in this package works with
projective coordinates or equations, which do not change under rescaling.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import reduce
from math import gcd as igcd, lcm
from typing import Iterable, Mapping, Sequence

import flint
from flint.utils.flint_exceptions import DomainError

__all__ = [
    "Poly",
    "RationalFunction",
    "VarSpec",
    "PolyError",
    "VariableMismatch",
    "NotDivisible",
    "ParseError",
    "UnknownSymbol",
    "parse",
    "parse_rational",
    "gcd",
    "gcd_prs",
    "gcd_many",
    "divide_exact",
    "homogeneous_degree",
    "substitute",
    "valuation",
]


class PolyError(Exception):
    pass


class VariableMismatch(PolyError):
    pass


class NotDivisible(PolyError):
    pass


class ParseError(PolyError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownSymbol(ParseError):
    pass


def _ctx(variables):
    return flint.fmpz_mpoly_ctx.get(tuple(variables), "deglex")


def merge_vars(*groups: Iterable[str]) -> tuple[str, ...]:
    """Union of variable tuples, keeping first-seen order."""
    out: list[str] = []
    seen = set()
    for g in groups:
        for v in g:
            if v not in seen:
                seen.add(v)
                out.append(v)
    return tuple(out)


class VarSpec:
    """Projective coordinates plus parameter symbols, disjoint."""

    __slots__ = ("projective", "params")

    def __init__(self, projective: Sequence[str], params: Sequence[str] = ()):
        projective, params = tuple(projective), tuple(params)
        if set(projective) & set(params):
            raise ValueError("projective and parameter symbols overlap: "
                             f"{sorted(set(projective) & set(params))}")
        if len(set(projective)) != len(projective) or len(set(params)) != len(params):
            raise ValueError("repeated symbol in VarSpec")
        self.projective = projective
        self.params = params

    @property
    def all(self) -> tuple[str, ...]:
        return self.projective + self.params

    def __eq__(self, other):
        return (isinstance(other, VarSpec) and self.projective == other.projective
                and self.params == other.params)

    def __hash__(self):
        return hash((self.projective, self.params))

    def __repr__(self):
        return f"VarSpec({list(self.projective)}, {list(self.params)})"


class Poly:
    __slots__ = ("_p", "variables")

    def __init__(self, raw, variables: tuple[str, ...]):
        # internal constructor; use the classmethods
        self._p = raw
        self.variables = variables

    # -- construction -----------------------------------------------------

    @classmethod
    def from_dict(cls, terms: Mapping[tuple[int, ...], int | Fraction],
                  variables: Sequence[str]) -> "Poly":
        variables = tuple(variables)
        n = len(variables)
        clean = {}
        for mono, coeff in terms.items():
            if len(mono) != n:
                raise ValueError(f"exponent vector {mono} does not match {n} variables")
            if any(e < 0 for e in mono):
                raise ValueError(f"negative exponent in {mono}")
            if coeff:
                clean[tuple(mono)] = clean.get(tuple(mono), 0) + Fraction(coeff)
        den = reduce(lcm, (c.denominator for c in clean.values()), 1)
        ints = {m: int(c * den) for m, c in clean.items() if c}
        return cls(_ctx(variables).from_dict(ints), variables)

    @classmethod
    def const(cls, value: int | Fraction, variables: Sequence[str] = ()) -> "Poly":
        variables = tuple(variables)
        return cls.from_dict({(0,) * len(variables): value} if value else {}, variables)

    @classmethod
    def var(cls, name: str, variables: Sequence[str]) -> "Poly":
        variables = tuple(variables)
        return cls(_ctx(variables).gen(variables.index(name)), variables)

    @classmethod
    def gens(cls, variables: Sequence[str]) -> list["Poly"]:
        variables = tuple(variables)
        return [cls(g, variables) for g in _ctx(variables).gens()]

    # -- structure --------------------------------------------------------

    @property
    def raw(self):
        return self._p

    def monoms(self) -> list[tuple[int, ...]]:
        return [tuple(map(int, m)) for m in self._p.monoms()]

    def terms(self) -> dict[tuple[int, ...], int]:
        return {tuple(map(int, m)): int(c) for m, c in self._p.to_dict().items()}

    def sorted_terms(self) -> list[tuple[tuple[int, ...], int]]:
        """Terms in descending graded-lex order."""
        return [(tuple(map(int, m)), int(c)) for m, c in zip(self._p.monoms(), self._p.coeffs())]

    def __len__(self):
        return len(self._p)

    def is_zero(self) -> bool:
        return self._p.is_zero()

    def is_constant(self) -> bool:
        return self._p.is_constant()

    def constant_value(self) -> int:
        if not self.is_constant():
            raise PolyError("polynomial is not constant")
        return int(self._p.coefficient(0)) if len(self._p) else 0

    def free_symbols(self) -> tuple[str, ...]:
        degs = self._p.degrees()
        return tuple(v for v, e in zip(self.variables, degs) if e > 0)

    def degree(self, variables: Iterable[str] | None = None) -> int:
        """Maximum total degree in ``variables`` (all by default); -1 for zero."""
        if self.is_zero():
            return -1
        if variables is None:
            return int(self._p.total_degree())
        idx = [self.variables.index(v) for v in variables if v in self.variables]
        return max(sum(m[i] for i in idx) for m in self.monoms())

    def degree_in(self, var: str) -> int:
        if self.is_zero():
            return -1
        if var not in self.variables:
            return 0
        return int(self._p.degrees()[self.variables.index(var)])

    def leading_coefficient(self) -> int:
        return int(self._p.leading_coefficient()) if not self.is_zero() else 0

    def content(self) -> int:
        return int(self._p.content()) if not self.is_zero() else 0

    def primitive(self) -> "Poly":
        """Divide by the integer content and make the leading coefficient positive."""
        if self.is_zero():
            return self
        c = self.content()
        if self.leading_coefficient() < 0:
            c = -c
        return self if c == 1 else Poly(self._p / c, self.variables)

    def normalized(self) -> "Poly":
        return self.primitive()

    # -- variables --------------------------------------------------------

    def extend(self, variables: Sequence[str]) -> "Poly":
        """The same polynomial viewed in a (re-ordered) superset of variables."""
        variables = tuple(variables)
        if variables == self.variables:
            return self
        missing = [v for v in self.free_symbols() if v not in variables]
        if missing:
            raise VariableMismatch(f"variables {missing} not in {variables}")
        target = _ctx(variables)
        gens = [target.gen(variables.index(v)) if v in variables else target.from_dict({})
                for v in self.variables]
        if not self.variables:
            return Poly(target.constant(self.constant_value()), variables)
        return Poly(self._p.compose(*gens, ctx=target), variables)

    def drop_unused(self, keep: Sequence[str] = ()) -> "Poly":
        used = set(self.free_symbols()) | set(keep)
        return self.extend(tuple(v for v in self.variables if v in used))

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.variables != self.variables:
                raise VariableMismatch(
                    f"variable sets differ: {self.variables} vs {other.variables}")
            return other
        if isinstance(other, int):
            return Poly(_ctx(self.variables).constant(other), self.variables)
        return NotImplemented

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Poly(self._p + other._p, self.variables)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Poly(self._p - other._p, self.variables)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Poly(other._p - self._p, self.variables)

    def __neg__(self):
        return Poly(-self._p, self.variables)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Poly(self._p * other._p, self.variables)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        e = int(e)
        if e < 0:
            raise ValueError("exponent must be a non-negative integer")
        return Poly(self._p ** e, self.variables)

    def __eq__(self, other):
        if isinstance(other, int):
            return self.is_constant() and self.constant_value() == other
        if not isinstance(other, Poly):
            return NotImplemented
        if other.variables != self.variables:
            return self.terms_by_name() == other.terms_by_name()
        return self._p == other._p

    def __hash__(self):
        return hash(frozenset(self.terms_by_name().items()))

    def terms_by_name(self) -> dict[tuple[tuple[str, int], ...], int]:
        out = {}
        for m, c in self.terms().items():
            out[tuple((v, e) for v, e in zip(self.variables, m) if e)] = c
        return out

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        return f"Poly({to_text(self)!r}, {list(self.variables)})"

    def __str__(self):
        return to_text(self)

    # -- calculus and evaluation -----------------------------------------

    def diff(self, var: str) -> "Poly":
        if var not in self.variables:
            return Poly(_ctx(self.variables).from_dict({}), self.variables)
        return Poly(self._p.derivative(self.variables.index(var)), self.variables)

    def evaluate(self, values: Mapping[str, int | Fraction]) -> Fraction:
        """Evaluate at a full rational point."""
        missing = [v for v in self.free_symbols() if v not in values]
        if missing:
            raise PolyError(f"no value for {missing}")
        pts = [Fraction(values.get(v, 0)) for v in self.variables]
        total = Fraction(0)
        powers: dict[tuple[int, int], Fraction] = {}
        for mono, coeff in self.terms().items():
            term = Fraction(coeff)
            for i, e in enumerate(mono):
                if e:
                    key = (i, e)
                    if key not in powers:
                        powers[key] = pts[i] ** e
                    term *= powers[key]
            total += term
        return total

    def subs(self, values: Mapping[str, int | Fraction]) -> "Poly":
        """Partially evaluate at rational values, clearing denominators.

        The result is only defined up to a positive rational factor when some
        value is non-integral.
        """
        bindings = {}
        rest = tuple(v for v in self.variables if v not in values)
        for v, val in values.items():
            bindings[v] = RationalFunction.const(Fraction(val), rest)
        return RationalFunction.from_poly(self).substitute(
            bindings, rest).numerator_cleared()


# -- free functions -------------------------------------------------------


def divide_exact(p: Poly, q: Poly) -> Poly:
    """Return ``r`` with ``p == q * r``; raise :class:`NotDivisible` otherwise."""
    q = p._coerce(q)
    if q.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    try:
        return Poly(p._p / q._p, p.variables)
    except DomainError:
        raise NotDivisible(f"divisor of degree {q.degree()} ({len(q)} terms) does not divide "
                           f"a polynomial of degree {p.degree()} ({len(p)} terms)") from None


def try_divide(p: Poly, q: Poly) -> Poly | None:
    try:
        return divide_exact(p, q)
    except NotDivisible:
        return None


def valuation(p: Poly, q: Poly, limit: int | None = None) -> tuple[int, Poly]:
    """Largest ``m`` with ``q**m | p``, and the cofactor ``p / q**m``.

    ``q`` must be non-constant; a zero ``p`` raises ``ValueError``.
    """
    if p.is_zero():
        raise ValueError("valuation of the zero polynomial")
    if q.is_constant():
        raise ValueError("valuation with respect to a constant")
    m = 0
    while limit is None or m < limit:
        r = try_divide(p, q)
        if r is None:
            break
        p, m = r, m + 1
    return m, p


def gcd(p: Poly, q: Poly) -> Poly:
    """Primitive gcd with positive leading coefficient; ``gcd(0, 0) == 0``."""
    q = p._coerce(q)
    if p.is_zero():
        return q.primitive()
    if q.is_zero():
        return p.primitive()
    return Poly(p._p.gcd(q._p), p.variables).primitive()


def gcd_many(polys: Sequence[Poly]) -> Poly:
    """gcd of a list; cheapest members first, stopping once it is constant."""
    polys = [p for p in polys if not p.is_zero()]
    if not polys:
        raise ValueError("gcd of no nonzero polynomials")
    polys.sort(key=len)
    g = polys[0].primitive()
    for p in polys[1:]:
        if g.is_constant():
            return Poly.const(1, g.variables)
        if try_divide(p, g) is None:
            g = gcd(g, p)
    return Poly.const(1, g.variables) if g.is_constant() else g


def homogeneous_degree(p: Poly, variables: Iterable[str] | None = None) -> int | None:
    """Common total degree of every term in ``variables``, or ``None``."""
    if p.is_zero():
        return None
    variables = p.variables if variables is None else tuple(variables)
    idx = [p.variables.index(v) for v in variables if v in p.variables]
    degs = {sum(m[i] for i in idx) for m in p.monoms()}
    return degs.pop() if len(degs) == 1 else None


def substitute(p: Poly, bindings: Mapping[str, Poly],
               variables: Sequence[str] | None = None) -> Poly:
    """Simultaneous substitution of polynomials for symbols.

    Unbound symbols stand for themselves.  All bindings must share one
    variable tuple; ``variables`` may widen it.
    """
    if not bindings:
        return p
    targets = {b.variables for b in bindings.values()}
    if len(targets) != 1:
        raise VariableMismatch("bindings do not share a variable set")
    target_vars = targets.pop()
    unbound = [v for v in p.free_symbols() if v not in bindings]
    target_vars = merge_vars(target_vars, variables or (), unbound)
    ctx = _ctx(target_vars)
    images = []
    for v in p.variables:
        if v in bindings:
            images.append(bindings[v].extend(target_vars).raw)
        else:
            images.append(ctx.gen(target_vars.index(v)) if v in target_vars
                          else ctx.from_dict({}))
    if not p.variables:
        return Poly(ctx.constant(p.constant_value()), target_vars)
    return Poly(p.raw.compose(*images, ctx=ctx), target_vars)


def gcd_prs(p: Poly, q: Poly) -> Poly:
    """Multivariate gcd by primitive polynomial remainder sequences.

    Independent of FLINT's gcd (only ring arithmetic and exact division are
    used).  Recurses on a main variable chosen by fewest term occurrences.
    Slow; intended for moderate sizes and as a cross-check.
    """
    q = p._coerce(q)
    if p.is_zero():
        return q.primitive()
    if q.is_zero():
        return p.primitive()
    out = _prs(p, q)
    return out.primitive()


def _occurrences(p: Poly) -> list[int]:
    counts = [0] * len(p.variables)
    for m in p.monoms():
        for i, e in enumerate(m):
            if e:
                counts[i] += 1
    return counts


def _as_univariate(p: Poly, i: int) -> dict[int, Poly]:
    buckets: dict[int, dict] = {}
    for mono, c in p.terms().items():
        rest = mono[:i] + (0,) + mono[i + 1:]
        buckets.setdefault(mono[i], {})[rest] = c
    return {e: Poly(_ctx(p.variables).from_dict(t), p.variables) for e, t in buckets.items()}


def _from_univariate(coeffs: Mapping[int, Poly], i: int, variables) -> Poly:
    x = Poly(_ctx(variables).gen(i), variables)
    out = Poly(_ctx(variables).from_dict({}), variables)
    for e, c in coeffs.items():
        out = out + c * x ** e
    return out


def _content_in(p: Poly, i: int) -> Poly:
    # smallest coefficients first: their gcd is cheap and often already trivial
    coeffs = sorted(_as_univariate(p, i).values(), key=lambda c: (c.degree(), len(c)))
    if coeffs[0].is_constant():
        return Poly.const(reduce(igcd, (c.content() for c in coeffs)), p.variables)
    g = coeffs[0]
    for c in coeffs[1:]:
        if g.is_constant() and abs(g.constant_value()) == 1:
            break
        g = _prs(g, c)
    return g.primitive() if not g.is_zero() else g


def _prem(a: Poly, b: Poly, i: int) -> Poly:
    da, db = a.degree_in(a.variables[i]), b.degree_in(b.variables[i])
    ub = _as_univariate(b, i)
    lb = ub[db]
    x = Poly(_ctx(a.variables).gen(i), a.variables)
    r = a
    steps = da - db + 1
    while not r.is_zero() and r.degree_in(a.variables[i]) >= db:
        dr = r.degree_in(a.variables[i])
        lr = _as_univariate(r, i)[dr]
        r = r * lb - lr * x ** (dr - db) * b
        steps -= 1
    return r * lb ** steps if steps > 0 else r


def _prs(p: Poly, q: Poly) -> Poly:
    if p.is_constant() or q.is_constant():
        cp = p.content() if not p.is_constant() else abs(p.constant_value())
        cq = q.content() if not q.is_constant() else abs(q.constant_value())
        return Poly.const(igcd(cp, cq), p.variables)
    occ_p, occ_q = _occurrences(p), _occurrences(q)
    shared = [i for i in range(len(p.variables)) if occ_p[i] and occ_q[i]]
    if not shared:
        # no common variable: the gcd lives in the coefficient rings
        present = [i for i in range(len(p.variables)) if occ_p[i] or occ_q[i]]
        i = min(present, key=lambda j: occ_p[j] + occ_q[j])
        if occ_p[i]:
            return _prs(_content_in(p, i), q)
        return _prs(p, _content_in(q, i))
    i = min(shared, key=lambda j: occ_p[j] + occ_q[j])
    cp, cq = _content_in(p, i), _content_in(q, i)
    c = _prs(cp, cq)
    a, b = divide_exact(p, cp), divide_exact(q, cq)
    name = p.variables[i]
    if a.degree_in(name) < b.degree_in(name):
        a, b = b, a
    # subresultant sequence: each remainder is divided by a factor known in
    # advance, so no content has to be computed inside the loop
    one = Poly.const(1, p.variables)
    g = h = one
    while True:
        delta = a.degree_in(name) - b.degree_in(name)
        r = _prem(a, b, i)
        if r.is_zero():
            break
        if r.degree_in(name) == 0:
            # the sequence ended in a nonzero constant in the main variable
            return c
        a, b = b, divide_exact(r, g * h ** delta)
        g = _as_univariate(a, i)[a.degree_in(name)]
        h = divide_exact(g ** delta, h ** (delta - 1)) if delta >= 1 else h
    return c * divide_exact(b, _content_in(b, i))


# -- rational functions ----------------------------------------------------


class RationalFunction:
    """Quotient of two Polys over a shared variable tuple, kept in lowest terms."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None, reduce_: bool = True):
        if den is None:
            den = Poly.const(1, num.variables)
        den = num._coerce(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if reduce_:
            num, den = _reduce_fraction(num, den)
        self.num, self.den = num, den

    @classmethod
    def from_poly(cls, p: Poly) -> "RationalFunction":
        return cls(p, Poly.const(1, p.variables), reduce_=False)

    @classmethod
    def const(cls, value: Fraction, variables: Sequence[str]) -> "RationalFunction":
        value = Fraction(value)
        return cls(Poly.const(value.numerator, variables),
                   Poly.const(value.denominator, variables), reduce_=False)

    @property
    def variables(self):
        return self.num.variables

    def extend(self, variables) -> "RationalFunction":
        return RationalFunction(self.num.extend(variables), self.den.extend(variables),
                                reduce_=False)

    def _lift(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Poly):
            return RationalFunction.from_poly(other)
        if isinstance(other, (int, Fraction)):
            return RationalFunction.const(Fraction(other), self.variables)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den,
                                self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, reduce_=False)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        g1 = gcd(self.num, other.den)
        g2 = gcd(other.num, self.den)
        num = divide_exact(self.num, g1) * divide_exact(other.num, g2)
        den = divide_exact(self.den, g2) * divide_exact(other.den, g1)
        return RationalFunction(num, den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._lift(other)
        if other.num.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return self * RationalFunction(other.den, other.num, reduce_=False)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, e: int):
        if e < 0:
            return RationalFunction(self.den ** -e, self.num ** -e)
        return RationalFunction(self.num ** e, self.den ** e, reduce_=False)

    def __eq__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return (self.num * other.den - other.num * self.den).is_zero()

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def substitute(self, bindings: Mapping[str, "RationalFunction"],
                   variables: Sequence[str]) -> "RationalFunction":
        """Substitute rational functions (all over ``variables``) for symbols."""
        return RationalFunction(*_subs_fraction(self.num, self.den, bindings, variables))

    def numerator_cleared(self) -> Poly:
        return self.num

    def diff(self, var: str) -> "RationalFunction":
        return RationalFunction(self.num.diff(var) * self.den - self.num * self.den.diff(var),
                                self.den ** 2)

    def evaluate(self, values) -> Fraction:
        d = self.den.evaluate(values)
        if d == 0:
            raise ZeroDivisionError("denominator vanishes at the point")
        return self.num.evaluate(values) / d

    def __repr__(self):
        return f"RationalFunction({to_text(self.num)!r} / {to_text(self.den)!r})"

    def __str__(self):
        if self.den == 1:
            return to_text(self.num)
        return f"({to_text(self.num)})/({to_text(self.den)})"


def _reduce_fraction(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    if num.is_zero():
        return num, Poly.const(1, num.variables)
    g = gcd(num, den)
    if not g.is_constant():
        num, den = divide_exact(num, g), divide_exact(den, g)
    # integer content and sign live in the numerator
    cn, cd = num.content(), den.content()
    c = igcd(cn, cd)
    if den.leading_coefficient() < 0:
        c = -c
    if c != 1:
        num, den = Poly(num.raw / c, num.variables), Poly(den.raw / c, den.variables)
    return num, den


def _homogenized_subs(p: Poly, bindings, variables, common_den: Poly, degs) -> Poly:
    """p(bindings) * common_den**deg(p), as a polynomial."""
    target = tuple(variables)
    # scale each image to share the common denominator
    images = {}
    for v, rf in bindings.items():
        images[v] = rf.num.extend(target) * divide_exact(common_den, rf.den.extend(target))
    # p(N_v / D) * D**deg = sum_m c_m prod N_v^m_v * D^(deg - |m|_bound)
    bound_idx = [i for i, v in enumerate(p.variables) if v in bindings]
    total = degs
    ctx_vars = merge_vars(target, [v for v in p.free_symbols() if v not in bindings])
    out = Poly.const(0, ctx_vars)
    # group terms by bound-degree to use compose per homogeneous slice
    slices: dict[int, dict] = {}
    for mono, c in p.terms().items():
        k = sum(mono[i] for i in bound_idx)
        slices.setdefault(k, {})[mono] = c
    D = common_den.extend(ctx_vars)
    for k, terms in slices.items():
        piece = Poly(_ctx(p.variables).from_dict(terms), p.variables)
        sub = substitute(piece, {v: images[v].extend(ctx_vars) for v in bindings
                                 if v in p.variables}, ctx_vars)
        out = out + sub.extend(ctx_vars) * D ** (total - k)
    return out


def _subs_fraction(num: Poly, den: Poly, bindings, variables):
    variables = tuple(variables)
    bindings = {v: rf.extend(variables) if rf.variables != variables else rf
                for v, rf in bindings.items() if v in num.variables or v in den.variables}
    if not bindings:
        target = merge_vars(variables, num.free_symbols(), den.free_symbols())
        return num.extend(target), den.extend(target)
    common = reduce(lambda a, b: divide_exact(a * b, gcd(a, b)),
                    (rf.den for rf in bindings.values()))
    bound = list(bindings)
    dn = num.degree(bound)
    dd = den.degree(bound)
    n = _homogenized_subs(num, bindings, variables, common, dn)
    d = _homogenized_subs(den, bindings, variables, common, dd)
    target = merge_vars(n.variables, d.variables)
    n, d = n.extend(target), d.extend(target)
    C = common.extend(target)
    if dn > dd:
        d = d * C ** (dn - dd)
    elif dd > dn:
        n = n * C ** (dd - dn)
    return n, d


# -- text ---------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        kind = ("int", "sym", "op")[m.lastindex - 1]
        value = m.group(m.lastindex)
        if value == "**":
            value = "^"
        tokens.append((kind, value, start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text, variables, rational):
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables = variables
        self.rational = rational

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def lift(self, value):
        if self.rational:
            return RationalFunction.from_poly(value) if isinstance(value, Poly) else value
        return value

    def parse(self):
        if self.peek()[0] == "end":
            raise ParseError("empty expression", 0)
        value = self.expr()
        kind, tok, pos = self.peek()
        if kind != "end":
            if kind in ("int", "sym") or tok == "(":
                raise ParseError(f"implicit multiplication before {tok!r}", pos)
            raise ParseError(f"unexpected {tok!r}", pos)
        return value

    def expr(self):
        value = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            _, op, pos = self.take()
            rhs = self.unary()
            if op == "*":
                value = value * rhs
            else:
                if not self.rational:
                    raise ParseError("division is not allowed in a polynomial", pos)
                value = self.lift(value) / self.lift(rhs)
        return value

    def unary(self):
        kind, tok, _ = self.peek()
        if kind == "op" and tok in ("+", "-"):
            self.take()
            value = self.unary()
            return -value if tok == "-" else value
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            kind, tok, pos = self.take()
            if kind != "int":
                raise ParseError("exponent must be a non-negative integer literal", pos)
            base = base ** int(tok)
        return base

    def atom(self):
        kind, tok, pos = self.take()
        if kind == "int":
            return self.lift(Poly.const(int(tok), self.variables))
        if kind == "sym":
            if tok not in self.variables:
                raise UnknownSymbol(f"unknown symbol {tok!r}", pos)
            return self.lift(Poly.var(tok, self.variables))
        if tok == "(":
            value = self.expr()
            kind, tok2, pos2 = self.take()
            if tok2 != ")":
                raise ParseError("expected ')'", pos2)
            return value
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected {tok!r}", pos)


def _infer_variables(text: str) -> tuple[str, ...]:
    return merge_vars(m.group(2) for m in _TOKEN.finditer(text) if m.group(2))


def parse(text: str, variables: Sequence[str] | None = None) -> Poly:
    """Parse ``+ - * ^`` expressions over integer literals and symbols.

    Without ``variables`` the symbols are taken in order of appearance.
    """
    variables = _infer_variables(text) if variables is None else tuple(variables)
    return _Parser(text, variables, rational=False).parse()


def parse_rational(text: str, variables: Sequence[str] | None = None) -> RationalFunction:
    """Like :func:`parse` but also accepts ``/``."""
    variables = _infer_variables(text) if variables is None else tuple(variables)
    value = _Parser(text, variables, rational=True).parse()
    if isinstance(value, Poly):
        value = RationalFunction.from_poly(value)
    return value


def _int_text(n: int) -> str:
    # flint prints integers of any size
    return str(flint.fmpz(n))


def to_text(p: Poly) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for mono, c in p.sorted_terms():
        factors = []
        for v, e in zip(p.variables, mono):
            if e == 1:
                factors.append(v)
            elif e > 1:
                factors.append(f"{v}^{e}")
        mag = abs(c)
        body = "*".join(factors)
        if not body:
            body = _int_text(mag)
        elif mag != 1:
            body = f"{_int_text(mag)}*{body}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f"+ {body}" if c > 0 else f"- {body}")
    return " ".join(parts)
