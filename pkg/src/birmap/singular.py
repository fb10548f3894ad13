"""Orbit of an exceptional hypersurface and verification of blow-up charts.

The image of a hypersurface is read off the generic iterate: iterate the map
on the generic point, then substitute a rational parametrization of the
hypersurface.  Continuing from a constant image point instead would land in
the indeterminacy locus and give nothing.

Chart coordinates of an image are limits: along a germ that crosses the
hypersurface transversally, every coordinate is a ratio of power series,
and after cancelling the common power of the germ parameter the value at 0
is the point on the blow-up.  Series are truncated, so the polynomials stay
small even several blow-ups deep."""

from __future__ import annotations

import configparser
import random
from math import gcd as igcd
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Mapping, Sequence

from .poly import (Poly, PolyError, RationalFunction, homogeneous_degree, merge_vars,
                   parse, parse_rational, substitute, valuation)
from .projmap import ProjPoint, RationalMap, SingularPointHit, specialize_polys

__all__ = [
    "ChartUndefined",
    "NonPointImage",
    "ChartTableError",
    "BlowUpChart",
    "ExceptionalSet",
    "ChartTable",
    "ExceptionalOrbit",
    "hyperplane_parametrization",
    "generic_iterates",
    "track_orbit",
    "apply_chart",
    "chart_values",
    "verify_exceptional_set",
    "verify_fixed_sink",
    "verify_transform",
    "load_chart_table",
    "builtin_chart_table",
    "jacobian_rank",
    "SetReport",
    "SinkReport",
    "sink_frame",
]

CHART_VARS = ("u", "v", "w")


class ChartUndefined(ValueError):
    pass


class ChartTableError(ValueError):
    pass


@dataclass(frozen=True)
class NonPointImage:
    """An image of positive dimension, where a point was expected."""

    step: int
    point: ProjPoint
    on_source: bool


# -- chart table -----------------------------------------------------------------


@dataclass(frozen=True)
class BlowUpChart:
    name: str
    source: str  # "projective" or the name of the previous chart
    forward: tuple[RationalFunction, RationalFunction, RationalFunction]


@dataclass(frozen=True)
class ExceptionalSet:
    name: str
    step: int
    chart: str
    dimension: int
    equations: tuple[RationalFunction, ...]
    # a reading that differs from the printed equations, reported but never substituted
    alternatives: tuple[RationalFunction, ...] = ()


@dataclass
class ChartTable:
    charts: dict[str, BlowUpChart]
    sets: dict[str, ExceptionalSet]
    projective: tuple[str, ...] = ("x", "y", "z", "t")

    def chain(self, name: str) -> list[BlowUpChart]:
        """The charts from the projective one up to ``name``."""
        out = []
        while name != "projective":
            if name not in self.charts:
                raise ChartTableError(f"unknown chart {name!r}")
            ch = self.charts[name]
            out.append(ch)
            name = ch.source
            if len(out) > len(self.charts):
                raise ChartTableError("cyclic chart sources")
        return out[::-1]

    def specialize(self, values: Mapping[str, int | Fraction]) -> "ChartTable":
        """Bind parameters to rationals in every chart and equation."""
        if not values:
            return self
        def spec(rf):
            n, d = specialize_polys([rf.num, rf.den], values)
            return RationalFunction(n, d)
        charts = {k: BlowUpChart(c.name, c.source, tuple(spec(x) for x in c.forward))
                  for k, c in self.charts.items()}
        sets = {k: ExceptionalSet(e.name, e.step, e.chart, e.dimension,
                                  tuple(spec(x) for x in e.equations),
                                  tuple(spec(x) for x in e.alternatives))
                for k, e in self.sets.items()}
        return ChartTable(charts, sets, self.projective)


def load_chart_table(text: str, projective: Sequence[str] = ("x", "y", "z", "t"),
                     params: Sequence[str] = ("a", "b", "c", "d")) -> ChartTable:
    """Read the INI chart format (see the builtin table for an example)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ChartTableError(str(exc)) from exc
    consts = dict(cp["constants"]) if cp.has_section("constants") else {}
    const_names = tuple(consts)
    params = tuple(params)
    const_polys = {k: parse(v, params) for k, v in consts.items()}

    def expr(text, chart_vars):
        names = tuple(chart_vars) + params + const_names
        try:
            rf = parse_rational(text, names)
        except PolyError as exc:
            raise ChartTableError(f"{text!r}: {exc}") from exc
        target = tuple(chart_vars) + params
        binds = {k: RationalFunction.from_poly(p.extend(target)) for k, p in const_polys.items()}
        binds.update({v: RationalFunction.from_poly(Poly.var(v, target)) for v in target})
        return rf.substitute(binds, target)

    charts, sets = {}, {}
    for sec in cp.sections():
        body = cp[sec]
        if sec == "constants":
            continue
        if "source" in body:
            src = body["source"]
            cvars = projective if src == "projective" else CHART_VARS
            fw = tuple(expr(body[k], cvars) for k in CHART_VARS)
            charts[sec] = BlowUpChart(sec, src, fw)
        elif "chart" in body:
            eqs = tuple(expr(e, CHART_VARS) for e in body.get("equations", "").split(";")
                        if e.strip())
            alts = tuple(expr(e, CHART_VARS) for e in body.get("alternatives", "").split(";")
                         if e.strip())
            sets[sec] = ExceptionalSet(sec, int(body["step"]), body["chart"],
                                       int(body["dimension"]), eqs, alts)
        else:
            raise ChartTableError(f"section {sec!r} is neither a chart nor an image")
    table = ChartTable(charts, sets, tuple(projective))
    for s in sets.values():
        table.chain(s.chart)
    return table


def builtin_chart_table() -> ChartTable:
    text = resources.files("birmap").joinpath("data/charts.ini").read_text()
    return load_chart_table(text)


# -- unreduced fractions ------------------------------------------------------------

Pair = tuple[Poly, Poly]


def _strip(pair: Pair, h: Poly | None) -> Pair:
    """Cancel the common power of ``h`` and the integer content."""
    n, d = pair
    if d.is_zero():
        raise ChartUndefined("denominator vanishes identically")
    if n.is_zero():
        return n, Poly.const(1, d.variables)
    if h is not None and not h.is_constant():
        mn, n2 = valuation(n, h)
        md, d2 = valuation(d, h)
        m = min(mn, md)
        if m:
            n = n2 * h ** (mn - m) if mn > m else n2
            d = d2 * h ** (md - m) if md > m else d2
    c = igcd(n.content(), d.content())
    if c > 1:
        n, d = Poly(n.raw / c, n.variables), Poly(d.raw / c, d.variables)
    return n, d


def _homogenized(p: Poly, scaled: Mapping[str, Poly], common: Poly, names: Sequence[str],
                 deg: int) -> Poly:
    """``p(N_v / common) * common ** deg`` where ``scaled`` holds the N_v."""
    idx = [i for i, v in enumerate(p.variables) if v in scaled]
    slices: dict[int, dict] = {}
    for mono, c in p.terms().items():
        slices.setdefault(sum(mono[i] for i in idx), {})[mono] = c
    out = Poly.const(0, names)
    for k, terms in slices.items():
        piece = Poly.from_dict(terms, p.variables)
        binds = {v: scaled[v] for v in p.variables if v in scaled}
        sub = substitute(piece, binds, names).extend(names) if binds else piece.extend(names)
        out = out + sub * common ** (deg - k)
    return out


def _apply_rf(rf: RationalFunction, values: Mapping[str, Pair], names) -> Pair:
    """Substitute fractions into ``rf`` over the product of their distinct denominators."""
    bound = [v for v in values if rf.num.degree_in(v) > 0 or rf.den.degree_in(v) > 0]
    distinct: list[Poly] = []
    for v in bound:
        if not any(values[v][1] == e for e in distinct):
            distinct.append(values[v][1])
    common = Poly.const(1, names)
    for e in distinct:
        common = common * e
    scaled = {}
    for v in bound:
        n, d = values[v]
        for e in distinct:
            if not e == d:
                n = n * e
        scaled[v] = n
    dn, dd = rf.num.degree(bound), rf.den.degree(bound)
    n = _homogenized(rf.num, scaled, common, names, dn)
    d = _homogenized(rf.den, scaled, common, names, dd)
    if dn > dd:
        d = d * common ** (dn - dd)
    elif dd > dn:
        n = n * common ** (dd - dn)
    return n, d


def apply_chart(chart: BlowUpChart, value: ProjPoint | Sequence[Pair],
                strip: Poly | None = None,
                projective: Sequence[str] = ("x", "y", "z", "t")) -> list[Pair]:
    """Chart coordinates of a point, as (numerator, denominator) pairs.

    ``value`` is a projective point for a chart on projective space, or the
    three coordinate pairs of the previous chart.  Raises
    :class:`ChartUndefined` when a denominator vanishes identically.
    """
    if isinstance(value, ProjPoint):
        proj = tuple(projective)
        extra = [v for f in chart.forward for v in f.variables if v not in proj]
        names = merge_vars(value.variables, extra)
        binds = {v: c.extend(names) for v, c in zip(proj, value.coords)}
        out = []
        for f in chart.forward:
            fnames = merge_vars(f.variables, names)
            n = substitute(f.num.extend(fnames), binds, names)
            d = substitute(f.den.extend(fnames), binds, names)
            out.append(_strip((n.extend(names), d.extend(names)), strip))
        return out
    names = merge_vars(*(p.variables for pair in value for p in pair))
    names = merge_vars(names, *(tuple(v for v in f.variables if v not in CHART_VARS)
                                for f in chart.forward))
    vals = {v: (n.extend(names), d.extend(names)) for v, (n, d) in zip(CHART_VARS, value)}
    out = []
    for f in chart.forward:
        fnames = merge_vars(f.variables, names)
        rf = RationalFunction(f.num.extend(fnames), f.den.extend(fnames), reduce_=False)
        n, d = _apply_rf(rf, vals, names)
        out.append(_strip((n.extend(names), d.extend(names)), strip))
    return out


# -- orbits -------------------------------------------------------------------------


def hyperplane_parametrization(source: Poly, projective: Sequence[str],
                               solve_for: str | None = None) -> ProjPoint:
    """Rational parametrization of a hyperplane ``sum l_i X_i = 0``.

    Solving for X_k gives ``X_i -> l_k X_i`` (i != k), ``X_k -> -sum l_i X_i``.
    """
    if homogeneous_degree(source, projective) != 1:
        raise ValueError("only hyperplanes have a builtin parametrization")
    names = source.variables
    coeffs = {}
    for v in projective:
        part = {m: c for m, c in source.terms().items() if m[names.index(v)] == 1}
        coeffs[v] = Poly.from_dict({tuple(0 if w == v else m[i] for i, w in enumerate(names)): c
                                    for m, c in part.items()}, names)
    if solve_for is None:
        solve_for = next(v for v in reversed(projective) if not coeffs[v].is_zero())
    k = solve_for
    if coeffs[k].is_zero():
        raise ValueError(f"{k} does not occur in the hyperplane equation")
    coords = []
    for v in projective:
        if v == k:
            acc = Poly.const(0, names)
            for w in projective:
                if w != k:
                    acc = acc - coeffs[w] * Poly.var(w, names)
            coords.append(acc)
        else:
            coords.append(coeffs[k] * Poly.var(v, names))
    run_vars = tuple(v for v in names if v != k)
    return ProjPoint([c.drop_unused(run_vars).extend(run_vars) for c in coords], run_vars)


def generic_iterates(f: RationalMap, steps: int) -> list[ProjPoint]:
    """``[p_0, ..., p_steps]`` on the generic point, regularized."""
    names = f.varspec.all
    pt = ProjPoint([Poly.var(v, names) for v in f.varspec.projective], names)
    out = [pt]
    for _ in range(steps):
        pt = f.evaluate(pt)
        out.append(pt)
    return out


def _restrict(p: ProjPoint, projective: Sequence[str], running: ProjPoint) -> ProjPoint:
    names = merge_vars(running.variables, p.variables)
    names = tuple(v for v in names if v not in projective or v in running.variables)
    binds = {v: c.extend(names) for v, c in zip(projective, running.coords)}
    raw = [substitute(c, binds, names) for c in p.coords]
    if all(c.is_zero() for c in raw):
        raise SingularPointHit(running)
    return ProjPoint(raw).regularize()


@dataclass
class ExceptionalOrbit:
    source: Poly
    parametrization: ProjPoint
    images: list[ProjPoint] = field(default_factory=list)
    constant: list[bool] = field(default_factory=list)
    absorbed_at: int | None = None
    non_point: list[NonPointImage] = field(default_factory=list)

    def constant_points(self) -> list[tuple[int, ...] | None]:
        return [p.constant_coords() if c else None for p, c in zip(self.images, self.constant)]

    def to_dict(self) -> dict:
        return {
            "source": str(self.source),
            "parametrization": [str(c) for c in self.parametrization.coords],
            "images": [list(p) if p is not None else None for p in self.constant_points()],
            "absorbed_at": self.absorbed_at,
            "non_point_steps": [n.step for n in self.non_point],
        }


def _specialize_all(f, source, table, values):
    f = f.specialize(values)
    names = merge_vars(source.variables, tuple(values))
    source = specialize_polys([source.extend(names)], values)[0].primitive()
    return f, source, (table.specialize(values) if table is not None else None)


def track_orbit(source: Poly, f: RationalMap, steps: int,
                parametrization: ProjPoint | None = None,
                iterates: Sequence[ProjPoint] | None = None,
                values: Mapping[str, int | Fraction] | None = None) -> ExceptionalOrbit:
    """Images of ``{source = 0}`` under ``f, f^2, ..., f^steps``.

    Each image is the generic iterate restricted to the parametrization, so
    the orbit continues past points where f itself is undefined.  Tracking
    stops at the first image that is not a point.
    """
    if values:
        f, source, _ = _specialize_all(f, source, None, values)
    proj = f.varspec.projective
    src = source.extend(merge_vars(source.variables, f.varspec.all))
    run = parametrization or hyperplane_parametrization(src, proj)
    # the parametrization must lie on the hypersurface
    on = substitute(src, dict(zip(proj, run.coords)), merge_vars(run.variables, src.variables))
    if not on.is_zero():
        raise ValueError("parametrization does not satisfy the source equation")
    if iterates is None:
        iterates = generic_iterates(f, steps)
    orbit = ExceptionalOrbit(source, run)
    for i in range(1, steps + 1):
        img = _restrict(iterates[i], proj, run)
        is_const = all(c.is_constant() for c in img.coords)
        if not is_const:
            names = merge_vars(img.variables, src.variables)
            val = substitute(src, {v: c.extend(names) for v, c in zip(proj, img.coords)}, names)
            orbit.non_point.append(NonPointImage(i, img, val.is_zero()))
        orbit.images.append(img)
        orbit.constant.append(is_const)
        if not is_const:
            # a curve or surface needs charts, not further point tracking
            break
    # first step from which the image no longer moves
    pts = orbit.constant_points()
    for i in range(len(pts) - 1):
        if pts[i] is not None and all(p == pts[i] for p in pts[i:]):
            orbit.absorbed_at = i + 1
            break
    return orbit


# -- chart verification --------------------------------------------------------------


def _linear_coefficients(source: Poly, projective: Sequence[str]) -> dict[str, Poly]:
    names = source.variables
    out = {}
    for v in projective:
        i = names.index(v)
        out[v] = Poly.from_dict({m[:i] + (0,) + m[i + 1:]: c for m, c in source.terms().items()
                                 if m[i] == 1}, names)
    return out


class _Germ:
    """Truncated power series in one variable ``eps`` with polynomial coefficients.

    Pairs (numerator, denominator) are known modulo ``eps ** prec``; cancelling
    a common power of eps lowers the precision by that much.
    """

    def __init__(self, names: Sequence[str], eps: str, prec: int):
        self.names = tuple(names)
        self.i = self.names.index(eps)
        self.prec = prec

    def trunc(self, p: Poly, prec: int) -> Poly:
        if p.is_zero() or p.degree_in(self.names[self.i]) < prec:
            return p
        i = self.i
        return Poly(p.raw.context().from_dict(
            {m: c for m, c in p.raw.to_dict().items() if m[i] < prec}), self.names)

    def val(self, p: Poly) -> int:
        return min(m[self.i] for m in p.monoms())

    def shift(self, p: Poly, k: int) -> Poly:
        if not k:
            return p
        i = self.i
        return Poly(p.raw.context().from_dict(
            {m[:i] + (m[i] - k,) + m[i + 1:]: c for m, c in p.raw.to_dict().items()}),
            self.names)

    def mul(self, a: Poly, b: Poly, prec: int) -> Poly:
        return self.trunc(a * b, prec)

    def pow(self, a: Poly, e: int, prec: int) -> Poly:
        out = Poly.const(1, self.names)
        for _ in range(e):
            out = self.mul(out, a, prec)
        return out

    def normalize(self, n: Poly, d: Poly, prec: int) -> tuple[Poly, Poly, int]:
        n, d = self.trunc(n, prec), self.trunc(d, prec)
        if n.is_zero() and d.is_zero():
            raise _PrecisionLost
        if d.is_zero():
            raise ChartUndefined("denominator vanishes on the image")
        m = min(self.val(x) for x in (n, d) if not x.is_zero())
        if n.is_zero():
            return n, Poly.const(1, self.names), prec - m
        return self.shift(n, m), self.shift(d, m), prec - m


class _PrecisionLost(Exception):
    pass


def _germ_eval(germ: _Germ, p: Poly, values: Mapping[str, tuple[Poly, Poly]], common: Poly,
               deg: int, prec: int) -> Poly:
    """``p(N_v / common) * common ** deg`` modulo eps ** prec, with N_v in ``values``."""
    out = Poly.const(0, germ.names)
    powers: dict[tuple[str, int], Poly] = {}

    def power(v, e):
        if (v, e) not in powers:
            powers[(v, e)] = germ.pow(values[v], e, prec) if v != "_common" else \
                germ.pow(common, e, prec)
        return powers[(v, e)]

    for mono, c in p.terms().items():
        term = Poly.const(c, germ.names)
        k = 0
        for i, e in enumerate(mono):
            if not e:
                continue
            v = p.variables[i]
            if v in values:
                term = germ.mul(term, power(v, e), prec)
                k += e
            else:
                term = term * Poly.var(v, germ.names) ** e
        if deg - k:
            term = germ.mul(term, power("_common", deg - k), prec)
        out = out + term
    return out


def _germ_chart(germ: _Germ, chart: BlowUpChart, value, prec: int, projective):
    """Apply one chart to a point (tuple of series) or to pairs; returns pairs and precision."""
    if not isinstance(value, list):
        coords = {v: (c, Poly.const(1, germ.names)) for v, c in zip(projective, value)}
        dens_from = list(projective)
    else:
        coords = dict(zip(CHART_VARS, value))
        dens_from = list(CHART_VARS)
    out = []
    low = prec
    for f in chart.forward:
        fn = f.num.extend(merge_vars(f.num.variables, germ.names))
        fd = f.den.extend(fn.variables)
        bound = [v for v in dens_from if fn.degree_in(v) > 0 or fd.degree_in(v) > 0]
        distinct: list[Poly] = []
        for v in bound:
            if not any(coords[v][1] == e for e in distinct):
                distinct.append(coords[v][1])
        common = Poly.const(1, germ.names)
        for e in distinct:
            common = germ.mul(common, e, prec)
        scaled = {}
        for v in bound:
            n, d = coords[v]
            for e in distinct:
                if not e == d:
                    n = germ.mul(n, e, prec)
            scaled[v] = n
        dn, dd = fn.degree(bound), fd.degree(bound)
        fn, fd = _drop(fn, germ.names), _drop(fd, germ.names)
        n = _germ_eval(germ, fn, scaled, common, dn, prec)
        d = _germ_eval(germ, fd, scaled, common, dd, prec)
        if dn > dd:
            d = germ.mul(d, germ.pow(common, dn - dd, prec), prec)
        elif dd > dn:
            n = germ.mul(n, germ.pow(common, dd - dn, prec), prec)
        n, d, p_out = germ.normalize(n, d, prec)
        c = igcd(n.content(), d.content())
        if c > 1:
            n, d = Poly(n.raw / c, n.variables), Poly(d.raw / c, d.variables)
        out.append((n, d, p_out))
        low = min(low, p_out)
    return [(n, d) for n, d, _ in out], low


def _drop(p: Poly, names) -> Poly:
    """View a chart expression over chart/projective symbols plus ``names``."""
    keep = merge_vars(names, tuple(v for v in p.variables if v in CHART_VARS or v not in names))
    return p.extend(keep)


def chart_values(table: ChartTable, chart: str, iterate: ProjPoint, source: Poly,
                 projective: Sequence[str], precision: int = 2) -> list[RationalFunction]:
    """Chart coordinates of the image of the hyperplane ``source = 0``.

    With ``source = l_t*t + sum l_v*v`` solved for its last coordinate t, the
    iterate is evaluated along the germ ``v -> l_t*v`` (first coordinate
    ``l_t``), ``t -> -sum l_v*v + eps``, which crosses the hyperplane
    transversally at eps = 0.  Charts are applied to truncated series in eps,
    common powers of eps are cancelled, and the value at eps = 0 is the chart
    point of the image.  The precision grows until it suffices (each chart
    only cancels a few orders, and low precision keeps the series small).
    The result is a rational function of the remaining free coordinates.
    """
    coeffs = _linear_coefficients(source, projective)
    solved = next(v for v in reversed(projective) if not coeffs[v].is_zero())
    one_var = next(v for v in projective if v != solved)
    eps = "eps"
    while eps in iterate.variables or eps in source.variables:
        eps += "_"
    # the free coordinates get fresh names, distinct from the chart symbols
    taken = set(iterate.variables) | set(source.variables) | set(CHART_VARS)
    free = {}
    for v in projective:
        if v not in (one_var, solved):
            name = v + "0"
            while name in taken:
                name += "0"
            free[v] = name
    params = tuple(v for v in merge_vars(iterate.variables, source.variables)
                   if v not in projective)
    base = tuple(free.values()) + params
    names = merge_vars(base, (eps,))
    lin = {v: coeffs[v].drop_unused().extend(names) for v in projective}
    rest = Poly.const(0, names)
    for v in projective:
        if v != solved:
            rest = rest + lin[v] * (1 if v == one_var else Poly.var(free[v], names))
    binds = {v: lin[solved] * (1 if v == one_var else Poly.var(free[v], names))
             for v in projective if v != solved}
    binds[solved] = Poly.var(eps, names) - rest
    raw = [substitute(c.extend(merge_vars(c.variables, names)), binds, names).extend(names)
           for c in iterate.coords]
    chain = table.chain(chart)
    prec = precision
    while True:
        germ = _Germ(names, eps, prec)
        try:
            value = tuple(germ.trunc(c, prec) for c in raw)
            left = prec
            for ch in chain:
                value, left = _germ_chart(germ, ch, value, left, table.projective)
                if left <= 0:
                    raise _PrecisionLost
            break
        except _PrecisionLost:
            prec += 1 if prec < 8 else prec
            if prec > 256:
                raise ChartUndefined(f"{chart}: no finite limit on the hyperplane")
    out = []
    zero = {eps: Poly.const(0, base)}
    for n, d in value:
        nn = substitute(n, zero, base).extend(base)
        dd = substitute(d, zero, base).extend(base)
        if dd.is_zero():
            raise ChartUndefined(f"{chart}: denominator vanishes on the image")
        out.append(RationalFunction(nn, dd))
    return out


def jacobian_rank(coords: Sequence[RationalFunction], wrt: Sequence[str],
                  params: Mapping[str, Fraction], samples: int = 10, seed: int = 0,
                  fixed: Mapping[str, Fraction] | None = None) -> int:
    """Largest rank of the Jacobian over random rational sample points."""
    rng = random.Random(seed)
    base = {k: Fraction(v) for k, v in {**params, **(fixed or {})}.items()}
    derivs = [[c.diff(v) for v in wrt] for c in coords]
    best = 0
    for _ in range(samples):
        for _ in range(20):
            pt = dict(base)
            pt.update({v: Fraction(rng.randint(-60, 60), rng.randint(1, 60)) for v in wrt})
            try:
                rows = [[d.evaluate(pt) for d in row] for row in derivs]
            except ZeroDivisionError:
                continue
            best = max(best, _rank(rows))
            break
    return best


def _rank(rows: list[list[Fraction]]) -> int:
    m = [list(r) for r in rows]
    rank = 0
    cols = len(m[0]) if m else 0
    for col in range(cols):
        piv = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][col] != 0:
                f = m[i][col] / m[rank][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


@dataclass
class SetReport:
    name: str
    step: int
    chart: str
    membership: dict[str, bool]
    expected_dimension: int
    dimension: int | None
    failures: list[str]
    alternatives: dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        out = {"set": self.name, "step": self.step, "chart": self.chart,
               "membership": self.membership, "expected_dimension": self.expected_dimension,
               "dimension": self.dimension, "ok": self.ok, "failures": self.failures}
        if self.alternatives:
            out["alternatives"] = self.alternatives
        return out


def verify_exceptional_set(table: ChartTable, name: str, f: RationalMap, source: Poly,
                           iterates: Sequence[ProjPoint] | None = None, samples: int = 10,
                           seed: int = 0,
                           values: Mapping[str, int | Fraction] | None = None) -> SetReport:
    """Membership identities and Jacobian-rank dimension of one image set.

    ``values`` binds parameters in the map, the source and the table alike
    (the gauge c = d = 1 keeps the check symbolic in a, b and fast);
    ``iterates`` must then come from the specialized map.
    """
    if values:
        f, source, table = _specialize_all(f, source, table, values)
    es = table.sets[name]
    proj = f.varspec.projective
    if iterates is None:
        iterates = generic_iterates(f, es.step)
    src = source.extend(merge_vars(source.variables, f.varspec.all))
    failures = []
    try:
        vals = chart_values(table, es.chart, iterates[es.step], src, proj)
    except ChartUndefined as exc:
        return SetReport(name, es.step, es.chart, {}, es.dimension, None, [str(exc)])
    membership = {}
    for eq in es.equations:
        res = _restrict_equation(eq, vals)
        membership[str(eq)] = res.is_zero()
        if not res.is_zero():
            failures.append(f"{eq} restricts to {res}, not 0")
    alternatives = {str(eq): _restrict_equation(eq, vals).is_zero() for eq in es.alternatives}
    # dimension: the running point has three homogeneous parameters; fix one
    rng = random.Random(f"dim-{seed}")
    params = {}
    for p in f.varspec.params:
        params[p] = Fraction(rng.randint(1, 40) * rng.choice((-1, 1)), rng.randint(1, 40))
    free = [v for v in vals[0].variables if v not in f.varspec.params]
    dim = jacobian_rank(vals, free, params, samples, seed)
    if dim != es.dimension:
        failures.append(f"dimension {dim}, expected {es.dimension}")
    return SetReport(name, es.step, es.chart, membership, es.dimension, dim, failures,
                     alternatives)


def _restrict_equation(eq: RationalFunction, vals: Sequence[RationalFunction]) -> RationalFunction:
    target = merge_vars(vals[0].variables, eq.variables)
    target = tuple(v for v in target if v not in CHART_VARS)
    binds = {v: val.extend(target) for v, val in zip(CHART_VARS, vals)}
    for v in target:
        binds.setdefault(v, RationalFunction.from_poly(Poly.var(v, target)))
    return eq.substitute(binds, target)


def _substitute_affine(coords: Sequence[Poly], var: str, num: Poly, den: Poly) -> list[Poly]:
    """Substitute ``var = num / den`` in a tuple of projective coordinates, clearing jointly."""
    names = merge_vars(coords[0].variables, num.variables, den.variables)
    coords = [c.extend(names) for c in coords]
    top = max(c.degree_in(var) for c in coords)
    i = names.index(var)
    out = []
    for c in coords:
        acc = Poly.const(0, names)
        for e in range(top + 1):
            part = Poly.from_dict({m[:i] + (0,) + m[i + 1:]: k for m, k in c.terms().items()
                                   if m[i] == e}, names)
            if part.is_zero():
                continue
            acc = acc + part * num.extend(names) ** e * den.extend(names) ** (top - e)
        out.append(acc)
    rest = tuple(v for v in names if v != var)
    return [c.drop_unused(rest).extend(rest) for c in out]


def sink_frame(params: Sequence[str], names: Sequence[str] = ("u", "v", "w")) -> ProjPoint:
    """Push the generic point of the third chart over the fixed point back to space.

    Inverting the three charts over the fixed point (with L = d*(u+1) + c*v and
    E = a*d - b*c + c^2):  w_2 = (L - d*w_3) / (2*E*v*w_3),  w_1 = w_2 * L,
    and [x, y, z, t] = [v, w_1 - v, v + u*w_1, v*w_1].
    """
    allv = tuple(names) + tuple(params)
    u, v, w = (Poly.var(n, allv) for n in names)
    a, b, c, d = (Poly.var(p, allv) for p in ("a", "b", "c", "d"))
    L = d * (u + 1) + c * v
    E = a * d - b * c + c * c
    # scale everything by 2*E*v*w_3 so the coordinates are polynomials
    w1 = (L - d * w) * L
    s = E * v * w * 2
    coords = [v * s, w1 - v * s, v * s + u * w1, v * w1]
    return ProjPoint(coords, allv)


@dataclass
class SinkReport:
    steps: dict[int, tuple[int, ...] | None]
    expected: tuple[int, ...]
    specialization: dict[str, str] | None
    plane_remark: tuple[int, ...] | None

    @property
    def ok(self) -> bool:
        return all(p == self.expected for p in self.steps.values()) and (
            self.plane_remark in (None, self.expected))

    def to_dict(self) -> dict:
        return {"images": {str(k): list(v) if v else None for k, v in self.steps.items()},
                "expected": list(self.expected), "specialization": self.specialization,
                "plane_image": list(self.plane_remark) if self.plane_remark else None,
                "ok": self.ok}


def verify_fixed_sink(f: RationalMap, extra_steps: int = 4,
                      values: Mapping[str, Fraction] | None = None,
                      expected: Sequence[int] = (1, -1, 1, 0)) -> SinkReport:
    """Apply ``f^(k+1)`` to the pushed-down third chart and restrict to its image set.

    The image set in the third chart over the fixed point is
    ``d*u + c*v + d = 0``; for k = 0..extra_steps-1 the restriction of the
    regularized image must be the constant point ``expected``.  The plane
    ``w = 0`` of the first chart is checked the same way after one step.
    ``values`` binds the parameters (exact rationals); None keeps them symbolic.
    """
    params = f.varspec.params
    frame = sink_frame(params)
    fm = f
    if values:
        fm = f.specialize(values, check_guards=True)
        frame = ProjPoint(specialize_polys(list(frame.coords), values))
    names = frame.variables
    expected = tuple(expected)
    # u on the image set: u = -(c*v + d)/d, with c, d possibly rational numbers
    num, den = _image_set_u(names, values)
    pt = frame
    out = {}
    for k in range(extra_steps):
        pt = fm.evaluate(pt)
        restricted = _substitute_affine(list(pt.coords), "u", num, den)
        if all(x.is_zero() for x in restricted):
            out[k] = None
            continue
        out[k] = _constant_or_none(ProjPoint(restricted).regularize())
    # remark: the plane w = 0 of the first chart
    first = _first_chart_frame(params, values)
    img = fm.evaluate(first)
    rest = [x.drop_unused(tuple(n for n in img.variables if n != "w")) for x in
            _substitute_affine(list(img.coords), "w", Poly.const(0, img.variables),
                               Poly.const(1, img.variables))]
    plane = _constant_or_none(ProjPoint(rest).regularize()) if not all(
        x.is_zero() for x in rest) else None
    spec = None if not values else {k: str(v) for k, v in sorted(values.items())}
    return SinkReport(out, expected, spec, plane)


def _image_set_u(names, values):
    """u = -(c*v + d)/d as (numerator, denominator) over ``names``."""
    v = Poly.var("v", names)
    if values and "c" in values and "d" in values:
        ratio = Fraction(values["c"]) / Fraction(values["d"])
        return -(v * ratio.numerator + ratio.denominator), Poly.const(ratio.denominator, names)
    c, d = Poly.var("c", names), Poly.var("d", names)
    return -(c * v + d), d


def _first_chart_frame(params, values):
    allv = ("u", "v", "w") + tuple(params)
    u, v, w = (Poly.var(n, allv) for n in ("u", "v", "w"))
    pt = ProjPoint([v, w - v, v + u * w, v * w], allv)
    if values:
        pt = ProjPoint(specialize_polys(list(pt.coords), values))
    return pt


def _constant_or_none(p: ProjPoint):
    if all(c.is_constant() for c in p.coords):
        return p.constant_coords()
    return None


def verify_transform(table: ChartTable, f: RationalMap, from_set: str = "image_4_1",
                     to_set: str = "image_5_1", values: Mapping[str, Fraction] | None = None
                     ) -> dict:
    """Push the curve ``from_set`` through ``f`` and check it lands on ``to_set``.

    The curve ``{d*u + c*v + d = 0, w = 0}`` of the first chart over the
    fixed point is approached inside ``d*u + c*v + d = 0`` along w: the
    chart is inverted by [x, y, z, t] = [v, w - v, v + u*w, v*w], f is
    applied, the chart of ``to_set`` is applied, powers of w are cancelled
    and w is set to 0.
    """
    if values:
        f = f.specialize(values)
        table = table.specialize(values)
    src_eqs = table.sets[from_set].equations
    dst = table.sets[to_set]
    frame = _first_chart_frame(f.varspec.params, None)
    names = frame.variables
    num, den = _image_set_u(names, values)
    on_curve = ProjPoint(_substitute_affine(list(frame.coords), "u", num, den))
    img = f.evaluate(on_curve)
    names = img.variables
    w = Poly.var("w", names)
    vals = apply_chart(table.charts[dst.chart], img, w, table.projective)
    # the curve parameter v is renamed so it cannot clash with the chart symbols
    rest = tuple("v0" if x == "v" else x for x in names if x != "w")
    at = {"w": Poly.const(0, rest), "v": Poly.var("v0", rest)}
    out = []
    for n_, d_ in vals:
        n0 = substitute(n_, at, rest).extend(rest)
        d0 = substitute(d_, at, rest).extend(rest)
        if d0.is_zero():
            raise ChartUndefined("transform chart undefined on the curve")
        out.append(RationalFunction(n0, d0))
    res = {str(eq): _restrict_equation(eq, out).is_zero() for eq in dst.equations}
    distinct = not _proportional(src_eqs[0], dst.equations[0])
    return {"from": from_set, "to": to_set, "membership": res,
            "distinct_from_source": distinct, "ok": all(res.values()) and distinct}


def _proportional(p: RationalFunction, q: RationalFunction) -> bool:
    names = merge_vars(p.variables, q.variables)
    a = p.num.extend(names) * q.den.extend(names)
    b = q.num.extend(names) * p.den.extend(names)
    if a.is_zero() or b.is_zero():
        return a.is_zero() and b.is_zero()
    return a.primitive().normalized() == b.primitive().normalized()
