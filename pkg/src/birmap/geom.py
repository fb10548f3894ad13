"""Invariants, the invariant pencil, and the cone/line geometry around its vertex."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .poly import Poly, RationalFunction, merge_vars, substitute, try_divide, valuation
from .projmap import ProjPoint, RationalMap, pullback, vanishes_on

__all__ = [
    "RationalInvariant",
    "PencilValue",
    "CheckReport",
    "check_invariance",
    "check_pencil_invariance",
    "pencil_value_at",
    "check_cone",
    "check_line_transport",
    "gradient_at",
    "minors3",
]


@dataclass(frozen=True)
class RationalInvariant:
    """``numerator / denominator`` with homogeneous parts of equal degree."""

    numerator: Poly
    denominator: Poly

    @classmethod
    def from_rational(cls, rf: RationalFunction) -> "RationalInvariant":
        return cls(rf.num, rf.den)

    def member(self, k0: Poly | int, k1: Poly | int) -> Poly:
        """The pencil member ``k0 * numerator + k1 * denominator``."""
        return self.numerator * k0 + self.denominator * k1


@dataclass(frozen=True)
class PencilValue:
    k0: Poly
    k1: Poly


@dataclass
class CheckReport:
    name: str
    ok: bool
    details: dict = field(default_factory=dict)
    witness: str | None = None

    def to_dict(self) -> dict:
        out = {"check": self.name, "ok": self.ok}
        out.update(self.details)
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def _aligned(*polys: Poly) -> list[Poly]:
    names = merge_vars(*(p.variables for p in polys))
    return [p.extend(names) for p in polys]


def _random_values(names: Sequence[str], rng: random.Random, bound: int = 50) -> dict[str, Fraction]:
    return {v: Fraction(rng.randint(-bound, bound), rng.randint(1, bound)) for v in names}


def check_invariance(f: RationalMap, inv: RationalInvariant, trials: int = 20,
                     seed: int = 0) -> CheckReport:
    """``f*(N) * D == N * f*(D)`` identically, plus the same at random rational points."""
    N, D = _aligned(inv.numerator.extend(merge_vars(inv.numerator.variables, f.varspec.all)),
                    inv.denominator.extend(merge_vars(inv.denominator.variables, f.varspec.all)))
    fN, fD = _aligned(pullback(f, N), pullback(f, D))
    N, D, fN, fD = _aligned(N, D, fN, fD)
    cross = fN * D - N * fD
    ok = cross.is_zero()
    details: dict = {"symbolic": ok}
    mult = try_divide(fN, N) if not N.is_zero() else None
    if mult is not None:
        details["multiplier"] = str(mult)
        for cand in f.exceptional_candidates():
            cand = cand.extend(mult.variables) if set(cand.variables) <= set(mult.variables) \
                else None
            if cand is None:
                continue
            m, rest = valuation(mult, cand) if not mult.is_constant() else (0, mult)
            if rest.is_constant():
                details["exponent"] = m
                details["base"] = str(cand)
    rng = random.Random(seed)
    names = cross.variables
    point_ok = True
    for _ in range(trials):
        vals = _random_values(names, rng)
        if fN.evaluate(vals) * D.evaluate(vals) != N.evaluate(vals) * fD.evaluate(vals):
            point_ok = False
            break
    details["random_points"] = point_ok
    return CheckReport(f"invariance[{f.name}]", ok and point_ok, details,
                       None if ok else str(cross))


def check_pencil_invariance(f: RationalMap, inv: RationalInvariant) -> CheckReport:
    """Every member of the pencil pulls back to a multiple of itself, with symbolic k."""
    names = merge_vars(f.varspec.all, inv.numerator.variables, ("k0", "k1"))
    k0, k1 = Poly.var("k0", names), Poly.var("k1", names)
    member = inv.numerator.extend(names) * k0 + inv.denominator.extend(names) * k1
    back = pullback(f, member).extend(names)
    mult = try_divide(back, member)
    details: dict = {"divides": mult is not None}
    ok = mult is not None and mult.degree(("k0", "k1")) == 0
    if ok:
        details["multiplier"] = str(mult.drop_unused())
        for cand in f.exceptional_candidates():
            cand = cand.extend(names)
            m, rest = valuation(mult, cand) if not mult.is_constant() else (0, mult)
            if rest.is_constant():
                details["exponent"] = m
                details["base"] = str(cand.drop_unused())
                break
    return CheckReport(f"pencil[{f.name}]", ok, details, None if ok else str(back))


def pencil_value_at(inv: RationalInvariant, M: ProjPoint, projective: Sequence[str]) -> PencilValue:
    """``k(M) = (D(M), -N(M))``, the member through M.  Undefined on the base locus."""
    binds = dict(zip(projective, M.coords))
    names = M.variables
    n_val = substitute(inv.numerator.extend(merge_vars(inv.numerator.variables, projective)),
                       binds, merge_vars(names, inv.numerator.variables)).drop_unused(names)
    d_val = substitute(inv.denominator.extend(merge_vars(inv.denominator.variables, projective)),
                       binds, merge_vars(names, inv.denominator.variables)).drop_unused(names)
    n_val, d_val = _aligned(n_val, d_val)
    if n_val.is_zero() and d_val.is_zero():
        raise ValueError("the point lies on every member of the pencil")
    return PencilValue(d_val, -n_val)


def _line_point(vertex: ProjPoint, M: ProjPoint, tau: str = "tau") -> ProjPoint:
    """``tau * vertex + (1 - tau) * M`` with tau a fresh variable."""
    names = merge_vars(M.variables, vertex.variables, (tau,))
    t = Poly.var(tau, names)
    one = Poly.const(1, names)
    coords = [v.extend(names) * t + m.extend(names) * (one - t)
              for v, m in zip(vertex.coords, M.coords)]
    return ProjPoint(coords, names)


def gradient_at(h: Poly, point: ProjPoint, projective: Sequence[str]) -> list[Poly]:
    names = merge_vars(point.variables, h.variables)
    binds = {v: c.extend(names) for v, c in zip(projective, point.coords)}
    return [substitute(h.diff(v), binds, names) for v in projective]


def check_cone(inv: RationalInvariant, M: ProjPoint, vertex: ProjPoint,
               projective: Sequence[str], samples: int = 5, seed: int = 0) -> CheckReport:
    """The line from ``vertex`` to M lies on the member through M; the vertex is singular."""
    if M.projectively_equal(vertex.extend(M.variables)):
        return CheckReport("cone", True, {"skipped": "point is the vertex"})
    k = pencil_value_at(inv, M, projective)
    line = _line_point(vertex, M)
    names = merge_vars(line.variables, k.k0.variables, inv.numerator.variables)
    member = (inv.numerator.extend(names) * k.k0.extend(names)
              + inv.denominator.extend(names) * k.k1.extend(names))
    binds = {v: c.extend(names) for v, c in zip(projective, line.coords)}
    on_line = substitute(member, binds, names)
    # singularity of every member at the vertex, with symbolic k
    gnames = merge_vars(inv.numerator.variables, ("k0", "k1"))
    gen = (inv.numerator.extend(gnames) * Poly.var("k0", gnames)
           + inv.denominator.extend(gnames) * Poly.var("k1", gnames))
    grad = gradient_at(gen, vertex, projective)
    singular = all(g.is_zero() for g in grad)
    # evidence of smoothness elsewhere: the gradient is nonzero at random points
    rng = random.Random(seed)
    smooth = 0
    params = [v for v in inv.numerator.variables if v not in projective]
    for _ in range(samples):
        vals = _random_values(list(projective) + params, rng)
        pt = ProjPoint.constant([vals[v] for v in projective])
        kk = pencil_value_at(RationalInvariant(inv.numerator.subs({p: vals[p] for p in params}).drop_unused(projective),
                                               inv.denominator.subs({p: vals[p] for p in params}).drop_unused(projective)),
                             pt, projective)
        spec = {**{p: vals[p] for p in params}, "k0": Fraction(kk.k0.constant_value()),
                "k1": Fraction(kk.k1.constant_value())}
        g = [gi.evaluate({**spec, **{v: vals[v] for v in projective}})
             for gi in (gen.diff(v) for v in projective)]
        smooth += any(x != 0 for x in g)
    ok = on_line.is_zero() and singular
    return CheckReport("cone", ok, {"line_on_member": on_line.is_zero(),
                                    "vertex_singular": singular,
                                    "smooth_samples": f"{smooth}/{samples}"},
                       None if on_line.is_zero() else str(on_line))


def minors3(rows: Sequence[Sequence[Poly]]) -> list[Poly]:
    """All 3x3 minors of a 3 x n matrix."""
    out = []
    for cols in combinations(range(len(rows[0])), 3):
        m = [[rows[i][j] for j in cols] for i in range(3)]
        det = (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
               - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
               + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
        out.append(det)
    return out


def check_line_transport(f: RationalMap, M: ProjPoint, vertex: ProjPoint) -> CheckReport:
    """``f`` maps the line (vertex, M) into the line (vertex, f(M))."""
    if vanishes_on(f, M):
        return CheckReport("line transport", True, {"skipped": "point is in the singular locus"})
    line = _line_point(vertex, M)
    img = f.evaluate(line)
    fM = f.evaluate(M)
    names = merge_vars(img.variables, fM.variables, vertex.variables)
    rows = [[c.extend(names) for c in p.coords] for p in (img, vertex, fM)]
    minors = minors3(rows)
    bad = [m for m in minors if not m.is_zero()]
    return CheckReport("line transport", not bad, {"minors": len(minors),
                                                   "nonzero_minors": len(bad)},
                       str(bad[0]) if bad else None)
