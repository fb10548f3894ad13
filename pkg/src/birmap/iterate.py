"""Iteration of rational maps with common-factor removal.

Two routes to the k-th iterate are provided.  The direct route applies the
map to the previous iterate; the pull-back route substitutes the map into the
previous iterate.  Both run on a *frame*: either the generic point of the
whole space (exact iterates) or a random line through it (the restriction of
the iterates to that line, which keeps the same degree and is far cheaper).

On the line frame the pull-back route uses the chain of images
``C_j = f(C_{j-1})`` of the line: if ``p_k`` is the k-th iterate and
``p_{k+1} = (p_k o f) / h^m`` then ``p_{k+1}(C_j) = p_k(C_{j+1}) / h(C_j)^m``,
so every restricted iterate is obtained by exact division without ever
forming ``p_k`` on the whole space.  The chain is regularized by default
(``chain="reduced"``); the scale factors this introduces are carried along
as pending divisors.  ``chain="raw"`` keeps the unreduced images and serves
as an independent route.
"""

from __future__ import annotations

import csv
import io
import json
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd as igcd
from typing import Callable, Mapping, Sequence

from .poly import (NotDivisible, Poly, VarSpec, divide_exact, gcd, gcd_many, homogeneous_degree, merge_vars,
                   substitute, try_divide, valuation)
from .projmap import GenericityError, ProjPoint, RationalMap, pullback, regularize_factored

__all__ = [
    "Budget",
    "BudgetExceeded",
    "ClaimViolation",
    "StructureViolation",
    "MapSchedule",
    "Frame",
    "StepRecord",
    "IterationTrace",
    "Ledger",
    "LedgerReport",
    "draw_specialization",
    "prepare",
    "full_frame",
    "line_frame",
    "iterate_direct",
    "iterate_pullback",
    "build_ledger",
    "ledger_degree_check",
]

SPEC_BOUND = 97


class BudgetExceeded(RuntimeError):
    def __init__(self, step: int, reason: str):
        super().__init__(f"budget exceeded at step {step}: {reason}")
        self.step = step
        self.reason = reason


class StructureViolation(RuntimeError):
    pass


@dataclass(frozen=True)
class ClaimViolation:
    """A common factor left over after dividing out the expected candidates."""

    step: int
    factor: str
    degree: int


@dataclass(frozen=True)
class Budget:
    max_terms: int = 5_000_000
    max_steps: int | None = None

    def steps_for(self, mode: str) -> int:
        if self.max_steps is not None:
            return self.max_steps
        return 10 if mode == "symbolic" else 25


# -- schedules -------------------------------------------------------------------


class MapSchedule:
    """A sequence of maps ``f_1, f_2, ...`` sharing one variable layout."""

    def __init__(self, at: Callable[[int], RationalMap], varspec: VarSpec, name: str,
                 autonomous: bool, base: RationalMap,
                 specialize_fn: Callable[[Mapping[str, Fraction]], "MapSchedule"] | None = None):
        self._at = at
        self.varspec = varspec
        self.name = name
        self.autonomous = autonomous
        self.base = base
        self._specialize_fn = specialize_fn
        self._cache: dict[int, RationalMap] = {}

    @classmethod
    def constant(cls, f: RationalMap) -> "MapSchedule":
        return cls(lambda n: f, f.varspec, f.name, True, f,
                   lambda values: cls.constant(f.specialize(values)))

    @classmethod
    def affine_parameter(cls, f: RationalMap, param: str,
                         coefficients: Sequence[Fraction | None] = (None, None, None),
                         names: Sequence[str] = ("alpha", "beta", "gamma")) -> "MapSchedule":
        """Replace ``param`` by ``alpha + beta*n + gamma*(-1)^n`` at step n.

        ``None`` coefficients stay symbolic under the given names.
        """
        if param not in f.varspec.params:
            raise ValueError(f"{param!r} is not a parameter of {f.name}")
        fixed = {nm: Fraction(c) for nm, c in zip(names, coefficients) if c is not None}
        new_params = tuple(p for p in f.varspec.params if p != param) + tuple(
            nm for nm in names if nm not in fixed)
        vs = VarSpec(f.varspec.projective, new_params)
        ext = merge_vars(f.varspec.all, vs.all)
        comps = [c.extend(ext) for c in f.components]
        guards = [g.extend(ext) for g in f.guards]
        cands = [c.extend(ext) for c in f.candidates]

        def coeff(nm):
            if nm in fixed:
                v = fixed[nm]
                return v
            return Poly.var(nm, vs.all)

        def at(n: int) -> RationalMap:
            a_n = [coeff(names[0]), coeff(names[1]), coeff(names[2])]
            sign = 1 if n % 2 == 0 else -1
            num_den = 1
            for v in a_n:
                if isinstance(v, Fraction):
                    num_den = num_den * v.denominator // igcd(num_den, v.denominator)
            # a_n * num_den as a polynomial; other symbols unchanged
            parts = []
            for v, w in zip(a_n, (1, n, sign)):
                if isinstance(v, Fraction):
                    parts.append(Poly.const(int(v * w * num_den), vs.all))
                else:
                    parts.append(v * (w * num_den))
            expr = parts[0] + parts[1] + parts[2]
            bindings = {p: Poly.var(p, vs.all) for p in ext if p != param}
            bindings[param] = expr
            if num_den == 1:
                new = [substitute(c, bindings, vs.all) for c in comps]
                gs = [substitute(g, bindings, vs.all) for g in guards]
            else:
                # substitute a = expr / num_den: scale by homogenizing in the parameter
                top = max(c.degree_in(param) for c in comps)
                new = [_subs_scaled(c, param, expr, num_den, bindings, vs.all, top)
                       for c in comps]
                gs = [_subs_scaled(g, param, expr, num_den, bindings, vs.all) for g in guards]
            cs = [substitute(c, bindings, vs.all) for c in cands]
            common = 0
            for c in new:
                common = igcd(common, c.content())
            if common > 1:
                new = [Poly(c.raw / common, c.variables) for c in new]
            gm = RationalMap(vs, new, f"{f.name}[n={n}]", guards=gs, candidates=cs,
                             gauge={}, check=False)
            return gm

        def spec(values):
            coeffs = [values.get(nm, fixed.get(nm)) for nm in names]
            rest = {k: v for k, v in values.items() if k not in names}
            return cls.affine_parameter(f.specialize(rest, check_guards=False) if rest else f,
                                        param, coeffs, names)

        return cls(at, vs, f"{f.name}({param}=affine in n)", False, f, spec)

    def at(self, n: int) -> RationalMap:
        if n not in self._cache:
            self._cache[n] = self._at(n)
        return self._cache[n]

    @property
    def params(self) -> tuple[str, ...]:
        return self.varspec.params

    def specialize(self, values: Mapping[str, Fraction]) -> "MapSchedule":
        if self._specialize_fn is None:
            raise ValueError("schedule cannot be specialized")
        return self._specialize_fn(values)

    def check_genericity(self, values: Mapping[str, Fraction], steps: int):
        if self.autonomous:
            self.base.check_genericity(values)
        else:
            sched = self.specialize(values)
            for n in range(1, steps + 1):
                m = sched.at(n)
                for g in m.guards:
                    if g.is_constant() and g.constant_value() == 0:
                        raise GenericityError(f"guard vanishes at step {n}")


def _subs_scaled(p: Poly, param: str, expr: Poly, den: int, bindings, variables,
                 deg: int | None = None) -> Poly:
    # p(param = expr/den) * den^deg, a polynomial when deg >= deg_param(p)
    if deg is None:
        deg = p.degree_in(param)
    out = Poly.const(0, variables)
    for e in range(deg + 1):
        coeff = _coefficient_in(p, param, e)
        if coeff.is_zero():
            continue
        part = substitute(coeff, bindings, variables) * (expr ** e) * (den ** (deg - e))
        out = out + part
    return out


def _coefficient_in(p: Poly, var: str, e: int) -> Poly:
    i = p.variables.index(var)
    return Poly.from_dict({m[:i] + (0,) + m[i + 1:]: c for m, c in p.terms().items() if m[i] == e},
                          p.variables)


def as_schedule(f: RationalMap | MapSchedule) -> MapSchedule:
    return f if isinstance(f, MapSchedule) else MapSchedule.constant(f)


# -- specialization ------------------------------------------------------------


def draw_specialization(params: Sequence[str], seed: int,
                        accept: Callable[[dict[str, Fraction]], bool] = lambda v: True,
                        bound: int = SPEC_BOUND) -> dict[str, Fraction]:
    """Random nonzero rationals with numerator and denominator at most ``bound``."""
    rng = random.Random(seed)
    for _ in range(1000):
        values = {}
        for p in params:
            num = rng.randint(1, bound) * rng.choice((-1, 1))
            values[p] = Fraction(num, rng.randint(1, bound))
        if accept(values):
            return values
    raise GenericityError("could not draw a generic specialization")


def prepare(schedule: MapSchedule, mode: str, seed: int, gauge: bool, steps: int
            ) -> tuple[MapSchedule, dict[str, Fraction] | None]:
    """Bind parameters for a run: random rationals, the gauge, or nothing."""
    if mode == "specialized":
        if not schedule.params:
            return schedule, {}

        def ok(values):
            try:
                schedule.check_genericity(values, steps)
            except GenericityError:
                return False
            return True

        values = draw_specialization(schedule.params, seed, ok)
        return schedule.specialize(values), values
    if mode == "symbolic":
        fix = schedule.base.gauge if gauge else {}
        fix = {k: Fraction(v) for k, v in fix.items() if k in schedule.params}
        if fix:
            return schedule.specialize(fix), fix
        return schedule, None
    raise ValueError(f"unknown mode {mode!r}")


# -- frames ----------------------------------------------------------------------


@dataclass(frozen=True)
class Frame:
    kind: str
    point: ProjPoint
    degree_vars: tuple[str, ...]

    def degree(self, coords: Sequence[Poly]) -> int:
        return max(c.degree(self.degree_vars) for c in coords if not c.is_zero())

    def restrict(self, h: Poly) -> Poly:
        """Value of a polynomial on the projective variables at the frame point."""
        return substitute(h, dict(zip(self._proj, self.point.coords)), self.point.variables)

    @property
    def _proj(self):
        return self._projective

    def with_projective(self, names):
        object.__setattr__(self, "_projective", tuple(names))
        return self


def full_frame(varspec: VarSpec) -> Frame:
    names = varspec.all
    pt = ProjPoint([Poly.var(v, names) for v in varspec.projective], names)
    return Frame("full", pt, tuple(varspec.projective)).with_projective(varspec.projective)


def line_frame(varspec: VarSpec, seed: int = 0, bound: int = 1000, attempt: int = 0) -> Frame:
    """The affine chart ``P + s*Q`` of a random line; degrees are degrees in ``s``."""
    s = "s"
    while s in varspec.all:
        s += "_"
    names = (s,) + tuple(varspec.params)
    rng = random.Random(f"line-{seed}" if attempt == 0 else f"line-{seed}-{attempt}")
    coords = []
    for _ in varspec.projective:
        p, q = rng.randint(-bound, bound), rng.randint(1, bound) * rng.choice((-1, 1))
        coords.append(Poly.from_dict({(1,) + (0,) * len(varspec.params): q,
                                      (0,) * (len(varspec.params) + 1): p}, names))
    return Frame("line", ProjPoint(coords, names), (s,)).with_projective(varspec.projective)


def make_frame(kind: str, varspec: VarSpec, seed: int, f: RationalMap | None = None) -> Frame:
    """A frame for the run; with ``f`` given, a line through its indeterminacy is redrawn."""
    if kind == "full":
        return full_frame(varspec)
    if kind == "line":
        for attempt in range(100):
            fr = line_frame(varspec, seed, attempt=attempt)
            if f is None or gcd_many(f.raw_image(fr.point)).degree(fr.degree_vars) == 0:
                return fr
        raise GenericityError("could not draw a line avoiding the indeterminacy locus")
    raise ValueError(f"unknown frame {kind!r}")


# -- traces ----------------------------------------------------------------------


@dataclass
class StepRecord:
    k: int
    degree: int
    components: tuple[Poly, ...]
    removed_factor: Poly
    removed_exponents: dict[str, int]
    seconds: float = 0.0

    @property
    def terms(self) -> int:
        return sum(len(c) for c in self.components)


@dataclass
class IterationTrace:
    map_name: str
    method: str
    frame: str
    mode: str
    seed: int
    specialization: dict[str, Fraction] | None
    steps: list[StepRecord] = field(default_factory=list)
    pullback_valuations: list[tuple[int, ...]] = field(default_factory=list)
    claim_violations: list[ClaimViolation] = field(default_factory=list)
    ledger: "Ledger | None" = None
    candidate_names: tuple[str, ...] = ()
    schedule: "MapSchedule | None" = field(default=None, repr=False)

    @property
    def degrees(self) -> list[int]:
        return [s.degree for s in self.steps]

    def to_dict(self, timings: bool = False) -> dict:
        out = {
            "map": self.map_name,
            "method": self.method,
            "frame": self.frame,
            "mode": self.mode,
            "seed": self.seed,
            "specialization": None if self.specialization is None else
            {k: str(v) for k, v in sorted(self.specialization.items())},
            "degrees": self.degrees,
            "removed_factor_degrees": [_factor_degree(self, s) for s in self.steps],
            "removed_exponents": [s.removed_exponents for s in self.steps],
            "pullback_valuations": [list(v) for v in self.pullback_valuations],
            "claim_violations": [vars(c) for c in self.claim_violations],
        }
        if self.ledger is not None:
            out["alpha"] = _dense(self.ledger.alpha)
            out["beta"] = _dense(self.ledger.beta)
            out["d_A"] = _dense(self.ledger.dA)
            out["d_B"] = _dense(self.ledger.dB)
        if timings:
            out["seconds"] = [round(s.seconds, 4) for s in self.steps]
        return out

    def to_json(self, timings: bool = False) -> str:
        return json.dumps(self.to_dict(timings), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "d_n"])
        for s in self.steps:
            w.writerow([s.k, s.degree])
        return buf.getvalue()


def _factor_degree(trace, step) -> int:
    """Degree of the removed factor in the frame variables (parameters excluded)."""
    params = set(trace.schedule.params) if trace.schedule is not None else set()
    return step.removed_factor.degree([v for v in step.removed_factor.variables
                                       if v not in params])


def _dense(d: dict[int, int]) -> dict[str, int]:
    return {str(k): v for k, v in sorted(d.items())}


def _check_budget(step: int, coords: Sequence[Poly], budget: Budget):
    terms = max(len(c) for c in coords)
    if terms > budget.max_terms:
        raise BudgetExceeded(step, f"{terms} terms in one component (limit {budget.max_terms})")


def _frame_candidates(f: RationalMap, frame: Frame, coords: Sequence[Poly]) -> list[Poly]:
    names = merge_vars(coords[0].variables, f.varspec.all)
    binds = {v: c.extend(names) for v, c in zip(f.varspec.projective, coords)}
    return [substitute(c, binds, names).extend(coords[0].variables)
            for c in f.exceptional_candidates()]


def _exponents(poly: Poly, cands: Sequence[Poly], names: Sequence[str]) -> dict[str, int]:
    out = {}
    for nm, c in zip(names, cands):
        if c.is_constant():
            continue
        out[nm] = valuation(poly, c)[0]
    return out


def _start(schedule, mode, seed, gauge, n, frame_kind, budget):
    limit = budget.steps_for(mode)
    if n < 0:
        raise ValueError("number of steps must be non-negative")
    if n > limit:
        raise BudgetExceeded(limit + 1, f"{n} steps requested, limit {limit}")
    sched, values = prepare(schedule, mode, seed, gauge, n)
    frame = make_frame(frame_kind, sched.varspec, seed, sched.at(1))
    return sched, values, frame


def iterate_direct(schedule: RationalMap | MapSchedule, n: int, mode: str = "specialized",
                   seed: int = 0, frame: str = "line", gauge: bool = True,
                   budget: Budget = Budget()) -> IterationTrace:
    """Apply ``f_k`` to the regularized ``p_{k-1}`` for k = 1..n."""
    schedule = as_schedule(schedule)
    sched, values, fr = _start(schedule, mode, seed, gauge, n, frame, budget)
    trace = IterationTrace(sched.name, "direct", fr.kind, mode, seed, values, schedule=sched)
    base = sched.at(1)
    trace.candidate_names = tuple(str(c) for c in base.exceptional_candidates())
    pt = fr.point
    one = Poly.const(1, pt.variables)
    trace.steps.append(StepRecord(0, fr.degree(pt.coords), pt.coords, one, {}))
    for k in range(1, n + 1):
        t0 = time.perf_counter()
        f = sched.at(k)
        prev = pt
        pt, removed = f.evaluate_with_factor(pt)
        _check_budget(k, pt.coords, budget)
        cands = _frame_candidates(f, fr, prev.coords)
        exps = _exponents(removed.extend(pt.variables), cands,
                          [str(c) for c in f.exceptional_candidates()])
        trace.steps.append(StepRecord(k, fr.degree(pt.coords), pt.coords,
                                      removed.extend(pt.variables), exps,
                                      time.perf_counter() - t0))
    return trace


def iterate_pullback(schedule: RationalMap | MapSchedule, n: int, mode: str = "specialized",
                     seed: int = 0, frame: str = "line", gauge: bool = True,
                     budget: Budget = Budget(), audit_every: int = 3,
                     chain: str = "reduced") -> IterationTrace:
    """Substitute ``f`` into ``p_{k-1}`` and divide out powers of the candidate factors.

    Any common factor left after the candidates are divided out is recorded
    as a :class:`ClaimViolation` and removed, so the run continues.
    """
    schedule = as_schedule(schedule)
    if not schedule.autonomous:
        raise ValueError("the pull-back route needs an autonomous map")
    sched, values, fr = _start(schedule, mode, seed, gauge, n, frame, budget)
    f = sched.at(1)
    trace = IterationTrace(sched.name, "pullback", fr.kind, mode, seed, values, schedule=sched)
    trace.candidate_names = tuple(str(c) for c in f.exceptional_candidates())
    if fr.kind == "full":
        _pullback_full(f, fr, n, trace, budget, audit_every, seed)
    else:
        try:
            _pullback_line(f, fr, n, trace, budget, chain)
        except NotDivisible as exc:
            # only happens when the line meets the indeterminacy locus of an iterate
            raise GenericityError(f"line frame for seed {seed} is not generic; "
                                  "use another seed") from exc
    return trace


def _min_valuations(raw: Sequence[Poly], cands: Sequence[Poly]) -> tuple[list[int], list[list[int]]]:
    mins, per = [], []
    for c in cands:
        vals = []
        for r in raw:
            vals.append(10 ** 9 if r.is_zero() else valuation(r, c)[0])
        per.append(vals)
        mins.append(min(vals) if not c.is_constant() else 0)
    return mins, per


def _line_gcd_trivial(coords: Sequence[Poly], proj_names: Sequence[str], rng: random.Random) -> bool:
    """Certificate of coprimality: restriction to a random line has trivial gcd."""
    names = coords[0].variables
    s = "s_line"
    inner = (s,) + tuple(v for v in names if v not in proj_names)
    binds = {}
    for v in proj_names:
        p, q = rng.randint(-50, 50), rng.randint(1, 50)
        binds[v] = Poly.from_dict({(1,) + (0,) * (len(inner) - 1): q,
                                   (0,) * len(inner): p}, inner)
    for v in names:
        if v not in proj_names:
            binds[v] = Poly.var(v, inner)
    restricted = [substitute(c, binds, inner) for c in coords]
    g = gcd_many(restricted)
    return g.degree((s,)) == 0


def _pullback_full(f, fr, n, trace, budget, audit_every, seed):
    pt = fr.point
    names = pt.variables
    proj = fr.degree_vars
    one = Poly.const(1, names)
    trace.steps.append(StepRecord(0, fr.degree(pt.coords), pt.coords, one, {}))
    cand_names = list(trace.candidate_names)
    cands = [c.extend(merge_vars(c.variables, names)).extend(names) for c in
             f.exceptional_candidates()]
    rng = random.Random(f"audit-{seed}")
    coords = list(pt.coords)
    for k in range(1, n + 1):
        t0 = time.perf_counter()
        raw = [pullback(f, c).extend(names) for c in coords]
        mins, per = _min_valuations(raw, cands)
        first = cands[0] if cands else None
        trace.pullback_valuations.append(tuple(per[0]) if per else ())
        removed = one
        for c, m in zip(cands, mins):
            if m:
                cm = c ** m
                raw = [divide_exact(r, cm) for r in raw]
                removed = removed * cm
        audit = audit_every and k % audit_every == 0
        if audit or not _line_gcd_trivial(raw, proj, rng):
            g = gcd_many(raw)
            if g.degree(proj) > 0:
                trace.claim_violations.append(ClaimViolation(k, str(g), g.degree(proj)))
                raw = [divide_exact(r, g) for r in raw]
                removed = removed * g
        coords, _ = regularize_factored([[r] for r in raw])
        _check_budget(k, coords, budget)
        exps = dict(zip(cand_names, mins))
        trace.steps.append(StepRecord(k, fr.degree(coords), tuple(coords), removed, exps,
                                      time.perf_counter() - t0))
        del first


def _pullback_line(f, fr, n, trace, budget, chain_kind="reduced"):
    pt = fr.point
    names = pt.variables
    one = Poly.const(1, names)
    cand_names = list(trace.candidate_names)
    cand_polys = [c.extend(merge_vars(c.variables, f.varspec.all)) for c in
                  f.exceptional_candidates()]
    cand_degs = [homogeneous_degree(c, f.varspec.projective) for c in cand_polys]
    # images of the line, unreduced or regularized; f(C_j) = scale[j] * C_{j+1}
    # up to a constant
    chain, scale = [list(pt.coords)], []
    for j in range(1, n + 1):
        prev = ProjPoint(chain[-1], names)
        if chain_kind == "raw":
            chain.append([c.extend(names) for c in f.raw_image(prev)])
            scale.append(one)
        else:
            nxt, g = f.evaluate_with_factor(prev)
            chain.append([c.extend(names) for c in nxt.coords])
            scale.append(g.extend(names).primitive())
        _check_budget(j, chain[-1], budget)
    cvals = [[substitute(c, dict(zip(f.varspec.projective, C)), names).extend(names).primitive()
              for c in cand_polys] for C in chain]
    gval: dict[tuple[Poly, int], int] = {}

    def factor_val(F, ci):
        if (F, ci) not in gval:
            gval[F, ci] = valuation(F, cvals[0][ci])[0]
        return gval[F, ci]

    trace.steps.append(StepRecord(0, fr.degree(pt.coords), pt.coords, one, {}))
    # row[j] = (core, pending): p_k(C_j) = core * prod(scale[i] ** pending[i]) up to a constant
    row = [(c, {}) for c in chain]
    hdeg = 1  # homogeneous degree of p_k
    for k in range(1, n + 1):
        t0 = time.perf_counter()
        core1, pend1 = row[1]
        per = []
        for ci, h in enumerate(cvals[0]):
            shift = sum(e * factor_val(F, ci) for F, e in pend1.items())
            if not scale[0].is_constant():
                shift += hdeg * factor_val(scale[0], ci)
            per.append([10 ** 9 if c.is_zero() else shift + valuation(c, h)[0] for c in core1])
        mins = [min(v) for v in per]
        trace.pullback_valuations.append(tuple(per[0]) if per else ())
        new_row = []
        for j in range(len(row) - 1):
            core, pend = row[j + 1]
            pend = dict(pend)
            if not scale[j].is_constant():
                _add_pending(pend, scale[j], hdeg)
            for ci, m in enumerate(mins):
                if m:
                    _add_pending(pend, cvals[j][ci], -m)
            core, pend = _settle(core, pend)
            new_row.append((core, pend))
        row = new_row
        removed = one
        for ci, m in enumerate(mins):
            if m:
                removed = removed * cvals[0][ci] ** m
        hdeg = hdeg * f.degree - sum(m * dg for m, dg in zip(mins, cand_degs))
        core, pend = row[0]
        for F, e in pend.items():
            core = [c * F ** e for c in core]
        row[0] = (core, {})
        g = gcd_many(core)
        if g.degree(fr.degree_vars) > 0:
            trace.claim_violations.append(ClaimViolation(k, str(g), g.degree(fr.degree_vars)))
            row[0] = ([divide_exact(c, g) for c in core], {})
            removed = removed * g
            hdeg -= g.degree(fr.degree_vars)
        coords = _canonical(row[0][0])
        trace.steps.append(StepRecord(k, fr.degree(coords), tuple(coords), removed,
                                      dict(zip(cand_names, mins)), time.perf_counter() - t0))


def _add_pending(pend: dict[Poly, int], F: Poly, e: int):
    """Multiply the pending product by ``F**e`` keeping the keys pairwise coprime."""
    if e == 0 or F.is_constant():
        return
    F = F.primitive().normalized()
    for K in list(pend):
        if K == F:
            pend[K] += e
            return
        q = gcd(F, K)
        if not q.is_constant():
            q = q.normalized()
            eK = pend.pop(K)
            _add_pending(pend, q, eK + e)
            _add_pending(pend, divide_exact(K, q), eK)
            _add_pending(pend, divide_exact(F, q), e)
            return
    pend[F] = e


def _settle(core, pend):
    """Absorb negative pending exponents into the core by exact division."""
    for F, e in list(pend.items()):
        if e < 0:
            d = F ** (-e)
            core = [divide_exact(c, d) for c in core]
        if e <= 0:
            del pend[F]
    return core, pend


def _canonical(coords: Sequence[Poly]) -> list[Poly]:
    content = 0
    for c in coords:
        if not c.is_zero():
            content = igcd(content, c.content())
    out = [Poly(c.raw / content, c.variables) if content > 1 and not c.is_zero() else c
           for c in coords]
    lead = next(c for c in out if not c.is_zero())
    if lead.leading_coefficient() < 0:
        out = [-c for c in out]
    return out


# -- factor ledger ------------------------------------------------------------------


@dataclass
class Ledger:
    """Factorization of the iterates into the stabilized product shape.

    ``A[k]``, ``B[k]``, ``Gamma[k]`` are primitive polynomials on the frame;
    ``A[0]``, ``A[-1]`` are the first two frame coordinates, ``B[0] == 1``
    and ``Gamma[0]`` is the last frame coordinate.
    """

    A: dict[int, Poly] = field(default_factory=dict)
    B: dict[int, Poly] = field(default_factory=dict)
    Gamma: dict[int, Poly] = field(default_factory=dict)
    dA: dict[int, int] = field(default_factory=dict)
    dB: dict[int, int] = field(default_factory=dict)
    alpha: dict[int, int] = field(default_factory=dict)
    beta: dict[int, int] = field(default_factory=dict)
    shape_ok: dict[int, bool] = field(default_factory=dict)
    removed_ok: dict[int, bool] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def alpha_beta_ok(self, k: int) -> bool:
        return self.alpha[k] == self.alpha[k - 1] + self.beta[k]


def _same_up_to_scalar(p: Poly, q: Poly) -> bool:
    if p.is_zero() or q.is_zero():
        return p.is_zero() and q.is_zero()
    return p.primitive().normalized() == q.primitive().normalized()


def build_ledger(trace: IterationTrace, strict: bool = True) -> Ledger:
    """Split each iterate into the A/B/Gamma shape and fill the alpha/beta exponents.

    A mismatch for k >= 3 raises :class:`StructureViolation` when ``strict``.
    Exponents come from the pull-back valuations stored in the trace; for a
    direct trace on the full frame of an autonomous map they are recomputed
    by pulling back each iterate.
    """
    steps = trace.steps
    if len(steps) < 2:
        raise ValueError("trace too short for a ledger")
    frame_pt = steps[0].components
    if len(frame_pt) != 4:
        raise ValueError("the ledger shape needs four components")
    dv = _degree_vars(trace, steps)
    led = Ledger()
    led.A[-1] = frame_pt[1].primitive()
    led.A[0] = frame_pt[0].primitive()
    led.B[0] = Poly.const(1, frame_pt[0].variables)
    led.Gamma[0] = frame_pt[3].primitive()
    for st in steps[1:]:
        k = st.k
        c = st.components
        led.A[k] = c[0].primitive()
        led.Gamma[k] = c[3].primitive()
        Bk = try_divide(led.Gamma[k], led.Gamma[k - 1])
        ok = Bk is not None
        if ok:
            led.B[k] = Bk.primitive().normalized()
            ok = (_same_up_to_scalar(c[1], led.A[k - 1] * led.B[k]) and
                  _same_up_to_scalar(c[2], led.A[k - 2] * led.B[k - 1] * led.B[k]))
        led.shape_ok[k] = ok
        if ok:
            led.dA[k] = led.A[k].degree(dv)
            led.dB[k] = led.B[k].degree(dv)
        elif k >= 3 and strict:
            raise StructureViolation(f"iterate {k} does not have the product shape")
        else:
            led.notes.append(f"shape mismatch at k={k}")
    vals = list(trace.pullback_valuations)
    sched = trace.schedule
    if not vals and sched is not None and sched.autonomous and trace.frame == "full":
        f = sched.at(1)
        for st in steps[:-1]:
            names = st.components[0].variables
            cand = f.exceptional_candidates()[0].extend(merge_vars(f.varspec.all, names))
            cand = cand.extend(names) if set(cand.free_symbols()) <= set(names) else cand
            vals.append(tuple(valuation(pullback(f, c).extend(cand.variables), cand)[0]
                              for c in st.components))
    if vals:
        for k, v in enumerate(vals):
            led.alpha[k] = v[0]
            if k >= 1:
                led.beta[k] = v[3] - vals[k - 1][3]
    else:
        led.notes.append("no pull-back valuations available; alpha and beta left empty")
    # direct route: the factor removed when passing from p_k to p_{k+1}
    if trace.method == "direct":
        for st in steps[1:]:
            k = st.k - 1
            if k < 3 or k - 2 not in led.B:
                continue
            expect = Poly.const(1, led.B[0].variables)
            for j in range(1, k - 2):
                expect = expect * led.B[j]
            expect = expect * led.B[k - 2] ** 2
            led.removed_ok[k + 1] = _same_up_to_scalar(st.removed_factor, expect)
    return led


def _degree_vars(trace, steps):
    names = steps[0].components[0].variables
    if trace.frame == "line":
        return (names[0],)
    return tuple(v for v in names if steps[0].components[0].degree((v,)) or
                 any(c.degree((v,)) for c in steps[0].components))


@dataclass
class LedgerReport:
    recurrence: dict[int, bool]
    seeds: bool
    dA_sum: dict[int, bool]
    dB_closed: dict[int, bool]
    dA_closed: dict[int, bool]
    alpha_beta: dict[int, bool]

    @property
    def failures(self) -> list[str]:
        out = []
        for name in ("recurrence", "dA_sum", "dB_closed", "dA_closed", "alpha_beta"):
            out += [f"{name} fails at n={n}" for n, ok in getattr(self, name).items() if not ok]
        if not self.seeds:
            out.append("seed values differ")
        return out

    @property
    def ok(self) -> bool:
        return not self.failures


def dB_closed_form(n: int) -> Fraction:
    return Fraction(1, 8) + Fraction(n, 2) + Fraction(n * n, 4) - Fraction((-1) ** n, 8)


def dA_closed_form(n: int) -> Fraction:
    return (Fraction(17, 16) + Fraction(5 * n, 12) + Fraction(3 * n * n, 8)
            + Fraction(n ** 3, 12) - Fraction((-1) ** n, 16))


def ledger_degree_check(led: Ledger, start: int = 3) -> LedgerReport:
    dB, dA = led.dB, led.dA
    rec = {}
    for n in range(3, max(dB, default=0)):
        if all(m in dB for m in (n + 1, n, n - 1, n - 2)):
            rec[n + 1] = dB[n + 1] - dB[n] - dB[n - 1] + dB[n - 2] - 1 == 0
    seeds = [dB.get(i) for i in (1, 2, 3)] == [1, 2, 4]
    sums = {}
    for n in sorted(dA):
        if n >= 1 and all(k in dB for k in range(1, n + 1)):
            sums[n] = dA[n] == 1 + sum(dB[k] for k in range(1, n + 1))
    bc = {n: dB[n] == dB_closed_form(n) for n in sorted(dB) if n >= 1}
    ac = {n: dA[n] == dA_closed_form(n) for n in sorted(dA) if n >= 1}
    ab = {k: led.alpha_beta_ok(k) for k in sorted(led.beta)
          if k >= start and k - 1 in led.alpha and k in led.alpha}
    return LedgerReport(rec, seeds, sums, bc, ac, ab)
