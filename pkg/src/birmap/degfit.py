"""Degree-sequence analysis: recurrences, generating functions, growth.

Everything is exact except the final numeric value of the entropy, which is
read off certified root enclosures.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, gcd as igcd, lcm
from functools import reduce
from typing import Sequence

import flint

from .poly import Poly, divide_exact, gcd

__all__ = [
    "NoFit",
    "Recurrence",
    "RationalGF",
    "QuasiPolynomial",
    "GrowthReport",
    "fit_recurrence",
    "to_generating_function",
    "classify_growth",
    "fit",
    "solve_exact",
]

VAR = ("s",)
MIN_LENGTH = 6


class NoFit(ValueError):
    pass


def solve_exact(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> list[Fraction] | None:
    """A solution of ``rows @ x == rhs`` over the rationals, or None if inconsistent.

    Free variables are set to zero.
    """
    n = len(rows[0]) if rows else 0
    m = [[Fraction(v) for v in r] + [Fraction(b)] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][col]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    if any(row[-1] != 0 for row in m[r:]):
        return None
    x = [Fraction(0)] * n
    for i, col in enumerate(pivots):
        x[col] = m[i][-1]
    return x


@dataclass(frozen=True)
class Recurrence:
    """``d_n = sum(coefficients[i-1] * d_{n-i}, i = 1..order)`` for every n >= order."""

    coefficients: tuple[Fraction, ...]

    @property
    def order(self) -> int:
        return len(self.coefficients)

    def holds(self, seq: Sequence[int]) -> bool:
        r = self.order
        return all(seq[n] == sum(c * seq[n - i] for i, c in enumerate(self.coefficients, 1))
                   for n in range(r, len(seq)))

    def extend(self, seq: Sequence[int], length: int) -> list[Fraction]:
        out = [Fraction(v) for v in seq]
        while len(out) < length:
            n = len(out)
            out.append(sum(c * out[n - i] for i, c in enumerate(self.coefficients, 1)))
        return out

    def characteristic(self) -> Poly:
        """``1 - c_1 s - ... - c_r s^r`` with integer coefficients."""
        den = reduce(lcm, (c.denominator for c in self.coefficients), 1)
        terms = {(0,): den}
        for i, c in enumerate(self.coefficients, 1):
            if c:
                terms[(i,)] = -c * den
        return Poly.from_dict(terms, VAR)

    def __str__(self):
        out = ""
        for i, c in enumerate(self.coefficients, 1):
            if not c:
                continue
            body = f"d[n-{i}]" if abs(c) == 1 else f"{abs(c)}*d[n-{i}]"
            if not out:
                out = ("-" if c < 0 else "") + body
            else:
                out += (" - " if c < 0 else " + ") + body
        return "d[n] = " + (out or "0")


def fit_recurrence(seq: Sequence[int], max_order: int | None = None) -> Recurrence:
    """Shortest recurrence valid on the whole sequence, confirmed by two extra terms.

    A recurrence of order r is accepted only when the sequence has at least
    ``2r + 2`` terms: 2r to determine it and two held out to confirm it.
    """
    seq = [Fraction(v) for v in seq]
    if len(seq) < MIN_LENGTH:
        raise NoFit(f"need at least {MIN_LENGTH} terms, got {len(seq)}")
    top = len(seq) // 2 - 1
    if max_order is not None:
        top = min(top, max_order)
    for r in range(0, top + 1):
        if r == 0:
            if all(v == 0 for v in seq):
                return Recurrence(())
            continue
        # fit window: the square Hankel system on the first 2r terms
        rows = [[seq[n - i] for i in range(1, r + 1)] for n in range(r, 2 * r)]
        rhs = [seq[n] for n in range(r, 2 * r)]
        sol = solve_exact(rows, rhs)
        if sol is None:
            continue
        rec = Recurrence(tuple(sol))
        if not rec.holds(seq):
            # a singular window leaves freedom; use every equation instead
            rows = [[seq[n - i] for i in range(1, r + 1)] for n in range(r, len(seq))]
            sol = solve_exact(rows, seq[r:])
            if sol is None:
                continue
            rec = Recurrence(tuple(sol))
        if rec.holds(seq):
            return rec
    raise NoFit(f"no recurrence of order <= {top} fits {len(seq)} terms")


# -- generating functions ---------------------------------------------------------


def _poly_from_coeffs(coeffs: Sequence[int | Fraction]) -> Poly:
    return Poly.from_dict({(i,): c for i, c in enumerate(coeffs) if c}, VAR)


def _coeffs(p: Poly) -> list[int]:
    deg = p.degree() if not p.is_zero() else -1
    out = [0] * (deg + 1)
    for (i,), c in p.terms().items():
        out[i] = c
    return out


class RationalGF:
    """``numerator / denominator`` in one variable ``s``, in lowest terms.

    Coefficients are coprime integers and the denominator has positive
    constant term (equal to 1 whenever that is possible with integers).
    """

    def __init__(self, numerator: Poly, denominator: Poly):
        if denominator.is_zero():
            raise ZeroDivisionError("zero denominator")
        num, den = numerator.extend(VAR), denominator.extend(VAR)
        g = gcd(num, den)
        if not g.is_constant():
            num, den = divide_exact(num, g), divide_exact(den, g)
        if den.evaluate({"s": 0}) == 0:
            raise ValueError("denominator vanishes at s = 0")
        content = reduce(igcd, _coeffs(num) + _coeffs(den), 0)
        if content > 1:
            num = Poly(num.raw / content, VAR)
            den = Poly(den.raw / content, VAR)
        if den.evaluate({"s": 0}) < 0:
            num, den = -num, -den
        self.numerator = num
        self.denominator = den

    @classmethod
    def parse(cls, text: str) -> "RationalGF":
        from .poly import parse_rational
        rf = parse_rational(text, VAR)
        return cls(rf.num, rf.den)

    def expand(self, n: int) -> list[Fraction]:
        """First n Taylor coefficients."""
        num, den = _coeffs(self.numerator), _coeffs(self.denominator)
        out = []
        d0 = Fraction(den[0])
        for k in range(n):
            acc = Fraction(num[k]) if k < len(num) else Fraction(0)
            for i in range(1, min(k, len(den) - 1) + 1):
                acc -= den[i] * out[k - i]
            out.append(acc / d0)
        return out

    def __eq__(self, other):
        return (isinstance(other, RationalGF) and self.numerator == other.numerator
                and self.denominator == other.denominator)

    def __hash__(self):
        return hash((str(self.numerator), str(self.denominator)))

    def text(self) -> str:
        return f"({_ascending(self.numerator)})/({_ascending(self.denominator)})"

    def factored_denominator(self) -> list[tuple[Poly, int]]:
        content, parts = self.denominator.raw.factor()
        out = []
        for f, e in parts:
            p = Poly(f, VAR)
            # write factors with positive constant term, like 1 - s
            if p.evaluate({"s": 0}) < 0:
                p = -p
            out.append((p, int(e)))
        out.sort(key=lambda fe: (fe[0].degree(), str(fe[0])))
        return out

    def factored_text(self) -> str:
        parts = []
        for f, e in self.factored_denominator():
            parts.append(f"({_ascending(f)})" + (f"^{e}" if e > 1 else ""))
        return f"({_ascending(self.numerator)})/({'*'.join(parts) or '1'})"

    def __str__(self):
        return self.text()

    def __repr__(self):
        return f"RationalGF({self.text()!r})"


def _ascending(p: Poly) -> str:
    """Print in increasing powers of s, the usual way for generating functions."""
    terms = sorted(p.terms().items())
    out = ""
    for (i,), c in terms:
        mag = abs(c)
        mono = "" if i == 0 else ("s" if i == 1 else f"s^{i}")
        body = str(mag) if not mono else (mono if mag == 1 else f"{mag}*{mono}")
        if not out:
            out = ("-" if c < 0 else "") + body
        else:
            out += (" - " if c < 0 else " + ") + body
    return out or "0"


def to_generating_function(seq: Sequence[int], rec: Recurrence | None = None) -> RationalGF:
    """Generating function of ``seq`` implied by a recurrence it satisfies."""
    if rec is None:
        rec = fit_recurrence(seq)
    if not rec.holds(seq):
        raise ValueError("recurrence does not hold on the sequence")
    den = rec.characteristic()
    dc = _coeffs(den)
    num = []
    for k in range(rec.order):
        num.append(sum(Fraction(dc[i]) * seq[k - i] for i in range(0, min(k, len(dc) - 1) + 1)))
    if rec.order == 0:
        num = [0]
    scale = reduce(lcm, (v.denominator for v in num), 1)
    gf = RationalGF(_poly_from_coeffs([v * scale for v in num]), den * scale)
    if gf.expand(len(seq)) != [Fraction(v) for v in seq]:
        raise AssertionError("generating function does not reproduce the sequence")
    return gf


# -- growth ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuasiPolynomial:
    """``P(n) + (-1)^n Q(n)`` with rational coefficients, valid for n >= valid_from."""

    poly: tuple[Fraction, ...]
    alternating: tuple[Fraction, ...]
    valid_from: int = 0

    def __call__(self, n: int) -> Fraction:
        p = sum(c * n ** i for i, c in enumerate(self.poly))
        q = sum(c * n ** i for i, c in enumerate(self.alternating))
        return p + (-1) ** n * q

    def text(self) -> str:
        parts = []
        for i, c in enumerate(self.poly):
            if c:
                parts.append((c, "" if i == 0 else ("n" if i == 1 else f"n^{i}")))
        for i, c in enumerate(self.alternating):
            if c:
                mono = "(-1)^n" if i == 0 else f"n^{i}*(-1)^n" if i > 1 else "n*(-1)^n"
                parts.append((c, mono))
        out = ""
        for c, mono in parts:
            mag = abs(c)
            body = str(mag) if not mono else (mono if mag == 1 else f"{mag}*{mono}")
            if not out:
                out = ("-" if c < 0 else "") + body
            else:
                out += (" - " if c < 0 else " + ") + body
        return out or "0"

    def __str__(self):
        return self.text()


@dataclass
class GrowthReport:
    kind: str  # "polynomial" or "exponential"
    nu: int | None
    entropy: float
    entropy_text: str
    dynamical_degree: float
    pole_order_at_one: int
    leading_coefficient: Fraction | None
    closed_form: QuasiPolynomial | None
    bounded: bool
    certified: bool
    cyclotomic_only: bool
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "nu": self.nu,
            "entropy": self.entropy_text,
            "dynamical_degree": repr(self.dynamical_degree),
            "pole_order_at_one": self.pole_order_at_one,
            "leading_coefficient": None if self.leading_coefficient is None
            else str(self.leading_coefficient),
            "closed_form": None if self.closed_form is None else self.closed_form.text(),
            "closed_form_valid_from": None if self.closed_form is None
            else self.closed_form.valid_from,
            "bounded": self.bounded,
            "certified": self.certified,
            "notes": self.notes,
        }


def _fmpz(p: Poly) -> flint.fmpz_poly:
    return flint.fmpz_poly(_coeffs(p))


def _min_root_modulus(f: flint.fmpz_poly) -> tuple[flint.arb, bool]:
    """Enclosure of the smallest root modulus; second value False if not separated from 1."""
    prec = flint.ctx.prec
    try:
        for bits in (64, 256, 1024):
            flint.ctx.prec = bits
            mods = [abs(r) for r, _ in f.complex_roots()]
            low = min(mods, key=lambda m: float(m.mid()))
            if low < 1 or low > 1:
                return low, True
        return low, False
    finally:
        flint.ctx.prec = prec


def classify_growth(gf: RationalGF) -> GrowthReport:
    """Growth type, entropy and (when available) closed form of the coefficients."""
    notes = []
    factors = gf.factored_denominator()
    one_minus_s = Poly.from_dict({(0,): 1, (1,): -1}, VAR)
    one_plus_s = Poly.from_dict({(0,): 1, (1,): 1}, VAR)
    pole_at_one = sum(e for f, e in factors if f == one_minus_s)
    unit_mult = 0
    largest = flint.arb(0)
    certified = True
    cyclotomic_only = True
    for f, e in factors:
        fz = _fmpz(f)
        if fz.degree() <= 0:
            continue
        if fz.leading_coefficient() < 0:
            fz = -fz
        if fz.is_cyclotomic():
            unit_mult = max(unit_mult, e)
            largest = flint.arb(1) if largest < 1 else largest
            continue
        cyclotomic_only = False
        low, sep = _min_root_modulus(fz)
        if not sep:
            certified = False
            notes.append(f"a root of {_ascending(f)} could not be separated from the unit circle")
            unit_mult = max(unit_mult, e)
            continue
        if low < 1:
            inv = 1 / low
            if inv > largest:
                largest = inv
    if largest > 1:
        ent = largest.log()
        kind, nu = "exponential", None
        entropy = float(ent.mid())
        entropy_text = ent.mid().str(12, radius=False)
        dyn = float(largest.mid())
        lead = None
    else:
        kind = "polynomial"
        nu = max(unit_mult - 1, 0)
        entropy, entropy_text, dyn = 0.0, "0", 1.0
        if unit_mult and pole_at_one != unit_mult:
            notes.append("another root of unity has a higher pole order than s = 1")
        lead = None
        if pole_at_one and pole_at_one == unit_mult:
            rest = divide_exact(gf.denominator, one_minus_s ** pole_at_one)
            lead = (Fraction(gf.numerator.evaluate({"s": 1}))
                    / Fraction(rest.evaluate({"s": 1})) / factorial(pole_at_one - 1))
    bounded = kind == "polynomial" and unit_mult <= 1
    closed = None
    other = [f for f, _ in factors if f not in (one_minus_s, one_plus_s) and f.degree() > 0]
    if not other:
        closed = _quasi_polynomial(gf, factors, one_minus_s, one_plus_s)
    return GrowthReport(kind, nu, entropy, entropy_text, dyn, pole_at_one, lead, closed,
                        bounded, certified, cyclotomic_only, notes)


def _quasi_polynomial(gf, factors, one_minus_s, one_plus_s) -> QuasiPolynomial:
    p = sum(e for f, e in factors if f == one_minus_s)
    q = sum(e for f, e in factors if f == one_plus_s)
    start = max(0, gf.numerator.degree() - gf.denominator.degree() + 1) if not \
        gf.numerator.is_zero() else 0
    n_terms = start + p + q + 4
    seq = gf.expand(n_terms)
    rows, rhs = [], []
    for n in range(start, n_terms):
        rows.append([Fraction(n) ** i for i in range(p)] +
                    [Fraction((-1) ** n) * n ** i for i in range(q)])
        rhs.append(seq[n])
    sol = solve_exact(rows, rhs)
    if sol is None:
        raise AssertionError("quasi-polynomial system is inconsistent")
    return QuasiPolynomial(tuple(sol[:p]), tuple(sol[p:]), start)


@dataclass
class FitResult:
    sequence: list[int]
    recurrence: Recurrence
    gf: RationalGF
    growth: GrowthReport

    def to_dict(self) -> dict:
        out = {
            "sequence": self.sequence,
            "recurrence_order": self.recurrence.order,
            "recurrence": [str(c) for c in self.recurrence.coefficients],
            "generating_function": self.gf.text(),
            "generating_function_factored": self.gf.factored_text(),
        }
        out.update(self.growth.to_dict())
        if self.growth.closed_form is not None:
            cf = self.growth.closed_form
            out["closed_form_matches"] = all(
                cf(n) == v for n, v in enumerate(self.sequence) if n >= cf.valid_from)
        return out


def fit(seq: Sequence[int]) -> FitResult:
    rec = fit_recurrence(seq)
    gf = to_generating_function(seq, rec)
    return FitResult(list(seq), rec, gf, classify_growth(gf))
