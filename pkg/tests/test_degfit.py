import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import assume, given, settings, strategies as st

from birmap import maps
from birmap.degfit import (NoFit, RationalGF, classify_growth, fit, fit_recurrence,
                           solve_exact, to_generating_function)
from birmap.iterate import iterate_direct

SPACE = [1, 2, 4, 8, 14, 23, 35, 51, 71, 96, 126, 162, 204]


def berlekamp_massey(seq):
    """Shortest linear recurrence over the rationals; returns [c1..cL]."""
    seq = [Fraction(v) for v in seq]
    C, B = [Fraction(1)], [Fraction(1)]
    L, m, b = 0, 1, Fraction(1)
    for n in range(len(seq)):
        d = seq[n] + sum(C[i] * seq[n - i] for i in range(1, L + 1))
        if d == 0:
            m += 1
            continue
        T = C[:]
        coef = d / b
        C = C + [Fraction(0)] * (len(B) + m - len(C))
        for i, v in enumerate(B):
            C[i + m] -= coef * v
        if 2 * L <= n:
            L, B, b, m = n + 1 - L, T, d, 1
        else:
            m += 1
    return [-C[i] if i < len(C) else Fraction(0) for i in range(1, L + 1)]


# -- examples -------------------------------------------------------------------------


def test_space_sequence():
    res = fit(SPACE)
    assert res.recurrence.order == 5
    assert res.gf == RationalGF.parse("(1 - s + 2*s^3 - s^4)/((1 + s)*(1 - s)^4)")
    g = res.growth
    assert g.kind == "polynomial" and g.nu == 3 and g.entropy == 0.0
    assert g.pole_order_at_one == 4 and g.leading_coefficient == Fraction(1, 12)
    assert all(g.closed_form(n) == d for n, d in enumerate(SPACE))
    assert g.closed_form.text() == "17/16 + 5/12*n + 3/8*n^2 + 1/12*n^3 - 1/16*(-1)^n"


def test_space_recurrence_matches_berlekamp_massey():
    rec = fit_recurrence(SPACE)
    assert list(rec.coefficients) == berlekamp_massey(SPACE)


def test_plane_sequence_is_quadratic():
    seq = iterate_direct(maps.plane_map(), 14).degrees
    g = fit(seq).growth
    assert g.kind == "polynomial" and g.nu == 2 and g.pole_order_at_one == 3
    assert all(g.closed_form(n) == d for n, d in enumerate(seq) if n >= g.closed_form.valid_from)


def test_constant_sequence():
    g = fit([1] * 8)
    assert g.gf == RationalGF.parse("1/(1 - s)")
    assert g.growth.kind == "polynomial" and g.growth.nu == 0 and g.growth.bounded


def test_fibonacci():
    fib = [1, 1]
    while len(fib) < 12:
        fib.append(fib[-1] + fib[-2])
    res = fit(fib)
    assert list(res.recurrence.coefficients) == [1, 1]
    # oracle: solve the 2x2 Hankel system with sympy
    c1, c2 = sympy.symbols("c1 c2")
    sol = sympy.solve([fib[2] - c1 * fib[1] - c2 * fib[0], fib[3] - c1 * fib[2] - c2 * fib[1]])
    assert (sol[c1], sol[c2]) == (1, 1)
    g = res.growth
    assert g.kind == "exponential"
    assert g.entropy == pytest.approx(math.log((1 + math.sqrt(5)) / 2), abs=1e-12)
    assert g.certified


def test_doubling_has_entropy_log_two():
    g = fit([2 ** k for k in range(10)]).growth
    assert g.kind == "exponential"
    assert g.entropy == pytest.approx(math.log(2), abs=1e-12)
    assert g.dynamical_degree == pytest.approx(2.0)


def test_cubic_pole():
    gf = RationalGF.parse("1/(1 - s)^3")
    g = classify_growth(gf)
    assert g.nu == 2 and g.leading_coefficient == Fraction(1, 2)
    assert [g.closed_form(n) for n in range(6)] == gf.expand(6)


def test_periodic_sequence_is_bounded():
    g = fit([1, 2, 1, 2, 1, 2, 1, 2]).growth
    assert g.kind == "polynomial" and g.bounded


def test_zero_sequence():
    assert fit_recurrence([0] * 8).order == 0


def test_too_short():
    with pytest.raises(NoFit):
        fit([1, 2, 4])


def test_no_recurrence_in_window():
    # the order-5 space sequence cannot be confirmed from 11 terms
    with pytest.raises(NoFit):
        fit(SPACE[:11])


def test_reduced_form_is_canonical():
    gf = RationalGF.parse("(2 - 2*s)/(2 - 4*s + 2*s^2)")
    assert gf.text() == "(1)/(1 - s)"


def test_denominator_must_not_vanish_at_zero():
    with pytest.raises(ValueError):
        RationalGF.parse("1/s")


def test_solve_exact_inconsistent():
    assert solve_exact([[1, 1], [2, 2]], [1, 3]) is None
    assert solve_exact([[1, 1], [1, -1]], [4, 2]) == [3, 1]


# -- properties -------------------------------------------------------------------


coeff = st.integers(-5, 5)


@settings(max_examples=60, deadline=None)
@given(st.lists(coeff, min_size=1, max_size=3), st.lists(coeff, min_size=1, max_size=3))
def test_round_trip(num, tail):
    den = [1] + tail
    terms = "+".join(f"({c})*s^{i}" for i, c in enumerate(num))
    dterms = "+".join(f"({c})*s^{i}" for i, c in enumerate(den))
    gf = RationalGF.parse(f"({terms})/({dterms})")
    seq = gf.expand(2 * len(den) + 6)
    assume(all(v.denominator == 1 for v in seq))
    seq = [int(v) for v in seq]
    res = fit(seq)
    assert res.gf == gf
    assert to_generating_function(seq) == gf
    assert berlekamp_massey(seq) == list(res.recurrence.coefficients)


@pytest.mark.parametrize("nu", range(6))
def test_pole_order_gives_polynomial_degree(nu):
    g = classify_growth(RationalGF.parse(f"1/(1 - s)^{nu + 1}"))
    assert g.kind == "polynomial" and g.nu == nu
    assert g.leading_coefficient == Fraction(1, math.factorial(nu))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-4, 4), min_size=1, max_size=3), st.integers(0, 3),
       st.integers(0, 2))
def test_closed_form_equals_terms(num, p, q):
    assume(any(num) and p + q > 0)
    den = f"(1 - s)^{p}*(1 + s)^{q}" if q else f"(1 - s)^{p}"
    terms = "+".join(f"({c})*s^{i}" for i, c in enumerate(num))
    gf = RationalGF.parse(f"({terms})/({den})")
    g = classify_growth(gf)
    assume(g.closed_form is not None)
    seq = gf.expand(20)
    assert all(g.closed_form(n) == seq[n] for n in range(g.closed_form.valid_from, 20))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 9))
def test_entropy_is_invariant_under_scaling(k):
    base = fit(SPACE).growth
    scaled = fit([k * v for v in SPACE]).growth
    assert (scaled.kind, scaled.nu, scaled.entropy) == (base.kind, base.nu, base.entropy)
    doubling = [2 ** n for n in range(10)]
    assert fit([k * v for v in doubling]).growth.entropy == \
        pytest.approx(fit(doubling).growth.entropy)
