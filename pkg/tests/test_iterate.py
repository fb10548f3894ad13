import json
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from birmap import maps
from birmap.iterate import (Budget, BudgetExceeded, build_ledger, dA_closed_form,
                            dB_closed_form, iterate_direct, iterate_pullback,
                            ledger_degree_check)
from birmap.poly import gcd_many
from birmap.projmap import identity_map

SPACE = [1, 2, 4, 8, 14, 23, 35, 51, 71, 96, 126, 162, 204]
PLANE = [1, 2, 4, 8, 13, 20, 28, 38]


def sympy_line_degrees(components, variables, values, n, seed):
    """Iterate on a random line with sympy, cancelling the gcd at every step."""
    s = sympy.Symbol("s")
    rng = random.Random(seed)
    env = {sympy.Symbol(k): sympy.Rational(v.numerator, v.denominator)
           for k, v in values.items()}
    comps = [sympy.sympify(c.replace("^", "**")).subs(env) for c in components]
    syms = sympy.symbols(list(variables))
    pt = [rng.randint(-9, 9) + rng.randint(1, 9) * s for _ in syms]
    degs = [1]
    for _ in range(n):
        pt = [sympy.expand(c.subs(dict(zip(syms, pt)), simultaneous=True)) for c in comps]
        g = pt[0]
        for c in pt[1:]:
            g = sympy.gcd(g, c)
        pt = [sympy.cancel(c / g) for c in pt]
        degs.append(max(sympy.degree(c, s) for c in pt))
    return degs


# -- degree sequences -------------------------------------------------------------


def test_space_degrees():
    assert iterate_direct(maps.space_map(), 12).degrees == SPACE


def test_plane_degrees():
    assert iterate_direct(maps.plane_map(), 7).degrees == PLANE


def test_identity_map_keeps_degree_one():
    ident = identity_map(maps.SPACE)
    assert iterate_direct(ident, 5).degrees == [1] * 6


def test_reflection_removes_no_factor():
    tr = iterate_pullback(maps.reflection(), 6)
    assert tr.degrees == [1] * 7
    assert not tr.claim_violations
    assert all(s.removed_factor.is_constant() for s in tr.steps)


@pytest.mark.parametrize("seed", [0, 3])
def test_space_degrees_match_sympy_oracle(seed):
    tr = iterate_direct(maps.space_map(), 7, seed=seed)
    oracle = sympy_line_degrees(maps._SPACE_COMPONENTS, "xyzt", tr.specialization, 7, seed + 100)
    assert tr.degrees == oracle


def test_plane_degrees_match_sympy_oracle():
    tr = iterate_direct(maps.plane_map(), 7, seed=5)
    oracle = sympy_line_degrees(maps._PLANE_COMPONENTS, "XZT", tr.specialization, 7, 11)
    assert tr.degrees == oracle


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_pullback_equals_direct(seed):
    n = 10
    assert iterate_pullback(maps.space_map(), n, seed=seed).degrees == \
        iterate_direct(maps.space_map(), n, seed=seed).degrees


def test_raw_chain_equals_reduced_chain():
    raw = iterate_pullback(maps.space_map(), 9, chain="raw")
    red = iterate_pullback(maps.space_map(), 9, chain="reduced")
    assert raw.degrees == red.degrees
    assert raw.pullback_valuations == red.pullback_valuations


def test_full_frame_agrees_with_line_frame():
    full = iterate_direct(maps.space_map(), 5, frame="full")
    assert full.degrees == SPACE[:6]


def test_full_frame_removed_factors_are_powers_of_exceptional_factor():
    tr = iterate_pullback(maps.space_map(), 5, frame="full", audit_every=1)
    assert not tr.claim_violations
    names = tr.steps[0].components[0].variables
    B = maps.forward_factor().subs(dict(tr.specialization)).drop_unused(names).extend(names)
    for s in tr.steps[1:]:
        m = s.removed_exponents.get(tr.candidate_names[0], 0)
        assert (s.removed_factor.primitive().normalized()
                - (B ** m).primitive().normalized()).is_zero()


@pytest.mark.parametrize("seed", range(0, 40, 3))
def test_every_seed_gives_the_same_sequence(seed):
    assert iterate_direct(maps.space_map(), 12, seed=seed).degrees == SPACE
    tr = iterate_pullback(maps.space_map(), 12, seed=seed)
    assert tr.degrees == SPACE and not tr.claim_violations


def test_symbolic_equals_specialized():
    sym = iterate_direct(maps.space_map(), 6, mode="symbolic")
    assert sym.specialization == {"c": 1, "d": 1}
    assert sym.degrees == iterate_direct(maps.space_map(), 6).degrees


def test_gauge_free_symbolic_equals_gauge():
    full = iterate_direct(maps.space_map(), 4, mode="symbolic", gauge=False)
    assert full.specialization is None
    assert full.degrees == iterate_direct(maps.space_map(), 4, mode="symbolic").degrees


def test_coprime_after_every_step():
    for tr in (iterate_direct(maps.space_map(), 9), iterate_pullback(maps.space_map(), 9)):
        assert all(gcd_many(list(s.components)).is_constant() for s in tr.steps)


# -- ledger -----------------------------------------------------------------------


def test_ledger_shape_and_exponents():
    led = build_ledger(iterate_pullback(maps.space_map(), 11))
    for k in range(3, 11):
        assert led.shape_ok[k]
        assert led.alpha_beta_ok(k)
    assert [led.dB[i] for i in (1, 2, 3)] == [1, 2, 4]


def test_ledger_degrees():
    led = build_ledger(iterate_pullback(maps.space_map(), 11))
    rep = ledger_degree_check(led)
    assert rep.ok, rep.failures
    for n in range(1, 11):
        assert led.dB[n] == dB_closed_form(n)
        assert led.dA[n] == 1 + sum(led.dB[k] for k in range(1, n + 1))


def test_direct_route_removes_predicted_factor():
    led = build_ledger(iterate_direct(maps.space_map(), 11), strict=False)
    assert led.removed_ok and all(led.removed_ok.values())


def test_closed_form_dA_matches_space_degrees():
    # the first component's degree follows the same quasi-polynomial as d_n
    assert [dA_closed_form(n) for n in range(1, 13)] == SPACE[1:]


@settings(max_examples=30, deadline=None)
@given(st.integers(4, 60))
def test_dB_closed_form_satisfies_recurrence(n):
    b = dB_closed_form
    assert b(n) - b(n - 1) - b(n - 2) + b(n - 3) == 1
    assert dA_closed_form(n) == 1 + sum(b(k) for k in range(1, n + 1))


# -- non-autonomous -----------------------------------------------------------------


@pytest.mark.parametrize("seed", [0, 4])
def test_nonautonomous_specialized(seed):
    tr = iterate_direct(maps.nonautonomous(), 12, seed=seed)
    assert tr.degrees == SPACE
    assert {"alpha", "beta", "gamma"} <= set(tr.specialization)


def test_nonautonomous_fixed_coefficients():
    tr = iterate_direct(maps.nonautonomous((Fraction(2), Fraction(-1, 3), Fraction(5))), 10)
    assert tr.degrees == SPACE[:11]


def test_nonautonomous_rejects_pullback():
    with pytest.raises(ValueError):
        iterate_pullback(maps.nonautonomous(), 3)


# -- budgets and output -------------------------------------------------------------


def test_term_budget():
    with pytest.raises(BudgetExceeded) as err:
        iterate_direct(maps.space_map(), 8, budget=Budget(max_terms=20))
    assert err.value.step >= 1


def test_step_budget():
    with pytest.raises(BudgetExceeded):
        iterate_direct(maps.space_map(), 11, mode="symbolic")
    with pytest.raises(BudgetExceeded):
        iterate_direct(maps.space_map(), 5, budget=Budget(max_steps=4))


def test_negative_steps():
    with pytest.raises(ValueError):
        iterate_direct(maps.space_map(), -1)


def test_json_is_deterministic():
    a = iterate_pullback(maps.space_map(), 8, seed=7).to_json()
    b = iterate_pullback(maps.space_map(), 8, seed=7).to_json()
    assert a == b
    d = json.loads(a)
    assert d["seed"] == 7 and d["degrees"] == SPACE[:9]
    assert set(d["specialization"]) == {"a", "b", "c", "d"}


def test_csv_output():
    text = iterate_direct(maps.space_map(), 4).to_csv()
    assert text.splitlines() == ["n,d_n", "0,1", "1,2", "2,4", "3,8", "4,14"]
