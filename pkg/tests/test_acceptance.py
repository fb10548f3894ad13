"""The ten acceptance criteria, one PASS/FAIL line each in the run summary."""

import pytest

from birmap import maps
from birmap.degfit import fit
from birmap.iterate import build_ledger, iterate_direct, iterate_pullback, ledger_degree_check
from birmap.poly import gcd_many
from birmap.verify import (PLANE_DEGREES, SETS_WITH_EQUATIONS, SPACE_CLOSED_FORM, SPACE_DEGREES,
                           SPACE_GF, verify_blowups, verify_cone, verify_invariant,
                           verify_kfactor, verify_lines, verify_orbit)

from conftest import record

SEEDS = (0, 1, 2)


def _report(criterion, rep):
    record(criterion, rep.ok, "" if rep.ok else f"failed: {rep.first_failure}")
    assert rep.ok, rep.to_text()


@pytest.mark.parametrize("seed", SEEDS)
def test_criterion_1_space_degrees_specialized(seed):
    got = iterate_direct(maps.space_map(), 12, seed=seed).degrees
    record(1, got == list(SPACE_DEGREES), f"seed {seed}: {got}" if got != list(SPACE_DEGREES)
           else "")
    assert got == list(SPACE_DEGREES)


def test_criterion_1_space_degrees_symbolic_to_8():
    got = iterate_direct(maps.space_map(), 8, mode="symbolic").degrees
    ok = got == list(SPACE_DEGREES[:9])
    record(1, ok, "" if ok else f"symbolic: {got}")
    assert ok


@pytest.mark.parametrize("mode", ("specialized", "symbolic"))
def test_criterion_2_plane_degrees(mode):
    got = iterate_direct(maps.plane_map(), 7, mode=mode).degrees
    record(2, got == list(PLANE_DEGREES), "" if got == list(PLANE_DEGREES) else str(got))
    assert got == list(PLANE_DEGREES)


def test_criterion_3_growth_fit():
    seq = iterate_direct(maps.space_map(), 12).degrees
    res = fit(seq)
    g = res.to_dict()
    checks = {
        "generating function": g["generating_function"] == SPACE_GF,
        "denominator (1+s)(1-s)^4": g["generating_function_factored"].endswith(
            "((1 - s)^4*(1 + s))"),
        "polynomial of degree 3": g["kind"] == "polynomial" and g["nu"] == 3,
        "entropy 0": g["entropy"] == "0",
        "pole order 4": g["pole_order_at_one"] == 4,
        "leading coefficient 1/12": g["leading_coefficient"] == "1/12",
        "closed form": g["closed_form"] == SPACE_CLOSED_FORM,
        "closed form re-evaluates": all(res.growth.closed_form(n) == d
                                        for n, d in enumerate(seq)),
    }
    bad = [k for k, v in checks.items() if not v]
    record(3, not bad, ", ".join(bad))
    assert not bad, g


def test_criterion_4_k_factors():
    _report(4, verify_kfactor())


def test_criterion_5_structure():
    pull = iterate_pullback(maps.space_map(), 11)
    led = build_ledger(pull, strict=True)
    shape = all(led.shape_ok.get(k, False) for k in range(3, 11))
    ab = all(led.alpha_beta_ok(k) for k in range(3, 11))
    chk = ledger_degree_check(led)
    seeds = [led.dB[i] for i in (1, 2, 3)] == [1, 2, 4]
    ok = shape and ab and chk.ok and seeds
    record(5, ok, "" if ok else f"shape {shape}, alpha/beta {ab}, {chk.failures}")
    assert ok


@pytest.mark.parametrize("mode", ("specialized", "symbolic"))
def test_criterion_6_orbit_and_sink(mode):
    _report(6, verify_orbit(mode=mode))


PASSING_SETS = tuple(s for s in SETS_WITH_EQUATIONS if s != "image_4_2")


@pytest.mark.parametrize("mode", ("specialized", "symbolic"))
def test_criterion_7_sets_and_dimensions(mode):
    """Every set except the one with the printed misprint, plus all dimensions."""
    rep = verify_blowups(mode=mode)
    membership = {c.details["set"]: c for c in rep.checks if "set" in c.details}
    bad = [s for s in PASSING_SETS if not membership[s].ok]
    dims = [s for s, c in membership.items() if c.details["dimension"]
            != c.details["expected_dimension"]]
    transform = rep.checks[-1].ok
    record(7, not bad and not dims and transform,
           "" if not bad and not dims else f"{mode}: sets {bad}, dimensions {dims}")
    assert not bad and not dims and transform, rep.to_text()


@pytest.mark.xfail(strict=True, reason="second printed equation of image_4_2 does not vanish")
def test_criterion_7_image_4_2_as_printed():
    rep = verify_blowups(sets=("image_4_2",))
    check = rep.checks[0]
    note = "image_4_2 as printed: " + "; ".join(check.details["failures"])
    record(7, check.ok, "" if check.ok else note)
    print(note)
    assert check.ok, note


def test_criterion_7_image_4_2_consistent_reading_holds():
    check = verify_blowups(sets=("image_4_2",)).checks[0]
    assert check.details["alternatives"]
    assert all(check.details["alternatives"].values())
    assert check.details["dimension"] == check.details["expected_dimension"]
    # the first printed equation is fine; only the second one fails
    assert sum(check.details["membership"].values()) == 1


def test_criterion_8_invariance_cone_lines():
    for rep in (verify_invariant(), verify_cone(), verify_lines()):
        _report(8, rep)


@pytest.mark.parametrize("seed", SEEDS)
def test_criterion_9_nonautonomous_random_rationals(seed):
    tr = iterate_direct(maps.nonautonomous(), 12, seed=seed)
    ok = tr.degrees == list(SPACE_DEGREES)
    record(9, ok, "" if ok else f"seed {seed}: {tr.degrees}")
    assert ok
    assert {"alpha", "beta", "gamma"} <= set(tr.specialization)


def test_criterion_9_nonautonomous_symbolic_short():
    tr = iterate_direct(maps.nonautonomous(), 5, mode="symbolic")
    ok = tr.degrees == list(SPACE_DEGREES[:6])
    record(9, ok, "" if ok else f"symbolic: {tr.degrees}")
    assert ok


@pytest.mark.parametrize("frame,n", (("line", 12), ("full", 5)))
def test_criterion_10_property_suites(frame, n):
    direct = iterate_direct(maps.space_map(), n, frame=frame)
    pull = iterate_pullback(maps.space_map(), n, frame=frame, audit_every=1)
    same = direct.degrees == pull.degrees
    coprime = all(gcd_many(list(s.components)).is_constant()
                  for tr in (direct, pull) for s in tr.steps)
    pure = not pull.claim_violations
    ok = same and coprime and pure
    record(10, ok, "" if ok else f"{frame}: equal {same}, coprime {coprime}, "
                                 f"violations {pull.claim_violations}")
    assert ok
