import random
from fractions import Fraction

import pytest

from birmap import maps
from birmap.geom import (RationalInvariant, check_cone, check_invariance, check_line_transport,
                         check_pencil_invariance, gradient_at, pencil_value_at)
from birmap.poly import Poly, parse, substitute
from birmap.projmap import ProjPoint, identity_map

SPACE = maps.SPACE
PROJ = SPACE.projective


def pencil():
    return RationalInvariant(*maps.space_pencil())


def generic_point(names=("m1", "m2", "m3", "m4")):
    return ProjPoint([Poly.var(v, names) for v in names], names)


def test_plane_invariant():
    r = check_invariance(maps.plane_map(), RationalInvariant.from_rational(maps.plane_invariant()))
    assert r.ok and r.details["symbolic"] and r.details["random_points"]


def test_space_invariant_and_pencil():
    r = check_invariance(maps.space_map(), RationalInvariant.from_rational(maps.space_invariant()))
    assert r.ok
    p = check_pencil_invariance(maps.space_map(), pencil())
    assert p.ok and p.details["exponent"] == 3


def test_multiplier_is_cube_of_exceptional_factor():
    r = check_invariance(maps.space_map(), RationalInvariant.from_rational(maps.space_invariant()))
    assert r.details["exponent"] == 3
    assert parse(r.details["multiplier"], SPACE.all) == maps.forward_factor() ** 3


def test_identity_preserves_anything():
    inv = RationalInvariant(parse("x^2 + y*z + 3*t^2", SPACE.all), parse("x*y + t^2", SPACE.all))
    assert check_invariance(identity_map(SPACE), inv).ok


def test_non_invariant_is_rejected():
    inv = RationalInvariant(parse("x^2", SPACE.all), parse("t^2", SPACE.all))
    r = check_invariance(maps.space_map(), inv)
    assert not r.ok and r.witness


def test_pencil_value_base_member():
    # a point on P = 0 with t != 0 picks the member k = (1, 0)
    vals = {"a": 1, "b": 2, "c": 3, "d": 5}
    inv = RationalInvariant(*(p.subs(vals).drop_unused(PROJ) for p in maps.space_pencil()))
    M = ProjPoint.constant((1, -1, 1, 1))
    assert inv.numerator.evaluate(dict(zip(PROJ, (1, -1, 1, 1)))) == 0
    k = pencil_value_at(inv, M, PROJ)
    assert k.k1.is_zero() and not k.k0.is_zero()


def test_pencil_value_vanishes_at_random_points():
    rng = random.Random(3)
    vals = {"a": 1, "b": 2, "c": 3, "d": 5}
    inv = RationalInvariant(*(p.subs(vals).drop_unused(PROJ) for p in maps.space_pencil()))
    for _ in range(20):
        # t != 0 keeps the point off the base locus of the pencil
        pt = [Fraction(rng.randint(-20, 20), rng.randint(1, 9)) for _ in range(3)] + [
            Fraction(rng.randint(1, 20))]
        k = pencil_value_at(inv, ProjPoint.constant(pt), PROJ)
        env = dict(zip(PROJ, pt))
        k0, k1 = k.k0.constant_value(), k.k1.constant_value()
        assert k0 * inv.numerator.evaluate(env) + k1 * inv.denominator.evaluate(env) == 0


def test_pencil_value_at_generic_point_symbolically():
    inv = pencil()
    M = generic_point()
    k = pencil_value_at(inv, M, PROJ)
    names = tuple(sorted(set(k.k0.variables) | set(inv.numerator.variables)))
    member = inv.numerator.extend(names) * k.k0.extend(names) \
        + inv.denominator.extend(names) * k.k1.extend(names)
    binds = {v: c.extend(names) for v, c in zip(PROJ, M.coords)}
    assert substitute(member, binds, names).is_zero()


def test_pencil_value_undefined_at_sink():
    with pytest.raises(ValueError):
        pencil_value_at(pencil(), maps.cone_vertex(), PROJ)


def test_cone():
    r = check_cone(pencil(), generic_point(), maps.cone_vertex(), PROJ)
    assert r.ok and r.details["vertex_singular"]
    assert r.details["smooth_samples"] == "5/5"


def test_cone_skips_vertex():
    r = check_cone(pencil(), maps.cone_vertex(), maps.cone_vertex(), PROJ)
    assert r.ok and "skipped" in r.details


def test_gradient_vanishes_at_sink():
    names = maps.SPACE.all + ("k0", "k1")
    N, D = (p.extend(names) for p in maps.space_pencil())
    gen = N * Poly.var("k0", names) + D * Poly.var("k1", names)
    assert all(g.is_zero() for g in gradient_at(gen, maps.cone_vertex(), PROJ))


def test_line_transport_symbolic():
    r = check_line_transport(maps.space_map(), generic_point(), maps.cone_vertex())
    assert r.ok and r.details["nonzero_minors"] == 0


def _rank(rows):
    m = [list(r) for r in rows]
    rank = 0
    for col in range(len(m[0])):
        piv = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][col]:
                f = m[i][col] / m[rank][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def test_line_transport_pointwise():
    """Oracle: rank of (f(point on line), vertex, f(M)) is 2 at random numbers."""
    rng = random.Random(11)
    for _ in range(20):
        vals = {p: Fraction(rng.randint(1, 30) * rng.choice((-1, 1)), rng.randint(1, 9))
                for p in "abcd"}
        if vals["a"] * vals["d"] - vals["b"] * vals["c"] + vals["c"] ** 2 == 0:
            continue
        f = maps.space_map().specialize(vals)
        M = [Fraction(rng.randint(-9, 9)) for _ in range(4)]
        fM = f.evaluate(ProjPoint.constant(M)).constant_coords()
        for _ in range(5):
            tau = Fraction(rng.randint(-20, 20), rng.randint(1, 9))
            if tau == 1:
                continue
            L = [tau * s + (1 - tau) * m for s, m in zip(maps.CONE_VERTEX, M)]
            img = f.evaluate(ProjPoint.constant(L)).constant_coords()
            rows = [[Fraction(v) for v in img], [Fraction(v) for v in maps.CONE_VERTEX],
                    [Fraction(v) for v in fM]]
            assert _rank(rows) <= 2


def test_line_transport_skips_singular_line():
    names = ("s", "u")
    s, u = (Poly.var(v, names) for v in names)
    M = ProjPoint([s, -s, u, Poly.const(0, names)], names)
    r = check_line_transport(maps.space_map(), M, maps.cone_vertex())
    assert r.ok and "skipped" in r.details


def test_inflation_gives_pencil_numerator():
    plane_num = parse(maps.PLANE_INVARIANT[0], maps.PLANE.all)
    names = SPACE.all
    binds = {"X": parse("x + y", names), "Z": parse("y + z", names), "T": parse("t", names)}
    lifted = substitute(plane_num.extend(tuple(dict.fromkeys(maps.PLANE.all + names))),
                        binds, names)
    assert (lifted.extend(names) - maps.space_pencil()[0]).is_zero()


def test_singular_line_lies_on_every_member():
    names = ("s", "u", "k0", "k1") + maps.PARAMS
    s, u = Poly.var("s", names), Poly.var("u", names)
    binds = {"x": s, "y": -s, "z": u, "t": Poly.const(0, names)}
    N, D = maps.space_pencil()
    allnames = tuple(dict.fromkeys(SPACE.all + names))
    member = N.extend(allnames) * Poly.var("k0", allnames) + D.extend(allnames) * Poly.var(
        "k1", allnames)
    assert substitute(member, binds, names).is_zero()
