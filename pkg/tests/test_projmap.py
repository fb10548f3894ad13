from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from birmap import maps
from birmap.poly import Poly, VarSpec, divide_exact, gcd, homogeneous_degree, parse, valuation
from birmap.projmap import (GenericityError, MapFileError, NotInversePair, ProjPoint,
                            SingularPointHit, compose, compose_raw,
                            extract_k_factor, identity_map, parse_map_text, pullback,
                            singular_locus_dimension_hint, vanishes_on)

SPACE = maps.SPACE.all


def P(text, names=SPACE):
    return parse(text, names)


def point(*coords):
    return ProjPoint.constant(coords)


def spec(values):
    return maps.space_map().specialize(values)


VALUES = {"a": Fraction(3), "b": Fraction(-2), "c": Fraction(5), "d": Fraction(7)}


# -- examples -------------------------------------------------------------------------


def test_first_orbit_point_maps_to_second():
    f = spec(VALUES)
    img = f.evaluate(point(1, 0, 0, 0))
    assert img.projectively_equal(point(2, -1, 0, 0))


def test_second_orbit_point_maps_to_third():
    f = spec(VALUES)
    assert f.evaluate(point(2, -1, 0, 0)).projectively_equal(point(2, -2, 1, 0))


def test_sink_is_singular():
    with pytest.raises(SingularPointHit):
        spec(VALUES).evaluate(point(1, -1, 1, 0))


def test_reflection_is_an_involution():
    lam = maps.reflection()
    m = ProjPoint([P(v, ("x", "y", "z", "t")) for v in "xyzt"], ("x", "y", "z", "t"))
    assert lam.evaluate(lam.evaluate(m)).projectively_equal(m)
    k = extract_k_factor(lam, lam)
    assert k.exponent == 0 and k.unit == 1


def test_running_point_of_exceptional_plane_maps_to_first_orbit_point():
    # on B1 = 0 with c = d = 1: t = -(x + y)
    names = ("x", "y", "z")
    x, y, z = (Poly.var(v, names) for v in names)
    run = ProjPoint([x, y, z, -(x + y)], names)
    f = maps.space_map().specialize({"c": 1, "d": 1, "a": 3, "b": -2})
    assert f.evaluate(run).projectively_equal(point(1, 0, 0, 0).extend(names))


def test_raw_composition_has_degree_four():
    f = maps.space_map()
    raw = compose_raw(f, f)
    assert all(homogeneous_degree(c, f.varspec.projective) == 4 for c in raw)


def test_reflection_conjugates_space_map_into_inverse():
    lam, f = maps.reflection(), maps.space_map()
    conj = compose(lam, compose(f, lam))
    g = maps.space_inverse()
    for c1, c2 in zip(conj.components, g.components):
        names = tuple(sorted(set(c1.variables) | set(c2.variables)))
        assert (c1.extend(names) - c2.extend(names)).is_zero()


def test_identity_composition_is_neutral():
    f = maps.space_map()
    ident = identity_map(f.varspec)
    for g in (compose(ident, f), compose(f, ident)):
        got = ProjPoint([c.extend(f.varspec.all) for c in g.components], f.varspec.all)
        assert got.projectively_equal(ProjPoint(f.components, f.varspec.all))


def test_pullback_of_t_is_t_times_exceptional_factor():
    f = maps.space_map()
    got = pullback(f, P("t"))
    assert (got - P("t") * maps.forward_factor()).is_zero()


def test_pullback_by_identity():
    f = maps.space_map()
    h = P("x^2*y + 3*z*t - t^3")
    assert (pullback(identity_map(f.varspec), h) - h).is_zero()


def test_pullback_of_backward_factor_by_trial_division_and_gcd():
    f = maps.space_map()
    back = pullback(f, maps.backward_factor())
    m, rest = valuation(back, maps.forward_factor())
    # cross-check the valuation with a gcd route
    g = gcd(back, maps.forward_factor() ** (m + 1))
    assert (g.primitive().normalized() - (maps.forward_factor() ** m).primitive().normalized()
            ).is_zero()
    assert not rest.is_zero()


def test_k_factors():
    f, g = maps.space_map(), maps.space_inverse()
    k1 = extract_k_factor(g, f)
    assert k1.exponent == 3
    assert (k1.value() - maps.forward_factor() ** 3).is_zero()
    k2 = extract_k_factor(f, g)
    assert (k2.value() - maps.backward_factor() ** 3).is_zero()


def test_not_an_inverse_pair():
    f = maps.space_map()
    with pytest.raises(NotInversePair):
        extract_k_factor(f, f)


def test_singular_candidates():
    names = ("s", "u")
    s, u = Poly.var("s", names), Poly.var("u", names)
    f = spec(VALUES)
    hits = singular_locus_dimension_hint(f, {
        "sink": point(1, -1, 1, 0),
        "line": ProjPoint([s, -s, u, Poly.const(0, names)], names),
        "generic": point(1, 2, 3, 4)})
    assert hits == {"sink": True, "line": True, "generic": False}


def test_generic_point_is_not_indeterminate():
    assert not vanishes_on(spec(VALUES), point(3, 1, -4, 2))


def test_genericity_guard():
    f = maps.space_map()
    with pytest.raises(GenericityError):
        f.specialize({"a": 1, "b": 1, "c": 0, "d": 1})
    # a*d - b*c + c^2 = 0
    with pytest.raises(GenericityError):
        f.specialize({"a": 0, "b": 1, "c": 1, "d": 1})


def test_degree_and_dimension():
    f = maps.space_map()
    assert f.degree == 2 and f.dimension == 3
    assert maps.plane_map().dimension == 2


# -- map files --------------------------------------------------------------------


MAP_TEXT = """
# a quadratic map
name: sample
vars: x, y, z
params: a
components:
  y*z
  x*z + a*y^2
  x*y
"""


def test_map_file_round_trip(tmp_path):
    f = parse_map_text(MAP_TEXT)
    assert f.name == "sample" and f.varspec == VarSpec(("x", "y", "z"), ("a",))
    path = tmp_path / "m.txt"
    path.write_text(MAP_TEXT)
    from birmap.projmap import load_map_file
    g = load_map_file(path)
    assert [str(c) for c in g.components] == [str(c) for c in f.components]


@pytest.mark.parametrize("text", [
    "components:\n x\n",
    "vars: x, y\ncomponents:\n x\n",
    "vars: x, y\ncomponents:\n x + q\n y\n",
    "x\nvars: x\ncomponents:\n x\n",
])
def test_map_file_errors(text):
    with pytest.raises(MapFileError):
        parse_map_text(text)


# -- properties -------------------------------------------------------------------


ints = st.integers(-9, 9)
nonzero = st.integers(1, 9).flatmap(lambda v: st.sampled_from((v, -v)))


@settings(max_examples=50, deadline=None)
@given(st.tuples(ints, ints, ints, ints).filter(lambda p: any(p)),
       st.tuples(nonzero, nonzero, nonzero, nonzero))
def test_evaluation_routes_agree(p, abcd):
    a, b, c, d = abcd
    vals = {"a": a, "b": b, "c": c, "d": d}
    if a * d - b * c + c * c == 0:
        return
    f = spec(vals)
    pt = point(*p)
    raw = f.raw_image(pt)
    if all(v.is_zero() for v in raw):
        with pytest.raises(SingularPointHit):
            f.evaluate(pt)
        return
    direct = f.evaluate(pt)
    # independent route: plug the numbers into the component strings
    env = dict(zip("xyzt", p), **vals)
    by_hand = [eval(comp.replace("^", "**"), {}, env) for comp in maps._SPACE_COMPONENTS]
    assert direct.projectively_equal(point(*by_hand))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2),
                          st.integers(0, 2), st.integers(-5, 5)), max_size=4),
       st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2),
                          st.integers(0, 2), st.integers(-5, 5)), max_size=4))
def test_pullback_is_a_ring_homomorphism(t1, t2):
    names = ("x", "y", "z", "t")

    def mk(terms):
        d = {}
        for *m, c in terms:
            d[tuple(m)] = d.get(tuple(m), 0) + c
        return Poly.from_dict(d, names)

    f = spec(VALUES)
    h1, h2 = mk(t1), mk(t2)
    assert (pullback(f, h1 + h2) - pullback(f, h1) - pullback(f, h2)).is_zero()
    assert (pullback(f, h1 * h2) - pullback(f, h1) * pullback(f, h2)).is_zero()


@settings(max_examples=50, deadline=None)
@given(st.tuples(ints, ints, ints, ints).filter(lambda p: any(p)), nonzero, nonzero)
def test_projective_equality_is_an_equivalence(p, s1, s2):
    a = point(*p)
    b = point(*(s1 * v for v in p))
    c = point(*(s2 * s1 * v for v in p))
    assert a.projectively_equal(a)
    assert a.projectively_equal(b) and b.projectively_equal(a)
    assert b.projectively_equal(c) and a.projectively_equal(c)


def test_projective_inequality():
    assert not point(1, 0, 0, 0).projectively_equal(point(0, 1, 0, 0))


def test_regularize_removes_common_factor():
    names = ("u",)
    u = Poly.var("u", names)
    p = ProjPoint([u * u, u * (u + 1), u * 3, u], names).regularize()
    assert gcd(gcd(p.coords[0], p.coords[1]), gcd(p.coords[2], p.coords[3])).is_constant()
    assert divide_exact(p.coords[0], p.coords[3]) == u
