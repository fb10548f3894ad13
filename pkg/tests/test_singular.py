from fractions import Fraction

import pytest

from birmap import maps
from birmap.poly import Poly, parse
from birmap.projmap import ProjPoint
from birmap.singular import (ChartTableError, ChartUndefined, apply_chart, builtin_chart_table,
                             generic_iterates, hyperplane_parametrization, load_chart_table,
                             track_orbit, verify_exceptional_set, verify_fixed_sink,
                             verify_transform)
from birmap.verify import MIRROR_ORBIT, ORBIT, SINK, specialization_for

VALUES = specialization_for("specialized", 0)
GAUGE = {"c": Fraction(1), "d": Fraction(1)}


def same(points, want):
    return len(points) == len(want) and all(
        p is not None and ProjPoint.constant(p).projectively_equal(ProjPoint.constant(q))
        for p, q in zip(points, want))


# -- orbits ---------------------------------------------------------------------------


@pytest.mark.parametrize("values", [VALUES, GAUGE, {"a": 2, "b": -3, "c": 5, "d": 7}])
def test_orbit_of_exceptional_plane(values):
    orb = track_orbit(maps.forward_factor(), maps.space_map(), 5, values=values)
    assert same(orb.constant_points(), ORBIT)
    assert orb.absorbed_at == 4
    assert not orb.non_point


def test_orbit_does_not_depend_on_parametrization():
    src = maps.forward_factor().subs(VALUES).drop_unused(maps.SPACE.projective).primitive()
    f = maps.space_map().specialize(VALUES)
    run = hyperplane_parametrization(src, maps.SPACE.projective, solve_for="x")
    orb = track_orbit(src, f, 5, parametrization=run)
    assert same(orb.constant_points(), ORBIT)


def test_mirror_orbit():
    orb = track_orbit(maps.backward_factor(), maps.space_inverse(), 5, values=VALUES)
    assert same(orb.constant_points(), MIRROR_ORBIT)
    assert orb.absorbed_at == 4


def test_reflection_does_not_blow_down_t_plane():
    orb = track_orbit(parse("t", maps.SPACE.all), maps.reflection(), 3)
    assert orb.non_point and orb.non_point[0].step == 1 and orb.non_point[0].on_source


def test_parametrization_must_lie_on_source():
    names = ("p", "q", "r")
    p, q, r = (Poly.var(v, names) for v in names)
    bad = ProjPoint([p, q, r, p], names)
    f = maps.space_map().specialize(VALUES)
    src = maps.forward_factor().subs(VALUES).drop_unused(maps.SPACE.projective)
    with pytest.raises(ValueError):
        track_orbit(src, f, 2, parametrization=bad)


def test_only_hyperplanes_are_parametrized():
    with pytest.raises(ValueError):
        hyperplane_parametrization(parse("x^2 - y*z", maps.SPACE.projective),
                                   maps.SPACE.projective)


# -- fixed sink ---------------------------------------------------------------------


@pytest.mark.parametrize("values", [VALUES, None])
def test_fixed_sink(values):
    rep = verify_fixed_sink(maps.space_map(), 4, values=values)
    assert rep.ok
    assert list(rep.steps) == [0, 1, 2, 3]
    assert rep.plane_remark == SINK


def test_fixed_sink_negative_control():
    rep = verify_fixed_sink(maps.space_map(), 2, values=VALUES, expected=(1, 0, 0, 0))
    assert not rep.ok


# -- blow-up charts -----------------------------------------------------------------


@pytest.fixture(scope="module")
def specialized():
    f = maps.space_map()
    return f, generic_iterates(f.specialize(VALUES), 5)


@pytest.mark.parametrize("name", ["image_1_1", "image_1_2", "image_1_3", "image_2_1",
                                  "image_2_2", "image_2_3", "image_3_1", "image_3_2",
                                  "image_3_3", "image_4_1", "image_4_3", "image_5_1"])
def test_exceptional_set(specialized, name):
    f, its = specialized
    r = verify_exceptional_set(builtin_chart_table(), name, f, maps.forward_factor(),
                               iterates=its, values=VALUES)
    assert r.ok, r.failures
    assert r.dimension == r.expected_dimension


def test_dimension_pattern():
    table = builtin_chart_table()
    for i in range(1, 5):
        assert [table.sets[f"image_{i}_{j}"].dimension for j in (1, 2, 3)] == [1, 1, 2]


def test_image_4_2_printed_equation_fails(specialized):
    f, its = specialized
    r = verify_exceptional_set(builtin_chart_table(), "image_4_2", f, maps.forward_factor(),
                               iterates=its, values=VALUES)
    assert len(r.failures) == 1 and "not 0" in r.failures[0]
    assert r.dimension == r.expected_dimension
    assert r.alternatives and all(r.alternatives.values())


def test_transform(specialized):
    res = verify_transform(builtin_chart_table(), maps.space_map(), values=VALUES)
    assert res["ok"] and res["distinct_from_source"]


def test_chart_undefined_at_sink():
    chart = builtin_chart_table().charts["chart_4_1"]
    with pytest.raises(ChartUndefined):
        apply_chart(chart, maps.cone_vertex())


def test_first_chart_at_affine_point():
    names = ("y0", "z0", "t0")
    y, z, t = (Poly.var(v, names) for v in names)
    pt = ProjPoint([Poly.const(1, names), y, z, t], names)
    chart = builtin_chart_table().charts["chart_1_1"]
    got = apply_chart(chart, pt)
    # u = z/y, v = t/y, w = t/x = t
    for (n, d), (wn, wd) in zip(got, [(z, y), (t, y), (t, Poly.const(1, names))]):
        assert (n * wd.extend(n.variables) - wn.extend(n.variables) * d).is_zero()


@pytest.mark.parametrize("text", [
    "[chart_x]\nsource = nowhere\nu = x\nv = y\nw = z\n[image_x]\nchart = chart_x\n"
    "step = 1\ndimension = 1\n",
    "[something]\nfoo = 1\n",
    "[chart_x]\nsource = projective\nu = x/q\nv = y\nw = z\n",
    "not an ini file",
])
def test_table_errors(text):
    with pytest.raises(ChartTableError):
        load_chart_table(text)
