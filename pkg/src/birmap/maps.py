"""Builtin maps, invariants and distinguished points."""

from __future__ import annotations

from typing import Callable

from .poly import Poly, VarSpec, parse, parse_rational, RationalFunction
from .iterate import MapSchedule
from .projmap import ProjPoint, RationalMap

PARAMS = ("a", "b", "c", "d")
PLANE = VarSpec(("X", "Z", "T"), PARAMS)
SPACE = VarSpec(("x", "y", "z", "t"), PARAMS)

# genericity conditions shared by both families
GUARDS = ("c", "d", "a*d - b*c + c^2")
GAUGE = {"c": 1, "d": 1}

_PLANE_COMPONENTS = (
    "-a*T^2 - (b*X + c*Z)*T - d*X*(X + Z)",
    "X*(c*T + d*X)",
    "T*(c*T + d*X)",
)

_SPACE_COMPONENTS = (
    "-a*t^2 - b*(x + y)*t - c*(x + y + z)*t - d*(x + y)*(2*x + 2*y + z)",
    "x*(c*t + d*(x + y))",
    "y*(c*t + d*(x + y))",
    "t*(c*t + d*(x + y))",
)

# the plane map's invariant, as numerator / denominator
PLANE_INVARIANT = (
    "a*(X + Z)*T^2 + b*T*X*Z + c*(X^2 + Z^2)*T + d*X*Z*(X + Z)",
    "T^3",
)

# cubic numerator of the space map's invariant pencil (the other member is t^3)
SPACE_PENCIL = (
    "a*t^2*(2*y + x + z) + b*t*(z + y)*(x + y) + c*t*((x + y)^2 + (y + z)^2)"
    " + d*(z + y)*(x + y)*(2*y + x + z)"
)

FORWARD_FACTOR = "c*t + d*(x + y)"
BACKWARD_FACTOR = "c*t + d*(z + y)"
CONE_VERTEX = (1, -1, 1, 0)


def _map(vs: VarSpec, comps, name: str, candidates=()) -> RationalMap:
    return RationalMap(vs, [parse(c, vs.all) for c in comps], name,
                       guards=[parse(g, vs.all) for g in GUARDS],
                       candidates=[parse(c, vs.all) for c in candidates],
                       gauge=GAUGE)


def plane_map() -> RationalMap:
    return _map(PLANE, _PLANE_COMPONENTS, "phi", candidates=["c*T + d*X"])


def space_map() -> RationalMap:
    return _map(SPACE, _SPACE_COMPONENTS, "phitilde", candidates=[FORWARD_FACTOR])


def reflection() -> RationalMap:
    """The involution swapping the first and third coordinates."""
    return RationalMap(SPACE, [parse(v, SPACE.all) for v in ("z", "y", "x", "t")],
                       "lambda")


def space_inverse() -> RationalMap:
    """Conjugate of the space map by the reflection; inverts it up to a factor."""
    swapped = []
    for c in _SPACE_COMPONENTS:
        swapped.append(c.replace("x", "#").replace("z", "x").replace("#", "z"))
    comps = [swapped[2], swapped[1], swapped[0], swapped[3]]
    return _map(SPACE, comps, "psitilde", candidates=[BACKWARD_FACTOR])


def forward_factor(variables=SPACE.all) -> Poly:
    return parse(FORWARD_FACTOR, variables)


def backward_factor(variables=SPACE.all) -> Poly:
    return parse(BACKWARD_FACTOR, variables)


def plane_invariant() -> RationalFunction:
    num, den = PLANE_INVARIANT
    return parse_rational(f"({num})/({den})", PLANE.all)


def space_pencil(variables=SPACE.all) -> tuple[Poly, Poly]:
    """The two cubics spanning the invariant pencil: (numerator, t^3)."""
    return parse(SPACE_PENCIL, variables), parse("t^3", variables)


def space_invariant() -> RationalFunction:
    return parse_rational(f"({SPACE_PENCIL})/(t^3)", SPACE.all)


def cone_vertex(variables=()) -> ProjPoint:
    return ProjPoint.constant(CONE_VERTEX, variables)


def nonautonomous(coefficients=(None, None, None)) -> MapSchedule:
    """The space map with ``a`` replaced by ``alpha + beta*n + gamma*(-1)^n`` at step n."""
    return MapSchedule.affine_parameter(space_map(), "a", coefficients)


BUILTIN: dict[str, Callable[[], RationalMap | MapSchedule]] = {
    "phi": plane_map,
    "phitilde": space_map,
    "psitilde": space_inverse,
    "lambda": reflection,
    "nonautonomous": nonautonomous,
}

DESCRIPTIONS = {
    "phi": "quadratic birational map of the plane with a rational invariant",
    "phitilde": "quadratic birational map of 3-space with an invariant cubic pencil",
    "psitilde": "inverse of phitilde up to a common factor (reflection conjugate)",
    "lambda": "linear involution swapping the first and third coordinates",
    "nonautonomous": "phitilde with a = alpha + beta*n + gamma*(-1)^n at step n",
}


def get_map(name: str) -> RationalMap | MapSchedule:
    try:
        return BUILTIN[name]()
    except KeyError:
        raise KeyError(f"unknown map {name!r}; known: {', '.join(sorted(BUILTIN))}") from None
