"""Invariant pencil, the cone through the sink, and lines carried to lines."""

from birmap import get_map
from birmap.geom import (RationalInvariant, check_cone, check_invariance, check_line_transport,
                         check_pencil_invariance)
from birmap.maps import cone_vertex, plane_invariant, space_invariant, space_pencil
from birmap.projmap import ProjPoint
from birmap.poly import Poly

print(check_invariance(get_map("phi"), RationalInvariant.from_rational(plane_invariant())).to_dict())
print(check_invariance(get_map("phitilde"),
                       RationalInvariant.from_rational(space_invariant())).to_dict())
print(check_pencil_invariance(get_map("phitilde"), RationalInvariant(*space_pencil())).to_dict())

names = ("m1", "m2", "m3", "m4")
M = ProjPoint([Poly.var(v, names) for v in names], names)
print(check_cone(RationalInvariant(*space_pencil()), M, cone_vertex(), ("x", "y", "z", "t"))
      .to_dict())
print(check_line_transport(get_map("phitilde"), M, cone_vertex()).to_dict())
