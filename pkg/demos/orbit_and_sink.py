"""Where the exceptional plane goes, and the point that absorbs it."""

from birmap import get_map, track_orbit, verify_fixed_sink
from birmap.maps import backward_factor, forward_factor

f, g = get_map("phitilde"), get_map("psitilde")
values = {"a": 3, "b": -2, "c": 5, "d": 7}
orb = track_orbit(forward_factor(), f, 5, values=values)
for i, p in enumerate(orb.constant_points(), 1):
    print(f"step {i}: {list(p)}")
print("absorbed at step", orb.absorbed_at)

mirror = track_orbit(backward_factor(), g, 5, values=values)
print("under the inverse:", [list(p) for p in mirror.constant_points()])

sink = verify_fixed_sink(f, 4)
print("images through the third chart:", sink.to_dict()["images"])
print("fixed sink confirmed:", sink.ok)
