"""Degree sequence of the space map, its generating function and growth."""

from birmap import fit, get_map, iterate_direct, iterate_pullback

f = get_map("phitilde")
direct = iterate_direct(f, 12, seed=0)
pull = iterate_pullback(f, 12, seed=0)
print("parameters:", {k: str(v) for k, v in direct.specialization.items()})
print("direct   :", direct.degrees)
print("pull-back:", pull.degrees)
print("removed factor exponents:", [s.removed_exponents for s in pull.steps[1:]])

res = fit(direct.degrees)
print("recurrence:", res.recurrence)
print("generating function:", res.gf.factored_text())
g = res.growth
print(f"growth: {g.kind} of degree {g.nu}, entropy {g.entropy_text}")
print("closed form:", g.closed_form.text())

plane = iterate_direct(get_map("phi"), 7)
print("plane map:", plane.degrees)
