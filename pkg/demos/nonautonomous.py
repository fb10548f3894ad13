"""Letting the parameter a vary with the step leaves the degrees unchanged."""

from birmap import get_map, iterate_direct

for seed in range(3):
    tr = iterate_direct(get_map("nonautonomous"), 12, seed=seed)
    shown = {k: str(v) for k, v in tr.specialization.items() if k in ("alpha", "beta", "gamma")}
    print(shown, tr.degrees)
print("autonomous:", iterate_direct(get_map("phitilde"), 12).degrees)
