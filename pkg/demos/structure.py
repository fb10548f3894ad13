"""Factor bookkeeping of the iterates: the A/B/Gamma shape and its degrees."""

from birmap import build_ledger, get_map, iterate_pullback, ledger_degree_check

trace = iterate_pullback(get_map("phitilde"), 11)
led = build_ledger(trace)
print(" k  alpha  beta  d_A  d_B")
for k in range(1, 11):
    print(f"{k:2d} {led.alpha.get(k, '-'):>6} {led.beta.get(k, '-'):>5} "
          f"{led.dA.get(k, '-'):>4} {led.dB.get(k, '-'):>4}")
print("degree checks:", "ok" if ledger_degree_check(led).ok else ledger_degree_check(led).failures)
