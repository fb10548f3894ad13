"""Images of the exceptional plane seen in the blow-up charts."""

from birmap.verify import verify_blowups

rep = verify_blowups(mode="specialized", seed=0)
for c in rep.checks:
    print("PASS" if c.ok else "FAIL", c.name)
    for failure in c.details.get("failures", []):
        print("     ", failure)
    for eq, ok in c.details.get("alternatives", {}).items():
        print("      alternative reading", eq, "holds" if ok else "fails")
