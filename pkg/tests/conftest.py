import sympy
from hypothesis import strategies as st

from birmap.poly import Poly

VARS = ("x", "y", "z")


def to_sympy(p: Poly):
    syms = sympy.symbols(p.variables) if p.variables else ()
    expr = sympy.Integer(0)
    for mono, c in p.terms().items():
        term = sympy.Integer(c)
        for s, e in zip(syms, mono):
            term *= s ** e
        expr += term
    return sympy.expand(expr)


def from_sympy(expr, variables) -> Poly:
    sp = sympy.Poly(sympy.expand(expr), *sympy.symbols(variables))
    return Poly.from_dict({tuple(m): int(c) for m, c in sp.terms()}, variables)


@st.composite
def polys(draw, variables=VARS, max_terms=5, max_deg=3, bound=20):
    terms = draw(st.dictionaries(
        st.tuples(*[st.integers(0, max_deg)] * len(variables)),
        st.integers(-bound, bound), max_size=max_terms))
    return Poly.from_dict(terms, variables)


@st.composite
def homogeneous_polys(draw, degree, variables=VARS, max_terms=4, bound=20):
    monos = [m for m in _monomials(len(variables), degree)]
    chosen = draw(st.lists(st.sampled_from(monos), min_size=1, max_size=max_terms, unique=True))
    coeffs = draw(st.lists(st.integers(1, bound), min_size=len(chosen), max_size=len(chosen)))
    return Poly.from_dict(dict(zip(chosen, coeffs)), variables)


def _monomials(n, d):
    if n == 1:
        yield (d,)
        return
    for i in range(d + 1):
        for rest in _monomials(n - 1, d - i):
            yield (i,) + rest


# acceptance criteria report one line each at the end of the run
CRITERIA: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, note: str = ""):
    prev = CRITERIA.get(criterion)
    if prev is not None:
        ok = ok and prev[0]
        note = "; ".join(x for x in (prev[1], note) if x)
    CRITERIA[criterion] = (ok, note)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, note = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}"
                                    + (f"  ({note})" if note else ""))
