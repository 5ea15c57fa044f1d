import itertools
from fractions import Fraction
from pathlib import Path

import pytest

from lpac.format import parse_proof, parse_target
from lpac.genbench import ChainSpec, generate_chain

DATA = Path(__file__).parent / "data"


def load(name: str):
    path = DATA / name
    return parse_proof(path.read_text(), str(path))


def load_target(name: str):
    return parse_target((DATA / name).read_text())


def cube(variables):
    """Every 0/1 assignment to ``variables``."""
    variables = sorted(variables)
    for bits in itertools.product((0, 1), repeat=len(variables)):
        yield dict(zip(variables, bits))


def raw_value(terms, point) -> Fraction:
    """Evaluate a raw term list ``[(coeff, [var, ...]), ...]`` with plain
    arithmetic; repeated variables are multiplied out, not reduced."""
    total = Fraction(0)
    for c, mono in terms:
        v = Fraction(c)
        for x in mono:
            v *= point[x]
        total += v
    return total


@pytest.fixture
def data_dir():
    return DATA


def corpus():
    """(name, text) for every proof-like file the tests round-trip."""
    items = [(p.name, p.read_text()) for p in sorted(DATA.glob("*.proof"))]
    items += [(p.name, p.read_text()) for p in sorted(DATA.glob("*.target"))]
    for n in (1, 2, 3, 8):
        for flavor in ("flat", "pattern"):
            files = generate_chain(ChainSpec(n, 2 if n != 3 else 4, seed=n), flavor)
            items.append((f"chain{n}_{flavor}.proof", files.proof))
            items.append((f"chain{n}_{flavor}.axioms", files.axioms))
    return items


# acceptance criteria register here; the summary hook prints one line each
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k[0]), k)):
        ok, desc = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {desc}")
