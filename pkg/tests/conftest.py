import json
from fractions import Fraction
from itertools import product

import pytest

from gibmap.model import bundled, bundled_text

ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def chain():
    return bundled("chain")


@pytest.fixture(scope="session")
def dep():
    return bundled("dep")


@pytest.fixture(scope="session")
def vee():
    return bundled("vee")


@pytest.fixture(scope="session")
def tracks():
    return bundled("tracks")


def fraction_joint(raw):
    """Exact joint distribution from a raw network dict: {(val, val, ...): Fraction}.

    Written against the file format only, so it shares no code with the package.
    """
    rvars = raw["variables"]
    names = [rv["name"] for rv in rvars]
    rows = []
    for rv in rvars:
        table = {}
        for r in rv["cpt"]:
            key = tuple(r["given"][p] for p in rv.get("parents", []))
            table[key] = {k: Fraction(str(x)) for k, x in r["p"].items()}
        rows.append(table)
    out = {}
    for combo in product(*(rv["values"] for rv in rvars)):
        val = dict(zip(names, combo))
        p = Fraction(1)
        for rv, table in zip(rvars, rows):
            p *= table[tuple(val[q] for q in rv.get("parents", []))][val[rv["name"]]]
        out[combo] = p
    return names, out


def fraction_prob(raw, event):
    """P(event) with event = {name: set of values}."""
    names, joint = fraction_joint(raw)
    total = Fraction(0)
    for combo, p in joint.items():
        if all(combo[names.index(n)] in vals for n, vals in event.items()):
            total += p
    return total


@pytest.fixture(scope="session")
def raw():
    return lambda name: json.loads(bundled_text(name))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        ok, note = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {note}")
