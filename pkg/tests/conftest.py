import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bstrees import amalgam_core, bs23, hnn_core, tree_dynamics, words  # noqa: E402
from bstrees.permgroup import symmetric_group  # noqa: E402
from bstrees.words import Token  # noqa: E402


class Inst:
    """One group instance with its oracle and tree."""

    def __init__(self, name, fam, oracle, gens):
        self.name = name
        self.fam = fam
        self.oracle = oracle
        self.tree = tree_dynamics.Tree(oracle, [[g] for g in gens], name=name)
        self.family = oracle.family

    def nf(self, w):
        if isinstance(w, str):
            w = words.parse_word(w)
        return words.reduce(w, self.oracle)


def make_amalgam(n=3):
    fam = amalgam_core.Amalgam.from_groups(symmetric_group(n), symmetric_group(n))
    return Inst(f"amalgam-sym{n}", fam, amalgam_core.AmalgamOracle(fam),
                amalgam_core.generator_tokens(fam, 0))


def make_hnn(n=2):
    fam = hnn_core.Hnn.from_groups(symmetric_group(n), symmetric_group(n))
    return Inst(f"hnn-sym{n}", fam, hnn_core.HnnOracle(fam), hnn_core.generator_tokens(fam, 0))


def make_bs23():
    return Inst("bs23", None, bs23.oracle(), [Token("b"), Token("t")])


@pytest.fixture(scope="session")
def am3():
    return make_amalgam(3)


@pytest.fixture(scope="session")
def hnn2():
    return make_hnn(2)


@pytest.fixture(scope="session")
def hnn3():
    return make_hnn(3)


@pytest.fixture(scope="session")
def bs():
    return make_bs23()


# ---------------------------------------------------------------- acceptance summary

ACCEPTANCE: dict = {}


def record(criterion: int, ok: bool, detail: str = "", part: str = ""):
    """Store one criterion outcome; a criterion passes only if all its parts pass."""
    prev = ACCEPTANCE.get(criterion, (True, []))
    line = f"{part}: {detail}" if part else detail
    ACCEPTANCE[criterion] = (prev[0] and ok, prev[1] + [line])
    print(f"criterion {criterion}{' [' + part + ']' if part else ''}: {'PASS' if ok else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, lines = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}")
        for ln in lines:
            terminalreporter.write_line(f"    {ln}")
