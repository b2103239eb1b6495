"""Shared fixtures and hand-built instances used across the test modules."""

from __future__ import annotations

from typing import Tuple

import pytest

from aigrefac.core import Aig, Literal


def build_redundancy() -> Tuple[Aig, int, Literal, Literal]:
    """Classic removable-cover instance: f = (a AND b) OR (a AND NOT b).

    The PO computes plain ``a`` through three AND nodes; a refactor of the
    top node collapses all of them.  Returns (aig, root id, a, b).
    """
    aig = Aig()
    a = aig.add_pi()
    b = aig.add_pi()
    n1 = aig.add_and(a, b)
    n2 = aig.add_and(a, ~b)
    root = aig.add_and(~n1, ~n2)   # NOR of the two products
    aig.add_po(~root)              # PO = n1 OR n2 = a
    aig.levelize()
    return aig, root.node_id, a, b


def build_chain3() -> Tuple[Aig, int, int, Tuple[Literal, ...]]:
    """m2 = a AND b, m = m2 AND d, PO on m.  Returns (aig, m, m2, pis)."""
    aig = Aig()
    a = aig.add_pi()
    b = aig.add_pi()
    d = aig.add_pi()
    m2 = aig.add_and(a, b)
    m = aig.add_and(m2, d)
    aig.add_po(m)
    aig.levelize()
    return aig, m.node_id, m2.node_id, (a, b, d)


def build_single_and() -> Tuple[Aig, int]:
    aig = Aig()
    a = aig.add_pi()
    b = aig.add_pi()
    r = aig.add_and(a, b)
    aig.add_po(r)
    aig.levelize()
    return aig, r.node_id


@pytest.fixture
def redundancy_aig():
    return build_redundancy()


@pytest.fixture
def chain3_aig():
    return build_chain3()
