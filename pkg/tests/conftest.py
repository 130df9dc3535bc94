"""Shared fixtures and generators for the test suites."""

from __future__ import annotations

import itertools
import random
from pathlib import Path

import numpy as np
import pytest

from ctprop.graphs import UGraph, is_complete, is_connected, is_separator
from ctprop.networks import Item, PartialBayesNet, Query
from ctprop.tables import Potential, Variable

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def demo8_text() -> str:
    return (DATA / "demo8.net").read_text()


@pytest.fixture(scope="session")
def demo8(demo8_text) -> PartialBayesNet:
    from ctprop.netformat import parse_net

    return parse_net(demo8_text)


def make_variable(i: int, card: int = 2, prefix: str = "x") -> Variable:
    return Variable(i, f"{prefix}{i}", tuple(f"s{k}" for k in range(card)))


def random_cpt(rng: random.Random, child: Variable, parents: list[Variable],
               low: float = 0.1) -> Item:
    """Strictly positive conditional rows that sum to one."""
    scope = sorted(parents + [child], key=lambda v: v.id)
    rows = 1
    for p in parents:
        rows *= p.card
    arr = np.array([[rng.uniform(low, 1.0) for _ in range(child.card)]
                    for _ in range(rows)])
    arr = arr / arr.sum(axis=1, keepdims=True)
    # reshape to (parents in id order) x child, then move the child axis home
    parent_order = [v for v in scope if v is not child]
    full = arr.reshape(tuple(v.card for v in parent_order) + (child.card,))
    full = np.moveaxis(full, -1, scope.index(child))
    return Item(owner=child, parents=tuple(parents), table=Potential(scope, full))


def random_net(rng: random.Random, n_min: int = 4, n_max: int = 10,
               cards=(2, 3), max_parents: int = 3,
               drop_roots: bool = False) -> PartialBayesNet:
    """Random DAG with random positive tables; optionally leave roots unspecified."""
    n = rng.randint(n_min, n_max)
    variables = [make_variable(i, rng.choice(cards)) for i in range(n)]
    items = []
    for i, v in enumerate(variables):
        k = rng.randint(0, min(i, max_parents))
        parents = rng.sample(variables[:i], k) if k else []
        items.append(random_cpt(rng, v, parents))
    if drop_roots:
        roots = [it for it in items if not it.parents]
        rng.shuffle(roots)
        for it in roots[: rng.randint(0, len(roots))]:
            if rng.random() < 0.5:
                items.remove(it)
    return PartialBayesNet(variables, items)


def connected_random_net(rng: random.Random, **kwargs) -> PartialBayesNet:
    """Resample until the moral graph is connected."""
    while True:
        net = random_net(rng, **kwargs)
        if len(net.variables) >= 2 and is_connected(net.moral_graph()):
            return net


def random_query(rng: random.Random, net: PartialBayesNet,
                 max_targets: int = 3, max_evidence: int = 3) -> Query:
    variables = list(net.variables)
    rng.shuffle(variables)
    n_t = rng.randint(0, min(max_targets, len(variables)))
    targets = variables[:n_t]
    rest = variables[n_t:]
    n_e = rng.randint(0, min(max_evidence, len(rest)))
    evidence = tuple((v, rng.randrange(v.card)) for v in rest[:n_e])
    return Query(tuple(targets), evidence)


def all_complete_separators(g: UGraph, max_size: int | None = None) -> list[frozenset[int]]:
    """Brute force: every complete vertex subset whose removal disconnects g."""
    vs = sorted(g.vertices)
    limit = len(vs) if max_size is None else max_size
    out = []
    for k in range(0, limit + 1):
        for combo in itertools.combinations(vs, k):
            s = frozenset(combo)
            if len(s) >= len(vs) - 1:
                continue
            if is_complete(g, s) and is_separator(g, s):
                out.append(s)
    return out


def all_minimal_complete_separators(g: UGraph) -> list[frozenset[int]]:
    """Complete separators with at least two full components (the standard
    minimality notion used throughout)."""
    from ctprop.graphs import full_components

    return [s for s in all_complete_separators(g) if len(full_components(g, s)) >= 2]


def enumerate_marginal(net: PartialBayesNet, query: Query) -> Potential:
    """Third-opinion referee: answer a query by looping over every joint
    assignment in pure Python. Only viable for very small nets."""
    ev = {v.id: s for v, s in query.evidence}
    sliced = {it.owner.id for it in net.items if it.zero_slice}
    for it in net.items:
        if it.zero_slice:
            assert ev.get(it.owner.id) == 0
    scope_vars: dict[int, Variable] = {}
    for it in net.items:
        for v in it.table.scope:
            scope_vars[v.id] = v
    for v in query.targets:
        scope_vars[v.id] = v
    for v, _ in query.evidence:
        if v.id not in sliced:
            scope_vars[v.id] = v
    universe = sorted(scope_vars.values(), key=lambda v: v.id)
    keep = sorted(
        {v.id for v in query.targets} | {v.id for v in net.parameters})
    keep_vars = [scope_vars[i] for i in keep]
    out = np.zeros(tuple(v.card for v in keep_vars))
    for states in itertools.product(*(range(v.card) for v in universe)):
        assignment = {v.id: s for v, s in zip(universe, states)}
        if any(assignment.get(i, ev[i]) != ev[i] for i in ev if i not in sliced):
            continue
        p = 1.0
        for it in net.items:
            p *= it.table.value_at(assignment)
        idx = tuple(assignment[i] for i in keep)
        out[idx] += p
    return Potential(keep_vars, out)


def assert_potentials_close(a: Potential, b: Potential, rtol: float, atol: float = 0.0):
    assert [v.id for v in a.scope] == [v.id for v in b.scope], \
        f"scopes differ: {[v.name for v in a.scope]} vs {[v.name for v in b.scope]}"
    np.testing.assert_allclose(a.values, b.values, rtol=rtol, atol=atol)
