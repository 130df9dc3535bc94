"""Ground-truth answerers used to verify the engine.

`brute_force_marginal` evaluates a query straight from the definition by
materializing the full product of the network's tables. It deliberately
shares none of the engine's machinery and none of the potential algebra
beyond the Potential container itself: alignment, evidence slicing and
summation are done with raw numpy here, so an algebra bug cannot hide by
appearing on both sides of a comparison.

`variable_elimination_marginal` is a conventional sum-product eliminator for
cross-checks at sizes the brute force cannot reach.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import tables
from .errors import StateSpaceTooLargeError
from .networks import PartialBayesNet, Query
from .tables import Potential, Variable

DEFAULT_CELL_CAP = 1 << 24


def _universe(net: PartialBayesNet, query: Query) -> tuple[Variable, ...]:
    """Every variable any table mentions, plus targets and observed variables,
    except grafted owners (their tables carry only the observed slice)."""
    sliced = {it.owner.id for it in net.items if it.zero_slice}
    seen: dict[int, Variable] = {}
    for it in net.items:
        for v in it.table.scope:
            seen[v.id] = v
    for v in query.targets:
        seen[v.id] = v
    for v, _ in query.evidence:
        if v.id not in sliced:
            seen[v.id] = v
    return tuple(sorted(seen.values(), key=lambda v: v.id))


def brute_force_marginal(net: PartialBayesNet, query: Query,
                         cell_cap: int = DEFAULT_CELL_CAP) -> Potential:
    """Materialize the full joint table, slice in the evidence, sum down to the
    targets plus the net's parameters. Refuses loudly past the cell cap."""
    ev = query.evidence_map
    for it in net.items:
        if it.zero_slice and ev.get(it.owner) != 0:
            raise ValueError(
                f"grafted node {it.owner.name!r} must be observed at its first state")

    scope = _universe(net, query)
    cells = 1
    for v in scope:
        cells *= v.card
    if cells > cell_cap:
        raise StateSpaceTooLargeError(
            f"joint table would need {cells} cells (cap {cell_cap})")

    pos = {v.id: i for i, v in enumerate(scope)}
    joint = np.ones(tuple(v.card for v in scope))
    for it in net.items:
        shape = [1] * len(scope)
        for v in it.table.scope:
            shape[pos[v.id]] = v.card
        joint = joint * it.table.values.reshape(shape)

    sliced = {it.owner.id for it in net.items if it.zero_slice}
    indexer = tuple(
        ev[v] if (v in ev and v.id not in sliced) else slice(None) for v in scope)
    observed_ids = {v.id for v in ev if v.id not in sliced}
    reduced_scope = tuple(v for v in scope if v.id not in observed_ids)
    reduced = joint[indexer]

    keep_ids = {v.id for v in query.targets} | {v.id for v in net.parameters}
    axes = tuple(i for i, v in enumerate(reduced_scope) if v.id not in keep_ids)
    final_scope = tuple(v for v in reduced_scope if v.id in keep_ids)
    return Potential(final_scope, reduced.sum(axis=axes) if axes else reduced)


def greedy_elimination_order(net: PartialBayesNet, query: Query) -> list[Variable]:
    """Min-degree ordering over the variables that have to be summed out."""
    ev_ids = {v.id for v in query.evidence_map}
    keep = {v.id for v in query.targets} | {v.id for v in net.parameters} | ev_ids
    cliques = [set(v.id for v in it.table.scope) - ev_ids for it in net.items]
    todo = {v.id: v for v in _universe(net, query) if v.id not in keep}
    order = []
    while todo:
        def degree(i):
            ns = set()
            for c in cliques:
                if i in ns or i in c:
                    ns |= c
            return len(ns)
        nxt = min(todo, key=lambda i: (degree(i), i))
        order.append(todo.pop(nxt))
        merged = set()
        rest = []
        for c in cliques:
            if nxt in c:
                merged |= c - {nxt}
            else:
                rest.append(c)
        rest.append(merged)
        cliques = rest
    return order


def variable_elimination_marginal(net: PartialBayesNet, query: Query,
                                  order: Sequence[Variable] | None = None) -> Potential:
    """Standard sum-product elimination; agrees with the brute force wherever
    both run. `order` must enumerate exactly the variables to sum out."""
    ev = query.evidence_map
    plain_ev = {v: s for v, s in ev.items()
                if not any(it.zero_slice and it.owner.id == v.id for it in net.items)}
    for it in net.items:
        if it.zero_slice and ev.get(it.owner) != 0:
            raise ValueError(
                f"grafted node {it.owner.name!r} must be observed at its first state")

    if order is None:
        order = greedy_elimination_order(net, query)
    keep_ids = {v.id for v in query.targets} | {v.id for v in net.parameters}
    expected = {v.id for v in _universe(net, query)} - keep_ids - {v.id for v in plain_ev}
    if {v.id for v in order} != expected:
        raise ValueError("order must be a permutation of the variables to eliminate")

    factors = []
    for it in net.items:
        t = it.table
        applicable = {v: s for v, s in plain_ev.items() if v.id in {u.id for u in t.scope}}
        factors.append(tables.restrict(t, applicable))
    for v in order:
        bucket = [f for f in factors if v.id in {u.id for u in f.scope}]
        rest = [f for f in factors if v.id not in {u.id for u in f.scope}]
        if not bucket:
            continue  # variable mentioned by no remaining factor: summing a constant axis it never had
        combined = tables.sum_out(tables.product(bucket), [v])
        factors = rest + [combined]
    out = tables.product(factors)
    out = tables.broadcast_over(out, list(query.targets) + list(net.parameters))
    return tables.marginalize_onto(out, [v for v in out.scope if v.id in keep_ids])
