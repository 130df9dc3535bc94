"""Query answering by recursive decomposition at complete separators.

A query on a network is answered without ever triangulating the moral graph:

* If the moral graph is disconnected, each component is answered on its own
  and the answers multiply.
* If the graph has separators still worth splitting at, the network is peeled
  into components arranged in a tree. Leaves are answered one at a time; each
  leaf's answer is grafted onto its tree neighbor as a pseudo conditional on a
  fresh observed auxiliary node, the leaf is removed, and the query is
  rewritten so its value is unchanged. The survivor is answered recursively.
* Otherwise the network is either answered by direct marginalization (when a
  single leaf sees every other node as a parent) or split at the parent set
  of an observed leaf, with the two halves answered recursively and combined
  by a product-and-sum over the unobserved separator variables.

Every separator used is checked to be complete in the moral graph of the
network being split — no fill edge is ever needed or added.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from . import tables
from .errors import InternalInvariantError, ZeroEvidenceError
from .graphs import (
    Decomposition,
    UGraph,
    clique_separator_decomposition,
    connected_components,
    nontrivial_separators,
    redundant_peels,
)
from .networks import (
    Item,
    PartialBayesNet,
    Query,
    QuerySplit,
    append_answer,
    fresh_auxiliary,
    induced_decomposition,
    is_simple,
    make_query,
    marginal_potential,
    observed_leaves,
    split_query,
    union_all,
)
from .tables import Potential, Variable

logger = logging.getLogger(__name__)


@dataclass
class RunStats:
    """Counters accumulated over one query run (including recursion)."""

    separator_checks: int = 0
    decompositions: int = 0
    direct_marginalizations: int = 0
    fallback_marginalizations: int = 0


@dataclass
class RunReport:
    """Trace lines and counters for one query run."""

    trace: list[str] = field(default_factory=list)
    stats: RunStats = field(default_factory=RunStats)
    warnings: list[str] = field(default_factory=list)

    def text(self) -> str:
        return "\n".join(self.trace)


@dataclass(frozen=True)
class LeafChoice:
    """A pickable tree leaf and the footprint of its induced answer."""

    index: int
    net: PartialBayesNet
    separator: tuple[Variable, ...]
    neighbor: int
    answer_scope_size: int


@dataclass(frozen=True)
class PickStrategy:
    """Pluggable choices: which tree leaf to answer next and which observed
    leaf to split at. Both receive deterministic candidate lists."""

    name: str
    pick_leaf: Callable[[Sequence[LeafChoice]], int]
    pick_observed_leaf: Callable[[PartialBayesNet, Sequence[Variable]], Variable]


def _smallest_answer(choices: Sequence[LeafChoice]) -> int:
    return min(choices, key=lambda c: (c.answer_scope_size, c.index)).index


def _first_leaf(choices: Sequence[LeafChoice]) -> int:
    return min(c.index for c in choices)


def _largest_leaf(choices: Sequence[LeafChoice]) -> int:
    return min(choices, key=lambda c: (-len(c.net.variables), c.index)).index


def _cheapest_split(net: PartialBayesNet, cands: Sequence[Variable]) -> Variable:
    def cost(v: Variable) -> tuple[int, int]:
        size = 1
        for p in net.dag.parents(v.id):
            size *= net.variable(p).card
        return size, v.id
    return min(cands, key=cost)


def _first_split(net: PartialBayesNet, cands: Sequence[Variable]) -> Variable:
    return min(cands, key=lambda v: v.id)


DEFAULT_STRATEGY = PickStrategy("default", _smallest_answer, _cheapest_split)
FIRST_LEAF_STRATEGY = PickStrategy("first-leaf", _first_leaf, _first_split)
LARGEST_LEAF_STRATEGY = PickStrategy("largest-leaf", _largest_leaf, _cheapest_split)


def random_strategy(seed: int) -> PickStrategy:
    rng = random.Random(seed)

    def pick_leaf(choices: Sequence[LeafChoice]) -> int:
        return rng.choice(sorted(c.index for c in choices))

    def pick_observed(net: PartialBayesNet, cands: Sequence[Variable]) -> Variable:
        return rng.choice(sorted(cands, key=lambda v: v.id))

    return PickStrategy(f"random-{seed}", pick_leaf, pick_observed)


STRATEGIES: dict[str, PickStrategy] = {
    s.name: s for s in (DEFAULT_STRATEGY, FIRST_LEAF_STRATEGY, LARGEST_LEAF_STRATEGY)
}


@dataclass
class ComponentTree:
    """Components of a network joined at the separators they share."""

    nodes: list[PartialBayesNet]
    links: list[tuple[int, int, tuple[Variable, ...]]]

    def neighbors(self, i: int) -> list[tuple[int, tuple[Variable, ...]]]:
        out = []
        for a, b, sep in self.links:
            if a == i:
                out.append((b, sep))
            elif b == i:
                out.append((a, sep))
        return out


def component_name(net: PartialBayesNet) -> str:
    return "{" + ",".join(v.name for v in net.variables) + "}"


def build_component_tree(net: PartialBayesNet, query: Query) -> ComponentTree:
    """Peel the net into components at its useful separators and arrange them
    into a tree; components split only by redundant separators stay merged.

    Node order is deterministic: walk the tree starting from the component
    whose sorted variable-id vector is lexicographically smallest, always
    extending with the smallest adjacent component.
    """
    g = net.moral_graph()
    obs = frozenset(v.id for v in observed_leaves(net, query))
    csd = clique_separator_decomposition(g)
    redundant = redundant_peels(g, csd, obs)
    if all(redundant) or not csd.peels:
        raise ValueError("network has no useful separators; nothing to arrange")

    # Peel the net along the same splits the graph decomposition made. The
    # graph context for each split is the original moral graph restricted to
    # the not-yet-peeled vertices: re-moralizing the shrinking net could lose
    # marriage edges that the atom structure relies on.
    remaining_ids = frozenset(v.id for v in net.variables)
    remaining_net = net
    atom_nets: list[PartialBayesNet] = []
    for peel in csd.peels:
        sub = g.subgraph(remaining_ids)
        d = Decomposition.checked(
            sub, peel.separator,
            (remaining_ids - peel.atom) | peel.separator, peel.atom)
        remaining_net, atom_net = induced_decomposition(remaining_net, d)
        atom_nets.append(atom_net)
        remaining_ids = (remaining_ids - peel.atom) | peel.separator
    atom_nets.append(remaining_net)

    # Each peeled atom attaches, via its separator, to the first later atom
    # that wholly contains that separator (the residual is last).
    atoms = csd.atoms
    full_edges: list[tuple[int, int, frozenset[int]]] = []
    for i, peel in enumerate(csd.peels):
        target = next((j for j in range(i + 1, len(atoms)) if peel.separator <= atoms[j]), None)
        if target is None:
            raise InternalInvariantError(
                f"separator {sorted(peel.separator)} not contained in any later component")
        full_edges.append((i, target, peel.separator))

    # Contract edges labeled by redundant separators.
    group = list(range(len(atoms)))

    def find(i: int) -> int:
        while group[i] != i:
            group[i] = group[group[i]]
            i = group[i]
        return i

    for (i, j, sep), is_redundant in zip(full_edges, redundant):
        if is_redundant:
            group[find(i)] = find(j)

    members: dict[int, list[int]] = {}
    for i in range(len(atoms)):
        members.setdefault(find(i), []).append(i)
    group_nets = {root: union_all([atom_nets[i] for i in idxs])
                  for root, idxs in members.items()}
    group_links: list[tuple[int, int, frozenset[int]]] = []
    for (i, j, sep), is_redundant in zip(full_edges, redundant):
        if not is_redundant:
            a, b = find(i), find(j)
            if a == b:
                raise InternalInvariantError("separator links a component to itself")
            group_links.append((a, b, sep))

    # Deterministic walk order over the merged tree.
    def key(root: int) -> tuple[int, ...]:
        return tuple(v.id for v in group_nets[root].variables)

    roots = sorted(group_nets, key=key)
    placed = [roots[0]]
    placed_set = {roots[0]}
    while len(placed) < len(roots):
        frontier = [r for r in roots if r not in placed_set and any(
            (a == r and b in placed_set) or (b == r and a in placed_set)
            for a, b, _ in group_links)]
        if not frontier:
            raise InternalInvariantError("component tree is not connected")
        nxt = min(frontier, key=key)
        placed.append(nxt)
        placed_set.add(nxt)
    order = {root: i for i, root in enumerate(placed)}

    nodes = [group_nets[root] for root in placed]
    links = []
    for a, b, sep in group_links:
        i, j = sorted((order[a], order[b]))
        sep_vars = net.restrict_to(sep)
        links.append((i, j, sep_vars))
    links.sort(key=lambda l: (l[0], l[1]))
    if len(links) != len(nodes) - 1:
        raise InternalInvariantError("component links do not form a tree")
    return ComponentTree(nodes, links)


class _Ctx:
    """Per-run bookkeeping: strategy, shared report, and a namespace for the
    auxiliary variables this level of the recursion creates."""

    def __init__(self, strategy: PickStrategy, report: RunReport, depth: int,
                 used_names: set[str], next_id: int):
        self.strategy = strategy
        self.report = report
        self.depth = depth
        self._used_names = used_names
        self._next_id = next_id
        self._serial = 1

    @classmethod
    def for_net(cls, net: PartialBayesNet, strategy: PickStrategy,
                report: RunReport, depth: int = 0) -> "_Ctx":
        names = {v.name for v in net.variables} | {v.name for v in net.parameters}
        ids = [v.id for v in net.variables] + [v.id for v in net.parameters]
        return cls(strategy, report, depth, names, max(ids, default=-1) + 1)

    def child(self, net: PartialBayesNet) -> "_Ctx":
        return _Ctx.for_net(net, self.strategy, self.report, self.depth + 1)

    def fresh_aux(self) -> Variable:
        v = fresh_auxiliary(self._used_names, self._next_id, self._serial)
        self._serial = int(v.name[1:]) + 1
        self._next_id += 1
        self._used_names.add(v.name)
        return v

    def trace(self, line: str) -> None:
        self.report.trace.append("  " * self.depth + line)

    def warn(self, message: str) -> None:
        logger.warning(message)
        self.report.warnings.append(message)


def _checked_split(g: UGraph, separator: Iterable[int], v1: Iterable[int],
                   v2: Iterable[int], ctx: _Ctx) -> Decomposition:
    """All engine decompositions pass through here: the separator must be
    complete in the moral graph of the net being split (the no-fill-edge
    guarantee) and must actually separate the two sides."""
    d = Decomposition.checked(g, separator, v1, v2)
    ctx.report.stats.separator_checks += 1
    ctx.report.stats.decompositions += 1
    return d


def _query_label(query: Query, params: Sequence[Variable]) -> str:
    t = ",".join(v.name for v in query.targets)
    e = ",".join(f"{v.name}={v.states[s]}" for v, s in query.evidence)
    w = ",".join(v.name for v in params)
    return f"{t};{e};{w}"


def _finish(net: PartialBayesNet, query: Query, ans: Potential) -> Potential:
    """Answers always cover exactly the targets plus the net's parameters."""
    ans = tables.broadcast_over(ans, list(query.targets) + list(net.parameters))
    want = sorted({v.id for v in query.targets} | {v.id for v in net.parameters})
    got = [v.id for v in ans.scope]
    if got != want:
        raise InternalInvariantError(f"answer scope {got} != expected {want}")
    return ans


def _main(net: PartialBayesNet, query: Query, ctx: _Ctx) -> Potential:
    g = net.moral_graph()
    comps = connected_components(g)
    if len(comps) > 1:
        return _finish(net, query, _product_over_components(net, query, comps, ctx))
    obs = observed_leaves(net, query)
    seps = nontrivial_separators(g, [v.id for v in obs], net.dag.parent_map())
    if seps:
        ans = _serial(net, query, ctx)
    else:
        ans = _parallel(net, query, ctx)
    return _finish(net, query, ans)


def _product_over_components(net: PartialBayesNet, query: Query,
                             comps: list[frozenset[int]], ctx: _Ctx) -> Potential:
    """Disconnected moral graph: the joint factorizes across components, so
    answer each induced sub-net independently and multiply."""
    out = Potential.scalar(1.0)
    ev = query.evidence_map
    for comp in comps:
        sub_items = tuple(it for it in net.items if it.net_scope() <= comp)
        if sum(len(it.net_scope() & comp) > 0 for it in net.items) != len(sub_items):
            raise InternalInvariantError("an item straddles moral components")
        sub = PartialBayesNet(net.restrict_to(comp), sub_items)
        sub_q = Query(tuple(v for v in query.targets if v.id in comp),
                      tuple((v, s) for v, s in query.evidence if v.id in comp))
        out = tables.multiply(out, _main(sub, sub_q, ctx.child(sub)))
    return out


def _serial(net: PartialBayesNet, query: Query, ctx: _Ctx) -> Potential:
    """Answer tree leaves one at a time, grafting each answer onto the leaf's
    neighbor and rewriting the query so its value never changes."""
    tree = build_component_tree(net, query)
    live: dict[int, PartialBayesNet] = dict(enumerate(tree.nodes))
    q = query
    step = 0
    while len(live) > 1:
        step += 1
        choices = _leaf_choices(tree, live, q)
        pick = ctx.strategy.pick_leaf(choices)
        chosen = next(c for c in choices if c.index == pick)
        leaf_net = live[pick]
        sep_ids = frozenset(v.id for v in chosen.separator)
        rest_nets = [live[i] for i in sorted(live) if i != pick]
        current = union_all([leaf_net] + rest_nets)
        rest_ids = frozenset(v.id for n in rest_nets for v in n.variables)
        leaf_ids = frozenset(v.id for v in leaf_net.variables)

        d = _checked_split(current.moral_graph(), sep_ids,
                           rest_ids | sep_ids, leaf_ids, ctx)
        split, _, q_leaf = split_query(q, d, current)
        ctx.trace(f"STEP {step}: pick={component_name(leaf_net)} "
                  f"query={_query_label(q_leaf, leaf_net.parameters)} "
                  f"append-to={component_name(live[chosen.neighbor])}")

        ans = _main(leaf_net, q_leaf, ctx.child(leaf_net))
        grafted = tables.extend_with_indicator(ans, split.y_sep_map)
        aux = ctx.fresh_aux()
        live[chosen.neighbor] = append_answer(
            live[chosen.neighbor], split.separator, grafted, aux)
        del live[pick]
        q = Query(split.x1 + split.x_sep, split.y_sep + split.y1 + ((aux, 0),))

    (last_net,) = live.values()
    ctx.trace(f"FINAL: solve={component_name(last_net)} "
              f"query={_query_label(q, last_net.parameters)}")
    return _main(last_net, q, ctx.child(last_net))


def _leaf_choices(tree: ComponentTree, live: Mapping[int, PartialBayesNet],
                  q: Query) -> list[LeafChoice]:
    observed = {v.id for v in q.evidence_map}
    target_ids = {v.id for v in q.targets}
    choices = []
    for i in sorted(live):
        nbrs = [(j, sep) for j, sep in tree.neighbors(i) if j in live]
        if len(nbrs) != 1:
            continue
        neighbor, sep = nbrs[0]
        leaf = live[i]
        sep_ids = {v.id for v in sep}
        leaf_ids = {v.id for v in leaf.variables}
        size = 1
        for v in leaf.variables:
            if v.id in target_ids and v.id not in sep_ids:
                size *= v.card
        for v in sep:
            if v.id not in observed:
                size *= v.card
        for w in leaf.parameters:
            size *= w.card
        choices.append(LeafChoice(i, leaf, sep, neighbor, size))
    if not choices:
        raise InternalInvariantError("tree with more than one node has no leaf")
    return choices


def _parallel(net: PartialBayesNet, query: Query, ctx: _Ctx) -> Potential:
    """No separator is worth a tree: answer directly if one leaf sees all
    other nodes as parents, else split at an observed leaf's parent set and
    combine the two halves. The two recursive calls are independent pure
    computations and could run concurrently; here they run in sequence."""
    if is_simple(net):
        ctx.report.stats.direct_marginalizations += 1
        return marginal_potential(net, query)
    obs = observed_leaves(net, query)
    if not obs:
        # Unreachable if every non-simple net without useful separators has an
        # observed leaf; fall back rather than guess.
        ctx.warn(f"no observed leaf in {component_name(net)}; "
                 "answering by direct marginalization")
        ctx.report.stats.fallback_marginalizations += 1
        return marginal_potential(net, query)
    leaf = ctx.strategy.pick_observed_leaf(net, tuple(obs))
    sep_ids = frozenset(net.dag.parents(leaf.id))
    g = net.moral_graph()
    d = _checked_split(g, sep_ids, sep_ids | {leaf.id},
                       frozenset(v.id for v in net.variables) - {leaf.id}, ctx)
    n1, n2 = induced_decomposition(net, d)
    split, q1, q2 = split_query(query, d, net)
    a1 = _main(n1, q1, ctx.child(n1))
    a2 = _main(n2, q2, ctx.child(n2))
    return combine(a1, a2, split)


def combine(a1: Potential, a2: Potential, split: QuerySplit) -> Potential:
    """Multiply the two subquery answers and sum out the separator variables
    that are neither targets nor observed."""
    for a in (a1, a2):
        have = {v.id for v in a.scope}
        if not {v.id for v in split.free_sep} <= have:
            raise InternalInvariantError("answer is missing separator variables")
    target_ids = {v.id for v in split.x_sep}
    drop = [v for v in split.free_sep if v.id not in target_ids]
    return tables.sum_out(tables.multiply(a1, a2), drop)


def main_query(net: PartialBayesNet, query: Query,
               strategy: PickStrategy = DEFAULT_STRATEGY,
               report: RunReport | None = None) -> Potential:
    """Answer a query; the result covers the targets plus the net's parameters."""
    ctx = _Ctx.for_net(net, strategy, report if report is not None else RunReport(), 0)
    return _main(net, query, ctx)


def serial_reduction(net: PartialBayesNet, query: Query,
                     strategy: PickStrategy = DEFAULT_STRATEGY,
                     report: RunReport | None = None) -> Potential:
    """Tree-based reduction; requires the net to have useful separators."""
    ctx = _Ctx.for_net(net, strategy, report if report is not None else RunReport(), 0)
    return _finish(net, query, _serial(net, query, ctx))


def parallel_reduction(net: PartialBayesNet, query: Query,
                       strategy: PickStrategy = DEFAULT_STRATEGY,
                       report: RunReport | None = None) -> Potential:
    """Direct or split-at-observed-leaf path for nets without useful separators."""
    ctx = _Ctx.for_net(net, strategy, report if report is not None else RunReport(), 0)
    return _finish(net, query, _parallel(net, query, ctx))


def posterior(net: PartialBayesNet, targets: Iterable[Variable | str],
              evidence: Mapping[Variable | str, int | str] | None = None,
              strategy: PickStrategy = DEFAULT_STRATEGY,
              report: RunReport | None = None) -> Potential:
    """Normalized conditional distribution of the targets given the evidence.
    Only meaningful on fully specified networks."""
    if not net.is_bayesian():
        raise ValueError("posterior requires a fully specified network "
                         "(no unspecified roots, no parameters)")
    q = make_query(net, tuple(targets), dict(evidence or {}))
    ans = main_query(net, q, strategy=strategy, report=report)
    try:
        return tables.normalize(ans)
    except ZeroEvidenceError:
        shown = {v.name: v.states[s] for v, s in q.evidence}
        raise ZeroEvidenceError(
            f"evidence {shown} has probability zero under the model", shown) from None
