"""Directed networks of conditional probability tables, possibly half-specified.

A PartialBayesNet is a Bayesian network in which some roots may lack priors
(those roots are "unspecified") and in which tables may mention parameter
variables that are not nodes of the network at all. A fully specified net is
the special case with no unspecified roots and no parameters; its joint
potential is then a probability distribution.

The arc set is derived from the tables: variable c has an incoming arc from p
exactly when c's own table lists p as a parent. Variables with no table are
therefore always roots — the unspecified ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from . import tables
from .errors import EvidenceError, ModelInconsistencyError
from .graphs import Decomposition, DiGraph, UGraph, moralize
from .tables import KIND_AUXILIARY, KIND_NET, Potential, Variable


@dataclass(frozen=True)
class Item:
    """One conditional table: `owner` given `parents` (plus any parameters).

    A grafted answer is stored as a `zero_slice` item: the table holds only
    the owner-equals-first-state slice of the pseudo conditional, so the owner
    itself does not appear in the table scope. Such an owner can only ever be
    queried with evidence fixing it to its first state. Slice tables may
    exceed 1; "rows sum to 1" is a property of genuine conditionals only.
    """

    owner: Variable
    parents: tuple[Variable, ...]
    table: Potential
    zero_slice: bool = False

    def __post_init__(self):
        parents = tuple(sorted(self.parents, key=lambda v: v.id))
        object.__setattr__(self, "parents", parents)
        scope_ids = {v.id for v in self.table.scope}
        missing = [p.name for p in parents if p.id not in scope_ids]
        if missing:
            raise ValueError(f"table for {self.owner.name!r} is missing parents {missing}")
        if self.zero_slice:
            if self.owner.id in scope_ids:
                raise ValueError("a zero-slice table must not include its owner")
        elif self.owner.id not in scope_ids:
            raise ValueError(f"table for {self.owner.name!r} does not include it")

    @property
    def parameters(self) -> tuple[Variable, ...]:
        skip = {p.id for p in self.parents} | {self.owner.id}
        return tuple(v for v in self.table.scope if v.id not in skip)

    def net_scope(self) -> frozenset[int]:
        """Ids of the network variables this item mentions (owner and parents)."""
        return frozenset(p.id for p in self.parents) | {self.owner.id}


class PartialBayesNet:
    """Immutable network: variables, derived DAG, and one table per specified node."""

    __slots__ = ("variables", "items", "dag", "_by_id", "_item_by_owner",
                 "unspecified_roots", "parameters")

    def __init__(self, variables: Iterable[Variable], items: Iterable[Item]):
        variables = tuple(sorted(variables, key=lambda v: v.id))
        items = tuple(sorted(items, key=lambda it: it.owner.id))
        by_id: dict[int, Variable] = {}
        for v in variables:
            if v.id in by_id:
                raise ModelInconsistencyError(f"duplicate variable id {v.id}")
            by_id[v.id] = v
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise ModelInconsistencyError("duplicate variable name in network")
        owners = [it.owner.id for it in items]
        if len(set(owners)) != len(owners):
            raise ModelInconsistencyError("a variable has more than one conditional table")
        for it in items:
            for v in (it.owner, *it.parents):
                known = by_id.get(v.id)
                if known is None:
                    raise ModelInconsistencyError(
                        f"table for {it.owner.name!r} mentions unknown variable {v.name!r}")
                if known != v:
                    raise ModelInconsistencyError(f"variable id {v.id} used inconsistently")
        params: dict[int, Variable] = {}
        for it in items:
            for w in it.parameters:
                if w.id in by_id:
                    raise ModelInconsistencyError(
                        f"{w.name!r} is both a network variable and a parameter")
                seen = params.get(w.id)
                if seen is not None and seen != w:
                    raise ModelInconsistencyError(f"parameter id {w.id} used inconsistently")
                params[w.id] = w
        arcs = {(p.id, it.owner.id) for it in items for p in it.parents}
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "dag", DiGraph([v.id for v in variables], arcs))
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_item_by_owner", {it.owner.id: it for it in items})
        object.__setattr__(
            self, "unspecified_roots",
            tuple(v for v in variables if v.id not in self._item_by_owner))
        object.__setattr__(
            self, "parameters",
            tuple(sorted(params.values(), key=lambda v: v.id)))

    def __setattr__(self, *_):
        raise AttributeError("PartialBayesNet is immutable")

    def variable(self, id_or_name: int | str) -> Variable:
        if isinstance(id_or_name, str):
            for v in self.variables:
                if v.name == id_or_name:
                    return v
            raise EvidenceError(f"no variable named {id_or_name!r}")
        v = self._by_id.get(id_or_name)
        if v is None:
            raise EvidenceError(f"no variable with id {id_or_name}")
        return v

    def item_for(self, v: Variable) -> Item | None:
        return self._item_by_owner.get(v.id)

    def moral_graph(self) -> UGraph:
        return moralize(self.dag)

    def leaf_variables(self) -> tuple[Variable, ...]:
        return tuple(self._by_id[i] for i in sorted(self.dag.leaves()))

    def restrict_to(self, ids: Iterable[int]) -> tuple[Variable, ...]:
        ids = set(ids)
        return tuple(v for v in self.variables if v.id in ids)

    def is_bayesian(self) -> bool:
        return not self.unspecified_roots and not self.parameters

    def __repr__(self):
        names = ",".join(v.name for v in self.variables)
        return f"PartialBayesNet({{{names}}}, {len(self.items)} tables)"


@dataclass(frozen=True)
class Query:
    """Targets plus evidence; parameters of the net ride along in every answer."""

    targets: tuple[Variable, ...]
    evidence: tuple[tuple[Variable, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "targets",
                           tuple(sorted(set(self.targets), key=lambda v: v.id)))
        object.__setattr__(self, "evidence",
                           tuple(sorted(self.evidence, key=lambda e: e[0].id)))
        tset = {v.id for v in self.targets}
        for v, _ in self.evidence:
            if v.id in tset:
                raise EvidenceError(f"{v.name!r} is both a target and observed")

    @property
    def evidence_map(self) -> dict[Variable, int]:
        return dict(self.evidence)

    def describe(self) -> str:
        t = ",".join(v.name for v in self.targets)
        e = ",".join(f"{v.name}={v.states[s]}" for v, s in self.evidence)
        return f"{t};{e}"


def make_query(net: PartialBayesNet, targets: Iterable[Variable | str],
               evidence: Mapping[Variable | str, int | str] | None = None) -> Query:
    """Resolve names/labels against the net and validate against its variables."""
    tvars = tuple(net.variable(t) if isinstance(t, str) else t for t in targets)
    for v in tvars:
        if net.variable(v.id) != v:
            raise EvidenceError(f"target {v.name!r} is not a variable of this net")
    ev = []
    for k, s in (evidence or {}).items():
        v = net.variable(k) if isinstance(k, str) else k
        if net.variable(v.id) != v:
            raise EvidenceError(f"observed {v.name!r} is not a variable of this net")
        ev.append((v, v.state_index(s)))
    return Query(tvars, tuple(ev))


def joint_potential(net: PartialBayesNet) -> Potential:
    """Product of all tables; the scope is the union of the table scopes."""
    if any(it.zero_slice for it in net.items):
        raise ValueError("net contains grafted slice tables; use marginal_potential")
    return tables.product(it.table for it in net.items)


def marginal_potential(net: PartialBayesNet, query: Query) -> Potential:
    """Definitional answer: multiply every table, apply the evidence, sum down
    to the targets. Parameters stay in the answer's scope. Grafted slice
    tables require their owner to be observed at its first state."""
    ev = query.evidence_map
    factors = []
    for it in net.items:
        if it.zero_slice:
            if ev.get(it.owner) != 0:
                raise ValueError(
                    f"grafted node {it.owner.name!r} must be observed at "
                    f"{it.owner.states[0]!r}")
        factors.append(it.table)
    pot = tables.product(factors)
    # Targets or observed variables with no table mention still need an axis.
    slice_owners = {it.owner.id for it in net.items if it.zero_slice}
    want = list(query.targets) + [v for v in ev if v.id not in slice_owners]
    pot = tables.broadcast_over(pot, want)
    pot = tables.restrict(pot, {v: s for v, s in ev.items() if v.id not in slice_owners})
    keep = set(query.targets) | set(net.parameters)
    return tables.marginalize_onto(pot, keep)


def induced_decomposition(net: PartialBayesNet, d: Decomposition) -> tuple[PartialBayesNet, PartialBayesNet]:
    """Split the net along a decomposition of its moral graph.

    The first part receives every item that mentions a variable private to
    side one; the second part receives the rest, including items whose scope
    lies entirely inside the separator.
    """
    private1 = d.v1 - d.separator
    items1 = tuple(it for it in net.items if it.net_scope() & private1)
    items2 = tuple(it for it in net.items if not (it.net_scope() & private1))
    n1 = PartialBayesNet(net.restrict_to(d.v1), items1)
    n2 = PartialBayesNet(net.restrict_to(d.v2), items2)
    return n1, n2


def union(a: PartialBayesNet, b: PartialBayesNet) -> PartialBayesNet:
    """Componentwise union; shared variables must be identical and no variable
    may receive a conditional table from both sides."""
    by_id = {v.id: v for v in a.variables}
    for v in b.variables:
        seen = by_id.get(v.id)
        if seen is not None and seen != v:
            raise ModelInconsistencyError(f"variable id {v.id} differs between nets")
        by_id[v.id] = v
    owners_a = {it.owner.id for it in a.items}
    for it in b.items:
        if it.owner.id in owners_a:
            raise ModelInconsistencyError(
                f"both nets provide a conditional for {it.owner.name!r}")
    return PartialBayesNet(by_id.values(), a.items + b.items)


def union_all(nets: Sequence[PartialBayesNet]) -> PartialBayesNet:
    out = nets[0]
    for n in nets[1:]:
        out = union(out, n)
    return out


@dataclass(frozen=True)
class QuerySplit:
    """How targets and evidence fall on the two sides of a decomposition."""

    separator: tuple[Variable, ...]
    x1: tuple[Variable, ...]          # targets private to side one
    x2: tuple[Variable, ...]          # targets private to side two
    x_sep: tuple[Variable, ...]       # targets inside the separator
    y1: tuple[tuple[Variable, int], ...]      # evidence private to side one
    y2: tuple[tuple[Variable, int], ...]      # evidence private to side two
    y_sep: tuple[tuple[Variable, int], ...]   # evidence inside the separator
    free_sep: tuple[Variable, ...]    # separator variables with no evidence

    @property
    def y_sep_map(self) -> dict[Variable, int]:
        return dict(self.y_sep)


def split_query(query: Query, d: Decomposition, net: PartialBayesNet) -> tuple[QuerySplit, Query, Query]:
    """Induce one subquery per side: each side keeps its private targets plus
    the unobserved separator variables, and sees its private evidence plus the
    separator evidence."""
    sep_ids = d.separator
    sep_vars = net.restrict_to(sep_ids)
    x1 = tuple(v for v in query.targets if v.id in d.v1 - sep_ids)
    x2 = tuple(v for v in query.targets if v.id in d.v2 - sep_ids)
    x_sep = tuple(v for v in query.targets if v.id in sep_ids)
    y1 = tuple((v, s) for v, s in query.evidence if v.id in d.v1 - sep_ids)
    y2 = tuple((v, s) for v, s in query.evidence if v.id in d.v2 - sep_ids)
    y_sep = tuple((v, s) for v, s in query.evidence if v.id in sep_ids)
    observed_sep = {v.id for v, _ in y_sep}
    free_sep = tuple(v for v in sep_vars if v.id not in observed_sep)
    split = QuerySplit(sep_vars, x1, x2, x_sep, y1, y2, y_sep, free_sep)
    q1 = Query(x1 + free_sep, y_sep + y1)
    q2 = Query(x2 + free_sep, y_sep + y2)
    return split, q1, q2


def append_answer(net: PartialBayesNet, separator: Sequence[Variable],
                  answer: Potential, aux: Variable) -> PartialBayesNet:
    """Graft a subquery answer onto the net as a pseudo conditional.

    A fresh binary auxiliary variable becomes a child of every separator
    variable; only its first-state slice is stored (the other slice is never
    evaluated, and could not be: the answer may exceed one). Scope of the
    answer beyond the separator turns into parameters of the result.
    """
    if aux.kind != KIND_AUXILIARY or aux.card != 2:
        raise ValueError("auxiliary variable must be binary with kind 'auxiliary'")
    have = {v.id for v in net.variables} | {v.id for v in net.parameters}
    names = {v.name for v in net.variables} | {v.name for v in net.parameters}
    if aux.id in have or aux.name in names:
        raise ModelInconsistencyError(
            f"auxiliary {aux.name!r} collides with an existing variable")
    sep_ids = {v.id for v in separator}
    net_ids = {v.id for v in net.variables}
    if not sep_ids <= net_ids:
        raise ValueError("separator must consist of net variables")
    if not sep_ids <= {v.id for v in answer.scope}:
        raise ValueError("answer must cover the whole separator")
    item = Item(owner=aux, parents=tuple(separator), table=answer, zero_slice=True)
    return PartialBayesNet(net.variables + (aux,), net.items + (item,))


def fresh_auxiliary(used_names: Iterable[str], next_id: int, serial: int) -> Variable:
    """Binary 0/1 auxiliary named v1, v2, ... skipping names already taken."""
    used = set(used_names)
    k = serial
    while f"v{k}" in used:
        k += 1
    return Variable(next_id, f"v{k}", ("0", "1"), kind=KIND_AUXILIARY)


def is_simple(net: PartialBayesNet) -> bool:
    """True iff the net has exactly one leaf and every other node is a parent
    of that leaf; such a net is answered by direct marginalization."""
    leaves = net.dag.leaves()
    if len(leaves) != 1:
        return False
    (leaf,) = leaves
    return net.dag.parents(leaf) == net.dag.vertices - {leaf}


def observed_leaves(net: PartialBayesNet, query: Query) -> tuple[Variable, ...]:
    """Leaves of the net that carry evidence under the query (grafted
    auxiliaries observed at their first state qualify)."""
    leaf_ids = net.dag.leaves()
    return tuple(v for v, _ in query.evidence if v.id in leaf_ids)
