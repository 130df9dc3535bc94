"""Request/response models and the orchestration the service and CLI share.

The CLI is a thin client of this layer: it builds a QueryRequest, runs it
either in-process (here) or against a remote service (HTTP), and formats the
QueryResponse. The FastAPI app in `service` exposes the same functions over
HTTP.
"""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, Field

from . import engine, netformat, oracle, tables
from .errors import StateSpaceTooLargeError, ZeroEvidenceError
from .networks import PartialBayesNet, make_query
from .tables import Potential

CHECK_RTOL = 1e-9
CHECK_ATOL = 1e-15


class VariableInfo(BaseModel):
    name: str
    states: list[str]
    parents: list[str]
    has_table: bool


class NetSummary(BaseModel):
    id: str | None = None
    name: str | None = None
    variables: list[VariableInfo]
    unspecified_roots: list[str]
    bayesian: bool


class QueryOptions(BaseModel):
    targets: list[str] = Field(default_factory=list)
    evidence: dict[str, str] = Field(default_factory=dict)
    posterior: bool = False
    trace: bool = False
    check: bool = False
    strategy: str = "default"
    seed: int | None = None


class QueryRequest(QueryOptions):
    net_text: str


class TableRow(BaseModel):
    assignment: dict[str, str]
    value: float


class QueryResponse(BaseModel):
    scope: list[str]
    rows: list[TableRow]
    is_probability: bool
    trace: list[str] | None = None
    check: str | None = None
    check_detail: str | None = None
    warnings: list[str] = Field(default_factory=list)


def summarize(net: PartialBayesNet, net_id: str | None = None,
              name: str | None = None) -> NetSummary:
    unspecified = [v.name for v in net.unspecified_roots]
    infos = []
    for v in net.variables:
        item = net.item_for(v)
        infos.append(VariableInfo(
            name=v.name,
            states=list(v.states),
            parents=[p.name for p in item.parents] if item else [],
            has_table=item is not None,
        ))
    return NetSummary(id=net_id, name=name, variables=infos,
                      unspecified_roots=unspecified, bayesian=net.is_bayesian())


def resolve_strategy(name: str, seed: int | None) -> engine.PickStrategy:
    if name == "random":
        return engine.random_strategy(seed if seed is not None else 0)
    try:
        return engine.STRATEGIES[name]
    except KeyError:
        known = ", ".join(sorted(engine.STRATEGIES) + ["random"])
        raise ValueError(f"unknown strategy {name!r} (choose from: {known})") from None


def table_rows(pot: Potential) -> list[TableRow]:
    rows = []
    for idx in np.ndindex(*pot.values.shape):
        assignment = {v.name: v.states[i] for v, i in zip(pot.scope, idx)}
        rows.append(TableRow(assignment=assignment, value=float(pot.values[idx])))
    return rows


def execute_query(net: PartialBayesNet, options: QueryOptions) -> QueryResponse:
    """Run a query through the engine; optionally cross-check and normalize.

    Raises ParseError/EvidenceError/ValueError for bad input and
    ZeroEvidenceError when posterior normalization meets impossible evidence.
    """
    strategy = resolve_strategy(options.strategy, options.seed)
    query = make_query(net, options.targets, options.evidence)
    report = engine.RunReport()
    answer = engine.main_query(net, query, strategy=strategy, report=report)

    warnings = list(report.warnings)
    is_probability = net.is_bayesian()
    if not is_probability:
        warnings.append("network has unspecified roots or parameters; "
                        "the answer is a potential, not a probability")

    check = None
    check_detail = None
    if options.check:
        try:
            expected = oracle.brute_force_marginal(net, query)
        except StateSpaceTooLargeError as exc:
            raise StateSpaceTooLargeError(f"oracle check impossible: {exc}") from None
        if tables.allclose(answer, expected, rtol=CHECK_RTOL, atol=CHECK_ATOL):
            check = "PASS"
        else:
            check = "FAIL"
            diff = float(np.max(np.abs(answer.values - expected.values)))
            check_detail = f"max absolute deviation from oracle: {diff:.3e}"

    if options.posterior:
        try:
            out = tables.normalize(answer)
        except ZeroEvidenceError:
            shown = {v.name: v.states[s] for v, s in query.evidence}
            raise ZeroEvidenceError(
                f"evidence {shown} has probability zero under the model", shown) from None
    else:
        out = answer
    return QueryResponse(
        scope=[v.name for v in out.scope],
        rows=table_rows(out),
        is_probability=is_probability or options.posterior,
        trace=list(report.trace) if options.trace else None,
        check=check,
        check_detail=check_detail,
        warnings=warnings,
    )


def run_query(request: QueryRequest) -> QueryResponse:
    """One-shot: parse the model text, then execute the query against it."""
    net = netformat.parse_net(request.net_text)
    return execute_query(net, request)
