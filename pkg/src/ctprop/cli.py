"""Command-line client: load a model file, run one query, print the table.

By default the query executes in-process through the same request/response
layer the HTTP service uses; with --server it is sent to a running service
instead. Exit codes: 0 success, 1 parse/model errors, 2 impossible evidence,
3 oracle mismatch under --check.
"""

from __future__ import annotations

import argparse
import sys

from .api import QueryRequest, QueryResponse, run_query
from .errors import (
    CtpropError,
    EvidenceError,
    ModelInconsistencyError,
    ParseError,
    StateSpaceTooLargeError,
    ZeroEvidenceError,
)

EXIT_OK = 0
EXIT_MODEL_ERROR = 1
EXIT_ZERO_EVIDENCE = 2
EXIT_CHECK_FAILED = 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ctprop",
        description="Exact inference over a discrete Bayesian network model file.")
    p.add_argument("--net", required=True, metavar="FILE",
                   help="model file in the ctprop text format")
    p.add_argument("--target", default="", metavar="a,b,...",
                   help="comma-separated target variables")
    p.add_argument("--evidence", default="", metavar="x=state,...",
                   help="comma-separated observed variable=state pairs")
    p.add_argument("--posterior", action="store_true",
                   help="normalize the answer into a conditional distribution")
    p.add_argument("--trace", action="store_true",
                   help="print the reduction trace before the table")
    p.add_argument("--check", action="store_true",
                   help="cross-check the answer against the brute-force oracle")
    p.add_argument("--strategy", default="default",
                   choices=["default", "first-leaf", "largest-leaf", "random"],
                   help="how to pick the next component to answer")
    p.add_argument("--seed", type=int, default=None, metavar="N",
                   help="seed for --strategy random")
    p.add_argument("--server", default=None, metavar="URL",
                   help="send the query to a running ctprop service instead of "
                        "computing in-process")
    return p


def parse_evidence(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise EvidenceError(f"evidence {part!r} is not of the form var=state")
        var, state = part.split("=", 1)
        out[var.strip()] = state.strip()
    return out


def parse_targets(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _query_remote(server: str, request: QueryRequest) -> QueryResponse:
    import httpx

    reply = httpx.post(f"{server.rstrip('/')}/query",
                       json=request.model_dump(), timeout=300.0)
    if reply.status_code == 409:
        raise ZeroEvidenceError(reply.json().get("detail", "impossible evidence"))
    if reply.status_code != 200:
        detail = reply.json().get("detail", reply.text)
        raise CtpropError(f"service error ({reply.status_code}): {detail}")
    return QueryResponse.model_validate(reply.json())


def format_response(resp: QueryResponse) -> str:
    lines = []
    if resp.trace:
        lines.extend(resp.trace)
    for row in resp.rows:
        cells = " ".join(f"{name}={row.assignment[name]}" for name in resp.scope)
        if cells:
            lines.append(f"{cells}  {row.value:.12g}")
        else:
            lines.append(f"{row.value:.12g}")
    if resp.check is not None:
        lines.append(f"oracle check: {resp.check}")
        if resp.check_detail:
            lines.append(resp.check_detail)
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.net, encoding="utf-8") as fh:
            net_text = fh.read()
    except OSError as exc:
        print(f"error: cannot read {args.net}: {exc}", file=sys.stderr)
        return EXIT_MODEL_ERROR

    try:
        request = QueryRequest(
            net_text=net_text,
            targets=parse_targets(args.target),
            evidence=parse_evidence(args.evidence),
            posterior=args.posterior,
            trace=args.trace,
            check=args.check,
            strategy=args.strategy,
            seed=args.seed,
        )
        if args.server:
            response = _query_remote(args.server, request)
        else:
            response = run_query(request)
    except ZeroEvidenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ZERO_EVIDENCE
    except (ParseError, EvidenceError, ModelInconsistencyError,
            StateSpaceTooLargeError, ValueError, CtpropError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL_ERROR

    for warning in response.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(format_response(response))
    if response.check == "FAIL":
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
