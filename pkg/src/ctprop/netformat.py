"""Line-oriented text format for networks.

    # comments run to end of line
    variable <name> { <state>, <state>, ... }
    cpt <child> | <parent>, <parent> { p, p, ... }
    cpt <root> { p, p, ... }

Probabilities iterate parent assignments with the first listed parent slowest;
within each parent assignment, child states follow their declared order. A
variable given no cpt line is an unspecified root. Rows of a declared cpt must
sum to one within 1e-9.
"""

from __future__ import annotations

import re

import numpy as np

from .errors import ParseError
from .networks import Item, PartialBayesNet
from .tables import Potential, Variable

_VARIABLE_RE = re.compile(r"^variable\s+(\S+)\s*\{(.*)\}\s*$")
_CPT_RE = re.compile(r"^cpt\s+([^{|]+?)\s*(?:\|\s*([^{]+?)\s*)?\{(.*)\}\s*$")

ROW_SUM_TOLERANCE = 1e-9


def _split_list(body: str) -> list[str]:
    parts = [p.strip() for p in body.split(",")]
    return [p for p in parts if p]


def parse_net(text: str) -> PartialBayesNet:
    """Parse the format above into a validated network."""
    variables: dict[str, Variable] = {}
    cpt_lines: list[tuple[int, str, list[str], list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("variable"):
            m = _VARIABLE_RE.match(line)
            if not m:
                raise ParseError("malformed variable declaration", lineno)
            name, body = m.group(1), m.group(2)
            if name in variables:
                raise ParseError(f"variable {name!r} declared twice", lineno)
            states = _split_list(body)
            if not states:
                raise ParseError(f"variable {name!r} has no states", lineno)
            if len(set(states)) != len(states):
                raise ParseError(f"variable {name!r} repeats a state label", lineno)
            variables[name] = Variable(len(variables), name, tuple(states))
        elif line.startswith("cpt"):
            m = _CPT_RE.match(line)
            if not m:
                raise ParseError("malformed cpt declaration", lineno)
            child = m.group(1).strip()
            parents = _split_list(m.group(2)) if m.group(2) else []
            cpt_lines.append((lineno, child, parents, _split_list(m.group(3))))
        else:
            word = line.split()[0]
            raise ParseError(f"unknown directive {word!r}", lineno)

    if not variables:
        raise ParseError("file declares no variables", max(1, text.count("\n") + 1))

    items: list[Item] = []
    seen_children: set[str] = set()
    for lineno, child, parents, numbers in cpt_lines:
        if child not in variables:
            raise ParseError(f"cpt for unknown variable {child!r}", lineno)
        if child in seen_children:
            raise ParseError(f"second cpt for variable {child!r}", lineno)
        seen_children.add(child)
        for p in parents:
            if p not in variables:
                raise ParseError(f"unknown parent {p!r} in cpt for {child!r}", lineno)
        if len(set(parents)) != len(parents) or child in parents:
            raise ParseError(f"cpt for {child!r} repeats a variable", lineno)
        items.append(_build_item(lineno, variables[child],
                                 [variables[p] for p in parents], numbers))

    try:
        return PartialBayesNet(variables.values(), items)
    except ValueError as exc:
        last = cpt_lines[-1][0] if cpt_lines else 1
        raise ParseError(str(exc), last) from None


def _build_item(lineno: int, child: Variable, parents: list[Variable],
                numbers: list[str]) -> Item:
    expected = child.card
    for p in parents:
        expected *= p.card
    if len(numbers) != expected:
        raise ParseError(
            f"cpt for {child.name!r} needs {expected} probabilities, got {len(numbers)}",
            lineno)
    try:
        values = np.array([float(x) for x in numbers])
    except ValueError as exc:
        raise ParseError(f"bad probability in cpt for {child.name!r}: {exc}", lineno) from None
    if np.any(values < 0):
        raise ParseError(f"negative probability in cpt for {child.name!r}", lineno)
    rows = values.reshape(-1, child.card)
    sums = rows.sum(axis=1)
    bad = np.nonzero(np.abs(sums - 1.0) > ROW_SUM_TOLERANCE)[0]
    if bad.size:
        row = int(bad[0])
        raise ParseError(
            f"cpt row {row + 1} for {child.name!r} sums to {sums[row]:.12g}, not 1",
            lineno, column=line_column_of_row(numbers, row, child.card))
    # File order: listed parents slowest, child fastest. The table scope is
    # sorted by id, so permute axes accordingly.
    file_scope = parents + [child]
    shaped = values.reshape(tuple(v.card for v in file_scope))
    order = sorted(range(len(file_scope)), key=lambda i: file_scope[i].id)
    sorted_scope = [file_scope[i] for i in order]
    table = Potential(sorted_scope, np.transpose(shaped, axes=order))
    return Item(owner=child, parents=tuple(parents), table=table)


def line_column_of_row(numbers: list[str], row: int, card: int) -> int:
    """Rough column bookkeeping: 1-based index of the row's first number."""
    return row * card + 1


def format_net(net: PartialBayesNet) -> str:
    """Render a network back into the text format (structural round-trip)."""
    lines = []
    for v in net.variables:
        lines.append(f"variable {v.name} {{ {', '.join(v.states)} }}")
    for it in net.items:
        if it.zero_slice:
            raise ValueError("grafted networks cannot be serialized")
        file_scope = list(it.parents) + [it.owner]
        order = sorted(range(len(file_scope)), key=lambda i: file_scope[i].id)
        inverse = np.argsort(order)
        arr = np.transpose(it.table.values, axes=inverse)
        flat = ", ".join(f"{x:.12g}" for x in arr.reshape(-1))
        if it.parents:
            heads = ", ".join(p.name for p in it.parents)
            lines.append(f"cpt {it.owner.name} | {heads} {{ {flat} }}")
        else:
            lines.append(f"cpt {it.owner.name} {{ {flat} }}")
    return "\n".join(lines) + "\n"
