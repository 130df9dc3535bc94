"""Dense potentials over named discrete variables.

A potential is a nonnegative table indexed by the joint states of its scope.
The scope is kept sorted by variable id and the value array is stored in C
order with the first scope variable slowest, so cell order is deterministic
and two potentials over the same variables are directly comparable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import EvidenceError, ModelInconsistencyError, ZeroEvidenceError

KIND_NET = "net"
KIND_PARAMETER = "parameter"
KIND_AUXILIARY = "auxiliary"


@dataclass(frozen=True, order=True)
class Variable:
    """A named discrete variable with an ordered, non-empty state list."""

    id: int
    name: str
    states: tuple[str, ...]
    kind: str = KIND_NET

    def __post_init__(self):
        if not self.states:
            raise ValueError(f"variable {self.name!r} has no states")
        if len(set(self.states)) != len(self.states):
            raise ValueError(f"variable {self.name!r} has duplicate state labels")
        if self.kind not in (KIND_NET, KIND_PARAMETER, KIND_AUXILIARY):
            raise ValueError(f"unknown variable kind {self.kind!r}")

    @property
    def card(self) -> int:
        return len(self.states)

    def state_index(self, state: str | int) -> int:
        """Resolve a state label (or an already-valid index) to its index."""
        if isinstance(state, (int, np.integer)):
            if not 0 <= state < self.card:
                raise EvidenceError(f"state index {state} out of range for {self.name!r}")
            return int(state)
        try:
            return self.states.index(state)
        except ValueError:
            raise EvidenceError(f"unknown state {state!r} for variable {self.name!r}") from None

    def __repr__(self):
        return f"Variable({self.id}, {self.name!r})"


def _check_same_variable(a: Variable, b: Variable) -> None:
    if a.name != b.name or a.states != b.states:
        raise ModelInconsistencyError(
            f"variables with id {a.id} disagree: {a.name!r}{a.states} vs {b.name!r}{b.states}"
        )


def merge_scopes(*scopes: Iterable[Variable]) -> tuple[Variable, ...]:
    """Union of scopes, sorted by id. Same id must mean the same variable,
    and one name may not denote two different variables."""
    by_id: dict[int, Variable] = {}
    by_name: dict[str, Variable] = {}
    for scope in scopes:
        for v in scope:
            seen = by_id.get(v.id)
            if seen is None:
                other = by_name.get(v.name)
                if other is not None and other.id != v.id:
                    raise ModelInconsistencyError(
                        f"variable name {v.name!r} used with ids {other.id} and {v.id}"
                    )
                by_id[v.id] = v
                by_name[v.name] = v
            else:
                _check_same_variable(seen, v)
    return tuple(sorted(by_id.values(), key=lambda v: v.id))


class Potential:
    """Immutable dense table over a sorted scope of variables.

    An empty scope is a scalar (one cell). Values are float64, finite and
    nonnegative; they need not sum to anything in particular.
    """

    __slots__ = ("scope", "values")

    def __init__(self, scope: Iterable[Variable], values):
        scope = tuple(scope)
        ids = [v.id for v in scope]
        if ids != sorted(ids) or len(set(ids)) != len(ids):
            raise ValueError("scope must be sorted by id and free of duplicates")
        arr = np.array(values, dtype=np.float64, order="C")
        shape = tuple(v.card for v in scope)
        if arr.shape != shape:
            arr = arr.reshape(shape)
        if not np.all(np.isfinite(arr)):
            raise ValueError("potential values must be finite")
        if np.any(arr < 0):
            raise ValueError("potential values must be nonnegative")
        arr.setflags(write=False)
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, *_):
        raise AttributeError("Potential is immutable")

    @classmethod
    def scalar(cls, value: float) -> "Potential":
        return cls((), np.asarray(value, dtype=np.float64))

    @classmethod
    def ones(cls, scope: Iterable[Variable]) -> "Potential":
        scope = tuple(sorted(scope, key=lambda v: v.id))
        return cls(scope, np.ones(tuple(v.card for v in scope)))

    @property
    def size(self) -> int:
        return int(self.values.size)

    def variable_ids(self) -> frozenset[int]:
        return frozenset(v.id for v in self.scope)

    def total(self) -> float:
        return float(self.values.sum())

    def value_at(self, assignment: Mapping[int, int]) -> float:
        """Cell value at a full assignment given as {variable id: state index}."""
        idx = tuple(assignment[v.id] for v in self.scope)
        return float(self.values[idx])

    def __mul__(self, other: "Potential") -> "Potential":
        return multiply(self, other)

    def __repr__(self):
        names = ",".join(v.name for v in self.scope)
        return f"Potential[{names}]({self.values.size} cells)"


def aligned_values(p: Potential, scope: tuple[Variable, ...]) -> np.ndarray:
    """View of p's array reshaped for broadcasting over a superset scope."""
    have = {v.id for v in p.scope}
    shape = tuple(v.card if v.id in have else 1 for v in scope)
    return p.values.reshape(shape)


def multiply(a: Potential, b: Potential) -> Potential:
    """Pointwise product; scope is the union of the operand scopes."""
    scope = merge_scopes(a.scope, b.scope)
    return Potential(scope, aligned_values(a, scope) * aligned_values(b, scope))


def product(factors: Iterable[Potential]) -> Potential:
    """Product of any number of potentials (empty product is the scalar 1)."""
    out = None
    for f in factors:
        out = f if out is None else multiply(out, f)
    return out if out is not None else Potential.scalar(1.0)


def sum_out(p: Potential, drop: Iterable[Variable]) -> Potential:
    """Marginalize the given variables away by summation."""
    drop_ids = {v.id for v in drop}
    missing = drop_ids - {v.id for v in p.scope}
    if missing:
        raise ValueError(f"cannot sum out variables not in scope: {sorted(missing)}")
    if not drop_ids:
        return p
    axes = tuple(i for i, v in enumerate(p.scope) if v.id in drop_ids)
    kept = tuple(v for v in p.scope if v.id not in drop_ids)
    return Potential(kept, p.values.sum(axis=axes))


def marginalize_onto(p: Potential, keep: Iterable[Variable]) -> Potential:
    """Sum out everything not in `keep` (which must be a subset of the scope)."""
    keep_ids = {v.id for v in keep}
    return sum_out(p, [v for v in p.scope if v.id not in keep_ids])


def restrict(p: Potential, evidence: Mapping[Variable, int | str]) -> Potential:
    """Slice the table at the given states; observed variables leave the scope."""
    if not evidence:
        return p
    in_scope = {v.id for v in p.scope}
    for v in evidence:
        if v.id not in in_scope:
            raise ValueError(f"evidence variable {v.name!r} not in scope")
    picks = {v.id: v.state_index(s) for v, s in evidence.items()}
    indexer = tuple(picks.get(v.id, slice(None)) for v in p.scope)
    kept = tuple(v for v in p.scope if v.id not in picks)
    return Potential(kept, p.values[indexer])


def normalize(p: Potential) -> Potential:
    """Scale so the cells sum to one; zero total mass means impossible evidence."""
    total = p.total()
    if total == 0.0:
        raise ZeroEvidenceError("cannot normalize a potential with zero total mass")
    return Potential(p.scope, p.values / total)


def extend_with_indicator(p: Potential, at: Mapping[Variable, int | str]) -> Potential:
    """Add the given variables to the scope, keeping p's values on the slice
    where they take the given states and zero everywhere else."""
    if not at:
        return p
    overlap = {v.id for v in p.scope} & {v.id for v in at}
    if overlap:
        raise ValueError(f"indicator variables already in scope: {sorted(overlap)}")
    scope = merge_scopes(p.scope, at.keys())
    out = np.zeros(tuple(v.card for v in scope))
    picks = {v.id: v.state_index(s) for v, s in at.items()}
    indexer = tuple(picks.get(v.id, slice(None)) for v in scope)
    out[indexer] = p.values if p.scope else float(p.values)
    return Potential(scope, out)


def broadcast_over(p: Potential, scope: Iterable[Variable]) -> Potential:
    """Extend p to a superset scope by repeating values over the new axes."""
    full = merge_scopes(p.scope, scope)
    if len(full) == len(p.scope):
        return p
    arr = np.broadcast_to(aligned_values(p, full), tuple(v.card for v in full))
    return Potential(full, arr.copy())


def allclose(a: Potential, b: Potential, rtol: float = 1e-9, atol: float = 0.0) -> bool:
    """Elementwise comparison of two potentials over the same scope."""
    if [v.id for v in a.scope] != [v.id for v in b.scope]:
        return False
    return bool(np.allclose(a.values, b.values, rtol=rtol, atol=atol))
