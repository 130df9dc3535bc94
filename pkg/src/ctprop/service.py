"""HTTP front end: load networks, keep them in memory, answer queries.

Run with:  uvicorn ctprop.service:app
"""

from __future__ import annotations

import threading
import uuid

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import api
from .errors import (
    CtpropError,
    EvidenceError,
    ModelInconsistencyError,
    ParseError,
    StateSpaceTooLargeError,
    ZeroEvidenceError,
)
from .netformat import parse_net
from .networks import PartialBayesNet


class NetUpload(BaseModel):
    text: str
    name: str | None = None


class NetStore:
    """In-memory registry of loaded networks; safe for concurrent requests."""

    def __init__(self):
        self._lock = threading.Lock()
        self._nets: dict[str, tuple[PartialBayesNet, str | None]] = {}

    def add(self, net: PartialBayesNet, name: str | None) -> str:
        net_id = uuid.uuid4().hex[:12]
        with self._lock:
            self._nets[net_id] = (net, name)
        return net_id

    def get(self, net_id: str) -> tuple[PartialBayesNet, str | None]:
        with self._lock:
            if net_id not in self._nets:
                raise KeyError(net_id)
            return self._nets[net_id]

    def remove(self, net_id: str) -> None:
        with self._lock:
            if net_id not in self._nets:
                raise KeyError(net_id)
            del self._nets[net_id]

    def ids(self) -> list[str]:
        with self._lock:
            return list(self._nets)


def create_app() -> FastAPI:
    app = FastAPI(
        title="ctprop",
        description="Exact Bayesian-network inference by decomposition at "
                    "complete separators of the moral graph (no triangulation).",
        version="0.1.0",
    )
    store = NetStore()

    def _fail(status: int, exc: Exception):
        raise HTTPException(status_code=status, detail=str(exc))

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/nets", response_model=api.NetSummary)
    def upload_net(upload: NetUpload) -> api.NetSummary:
        try:
            net = parse_net(upload.text)
        except (ParseError, ModelInconsistencyError) as exc:
            _fail(400, exc)
        net_id = store.add(net, upload.name)
        return api.summarize(net, net_id=net_id, name=upload.name)

    @app.get("/nets", response_model=list[api.NetSummary])
    def list_nets() -> list[api.NetSummary]:
        out = []
        for net_id in store.ids():
            net, name = store.get(net_id)
            out.append(api.summarize(net, net_id=net_id, name=name))
        return out

    @app.get("/nets/{net_id}", response_model=api.NetSummary)
    def describe_net(net_id: str) -> api.NetSummary:
        try:
            net, name = store.get(net_id)
        except KeyError:
            _fail(404, KeyError(f"no network {net_id}"))
        return api.summarize(net, net_id=net_id, name=name)

    @app.delete("/nets/{net_id}")
    def delete_net(net_id: str) -> dict:
        try:
            store.remove(net_id)
        except KeyError:
            _fail(404, KeyError(f"no network {net_id}"))
        return {"deleted": net_id}

    @app.post("/nets/{net_id}/query", response_model=api.QueryResponse)
    def query_net(net_id: str, options: api.QueryOptions) -> api.QueryResponse:
        try:
            net, _ = store.get(net_id)
        except KeyError:
            _fail(404, KeyError(f"no network {net_id}"))
        return _run(lambda: api.execute_query(net, options))

    @app.post("/query", response_model=api.QueryResponse)
    def one_shot_query(request: api.QueryRequest) -> api.QueryResponse:
        return _run(lambda: api.run_query(request))

    def _run(thunk):
        try:
            return thunk()
        except ZeroEvidenceError as exc:
            _fail(409, exc)
        except (ParseError, EvidenceError, ModelInconsistencyError,
                StateSpaceTooLargeError, ValueError) as exc:
            _fail(400, exc)
        except CtpropError as exc:
            _fail(500, exc)

    return app


app = create_app()
