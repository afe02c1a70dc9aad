"""Python interface to the conceptual model run-time."""

import json
from pathlib import Path

from . import _cim
from ._cim import (
    API_VERSION,
    CompileError,
    Error,
    IoError,
    LoadError,
    ParseError,
    PlanError,
    QueryError,
    generate_olympic_data,
    query_text,
)

__all__ = [
    "API_VERSION",
    "CompileError",
    "Error",
    "IoError",
    "LoadError",
    "ParseError",
    "PlanError",
    "QueryError",
    "Service",
    "Session",
    "compile_models",
    "generate_olympic_data",
    "open",
    "parse_query",
    "query_text",
    "validate",
]


class Session:
    """A workspace with data loaded and views compiled."""

    def __init__(self, location, materialize=False):
        self._s = _cim.Session.open(str(location), materialize)

    @property
    def ok(self):
        return self._s.ok()

    @property
    def diagnostics(self):
        return json.loads(self._s.diagnostics_json())

    def views(self):
        return json.loads(self._s.views_json())

    def model(self):
        return json.loads(self._s.model_json())

    def query(self, query, oracle=False):
        """Run a query given as CQL text, a JSON string, or a dict."""
        if isinstance(query, dict):
            query = json.dumps(query)
        return json.loads(self._s.query_json(query, oracle))

    def plan(self, query):
        if isinstance(query, dict):
            query = json.dumps(query)
        return json.loads(self._s.plan_json(query))

    def check(self):
        return json.loads(self._s.check_json())


def open(location, materialize=False):
    return Session(location, materialize)


class Service:
    """The HTTP/JSON surface, callable without a socket."""

    def __init__(self, workspace=None, materialize=False):
        self._s = _cim.Service()
        if workspace is not None:
            self._s.load(str(workspace), materialize)

    @property
    def ready(self):
        return self._s.ready()

    def request(self, method, target, body=None):
        if isinstance(body, dict):
            body = json.dumps(body)
        status, text = self._s.handle(method, target, body or "")
        return status, (json.loads(text) if text else None)


def _texts(cdl, sdl, mdl):
    return [Path(x).read_text() if isinstance(x, Path) else x for x in (cdl, sdl, mdl)]


def validate(cdl, sdl, mdl):
    """Diagnostics for three model documents, given as XML text or paths."""
    return json.loads(_cim.validate_json(*_texts(cdl, sdl, mdl)))


def compile_models(cdl, sdl, mdl):
    return json.loads(_cim.compile_json(*_texts(cdl, sdl, mdl)))


def parse_query(text):
    return json.loads(_cim.parse_query_json(text))
