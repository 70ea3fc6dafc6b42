"""Symbolic household and escape-room simulator."""

import json

from . import _core
from ._core import Error

__all__ = ["Error", "Service", "generate", "solve", "observe", "edit", "run_episode", "bench", "household_scenarios"]


def _dump(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


def generate(level, seed=0, **extra):
    return json.loads(_core.generate(json.dumps({"level": level, "seed": seed, **extra})))


def solve(graph, goal, budget=200000):
    return json.loads(_core.solve(_dump(graph), _dump(goal), budget))


def observe(graph, agent):
    return json.loads(_core.observe(_dump(graph), agent))


def edit(graph, edits, viewpoint=""):
    return json.loads(_core.edit(_dump(graph), _dump(edits), viewpoint))


def run_episode(task, seed=0, policy="oracle", budget_factor=4):
    return json.loads(_core.run_episode(task, seed, policy, budget_factor))


def bench(suite, policies=("oracle", "random"), jobs=1):
    return json.loads(_core.bench(_dump(suite), list(policies), jobs))


def household_scenarios():
    return list(_core.household_scenarios())


class Service:
    """In-process service; same routes and bodies as the HTTP server."""

    def __init__(self, id_seed=1):
        self._svc = _core.Service(id_seed)

    def request(self, method, path, body=None):
        status, text = self._svc.handle(method, path, "" if body is None else _dump(body))
        return status, json.loads(text)
