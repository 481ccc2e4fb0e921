"""JSON problem files and output documents.

A problem file is a JSON object::

    {"Q": [[...], ...], "q": [...],
     "A": [[...]], "b": [...],          # optional
     "G": [[...]], "h": [...],          # optional
     "rho": [...],                      # optional, selects elastic mode
     "settings": {"tol": 1e-8, "max_iters": 30, "kappa": 0.01}}   # optional

Missing blocks mean zero rows.
"""
from __future__ import annotations

import json
from typing import Any

import numpy as np

from .errors import QpError
from .problem import (
    ElasticIterate,
    ElasticProblem,
    Problem,
    QpGradients,
    QpProblem,
    SolveResult,
)

SETTING_KEYS = ("tol", "max_iters", "kappa")
_KNOWN = {"Q", "q", "A", "b", "G", "h", "rho", "settings"}


class InputError(QpError, ValueError):
    """Problem file could not be parsed into a problem."""


def _array(doc: dict, key: str, ndim: int):
    if key not in doc:
        return None
    try:
        arr = np.array(doc[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"field {key!r} is not a numeric array: {exc}") from exc
    if arr.size == 0:
        return None
    if arr.ndim != ndim:
        raise InputError(f"field {key!r} must be {'a matrix' if ndim == 2 else 'a vector'}")
    return arr


def parse_problem(doc: Any) -> tuple[Problem, dict]:
    """Build a problem and its settings overrides from a decoded document."""
    if not isinstance(doc, dict):
        raise InputError("problem document must be a JSON object")
    missing = [k for k in ("Q", "q") if k not in doc]
    if missing:
        raise InputError(f"missing required field(s): {', '.join(missing)}")
    unknown = sorted(set(doc) - _KNOWN)
    if unknown:
        raise InputError(f"unknown field(s): {', '.join(unknown)}")
    Q, q = _array(doc, "Q", 2), _array(doc, "q", 1)
    if Q is None or q is None:
        raise InputError("Q and q must be nonempty")
    A, b = _array(doc, "A", 2), _array(doc, "b", 1)
    G, h = _array(doc, "G", 2), _array(doc, "h", 1)
    if (A is None) != (b is None) or (G is None) != (h is None):
        raise InputError("A/b and G/h must be given together")
    settings = doc.get("settings") or {}
    if not isinstance(settings, dict) or set(settings) - set(SETTING_KEYS):
        raise InputError(f"settings may only contain {', '.join(SETTING_KEYS)}")
    if "rho" in doc:
        if A is not None:
            raise InputError("elastic problems (with rho) cannot have an equality block")
        rho = _array(doc, "rho", 1)
        return ElasticProblem(Q, q, G, h, np.zeros(0) if rho is None else rho), dict(settings)
    return QpProblem(Q, q, A, b, G, h), dict(settings)


def loads_problem(text: str) -> tuple[Problem, dict]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_problem(doc)


def load_problem(path) -> tuple[Problem, dict]:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(str(exc)) from exc
    return loads_problem(text)


def problem_document(problem: Problem, settings: dict | None = None) -> dict:
    doc = {"Q": problem.Q.tolist(), "q": problem.q.tolist()}
    if isinstance(problem, QpProblem) and problem.m:
        doc["A"], doc["b"] = problem.A.tolist(), problem.b.tolist()
    if problem.p:
        doc["G"], doc["h"] = problem.G.tolist(), problem.h.tolist()
    if isinstance(problem, ElasticProblem):
        doc["rho"] = problem.rho.tolist()
    if settings:
        doc["settings"] = dict(settings)
    return doc


def iterate_fields(iterate) -> dict:
    if isinstance(iterate, ElasticIterate):
        names = ("x", "t", "s1", "s2", "z1", "z2")
    else:
        names = ("x", "s", "z", "y")
    return {name: getattr(iterate, name).tolist() for name in names}


def result_document(problem: Problem, result: SolveResult) -> dict:
    doc = {
        "status": result.status.value,
        "iterations": result.iterations,
        "residual": result.residual_norm,
        "mu": result.duality_measure,
        "objective": problem.objective(result.iterate.x),
    }
    if result.message:
        doc["message"] = result.message
    doc.update(iterate_fields(result.iterate))
    return doc


def gradients_document(grads: QpGradients) -> dict:
    return {f"grad_{name}": value.tolist() for name, value in grads.blocks().items()}


def dumps(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"
