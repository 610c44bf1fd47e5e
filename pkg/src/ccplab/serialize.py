"""JSON serialization of strategies and results.

Conventions: complex numbers are two-element [re, im] arrays; matrices
are row-major nested lists; every document carries a ``schema`` version
field and a ``kind`` discriminator.
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .bell import EntangledStrategy
from .classical import MessageFunction
from .pm import Povm, PrepareMeasureStrategy

__all__ = [
    "SCHEMA_VERSION",
    "complex_to_json",
    "complex_from_json",
    "matrix_to_json",
    "matrix_from_json",
    "strategy_to_dict",
    "strategy_from_dict",
    "save_strategy",
    "load_strategy",
]

SCHEMA_VERSION = 1


def complex_to_json(z: complex) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def complex_from_json(pair) -> complex:
    re, im = pair
    return complex(float(re), float(im))


def matrix_to_json(m: np.ndarray) -> list:
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    return [[complex_to_json(z) for z in row] for row in m]


def matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex_from_json(p) for p in row] for row in rows],
                    dtype=complex)


def _vector_to_json(v: np.ndarray) -> list:
    return [complex_to_json(z) for z in np.asarray(v, dtype=complex)]


def _vector_from_json(pairs) -> np.ndarray:
    return np.array([complex_from_json(p) for p in pairs], dtype=complex)


def _povm_to_json(povm: Povm) -> list:
    return [matrix_to_json(m) for m in povm.elements]


def _povm_from_json(d: int, data) -> Povm:
    return Povm(d, tuple(matrix_from_json(m) for m in data))


def strategy_to_dict(strategy) -> dict:
    """Serialize a classical / prepare-and-measure / entangled strategy."""
    if isinstance(strategy, PrepareMeasureStrategy):
        return {
            "schema": SCHEMA_VERSION,
            "kind": "prepare-measure",
            "d": strategy.d,
            "states": {f"{y0},{y1}": _vector_to_json(psi)
                       for (y0, y1), psi in sorted(strategy.states.items())},
            "measurements": [_povm_to_json(p) for p in strategy.measurements],
        }
    if isinstance(strategy, EntangledStrategy):
        return {
            "schema": SCHEMA_VERSION,
            "kind": "entangled",
            "d": strategy.d,
            "state": _vector_to_json(strategy.state),
            "alice": [_povm_to_json(p) for p in strategy.alice],
            "bob": [_povm_to_json(p) for p in strategy.bob],
        }
    if isinstance(strategy, ClassicalStrategy):
        return {
            "schema": SCHEMA_VERSION,
            "kind": "classical",
            "d": strategy.d,
            "message": [list(row) for row in strategy.message.table],
            "response": {f"{x0},{x1},{m}": g
                         for (x0, x1, m), g in sorted(strategy.response.items())},
        }
    raise TypeError(f"cannot serialize {type(strategy).__name__}")


class ClassicalStrategy:
    """A deterministic protocol: Bob's message function plus Alice's
    response table (x0, x1, m) -> G."""

    def __init__(self, d: int, message: MessageFunction, response: dict):
        self.d = d
        self.message = message
        self.response = dict(response)

    def play(self, x0: int, x1: int, y0: int, y1: int) -> int:
        return self.response[(x0, x1, self.message(y0, y1))]


def strategy_from_dict(doc: dict):
    """Inverse of strategy_to_dict; validates kind and schema."""
    if not isinstance(doc, dict):
        raise ValueError("strategy document must be a JSON object")
    schema = doc.get("schema")
    if schema != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version {schema!r}")
    kind = doc.get("kind")
    d = int(doc["d"])
    if kind == "prepare-measure":
        states = {}
        for key, pairs in doc["states"].items():
            y0, y1 = (int(t) for t in key.split(","))
            states[(y0, y1)] = _vector_from_json(pairs)
        measurements = tuple(_povm_from_json(d, p)
                             for p in doc["measurements"])
        return PrepareMeasureStrategy(d, states, measurements)
    if kind == "entangled":
        return EntangledStrategy(
            d, _vector_from_json(doc["state"]),
            tuple(_povm_from_json(d, p) for p in doc["alice"]),
            tuple(_povm_from_json(d, p) for p in doc["bob"]))
    if kind == "classical":
        message = MessageFunction(
            d, tuple(tuple(int(m) for m in row) for row in doc["message"]))
        response = {}
        for key, g in doc["response"].items():
            x0, x1, m = (int(t) for t in key.split(","))
            response[(x0, x1, m)] = int(g)
        return ClassicalStrategy(d, message, response)
    raise ValueError(f"unknown strategy kind {kind!r}")


def save_strategy(path, strategy) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(strategy_to_dict(strategy), fh, indent=2)
        fh.write("\n")


def load_strategy(path):
    with open(path, encoding="utf-8") as fh:
        return strategy_from_dict(json.load(fh))


def fraction_to_json(value: Fraction) -> dict:
    return {"numerator": value.numerator, "denominator": value.denominator,
            "decimal": float(value)}
