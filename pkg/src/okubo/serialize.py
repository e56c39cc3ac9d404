"""JSON helpers: complex numbers travel as ``[re, im]`` pairs."""
from __future__ import annotations

import numbers

import numpy as np


def cx_to_json(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def cx_from_json(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError(f"complex number must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, numbers.Number):
        return complex(v)
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    raise ValueError(f"cannot read a complex number from {v!r}")


def vec_to_json(v) -> list[list[float]]:
    return [cx_to_json(z) for z in np.ravel(v)]


def vec_from_json(v) -> list[complex]:
    return [cx_from_json(z) for z in v]


def mat_to_json(m) -> list[list[list[float]]]:
    m = np.asarray(m, dtype=complex)
    return [[cx_to_json(z) for z in row] for row in m]


def mat_from_json(m) -> np.ndarray:
    return np.array([[cx_from_json(z) for z in row] for row in m], dtype=complex)
