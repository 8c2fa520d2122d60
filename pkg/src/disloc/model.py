"""The harmonic oscillator with a finite step at the origin.

    V(x; a) = x**2 - 1 - a   (x < 0)
    V(x; a) = x**2 - 1       (x > 0),   a > 0, omega fixed to 1.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import AtOriginAmbiguous, InvalidPotential

LEFT = "left"
RIGHT = "right"
AUTO = "auto"
SIDES = (LEFT, RIGHT, AUTO)


@dataclass(frozen=True)
class PotentialSpec:
    """Jump height ``a``; ``hermite_case`` is l when a = 4l was given exactly."""

    a: float
    hermite_case: Optional[int] = None

    def __post_init__(self):
        if not np.isfinite(self.a) or self.a <= 0:
            raise InvalidPotential(f"jump a must be a positive finite number, got {self.a}")
        if self.hermite_case is not None:
            if self.hermite_case < 1 or self.a != 4 * self.hermite_case:
                raise InvalidPotential("hermite_case = l requires a == 4*l with l >= 1")

    @classmethod
    def from_a(cls, a) -> "PotentialSpec":
        # Only an integer-valued multiple of 4 passed as an int counts as a = 4l;
        # floats are never promoted on closeness.
        if isinstance(a, (int, np.integer)) and not isinstance(a, bool) and a > 0 and a % 4 == 0:
            return cls(float(a), int(a) // 4)
        return cls(float(a))

    @classmethod
    def from_ell(cls, ell: int) -> "PotentialSpec":
        ell = int(ell)
        return cls(4.0 * ell, ell)

    @property
    def ell(self) -> Optional[int]:
        return self.hermite_case

    def to_json(self) -> dict:
        if self.hermite_case is not None:
            return {"ell": self.hermite_case}
        return {"a": self.a}

    @classmethod
    def from_json(cls, obj) -> "PotentialSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        keys = set(obj)
        if keys == {"a"}:
            return cls.from_a(obj["a"])
        if keys == {"ell"}:
            if not isinstance(obj["ell"], int) or isinstance(obj["ell"], bool):
                raise InvalidPotential("ell must be an integer")
            return cls.from_ell(obj["ell"])
        raise InvalidPotential('expected exactly one of the keys "a" or "ell"')


@dataclass(frozen=True)
class BoundaryReport:
    value_jump: float
    slope_jump: float
    tail_decay_ok: bool


def side_offset(spec: PotentialSpec, side: str) -> float:
    """Constant part of V on one side: -1 - a on the left, -1 on the right."""
    if side == LEFT:
        return -1.0 - spec.a
    if side == RIGHT:
        return -1.0
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def potential_value_sided(spec: PotentialSpec, x, side: str):
    x = np.asarray(x, dtype=float)
    out = x * x + side_offset(spec, side)
    return float(out) if out.ndim == 0 else out


def resolve_side(x, side: str = AUTO):
    """Per-point side labels as a boolean array (True = left)."""
    x = np.asarray(x, dtype=float)
    if side == LEFT:
        return np.ones(x.shape, dtype=bool)
    if side == RIGHT:
        return np.zeros(x.shape, dtype=bool)
    if side != AUTO:
        raise ValueError(f"unknown side {side!r}")
    if np.any(x == 0):
        raise AtOriginAmbiguous("x = 0 needs an explicit side ('left' or 'right')")
    return x < 0


def potential_value(spec: PotentialSpec, x, side: str = AUTO):
    x = np.asarray(x, dtype=float)
    left = resolve_side(x, side)
    out = x * x - 1.0 - np.where(left, spec.a, 0.0)
    return float(out) if out.ndim == 0 else out
