"""Strictly increasing cost functions used in lambda-variances."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Lambda:
    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    convex: bool = False
    # sup of |lambda'| on [0, r] as a function of r
    lip: Callable[[float], float] | None = None

    def __call__(self, t):
        return self.fn(t)


T2 = Lambda(
    "t2",
    lambda t: np.square(t),
    lambda t: 2.0 * np.asarray(t, dtype=float),
    convex=True,
    lip=lambda r: 2.0 * r,
)
T1 = Lambda(
    "t",
    lambda t: np.abs(np.asarray(t, dtype=float)),
    lambda t: np.ones_like(np.asarray(t, dtype=float)),
    convex=True,
    lip=lambda r: 1.0,
)
MIN1 = Lambda(
    "min1",
    lambda t: np.minimum(t, 1.0),
    lambda t: (np.asarray(t, dtype=float) < 1.0).astype(float),
    lip=lambda r: 1.0,
)
EXP = Lambda(
    "exp",
    lambda t: -np.expm1(-np.asarray(t, dtype=float)),
    lambda t: np.exp(-np.asarray(t, dtype=float)),
    lip=lambda r: 1.0,
)

BUILTIN = {lam.name: lam for lam in (T2, T1, MIN1, EXP)}
ALIASES = {"t^2": "t2", "t**2": "t2", "square": "t2", "abs": "t", "1-exp(-t)": "exp"}


def get_lambda(spec) -> Lambda:
    """Resolve a built-in name, pass through a Lambda, or wrap a plain callable."""
    if isinstance(spec, Lambda):
        return spec
    if isinstance(spec, str):
        key = ALIASES.get(spec, spec)
        if key not in BUILTIN:
            raise DomainError(f"unknown lambda {spec!r}; choose from {sorted(BUILTIN)}")
        return BUILTIN[key]
    if callable(spec):
        h = 1e-6
        return Lambda(
            getattr(spec, "__name__", "custom"),
            spec,
            lambda t: (spec(np.asarray(t) + h) - spec(np.maximum(np.asarray(t) - h, 0.0)))
            / (np.asarray(t) + h - np.maximum(np.asarray(t) - h, 0.0)),
        )
    raise DomainError(f"cannot interpret {spec!r} as a lambda function")
