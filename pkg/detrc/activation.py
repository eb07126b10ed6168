"""Elementwise activation functions for reservoir states.

Provides tanh, sine, the logistic sigmoid and a truncated-Clausen
approximation of the Lobachevsky function:

    clausen(s, k)     = sum_{i=0}^{k} 2**-i * sin(2*i*s)
    lobachevsky(s, k) = clausen(2*s, k) / 2

The i=0 term of the Clausen sum is sin(0) = 0 and is kept so the sum matches
its usual written form.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import expit

from .errors import ParameterError

DEFAULT_CLAUSEN_ORDER = 8


class ActivationName(str, Enum):
    TANH = "tanh"
    SIN = "sin"
    SIGMOID = "sigmoid"
    LOBACHEVSKY = "lobachevsky"
    # Ablation only: disables the nonlinearity
    IDENTITY = "identity"


ACTIVATION_NAMES = [a.value for a in ActivationName]


@dataclass(frozen=True)
class ActivationKind:
    """An activation choice; k_c is the Clausen truncation order."""

    kind: ActivationName = ActivationName.TANH
    k_c: int = DEFAULT_CLAUSEN_ORDER

    def __post_init__(self) -> None:
        if not isinstance(self.kind, ActivationName):
            object.__setattr__(self, "kind", ActivationName(self.kind))
        if int(self.k_c) != self.k_c or self.k_c < 1:
            raise ParameterError("k_c", self.k_c, "Clausen order must be an integer >= 1")

    @property
    def name(self) -> str:
        return self.kind.value

    @classmethod
    def from_name(cls, name: str, k_c: int = DEFAULT_CLAUSEN_ORDER) -> "ActivationKind":
        try:
            kind = ActivationName(name.lower())
        except ValueError:
            raise ParameterError(
                "activation", name, f"expected one of {', '.join(ACTIVATION_NAMES)}"
            ) from None
        return cls(kind=kind, k_c=k_c)


def clausen(s: ArrayLike, k_c: int) -> np.ndarray | float:
    """Truncated Clausen sum of order k_c; scalar in, float out."""
    arr = np.asarray(s, dtype=np.float64)
    result = np.zeros_like(arr)
    # Accumulate term by term; broadcasting over i would multiply memory by k_c
    for i in range(k_c + 1):
        result += np.sin(2.0 * i * arr) / 2.0**i
    if arr.ndim == 0:
        return float(result)
    return result


def lobachevsky(s: ArrayLike, k_c: int) -> np.ndarray | float:
    """Lobachevsky approximation lambda(s) = clausen(2s, k_c) / 2."""
    arr = np.asarray(s, dtype=np.float64)
    result = clausen(2.0 * arr, k_c)
    if arr.ndim == 0:
        return float(result) / 2.0
    return result / 2.0


def apply(v: ArrayLike, kind: ActivationKind) -> np.ndarray:
    """Apply an activation elementwise; output has the input's shape."""
    arr = np.asarray(v, dtype=np.float64)
    name = kind.kind
    if name is ActivationName.TANH:
        return np.tanh(arr)
    if name is ActivationName.SIN:
        return np.sin(arr)
    if name is ActivationName.SIGMOID:
        return expit(arr)
    if name is ActivationName.LOBACHEVSKY:
        return np.asarray(lobachevsky(arr, kind.k_c), dtype=np.float64)
    return arr.copy()
