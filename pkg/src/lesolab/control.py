"""Disturbance-cancelling state feedback on the observer estimates."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np


def feedback_gains(omega_c: float, n: int) -> np.ndarray:
    """``K_j = C(n, j-1) omega_c^(n-j+1)``: the lower coefficients of ``(s + omega_c)^n``."""
    if omega_c <= 0:
        raise ValueError("omega_c must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.array([comb(n, j) * omega_c ** (n - j) for j in range(n)], dtype=float)


@dataclass(frozen=True)
class ControllerGains:
    """State-feedback gains plus the cancellation terms.

    Attributes:
        K: Feedback gains, position first.
        omega_c: Closed-loop bandwidth the gains were built from.
        b0: Nominal input gain.
        model_row: Known model part cancelled alongside ``fhat`` (model-based
            observer); None for the model-free structure.
        clamp: Symmetric actuator limit; None means unlimited.
    """

    K: np.ndarray
    omega_c: float
    b0: float
    model_row: np.ndarray | None = None
    clamp: float | None = None

    def __post_init__(self):
        if self.b0 == 0:
            raise ValueError("b0 must be nonzero")
        if self.omega_c <= 0:
            raise ValueError("omega_c must be positive")
        if self.clamp is not None and self.clamp <= 0:
            raise ValueError("clamp must be positive")
        object.__setattr__(self, "K", np.asarray(self.K, dtype=float))

    @classmethod
    def build(cls, omega_c: float, b0: float, n: int, model_row=None, clamp=None) -> "ControllerGains":
        row = None if model_row is None else np.asarray(model_row, dtype=float)
        return cls(feedback_gains(omega_c, n), omega_c, b0, row, clamp)


def control_law(g: ControllerGains, r: float, xhat, fhat: float) -> float:
    """``u = (-fhat + u0) / b0`` with ``u0 = K1 (r - xhat1) - sum_j Kj xhat_j``.

    Clamping, when configured, is applied by :func:`saturate`.
    """
    x = np.asarray(xhat, dtype=float)
    u0 = g.K[0] * r - float(g.K @ x)
    comp = fhat
    if g.model_row is not None:
        comp += float(g.model_row @ x)
    return (u0 - comp) / g.b0


def saturate(g: ControllerGains, u: float) -> tuple[float, bool]:
    """Apply the optional clamp; the flag reports whether it engaged."""
    if g.clamp is None or abs(u) <= g.clamp:
        return u, False
    return float(np.copysign(g.clamp, u)), True
