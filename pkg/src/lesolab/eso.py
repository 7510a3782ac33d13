"""Augmented extended-state observers: model-free, model-based and learning variants.

The observer state is ``z = [xhat_1 .. xhat_n, dfhat]`` in output-derivative
coordinates (``xhat_1`` estimates y, ``xhat_k`` its (k-1)-th derivative).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SimulationError
from .linalg import place_observer_gains
from .plant import Rk4Propagator, rk4

VARIANT_ALIASES = {
    "mf": "model_free",
    "model_free": "model_free",
    "mb": "model_based",
    "model_based": "model_based",
    "l": "learning",
    "leso": "learning",
    "learning": "learning",
}


def normalize_tag(tag: str) -> str:
    try:
        return VARIANT_ALIASES[tag.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown observer variant {tag!r}") from None


@dataclass(frozen=True)
class EsoVariant:
    """Observer flavour plus the nominal model it carries.

    Attributes:
        tag: ``model_free``, ``model_based`` or ``learning`` (short aliases accepted).
        b0: Nominal input gain.
        state_dim: Plant order n.
        a: Known coefficient on the (n-1)-th derivative, used by ``model_based`` only.
    """

    tag: str
    b0: float = 1.0
    state_dim: int = 4
    a: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "tag", normalize_tag(self.tag))
        if self.b0 == 0 or not np.isfinite(self.b0):
            raise ValueError("b0 must be finite and nonzero")
        if self.state_dim < 1:
            raise ValueError("state_dim must be >= 1")

    @property
    def model_row(self) -> np.ndarray:
        """Known part of the n-th derivative as a row acting on ``xhat``."""
        row = np.zeros(self.state_dim)
        if self.tag == "model_based" and self.state_dim >= 2:
            row[-2] = self.a
        return row


@dataclass(frozen=True)
class AugmentedModel:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    E: np.ndarray
    L: np.ndarray

    @property
    def size(self) -> int:
        return self.A.shape[0]

    @property
    def injection(self) -> np.ndarray:
        """Column through which the learned feedforward enters: ``[Ebar0; 0]``."""
        v = np.zeros(self.size)
        v[-2] = 1.0
        return v

    @property
    def closed(self) -> np.ndarray:
        """Error-dynamics matrix ``A - L C``."""
        return self.A - np.outer(self.L, self.C[0])


def build_augmented(variant: EsoVariant, omega_o: float) -> AugmentedModel:
    """Shift-chain model with the extended state, plus gains placed at ``-omega_o``."""
    n = variant.state_dim
    a = np.diag(np.ones(n), 1)
    if variant.tag == "model_based" and n >= 2:
        a[n - 1, n - 2] += variant.a
    b = np.zeros((n + 1, 1))
    b[n - 1, 0] = variant.b0
    c = np.zeros((1, n + 1))
    c[0, 0] = 1.0
    e = np.zeros((n + 1, 1))
    e[n, 0] = 1.0
    gains = place_observer_gains(a, c, omega_o)
    return AugmentedModel(a, b, c, e, gains)


@dataclass(frozen=True)
class EsoState:
    xhat: np.ndarray
    dfhat: float

    @classmethod
    def zeros(cls, n: int) -> "EsoState":
        return cls(np.zeros(n), 0.0)

    @classmethod
    def from_vector(cls, z: np.ndarray) -> "EsoState":
        return cls(np.array(z[:-1], dtype=float), float(z[-1]))

    def as_vector(self) -> np.ndarray:
        return np.append(self.xhat, self.dfhat)


def eso_step(model: AugmentedModel, st: EsoState, u: float, y: float, fL: float, dt: float) -> EsoState:
    """One RK4 step of ``z' = A z + B u + L (y - C z) + [Ebar0; 0] fL`` with held inputs."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not np.isfinite(fL):
        raise SimulationError("learned feedforward is non-finite")
    drive = model.B[:, 0] * u + model.L * y + model.injection * fL
    closed = model.closed
    z = rk4(lambda s: closed @ s + drive, st.as_vector(), dt)
    if not np.all(np.isfinite(z)):
        raise SimulationError("observer state became non-finite")
    return EsoState.from_vector(z)


def observer_propagator(model: AugmentedModel, dt: float) -> Rk4Propagator:
    """Linear RK4 map for the stacked input ``[u, y, fL]``."""
    inputs = np.column_stack([model.B[:, 0], model.L, model.injection])
    return Rk4Propagator(model.closed, inputs, dt)


def total_disturbance(st: EsoState, fL: float) -> float:
    return fL + st.dfhat
