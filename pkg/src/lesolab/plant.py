"""Benchmark plants, signal generators, measurement noise and the RK4 stepper."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, ImproperTransferFunctionError, SimulationError
from .linalg import StateSpace, as_column, as_matrix, companion

SIGNAL_KINDS = ("zero", "constant", "step", "sinusoid", "trapezoid")


@dataclass(frozen=True)
class PlantModel:
    """Linear plant ``x' = A x + Bu u + Bw1 w1 + Bw2 w2``, ``y = C x``."""

    A: np.ndarray
    Bu: np.ndarray
    Bw1: np.ndarray
    Bw2: np.ndarray
    C: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        a = as_matrix(self.A, name="A")
        n = a.shape[0]
        if a.shape != (n, n):
            raise DimensionError(f"A must be square, got {a.shape}")
        object.__setattr__(self, "A", a)
        for name in ("Bu", "Bw1", "Bw2"):
            object.__setattr__(self, name, as_column(getattr(self, name), n, name))
        object.__setattr__(self, "C", as_matrix(np.reshape(self.C, (1, -1)), 1, n, "C"))
        if self.labels and len(self.labels) != n:
            raise DimensionError("one label per state expected")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def inputs(self) -> np.ndarray:
        """n x 3 input matrix for the stacked input ``[u, w1, w2]``."""
        return np.hstack([self.Bu, self.Bw1, self.Bw2])

    def derivative(self, x: np.ndarray, u: float, w1: float = 0.0, w2: float = 0.0) -> np.ndarray:
        return self.A @ x + self.Bu[:, 0] * u + self.Bw1[:, 0] * w1 + self.Bw2[:, 0] * w2

    def output(self, x: np.ndarray) -> float:
        return float(self.C[0] @ x)

    def nominal(self) -> StateSpace:
        """Nominal description with the disturbance lumped into the control channel."""
        return StateSpace(self.A, self.Bu, self.C, self.Bu)


def build_two_mass(m1: float, m2: float, k: float, c1: float = 0.0, c2: float = 1.0) -> PlantModel:
    """Two masses joined by a spring; force ``u + w1`` on m1 and ``w2`` on m2.

    State order is positions then velocities: ``[x1, x2, v1, v2]``.
    """
    if m1 <= 0 or m2 <= 0 or k <= 0:
        raise ValueError(f"m1, m2, k must be positive (got {m1}, {m2}, {k})")
    a = np.array([
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-k / m1, k / m1, 0.0, 0.0],
        [k / m2, -k / m2, 0.0, 0.0],
    ])
    bu = [0.0, 0.0, 1.0 / m1, 0.0]
    bw2 = [0.0, 0.0, 0.0, 1.0 / m2]
    return PlantModel(a, bu, bu, bw2, [c1, c2, 0.0, 0.0], labels=("m", "m", "m/s", "m/s"))


def two_mass_energy(x: np.ndarray, m1: float, m2: float, k: float) -> float:
    """Kinetic plus spring energy of the two-mass state."""
    return 0.5 * m1 * x[2] ** 2 + 0.5 * m2 * x[3] ** 2 + 0.5 * k * (x[0] - x[1]) ** 2


def build_from_transfer_function(numerator: Sequence[float], denominator: Sequence[float]) -> PlantModel:
    """Controllable-canonical realisation of ``num(s) / den(s)``.

    Both polynomials use ascending coefficients and ``den`` must be monic.
    The disturbance ``w1`` enters through the control channel; ``w2`` is unused.
    """
    num = np.trim_zeros(np.asarray(numerator, dtype=float), "b")
    den = np.trim_zeros(np.asarray(denominator, dtype=float), "b")
    n = den.size - 1
    if n < 1 or n > 8:
        raise ImproperTransferFunctionError(f"denominator degree must be 1..8, got {n}")
    if den[-1] != 1.0:
        raise ImproperTransferFunctionError("denominator must be monic")
    if num.size > n:
        raise ImproperTransferFunctionError("transfer function must be strictly proper")
    a = companion(den)
    bu = np.zeros(n)
    bu[-1] = 1.0
    c = np.zeros(n)
    c[: num.size] = num
    labels = tuple("rad" if i == 0 else f"rad/s^{i}" for i in range(n))
    return PlantModel(a, bu, bu, np.zeros(n), c, labels=labels)


# -- integration -------------------------------------------------------------

@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    method: str = "rk4"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.method != "rk4":
            raise ValueError(f"unsupported integrator {self.method!r}")


def rk4(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step of an autonomous vector field."""
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_step(plant: PlantModel, x, u: float, w1: float, w2: float, dt: float) -> np.ndarray:
    """Advance the plant by ``dt`` with inputs held constant over the step."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    x = np.asarray(x, dtype=float)
    out = rk4(lambda s: plant.derivative(s, u, w1, w2), x, dt)
    if not np.all(np.isfinite(out)):
        raise SimulationError("plant state became non-finite")
    return out


class Rk4Propagator:
    """Precomputed RK4 map for a linear system with held inputs.

    For ``x' = A x + B v`` with ``v`` constant over the step, one classical RK4
    step collapses to ``x+ = Phi x + Gamma v`` with the degree-4 Taylor
    truncations of the exponential. Used by the simulation loop; agrees with
    :func:`rk4_step` to rounding.
    """

    def __init__(self, A: np.ndarray, B: np.ndarray, dt: float):
        a = np.asarray(A, dtype=float)
        b = np.asarray(B, dtype=float)
        if b.ndim == 1:
            b = b[:, None]
        h = dt
        eye = np.eye(a.shape[0])
        a2 = a @ a
        a3 = a2 @ a
        self.Phi = eye + h * a + h**2 / 2 * a2 + h**3 / 6 * a3 + h**4 / 24 * (a3 @ a)
        self.Gamma = (h * eye + h**2 / 2 * a + h**3 / 6 * a2 + h**4 / 24 * a3) @ b
        self.dt = dt

    def __call__(self, x: np.ndarray, v) -> np.ndarray:
        return self.Phi @ x + self.Gamma @ v


# -- signals -----------------------------------------------------------------

@dataclass(frozen=True)
class SignalSpec:
    """Scalar test signal.

    ``start_time``/``stop_time`` gate every kind: the signal is zero before
    ``start_time`` and from ``stop_time`` on. For ``step`` and ``trapezoid``
    the level is ``final_value``; the other kinds use ``amplitude``.
    """

    kind: str = "zero"
    amplitude: float = 0.0
    frequency: float = 0.0
    phase: float = 0.0
    start_time: float = 0.0
    ramp_duration: float = 4.0
    final_value: float = 0.0
    stop_time: float = math.inf

    def __post_init__(self):
        if self.kind not in SIGNAL_KINDS:
            raise ValueError(f"unknown signal kind {self.kind!r}")
        if self.frequency < 0:
            raise ValueError("frequency must be >= 0")
        if self.start_time < 0:
            raise ValueError("start_time must be >= 0")
        if self.kind == "trapezoid" and not self.ramp_duration > 0:
            raise ValueError("trapezoid needs ramp_duration > 0")
        if self.stop_time <= self.start_time:
            raise ValueError("stop_time must come after start_time")


def eval_signal(spec: SignalSpec, t: float) -> float:
    if t < spec.start_time or t >= spec.stop_time:
        return 0.0
    kind = spec.kind
    if kind == "zero":
        return 0.0
    if kind == "constant":
        return spec.amplitude
    if kind == "step":
        return spec.final_value
    if kind == "sinusoid":
        return spec.amplitude * math.sin(spec.frequency * t + spec.phase)
    # trapezoid: ramp from zero, then hold
    frac = (t - spec.start_time) / spec.ramp_duration
    return spec.final_value * min(frac, 1.0)


def eval_signals(specs: Sequence[SignalSpec], t: float) -> float:
    """Sum of several gated signals (a reference made of phases)."""
    return sum(eval_signal(s, t) for s in specs)


# -- measurement -------------------------------------------------------------

@dataclass(frozen=True)
class NoiseSpec:
    """Band-limited white noise: zero-order-held Gaussian with variance power/sample_time."""

    power: float = 0.0
    sample_time: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.power < 0:
            raise ValueError("noise power must be >= 0")
        if not self.sample_time > 0:
            raise ValueError("sample_time must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.power / self.sample_time)


@dataclass
class NoiseState:
    """Generator plus the currently held sample.

    Draws come from numpy's PCG64 seeded with ``NoiseSpec.seed``; a new sample
    is drawn the first time each ``sample_time`` interval is visited.
    """

    spec: NoiseSpec
    rng: np.random.Generator = field(init=False)
    held: float = 0.0
    slot: int = -1

    def __post_init__(self):
        self.rng = np.random.Generator(np.random.PCG64(self.spec.seed))

    def value(self, t: float) -> float:
        if self.spec.power == 0.0:
            return 0.0
        # small guard so t = k*sample_time built from k*dt lands in slot k
        slot = int(math.floor(t / self.spec.sample_time + 1e-9))
        if slot != self.slot:
            self.held = self.spec.sigma * float(self.rng.standard_normal())
            self.slot = slot
        return self.held


def measure(plant: PlantModel, x, noise: NoiseState, t: float) -> tuple[float, NoiseState]:
    """Noisy output ``C x + e(t)``; returns the (advanced) noise state alongside."""
    y = plant.output(np.asarray(x, dtype=float)) + noise.value(t)
    return y, noise
