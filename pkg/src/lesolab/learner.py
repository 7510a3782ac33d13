"""Online linear regression of the total disturbance over a FIFO batch."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DivergenceError

DIVERGENCE_NORM = 1e12


@dataclass(frozen=True)
class LearnerConfig:
    """Batch gradient-descent settings.

    Attributes:
        alpha: Learning rate applied to the length-normalised gradient.
        batch_capacity: FIFO size; also the default warmup length.
        iterations_per_step: Gradient iterations per control cycle.
        warmup: Cycles with the feedforward held at zero (defaults to batch_capacity).
        input_gain_floor: Lower bound on ``(b0 + theta_u) / b0``; None disables
            the projection.
        freeze_time: Simulation time after which theta is no longer updated.
    """

    alpha: float = 1e-3
    batch_capacity: int = 500
    iterations_per_step: int = 1
    warmup: int | None = None
    input_gain_floor: float | None = 0.6
    freeze_time: float = float("inf")

    def __post_init__(self):
        if self.alpha < 0 or not np.isfinite(self.alpha):
            raise ValueError("alpha must be finite and >= 0")
        if self.batch_capacity < 1:
            raise ValueError("batch_capacity must be >= 1")
        if self.iterations_per_step < 1:
            raise ValueError("iterations_per_step must be >= 1")
        if self.warmup is None:
            object.__setattr__(self, "warmup", self.batch_capacity)
        elif self.warmup < 0:
            raise ValueError("warmup must be >= 0")


def featurize(xhat, u: float) -> np.ndarray:
    """Feature vector ``[xhat_1 .. xhat_n, u, 1]``."""
    x = np.asarray(xhat, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise DimensionError(f"xhat must be a non-empty vector, got shape {x.shape}")
    return np.concatenate([x, [u, 1.0]])


class RingBatch:
    """Fixed-capacity FIFO of (features, residual, learner output) triples.

    Storage is a circular buffer; :meth:`ordered` returns oldest-first views.
    Cost and gradient are order-independent, so the loop works on raw storage.
    """

    def __init__(self, capacity: int, n_features: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.inputs = np.zeros((capacity, n_features))
        self.residuals = np.zeros(capacity)
        self.learner_outputs = np.zeros(capacity)
        self._head = 0
        self._len = 0

    def __len__(self) -> int:
        return self._len

    @property
    def full(self) -> bool:
        return self._len == self.capacity

    def push(self, feat: np.ndarray, dfhat: float, fL: float) -> "RingBatch":
        self.inputs[self._head] = feat
        self.residuals[self._head] = dfhat
        self.learner_outputs[self._head] = fL
        self._head = (self._head + 1) % self.capacity
        self._len = min(self._len + 1, self.capacity)
        return self

    def _live(self) -> slice:
        return slice(0, self._len)

    def live(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Stored arrays restricted to filled rows (storage order)."""
        s = self._live()
        return self.inputs[s], self.residuals[s], self.learner_outputs[s]

    def ordered(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Copies of the stored triples, oldest first."""
        if self.full:
            idx = (np.arange(self.capacity) + self._head) % self.capacity
        else:
            idx = np.arange(self._len)
        return self.inputs[idx].copy(), self.residuals[idx].copy(), self.learner_outputs[idx].copy()

    def targets(self) -> np.ndarray:
        _, res, out = self.live()
        return out + res


def push_sample(batch: RingBatch, feat: np.ndarray, dfhat: float, fL: float) -> RingBatch:
    return batch.push(feat, dfhat, fL)


@dataclass
class LinearModel:
    theta: np.ndarray

    @classmethod
    def zeros(cls, n_features: int) -> "LinearModel":
        return cls(np.zeros(n_features))


def _require(batch: RingBatch) -> tuple[np.ndarray, np.ndarray]:
    if len(batch) == 0:
        raise ValueError("batch is empty")
    phi, _, _ = batch.live()
    return phi, batch.targets()


def cost(model: LinearModel, batch: RingBatch) -> float:
    """Half sum of squared errors against targets ``F_L + dF``."""
    phi, target = _require(batch)
    res = phi @ model.theta - target
    return 0.5 * float(res @ res)


def gradient(model: LinearModel, batch: RingBatch) -> np.ndarray:
    """Gradient of :func:`cost` with respect to theta (unnormalised)."""
    phi, target = _require(batch)
    return phi.T @ (phi @ model.theta - target)


def gradient_step(model: LinearModel, batch: RingBatch, cfg: LearnerConfig) -> LinearModel:
    """``theta -= alpha * grad / len`` repeated ``iterations_per_step`` times.

    Raises:
        DivergenceError: if ``|theta|`` exceeds 1e12 or turns non-finite.
    """
    phi, target = _require(batch)
    theta = model.theta
    scale = cfg.alpha / len(batch)
    for _ in range(cfg.iterations_per_step):
        theta = theta - scale * (phi.T @ (phi @ theta - target))
    norm = float(np.linalg.norm(theta))
    if not np.isfinite(norm) or norm > DIVERGENCE_NORM:
        raise DivergenceError(f"learner diverged (|theta| = {norm:.3g})")
    return LinearModel(theta)


def project_input_gain(model: LinearModel, b0: float, floor: float | None) -> LinearModel:
    """Keep the effective input gain ``b0 + theta_u`` at least ``floor * b0``.

    ``theta_u`` is the coefficient on u. When the learned input gain drops
    below about half the nominal one, the ``f_L`` cancellation turns the loop
    algebraically unstable; the projection keeps it on the safe side.
    """
    if floor is None:
        return model
    lo = (floor - 1.0) * b0
    theta_u = model.theta[-2]
    if (b0 > 0 and theta_u < lo) or (b0 < 0 and theta_u > lo):
        theta = model.theta.copy()
        theta[-2] = lo
        return LinearModel(theta)
    return model


def predict(model: LinearModel, feat: np.ndarray) -> float:
    feat = np.asarray(feat, dtype=float)
    if feat.shape != model.theta.shape:
        raise DimensionError(f"feature length {feat.size} != theta length {model.theta.size}")
    return float(model.theta @ feat)


def refresh_batch_outputs(model: LinearModel, batch: RingBatch) -> RingBatch:
    """Recompute stored learner outputs with the current theta."""
    s = batch._live()
    batch.learner_outputs[s] = batch.inputs[s] @ model.theta
    return batch


class OnlineLearner:
    """One learner instance driven once per control cycle.

    Each cycle pushes the newest sample, takes gradient iterations once the
    warmup has elapsed (and before ``freeze_time``), refreshes the stored
    learner outputs and predicts the feedforward for the current features.
    """

    def __init__(self, cfg: LearnerConfig, state_dim: int, b0: float):
        self.cfg = cfg
        self.b0 = b0
        self.batch = RingBatch(cfg.batch_capacity, state_dim + 2)
        self.model = LinearModel.zeros(state_dim + 2)
        self.cycles = 0
        self.fL = 0.0
        self.cost = 0.0

    @property
    def theta(self) -> np.ndarray:
        return self.model.theta

    def cycle(self, feat: np.ndarray, dfhat: float, t: float) -> float:
        # the stored output is the feedforward that was active while dfhat formed
        self.batch.push(feat, dfhat, self.fL)
        self.cycles += 1
        self.cost = cost(self.model, self.batch)
        if self.cycles <= self.cfg.warmup:
            self.fL = 0.0
            return self.fL
        if t < self.cfg.freeze_time:
            model = gradient_step(self.model, self.batch, self.cfg)
            self.model = project_input_gain(model, self.b0, self.cfg.input_gain_floor)
            refresh_batch_outputs(self.model, self.batch)
        self.fL = predict(self.model, feat)
        return self.fL
