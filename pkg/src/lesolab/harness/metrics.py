"""Step-response and tracking metrics computed from a trace."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import NoStepError
from .trace import SimTrace


@dataclass(frozen=True)
class Metrics:
    """Step and tracking figures.

    Attributes:
        overshoot: Peak excursion past the final value as a fraction of the step.
        settling_time: Seconds from the step until the output stays inside the
            band; ``inf`` when it never settles within the analysed range.
        rms_tracking_error: RMS of ``y - r`` over the window (nan without a window).
        peak_control: Largest ``|u|`` over the analysed step range.
    """

    overshoot: float
    settling_time: float
    rms_tracking_error: float
    peak_control: float

    @property
    def settled(self) -> bool:
        return math.isfinite(self.settling_time)

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def step_response(t, y, r, step_time: float, step_end: float | None = None, band: float = 0.02):
    """Overshoot, settling time and peak index range for a step at ``step_time``.

    The final value is the reference at the end of the analysed range, so
    ramps (trapezoids) are measured against their plateau.
    """
    t = np.asarray(t)
    i0 = int(np.searchsorted(t, step_time - 1e-9 * max(1.0, abs(step_time))))
    i1 = len(t) if step_end is None else int(np.searchsorted(t, step_end))
    if i0 <= 0 or i0 >= i1:
        raise NoStepError(f"no samples around a step at t={step_time}")
    r_final = float(r[i1 - 1])
    amp = r_final - float(r[i0 - 1])
    if abs(amp) <= 1e-12 * max(1.0, abs(r_final)):
        raise NoStepError(f"reference does not change at t={step_time}")
    err = (np.asarray(y[i0:i1]) - r_final) * math.copysign(1.0, amp)
    overshoot = max(0.0, float(err.max()) / abs(amp))
    outside = np.nonzero(np.abs(err) > band * abs(amp))[0]
    if outside.size == 0:
        settling = 0.0
    elif outside[-1] + 1 >= err.size:
        settling = math.inf
    else:
        settling = float(t[i0 + outside[-1] + 1] - step_time)
    return overshoot, settling, (i0, i1)


def compute_metrics(trace: SimTrace, step_time: float, window: tuple[float, float] | None = None,
                    band: float = 0.02, step_end: float | None = None) -> Metrics:
    """Metrics for a trace holding a reference step at ``step_time``.

    Args:
        trace: Simulated loop.
        step_time: When the reference step (or ramp) begins.
        window: ``(start, end)`` for the RMS tracking error.
        band: Settling band as a fraction of the step amplitude.
        step_end: Where the step analysis stops (e.g. before a disturbance starts).

    Raises:
        NoStepError: if the reference does not change at ``step_time``.
    """
    if not band > 0:
        raise ValueError("band must be positive")
    overshoot, settling, (i0, i1) = step_response(trace.t, trace.y, trace.r, step_time, step_end, band)
    peak = float(np.max(np.abs(trace.u[i0:i1])))
    rms = rms_error(trace, window) if window is not None else math.nan
    return Metrics(overshoot, settling, rms, peak)


def rms_error(trace: SimTrace, window: tuple[float, float]) -> float:
    lo, hi = window
    if hi <= lo:
        raise ValueError("window end must follow its start")
    mask = (trace.t >= lo) & (trace.t <= hi)
    if not mask.any():
        raise ValueError(f"window {window} holds no samples")
    e = trace.y[mask] - trace.r[mask]
    return float(np.sqrt(np.mean(e * e)))


def metrics_for(trace: SimTrace, spec) -> Metrics:
    """Metrics using a scenario's ``MetricsSpec``."""
    window = None
    if spec.window_start is not None and spec.window_end is not None:
        window = (spec.window_start, spec.window_end)
    if spec.step_time is None:
        rms = rms_error(trace, window) if window else math.nan
        return Metrics(math.nan, math.nan, rms, float(np.max(np.abs(trace.u))) if len(trace) else math.nan)
    return compute_metrics(trace, spec.step_time, window, spec.band, spec.step_end)
