"""Closed-loop simulation: plant, observer, learner and controller stepped in lockstep."""

from __future__ import annotations

import logging
import math
from dataclasses import replace

import numpy as np

from ..control import ControllerGains, control_law, saturate
from ..eso import build_augmented, observer_propagator
from ..errors import DivergenceError, SimulationError
from ..learner import OnlineLearner
from ..plant import NoiseState, Rk4Propagator, eval_signals
from .scenario import Scenario
from .trace import SimTrace, default_meta

log = logging.getLogger(__name__)


def run_scenario(sc: Scenario) -> SimTrace:
    """Simulate ``sc`` and return the full trace.

    Per cycle k (time t_k = k dt):

    1. advance the observer over [t_{k-1}, t_k] with the inputs held last cycle;
    2. learner: push ``([xhat, u_{k-1}, 1], dfhat)``, gradient step, refresh, predict ``fL``;
    3. ``fhat = fL + dfhat`` and the control law;
    4. advance the plant over [t_k, t_{k+1}] with ``u``, ``w1(t_k)``, ``w2(t_k)`` held.

    The measurement ``y_k`` taken at t_k feeds the next observer step. A
    non-finite signal or a diverging learner ends the run early; the partial
    trace comes back with ``meta["status"]`` describing the failure.
    """
    plant = sc.plant.build()
    n = plant.n
    variant = sc.variant()
    model = build_augmented(variant, sc.observer.omega_o)
    model_row = variant.model_row if variant.tag == "model_based" else None
    gains = ControllerGains.build(sc.controller.omega_c, sc.controller.b0, n, model_row, sc.controller.clamp)

    plant_prop = Rk4Propagator(plant.A, plant.inputs, sc.dt)
    obs_prop = observer_propagator(model, sc.dt)
    noise = NoiseState(replace(sc.noise, seed=sc.seed))
    learner = OnlineLearner(sc.learner, n, sc.controller.b0) if variant.tag == "learning" else None

    steps = sc.steps
    tr = SimTrace.allocate(steps, n, default_meta(
        sc.digest(), sc.seed, scenario=sc.name, variant=variant.tag, omega_o=sc.observer.omega_o))
    c_row = plant.C[0]
    x = np.zeros(n)
    z = np.zeros(n + 1)
    u = 0.0
    y = 0.0
    fL = 0.0
    clamped = 0
    theta = np.zeros(n + 2)
    cost = 0.0
    status = "ok"
    k = 0
    try:
        for k in range(steps):
            t = k * sc.dt
            if k:
                z = obs_prop(z, np.array([u, y, fL]))
            xhat = z[:n]
            dfhat = float(z[n])
            y = float(c_row @ x) + noise.value(t)

            if learner is not None:
                fL = learner.cycle(np.concatenate([xhat, (u, 1.0)]), dfhat, t)
                theta = learner.theta
                cost = learner.cost
            fhat = fL + dfhat

            r = eval_signals(sc.reference, t)
            u, hit = saturate(gains, control_law(gains, r, xhat, fhat))
            clamped += hit
            if not (math.isfinite(u) and math.isfinite(y)):
                raise SimulationError(f"non-finite signal at t={t:.6g}")

            tr.t[k] = t
            tr.r[k] = r
            tr.y[k] = y
            tr.u[k] = u
            tr.x[k] = x
            tr.xhat[k] = xhat
            tr.dfhat[k] = dfhat
            tr.fL[k] = fL
            tr.fhat[k] = fhat
            tr.theta[k] = theta
            tr.cost[k] = cost

            w1 = eval_signals(sc.w1, t)
            w2 = eval_signals(sc.w2, t)
            x = plant_prop(x, np.array([u, w1, w2]))
    except (SimulationError, DivergenceError) as exc:
        status = f"failed: {exc}"
        log.warning("scenario %s stopped at step %d: %s", sc.name, k, exc)
        tr = tr.truncate(k)
    tr.meta["status"] = status
    if sc.controller.clamp is not None:
        tr.meta["clamped_steps"] = str(clamped)
    return tr
