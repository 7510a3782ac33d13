import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lesolab.errors import ImproperTransferFunctionError, SimulationError
from lesolab.plant import (
    IntegratorConfig,
    NoiseSpec,
    NoiseState,
    PlantModel,
    Rk4Propagator,
    SignalSpec,
    build_from_transfer_function,
    build_two_mass,
    eval_signal,
    eval_signals,
    measure,
    rk4_step,
    two_mass_energy,
)

from oracles import rational_eval

TORSION_NUM = [4.6e4]
TORSION_DEN = [0.1032, 1812, 1683, 1.901, 1]


def free_two_mass(t):
    """Analytic response of the unit two-mass plant from x = [1, 0, 0, 0]."""
    w = math.sqrt(2.0)
    d = math.cos(w * t)
    dv = -w * math.sin(w * t)
    return np.array([0.5 + 0.5 * d, 0.5 - 0.5 * d, 0.5 * dv, -0.5 * dv])


def simulate_free(dt, horizon):
    plant = build_two_mass(1, 1, 1)
    x = np.array([1.0, 0, 0, 0])
    for _ in range(int(round(horizon / dt))):
        x = rk4_step(plant, x, 0.0, 0.0, 0.0, dt)
    return x


# -- two-mass ----------------------------------------------------------------

def test_two_mass_unit_parameters():
    p = build_two_mass(1, 1, 1, 0, 1)
    assert p.A[2].tolist() == [-1, 1, 0, 0]
    assert p.A[3].tolist() == [1, -1, 0, 0]
    assert p.C.ravel().tolist() == [0, 1, 0, 0]
    assert p.Bu.ravel().tolist() == [0, 0, 1, 0]
    assert np.array_equal(p.Bu, p.Bw1)
    assert p.Bw2.ravel().tolist() == [0, 0, 0, 1]


def test_two_mass_asymmetric():
    p = build_two_mass(1, 4, 2)
    assert p.A[2].tolist() == [-2, 2, 0, 0]
    assert p.A[3].tolist() == [0.5, -0.5, 0, 0]
    assert p.Bw2.ravel().tolist() == [0, 0, 0, 0.25]


@pytest.mark.parametrize("args", [(0, 1, 1), (1, -1, 1), (1, 1, 0)])
def test_two_mass_rejects_nonpositive(args):
    with pytest.raises(ValueError):
        build_two_mass(*args)


# -- transfer functions --------------------------------------------------------

def test_tf_integrator():
    p = build_from_transfer_function([1.0], [0.0, 1.0])
    assert p.A.tolist() == [[0.0]]
    assert p.Bu.ravel().tolist() == [1.0]
    assert p.C.ravel().tolist() == [1.0]


def test_tf_torsional_realisation():
    p = build_from_transfer_function(TORSION_NUM, TORSION_DEN)
    assert p.A[-1].tolist() == [-0.1032, -1812, -1683, -1.901]
    assert p.C.ravel().tolist() == [4.6e4, 0, 0, 0]
    assert np.array_equal(p.Bw1, p.Bu)
    assert not p.Bw2.any()


@pytest.mark.parametrize("omega", [0.1, 1.0, 10.0, 100.0])
def test_tf_frequency_response(omega):
    p = build_from_transfer_function(TORSION_NUM, TORSION_DEN)
    s = 1j * omega
    got = (p.C @ np.linalg.solve(s * np.eye(4) - p.A, p.Bu))[0, 0]
    assert abs(got - rational_eval(TORSION_NUM, TORSION_DEN, s)) < 1e-8


@pytest.mark.parametrize("num, den", [
    ([1.0, 1.0], [1.0, 1.0]),
    ([1.0], [1.0, 2.0]),
    ([1.0], [1.0]),
    ([1.0], [1.0] * 10),
])
def test_tf_rejects_improper(num, den):
    with pytest.raises(ImproperTransferFunctionError):
        build_from_transfer_function(num, den)


# -- integration -------------------------------------------------------------

def test_rk4_equilibrium():
    p = build_two_mass(1, 1, 1)
    assert not rk4_step(p, np.zeros(4), 0, 0, 0, 1e-3).any()


def test_rk4_double_integrator_exact():
    p = PlantModel([[0, 1], [0, 0]], [0, 1], [0, 1], [0, 0], [1, 0])
    x = rk4_step(p, np.zeros(2), 1.0, 0, 0, 1e-3)
    assert x[0] == pytest.approx(5e-7, rel=1e-12)
    assert x[1] == pytest.approx(1e-3, rel=1e-12)


def test_rk4_rejects_bad_dt():
    with pytest.raises(ValueError):
        rk4_step(build_two_mass(1, 1, 1), np.zeros(4), 0, 0, 0, 0.0)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_rk4_flags_non_finite():
    p = build_two_mass(1, 1, 1)
    with pytest.raises(SimulationError):
        rk4_step(p, np.array([np.inf, 0, 0, 0]), 0, 0, 0, 1e-3)


def test_integrator_config():
    assert IntegratorConfig().dt == 1e-3
    with pytest.raises(ValueError):
        IntegratorConfig(dt=0)
    with pytest.raises(ValueError):
        IntegratorConfig(method="euler")


def test_free_oscillation_energy_and_trajectory():
    x = simulate_free(1e-3, 10.0)
    e0 = two_mass_energy(np.array([1.0, 0, 0, 0]), 1, 1, 1)
    assert abs(two_mass_energy(x, 1, 1, 1) - e0) / e0 < 1e-6
    assert np.max(np.abs(x - free_two_mass(10.0))) < 1e-9


def test_convergence_order():
    errors = [np.max(np.abs(simulate_free(dt, 2.0) - free_two_mass(2.0))) for dt in (0.04, 0.02)]
    order = math.log2(errors[0] / errors[1])
    assert 3.8 <= order <= 4.2


def test_propagator_matches_stepper():
    p = build_two_mass(1, 2, 3)
    prop = Rk4Propagator(p.A, p.inputs, 1e-3)
    rng = np.random.default_rng(4)
    x = rng.standard_normal(4)
    v = rng.standard_normal(3)
    assert np.allclose(prop(x, v), rk4_step(p, x, *v, 1e-3), rtol=0, atol=1e-14)


# -- signals -----------------------------------------------------------------

def test_signal_examples():
    assert eval_signal(SignalSpec("sinusoid", amplitude=1, frequency=1), math.pi / 2) == pytest.approx(1.0)
    step = SignalSpec("step", start_time=110, final_value=1)
    assert eval_signal(step, 100) == 0.0
    assert eval_signal(step, 120) == 1.0
    trap = SignalSpec("trapezoid", start_time=1, ramp_duration=4, final_value=math.pi)
    assert eval_signal(trap, 3) == pytest.approx((3 - 1) / 4 * math.pi)
    assert eval_signal(trap, 10) == math.pi
    assert eval_signal(SignalSpec("constant", amplitude=2.5), 7) == 2.5
    assert eval_signal(SignalSpec(), 7) == 0.0


def test_signal_gating_and_sum():
    train = SignalSpec("sinusoid", amplitude=1, frequency=1, stop_time=100)
    step = SignalSpec("step", start_time=110, final_value=1)
    assert eval_signals([train, step], 105) == 0.0
    assert eval_signals([train, step], 50) == pytest.approx(math.sin(50))
    assert eval_signals([train, step], 111) == 1.0


@pytest.mark.parametrize("kwargs", [
    dict(kind="square"),
    dict(kind="sinusoid", frequency=-1),
    dict(kind="step", start_time=-1),
    dict(kind="trapezoid", ramp_duration=0),
    dict(kind="step", start_time=5, stop_time=5),
])
def test_signal_validation(kwargs):
    with pytest.raises(ValueError):
        SignalSpec(**kwargs)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 50), st.floats(0.1, 5), st.floats(0.1, 10))
def test_trapezoid_continuous(t, ramp, final):
    spec = SignalSpec("trapezoid", start_time=1.0, ramp_duration=ramp, final_value=final)
    h = 1e-7
    assert abs(eval_signal(spec, t + h) - eval_signal(spec, t)) <= final / ramp * h * 1.01 + 1e-12


# -- noise -------------------------------------------------------------------

def test_noise_off_is_exact():
    p = build_two_mass(1, 1, 1)
    x = np.array([0.3, 0.7, 0, 0])
    y, _ = measure(p, x, NoiseState(NoiseSpec(0.0)), 1.0)
    assert y == 0.7


def test_noise_sigma():
    assert NoiseSpec(1e-12, 0.01).sigma == pytest.approx(1e-5)


def test_noise_statistics_and_hold():
    ns = NoiseState(NoiseSpec(1e-12, 0.01, seed=9))
    samples = []
    for k in range(20000):
        t = k * 0.01
        v = ns.value(t)
        assert ns.value(t + 0.004) == v
        samples.append(v)
    assert np.std(samples) == pytest.approx(1e-5, rel=0.03)
    assert abs(np.mean(samples)) < 1e-6


def test_noise_reproducible():
    def draw(seed):
        ns = NoiseState(NoiseSpec(1e-12, 0.01, seed=seed))
        return [ns.value(k * 1e-3) for k in range(2000)]
    assert draw(3) == draw(3)
    assert draw(3) != draw(4)


@pytest.mark.parametrize("kwargs", [dict(power=-1), dict(sample_time=0), dict(seed=-1), dict(seed=2**64)])
def test_noise_validation(kwargs):
    with pytest.raises(ValueError):
        NoiseSpec(**kwargs)
