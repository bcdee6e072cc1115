import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import event_flight
from relkick.classical import (
    ClassicalState,
    default_sweep_grid,
    ensemble_energy,
    free_flight,
    initial_ensemble,
    kick,
    kinetic_energy,
    map_step,
    parameter_sweep,
    trajectory,
)
from relkick.core import PhysicalParams, RunConfig, kick_amplitude

REGULAR = PhysicalParams(1.0, 1.0, 0.0159, 100.0)
CHAOTIC = PhysicalParams(1.0, 1.0, 0.1751, 99.99327)
V_HALF = 1 / math.sqrt(3)  # p giving v = 0.5


def test_free_flight_zero_momentum():
    s = free_flight(ClassicalState(0.3, 0.0), 100.0, 1.0)
    assert (s.x, s.p, s.bounces) == (0.3, 0.0, 0)


def test_free_flight_inside_box():
    s = free_flight(ClassicalState(0.25, V_HALF), 1.0, 1.0)
    assert s.x == pytest.approx(0.75, abs=1e-15)
    assert s.p == V_HALF and s.bounces == 0


def test_free_flight_one_bounce_matches_event_oracle():
    s = free_flight(ClassicalState(0.75, V_HALF), 1.0, 1.0)
    x, p, b = event_flight(0.75, V_HALF, 1.0, 1.0)
    assert (x, p, b) == (pytest.approx(0.75, abs=1e-15), -V_HALF, 1)
    assert s.x == pytest.approx(x, abs=1e-12)
    assert s.p == p and s.bounces == b


def test_free_flight_rejects_negative_duration():
    with pytest.raises(ValueError):
        free_flight(ClassicalState(0.5, 0.1), -1.0, 1.0)


@given(x=st.floats(0, 1), p=st.floats(-50, 50), t=st.floats(0, 300))
def test_free_flight_matches_event_oracle(x, p, t):
    s = free_flight(ClassicalState(x, p), t, 1.0)
    ox, op, ob = event_flight(x, p, t, 1.0)
    assert 0.0 <= s.x <= 1.0
    assert abs(s.x - ox) <= 1e-9
    # parity of the bounce count decides the sign, even for p = 0
    assert s.p == op
    assert s.bounces % 2 == ob % 2


@given(x=st.floats(0, 2.5), p=st.floats(-20, 20), t=st.floats(0, 100))
def test_free_flight_time_reversal(x, p, t):
    L = 2.5
    s = free_flight(ClassicalState(x, p), t, L)
    back = free_flight(ClassicalState(s.x, -s.p), t, L)
    assert abs(back.x - x) <= 1e-12 * max(1.0, t)


def test_free_flight_composition():
    rng = np.random.default_rng(3)
    st0 = ClassicalState(rng.uniform(0, 1, 200), rng.normal(0, 3, 200))
    whole = map_step(st0, REGULAR)
    half = free_flight(free_flight(st0, 50.0, 1.0), 50.0, 1.0)
    split = kick(half, REGULAR)
    assert np.max(np.abs(whole.x - split.x)) <= 1e-12
    assert np.max(np.abs(whole.p - split.p)) <= 1e-12


def test_kick_examples():
    assert kick(ClassicalState(0.0, 0.3), REGULAR).p == 0.3
    kappa = kick_amplitude(REGULAR)
    assert kick(ClassicalState(0.25, 0.3), REGULAR).p == pytest.approx(0.3 + kappa, abs=1e-12)
    assert kick(ClassicalState(0.1, 0.0), REGULAR).p == pytest.approx(
        2 * math.pi * 0.0159 * 100 * math.sin(0.2 * math.pi), abs=1e-12)
    assert kick(ClassicalState(0.1, 0.0), REGULAR).x == 0.1


def test_map_step_matches_event_oracle():
    x, p, _ = event_flight(0.5, 0.01, REGULAR.kick_period, 1.0)
    p += kick_amplitude(REGULAR) * math.sin(2 * math.pi * x)
    s = map_step(ClassicalState(0.5, 0.01), REGULAR)
    assert s.x == pytest.approx(x, abs=1e-9)
    assert s.p == pytest.approx(p, abs=1e-9)


def test_map_step_free_conserves_speed():
    free = PhysicalParams(1.0, 1.0, 0.0, 37.3)
    s = ClassicalState(0.2, 1.7)
    for _ in range(100):
        s = map_step(s, free)
        assert abs(s.p) == 1.7


def test_trajectory_zero_kick_fixed_point():
    free = PhysicalParams(1.0, 1.0, 0.0, 10.0)
    tr = trajectory(ClassicalState(0.4, 0.0), free, 20)
    assert tr.x.shape == (20,)
    assert np.all(tr.x == 0.4) and np.all(tr.p == 0.0)


def test_trajectory_agrees_with_map_step():
    s = ClassicalState(0.31, 0.02)
    tr = trajectory(s, CHAOTIC, 30)
    for k in range(30):
        s = map_step(s, CHAOTIC)
        assert tr.x[k] == pytest.approx(s.x, abs=1e-12)
        assert tr.p[k] == pytest.approx(s.p, rel=1e-12, abs=1e-12)
        assert tr.bounces[k] == s.bounces


def test_trajectory_containment_ensemble():
    ens = initial_ensemble(CHAOTIC, RunConfig(seed=1, ensemble_size=50))
    tr = trajectory(ens, CHAOTIC, 200)
    assert tr.x.shape == (200, 50)
    assert tr.x.min() >= 0.0 and tr.x.max() <= 1.0
    assert np.all(np.diff(tr.bounces, axis=0) >= 0)


def test_regular_portrait_stays_confined_chaotic_spreads():
    # regular vs chaotic parameters from one seeded set of orbits: the chaotic
    # case reaches far larger momenta.
    ens = initial_ensemble(REGULAR, RunConfig(seed=5, ensemble_size=20))
    reg = trajectory(ens, REGULAR, 300)
    cha = trajectory(ens, CHAOTIC, 300)
    assert np.abs(cha.p).max() > 5 * np.abs(reg.p).max()


def test_kinetic_energy_small_p_accurate():
    assert kinetic_energy(1e-9) == pytest.approx(0.5e-18, rel=1e-12)
    assert kinetic_energy(3.0) == pytest.approx(math.sqrt(10) - 1, rel=1e-15)


def test_ensemble_energy_free_constant():
    free = PhysicalParams(1.0, 1.0, 0.0, 100.0)
    series = ensemble_energy(free, RunConfig(seed=2, ensemble_size=500, n_kicks=10_000))
    drift = np.max(np.abs(series.mean - series.initial_mean)) / series.initial_mean
    assert drift <= 1e-12
    assert np.all(series.mean >= 0)


def test_ensemble_energy_shapes_and_seed():
    cfg = RunConfig(seed=11, ensemble_size=100, n_kicks=50)
    a = ensemble_energy(REGULAR, cfg)
    b = ensemble_energy(REGULAR, cfg)
    assert a.mean.shape == a.var.shape == (50,)
    assert list(a.kicks[:3]) == [1, 2, 3]
    assert a.mean.tobytes() == b.mean.tobytes()
    c = ensemble_energy(REGULAR, RunConfig(seed=12, ensemble_size=100, n_kicks=50))
    assert c.mean.tobytes() != a.mean.tobytes()


def test_sweep_single_free_cell_equals_initial_energy():
    cfg = RunConfig(seed=4, ensemble_size=100, n_kicks=20)
    grid = parameter_sweep([0.0], [12.0], REGULAR, cfg)
    init = initial_ensemble(REGULAR, cfg)
    assert grid.shape == (1, 1)
    assert grid[0, 0] == pytest.approx(np.mean(kinetic_energy(init.p)), rel=1e-13)


def test_sweep_deterministic_and_worker_independent():
    cfg = RunConfig(seed=9, ensemble_size=64, n_kicks=60)
    eps, Ts = default_sweep_grid(3, 4, 0.2, 200.0)
    a = parameter_sweep(eps, Ts, REGULAR, cfg, workers=1)
    b = parameter_sweep(eps, Ts, REGULAR, cfg, workers=1)
    c = parameter_sweep(eps, Ts, REGULAR, cfg, workers=3)
    assert a.shape == (3, 4)
    assert a.tobytes() == b.tobytes() == c.tobytes()


def test_sweep_cell_matches_direct_run():
    cfg = RunConfig(seed=9, ensemble_size=64, n_kicks=60)
    grid = parameter_sweep([0.1751], [99.99327], REGULAR, cfg)
    assert grid[0, 0] == ensemble_energy(CHAOTIC, cfg).mean[-1]


def test_default_sweep_grid():
    eps, Ts = default_sweep_grid()
    assert len(eps) * len(Ts) == 4096
    assert eps[0] > 0 and eps[-1] == pytest.approx(0.2) and Ts[-1] == pytest.approx(200.0)


@settings(max_examples=50)
@given(x=st.floats(0, 1), p=st.floats(-30, 30), eps=st.floats(0, 0.3), T=st.floats(0.1, 150))
def test_map_step_containment(x, p, eps, T):
    s = map_step(ClassicalState(x, p), PhysicalParams(1.0, 1.0, eps, T))
    assert 0.0 <= s.x <= 1.0
    assert abs(s.speed) < 1.0 or not math.isfinite(s.p)
