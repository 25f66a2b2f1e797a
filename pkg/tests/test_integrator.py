import numpy as np
import pytest
from hypothesis import given, strategies as st

from excitable import NumericalBlowup, SimParams, advance, run, step
from excitable.integrator import Every
from excitable.lattice import DomainMask, new_state
from excitable.metrics import Termination
from excitable.stimulus import StimulusSpec, apply

from oracles import random_mask, reference_run


def test_defaults():
    p = SimParams()
    assert (p.epsilon, p.f, p.q, p.dt, p.dx) == (0.02, 1.4, 0.002, 0.001, 0.25)


@pytest.mark.parametrize("field,value", [("dt", 0.0), ("epsilon", -1.0), ("q", 0.0),
                                         ("dx", 0.0), ("du", -0.1), ("f", 0.0),
                                         ("phi", -0.01), ("max_steps", -1),
                                         ("dt", float("nan"))])
def test_invalid_params_name_field(field, value):
    with pytest.raises(ValueError, match=field):
        SimParams(**{field: value})


def test_all_street_free_mask_only_counts_step():
    s = new_state(DomainMask(np.zeros((4, 4), bool)))
    step(s, SimParams())
    assert s.step == 1 and not s.u.any() and not s.v.any()


def test_single_node_update():
    ex = np.zeros((1, 1), bool)
    ex[0, 0] = True
    s = new_state(DomainMask(ex))
    step(s, SimParams(phi=0.07))
    assert s.u[0, 0] == pytest.approx(0.0035, abs=1e-15)
    assert s.v[0, 0] == 0.0


def test_matches_reference_short():
    rng = np.random.default_rng(11)
    ex = random_mask(rng, (24, 24))
    s = new_state(DomainMask(ex))
    s.u[ex] = rng.random(ex.sum())
    s.v[ex] = 0.5 * rng.random(ex.sum())
    p = SimParams(phi=0.06, du=1.0)
    u_ref, v_ref = reference_run(s.u, s.v, ex, p, 300)
    advance(s, p, 300)
    assert np.max(np.abs(s.u - u_ref)) <= 1e-12
    assert np.max(np.abs(s.v - v_ref)) <= 1e-12


def test_split_advance_equals_single_call():
    rng = np.random.default_rng(5)
    ex = random_mask(rng, (16, 16))
    a = new_state(DomainMask(ex))
    a.u[ex] = rng.random(ex.sum())
    b = a.copy()
    p = SimParams()
    advance(a, p, 101)
    for n in (1, 50, 49, 1):
        advance(b, p, n)
    assert np.array_equal(a.u, b.u) and np.array_equal(a.v, b.v)
    assert a.step == b.step == 101


def test_activator_never_negative():
    s = new_state(DomainMask.full(30, 30))
    apply(s, StimulusSpec((5, 5), 10))
    advance(s, SimParams(phi=0.07), 3000)
    assert s.u.min() >= 0.0


def test_blowup_detected():
    s = new_state(DomainMask.full(8, 8))
    s.v[4, 4] = np.inf  # drives the reaction term to +inf on the first step
    with pytest.raises(NumericalBlowup) as info:
        advance(s, SimParams(), 50)
    assert info.value.step == 1


def test_rest_state_is_fixed_point_for_zero_phi():
    s = new_state(DomainMask.full(10, 10))
    advance(s, SimParams(phi=0.0), 500)
    assert not s.u.any() and not s.v.any()


@given(st.floats(0.0, 0.1), st.integers(0, 2**16))
def test_bounded_and_street_free_nodes_stay_zero(phi, seed):
    rng = np.random.default_rng(seed)
    ex = random_mask(rng, (12, 12))
    s = new_state(DomainMask(ex))
    s.u[ex] = rng.random(ex.sum())
    advance(s, SimParams(phi=phi), 400)
    assert np.isfinite(s.u).all() and np.isfinite(s.v).all()
    assert not s.u[~ex].any() and not s.v[~ex].any()
    assert s.u.max() <= 1.0 + 1e-9 and s.u.min() >= 0.0


@given(st.integers(0, 2**16))
def test_deterministic(seed):
    rng = np.random.default_rng(seed)
    ex = random_mask(rng, (10, 10))
    a = new_state(DomainMask(ex))
    a.u[ex] = rng.random(ex.sum())
    b = a.copy()
    p = SimParams(phi=0.06)
    advance(a, p, 200)
    advance(b, p, 200)
    assert np.array_equal(a.u, b.u) and np.array_equal(a.v, b.v)


def test_refractory_tail_blocks_immediate_reexcitation():
    p = SimParams(phi=0.05)
    s = new_state(DomainMask.full(12, 200))
    apply(s, StimulusSpec((0, 0), 12))
    advance(s, p, 4000)
    front = int(np.argmax(s.u[6]))
    tail = front - 5
    assert s.v[6, tail] > 0.1 and s.u[6, tail] < 0.1

    def kick(state):
        state.u[:, tail - 2:tail + 3] = 1.0
        advance(state, p, 1200)
        return state.u[6, tail - 25:tail - 5].max()

    fresh = new_state(DomainMask.full(12, 200))
    assert kick(fresh) > 0.5  # resting medium: the kick launches a westward pulse
    assert kick(s) < 0.1  # refractory tail: nothing propagates backwards


def test_run_max_steps_zero_is_step_cap():
    s = new_state(DomainMask.full(20, 20))
    apply(s, StimulusSpec((5, 5), 5))
    rec = run(s, SimParams(max_steps=0))
    assert rec.termination == Termination.STEP_CAP
    assert rec.steps_taken == 0 and rec.sample_steps == [0]


def test_run_extinguished_when_nothing_excited():
    rec = run(new_state(DomainMask.full(10, 10)), SimParams())
    assert rec.termination == Termination.EXTINGUISHED and rec.steps_taken == 0


def test_run_full_coverage_wins_over_extinction():
    s = new_state(DomainMask.full(6, 6))
    apply(s, StimulusSpec((0, 0), 6))
    rec = run(s, SimParams(phi=0.2))
    assert rec.termination == Termination.FULLY_COVERED and rec.coverage == 1.0


def test_run_cap_respected_and_sampled():
    s = new_state(DomainMask.full(60, 60))
    apply(s, StimulusSpec((0, 0), 10))
    rec = run(s, SimParams(phi=0.05, max_steps=1000))
    assert rec.termination == Termination.STEP_CAP
    assert rec.steps_taken == 1000
    assert rec.sample_steps == [0, 150, 300, 450, 600, 750, 900, 1000]


def test_observers_fire_on_their_stride():
    s = new_state(DomainMask.full(20, 20))
    apply(s, StimulusSpec((0, 0), 5))
    seen, sampled = [], []
    run(s, SimParams(max_steps=400), [Every(70, lambda st: seen.append(st.step)),
                                      lambda st, rec: sampled.append(st.step)])
    assert seen == [0, 70, 140, 210, 280, 350]
    assert sampled == [0, 150, 300, 400]


def test_ever_excited_tracks_between_samples():
    # a pulse crossing a short strip between samples is still recorded
    s = new_state(DomainMask.full(12, 60))
    apply(s, StimulusSpec((0, 0), 12))
    rec = run(s, SimParams(phi=0.05, sample_stride=100_000, max_steps=6000))
    assert rec.sample_steps == [0, 6000]
    assert rec.ever_excited[6, 40]
