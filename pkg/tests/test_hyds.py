from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gen import MAP_KINDS, hds_map_triple, random_init
from hycomp.corpus import thermostat, two_rooms
from hycomp.hyds import (Execution, Segment, check_hds_map, from_json, pushforward_execution, to_csv, to_json,
                         validate_execution)
from hycomp.hyph import Path, Stay, compose_map, identity_map, make_path, projection, terminal_map
from hycomp.simulate import JumpPolicy, SimConfig, sim_tolerance, simulate


def closed_form_thermostat(n=50):
    h = thermostat()
    t1 = np.linspace(0, 1, n)
    t2 = np.linspace(1, 2, n)
    e = Execution([0.0, 1.0, 2.0], ["off", "on"], [make_path(h.space, ["f"])],
                  [Segment(t1, (1 - t1)[:, None]), Segment(t2, (t2 - 1)[:, None])])
    return h, e


def test_closed_form_execution_validates():
    h, e = closed_form_thermostat()
    r = validate_execution(e, h, 1e-9)
    assert r.ok, r.summary()


def test_jump_outside_relation_fails():
    h, e = closed_form_thermostat()
    t2 = e.segments[1].times
    e.segments[1] = Segment(t2, (t2 - 1 + 0.5)[:, None])
    r = validate_execution(e, h, 1e-9)
    assert not r.ok and any(i.where.startswith("jump") for i in r.issues)


def test_zero_length_segment_is_trivially_valid():
    from hycomp.hyds import HybridDynamicalSystem
    from hycomp.exprlang import expr_fn

    a = thermostat().space
    wild = HybridDynamicalSystem(a, {m: expr_fn(["x"], ["exp(3*x) - 7"], b) for m, b in a.modes.items()})
    e = Execution([0.25], ["off"], [], [Segment([0.25], [[0.5]])])
    assert validate_execution(e, wild, 0.0).ok


def test_wrong_field_fails_flow_check():
    h, e = closed_form_thermostat()
    e.segments[0] = Segment(e.segments[0].times, (1 - 0.5 * e.segments[0].times)[:, None])
    r = validate_execution(e, h, 1e-6)
    assert not r.ok


def test_track_must_increase():
    h, e = closed_form_thermostat()
    e.track = [0.0, 1.0, 1.0]
    assert not validate_execution(e, h).structural_ok


def test_check_hds_map_examples(rng):
    h = thermostat()
    assert check_hds_map(identity_map(h.space), h, h).ok
    H = two_rooms()
    assert check_hds_map(projection(H.space, 0), H, h).ok


def test_unrelated_fields_fail():
    from gen import heater

    h, g = heater(1.0, 1.0), heater(1.0, 2.0)
    r = check_hds_map(identity_map(h.space), h, g)
    assert r.structural_ok and not r.ok and r.worst == pytest.approx(1.0)


def test_pushforward_identity_is_identical():
    h, e = closed_form_thermostat()
    p = pushforward_execution(identity_map(h.space), e)
    assert p.track == e.track and p.modes == e.modes and p.jumps == e.jumps
    assert all(np.array_equal(a.points, b.points) for a, b in zip(p.segments, e.segments))


def test_projection_turns_other_factor_jumps_into_identity_paths():
    H = two_rooms()
    h = thermostat()
    from hycomp.hyph import UnderlyingPoint

    e = simulate(H, UnderlyingPoint(("off", "on"), [0.3, 0.6]), cfg=SimConfig(step=1e-2, t_max=3.0))
    p = pushforward_execution(projection(H.space, 0), e)
    assert any(len(j) == 0 for j in p.jumps)
    assert validate_execution(p, h, 10 * sim_tolerance(SimConfig(step=1e-2))).ok


def test_terminal_pushforward_validates():
    from gen import zero_system

    h = thermostat()
    T = terminal_map(h.space)
    e = simulate(h, random_init(np.random.default_rng(2), h.space), cfg=SimConfig(step=1e-2, t_max=3.0))
    p = pushforward_execution(T, e)
    assert all(s.points.shape[1] == 0 for s in p.segments)
    assert validate_execution(p, zero_system(T.cod)).ok


def test_json_round_trip():
    h = two_rooms()
    from hycomp.hyph import UnderlyingPoint

    e = simulate(h, UnderlyingPoint(("off", "off"), [1.0, 0.5]), cfg=SimConfig(step=1e-2, t_max=2.5))
    back = from_json(to_json(e), h.space)
    assert back.track == e.track and back.modes == e.modes and back.jumps == e.jumps
    assert to_json(back) == to_json(e)


def test_csv_schema():
    h, e = closed_form_thermostat(3)
    text = to_csv(e)
    lines = text.splitlines()
    assert lines[0] == "t,mode,x0,event"
    assert lines[1].endswith(",flow") and lines[4].endswith(",jump:f")
    assert lines[4].split(",")[1] == "on"


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(MAP_KINDS))
def test_pushforward_of_simulated_executions_validates(seed, kind):
    rng = np.random.default_rng(seed)
    F, src, dst = hds_map_triple(rng, kind)
    cfg = SimConfig(step=0.02, t_max=2.0)
    e = simulate(src, random_init(rng, src.space), cfg=cfg)
    p = pushforward_execution(F, e)
    assert p.track == e.track
    assert validate_execution(p, dst, 10 * sim_tolerance(cfg)).ok


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_relatedness_composes(seed):
    rng = np.random.default_rng(seed)
    F, s, d = hds_map_triple(rng, "scale")
    from gen import heater, heater_transport

    k = 2.0
    aa, bb = -float(d.field["off"]([0.1])[0]), float(d.field["on"]([0.1])[0])
    top = d.space.modes["off"].intervals[0].hi
    e = heater(k * aa, k * bb, 0.0, k * top)
    G = heater_transport(d, e, f"{k!r}*x", "dbl")
    assert check_hds_map(F, s, d).ok and check_hds_map(G, d, e).ok
    assert check_hds_map(compose_map(G, F), s, e).ok
