"""Acceptance suite: one PASS/FAIL line per criterion.

Lines are printed as each test runs and repeated in the pytest terminal
summary.  Running this file directly executes every criterion in order.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from gen import MAP_KINDS, hds_map_triple, interconnection_square, random_expr, random_init, random_network_map
from hycomp.cli import main
from hycomp.corpus import (THREE_NODE_WIRING, coupled_system, inclusion, input_submersion, line_space,
                           product_as_network, thermostat, thermostat_space, three_node_network, two_rooms)
from hycomp.exprlang import deriv, evaluate, expr_fn, parse
from hycomp.geometry import Box, fd_jacobian
from hycomp.hyds import check_hds_map, pushforward_execution, validate_execution
from hycomp.hyph import UnderlyingPoint, identity_map, pair, product_all, tuple_map
from hycomp.networks import apply_interconnection, closed_system_of, induced_system_map, pi_map
from hycomp.opensys import (closed_submersion, crl_product, crl_related, interconnection, pullback)
from hycomp.simulate import JumpPolicy, SimConfig, sim_tolerance, simulate

from test_hyph import connections

RESULTS: list[str] = []


def record(tag: str, title: str, ok: bool, detail: str) -> None:
    line = f"{tag} {title}: {'PASS' if ok else 'FAIL'} ({detail})"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_c01_thermostat_jump_times():
    h = thermostat()
    e = simulate(h, UnderlyingPoint("off", [1.0]), JumpPolicy("priority"),
                 SimConfig(step=1e-3, t_max=10.5, max_jumps=20))
    times = np.array(e.jump_times[:10])
    err = float(np.max(np.abs(times - np.arange(1, 11)))) if len(times) == 10 else math.inf
    alternate = all(a != b for a, b in zip(e.modes, e.modes[1:])) and e.modes[0] == "off"
    record("C1", "thermostat jump times", err <= 1e-6 and alternate,
           f"max jump-time error {err:.2e}, modes alternate: {alternate}")


def test_c02_two_room_product():
    s = two_rooms().space
    n = (len(s.modes), len(s.arrows), len(connections(s)))
    record("C2", "two-room product", n == (4, 8, 12), f"modes, arrows, connected pairs = {n}")


def test_c03_pi_construction():
    rng = np.random.default_rng(3)
    m, u = thermostat_space(), line_space()
    s = inclusion(m, u)
    m3, u3 = product_all([m] * 3), product_all([u] * 3)
    Pi = pi_map(THREE_NODE_WIRING, {i: s for i in (1, 2, 3)}, m3, (1, 2, 3), (1, 2, 3), u3)
    modes = list(m3.modes)
    bad = 0
    for _ in range(100):
        t = modes[int(rng.integers(len(modes)))]
        a = m3.modes[t].sample(rng, 1)[0]
        want = [s.comps[t[1]](a[1:2])[0], s.comps[t[0]](a[0:1])[0], s.comps[t[1]](a[1:2])[0]]
        bad += not np.array_equal(Pi(UnderlyingPoint(t, a)).point, want)
    record("C3", "pi construction", bad == 0, f"{bad} of 100 triples differ")


def test_c04_interconnection_semantics():
    rng = np.random.default_rng(4)
    m, u = thermostat_space(), line_space()
    sub = input_submersion(m, u)
    s = inclusion(m, u)
    F = coupled_system(sub)
    phi = interconnection(closed_submersion(m), sub, pair(identity_map(m), s, sub.tot))
    Fp = pullback(phi, F)
    bad = 0
    for x, box in m.modes.items():
        for p in box.sample(rng, 50):
            bad += not np.array_equal(Fp(x, p), F((x, "pt"), np.array([p[0], s.comps[x](p)[0]])))
    d = product_as_network()
    net, X = d.main, d.parts["systems"]
    both = pullback(net.psi, crl_product([X[1], X[2]], net.prod))
    closed = closed_system_of(net, X)
    direct = d.parts["direct"]
    modes = list(direct.space.modes)
    for k in range(100):
        t = modes[k % len(modes)]
        q = direct.space.modes[t].sample(rng, 1)[0]
        bad += not np.array_equal(both(t, q), np.concatenate([X[1](t, q), X[2](t, q)]))
        bad += not np.array_equal(closed(t, q), direct(t, q))
    record("C4", "interconnection semantics", bad == 0, f"{bad} inexact evaluations")


def test_c05_three_node_network():
    rng = np.random.default_rng(5)
    d = three_node_network()
    net, w, s = d.main, d.parts["systems"], d.parts["s"]
    out = apply_interconnection(net, w)
    modes = list(net.b.tot.modes)
    worst = 0.0
    for k in range(100):
        t = modes[k % len(modes)]
        x = net.b.tot.modes[t].sample(rng, 1)[0]
        want = [w[i]((t[i - 1], "pt"), [x[i - 1], s.comps[t[j - 1]](x[j - 1:j])[0]])[0]
                for i, j in THREE_NODE_WIRING.items()]
        worst = max(worst, float(np.max(np.abs(out(t, x) - want))))
    record("C5", "three-node network semantics", worst == 0.0, f"max abs deviation {worst:.2e}")


def test_c06_executions_push_forward():
    rng = np.random.default_rng(6)
    cfg = SimConfig(step=0.02, t_max=3.0, max_jumps=50)
    tol = 10 * sim_tolerance(cfg)
    failures, worst, runs = 0, 0.0, 0
    for k in range(50):
        F, src, dst = hds_map_triple(rng, MAP_KINDS[k % len(MAP_KINDS)])
        if not check_hds_map(F, src, dst, tol=1e-9).ok:
            failures += 1
            continue
        for _ in range(5):
            e = simulate(src, random_init(rng, src.space), JumpPolicy("seeded-random", k), cfg)
            r = validate_execution(pushforward_execution(F, e), dst, tol)
            runs += 1
            worst = max(worst, r.worst)
            failures += not r.ok
    record("C6", "executions push forward along maps", failures == 0,
           f"{failures} counterexamples in {runs} executions, worst residual {worst:.2e} vs {tol:.2e}")


def test_c07_network_maps_induce_system_maps():
    rng = np.random.default_rng(7)
    bad_hyp, bad_concl, worst = 0, 0, 0.0
    for _ in range(25):
        nm, w, u = random_network_map(rng)
        chk = induced_system_map(nm, w, u, nsamples=100, tol=1e-9)
        if not chk.hypotheses_ok:
            bad_hyp += 1
            continue
        worst = max(worst, chk.conclusion.worst)
        bad_concl += not chk.conclusion_ok
    record("C7", "network maps induce system maps", bad_hyp == 0 and bad_concl == 0,
           f"{bad_hyp} hypothesis failures, {bad_concl} conclusion failures, worst residual {worst:.2e}")


def test_c08_pullbacks_preserve_relatedness():
    rng = np.random.default_rng(8)
    bad, worst = 0, 0.0
    for _ in range(25):
        phi, psi, f, g, F, G = interconnection_square(rng)
        r = crl_related(f, pullback(phi, F), pullback(psi, G), nsamples=100, tol=1e-9)
        bad += not (crl_related(g, F, G, tol=1e-9).ok and r.ok)
        worst = max(worst, r.worst)
    record("C8", "pullbacks preserve relatedness", bad == 0, f"{bad} failures, worst residual {worst:.2e}")


def test_c09_diagonal_invariance():
    d = three_node_network()
    h = closed_system_of(d.main, d.parts["systems"])
    e = simulate(h, UnderlyingPoint(("off", "off", "off"), [0.5, 0.5, 0.5]), JumpPolicy("priority"),
                 SimConfig(step=1e-3, t_max=5.0, max_jumps=100))
    worst = 0.0
    for seg in e.segments:
        worst = max(worst, float(np.max(np.ptp(seg.points, axis=1))))
    same_mode = all(len(set(t)) == 1 for t in e.modes)
    ok = worst <= 1e-6 and same_mode and e.track[-1] == pytest.approx(5.0) and len(e.jumps) > 0
    record("C9", "diagonal invariance", ok,
           f"max cross-component deviation {worst:.2e} over {len(e.jumps)} jumps, modes diagonal: {same_mode}")


def test_c10_numerics():
    rng = np.random.default_rng(10)
    names = ["x", "y", "z"]
    dom = Box([(-2, 2)] * 3)
    jac_bad = dual_bad = 0
    for _ in range(100):
        srcs = [random_expr(rng, names) for _ in range(2)]
        f = expr_fn(names, srcs, dom)
        x = rng.uniform(-1.5, 1.5, size=3)
        fd = fd_jacobian(f, x)
        jac_bad += not np.max(np.abs(f.jac(x) - fd)) <= 1e-5 * (1 + np.max(np.abs(fd)))
        e = parse(srcs[0])
        env = dict(zip(names, map(float, x)))
        for n in names:
            h = 1e-6 * (1 + abs(env[n]))
            up, dn = dict(env), dict(env)
            up[n] += h
            dn[n] -= h
            c = (evaluate(e, up) - evaluate(e, dn)) / (2 * h)
            dual_bad += not abs(deriv(e, env, n) - c) <= 1e-6 * (1 + abs(c))
    record("C10", "numerical derivatives", jac_bad == 0 and dual_bad == 0,
           f"{jac_bad} Jacobian and {dual_bad} dual-number disagreements over 100 functions")


def test_c11_reproducible_traces(tmp_path, capsys):
    argv = ["simulate", "demo:two-rooms", "--policy", "seeded-random", "--seed", "11", "--t-max", "6"]
    data = []
    for k in range(2):
        out = tmp_path / f"run{k}.csv"
        code = main(argv + ["--out", str(out)])
        data.append((code, out.read_bytes()))
    capsys.readouterr()
    ok = data[0][0] == data[1][0] == 0 and data[0][1] == data[1][1] and len(data[0][1]) > 0
    record("C11", "reproducible traces", ok, f"{len(data[0][1])} bytes, identical: {data[0][1] == data[1][1]}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
