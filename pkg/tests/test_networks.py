from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gen import random_network_map
from hycomp.corpus import (THREE_NODE_WIRING, inclusion, line_space, product_as_network, single_node_loop,
                           three_node_map, three_node_network, thermostat_space)
from hycomp.geometry import SmoothFn
from hycomp.hyph import UnderlyingPoint, diagonal, identity_map, product_all, tuple_map
from hycomp.networks import (Network, NetworkMap, apply_interconnection, induced_system_map, pi_map,
                             validate_network, validate_network_map)
from hycomp.opensys import (SSubMap, crl_combine, interconnection, ssub_identity)


def test_pi_map_example(rng):
    m, u = thermostat_space(), line_space()
    s = inclusion(m, u)
    m3, u3 = product_all([m] * 3), product_all([u] * 3)
    Pi = pi_map(THREE_NODE_WIRING, {i: s for i in (1, 2, 3)}, m3, (1, 2, 3), (1, 2, 3), u3)
    for t, box in m3.modes.items():
        for a in box.sample(rng, 10):
            out = Pi(UnderlyingPoint(t, a)).point
            assert out.tolist() == [a[1], a[0], a[1]]


def test_pi_map_identity_data(rng):
    m = thermostat_space()
    m2 = product_all([m, m])
    Pi = pi_map({1: 1, 2: 2}, {1: identity_map(m), 2: identity_map(m)}, m2, (1, 2), (1, 2), m2)
    for t, box in m2.modes.items():
        assert Pi.obj[t] == t
        for a in box.sample(rng, 5):
            assert np.array_equal(Pi(UnderlyingPoint(t, a)).point, a)


def test_pi_map_replicates_singleton(rng):
    m = thermostat_space()
    m1, m3 = product_all([m]), product_all([m] * 3)
    Pi = pi_map({1: "*", 2: "*", 3: "*"}, {i: identity_map(m) for i in (1, 2, 3)}, m1, ("*",), (1, 2, 3), m3)
    D = diagonal(m, 3, m3)
    for (t,), box in m1.modes.items():
        for a in box.sample(rng, 5):
            assert np.array_equal(Pi(UnderlyingPoint((t,), a)).point, D(UnderlyingPoint(t, a)).point)


def test_pi_map_rejects_bad_index():
    m = thermostat_space()
    m1 = product_all([m])
    with pytest.raises(ValueError):
        pi_map({1: "nope"}, {1: identity_map(m)}, m1, ("*",), (1,))


@pytest.mark.parametrize("build", [product_as_network, single_node_loop, three_node_network])
def test_corpus_networks_validate(build):
    r = validate_network(build().main)
    assert r.ok, r.summary()


def test_three_node_semantics(rng):
    d = three_node_network()
    net, w = d.main, d.parts["systems"]
    out = apply_interconnection(net, w)
    s = d.parts["s"]
    for t, box in net.b.tot.modes.items():
        for x in box.sample(rng, 10):
            want = [w[k]((t[k - 1], "pt"), [x[k - 1], x[THREE_NODE_WIRING[k] - 1]])[0] for k in (1, 2, 3)]
            assert out(t, x).tolist() == want


def test_identity_interconnection_keeps_system(rng):
    d = single_node_loop()
    mu = d.main.tau["*"]
    net = Network(("*",), {"*": mu}, d.main.prod)
    net = net.with_psi(interconnection(net.prod, net.prod, identity_map(net.prod.tot)))
    assert validate_network(net).ok
    w = d.parts["systems"]["*"]
    out = apply_interconnection(net, {"*": w})
    for t, box in net.prod.tot.modes.items():
        for q in box.sample(rng, 5):
            assert np.array_equal(out(t, q), w(t[0], q))


def test_three_node_map_and_theorem():
    d = three_node_map()
    assert validate_network_map(d.main).ok
    chk = induced_system_map(d.main, d.parts["w"], d.parts["u"], nsamples=50, tol=1e-9)
    assert chk.hypotheses_ok and chk.conclusion_ok
    assert chk.conclusion.worst <= 1e-9


def test_identity_network_map():
    d = three_node_network()
    net = d.main
    nm = NetworkMap(net, net, {i: i for i in net.index}, {i: ssub_identity(net.tau[i]) for i in net.index},
                    ssub_identity(net.b), "id")
    assert validate_network_map(nm).ok
    w = d.parts["systems"]
    chk = induced_system_map(nm, w, w, nsamples=20)
    assert chk.conclusion_ok


def test_perturbed_base_map_fails_square():
    d = three_node_map()
    nm = d.main
    f = nm.f
    shift = {m: SmoothFn(c.dom, c.cod, (lambda x, c=c: c(x) + np.array([0.0, 0.0, 1e-3]))) for m, c in
             f.tot.comps.items()}
    from hycomp.hyph import HyPhMap

    tot = HyPhMap(f.tot.dom, f.tot.cod, f.tot.obj, f.tot.arr, shift, "shifted")
    bad = NetworkMap(nm.src, nm.dst, nm.phi, nm.Phi, SSubMap(f.dom, f.cod, tot, tot, "bad"), "bad")
    assert not validate_network_map(bad).ok
    chk = induced_system_map(bad, d.parts["w"], d.parts["u"])
    assert not chk.hypotheses_ok and chk.conclusion is None


def test_unrelated_systems_fail_hypotheses():
    d = three_node_map()
    from hycomp.corpus import coupled_system

    w = dict(d.parts["w"])
    w[2] = coupled_system(d.main.src.tau[2], eps=0.2)
    chk = induced_system_map(d.main, w, d.parts["u"])
    assert not chk.hypotheses_ok and chk.conclusion_ok is None


def test_interconnection_is_linear(rng):
    d = three_node_network()
    net, w = d.main, d.parts["systems"]
    from hycomp.corpus import coupled_system

    w2 = {k: coupled_system(net.tau[k], eps=-0.4) for k in net.index}
    combo = {k: crl_combine(1.5, w[k], 2.0, w2[k]) for k in net.index}
    A, B, C = (apply_interconnection(net, x) for x in (w, w2, combo))
    for t, box in net.b.tot.modes.items():
        for x in box.sample(rng, 5):
            assert C(t, x) == pytest.approx(1.5 * A(t, x) + 2.0 * B(t, x), abs=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_random_network_maps_satisfy_the_theorem(seed):
    nm, w, u = random_network_map(np.random.default_rng(seed))
    chk = induced_system_map(nm, w, u, nsamples=20, tol=1e-9)
    assert chk.hypotheses_ok, chk.hypotheses.summary()
    assert chk.conclusion_ok, chk.conclusion.summary()
