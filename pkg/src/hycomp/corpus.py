"""Built-in worked examples: a thermostat, two thermostats, and small networks.

``m`` is the thermostat phase space, ``u`` a single mode carrying the real
line, and ``s: m -> u`` the coordinate inclusion.  Coupled open systems
are ``w(x, v) = (-1 or +1) + EPS * v`` depending on the heater mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exprlang import expr_fn
from .geometry import Box, SmoothFn
from .hyds import HybridDynamicalSystem, hds_product
from .hyph import (Arrow, HybridPhaseSpace, HyPhMap, Path, compose_map, diagonal, identity_map, pair, product,
                   product_all, projection, tuple_map)
from .networks import Network, NetworkMap, closed_system_of, pi_map
from .opensys import (HybridSubmersion, OpenSystem, SSubMap, closed_submersion, interconnection,
                      ssub_identity, submersion_product)
from .relations import Guard, Relation

EPS = 0.1
THREE_NODE_WIRING = {1: 2, 2: 1, 3: 2}

DEMOS = ("thermostat", "two-rooms", "product-as-network", "single-node-loop",
         "three-node-network", "three-node-map")


@dataclass
class Demo:
    """A named example: its main object plus the supporting pieces."""

    name: str
    kind: str
    main: object
    parts: dict = field(default_factory=dict)


def thermostat_space() -> HybridPhaseSpace:
    box = Box([(0.0, 1.0)])
    ident = SmoothFn.identity(box)
    f = Relation.guarded_map(box, box, Guard.pin(box, {0: 0.0}), ident)
    g = Relation.guarded_map(box, box, Guard.pin(box, {0: 1.0}), ident)
    return HybridPhaseSpace({"off": box, "on": box},
                            {"f": Arrow("off", "on", f), "g": Arrow("on", "off", g)},
                            "thermostat", {"off": ["x"], "on": ["x"]})


def thermostat() -> HybridDynamicalSystem:
    a = thermostat_space()
    field_ = {
        "off": expr_fn(["x"], ["-1"], a.modes["off"], label="-1"),
        "on": expr_fn(["x"], ["1"], a.modes["on"], label="1"),
    }
    return HybridDynamicalSystem(a, field_, "thermostat")


def two_rooms() -> HybridDynamicalSystem:
    h = thermostat()
    return hds_product([h, h], name="two-rooms")


def line_space() -> HybridPhaseSpace:
    return HybridPhaseSpace({"pt": Box.real(1)}, {}, "u", {"pt": ["v"]})


def inclusion(m: HybridPhaseSpace, u: HybridPhaseSpace) -> HyPhMap:
    """``s: m -> u``: every mode to the single mode of ``u``, coordinates unchanged."""
    (pt,) = u.modes
    eye, zero = np.eye(1), np.zeros(1)
    return HyPhMap(
        m, u,
        {x: pt for x in m.modes},
        {g: Path.identity(pt) for g in m.arrows},
        {x: SmoothFn(b, u.modes[pt], lambda y: y, lambda y: eye, (eye, zero), "s")
         for x, b in m.modes.items()},
        "s",
    )


def input_submersion(m: HybridPhaseSpace, u: HybridPhaseSpace) -> HybridSubmersion:
    """``m x u -> m``."""
    P, p1, _ = product(m, u)
    return HybridSubmersion(P, m, p1, f"{m.name}x{u.name}->{m.name}")


def coupled_system(sub: HybridSubmersion, eps: float = EPS, name: str = "w") -> OpenSystem:
    """``w(x, v) = -1 + eps v`` in heater mode off, ``1 + eps v`` in mode on."""
    F = {}
    for t, box in sub.tot.modes.items():
        base = "-1" if t[0] == "off" else "1"
        F[t] = expr_fn(["x", "v"], [f"{base} + {eps!r}*v"], box, Box.real(1), label=f"{base}+{eps}v")
    return OpenSystem(sub, F, name)


def _wrap_inverse(a: HybridPhaseSpace):
    """Inverse of the canonical map ``a -> a^1`` on state coordinates."""
    return {x: SmoothFn.identity(a.modes[x]) for x in a.modes}


def product_as_network() -> Demo:
    h = thermostat()
    a = h.space
    P = product_all([a, a])
    taus = {i: HybridSubmersion(P, a, projection(P, i - 1), f"pr{i}") for i in (1, 2)}
    b = closed_submersion(P)
    net = Network((1, 2), taus, b, name="product-as-network")
    psi = interconnection(b, net.prod, diagonal(P, 2, target=net.prod.tot), name="psi")
    net = net.with_psi(psi)
    # open systems X_i: heater i driven by the other room
    X = {}
    for i in (1, 2):
        F = {}
        for t, box in P.modes.items():
            base = "-1" if t[i - 1] == "off" else "1"
            other = "x2" if i == 1 else "x1"
            F[t] = expr_fn(["x1", "x2"], [f"{base} + {EPS!r}*{other}"], box, Box.real(1))
        X[i] = OpenSystem(taus[i], F, f"X{i}")
    direct = {}
    for t, box in P.modes.items():
        b1 = "-1" if t[0] == "off" else "1"
        b2 = "-1" if t[1] == "off" else "1"
        direct[t] = expr_fn(["x1", "x2"], [f"{b1} + {EPS!r}*x2", f"{b2} + {EPS!r}*x1"], box, Box.real(2))
    return Demo("product-as-network", "network", net,
                {"systems": X, "direct": HybridDynamicalSystem(P, direct, "direct")})


def single_node_loop() -> Demo:
    m = thermostat_space()
    u = line_space()
    s = inclusion(m, u)
    mu = input_submersion(m, u)
    c = closed_submersion(m)
    net = Network(("*",), {"*": mu}, c, name="single-node-loop")
    nu_tot = tuple_map([pair(identity_map(m), s, target=mu.tot)], target=net.prod.tot, name="nu")
    nu_st = tuple_map([identity_map(m)], target=net.prod.st, name="nu_st")
    nu = interconnection(c, net.prod, nu_tot, nu_st, _wrap_inverse(m), name="nu")
    net = net.with_psi(nu)
    w = coupled_system(mu)
    return Demo("single-node-loop", "network", net, {"systems": {"*": w}, "s": s, "m": m, "u": u})


def three_node_network() -> Demo:
    m = thermostat_space()
    u = line_space()
    s = inclusion(m, u)
    sub = input_submersion(m, u)
    idx = (1, 2, 3)
    b = submersion_product([closed_submersion(m)] * 3, name="(m->m)^3")
    net = Network(idx, {i: sub for i in idx}, b, name="three-node-network")
    m3 = b.tot
    u3 = product_all([u, u, u])
    Pi = pi_map(THREE_NODE_WIRING, {i: s for i in idx}, m3, idx, idx, u3, name="Pi(phi,s)")
    slots = [pair(projection(m3, k), compose_map(projection(u3, k), Pi), target=sub.tot) for k in range(3)]
    psi_tot = tuple_map(slots, target=net.prod.tot, name="psi")
    psi = interconnection(b, net.prod, psi_tot, name="psi")
    net = net.with_psi(psi)
    w = coupled_system(sub)
    return Demo("three-node-network", "network", net,
                {"systems": {i: w for i in idx}, "s": s, "Pi": Pi, "m": m, "u": u})


def three_node_map() -> Demo:
    src = three_node_network()
    dst = single_node_loop()
    S, T = src.main, dst.main
    m = dst.parts["m"]
    phi = {i: "*" for i in S.index}
    Phi = {i: ssub_identity(T.tau["*"]) for i in S.index}
    f = SSubMap(T.b, S.b, diagonal(m, 3, target=S.b.tot), diagonal(m, 3, target=S.b.st), "diag")
    nm = NetworkMap(S, T, phi, Phi, f, "three-node-map")
    w = src.parts["systems"]
    u = dst.parts["systems"]
    return Demo("three-node-map", "network-map", nm, {"w": w, "u": u, "src": src, "dst": dst})


def build(name: str) -> Demo:
    if name == "thermostat":
        h = thermostat()
        return Demo(name, "hds", h, {"space": h.space})
    if name == "two-rooms":
        h = two_rooms()
        return Demo(name, "hds", h, {"space": h.space})
    builders = {
        "product-as-network": product_as_network,
        "single-node-loop": single_node_loop,
        "three-node-network": three_node_network,
        "three-node-map": three_node_map,
    }
    if name not in builders:
        raise KeyError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}")
    return builders[name]()


def demo_system(d: Demo) -> HybridDynamicalSystem | None:
    """The closed hybrid dynamical system a demo describes, if any."""
    if d.kind == "hds":
        return d.main
    if d.kind == "network" and d.main.closed:
        return closed_system_of(d.main, d.parts["systems"], d.name)
    if d.kind == "network-map":
        return demo_system(d.parts["src"])
    return None
