"""Networks of hybrid open systems and maps between them.

A network is an indexed list ``tau`` of submersions together with an
interconnection ``psi: b -> Pi(tau)`` into their product.  Feeding one
open system per index through ``psi`` gives an open system on ``b``.

A map of networks ``(tau, psi) -> (mu, nu)`` is an index map
``phi: X -> Y``, maps ``Phi_x: mu(phi(x)) -> tau(x)`` and a base map
``f: c -> b`` with ``Pi(phi, Phi) o nu = psi o f``.  When every
``u_phi(x)`` is ``Phi_x``-related to ``w_x``, the interconnected system
built from ``u`` is ``f``-related to the one built from ``w``;
:func:`induced_system_map` checks both sides of that statement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from .geometry import default_tol
from .hyds import HybridDynamicalSystem
from .hyph import (HybridPhaseSpace, HyPhMap, UnderlyingPoint, compose_map, label, projection,
                   same_space, tuple_map)
from .opensys import (HybridSubmersion, InterconnectionMap, OpenSystem, SSubMap, as_hds, crl_product,
                      crl_related, pullback, submersion_product, validate_interconnection,
                      validate_ssub_map, validate_submersion, crl_check)
from .report import Report

Index = Hashable


def pi_map(phi: Mapping[Index, Index], Phi: Mapping[Index, HyPhMap], src: HybridPhaseSpace,
           y_index: Sequence[Index], x_index: Sequence[Index],
           target: HybridPhaseSpace | None = None, name: str = "Pi") -> HyPhMap:
    """``Pi(phi, Phi): prod_y a_y -> prod_x b_x`` whose ``x`` component is ``Phi_x o pr_phi(x)``."""
    pos = {y: i for i, y in enumerate(y_index)}
    if src.factors is None or len(src.factors) != len(y_index):
        raise ValueError("source must be the product over the target index list")
    comps = []
    for x in x_index:
        y = phi[x]
        if y not in pos:
            raise ValueError(f"index map sends {x!r} to unknown index {y!r}")
        pr = projection(src, pos[y])
        if not same_space(Phi[x].dom, pr.cod):
            raise ValueError(f"component for {x!r} does not start at factor {y!r}")
        comps.append(compose_map(Phi[x], pr))
    return tuple_map(comps, target, src, name=name)


def pi_ssub(phi, Phi: Mapping[Index, SSubMap], src: HybridSubmersion, dst: HybridSubmersion,
            y_index, x_index) -> SSubMap:
    tot = pi_map(phi, {x: h.tot for x, h in Phi.items()}, src.tot, y_index, x_index, dst.tot)
    st = pi_map(phi, {x: h.st for x, h in Phi.items()}, src.st, y_index, x_index, dst.st)
    return SSubMap(src, dst, tot, st, "Pi")


class Network:
    """An indexed list of submersions with an interconnection into their product."""

    def __init__(self, index: Sequence[Index], tau: Mapping[Index, HybridSubmersion],
                 b: HybridSubmersion, psi: InterconnectionMap | None = None, name: str = "",
                 prod: HybridSubmersion | None = None):
        self.index = tuple(index)
        if len(set(self.index)) != len(self.index) or not self.index:
            raise ValueError("network index must be a nonempty list of distinct names")
        self.tau = {x: tau[x] for x in self.index}
        self.b = b
        self.prod = prod or submersion_product([self.tau[x] for x in self.index])
        self.psi = psi
        self.name = name

    def __repr__(self):
        return f"Network({self.name or '?'}: {len(self.index)} nodes)"

    @property
    def closed(self) -> bool:
        return self.b.closed

    def with_psi(self, psi: InterconnectionMap) -> "Network":
        return Network(self.index, self.tau, self.b, psi, self.name, self.prod)


def validate_network(n: Network, nsamples: int = 8, tol: float | None = None) -> Report:
    report = Report(f"network {n.name or '?'}")
    for x in n.index:
        report.extend(validate_submersion(n.tau[x], nsamples, tol), f"node {x}: ")
    report.extend(validate_submersion(n.b, nsamples, tol), "base: ")
    if n.psi is None:
        report.structural("interconnection", "missing")
        return report
    if not (same_space(n.psi.dom.tot, n.b.tot) and same_space(n.psi.dom.st, n.b.st)):
        report.structural("interconnection", "does not start at the base submersion")
    if not (same_space(n.psi.cod.tot, n.prod.tot) and same_space(n.psi.cod.st, n.prod.st)):
        report.structural("interconnection", "does not land in the product of the node submersions")
    if report.structural_ok:
        report.extend(validate_interconnection(n.psi, nsamples, tol), "interconnection: ")
    return report


def apply_interconnection(n: Network, w: Mapping[Index, OpenSystem], name: str = "") -> OpenSystem:
    """``psi* (w_1 x ... x w_n)``: the open system on the base."""
    if n.psi is None:
        raise ValueError("network has no interconnection")
    prod = crl_product([w[x] for x in n.index], n.prod)
    out = pullback(n.psi, prod)
    return OpenSystem(out.carrier, out.F, name or f"{n.name or 'network'}[{','.join(w[x].name or '?' for x in n.index)}]")


def closed_system_of(n: Network, w: Mapping[Index, OpenSystem], name: str = "") -> HybridDynamicalSystem:
    """The hybrid dynamical system of a closed network."""
    return as_hds(apply_interconnection(n, w, name), name)


@dataclass(frozen=True, eq=False)
class NetworkMap:
    src: Network
    dst: Network
    phi: Mapping[Index, Index]
    Phi: Mapping[Index, SSubMap]
    f: SSubMap
    name: str = ""

    def pi(self) -> SSubMap:
        return pi_ssub(self.phi, self.Phi, self.dst.prod, self.src.prod, self.dst.index, self.src.index)


def _compare_maps(report: Report, lhs: HyPhMap, rhs: HyPhMap, where: str, nsamples: int, tol: float,
                  rng) -> None:
    for m, box in lhs.dom.modes.items():
        if lhs.obj[m] != rhs.obj[m]:
            report.semantic(f"{where} mode {label(m)}",
                            f"sides land in different modes {label(lhs.obj[m])} and {label(rhs.obj[m])}")
            continue
        worst = 0.0
        for q in box.sample(rng, nsamples):
            a, b = lhs(UnderlyingPoint(m, q)), rhs(UnderlyingPoint(m, q))
            worst = max(worst, float(np.max(np.abs(a.point - b.point), initial=0.0)))
        report.residual(worst, tol, f"{where} mode {label(m)}", "square does not commute")


def validate_network_map(m: NetworkMap, nsamples: int = 8, tol: float | None = None, seed: int = 0) -> Report:
    tol = default_tol() if tol is None else tol
    report = Report(f"network map {m.name or '?'}")
    src, dst = m.src, m.dst
    for x in src.index:
        if x not in m.phi or m.phi[x] not in dst.index:
            report.structural(f"index {x}", "index map undefined or lands outside the target index")
        elif x not in m.Phi:
            report.structural(f"index {x}", "no component map")
        else:
            h = m.Phi[x]
            mu, tau = dst.tau[m.phi[x]], src.tau[x]
            if not (same_space(h.dom.tot, mu.tot) and same_space(h.cod.tot, tau.tot)
                    and same_space(h.dom.st, mu.st) and same_space(h.cod.st, tau.st)):
                report.structural(f"index {x}", "component does not go from the target node to the source node")
            else:
                report.extend(validate_ssub_map(h, nsamples, tol, seed), f"component {x}: ")
    f = m.f
    if not (same_space(f.dom.tot, dst.b.tot) and same_space(f.cod.tot, src.b.tot)):
        report.structural("base map", "does not go from the target base to the source base")
    if src.psi is None or dst.psi is None:
        report.structural("interconnection", "missing")
    if not report.structural_ok:
        return report
    report.extend(validate_ssub_map(f, nsamples, tol, seed), "base map: ")
    if not report.structural_ok:
        return report
    pi = m.pi()
    rng = np.random.default_rng(seed)
    _compare_maps(report, compose_map(pi.tot, dst.psi.tot), compose_map(src.psi.tot, f.tot), "tot",
                  nsamples, tol, rng)
    _compare_maps(report, compose_map(pi.st, dst.psi.st), compose_map(src.psi.st, f.st), "st",
                  nsamples, tol, rng)
    return report


@dataclass
class TheoremCheck:
    """Outcome of checking the induced map of interconnected systems."""

    hypotheses: Report
    conclusion: Report | None
    source: OpenSystem | None = None
    target: OpenSystem | None = None
    morphism: SSubMap | None = None

    @property
    def hypotheses_ok(self) -> bool:
        return self.hypotheses.ok

    @property
    def conclusion_ok(self) -> bool | None:
        return None if self.conclusion is None else self.conclusion.ok

    def to_dict(self) -> dict:
        return {
            "hypotheses": self.hypotheses.to_dict(),
            "conclusion": None if self.conclusion is None else self.conclusion.to_dict(),
        }


def induced_system_map(m: NetworkMap, w: Mapping[Index, OpenSystem], u: Mapping[Index, OpenSystem],
                       nsamples: int = 16, tol: float | None = None, seed: int = 0) -> TheoremCheck:
    """Check the hypotheses, then ``f``-relatedness of the two interconnected systems.

    ``w`` is indexed by the source network's nodes and ``u`` by the target's.
    The conclusion is only evaluated when every hypothesis holds.
    """
    tol = default_tol() if tol is None else tol
    hyp = Report("hypotheses")
    hyp.extend(validate_network_map(m, max(4, nsamples // 2), tol, seed))
    if hyp.structural_ok:
        for x in m.src.index:
            y = m.phi[x]
            hyp.extend(crl_check(w[x]), f"w[{x}]: ")
            hyp.extend(crl_check(u[y]), f"u[{y}]: ")
            if hyp.structural_ok:
                hyp.extend(crl_related(m.Phi[x], u[y], w[x], nsamples, tol, seed), f"u[{y}] ~ w[{x}]: ")
    if not hyp.ok:
        return TheoremCheck(hyp, None)
    U = apply_interconnection(m.dst, u)
    W = apply_interconnection(m.src, w)
    concl = Report("conclusion")
    concl.extend(crl_related(m.f, U, W, nsamples, tol, seed))
    return TheoremCheck(hyp, concl, U, W, m.f)
