"""Open (control) systems on hybrid surjective submersions.

A submersion ``p: tot -> st`` is a map of hybrid phase spaces, surjective
on modes, whose components are coordinate projections.  An open system
assigns to each total mode a map ``F_m: tot(m) -> R^dim st(p(m))``, read as
a tangent vector at the projected point.  Closed systems are open systems
on the identity submersion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .geometry import Box, SmoothFn, box_contains, compose as compose_fn, concat, default_tol, differential
from .hyds import HybridDynamicalSystem
from .hyph import (HybridPhaseSpace, HyPhMap, ModeId, compose_map, identity_map, label, product_all,
                   product_map, same_space, structural_check, validate_map)
from .report import Report


@dataclass(frozen=True, eq=False)
class HybridSubmersion:
    tot: HybridPhaseSpace
    st: HybridPhaseSpace
    p: HyPhMap
    name: str = ""

    def __post_init__(self):
        if not (same_space(self.p.dom, self.tot) and same_space(self.p.cod, self.st)):
            raise ValueError("projection endpoints differ from the total/state spaces")

    @property
    def closed(self) -> bool:
        """True for the identity submersion of a phase space."""
        if not same_space(self.tot, self.st):
            return False
        return all(self.p.obj[m] == m and _is_identity_fn(self.p.comps[m]) for m in self.tot.modes)

    def state_dim(self, tot_mode: ModeId) -> int:
        return self.st.modes[self.p.obj[tot_mode]].dim

    def __repr__(self):
        return f"HybridSubmersion({self.name or '?'}: {self.tot.name} -> {self.st.name})"


def _is_identity_fn(f: SmoothFn) -> bool:
    if f.affine is None or f.dom.dim != f.cod.dim:
        return False
    A, b = f.affine
    return bool(np.array_equal(A, np.eye(f.dom.dim)) and not np.any(b))


def _projection_rows(f: SmoothFn) -> bool:
    """Affine with zero offset and rows that are distinct unit vectors."""
    if f.affine is None:
        return False
    A, b = f.affine
    if np.any(b):
        return False
    cols = []
    for row in A:
        nz = np.flatnonzero(row)
        if nz.size != 1 or row[nz[0]] != 1.0:
            return False
        cols.append(int(nz[0]))
    return len(set(cols)) == len(cols)


def closed_submersion(a: HybridPhaseSpace) -> HybridSubmersion:
    return HybridSubmersion(a, a, identity_map(a), f"id_{a.name}")


def validate_submersion(s: HybridSubmersion, nsamples: int = 8, tol: float | None = None) -> Report:
    report = Report(f"submersion {s.name or '?'}")
    structural_check(s.p, report)
    if not report.structural_ok:
        return report
    missing = set(s.st.modes) - set(s.p.obj.values())
    if missing:
        report.structural("modes", f"not surjective on modes: {sorted(label(m) for m in missing)} missed")
    for m in s.tot.modes:
        c = s.p.comps[m]
        if not _projection_rows(c):
            report.structural(f"mode {label(m)}", "component is not a coordinate projection")
    if report.structural_ok:
        report.extend(validate_map(s.p, nsamples, tol))
    return report


# --- open systems --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OpenSystem:
    carrier: HybridSubmersion
    F: Mapping[ModeId, SmoothFn]
    name: str = ""

    def __call__(self, mode: ModeId, q) -> np.ndarray:
        return self.F[mode](q)

    def __repr__(self):
        return f"OpenSystem({self.name or '?'} on {self.carrier.name or '?'})"


def crl_check(o: OpenSystem, nsamples: int = 8, seed: int = 0) -> Report:
    """Every total mode has a map into the tangent space of its projected state mode."""
    report = Report(f"open system {o.name or '?'}")
    s = o.carrier
    rng = np.random.default_rng(seed)
    for m, box in s.tot.modes.items():
        f = o.F.get(m)
        if f is None:
            report.structural(f"mode {label(m)}", "no dynamics given")
            continue
        if f.dom.dim != box.dim:
            report.structural(f"mode {label(m)}", f"expects {f.dom.dim} inputs, total box has {box.dim}")
            continue
        want = s.state_dim(m)
        if f.cod.dim != want:
            report.structural(f"mode {label(m)}", f"gives {f.cod.dim} components, state box has {want}")
            continue
        for q in box.sample(rng, nsamples):
            v = f(q)
            report.checked += 1
            if v.shape != (want,):
                report.structural(f"mode {label(m)}", f"evaluation returned shape {v.shape}")
                break
            if not np.all(np.isfinite(v)):
                report.semantic(f"mode {label(m)}", f"non-finite value at {q.tolist()}")
                break
    extra = set(o.F) - set(s.tot.modes)
    if extra:
        report.structural("modes", f"dynamics for unknown modes {sorted(label(m) for m in extra)}")
    return report


def closed_system(h: HybridDynamicalSystem) -> OpenSystem:
    """A vector field as an open system on the identity submersion."""
    return OpenSystem(closed_submersion(h.space), dict(h.field), h.name)


def as_hds(o: OpenSystem, name: str = "") -> HybridDynamicalSystem:
    """The vector field of an open system on a closed submersion."""
    if not o.carrier.closed:
        raise ValueError("only open systems on identity submersions are vector fields")
    return HybridDynamicalSystem(o.carrier.tot, dict(o.F), name or o.name)


def crl_combine(alpha: float, F: OpenSystem, beta: float, G: OpenSystem) -> OpenSystem:
    """Pointwise linear combination ``alpha F + beta G`` on a common carrier."""
    if F.carrier is not G.carrier and not (same_space(F.carrier.tot, G.carrier.tot)
                                           and same_space(F.carrier.st, G.carrier.st)):
        raise ValueError("linear combination needs a common submersion")
    out = {}
    for m in F.F:
        f, g = F.F[m], G.F[m]
        fn = (lambda q, f=f.fn, g=g.fn: alpha * np.asarray(f(q), float) + beta * np.asarray(g(q), float))
        out[m] = SmoothFn(f.dom, f.cod, fn, label=f"{alpha}*{f.label}+{beta}*{g.label}")
    return OpenSystem(F.carrier, out, f"{alpha}{F.name}+{beta}{G.name}")


# --- morphisms -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SSubMap:
    """A commuting square ``st(h) o p_dom = p_cod o tot(h)`` of phase-space maps."""

    dom: HybridSubmersion
    cod: HybridSubmersion
    tot: HyPhMap
    st: HyPhMap
    name: str = ""

    def __repr__(self):
        return f"SSubMap({self.name or '?'})"


def ssub_identity(s: HybridSubmersion) -> SSubMap:
    return SSubMap(s, s, identity_map(s.tot), identity_map(s.st), "id")


def ssub_compose(g: SSubMap, f: SSubMap) -> SSubMap:
    return SSubMap(f.dom, g.cod, compose_map(g.tot, f.tot), compose_map(g.st, f.st), f"{g.name}.{f.name}")


def validate_ssub_map(h: SSubMap, nsamples: int = 8, tol: float | None = None, seed: int = 0) -> Report:
    tol = default_tol() if tol is None else tol
    report = Report(f"submersion map {h.name or '?'}")
    pairs = [(h.tot.dom, h.dom.tot, "tot domain"), (h.tot.cod, h.cod.tot, "tot codomain"),
             (h.st.dom, h.dom.st, "state domain"), (h.st.cod, h.cod.st, "state codomain")]
    for got, want, where in pairs:
        if not same_space(got, want):
            report.structural(where, "space differs from the submersion's")
    if not report.structural_ok:
        return report
    report.extend(validate_map(h.tot, nsamples, tol, seed), "tot: ")
    report.extend(validate_map(h.st, nsamples, tol, seed), "st: ")
    if not report.structural_ok:
        return report
    rng = np.random.default_rng(seed)
    pa, pb = h.dom.p, h.cod.p
    for m, box in h.dom.tot.modes.items():
        if h.st.obj[pa.obj[m]] != pb.obj[h.tot.obj[m]]:
            report.structural(f"mode {label(m)}", "square does not commute on modes")
            continue
        worst = 0.0
        for q in box.sample(rng, nsamples):
            lhs = h.st.comps[pa.obj[m]](pa.comps[m](q))
            rhs = pb.comps[h.tot.obj[m]](h.tot.comps[m](q))
            worst = max(worst, float(np.max(np.abs(lhs - rhs), initial=0.0)))
        report.residual(worst, tol, f"mode {label(m)}", "square does not commute")
    return report


def crl_related(h: SSubMap, F: OpenSystem, G: OpenSystem, nsamples: int = 16,
                tol: float | None = None, seed: int = 0) -> Report:
    """Sampled check that ``D st(h) . F = G o tot(h)`` over every total mode of the domain."""
    tol = default_tol() if tol is None else tol
    report = Report(f"relatedness along {h.name or '?'}")
    rng = np.random.default_rng(seed)
    pa = h.dom.p
    for m, box in h.dom.tot.modes.items():
        sm = pa.obj[m]
        proj, hst, htot = pa.comps[m], h.st.comps[sm], h.tot.comps[m]
        Fm, Gm = F.F[m], G.F[h.tot.obj[m]]
        worst, at = 0.0, None
        for q in box.sample(rng, nsamples):
            lhs = differential(hst, proj(q), tol=max(tol, default_tol())) @ Fm(q)
            r = float(np.max(np.abs(lhs - Gm(htot(q))), initial=0.0))
            if not r <= worst:
                worst, at = r, q
        report.residual(worst, tol, f"mode {label(m)}",
                        f"not related (worst at {None if at is None else at.tolist()})")
    return report


@dataclass(frozen=True, eq=False)
class InterconnectionMap:
    """A submersion map whose state part is invertible.

    ``st_inverse`` gives, per state mode ``x`` of the domain, the inverse of
    the state component ``b_st(phi(x)) -> a_st(x)``.  ``None`` means the
    state component is the identity.
    """

    morph: SSubMap
    st_inverse: Mapping[ModeId, SmoothFn] | None = None
    name: str = ""

    @property
    def tot(self) -> HyPhMap:
        return self.morph.tot

    @property
    def st(self) -> HyPhMap:
        return self.morph.st

    @property
    def dom(self) -> HybridSubmersion:
        return self.morph.dom

    @property
    def cod(self) -> HybridSubmersion:
        return self.morph.cod


def interconnection(dom: HybridSubmersion, cod: HybridSubmersion, tot: HyPhMap,
                    st: HyPhMap | None = None, st_inverse=None, name: str = "") -> InterconnectionMap:
    """Interconnection with identity state part unless ``st`` and its inverse are given."""
    if st is None:
        if not same_space(dom.st, cod.st):
            raise ValueError("identity state part needs equal state spaces")
        st = identity_map(dom.st)
    return InterconnectionMap(SSubMap(dom, cod, tot, st, name), st_inverse, name)


def validate_interconnection(phi: InterconnectionMap, nsamples: int = 8, tol: float | None = None,
                             seed: int = 0) -> Report:
    tol = default_tol() if tol is None else tol
    report = Report(f"interconnection {phi.name or '?'}")
    report.extend(validate_ssub_map(phi.morph, nsamples, tol, seed))
    if not report.structural_ok:
        return report
    st = phi.st
    images = list(st.obj.values())
    if len(set(images)) != len(images) or set(images) != set(st.cod.modes):
        report.structural("state modes", "state part is not a bijection on modes")
        return report
    rng = np.random.default_rng(seed)
    for x, box in st.dom.modes.items():
        f = st.comps[x]
        if phi.st_inverse is None:
            if not _is_identity_fn(f) or st.obj[x] != x:
                report.structural(f"state mode {label(x)}", "state part is not the identity and no inverse was given")
            continue
        g = phi.st_inverse.get(x)
        if g is None:
            report.structural(f"state mode {label(x)}", "no inverse for the state part")
            continue
        worst = 0.0
        for v in box.sample(rng, nsamples):
            worst = max(worst, float(np.max(np.abs(g(f(v)) - v), initial=0.0)))
        for w in st.cod.modes[st.obj[x]].sample(rng, nsamples):
            worst = max(worst, float(np.max(np.abs(f(g(w)) - w), initial=0.0)))
        report.residual(worst, tol, f"state mode {label(x)}", "state part does not invert")
    return report


def pullback(phi: InterconnectionMap, G: OpenSystem) -> OpenSystem:
    """``phi* G``: evaluate ``G`` after the total map and pull the vector back to the domain's states."""
    a = phi.dom
    out = {}
    for m, box in a.tot.modes.items():
        ftot = phi.tot.comps[m]
        Gm = G.F[phi.tot.obj[m]]
        want = a.state_dim(m)
        cod = Box.real(want)
        if phi.st_inverse is None:
            out[m] = compose_fn(Gm, ftot)
            out[m] = SmoothFn(box, cod, out[m].fn, out[m].jac, out[m].affine, f"{G.name}.{phi.name}")
            continue
        sm = a.p.obj[m]
        proj, fst, inv = a.p.comps[m], phi.st.comps[sm], phi.st_inverse[sm]
        gfn, tfn = Gm.fn, ftot.fn

        def fn(q, proj=proj, fst=fst, inv=inv, gfn=gfn, tfn=tfn):
            y = fst(proj(q))
            return differential(inv, y) @ np.asarray(gfn(tfn(q)), float)

        out[m] = SmoothFn(box, cod, fn, label=f"{G.name}*{phi.name}")
    return OpenSystem(a, out, f"{phi.name}*{G.name}")


# --- products ------------------------------------------------------------------

def submersion_product(subs: Sequence[HybridSubmersion], name: str = "") -> HybridSubmersion:
    subs = list(subs)
    if not subs:
        raise ValueError("submersion product needs at least one factor")
    tot = product_all([s.tot for s in subs])
    st = product_all([s.st for s in subs])
    p = product_map([s.p for s in subs], tot, st)
    return HybridSubmersion(tot, st, p, name or "x".join(s.name or "?" for s in subs))


def crl_product(systems: Sequence[OpenSystem], carrier: HybridSubmersion | None = None,
                name: str = "") -> OpenSystem:
    """Factorwise open system on the product submersion."""
    systems = list(systems)
    carrier = carrier or submersion_product([o.carrier for o in systems])
    out = {}
    for t, box in carrier.tot.modes.items():
        F = concat([o.F[m] for o, m in zip(systems, t)])
        out[t] = SmoothFn(box, Box.real(F.cod.dim), F.fn, F.jac, F.affine, F.label)
    return OpenSystem(carrier, out, name or "x".join(o.name or "?" for o in systems))
