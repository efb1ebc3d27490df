"""Relations between boxes as finite unions of guarded partial maps.

A relation ``R`` from box ``S`` to box ``T`` is stored as branches
``(guard, map)`` and denotes ``{(x, map(x)) : x in guard}`` summed over
branches.  Guards are sub-boxes of the source (degenerate intervals pin a
coordinate) optionally refined by lazy conditions ``fn(x) in box``.  Lazy
conditions come from composing with non-affine maps and are checked only
at membership time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .geometry import Box, Interval, SmoothFn, as_point, box_contains, compose as compose_fn, concat, default_tol


@dataclass(frozen=True, eq=False)
class Guard:
    sub: Box
    conds: tuple[tuple[SmoothFn, Box], ...] = ()

    @classmethod
    def full(cls, box: Box) -> "Guard":
        return cls(box)

    @classmethod
    def pin(cls, box: Box, pins: Mapping[int, float | tuple[float, float]]) -> "Guard":
        """Guard from a source box with some coordinates pinned or range-restricted."""
        ivs = list(box.intervals)
        for i, v in pins.items():
            if isinstance(v, tuple):
                ivs[i] = Interval(*v)
            else:
                ivs[i] = Interval(v, v)
        return cls(Box(ivs))

    @property
    def pinned(self) -> list[int]:
        return [i for i, iv in enumerate(self.sub.intervals) if iv.degenerate]

    def contains(self, x, tol: float | None = None) -> bool:
        if tol is None:
            tol = default_tol()
        x = as_point(x)
        if not box_contains(self.sub, x, tol):
            return False
        return all(box_contains(b, fn(x), tol) for fn, b in self.conds)

    def sample(self, rng: np.random.Generator, n: int, tries: int = 20) -> list[np.ndarray]:
        """Points of the guard: sub-box samples filtered by the lazy conditions."""
        pts = [p for p in self.sub.sample(rng, n) if self.contains(p, 0.0)]
        k = 0
        while self.conds and len(pts) < n and k < tries:
            pts += [p for p in self.sub.sample(rng, n, structured=False) if self.contains(p, 0.0)]
            k += 1
        return pts[:n]

    def __repr__(self):
        extra = f" + {len(self.conds)} lazy" if self.conds else ""
        return f"Guard({self.sub}{extra})"


@dataclass(frozen=True, eq=False)
class Branch:
    guard: Guard
    map: SmoothFn


class Relation:
    """Immutable finite union of guarded maps from ``source`` to ``target``."""

    __slots__ = ("source", "target", "branches")

    def __init__(self, source: Box, target: Box, branches: Sequence[Branch] = ()):
        branches = tuple(branches)
        for br in branches:
            if br.guard.sub.dim != source.dim:
                raise ValueError("guard dimension does not match the relation source")
            if br.map.dom.dim != source.dim or br.map.cod.dim != target.dim:
                raise ValueError(f"branch map {br.map} does not go {source.dim}->{target.dim}")
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "branches", branches)

    def __setattr__(self, *_):
        raise AttributeError("Relation is immutable")

    @property
    def empty(self) -> bool:
        """True when no branch survives interval propagation (exact for affine data)."""
        return not self.branches

    def __repr__(self):
        return f"Relation({self.source}->{self.target}, {len(self.branches)} branch(es))"

    @classmethod
    def guarded_map(cls, source: Box, target: Box, guard: Guard, fn: SmoothFn) -> "Relation":
        return cls(source, target, [Branch(guard, fn)])


def empty_rel(source: Box, target: Box) -> Relation:
    return Relation(source, target, ())


def identity_rel(b: Box) -> Relation:
    return Relation(b, b, [Branch(Guard.full(b), SmoothFn.identity(b))])


def _check_dims(R: Relation, x, y):
    x, y = as_point(x), as_point(y)
    if x.shape[0] != R.source.dim or y.shape[0] != R.target.dim:
        raise ValueError(
            f"dimension mismatch: relation is {R.source.dim}->{R.target.dim}, "
            f"got points of dims {x.shape[0]}, {y.shape[0]}"
        )
    return x, y


def member(R: Relation, x, y, tol: float | None = None) -> bool:
    if tol is None:
        tol = default_tol()
    x, y = _check_dims(R, x, y)
    for br in R.branches:
        if br.guard.contains(x, tol):
            fx = br.map(x)
            if fx.shape[0] == 0 or float(np.max(np.abs(fx - y))) <= tol:
                return True
    return False


def image(R: Relation, x, tol: float | None = None) -> list[np.ndarray]:
    """All ``y`` with ``(x, y) in R`` (one per enabled branch)."""
    x = as_point(x)
    return [br.map(x) for br in R.branches if br.guard.contains(x, tol)]


def _pullback_guard(g: Guard, f: SmoothFn, pre: Guard) -> Guard | None:
    """``{x in pre : f(x) in g}``, or None when interval propagation proves it empty."""
    ivs = list(pre.sub.intervals)
    conds = list(pre.conds)
    if f.affine is not None:
        A, b = f.affine
        for i, iv in enumerate(g.sub.intervals):
            if math.isinf(iv.lo) and math.isinf(iv.hi):
                continue
            nz = np.flatnonzero(A[i])
            if nz.size == 0:
                if not iv.contains(b[i]):
                    return None
            elif nz.size == 1:
                j = nz[0]
                a = A[i, j]
                lo, hi = (iv.lo - b[i]) / a, (iv.hi - b[i]) / a
                if a < 0:
                    lo, hi = hi, lo
                cut = ivs[j].intersect(Interval(lo, hi)) if lo <= hi else None
                if cut is None:
                    return None
                ivs[j] = cut
            else:
                row = SmoothFn.linear(A[i:i + 1], b[i:i + 1], f.dom)
                conds.append((row, Box([iv])))
    else:
        conds.append((f, g.sub))
    conds.extend((compose_fn(cf, f), cb) for cf, cb in g.conds)
    return Guard(Box(ivs), tuple(conds))


def compose(S: Relation, R: Relation) -> Relation:
    """``S o R``: first ``R`` then ``S``."""
    if R.target != S.source:
        raise ValueError(f"cannot compose: target {R.target} of R is not source {S.source} of S")
    out = []
    for bR in R.branches:
        for bS in S.branches:
            g = _pullback_guard(bS.guard, bR.map, bR.guard)
            if g is not None:
                out.append(Branch(g, compose_fn(bS.map, bR.map)))
    return Relation(R.source, S.target, out)


def _lift_cond(cond, offset: int, dom: Box):
    fn, b = cond
    proj = SmoothFn.projection(dom, range(offset, offset + fn.dom.dim))
    return compose_fn(fn, proj), b


def rel_product(R: Relation, S: Relation) -> Relation:
    """Monoidal product: ``(m,q) ~ (n,p)`` iff ``m R n`` and ``q S p``."""
    src = R.source * S.source
    tgt = R.target * S.target
    out = []
    for bR in R.branches:
        for bS in S.branches:
            conds = tuple(_lift_cond(c, 0, src) for c in bR.guard.conds) + tuple(
                _lift_cond(c, R.source.dim, src) for c in bS.guard.conds
            )
            guard = Guard(bR.guard.sub * bS.guard.sub, conds)
            out.append(Branch(guard, concat([bR.map, bS.map])))
    return Relation(src, tgt, out)


def rel_product_all(rels: Sequence[Relation]) -> Relation:
    if not rels:
        return identity_rel(Box.point())
    out = rels[0]
    for r in rels[1:]:
        out = rel_product(out, r)
    return out
