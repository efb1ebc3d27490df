"""Boxes, points, tangent vectors and smooth maps between boxes.

Every mode manifold in this package is an axis-aligned box (a finite
product of intervals, some possibly unbounded).  A box with no intervals is
the one-point manifold.  Points are 1-d float arrays.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

_DEFAULT_TOL = float(os.environ.get("HYCOMP_TOL", "1e-9"))
FD_REL_STEP = 1e-6


def default_tol() -> float:
    """Containment tolerance used when callers pass ``tol=None``."""
    return _DEFAULT_TOL


def set_default_tol(tol: float) -> None:
    global _DEFAULT_TOL
    if not tol >= 0:
        raise ValueError(f"tolerance must be non-negative, got {tol}")
    _DEFAULT_TOL = float(tol)


def as_point(x) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(-1)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi) or lo > hi:
            raise ValueError(f"bad interval [{self.lo}, {self.hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def degenerate(self) -> bool:
        return self.lo == self.hi

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def contains(self, v: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= v <= self.hi + tol

    def intersect(self, other: "Interval") -> "Interval | None":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else None

    def subset_of(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def sample_window(self) -> tuple[float, float]:
        """Finite window used when drawing samples from an unbounded interval."""
        lo, hi = self.lo, self.hi
        if math.isinf(lo) and math.isinf(hi):
            return -2.0, 2.0
        if math.isinf(lo):
            return hi - 4.0, hi
        if math.isinf(hi):
            return lo, lo + 4.0
        return lo, hi

    def __str__(self):
        return f"[{self.lo:g}, {self.hi:g}]"


class Box:
    """A finite product of intervals.  Immutable and hashable."""

    __slots__ = ("intervals", "lo", "hi")

    def __init__(self, intervals: Iterable[Interval | Sequence[float]] = ()):
        ivs = tuple(iv if isinstance(iv, Interval) else Interval(*iv) for iv in intervals)
        object.__setattr__(self, "intervals", ivs)
        object.__setattr__(self, "lo", np.array([iv.lo for iv in ivs], dtype=float))
        object.__setattr__(self, "hi", np.array([iv.hi for iv in ivs], dtype=float))
        self.lo.setflags(write=False)
        self.hi.setflags(write=False)

    def __setattr__(self, name, value):
        raise AttributeError("Box is immutable")

    @classmethod
    def point(cls) -> "Box":
        return cls(())

    @classmethod
    def real(cls, dim: int) -> "Box":
        return cls([Interval(-math.inf, math.inf)] * dim)

    @classmethod
    def unit(cls, dim: int) -> "Box":
        return cls([Interval(0.0, 1.0)] * dim)

    @property
    def dim(self) -> int:
        return len(self.intervals)

    @property
    def proper(self) -> bool:
        """True when no interval is degenerate (required of mode manifolds)."""
        return all(not iv.degenerate for iv in self.intervals)

    def __len__(self):
        return self.dim

    def __eq__(self, other):
        return isinstance(other, Box) and self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def __mul__(self, other: "Box") -> "Box":
        return Box(self.intervals + other.intervals)

    def __repr__(self):
        return "Box(" + " x ".join(str(iv) for iv in self.intervals) + ")" if self.dim else "Box(pt)"

    def contains(self, x, tol: float | None = None) -> bool:
        return box_contains(self, x, tol)

    def subset_of(self, other: "Box") -> bool:
        return self.dim == other.dim and all(
            a.subset_of(b) for a, b in zip(self.intervals, other.intervals)
        )

    def sample(self, rng: np.random.Generator, n: int, structured: bool = True) -> list[np.ndarray]:
        """Corners and midpoint (when ``structured``) followed by uniform draws.

        Unbounded directions are sampled from a finite window at the finite end.
        """
        win = [iv.sample_window() for iv in self.intervals]
        lo = np.array([w[0] for w in win], dtype=float)
        hi = np.array([w[1] for w in win], dtype=float)
        pts: list[np.ndarray] = []
        if structured and self.dim:
            pts.append((lo + hi) / 2)
            free = [i for i in range(self.dim) if lo[i] != hi[i]]
            n_corners = min(2 ** len(free), max(n // 2, 1))
            for k in range(n_corners):
                c = lo.copy()
                for bit, i in enumerate(free):
                    if (k >> bit) & 1:
                        c[i] = hi[i]
                pts.append(c)
        elif structured:
            pts.append(np.zeros(0))
        while len(pts) < n:
            pts.append(rng.uniform(lo, hi) if self.dim else np.zeros(0))
        return pts[:n] if n > 0 else []


def box_contains(b: Box, x, tol: float | None = None) -> bool:
    x = as_point(x)
    if x.shape[0] != b.dim:
        raise ValueError(f"dimension mismatch: point has {x.shape[0]} coords, box has {b.dim}")
    if tol is None:
        tol = default_tol()
    if b.dim == 0:
        return True
    return bool(np.all(x >= b.lo - tol) and np.all(x <= b.hi + tol))


@dataclass(frozen=True)
class Tangent:
    base: np.ndarray
    vec: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "base", as_point(self.base))
        object.__setattr__(self, "vec", as_point(self.vec))
        if self.base.shape != self.vec.shape:
            raise ValueError("tangent vector and base point differ in dimension")


@dataclass(frozen=True, eq=False)
class SmoothFn:
    """A smooth map ``dom -> cod`` between boxes.

    ``fn`` maps a float array to a float array.  ``jac`` is an optional
    analytic Jacobian; without it :func:`differential` falls back to finite
    differences.  ``affine`` records ``(A, b)`` when the map is known to be
    ``x -> A x + b``; composition uses it to pull guards back exactly.
    ``label`` is a short human-readable description.
    """

    dom: Box
    cod: Box
    fn: Callable[[np.ndarray], np.ndarray]
    jac: Callable[[np.ndarray], np.ndarray] | None = None
    affine: tuple[np.ndarray, np.ndarray] | None = None
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __call__(self, x) -> np.ndarray:
        return as_point(self.fn(as_point(x)))

    def __repr__(self):
        return f"SmoothFn({self.label or '?'}: {self.dom.dim}->{self.cod.dim})"

    @property
    def analytic(self) -> bool:
        return self.jac is not None

    # constructors -----------------------------------------------------

    @classmethod
    def identity(cls, box: Box) -> "SmoothFn":
        n = box.dim
        eye = np.eye(n)
        return cls(box, box, lambda x: x, lambda x: eye, (eye, np.zeros(n)), "id")

    @classmethod
    def linear(cls, A, b, dom: Box, cod: Box | None = None, label: str = "affine") -> "SmoothFn":
        A = np.atleast_2d(np.asarray(A, dtype=float)).reshape(-1, dom.dim)
        b = np.zeros(A.shape[0]) if b is None else as_point(b)
        if cod is None:
            cod = Box.real(A.shape[0])
        return cls(dom, cod, lambda x: A @ x + b, lambda x: A, (A, b), label)

    @classmethod
    def projection(cls, dom: Box, indices: Sequence[int], cod: Box | None = None,
                   label: str | None = None) -> "SmoothFn":
        idx = np.asarray(list(indices), dtype=int)
        A = np.zeros((len(idx), dom.dim))
        A[np.arange(len(idx)), idx] = 1.0
        if cod is None:
            cod = Box([dom.intervals[i] for i in idx])
        return cls(dom, cod, lambda x: x[idx], lambda x: A, (A, np.zeros(len(idx))),
                   label or f"proj{list(idx)}")

    @classmethod
    def constant(cls, dom: Box, value, cod: Box | None = None) -> "SmoothFn":
        value = as_point(value)
        A = np.zeros((value.shape[0], dom.dim))
        if cod is None:
            cod = Box([(v, v) for v in value])
        return cls(dom, cod, lambda x: value.copy(), lambda x: A, (A, value), "const")


def compose(g: SmoothFn, f: SmoothFn) -> SmoothFn:
    """``g o f``.  Keeps analytic Jacobians and affine data when both factors have them."""
    if f.cod.dim != g.dom.dim:
        raise ValueError(f"cannot compose {g} after {f}: dimension mismatch")
    ff, gf = f.fn, g.fn
    jac = None
    if f.jac is not None and g.jac is not None:
        fj, gj = f.jac, g.jac
        jac = lambda x: gj(ff(x)) @ fj(x)
    affine = None
    if f.affine is not None and g.affine is not None:
        (Af, bf), (Ag, bg) = f.affine, g.affine
        affine = (Ag @ Af, Ag @ bf + bg)
    return SmoothFn(f.dom, g.cod, lambda x: gf(ff(x)), jac, affine, f"{g.label}.{f.label}")


def concat(fs: Sequence[SmoothFn]) -> SmoothFn:
    """Product map ``f1 x ... x fn`` on the concatenated domain."""
    fs = list(fs)
    dom = Box([iv for f in fs for iv in f.dom.intervals])
    cod = Box([iv for f in fs for iv in f.cod.intervals])
    cuts = np.cumsum([0] + [f.dom.dim for f in fs])
    parts = [(f.fn, cuts[i], cuts[i + 1]) for i, f in enumerate(fs)]

    def fn(x):
        return np.concatenate([as_point(p(x[a:b])) for p, a, b in parts]) if parts else np.zeros(0)

    jac = None
    if all(f.jac is not None for f in fs):
        jparts = [(f.jac, cuts[i], cuts[i + 1], f.cod.dim) for i, f in enumerate(fs)]

        def jac(x):
            out = np.zeros((cod.dim, dom.dim))
            r = 0
            for j, a, b, m in jparts:
                out[r:r + m, a:b] = j(x[a:b])
                r += m
            return out

    affine = None
    if all(f.affine is not None for f in fs):
        A = np.zeros((cod.dim, dom.dim))
        r = 0
        for i, f in enumerate(fs):
            A[r:r + f.cod.dim, cuts[i]:cuts[i + 1]] = f.affine[0]
            r += f.cod.dim
        b = np.concatenate([f.affine[1] for f in fs]) if fs else np.zeros(0)
        affine = (A, b)
    return SmoothFn(dom, cod, fn, jac, affine, "x".join(f.label for f in fs) or "pt")


def pairing(fs: Sequence[SmoothFn], dom: Box | None = None) -> SmoothFn:
    """``x -> (f1(x), ..., fn(x))`` for maps sharing a domain."""
    fs = list(fs)
    if dom is None:
        if not fs:
            raise ValueError("pairing of an empty list needs an explicit domain")
        dom = fs[0].dom
    for f in fs:
        if f.dom.dim != dom.dim:
            raise ValueError("pairing requires a common domain")
    cod = Box([iv for f in fs for iv in f.cod.intervals])
    fns = [f.fn for f in fs]
    fn = (lambda x: np.concatenate([as_point(g(x)) for g in fns])) if fns else (lambda x: np.zeros(0))
    jac = None
    if all(f.jac is not None for f in fs):
        jacs = [f.jac for f in fs]
        n = dom.dim
        jac = (lambda x: np.vstack([np.atleast_2d(j(x)).reshape(-1, n) for j in jacs])) if jacs \
            else (lambda x: np.zeros((0, n)))
    affine = None
    if all(f.affine is not None for f in fs):
        if fs:
            affine = (np.vstack([f.affine[0] for f in fs]), np.concatenate([f.affine[1] for f in fs]))
        else:
            affine = (np.zeros((0, dom.dim)), np.zeros(0))
    return SmoothFn(dom, cod, fn, jac, affine, "<" + ",".join(f.label for f in fs) + ">")


def fd_jacobian(f: SmoothFn, x, rel_step: float = FD_REL_STEP) -> np.ndarray:
    """Central differences, one-sided where a step would leave the domain."""
    x = as_point(x)
    fx = f(x)
    J = np.zeros((fx.shape[0], x.shape[0]))
    for i in range(x.shape[0]):
        h = rel_step * (1.0 + abs(x[i]))
        iv = f.dom.intervals[i]
        up, down = x[i] + h <= iv.hi, x[i] - h >= iv.lo
        xp, xm = x.copy(), x.copy()
        if up and down:
            xp[i] += h
            xm[i] -= h
            J[:, i] = (f(xp) - f(xm)) / (2 * h)
        elif up:
            # second-order one-sided stencil
            xp[i] += h
            xm[i] += 2 * h
            J[:, i] = (-3 * fx + 4 * f(xp) - f(xm)) / (2 * h)
        elif down:
            xp[i] -= h
            xm[i] -= 2 * h
            J[:, i] = (3 * fx - 4 * f(xp) + f(xm)) / (2 * h)
        else:
            # interval narrower than the step; use it whole
            a, b = iv.lo, iv.hi
            xp[i], xm[i] = b, a
            J[:, i] = (f(xp) - f(xm)) / (b - a) if b > a else 0.0
    return J


def differential(f: SmoothFn, x, tol: float | None = None) -> np.ndarray:
    x = as_point(x)
    if not box_contains(f.dom, x, tol):
        raise ValueError(f"point {x} outside the domain {f.dom} of {f}")
    if f.jac is not None:
        J = np.asarray(f.jac(x), dtype=float)
        return J.reshape(f.cod.dim, f.dom.dim)
    return fd_jacobian(f, x)


def pushforward(f: SmoothFn, v: Tangent) -> Tangent:
    base = v.base
    return Tangent(f(base), differential(f, base) @ v.vec)
