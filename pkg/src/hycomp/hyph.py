"""Hybrid phase spaces and their maps.

A hybrid phase space is a finite directed graph whose nodes (modes) carry
boxes and whose edges carry relations between those boxes; identities are
implicit.  It stands for the functor from the free category on the graph
into boxes-and-relations: a path of edges is sent to the composite of its
relations.

Maps ``a -> b`` send modes to modes, edges to paths, and carry one smooth
map per mode; they must carry each edge relation of ``a`` into the
relation of the image path in ``b``.

Products are n-ary.  The modes of ``a1 x ... x an`` are tuples of modes and
each generating edge moves exactly one factor while every other factor
stays put (recorded with :class:`Stay`).  Simultaneous moves are paths of
length > 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .geometry import Box, SmoothFn, as_point, box_contains, compose as compose_fn, pairing
from .relations import Relation, compose as compose_rel, identity_rel, member, rel_product_all
from .report import Report

ModeId = Hashable
ArrowId = Hashable


@dataclass(frozen=True)
class Stay:
    """Product-edge component for a factor that does not move."""

    mode: ModeId


def label(x) -> str:
    """Readable, injective label for mode and arrow ids."""
    if isinstance(x, Stay):
        return f"id[{label(x.mode)}]"
    if isinstance(x, tuple):
        return "(" + ",".join(label(v) for v in x) + ")"
    return str(x)


@dataclass(frozen=True)
class Arrow:
    src: ModeId
    dst: ModeId
    rel: Relation


class HybridPhaseSpace:
    """Modes with boxes plus generating arrows with relations.  Treat as immutable."""

    def __init__(self, modes: Mapping[ModeId, Box], arrows: Mapping[ArrowId, Arrow] | None = None,
                 name: str = "", coords: Mapping[ModeId, Sequence[str]] | None = None,
                 factors: tuple["HybridPhaseSpace", ...] | None = None):
        if not modes:
            raise ValueError("a hybrid phase space needs at least one mode")
        self.modes: dict[ModeId, Box] = dict(modes)
        self.arrows: dict[ArrowId, Arrow] = dict(arrows or {})
        self.name = name
        self.factors = factors
        for m, b in self.modes.items():
            if not isinstance(b, Box) or not b.proper:
                raise ValueError(f"mode {label(m)} needs a box with non-degenerate intervals")
        for aid, arr in self.arrows.items():
            if arr.src not in self.modes or arr.dst not in self.modes:
                raise ValueError(f"arrow {label(aid)} has unknown endpoint")
            if arr.rel.source != self.modes[arr.src] or arr.rel.target != self.modes[arr.dst]:
                raise ValueError(f"arrow {label(aid)}: relation boxes do not match its endpoint modes")
        self.coords: dict[ModeId, tuple[str, ...]] = {}
        for m, b in self.modes.items():
            names = tuple(coords[m]) if coords and m in coords else tuple(f"x{i}" for i in range(b.dim))
            if len(names) != b.dim or len(set(names)) != len(names):
                raise ValueError(f"mode {label(m)}: bad coordinate names {names}")
            self.coords[m] = names
        self._path_cache: dict = {}

    def __repr__(self):
        return f"HybridPhaseSpace({self.name or '?'}: {len(self.modes)} modes, {len(self.arrows)} arrows)"

    def out_arrows(self, mode: ModeId) -> list[ArrowId]:
        return [a for a, arr in self.arrows.items() if arr.src == mode]

    @cached_property
    def signature(self):
        return (
            tuple((m, b) for m, b in self.modes.items()),
            tuple((a, arr.src, arr.dst) for a, arr in self.arrows.items()),
        )

    @cached_property
    def _labels(self):
        modes = {label(m): m for m in self.modes}
        arrows = {label(a): a for a in self.arrows}
        return modes, arrows

    def mode_by_label(self, s: str) -> ModeId:
        try:
            return self._labels[0][s]
        except KeyError:
            raise KeyError(f"no mode labelled {s!r} in {self.name or 'space'}") from None

    def arrow_by_label(self, s: str) -> ArrowId:
        try:
            return self._labels[1][s]
        except KeyError:
            raise KeyError(f"no arrow labelled {s!r} in {self.name or 'space'}") from None


def same_space(a: HybridPhaseSpace, b: HybridPhaseSpace) -> bool:
    """Equal modes, boxes and arrow endpoints (relations are not compared)."""
    return a is b or a.signature == b.signature


@dataclass(frozen=True)
class Path:
    src: ModeId
    dst: ModeId
    arrows: tuple[ArrowId, ...] = ()

    @classmethod
    def identity(cls, mode: ModeId) -> "Path":
        return cls(mode, mode, ())

    def __len__(self):
        return len(self.arrows)

    def then(self, other: "Path") -> "Path":
        if self.dst != other.src:
            raise ValueError(f"cannot concatenate paths ending at {label(self.dst)} and starting at {label(other.src)}")
        return Path(self.src, other.dst, self.arrows + other.arrows)


def make_path(a: HybridPhaseSpace, arrows: Sequence[ArrowId], src: ModeId | None = None) -> Path:
    arrows = tuple(arrows)
    if not arrows:
        if src is None:
            raise ValueError("an empty path needs its mode")
        return Path.identity(src)
    cur = a.arrows[arrows[0]].src
    if src is not None and src != cur:
        raise ValueError("path does not start at the given mode")
    start = cur
    for aid in arrows:
        arr = a.arrows[aid]
        if arr.src != cur:
            raise ValueError(f"arrow {label(aid)} does not start at {label(cur)}")
        cur = arr.dst
    return Path(start, cur, arrows)


def check_path(a: HybridPhaseSpace, p: Path) -> None:
    if p.src not in a.modes or p.dst not in a.modes:
        raise ValueError(f"path endpoints {label(p.src)}->{label(p.dst)} are not modes")
    cur = p.src
    for aid in p.arrows:
        if aid not in a.arrows:
            raise ValueError(f"unknown arrow {label(aid)}")
        arr = a.arrows[aid]
        if arr.src != cur:
            raise ValueError(f"arrow {label(aid)} does not start at {label(cur)}")
        cur = arr.dst
    if cur != p.dst:
        raise ValueError(f"path ends at {label(cur)}, not {label(p.dst)}")


def path_relation(a: HybridPhaseSpace, p: Path) -> Relation:
    """Composite relation of a path; the empty path gives the identity relation."""
    rel = a._path_cache.get(p)
    if rel is not None:
        return rel
    check_path(a, p)
    rel = identity_rel(a.modes[p.src])
    for aid in p.arrows:
        rel = compose_rel(a.arrows[aid].rel, rel)
    a._path_cache[p] = rel
    return rel


def all_paths(a: HybridPhaseSpace, max_len: int, min_len: int = 0) -> list[Path]:
    """Every path with ``min_len <= length <= max_len``."""
    out = []
    frontier = [Path.identity(m) for m in a.modes]
    for length in range(max_len + 1):
        if length >= min_len:
            out.extend(frontier)
        frontier = [p.then(Path(a.arrows[g].src, a.arrows[g].dst, (g,)))
                    for p in frontier for g in a.out_arrows(p.dst)]
    return out


# --- maps ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class UnderlyingPoint:
    mode: ModeId
    point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", as_point(self.point))

    def __repr__(self):
        return f"{label(self.mode)}@{self.point.tolist()}"


@dataclass(frozen=True, eq=False)
class HyPhMap:
    dom: HybridPhaseSpace
    cod: HybridPhaseSpace
    obj: Mapping[ModeId, ModeId]
    arr: Mapping[ArrowId, Path]
    comps: Mapping[ModeId, SmoothFn]
    name: str = ""

    def __repr__(self):
        return f"HyPhMap({self.name or '?'}: {self.dom.name or '?'} -> {self.cod.name or '?'})"

    def __call__(self, p: UnderlyingPoint) -> UnderlyingPoint:
        return UnderlyingPoint(self.obj[p.mode], self.comps[p.mode](p.point))

    def image_path(self, p: Path) -> Path:
        out = Path.identity(self.obj[p.src])
        for aid in p.arrows:
            out = out.then(self.arr[aid])
        return out


def identity_map(a: HybridPhaseSpace) -> HyPhMap:
    return HyPhMap(
        a, a,
        {m: m for m in a.modes},
        {g: Path(arr.src, arr.dst, (g,)) for g, arr in a.arrows.items()},
        {m: SmoothFn.identity(b) for m, b in a.modes.items()},
        f"id_{a.name}",
    )


def compose_map(g: HyPhMap, f: HyPhMap) -> HyPhMap:
    """``g o f``."""
    if not same_space(f.cod, g.dom):
        raise ValueError(f"cannot compose {g} after {f}: spaces differ")
    return HyPhMap(
        f.dom, g.cod,
        {m: g.obj[f.obj[m]] for m in f.dom.modes},
        {a: g.image_path(f.arr[a]) for a in f.dom.arrows},
        {m: compose_fn(g.comps[f.obj[m]], f.comps[m]) for m in f.dom.modes},
        f"{g.name}.{f.name}",
    )


def underlying(a: HybridPhaseSpace) -> list[tuple[ModeId, Box]]:
    return list(a.modes.items())


def underlying_map(F: HyPhMap, tol: float | None = None) -> Callable[[UnderlyingPoint], UnderlyingPoint]:
    def U(p: UnderlyingPoint) -> UnderlyingPoint:
        if p.mode not in F.dom.modes:
            raise ValueError(f"unknown mode {label(p.mode)}")
        if not box_contains(F.dom.modes[p.mode], p.point, tol):
            raise ValueError(f"point {p} outside its mode box")
        return F(p)

    return U


# --- products ------------------------------------------------------------------

def _product_coords(spaces, mode_tuple):
    names = [n for s, m in zip(spaces, mode_tuple) for n in s.coords[m]]
    if len(set(names)) == len(names):
        return names
    return [f"{n}_{i + 1}" for i, (s, m) in enumerate(zip(spaces, mode_tuple)) for n in s.coords[m]]


def product_all(spaces: Sequence[HybridPhaseSpace], name: str | None = None) -> HybridPhaseSpace:
    """n-ary product; the empty product is the terminal space."""
    spaces = tuple(spaces)
    mode_tuples: list[tuple] = [()]
    for s in spaces:
        mode_tuples = [t + (m,) for t in mode_tuples for m in s.modes]
    modes = {t: Box([iv for s, m in zip(spaces, t) for iv in s.modes[m].intervals]) for t in mode_tuples}
    arrows = {}
    for t in mode_tuples:
        for i, s in enumerate(spaces):
            for g in s.out_arrows(t[i]):
                arr = s.arrows[g]
                aid = tuple(g if j == i else Stay(t[j]) for j in range(len(spaces)))
                dst = t[:i] + (arr.dst,) + t[i + 1:]
                rel = rel_product_all([
                    arr.rel if j == i else identity_rel(spaces[j].modes[t[j]]) for j in range(len(spaces))
                ])
                arrows[aid] = Arrow(t, dst, rel)
    coords = {t: _product_coords(spaces, t) for t in mode_tuples}
    if name is None:
        name = "x".join(s.name or "?" for s in spaces) if spaces else "pt"
    return HybridPhaseSpace(modes, arrows, name, coords, factors=spaces)


def terminal() -> HybridPhaseSpace:
    return product_all(())


def factor_offsets(P: HybridPhaseSpace, mode: tuple) -> list[int]:
    offs = [0]
    for s, m in zip(P.factors, mode):
        offs.append(offs[-1] + s.modes[m].dim)
    return offs


def projection(P: HybridPhaseSpace, i: int) -> HyPhMap:
    if P.factors is None:
        raise ValueError("projection needs a product space")
    target = P.factors[i]
    arr = {}
    for aid, a in P.arrows.items():
        if isinstance(aid[i], Stay):
            arr[aid] = Path.identity(a.src[i])
        else:
            arr[aid] = Path(a.src[i], a.dst[i], (aid[i],))
    comps = {}
    for t, box in P.modes.items():
        offs = factor_offsets(P, t)
        comps[t] = SmoothFn.projection(box, range(offs[i], offs[i + 1]), target.modes[t[i]], f"pr{i + 1}")
    return HyPhMap(P, target, {t: t[i] for t in P.modes}, arr, comps, f"pr{i + 1}")


def product(a: HybridPhaseSpace, b: HybridPhaseSpace) -> tuple[HybridPhaseSpace, HyPhMap, HyPhMap]:
    P = product_all((a, b))
    return P, projection(P, 0), projection(P, 1)


def lift_path(P: HybridPhaseSpace, i: int, p: Path, cur: tuple) -> tuple[Path, tuple]:
    """Lift a path of factor ``i`` into ``P`` starting from mode tuple ``cur``."""
    if cur[i] != p.src:
        raise ValueError("factor path does not start at the current factor mode")
    start = cur
    arrows = []
    for g in p.arrows:
        aid = tuple(g if j == i else Stay(cur[j]) for j in range(len(cur)))
        arrows.append(aid)
        cur = P.arrows[aid].dst
    return Path(start, cur, tuple(arrows)), cur


def tuple_map(maps: Sequence[HyPhMap], target: HybridPhaseSpace | None = None,
              dom: HybridPhaseSpace | None = None, name: str = "") -> HyPhMap:
    """The map ``c -> a1 x ... x an`` induced by maps ``zi: c -> ai``.

    An arrow is sent to the concatenation of the factor image paths, first
    factor first.
    """
    maps = list(maps)
    if dom is None:
        if not maps:
            raise ValueError("tuple_map of no maps needs an explicit domain")
        dom = maps[0].dom
    for z in maps:
        if not same_space(z.dom, dom):
            raise ValueError("tuple_map requires maps with a common domain")
    if target is None:
        target = product_all([z.cod for z in maps])
    elif target.factors is None or len(target.factors) != len(maps) or not all(
            same_space(f, z.cod) for f, z in zip(target.factors, maps)):
        raise ValueError("target is not the product of the map codomains")
    obj = {m: tuple(z.obj[m] for z in maps) for m in dom.modes}
    arr = {}
    for g, a in dom.arrows.items():
        cur = obj[a.src]
        path = Path.identity(cur)
        for i, z in enumerate(maps):
            piece, cur = lift_path(target, i, z.arr[g], cur)
            path = path.then(piece)
        arr[g] = path
    comps = {m: pairing([z.comps[m] for z in maps], dom.modes[m]) for m in dom.modes}
    return HyPhMap(dom, target, obj, arr, comps, name or "<" + ",".join(z.name for z in maps) + ">")


def pair(z1: HyPhMap, z2: HyPhMap, target: HybridPhaseSpace | None = None) -> HyPhMap:
    return tuple_map([z1, z2], target)


def diagonal(a: HybridPhaseSpace, n: int = 2, target: HybridPhaseSpace | None = None) -> HyPhMap:
    ida = identity_map(a)
    return tuple_map([ida] * n, target, name=f"diag{n}")


def product_map(maps: Sequence[HyPhMap], dom: HybridPhaseSpace | None = None,
                target: HybridPhaseSpace | None = None) -> HyPhMap:
    """``f1 x ... x fn`` between product spaces."""
    maps = list(maps)
    if dom is None:
        dom = product_all([f.dom for f in maps])
    projs = [projection(dom, i) for i in range(len(maps))]
    return tuple_map([compose_map(f, p) for f, p in zip(maps, projs)], target, dom,
                     name="x".join(f.name for f in maps))


def terminal_map(a: HybridPhaseSpace, T: HybridPhaseSpace | None = None) -> HyPhMap:
    T = T or terminal()
    (pt,) = T.modes
    return HyPhMap(
        a, T,
        {m: pt for m in a.modes},
        {g: Path.identity(pt) for g in a.arrows},
        {m: SmoothFn.constant(b, np.zeros(0), Box.point()) for m, b in a.modes.items()},
        "!",
    )


# --- validation ----------------------------------------------------------------

def structural_check(F: HyPhMap, report: Report | None = None) -> Report:
    report = report or Report(f"structure of {F.name or 'map'}")
    a, b = F.dom, F.cod
    for m, box in a.modes.items():
        if m not in F.obj:
            report.structural(f"mode {label(m)}", "no image mode")
            continue
        if F.obj[m] not in b.modes:
            report.structural(f"mode {label(m)}", f"image {label(F.obj[m])} is not a mode of the codomain")
            continue
        c = F.comps.get(m)
        if c is None:
            report.structural(f"mode {label(m)}", "no component map")
        elif c.dom.dim != box.dim or c.cod.dim != b.modes[F.obj[m]].dim:
            report.structural(f"mode {label(m)}",
                              f"component is {c.dom.dim}->{c.cod.dim}, expected "
                              f"{box.dim}->{b.modes[F.obj[m]].dim}")
    for g, arr in a.arrows.items():
        p = F.arr.get(g)
        if p is None:
            report.structural(f"arrow {label(g)}", "no image path")
            continue
        try:
            check_path(b, p)
        except (ValueError, KeyError) as exc:
            report.structural(f"arrow {label(g)}", f"image path invalid: {exc}")
            continue
        if arr.src in F.obj and arr.dst in F.obj and (p.src, p.dst) != (F.obj[arr.src], F.obj[arr.dst]):
            report.structural(f"arrow {label(g)}", "image path endpoints do not match the mode map")
    return report


def validate_map(F: HyPhMap, nsamples: int = 16, tol: float | None = None, seed: int = 0) -> Report:
    """Structural checks, then sampled 2-cell conditions for every arrow."""
    from .geometry import default_tol

    tol = default_tol() if tol is None else tol
    report = structural_check(F, Report(f"map {F.name or '?'}"))
    if not report.structural_ok:
        return report
    rng = np.random.default_rng(seed)
    a, b = F.dom, F.cod
    for m, box in a.modes.items():
        target = b.modes[F.obj[m]]
        for x in box.sample(rng, nsamples):
            y = F.comps[m](x)
            report.checked += 1
            if not box_contains(target, y, tol):
                report.semantic(f"mode {label(m)}", f"component sends {x.tolist()} outside the target box")
                break
    for g, arr in a.arrows.items():
        rel_b = path_relation(b, F.arr[g])
        cx, cy = F.comps[arr.src], F.comps[arr.dst]
        for k, br in enumerate(arr.rel.branches):
            for x in br.guard.sample(rng, nsamples):
                y = br.map(x)
                report.checked += 1
                if not member(rel_b, cx(x), cy(y), tol):
                    report.semantic(f"arrow {label(g)} branch {k}",
                                    f"reset {x.tolist()}->{y.tolist()} not carried into the image relation")
                    break
    return report


def validate_space(a: HybridPhaseSpace, nsamples: int = 16, tol: float | None = None, seed: int = 0) -> Report:
    """Every reset branch sends sampled guard points into the target box."""
    from .geometry import default_tol

    tol = default_tol() if tol is None else tol
    report = Report(f"space {a.name or '?'}")
    rng = np.random.default_rng(seed)
    for g, arr in a.arrows.items():
        target = a.modes[arr.dst]
        for k, br in enumerate(arr.rel.branches):
            if not br.guard.sub.subset_of(a.modes[arr.src]):
                report.structural(f"arrow {label(g)} branch {k}", "guard is not inside the source box")
                continue
            for x in br.guard.sample(rng, nsamples):
                y = br.map(x)
                report.checked += 1
                if not np.all(np.isfinite(y)) or not box_contains(target, y, tol):
                    report.semantic(f"arrow {label(g)} branch {k}",
                                    f"reset sends {x.tolist()} to {y.tolist()}, outside the target box of "
                                    f"{label(arr.dst)}")
                    break
    return report
