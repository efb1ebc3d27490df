"""Hybrid dynamical systems, executions and their validation.

An execution is a finite time track ``t0 < t1 < ... < tn``, one flow
segment per interval, and one jump path per interior time.  Several jumps
at the same instant are stored as a single composite path, so the track
stays strictly increasing.  A track of length one holds a single
zero-length segment.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .geometry import Box, SmoothFn, as_point, box_contains, concat, default_tol, differential
from .hyph import (HybridPhaseSpace, HyPhMap, ModeId, Path, check_path, label, path_relation,
                   product_all, same_space, structural_check)
from .relations import member
from .report import Report

VectorField = Mapping[ModeId, SmoothFn]

JSON_SCHEMA_VERSION = 1


class HybridDynamicalSystem:
    """A phase space with one vector field per mode (coordinates of tangent vectors)."""

    def __init__(self, space: HybridPhaseSpace, field: VectorField, name: str = ""):
        if set(field) != set(space.modes):
            raise ValueError("vector field modes do not match the phase space modes")
        for m, X in field.items():
            d = space.modes[m].dim
            if X.dom.dim != d or X.cod.dim != d:
                raise ValueError(f"field on mode {label(m)} is {X.dom.dim}->{X.cod.dim}, expected {d}->{d}")
        self.space = space
        self.field = dict(field)
        self.name = name or space.name

    def __repr__(self):
        return f"HDS({self.name})"

    def __call__(self, mode: ModeId, x) -> np.ndarray:
        return self.field[mode](x)


HDS = HybridDynamicalSystem


def hds_product(systems: Sequence[HybridDynamicalSystem], space: HybridPhaseSpace | None = None,
                name: str | None = None) -> HybridDynamicalSystem:
    """Product system: the factor fields act on their own coordinate blocks."""
    systems = list(systems)
    P = space or product_all([h.space for h in systems])
    field = {}
    for t, box in P.modes.items():
        F = concat([h.field[m] for h, m in zip(systems, t)])
        field[t] = SmoothFn(box, Box.real(box.dim), F.fn, F.jac, F.affine, F.label)
    return HybridDynamicalSystem(P, field, name or P.name)


def check_hds_map(F: HyPhMap, src: HybridDynamicalSystem, dst: HybridDynamicalSystem,
                  nsamples: int = 16, tol: float | None = None, seed: int = 0) -> Report:
    """Sampled relatedness ``DPhi_m(x) X_m(x) = Y_phi(m)(Phi_m(x))``."""
    tol = default_tol() if tol is None else tol
    report = Report(f"hds map {F.name or '?'}")
    if not (same_space(F.dom, src.space) and same_space(F.cod, dst.space)):
        report.structural("spaces", "map endpoints differ from the systems' phase spaces")
        return report
    structural_check(F, report)
    if not report.structural_ok:
        return report
    rng = np.random.default_rng(seed)
    for m, box in src.space.modes.items():
        Phi, X, Y = F.comps[m], src.field[m], dst.field[F.obj[m]]
        worst, at = 0.0, None
        for x in box.sample(rng, nsamples):
            r = float(np.max(np.abs(differential(Phi, x) @ X(x) - Y(Phi(x))), initial=0.0))
            if not r <= worst:
                worst, at = r, x
        report.residual(worst, tol, f"mode {label(m)}",
                        f"fields not related (worst at {None if at is None else at.tolist()})")
    return report


# --- executions ----------------------------------------------------------------

@dataclass
class Segment:
    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float).reshape(-1)
        pts = np.asarray(self.points, dtype=float)
        n = self.times.shape[0]
        self.points = np.zeros((n, 0)) if pts.size == 0 else pts.reshape(n, -1)


@dataclass
class Execution:
    track: list[float]
    modes: list[ModeId]
    jumps: list[Path]
    segments: list[Segment]
    status: str = "ok"
    meta: dict = field(default_factory=dict)

    @property
    def jump_times(self) -> list[float]:
        return list(self.track[1:-1])

    @property
    def final(self) -> tuple[ModeId, np.ndarray]:
        return self.modes[-1], self.segments[-1].points[-1]


def structural_issues(e: Execution, space: HybridPhaseSpace, report: Report) -> None:
    n = len(e.track)
    if n == 0:
        report.structural("track", "empty time track")
        return
    if any(not b > a for a, b in zip(e.track, e.track[1:])):
        report.structural("track", "time track is not strictly increasing")
    nseg = max(n - 1, 1)
    if len(e.modes) != nseg or len(e.segments) != nseg or len(e.jumps) != nseg - 1:
        report.structural("shape", f"{n} times need {nseg} modes/segments and {nseg - 1} jumps")
        return
    for i, m in enumerate(e.modes):
        if m not in space.modes:
            report.structural(f"segment {i}", f"unknown mode {label(m)}")
    for i, p in enumerate(e.jumps):
        try:
            check_path(space, p)
        except (ValueError, KeyError) as exc:
            report.structural(f"jump {i}", str(exc))
            continue
        if (p.src, p.dst) != (e.modes[i], e.modes[i + 1]):
            report.structural(f"jump {i}", "path endpoints do not match the adjacent segment modes")
    for i, s in enumerate(e.segments):
        if s.times.shape[0] == 0:
            report.structural(f"segment {i}", "no samples")
        elif e.modes[i] in space.modes and s.points.shape[1] != space.modes[e.modes[i]].dim:
            report.structural(f"segment {i}", "sample dimension differs from the mode box")


def validate_execution(e: Execution, h: HybridDynamicalSystem, tol: float | None = None,
                       jump_tol: float | None = None) -> Report:
    """Check flow, jump and time-endpoint conditions of an execution.

    Flow: for consecutive samples, ``|dx - dt X(mid)| <= tol dt (1 + |X|)``
    plus a rounding floor of a few ulps of the state.  Jumps: the last
    sample of segment ``i`` and the first of segment ``i+1`` lie in the
    relation of the jump path.
    """
    tol = default_tol() if tol is None else tol
    jump_tol = max(tol, default_tol()) if jump_tol is None else jump_tol
    report = Report(f"execution of {h.name}")
    structural_issues(e, h.space, report)
    if not report.structural_ok:
        return report
    eps = np.finfo(float).eps
    single = len(e.track) == 1
    for i, (m, seg) in enumerate(zip(e.modes, e.segments)):
        box, X = h.space.modes[m], h.field[m]
        t0, t1 = (e.track[0], e.track[0]) if single else (e.track[i], e.track[i + 1])
        tscale = 4 * eps * (1 + abs(t0) + abs(t1))
        if abs(seg.times[0] - t0) > tscale or abs(seg.times[-1] - t1) > tscale:
            report.semantic(f"segment {i}", f"samples span [{seg.times[0]}, {seg.times[-1]}], track says [{t0}, {t1}]")
        if np.any(np.diff(seg.times) <= 0):
            report.semantic(f"segment {i}", "sample times not increasing")
            continue
        for k, x in enumerate(seg.points):
            if not box_contains(box, x, jump_tol):
                report.semantic(f"segment {i}", f"sample {k} at {x.tolist()} leaves the mode box")
                break
        worst = 0.0
        for k in range(seg.times.shape[0] - 1):
            dt = seg.times[k + 1] - seg.times[k]
            xa, xb = seg.points[k], seg.points[k + 1]
            v = X(0.5 * (xa + xb))
            floor = 4 * eps * (1 + max(np.max(np.abs(xa), initial=0), np.max(np.abs(xb), initial=0)))
            err = np.max(np.abs(xb - xa - dt * v), initial=0.0)
            r = max(err - floor, 0.0) / (dt * (1 + np.max(np.abs(v), initial=0.0)))
            if math.isnan(err):
                r = math.nan
            if not r <= worst:
                worst = r
        report.residual(worst, tol, f"segment {i}", "samples do not follow the vector field")
    for i, p in enumerate(e.jumps):
        x, y = e.segments[i].points[-1], e.segments[i + 1].points[0]
        report.checked += 1
        if not member(path_relation(h.space, p), x, y, jump_tol):
            report.semantic(f"jump {i}", f"{label(p.src)}@{x.tolist()} -> {label(p.dst)}@{y.tolist()} "
                                         f"is not in the relation of path {[label(a) for a in p.arrows]}")
    return report


def pushforward_execution(F: HyPhMap, e: Execution) -> Execution:
    """Image of an execution under a map: same track, mapped modes, paths and samples."""
    for m in e.modes:
        if m not in F.obj:
            raise ValueError(f"mode {label(m)} is not in the map's domain")
    segs = []
    for m, s in zip(e.modes, e.segments):
        Phi = F.comps[m]
        segs.append(Segment(s.times.copy(), np.array([Phi(x) for x in s.points])))
    return Execution(
        list(e.track),
        [F.obj[m] for m in e.modes],
        [F.image_path(p) for p in e.jumps],
        segs,
        e.status,
        dict(e.meta),
    )


# --- serialization -------------------------------------------------------------

def _event(p: Path) -> str:
    return "jump:" + "+".join(label(a) for a in p.arrows) if p.arrows else "jump:id"


def execution_rows(e: Execution) -> list[tuple[float, str, list[float], str]]:
    """One row per sample; the first sample after a jump carries the jump event."""
    rows = []
    for i, (m, s) in enumerate(zip(e.modes, e.segments)):
        for k, (t, x) in enumerate(zip(s.times, s.points)):
            ev = _event(e.jumps[i - 1]) if i > 0 and k == 0 else "flow"
            rows.append((float(t), label(m), [float(v) for v in x], ev))
    return rows


def to_csv(e: Execution) -> str:
    rows = execution_rows(e)
    width = max((len(r[2]) for r in rows), default=0)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "mode"] + [f"x{i}" for i in range(width)] + ["event"])
    for t, m, x, ev in rows:
        w.writerow([repr(t), m] + [repr(v) for v in x] + [""] * (width - len(x)) + [ev])
    return buf.getvalue()


def to_json(e: Execution) -> str:
    doc = {
        "schema": JSON_SCHEMA_VERSION,
        "status": e.status,
        "track": [float(t) for t in e.track],
        "modes": [label(m) for m in e.modes],
        "jumps": [[label(a) for a in p.arrows] for p in e.jumps],
        "segments": [
            {"t": s.times.tolist(), "x": s.points.tolist()} for s in e.segments
        ],
    }
    return json.dumps(doc, indent=1)


def from_json(text: str, space: HybridPhaseSpace) -> Execution:
    doc = json.loads(text)
    modes = [space.mode_by_label(m) for m in doc["modes"]]
    jumps = []
    for i, arrows in enumerate(doc["jumps"]):
        ids = tuple(space.arrow_by_label(a) for a in arrows)
        jumps.append(Path(modes[i], modes[i + 1], ids))
    segs = [Segment(np.array(s["t"], dtype=float), np.array(s["x"], dtype=float)) for s in doc["segments"]]
    return Execution(list(doc["track"]), modes, jumps, segs, doc.get("status", "ok"))
