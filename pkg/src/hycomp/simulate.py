"""Fixed-step simulation of hybrid dynamical systems.

Each mode is integrated with a fixed step (RK4 or Euler).  After every
step the pinned coordinates of the out-arrow guards are checked for a sign
change of ``x_j - c_j``; the crossing time is located by bisection on the
length of a single integrator step, and the state is taken on the side
that has not crossed yet.  Jumps are urgent: an enabled arrow fires at the
first contact.  After a jump, further pinned guards that already hold are
chained into one composite jump at the same instant (up to
``SimConfig.chain_depth`` arrows).  A state on a guard at the initial time
does not fire.

If the flow leaves the mode box with no pinned event, the exit point is
located by bisection and any arrow enabled there (pinned or not) fires;
otherwise the run stops with status ``stuck``.

Statuses: ``t-max``, ``jump-limit``, ``stuck``, ``nan``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import as_point, box_contains, default_tol
from .hyds import Execution, HybridDynamicalSystem, Segment
from .hyph import ArrowId, ModeId, Path, UnderlyingPoint, label

POLICIES = ("priority", "first-enabled", "seeded-random")

# validate_execution tolerance for simulator output is SIM_TOL_CONSTANT * step**2
SIM_TOL_CONSTANT = 10.0


@dataclass(frozen=True)
class JumpPolicy:
    kind: str = "priority"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in POLICIES:
            raise ValueError(f"unknown jump policy {self.kind!r}; choose from {', '.join(POLICIES)}")


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    Jumps are urgent: they fire as soon as a guard is reached.
    ``max_jumps`` counts jump instants (a chained composite counts once).
    """

    step: float = 1e-3
    t_max: float = 10.0
    max_jumps: int = 100
    event_tol: float = 1e-12
    integrator: str = "rk4"
    chain_depth: int = 4
    t0: float = 0.0

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not self.event_tol > 0:
            raise ValueError("event_tol must be positive")
        if self.max_jumps < 0:
            raise ValueError("max_jumps must be non-negative")
        if self.integrator not in ("rk4", "euler"):
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if self.chain_depth < 1:
            raise ValueError("chain_depth must be at least 1")
        if not self.t_max >= self.t0:
            raise ValueError("t_max must not precede t0")


def sim_tolerance(cfg: SimConfig) -> float:
    """Documented flow-residual tolerance for executions produced with ``cfg``."""
    if cfg.integrator == "euler":
        return SIM_TOL_CONSTANT * cfg.step
    return SIM_TOL_CONSTANT * cfg.step ** 2


def _stepper(kind: str, X: Callable) -> Callable[[np.ndarray, float], np.ndarray]:
    if kind == "euler":
        return lambda x, h: x + h * X(x)

    def rk4(x, h):
        k1 = X(x)
        k2 = X(x + 0.5 * h * k1)
        k3 = X(x + 0.5 * h * k2)
        k4 = X(x + h * k3)
        return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

    return rk4


def enabled_arrows(h: HybridDynamicalSystem, state: UnderlyingPoint, tol: float | None = None,
                   pinned_only: bool = False) -> list[ArrowId]:
    """Out-arrows of the state's mode with some branch guard containing the state."""
    out = []
    for a in h.space.out_arrows(state.mode):
        for br in h.space.arrows[a].rel.branches:
            if pinned_only and not br.guard.pinned:
                continue
            if br.guard.contains(state.point, tol):
                out.append(a)
                break
    return out


def _sign(v: float) -> int:
    v = float(v)
    return (v > 0) - (v < 0)


class _Run:
    def __init__(self, h, init, policy, cfg, tol):
        self.h, self.cfg, self.policy = h, cfg, policy
        self.tol = default_tol() if tol is None else tol
        self.rng = np.random.default_rng(policy.seed)
        self.track = [cfg.t0]
        self.modes = [init.mode]
        self.jumps: list[Path] = []
        self.segs: list[Segment] = []
        self.mode = init.mode
        self.x = init.point
        self.t = cfg.t0

    def choose(self, arrows, trigger=None):
        if not arrows:
            return None
        if self.policy.kind == "seeded-random":
            return arrows[int(self.rng.integers(len(arrows)))]
        if self.policy.kind == "first-enabled" and trigger in arrows:
            return trigger
        return arrows[0]

    def fire(self, a, x):
        """Apply arrow ``a`` at ``x``; returns the reset point."""
        branches = [br for br in self.h.space.arrows[a].rel.branches if br.guard.contains(x, self.tol)]
        br = branches[0]
        if self.policy.kind == "seeded-random" and len(branches) > 1:
            br = branches[int(self.rng.integers(len(branches)))]
        return br.map(x)

    def candidates(self, mode):
        """(arrow, coordinate, pin value) for every pinned guard coordinate of the mode."""
        out = []
        for a in self.h.space.out_arrows(mode):
            for br in self.h.space.arrows[a].rel.branches:
                for j in br.guard.pinned:
                    out.append((a, j, br.guard.sub.intervals[j].lo))
        return out

    def bisect(self, step, x, h, crossed):
        """Largest s in [0, h] (to event_tol) with ``crossed(step(x, s))`` false."""
        lo, hi = 0.0, h
        while hi - lo > self.cfg.event_tol:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if crossed(step(x, mid)):
                hi = mid
            else:
                lo = mid
        return lo, hi

    def run(self) -> Execution:
        cfg, h = self.cfg, self.h
        njumps = 0
        status = "t-max"
        while True:
            box = h.space.modes[self.mode]
            X = h.field[self.mode]
            step = _stepper(cfg.integrator, X)
            cands = self.candidates(self.mode)
            times, pts = [self.t], [self.x.copy()]
            t, x = self.t, self.x
            event = None  # (arrows, trigger, time, point)
            stop = None
            while t < cfg.t_max:
                dt = min(cfg.step, cfg.t_max - t)
                if t + dt >= cfg.t_max - 1e-12 * max(1.0, abs(cfg.t_max)):
                    dt = cfg.t_max - t
                xn = step(x, dt)
                if not np.all(np.isfinite(xn)):
                    stop = "nan"
                    break
                # pinned guard crossings within this step
                hits = []
                for a, j, c in cands:
                    s0, s1 = _sign(x[j] - c), _sign(xn[j] - c)
                    if s0 != 0 and s1 != s0:
                        crossed = (lambda y, j=j, c=c, s0=s0: _sign(y[j] - c) != s0)
                        lo, hi = self.bisect(step, x, dt, crossed)
                        s = lo if lo > 0 else hi
                        hits.append((s, a))
                hits.sort(key=lambda p: p[0])
                found = False
                for s, a in hits:
                    y = step(x, s)
                    arrows = enabled_arrows(h, UnderlyingPoint(self.mode, y), self.tol, pinned_only=True)
                    if not box_contains(box, y, self.tol):
                        break
                    if arrows:
                        event = (arrows, a, t + s, y)
                        found = True
                        break
                if found:
                    break
                if not box_contains(box, xn, self.tol):
                    outside = lambda y: not box_contains(box, y, self.tol)
                    lo, _ = self.bisect(step, x, dt, outside)
                    y = step(x, lo) if lo > 0 else x
                    arrows = enabled_arrows(h, UnderlyingPoint(self.mode, y), self.tol)
                    if arrows:
                        if lo > 0:
                            event = (arrows, None, t + lo, y)
                        else:
                            event = (arrows, None, t, x)
                    else:
                        if lo > 0:
                            times.append(t + lo)
                            pts.append(y)
                        stop = "stuck"
                    break
                t, x = t + dt, xn
                times.append(t)
                pts.append(xn)
            if event is not None:
                arrows, trigger, te, y = event
                if te > times[-1]:
                    times.append(te)
                    pts.append(y)
                else:
                    y = pts[-1]
            self.segs.append(Segment(np.array(times), np.array(pts)))
            if stop is not None:
                status = stop
                break
            if event is None:
                break
            if te <= self.track[-1]:
                # event at the very start of a segment: no forward progress possible
                status = "stuck"
                break
            if njumps >= cfg.max_jumps:
                status = "jump-limit"
                break
            # fire, then chain further pinned guards at the same instant
            arrows, trigger, te, _ = event
            path_ids = []
            mode, pt = self.mode, y
            while arrows and len(path_ids) < cfg.chain_depth:
                a = self.choose(arrows, trigger if not path_ids else None)
                pt = self.fire(a, pt)
                path_ids.append(a)
                mode = h.space.arrows[a].dst
                arrows = enabled_arrows(h, UnderlyingPoint(mode, pt), self.tol, pinned_only=True)
            njumps += 1
            self.track.append(te)
            self.jumps.append(Path(self.mode, mode, tuple(path_ids)))
            self.modes.append(mode)
            self.mode, self.x, self.t = mode, as_point(pt), te
            if not box_contains(h.space.modes[mode], self.x, self.tol):
                status = "stuck"
                self.segs.append(Segment(np.array([te]), np.array([self.x])))
                break
        # track[i] is the start of segment i; close it with the end time of the
        # last segment, dropping a trailing zero-length segment and its jump
        end = float(self.segs[-1].times[-1])
        if end > self.track[-1]:
            self.track.append(end)
        elif len(self.segs) > 1:
            self.segs.pop()
            self.modes.pop()
            self.jumps.pop()
        return Execution(self.track, self.modes, self.jumps, self.segs, status,
                         {"policy": self.policy.kind, "seed": self.policy.seed, "step": cfg.step,
                          "integrator": cfg.integrator})


def simulate(h: HybridDynamicalSystem, init: UnderlyingPoint, policy: JumpPolicy | None = None,
             cfg: SimConfig | None = None, tol: float | None = None) -> Execution:
    """Generate one execution of ``h`` starting at ``init``."""
    policy = policy or JumpPolicy()
    cfg = cfg or SimConfig()
    if init.mode not in h.space.modes:
        raise ValueError(f"unknown initial mode {label(init.mode)}")
    if not box_contains(h.space.modes[init.mode], init.point, tol):
        raise ValueError(f"initial point {init.point.tolist()} is outside the box of mode {label(init.mode)}")
    return _Run(h, UnderlyingPoint(init.mode, as_point(init.point)), policy, cfg, tol).run()
