"""Fixed-step hybrid-system execution.

Integrates a vector field with classical RK4, watches a scalar guard for
sign changes between consecutive samples, localizes each crossing by
bisection on time, applies a reset chosen by a branch policy, and
resumes.  Time-reversed execution with inverse resets is supported for
systems that provide them.  Everything is a pure function of its
arguments: identical inputs give bit-identical trajectories.

States are plain tuples of floats; fields are callables (t, state) ->
state-derivative tuple.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence


class NumericalBlowup(RuntimeError):
    """RK4 produced a non-finite component."""

    def __init__(self, t, state):
        super().__init__(f"non-finite state at t={t}: {state}")
        self.t = t
        self.state = state


class MaxBisectionDepth(RuntimeError):
    """128 halvings failed to shrink the event bracket (pathological guard)."""


class MaxEventsExceeded(RuntimeError):
    """More resets than ExecConfig.max_events: suspected Zeno behavior."""

    def __init__(self, t):
        super().__init__(f"event cap reached at t={t}")
        self.t = t


class InverseResetUnavailable(RuntimeError):
    """Backward execution needs an inverse reset the system does not define."""


@dataclass(frozen=True)
class HybridSystemDef:
    """A flow, a guard, and a reset.

    field(t, x) -> dx/dt; guard(x) -> scalar, zero on the guard set;
    reset(x, tag) -> post state for a branch tag drawn from branch_tags.
    backward_guard/inverse_reset describe the post-reset image of the
    guard and the reset's inverse; both are required only for
    execute_backward.
    """

    dimension: int
    field: Callable
    guard: Callable
    reset: Callable
    branch_tags: tuple = ("+", "-")
    backward_guard: Optional[Callable] = None
    inverse_reset: Optional[Callable] = None


@dataclass(frozen=True)
class ExecConfig:
    """Executor knobs: step size, event bracket width, anti-Zeno limits."""

    step: float
    event_tol: float = 1e-10
    max_events: int = 32
    min_dwell: float = 0.0

    def __post_init__(self):
        if self.step <= 0.0:
            raise ValueError("step must be positive")
        if self.event_tol <= 0.0:
            raise ValueError("event_tol must be positive")
        if self.event_tol >= self.step:
            raise ValueError("event_tol must be smaller than step")
        if self.max_events < 1:
            raise ValueError("max_events must be at least 1")
        dwell = self.min_dwell if self.min_dwell else 2.0 * self.event_tol
        if dwell < 2.0 * self.event_tol:
            raise ValueError("min_dwell must be at least 2*event_tol")
        object.__setattr__(self, "min_dwell", dwell)


@dataclass
class Arc:
    """One continuous piece of a hybrid trajectory, sampled on its own grid."""

    times: list
    states: list

    @property
    def t_start(self) -> float:
        return self.times[0]

    @property
    def t_end(self) -> float:
        return self.times[-1]


@dataclass
class Event:
    """A localized guard crossing: pre/post states in forward-time order."""

    t: float
    pre_state: tuple
    post_state: tuple
    branch: object


@dataclass
class HybridTrajectory:
    """Contiguous arcs separated by events, ordered by increasing time."""

    arcs: list = dc_field(default_factory=list)
    events: list = dc_field(default_factory=list)

    @property
    def t0(self) -> float:
        return self.arcs[0].t_start

    @property
    def tf(self) -> float:
        return self.arcs[-1].t_end

    def initial_state(self) -> tuple:
        return self.arcs[0].states[0]

    def terminal_state(self) -> tuple:
        return self.arcs[-1].states[-1]

    def sample(self, t: float) -> tuple:
        """State at time t, linearly interpolated inside the owning arc.

        At an event time the post-reset side wins; t is clamped to the
        covered interval.
        """
        starts = [a.t_start for a in self.arcs]
        i = bisect_right(starts, t) - 1
        if i < 0:
            i = 0
        arc = self.arcs[i]
        ts, xs = arc.times, arc.states
        if t <= ts[0]:
            return xs[0]
        if t >= ts[-1]:
            return xs[-1]
        j = bisect_right(ts, t) - 1
        h = ts[j + 1] - ts[j]
        w = (t - ts[j]) / h if h != 0.0 else 0.0
        a, b = xs[j], xs[j + 1]
        return tuple(ai + w * (bi - ai) for ai, bi in zip(a, b))


def rk4_step(field: Callable, t: float, x: tuple, h: float) -> tuple:
    """One classical Runge-Kutta step of (possibly negative) size h."""
    k1 = field(t, x)
    x2 = tuple(xi + 0.5 * h * ki for xi, ki in zip(x, k1))
    k2 = field(t + 0.5 * h, x2)
    x3 = tuple(xi + 0.5 * h * ki for xi, ki in zip(x, k2))
    k3 = field(t + 0.5 * h, x3)
    x4 = tuple(xi + h * ki for xi, ki in zip(x, k3))
    k4 = field(t + h, x4)
    out = tuple(
        xi + (h / 6.0) * (a + 2.0 * b + 2.0 * c + d)
        for xi, a, b, c, d in zip(x, k1, k2, k3, k4)
    )
    for v in out:
        if not math.isfinite(v):
            raise NumericalBlowup(t, x)
    return out


def integrate_arc(field: Callable, x0: tuple, t0: float, t1: float,
                  step: float) -> Arc:
    """RK4 samples from t0 to t1 inclusive; no guard handling.

    Steps are uniform of size `step` in the direction of t1, with a final
    shortened step landing exactly on t1.  t1 == t0 gives a single-sample
    arc.
    """
    times = [t0]
    states = [tuple(x0)]
    if t1 == t0:
        return Arc(times, states)
    sgn = 1.0 if t1 > t0 else -1.0
    h = sgn * step
    span = abs(t1 - t0)
    n_full = int(math.floor(span / step + 1e-12))
    if abs(n_full * step - span) <= 1e-12 * max(1.0, span):
        n_full = max(n_full - 1, 0)  # last full step becomes the landing step
    x, t = tuple(x0), t0
    for k in range(n_full):
        x = rk4_step(field, t, x, h)
        t = t0 + (k + 1) * h
        times.append(t)
        states.append(x)
    x = rk4_step(field, t, x, t1 - t)
    times.append(t1)
    states.append(x)
    return Arc(times, states)


def locate_event(field: Callable, guard: Callable, t_lo: float, x_lo: tuple,
                 t_hi: float, x_hi: tuple, config: ExecConfig) -> tuple:
    """Bisect a bracketed guard crossing down to event_tol in time.

    (t_lo, x_lo) is the bracket start in the direction of integration;
    guard values at the two ends must have strictly opposite signs.
    Every probe re-integrates from (t_lo, x_lo) so the result is a state
    of the same discrete flow.  Returns (t*, x*) on the pre-event side.
    """
    g_lo = guard(x_lo)
    g_hi = guard(x_hi)
    if g_lo == 0.0 or g_hi == 0.0 or (g_lo > 0.0) == (g_hi > 0.0):
        raise ValueError(
            f"guard values do not bracket a crossing: {g_lo} and {g_hi}")
    t0, x0 = t_lo, x_lo
    a, xa = t_lo, x_lo
    b = t_hi
    for _ in range(128):
        if abs(b - a) < config.event_tol:
            return a, xa
        mid = 0.5 * (a + b)
        x_mid = rk4_step(field, t0, x0, mid - t0) if mid != t0 else x0
        g_mid = guard(x_mid)
        if g_mid == 0.0:
            return mid, x_mid
        if (g_mid > 0.0) == (g_lo > 0.0):
            a, xa = mid, x_mid
        else:
            b = mid
    raise MaxBisectionDepth(
        f"bracket [{a}, {b}] not below event_tol after 128 halvings")


def always_plus(index: int, state: tuple) -> str:
    return "+"


def always_minus(index: int, state: tuple) -> str:
    return "-"


def sequence_policy(tags: Sequence, fallback: Optional[Callable] = None):
    """Follow a fixed tag sequence, then defer to `fallback` (if any)."""

    tags = tuple(tags)

    def policy(index: int, state: tuple):
        if index < len(tags):
            return tags[index]
        if fallback is None:
            raise IndexError(f"no branch tag for event index {index}")
        return fallback(index, state)

    return policy


def _execute_directed(field, guard, reset, branch_tags, x0, t0, tf, config,
                      branch_policy):
    """Shared forward/backward core; tf < t0 integrates in reverse."""
    if guard(x0) == 0.0:
        raise ValueError("initial state lies exactly on the guard")
    sgn = 1.0 if tf > t0 else -1.0
    h_nom = sgn * config.step

    arcs = []
    events = []
    arc_t0 = t0
    times = [t0]
    states = [tuple(x0)]
    x = tuple(x0)
    t = t0
    k = 0
    g_prev = guard(x)
    t_last_event = None

    while (tf - t) * sgn > 1e-15 * max(1.0, abs(tf)):
        remaining = (tf - t) * sgn
        if remaining <= config.step * (1.0 + 1e-12):
            h = tf - t
            t_new = tf
        else:
            h = h_nom
            t_new = arc_t0 + (k + 1) * h_nom
        x_new = rk4_step(field, t, x, h)
        g_new = guard(x_new)

        in_refractory = (
            t_last_event is not None
            and (t_new - t_last_event) * sgn < config.min_dwell
        )
        crossed = (not in_refractory) and (
            g_new == 0.0 or (g_new > 0.0) != (g_prev > 0.0)
        )
        if crossed:
            if g_new == 0.0:
                t_ev, x_pre = t_new, x_new
            else:
                t_ev, x_pre = locate_event(field, guard, t, x, t_new, x_new,
                                           config)
            if len(events) >= config.max_events:
                raise MaxEventsExceeded(t_ev)
            tag = branch_policy(len(events), x_pre)
            if tag not in branch_tags:
                raise ValueError(f"branch policy returned unknown tag {tag!r}")
            x_post = reset(x_pre, tag)
            g_post = guard(x_post)
            if abs(g_post) <= 10.0 * config.event_tol:
                raise RuntimeError(
                    "reset landed on the guard; resets must leave it")
            times.append(t_ev)
            states.append(x_pre)
            arcs.append(Arc(times, states))
            events.append(Event(t_ev, x_pre, x_post, tag))
            arc_t0 = t_ev
            times = [t_ev]
            states = [x_post]
            x, t, k = x_post, t_ev, 0
            g_prev = g_post
            t_last_event = t_ev
            continue

        times.append(t_new)
        states.append(x_new)
        x, t = x_new, t_new
        k += 1
        g_prev = g_new

    arcs.append(Arc(times, states))
    return arcs, events


def execute(system: HybridSystemDef, x0: tuple, t0: float, tf: float,
            config: ExecConfig, branch_policy: Callable = always_plus
            ) -> HybridTrajectory:
    """Run the hybrid system forward from t0 to tf.

    Alternates RK4 arcs, bisection event localization, and resets; after
    each reset the guard is ignored for min_dwell time.  Raises
    MaxEventsExceeded past config.max_events and NumericalBlowup on
    non-finite states.
    """
    arcs, events = _execute_directed(
        system.field, system.guard, system.reset, system.branch_tags,
        x0, t0, tf, config, branch_policy)
    return HybridTrajectory(arcs, events)


def execute_backward(system: HybridSystemDef, x_T: tuple, tf: float,
                     t0: float, config: ExecConfig,
                     branch_policy: Callable = always_plus
                     ) -> HybridTrajectory:
    """Run from tf down to t0, inverting resets, then reorder forward.

    Events are detected on backward_guard (the post-reset image of the
    guard) and undone with inverse_reset; the branch policy sees events
    in backward encounter order.  The returned trajectory increases in
    time and uses forward pre/post semantics in its event records.
    """
    if system.backward_guard is None:
        arc = integrate_arc(system.field, x_T, tf, t0, config.step)
        arc.times.reverse()
        arc.states.reverse()
        return HybridTrajectory([arc], [])
    if system.inverse_reset is None:
        raise InverseResetUnavailable(
            "system defines backward_guard but no inverse_reset")
    arcs, events = _execute_directed(
        system.field, system.backward_guard, system.inverse_reset,
        system.branch_tags, x_T, tf, t0, config, branch_policy)
    for arc in arcs:
        arc.times.reverse()
        arc.states.reverse()
    arcs.reverse()
    fwd_events = [
        Event(e.t, pre_state=e.post_state, post_state=e.pre_state,
              branch=e.branch)
        for e in reversed(events)
    ]
    return HybridTrajectory(arcs, fwd_events)


class _Fork(Exception):
    """Internal: a branch choice beyond the fixed prefix was requested."""


def execute_tree(system: HybridSystemDef, x0: tuple, t0: float, tf: float,
                 config: ExecConfig) -> list:
    """Enumerate every branch choice; returns [(branch_path, trajectory)].

    branch_path concatenates the tags taken, in event order.  Leaves are
    re-executed from scratch, which keeps them bit-identical to a direct
    execute() call with the same choices.
    """
    results = []

    def expand(prefix):
        def policy(index, state):
            if index < len(prefix):
                return prefix[index]
            raise _Fork()

        try:
            traj = execute(system, x0, t0, tf, config, policy)
        except _Fork:
            for tag in system.branch_tags:
                expand(prefix + (tag,))
            return
        results.append(("".join(str(t) for t in prefix), traj))

    expand(())
    return results
