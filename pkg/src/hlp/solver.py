"""Iterative forward-backward solver for the guarded steering problem.

One sweep: read the terminal cost differential at the current terminal
guess, integrate the reduced momentum system backward (undoing momentum
jumps where the trajectory leaves the post-reset heading), then replay
the plant forward under the recovered controls.  The terminal guess is
then moved toward the achieved terminal state and the sweep repeats
until successive achieved terminal states stop moving.

Convergence of the sweep is not guaranteed in general; the report says
honestly whether the loop settled, and mismatched event counts between
the two passes are surfaced as warnings rather than hidden.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

from .group import GroupElement, coset_project, signed_gap, wrap_angle
from .hybrid import (
    ExecConfig,
    HybridSystemDef,
    HybridTrajectory,
    always_plus,
    execute,
    execute_backward,
    sequence_policy,
)
from .se2 import (
    PlantParams,
    plant_hybrid_system,
    reduced_hybrid_system,
    terminal_momentum,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OcpProblem:
    """Fixed-horizon steering problem with a terminal cost."""

    g_init: GroupElement
    t0: float
    tf: float
    phi: Callable
    params: PlantParams
    branch_policy: Callable = always_plus

    def __post_init__(self):
        if not self.tf > self.t0:
            raise ValueError("tf must exceed t0")
        if abs(signed_gap(self.g_init.theta, self.params.theta_star)) == 0.0:
            raise ValueError("initial state must start off the guard")


@dataclass(frozen=True)
class SolveConfig:
    """Loop knobs: stop distance, iteration cap, damping, executor config."""

    tol: float
    max_iters: int
    relaxation: float
    exec: ExecConfig

    def __post_init__(self):
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not 0.0 < self.relaxation <= 1.0:
            raise ValueError("relaxation must lie in (0, 1]")


@dataclass
class IterationRecord:
    """One sweep: the guess used, both passes, and the distance moved.

    delta_g is the loop's stopping measure: the larger of the achieved
    terminal state's move since the previous sweep and its distance from
    the guess that produced it.  With relaxation 1 both coincide with
    the distance between successive terminal guesses.
    """

    guess: GroupElement
    backward: HybridTrajectory
    forward: HybridTrajectory
    achieved: GroupElement
    delta_g: float
    cost: float
    event_mismatch: bool


@dataclass
class SolveReport:
    """Outcome of the sweep loop.

    `seed` is the evaluation of the initial guess; `iterations` are the
    sweeps after it.  Convergence means the achieved terminal state
    stopped moving and sits at the guess that produced it; with
    relaxation 1 the stopping measure is exactly the gap between
    successive terminal guesses.
    """

    seed: IterationRecord
    iterations: list = dc_field(default_factory=list)
    converged: bool = False
    final_cost: float = math.nan
    warnings: list = dc_field(default_factory=list)

    def last(self) -> IterationRecord:
        return self.iterations[-1] if self.iterations else self.seed


def group_distance(a: GroupElement, b: GroupElement) -> float:
    """Chart distance: Euclidean in position, shortest arc in heading."""
    dth = signed_gap(a.theta, b.theta)
    return math.sqrt((a.x - b.x) ** 2 + (a.y - b.y) ** 2 + dth * dth)


def _interp_guess(a: GroupElement, b: GroupElement, w: float) -> GroupElement:
    """Move a fraction w from a toward b, shortest arc in heading."""
    return GroupElement(
        a.x + w * (b.x - a.x),
        a.y + w * (b.y - a.y),
        wrap_angle(a.theta + w * signed_gap(b.theta, a.theta)),
    )


def backward_pass(g_T: GroupElement, problem: OcpProblem,
                  config: SolveConfig) -> HybridTrajectory:
    """Reduced sweep from the terminal guess down to t0.

    Seeds the momentum from the terminal cost differential and the
    heading class from the guess, then integrates backward; crossings of
    the post-reset heading undo the momentum jump and shift the heading
    class back.
    """
    mu_f = terminal_momentum(g_T, problem.phi)
    q_f = coset_project(g_T).q
    seed = (mu_f.mu_x, mu_f.mu_y, mu_f.mu_theta, q_f)
    system = reduced_hybrid_system(problem.params)
    return execute_backward(system, seed, problem.tf, problem.t0,
                            config.exec, problem.branch_policy)


def _segment_sampler(mu_traj: HybridTrajectory):
    """Sample momentum segment-by-segment as the plant replays it.

    The plant's resets and the sweep's momentum jumps describe the same
    event, but their localized times differ while the loop has not yet
    converged.  Sampling by matching segment index, clamped to the
    segment's own span, keeps the replayed control discontinuity glued
    to the plant's event instead of bleeding across it, so the replay
    degrades smoothly (order |time mismatch|) rather than by a full
    control flip inside an integration step.
    """
    arcs = mu_traj.arcs
    seg = {"k": 0}

    def sample(t):
        arc = arcs[min(seg["k"], len(arcs) - 1)]
        ts, xs = arc.times, arc.states
        if t <= ts[0]:
            return xs[0]
        if t >= ts[-1]:
            return xs[-1]
        from bisect import bisect_right
        j = bisect_right(ts, t) - 1
        h = ts[j + 1] - ts[j]
        w = (t - ts[j]) / h if h != 0.0 else 0.0
        a, b = xs[j], xs[j + 1]
        return tuple(ai + w * (bi - ai) for ai, bi in zip(a, b))

    def advance():
        seg["k"] += 1

    return sample, advance


def forward_pass(mu_traj: HybridTrajectory, problem: OcpProblem,
                 config: SolveConfig) -> HybridTrajectory:
    """Replay the plant under the controls recovered by a backward sweep.

    Momentum is sampled from the sweep with linear interpolation inside
    steps, paired with the plant segment by segment; branch tags follow
    the sweep's events in time order, falling back to the problem policy
    if the plant sees extra events.
    """
    sample, advance = _segment_sampler(mu_traj)

    def controls(t):
        mx, my, mt, q = sample(t)
        return (-mx, 0.0, -mt)

    base = plant_hybrid_system(problem.params, controls)

    def reset(s, tag):
        advance()
        return base.reset(s, tag)

    system = HybridSystemDef(base.dimension, base.field, base.guard, reset,
                             base.branch_tags)
    tags = [e.branch for e in mu_traj.events]
    policy = sequence_policy(tags, fallback=problem.branch_policy)
    return execute(system, problem.g_init.as_tuple(), problem.t0, problem.tf,
                   config.exec, policy)


def _accumulated_cost(mu_traj: HybridTrajectory) -> float:
    """Trapezoid integral of the optimal effort rate along the sweep."""
    total = 0.0
    for arc in mu_traj.arcs:
        ts, xs = arc.times, arc.states
        for i in range(len(ts) - 1):
            ra = 0.5 * (xs[i][0] ** 2 + xs[i][2] ** 2)
            rb = 0.5 * (xs[i + 1][0] ** 2 + xs[i + 1][2] ** 2)
            total += 0.5 * (ra + rb) * (ts[i + 1] - ts[i])
    return total


def _events_agree(bwd: HybridTrajectory, fwd: HybridTrajectory,
                  config: "SolveConfig") -> bool:
    # cross-pass event times agree only to the loop tolerance scale, not
    # to the bisection width: the passes are coupled through the guess
    if len(bwd.events) != len(fwd.events):
        return False
    tol = max(10.0 * config.exec.event_tol, 10.0 * config.tol)
    return all(
        abs(eb.t - ef.t) <= tol for eb, ef in zip(bwd.events, fwd.events)
    )


def _sweep(g_guess: GroupElement, problem: OcpProblem,
           config: SolveConfig) -> IterationRecord:
    bwd = backward_pass(g_guess, problem, config)
    fwd = forward_pass(bwd, problem, config)
    achieved = GroupElement(*fwd.terminal_state())
    cost = _accumulated_cost(bwd) + problem.phi(achieved)
    return IterationRecord(
        guess=g_guess,
        backward=bwd,
        forward=fwd,
        achieved=achieved,
        delta_g=math.inf,
        cost=cost,
        event_mismatch=not _events_agree(bwd, fwd, config),
    )


def solve(problem: OcpProblem, g_T_guess: GroupElement,
          config: SolveConfig) -> SolveReport:
    """Run the sweep loop from an initial terminal guess.

    The initial guess is evaluated once to seed the loop; each iteration
    then sweeps from a damped update of the guess and stops when the
    achieved terminal state moves by at most config.tol.  A report with
    converged=False is a diagnostic outcome, not an error.
    """
    seed = _sweep(g_T_guess, problem, config)
    report = SolveReport(seed=seed)
    prev_achieved = seed.achieved
    g_guess = _interp_guess(g_T_guess, seed.achieved, config.relaxation)

    for n in range(config.max_iters):
        rec = _sweep(g_guess, problem, config)
        rec.delta_g = max(group_distance(prev_achieved, rec.achieved),
                          group_distance(g_guess, rec.achieved))
        report.iterations.append(rec)
        log.debug("sweep %d: delta_g=%.3e cost=%.6f events=%d/%d",
                  n + 1, rec.delta_g, rec.cost,
                  len(rec.backward.events), len(rec.forward.events))
        if rec.delta_g <= config.tol:
            report.converged = True
            break
        prev_achieved = rec.achieved
        g_guess = _interp_guess(g_guess, rec.achieved, config.relaxation)

    last = report.last()
    report.final_cost = last.cost
    if not report.converged:
        report.warnings.append(
            f"not converged after {config.max_iters} iterations "
            f"(last move {last.delta_g:.3e})")
    if last.event_mismatch:
        report.warnings.append(
            "backward and forward passes disagree on the event sequence")
    return report
