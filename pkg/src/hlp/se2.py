"""The planar reference system: guarded rigid-motion plant and its
energy-optimal reductions.

The plant steers with a forward speed and a turn rate, pays the
quadratic effort cost (u^2 + w^2)/2, and undergoes a fixed body-frame
displacement whenever its heading crosses a critical angle.  This
module holds the plant, the body-momentum (reduced) dynamics of the
optimal flow, the two-branch momentum jump that keeps the optimal
energy continuous across resets, the polar (Casimir) chart that shrinks
the reduced system further, the reconstructed position dynamics, and an
unreduced cotangent-space formulation used as a cross-check oracle.

Conserved along the reduced flow: the momentum radius
hypot(mu_x, mu_y), the optimal energy -(mu_x^2 + mu_theta^2)/2, and the
heading/phase combination D = theta - alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .group import (
    ALGEBRA_BASIS,
    CosetPoint,
    GroupElement,
    Momentum,
    exp,
    mul,
    signed_gap,
    wrap_angle,
)
from .hybrid import HybridSystemDef

BRANCH_PLUS = "+"
BRANCH_MINUS = "-"
BRANCH_TAGS = (BRANCH_PLUS, BRANCH_MINUS)

#: Tolerance for "the state sits on the guard" preconditions.
GUARD_TOL = 1e-9


class OffGuardError(ValueError):
    """A reset was requested away from the guard heading."""


class OriginMomentum(ValueError):
    """The polar momentum chart is undefined at mu_x = mu_y = 0."""


class NoRealRoot(RuntimeError):
    """Energy matching across a jump has no real co-state solution."""


@dataclass(frozen=True)
class PlantParams:
    """Guard heading, body-frame reset offsets, and actuation flavor.

    The reset offsets (x_off, y_off, theta_off) define the right factor
    applied at each guard hit; its rotation part must be nontrivial so
    that resets leave the guard (isolated events).
    """

    theta_star: float = math.pi / 2.0
    jump: tuple = (1.0, 0.0, math.pi)
    actuation: str = "under"

    def __post_init__(self):
        object.__setattr__(self, "theta_star", wrap_angle(self.theta_star))
        object.__setattr__(self, "jump", tuple(float(v) for v in self.jump))
        if len(self.jump) != 3:
            raise ValueError("jump must be (x_off, y_off, theta_off)")
        if abs(signed_gap(self.jump[2], 0.0)) <= 1e-12:
            raise ValueError(
                "jump rotation must be nontrivial (resets would sit on the guard)")
        if self.actuation not in ("under", "full"):
            raise ValueError("actuation must be 'under' or 'full'")

    def reset_element(self) -> GroupElement:
        return GroupElement(self.jump[0], self.jump[1], self.jump[2])


DEFAULT_PARAMS = PlantParams()


@dataclass(frozen=True)
class ReducedState:
    """Body momentum plus the heading class it is steering."""

    mu: Momentum
    q: CosetPoint


@dataclass(frozen=True)
class CasimirState:
    """Polar chart of the reduced state.

    C is the radius of (mu_x, mu_y), alpha its phase, and
    D = theta - alpha the hybrid constant of motion; theta and mu_theta
    complete the state.
    """

    C: float
    alpha: float
    D: float
    theta: float
    mu_theta: float

    def __post_init__(self):
        if self.C < 0.0:
            raise ValueError("radius must be nonnegative")
        object.__setattr__(self, "alpha", wrap_angle(self.alpha))
        object.__setattr__(self, "D", wrap_angle(self.D))
        object.__setattr__(self, "theta", wrap_angle(self.theta))


def plant_field(g: GroupElement, u: float, omega: float,
                params: PlantParams = DEFAULT_PARAMS,
                v: float = 0.0) -> tuple:
    """Chart velocity of the controlled plant.

    Under-actuated: (u cos t, -u sin t, omega); the fully actuated
    variant adds the lateral channel v.
    """
    c, s = math.cos(g.theta), math.sin(g.theta)
    if params.actuation == "under":
        v = 0.0
    return (u * c + v * s, -u * s + v * c, omega)


def plant_reset(g: GroupElement, params: PlantParams = DEFAULT_PARAMS,
                guard_tol: float = GUARD_TOL) -> GroupElement:
    """Apply the body-frame reset offsets at a guard hit.

    Equals right multiplication by params.reset_element(); requires the
    heading to sit on the guard within guard_tol.
    """
    if abs(signed_gap(g.theta, params.theta_star)) > guard_tol:
        raise OffGuardError(
            f"heading {g.theta} is not on the guard {params.theta_star}")
    return mul(g, params.reset_element())


def restricted_hamiltonian(mu: Momentum) -> float:
    """Optimal value of mu_x*u + mu_theta*w + (u^2 + w^2)/2 over controls."""
    return -0.5 * (mu.mu_x * mu.mu_x + mu.mu_theta * mu.mu_theta)


def optimal_controls(mu: Momentum) -> tuple:
    """Minimizing (u, omega) for the quadratic effort cost."""
    return (-mu.mu_x, -mu.mu_theta)


def _reduced_rhs(mx: float, my: float, mt: float) -> tuple:
    # (mu_x, mu_y) rotates at rate mu_theta; mu_theta is driven by the
    # product -mu_x*mu_y.  Radius and optimal energy are invariant.
    return (my * mt, -mx * mt, -mx * my)


def reduced_field(s: ReducedState) -> tuple:
    """Momentum and heading-class dynamics of the optimal flow.

    Returns (d mu_x, d mu_y, d mu_theta, d q) with dq = -mu_theta, the
    trivialized derivative of the full cotangent flow.
    """
    mx, my, mt = s.mu.mu_x, s.mu.mu_y, s.mu.mu_theta
    dmx, dmy, dmt = _reduced_rhs(mx, my, mt)
    return (dmx, dmy, dmt, -mt)


def costate_jump(mu_minus: Momentum, branch: str) -> Momentum:
    """Momentum update at a guard hit, keeping the optimal energy.

    Both energy-consistent solutions exist; branch "+" keeps mu_theta,
    branch "-" flips it.  (mu_x, mu_y) always flips sign.
    """
    mt = mu_minus.mu_theta if branch == BRANCH_PLUS else -mu_minus.mu_theta
    return Momentum(-mu_minus.mu_x, -mu_minus.mu_y, mt)


def costate_jump_inverse(mu_plus: Momentum, branch: str) -> Momentum:
    """Inverse of costate_jump; each branch is an involution."""
    return costate_jump(mu_plus, branch)


def casimir(mu: Momentum) -> float:
    """Radius of (mu_x, mu_y); constant along flows and across jumps."""
    return math.hypot(mu.mu_x, mu.mu_y)


def casimir_chart(mu: Momentum, theta: float) -> CasimirState:
    """Polar chart (C, alpha) of (mu_x, mu_y) with D = theta - alpha."""
    radius = casimir(mu)
    if radius == 0.0:
        raise OriginMomentum("polar phase undefined at mu_x = mu_y = 0")
    alpha = math.atan2(mu.mu_y, mu.mu_x)
    return CasimirState(radius, alpha, wrap_angle(theta - alpha), theta,
                        mu.mu_theta)


def momentum_from_chart(cs: CasimirState) -> Momentum:
    return Momentum(cs.C * math.cos(cs.alpha), cs.C * math.sin(cs.alpha),
                    cs.mu_theta)


def casimir_reduced_field(cs: CasimirState) -> tuple:
    """(d alpha, d mu_theta, d theta) of the polar-chart reduced flow."""
    return (
        -cs.mu_theta,
        -cs.C * cs.C * math.sin(cs.alpha) * math.cos(cs.alpha),
        -cs.mu_theta,
    )


def casimir_reduced_reset(cs: CasimirState, branch: str,
                          theta_star: float = DEFAULT_PARAMS.theta_star,
                          guard_tol: float = GUARD_TOL) -> CasimirState:
    """Polar-chart reset: alpha and theta advance by a half turn.

    C and D are untouched; mu_theta keeps or flips sign per branch.
    """
    if abs(signed_gap(cs.theta, theta_star)) > guard_tol:
        raise OffGuardError(
            f"heading {cs.theta} is not on the guard {theta_star}")
    mt = cs.mu_theta if branch == BRANCH_PLUS else -cs.mu_theta
    alpha = cs.alpha + math.pi
    theta = cs.theta + math.pi
    return CasimirState(cs.C, alpha, wrap_angle(theta - alpha), theta, mt)


def planar_hamiltonian(theta: float, mu_theta: float, C: float,
                       D: float) -> float:
    """Conserved energy of the (theta, mu_theta) pendulum subsystem."""
    return -0.5 * mu_theta * mu_theta - 0.25 * C * C * math.cos(
        2.0 * D - 2.0 * theta)


def reconstructed_field(x: float, y: float, theta: float, mu_theta: float,
                        C: float, D: float) -> tuple:
    """Position dynamics rebuilt from the conserved quantities.

    The forward speed is u = -C cos(D - theta); mu_theta follows the
    pendulum driven by the momentum product.
    """
    cd = math.cos(D - theta)
    return (
        -C * cd * math.cos(theta),
        C * cd * math.sin(theta),
        -mu_theta,
        C * C * math.sin(D - theta) * cd,
    )


def reconstructed_reset(x: float, y: float, theta: float, mu_theta: float,
                        branch: str,
                        params: PlantParams = DEFAULT_PARAMS,
                        guard_tol: float = GUARD_TOL) -> tuple:
    """Guard-hit update of the reconstructed state.

    Positions shift by the body-frame offsets, the heading by the reset
    rotation, and mu_theta keeps or flips sign per branch.
    """
    if abs(signed_gap(theta, params.theta_star)) > guard_tol:
        raise OffGuardError(
            f"heading {theta} is not on the guard {params.theta_star}")
    xo, yo, to = params.jump
    c, s = math.cos(theta), math.sin(theta)
    mt = mu_theta if branch == BRANCH_PLUS else -mu_theta
    return (x + xo * c + yo * s, y + yo * c - xo * s, theta + to, mt)


def full_pmp_field(state: tuple) -> tuple:
    """Canonical flow of the unreduced optimal-control Hamiltonian.

    State is (x, y, theta, px, py, ptheta); the Hamiltonian is
    -((px cos t - py sin t)^2 + ptheta^2)/2.  Used as the independent
    cross-check of the reduced dynamics.
    """
    x, y, theta, px, py, ptheta = state
    c, s = math.cos(theta), math.sin(theta)
    a = px * c - py * s
    b = px * s + py * c
    return (-a * c, a * s, -ptheta, 0.0, 0.0, -a * b)


def full_pmp_jump(state: tuple, branch: str,
                  params: PlantParams = DEFAULT_PARAMS,
                  guard_tol: float = GUARD_TOL) -> tuple:
    """Guard-hit update of the unreduced state.

    Positions follow the plant reset; px and py carry over unchanged
    (the reset Jacobian only mixes them into the heading slot, which the
    jump correction absorbs); ptheta is re-solved so the Hamiltonian is
    continuous, with the branch choosing the root.
    """
    x, y, theta, px, py, ptheta = state
    if abs(signed_gap(theta, params.theta_star)) > guard_tol:
        raise OffGuardError(
            f"heading {theta} is not on the guard {params.theta_star}")
    xo, yo, to = params.jump
    c, s = math.cos(theta), math.sin(theta)
    x2 = x + xo * c + yo * s
    y2 = y + yo * c - xo * s
    theta2 = theta + to
    a_minus = px * c - py * s
    c2, s2 = math.cos(theta2), math.sin(theta2)
    a_plus = px * c2 - py * s2
    pt_sq = ptheta * ptheta + a_minus * a_minus - a_plus * a_plus
    if pt_sq < -1e-12:
        raise NoRealRoot(
            f"no real co-state closes the energy gap at heading {theta}")
    root = math.sqrt(max(pt_sq, 0.0))
    sign = -1.0 if ptheta < 0.0 else 1.0
    pt2 = sign * root if branch == BRANCH_PLUS else -sign * root
    return (x2, y2, theta2, px, py, pt2)


def terminal_momentum(g_T: GroupElement, phi: Callable,
                      step: float = 1e-6) -> Momentum:
    """Body-frame differential of a terminal cost at g_T.

    Central finite differences of s -> phi(g_T * exp(s e_i)) along the
    three body directions.
    """
    comps = []
    for e in ALGEBRA_BASIS:
        hi = phi(mul(g_T, exp(e, step)))
        lo = phi(mul(g_T, exp(e, -step)))
        comps.append((hi - lo) / (2.0 * step))
    return Momentum(comps[0], comps[1], comps[2])


@dataclass(frozen=True)
class QuadraticGoalCost:
    """Terminal cost pulling toward a target pose.

    phi(g) = w ((x - x*)^2 + (y - y*)^2)/2 + kappa (1 - cos(theta - theta*)),
    smooth on the whole group and exercising all three momentum slots.
    The position weight w defaults to 1; smaller values soften the
    terminal feedback, which also tames the sweep iteration.
    """

    x_target: float
    y_target: float
    theta_target: float
    kappa: float = 1.0
    pos_weight: float = 1.0

    def __call__(self, g: GroupElement) -> float:
        dx = g.x - self.x_target
        dy = g.y - self.y_target
        return 0.5 * self.pos_weight * (dx * dx + dy * dy) + self.kappa * (
            1.0 - math.cos(g.theta - self.theta_target))

    def chart_gradient(self, g: GroupElement) -> tuple:
        return (self.pos_weight * (g.x - self.x_target),
                self.pos_weight * (g.y - self.y_target),
                self.kappa * math.sin(g.theta - self.theta_target))


def running_cost_rate(mu: Momentum) -> float:
    """Instantaneous effort (u^2 + w^2)/2 under the optimal controls."""
    return -restricted_hamiltonian(mu)


def _require_half_turn(params: PlantParams):
    if abs(signed_gap(params.jump[2], math.pi)) > 1e-12:
        raise ValueError(
            "momentum jumps assume a half-turn reset rotation; "
            f"got {params.jump[2]}")


def reduced_hybrid_system(params: PlantParams = DEFAULT_PARAMS
                          ) -> HybridSystemDef:
    """Executor system for (mu_x, mu_y, mu_theta, q), q unwrapped.

    The forward guard is the critical heading; backward runs detect the
    post-reset heading instead and undo the momentum jump.
    """
    _require_half_turn(params)
    th_star = params.theta_star
    th_off = params.jump[2]

    def field(t, s):
        mx, my, mt, q = s
        dmx, dmy, dmt = _reduced_rhs(mx, my, mt)
        return (dmx, dmy, dmt, -mt)

    def guard(s):
        return math.sin(0.5 * (s[3] - th_star))

    def backward_guard(s):
        return math.sin(0.5 * (s[3] - th_star - th_off))

    def reset(s, tag):
        mx, my, mt, q = s
        return (-mx, -my, mt if tag == BRANCH_PLUS else -mt, q + th_off)

    def inverse_reset(s, tag):
        mx, my, mt, q = s
        return (-mx, -my, mt if tag == BRANCH_PLUS else -mt, q - th_off)

    return HybridSystemDef(4, field, guard, reset, BRANCH_TAGS,
                           backward_guard, inverse_reset)


def plant_hybrid_system(params: PlantParams,
                        controls: Callable) -> HybridSystemDef:
    """Executor system for the plant chart (x, y, theta), theta unwrapped.

    controls(t) -> (u, v, omega); the lateral channel is dropped unless
    the params are fully actuated.  The reset ignores the branch tag
    (the plant jump is branch-free) but accepts the shared tags so one
    policy can drive plant and momentum passes together.
    """
    th_star = params.theta_star
    xo, yo, to = params.jump
    under = params.actuation == "under"

    def field(t, s):
        x, y, theta = s
        u, v, w = controls(t)
        if under:
            v = 0.0
        c, si = math.cos(theta), math.sin(theta)
        return (u * c + v * si, -u * si + v * c, w)

    def guard(s):
        return math.sin(0.5 * (s[2] - th_star))

    def reset(s, tag):
        x, y, theta = s
        c, si = math.cos(theta), math.sin(theta)
        return (x + xo * c + yo * si, y + yo * c - xo * si, theta + to)

    return HybridSystemDef(3, field, guard, reset, BRANCH_TAGS)


def reconstructed_hybrid_system(C: float, D: float,
                                params: PlantParams = DEFAULT_PARAMS
                                ) -> HybridSystemDef:
    """Executor system for (x, y, theta, mu_theta), theta unwrapped."""
    _require_half_turn(params)
    th_star = params.theta_star
    xo, yo, to = params.jump

    def field(t, s):
        return reconstructed_field(s[0], s[1], s[2], s[3], C, D)

    def guard(s):
        return math.sin(0.5 * (s[2] - th_star))

    def reset(s, tag):
        x, y, theta, mt = s
        c, si = math.cos(theta), math.sin(theta)
        mt2 = mt if tag == BRANCH_PLUS else -mt
        return (x + xo * c + yo * si, y + yo * c - xo * si, theta + to, mt2)

    return HybridSystemDef(4, field, guard, reset, BRANCH_TAGS)
