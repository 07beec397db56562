"""Arithmetic for the planar rigid-motion group SE(2).

Elements are kept in chart coordinates (x, y, theta); the homogeneous
3x3 matrix form is available on demand and is the ground truth for
products and the coadjoint action.  The rotation block convention is

    [[cos t,  sin t], [-sin t, cos t]],

so body-frame velocities (u, v, w) push the chart along
(u cos t + v sin t, -u sin t + v cos t, w).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap an angle to [0, 2*pi)."""
    a = math.fmod(a, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    # fmod of a tiny negative can round back up to 2*pi exactly
    if a >= TWO_PI:
        a = 0.0
    return a


def signed_gap(a: float, b: float) -> float:
    """Minimal signed angular difference a - b, in (-pi, pi].

    The boundary maps to +pi, so signed_gap(3*pi/2, pi/2) == pi.
    """
    d = math.fmod(a - b, TWO_PI)
    if d <= -math.pi:
        d += TWO_PI
    elif d > math.pi:
        d -= TWO_PI
    return d


@dataclass(frozen=True)
class GroupElement:
    """A planar rigid motion: position (x, y) and heading theta in [0, 2*pi)."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    @staticmethod
    def identity() -> "GroupElement":
        return GroupElement(0.0, 0.0, 0.0)

    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array(
            [[c, s, self.x], [-s, c, self.y], [0.0, 0.0, 1.0]]
        )

    @staticmethod
    def from_matrix(m: np.ndarray) -> "GroupElement":
        return GroupElement(float(m[0, 2]), float(m[1, 2]),
                            math.atan2(float(m[0, 1]), float(m[0, 0])))

    def as_tuple(self) -> tuple:
        return (self.x, self.y, self.theta)


@dataclass(frozen=True)
class AlgebraVector:
    """Body-frame velocity: forward u, lateral v, angular rate omega."""

    u: float
    v: float
    omega: float

    def matrix(self) -> np.ndarray:
        return np.array(
            [[0.0, self.omega, self.u],
             [-self.omega, 0.0, self.v],
             [0.0, 0.0, 0.0]]
        )

    def as_tuple(self) -> tuple:
        return (self.u, self.v, self.omega)


#: Dual basis order is (u, v, omega) throughout.
ALGEBRA_BASIS = (
    AlgebraVector(1.0, 0.0, 0.0),
    AlgebraVector(0.0, 1.0, 0.0),
    AlgebraVector(0.0, 0.0, 1.0),
)


@dataclass(frozen=True)
class Momentum:
    """Body-frame momentum, dual to AlgebraVector under `pair`."""

    mu_x: float
    mu_y: float
    mu_theta: float

    def as_tuple(self) -> tuple:
        return (self.mu_x, self.mu_y, self.mu_theta)


@dataclass(frozen=True)
class CosetPoint:
    """Class of a group element modulo translations: just the heading."""

    q: float

    def __post_init__(self):
        object.__setattr__(self, "q", wrap_angle(self.q))


def mul(a: GroupElement, b: GroupElement) -> GroupElement:
    """Group product; equals matrix(a) @ matrix(b) in chart form."""
    c, s = math.cos(a.theta), math.sin(a.theta)
    return GroupElement(
        a.x + b.x * c + b.y * s,
        a.y - b.x * s + b.y * c,
        a.theta + b.theta,
    )


def inv(g: GroupElement) -> GroupElement:
    """Group inverse; mul(g, inv(g)) is the identity."""
    c, s = math.cos(g.theta), math.sin(g.theta)
    return GroupElement(-(g.x * c - g.y * s), -(g.x * s + g.y * c), -g.theta)


def exp(xi: AlgebraVector, t: float = 1.0) -> GroupElement:
    """Group exponential of t * xi, in closed form.

    For |omega| below 1e-10 the sin/omega terms switch to their
    second-order Taylor limits to avoid the removable singularity.
    """
    w = xi.omega
    if abs(w) < 1e-10:
        # sin(w t)/w and (1 - cos(w t))/w to second order in w
        sc = t - w * w * t * t * t / 6.0
        ss = 0.5 * w * t * t - w * w * w * t * t * t * t / 24.0
    else:
        sc = math.sin(w * t) / w
        ss = (1.0 - math.cos(w * t)) / w
    return GroupElement(xi.u * sc + xi.v * ss, -xi.u * ss + xi.v * sc, w * t)


def pair(mu: Momentum, xi: AlgebraVector) -> float:
    """Duality pairing: mu_x*u + mu_y*v + mu_theta*omega."""
    return mu.mu_x * xi.u + mu.mu_y * xi.v + mu.mu_theta * xi.omega


def left_trivialize(g: GroupElement, p: tuple) -> Momentum:
    """Pull a chart covector (px, py, ptheta) at g back to body frame.

    Defined by <result, xi> = <p, d/dt|_0 (g * exp(t xi))> for every xi.
    """
    px, py, ptheta = p
    c, s = math.cos(g.theta), math.sin(g.theta)
    return Momentum(px * c - py * s, px * s + py * c, ptheta)


def coadjoint(h: GroupElement, mu: Momentum) -> Momentum:
    """Coadjoint transport of mu by h.

    Computed operationally: component i is <mu, h e_i h^-1> with the
    conjugation done in the matrix representation, which keeps the
    result free of any hand-derived sign convention.
    """
    hm = h.matrix()
    hm_inv = inv(h).matrix()
    comps = []
    for e in ALGEBRA_BASIS:
        c = hm @ e.matrix() @ hm_inv
        comps.append(pair(mu, AlgebraVector(float(c[0, 2]), float(c[1, 2]),
                                            float(c[0, 1]))))
    return Momentum(comps[0], comps[1], comps[2])


def coset_project(g: GroupElement) -> CosetPoint:
    """Project onto the translation-coset circle: only the heading survives."""
    return CosetPoint(g.theta)
