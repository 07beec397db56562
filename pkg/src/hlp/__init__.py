"""Reduced-momentum optimal control on the planar rigid-motion group.

Core layers:

* ``hlp.group``   -- SE(2) / se(2) / se(2)* arithmetic.
* ``hlp.hybrid``  -- generic fixed-step hybrid-system executor.
* ``hlp.se2``     -- the planar plant, reduced momentum dynamics, co-state
  jumps, Casimir chart, and the unreduced cotangent-space oracle.
* ``hlp.solver``  -- iterative forward-backward solver.
* ``hlp.experiments`` / ``hlp.service`` / ``hlp.cli`` -- experiment
  configs, the HTTP service, and the thin-client command line.
"""

__version__ = "0.1.0"

from .group import (
    AlgebraVector,
    CosetPoint,
    GroupElement,
    Momentum,
    coadjoint,
    coset_project,
    exp,
    inv,
    left_trivialize,
    mul,
    pair,
    signed_gap,
    wrap_angle,
)

__all__ = [
    "AlgebraVector",
    "CosetPoint",
    "GroupElement",
    "Momentum",
    "coadjoint",
    "coset_project",
    "exp",
    "inv",
    "left_trivialize",
    "mul",
    "pair",
    "signed_gap",
    "wrap_angle",
    "__version__",
]
