import math

import pytest

from hlp.group import GroupElement
from hlp.hybrid import ExecConfig, execute, always_plus
from hlp.se2 import DEFAULT_PARAMS, QuadraticGoalCost, reduced_hybrid_system
from hlp.solver import OcpProblem, SolveConfig, forward_pass


@pytest.fixture(scope="session")
def manufactured():
    """A steering problem with a known optimal terminal state.

    Built by integrating the coupled reduced/plant system forward from a
    chosen initial momentum (one reset inside the horizon, plus branch),
    then centering a quadratic terminal cost so its body-frame
    differential at the achieved terminal state equals the achieved
    terminal momentum.  The resulting problem has the forward run as a
    fixed point of the sweep loop.
    """
    exec_cfg = ExecConfig(step=2e-3, event_tol=1e-10, max_events=8,
                          min_dwell=1e-6)
    solve_cfg = SolveConfig(tol=1e-6, max_iters=50, relaxation=0.5,
                            exec=exec_cfg)
    C, D, mt0, tf = 1.0, 0.1, -1.0, 1.6
    alpha0 = -D
    mu0 = (C * math.cos(alpha0), C * math.sin(alpha0), mt0)
    red = execute(reduced_hybrid_system(DEFAULT_PARAMS), mu0 + (0.0,),
                  0.0, tf, exec_cfg, always_plus)
    assert len(red.events) == 1
    shell = OcpProblem(GroupElement(0.0, 0.0, 0.0), 0.0, tf,
                       lambda g: 0.0, DEFAULT_PARAMS)
    plant = forward_pass(red, shell, solve_cfg)
    g_star = plant.terminal_state()
    mu_star = red.terminal_state()

    # quadratic cost whose body-frame differential at g_star is mu_star
    c, s = math.cos(g_star[2]), math.sin(g_star[2])
    px = mu_star[0] * c + mu_star[1] * s
    py = -mu_star[0] * s + mu_star[1] * c
    kappa = max(1.0, 2.0 * abs(mu_star[2]))
    phi = QuadraticGoalCost(g_star[0] - px, g_star[1] - py,
                            g_star[2] - math.asin(mu_star[2] / kappa), kappa)
    problem = OcpProblem(GroupElement(0.0, 0.0, 0.0), 0.0, tf, phi,
                         DEFAULT_PARAMS)
    return {
        "problem": problem,
        "solve_config": solve_cfg,
        "g_star": GroupElement(*g_star),
        "mu_star": mu_star,
        "mu0": mu0,
        "reduced_trajectory": red,
        "plant_trajectory": plant,
    }
