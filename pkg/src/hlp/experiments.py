"""Experiment configs and runners behind the service and the CLI.

A config names a mode, the plant and executor settings, and a
mode-specific section (named after the mode, hyphens as underscores).
Running a config produces a deterministic report dict plus rendered
artifacts: per-leaf trajectory CSVs, a plot SVG, and report.json.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, model_validator

from . import __version__
from .group import GroupElement, signed_gap, wrap_angle
from .hybrid import (
    ExecConfig,
    HybridTrajectory,
    always_minus,
    always_plus,
    execute,
    execute_tree,
)
from .output import render_csv, render_svg, trajectory_rows
from .se2 import (
    BRANCH_MINUS,
    BRANCH_PLUS,
    PlantParams,
    QuadraticGoalCost,
    planar_hamiltonian,
    plant_hybrid_system,
    reconstructed_hybrid_system,
    reduced_hybrid_system,
)
from .solver import OcpProblem, SolveConfig, solve

#: fig2/fig3 horizon when the config leaves tf unset; long enough for the
#: default auxiliary constants to produce three resets.
FIGURE_DEFAULT_TF = 11.0

Mode = Literal[
    "simulate-plant", "simulate-reduced", "simulate-reconstructed",
    "solve", "fig2", "fig3",
]


class PlantModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    theta_star: float = math.pi / 2.0
    jump: Tuple[float, float, float] = (1.0, 0.0, math.pi)
    actuation: Literal["under", "full"] = "under"

    def to_params(self) -> PlantParams:
        return PlantParams(self.theta_star, self.jump, self.actuation)

    @model_validator(mode="after")
    def _check(self):
        self.to_params()
        return self


class ExecModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    step: float = 1e-3
    event_tol: float = 1e-10
    max_events: int = 8
    min_dwell: float = 1e-6

    def to_config(self) -> ExecConfig:
        return ExecConfig(self.step, self.event_tol, self.max_events,
                          self.min_dwell)

    @model_validator(mode="after")
    def _check(self):
        self.to_config()
        return self


class HorizonModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    t0: float = 0.0
    tf: float

    @model_validator(mode="after")
    def _check(self):
        if not self.tf > self.t0:
            raise ValueError("horizon tf must exceed t0")
        return self


class PlantSimModel(BaseModel):
    """Constant-control plant run from a chart state."""

    model_config = ConfigDict(extra="forbid")

    state: Tuple[float, float, float]
    u: float = 0.0
    v: float = 0.0
    omega: float = 0.0


class ReducedSimModel(BaseModel):
    """Reduced momentum run from (mu, q)."""

    model_config = ConfigDict(extra="forbid")

    mu: Tuple[float, float, float]
    q: float


class ReconstructedSimModel(BaseModel):
    """Reconstructed run from (x, y, theta, mu_theta) plus (C, D)."""

    model_config = ConfigDict(extra="forbid")

    state: Tuple[float, float, float, float]
    C: float
    D: float


class FigureModel(BaseModel):
    """Auxiliary constants and start pose for the figure modes."""

    model_config = ConfigDict(extra="forbid")

    C: float = 1.0
    D: float = 1.0
    mu_theta0: float = -1.0
    start: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    tf: Optional[float] = None


class SolveModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    g_init: Tuple[float, float, float]
    target: Tuple[float, float, float]
    kappa: float = 1.0
    guess: Tuple[float, float, float]
    t0: float = 0.0
    tf: float
    tol: float = 1e-6
    max_iters: int = 50
    relaxation: float = 0.5

    @model_validator(mode="after")
    def _check(self):
        if not self.tf > self.t0:
            raise ValueError("solve tf must exceed t0")
        return self


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mode: Mode
    plant: PlantModel = PlantModel()
    exec: ExecModel = ExecModel()
    horizon: Optional[HorizonModel] = None
    branch_policy: Literal["plus", "minus", "both"] = "plus"
    out_dir: Optional[str] = None
    simulate_plant: Optional[PlantSimModel] = None
    simulate_reduced: Optional[ReducedSimModel] = None
    simulate_reconstructed: Optional[ReconstructedSimModel] = None
    solve: Optional[SolveModel] = None
    fig2: Optional[FigureModel] = None
    fig3: Optional[FigureModel] = None

    @model_validator(mode="after")
    def _check_sections(self):
        section = self.mode.replace("-", "_")
        if self.mode in ("fig2", "fig3"):
            if getattr(self, section) is None:
                setattr(self, section, FigureModel())
        elif getattr(self, section) is None:
            raise ValueError(f"mode '{self.mode}' requires key '{section}'")
        if self.mode.startswith("simulate") and self.horizon is None:
            raise ValueError(f"mode '{self.mode}' requires key 'horizon'")
        return self


@dataclass
class Artifact:
    name: str
    content: str


@dataclass
class ExperimentResult:
    report: dict
    artifacts: list


def _policy_for(name: str):
    return always_plus if name == "plus" else always_minus


def _leaf_suffix(path: str) -> str:
    return path.replace(BRANCH_PLUS, "p").replace(BRANCH_MINUS, "m") or "root"


def _leaves(system, x0, t0, tf, exec_cfg, policy_name):
    """Run one leaf per policy, or the full branch tree for 'both'."""
    if policy_name == "both":
        return execute_tree(system, x0, t0, tf, exec_cfg)
    traj = execute(system, x0, t0, tf, exec_cfg, _policy_for(policy_name))
    return [("".join(e.branch for e in traj.events), traj)]


def _event_summaries(traj: HybridTrajectory) -> list:
    return [
        {"t": e.t, "branch": e.branch,
         "pre_state": list(e.pre_state), "post_state": list(e.post_state)}
        for e in traj.events
    ]


def _drift(values) -> float:
    lo, hi = min(values), max(values)
    return hi - lo


def _reduced_invariants(traj: HybridTrajectory) -> dict:
    """Drift of the conserved quantities along a reduced-state run."""
    radii, energies, planars, dees = [], [], [], []
    d0 = None
    for arc in traj.arcs:
        for s in arc.states:
            mx, my, mt, th = s
            radii.append(math.hypot(mx, my))
            energies.append(-0.5 * (mx * mx + mt * mt))
            alpha = math.atan2(my, mx)
            dval = wrap_angle(th - alpha)
            if d0 is None:
                d0 = dval
            dees.append(abs(signed_gap(dval, d0)))
            planars.append(planar_hamiltonian(th, mt, math.hypot(mx, my), dval))
    energy_jump = 0.0
    for e in traj.events:
        h_pre = -0.5 * (e.pre_state[0] ** 2 + e.pre_state[2] ** 2)
        h_post = -0.5 * (e.post_state[0] ** 2 + e.post_state[2] ** 2)
        energy_jump = max(energy_jump, abs(h_post - h_pre))
    return {
        "casimir_drift": _drift(radii),
        "energy_drift": _drift(energies),
        "energy_jump_max": energy_jump,
        "hybrid_constant_drift": max(dees),
        "planar_energy_drift": _drift(planars),
    }


def _reconstructed_to_reduced(traj: HybridTrajectory, C: float,
                              D: float) -> HybridTrajectory:
    """View a reconstructed run as (mu_x, mu_y, mu_theta, theta) samples."""
    out = HybridTrajectory()
    def conv(s):
        x, y, th, mt = s
        alpha = th - D
        return (C * math.cos(alpha), C * math.sin(alpha), mt, th)
    for arc in traj.arcs:
        out.arcs.append(type(arc)(list(arc.times), [conv(s) for s in arc.states]))
    for e in traj.events:
        out.events.append(type(e)(e.t, conv(e.pre_state), conv(e.post_state),
                                  e.branch))
    return out


def _cost_samples(traj: HybridTrajectory, C: float, D: float) -> list:
    """Accumulated optimal effort along a reconstructed run."""
    samples = []
    total = 0.0
    def rate(s):
        u = -C * math.cos(D - s[2])
        return 0.5 * (u * u + s[3] * s[3])
    for seg, arc in enumerate(traj.arcs):
        prev_t, prev_r = arc.times[0], rate(arc.states[0])
        samples.append((arc.times[0], total, seg))
        for t, s in zip(arc.times[1:], arc.states[1:]):
            r = rate(s)
            total += 0.5 * (prev_r + r) * (t - prev_t)
            samples.append((t, total, seg))
            prev_t, prev_r = t, r
    return samples


def _dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _base_report(config: ExperimentConfig, seed) -> dict:
    return {
        "version": __version__,
        "mode": config.mode,
        "seed": seed,
        "config": config.model_dump(mode="json"),
    }


def _figure_runs(config: ExperimentConfig):
    fig = config.fig2 if config.mode == "fig2" else config.fig3
    params = config.plant.to_params()
    exec_cfg = config.exec.to_config()
    tf = fig.tf if fig.tf is not None else FIGURE_DEFAULT_TF
    x0 = (fig.start[0], fig.start[1], fig.start[2], fig.mu_theta0)
    system = reconstructed_hybrid_system(fig.C, fig.D, params)
    leaves = [
        ("".join(e.branch for e in traj.events), traj)
        for traj in (
            execute(system, x0, 0.0, tf, exec_cfg, always_plus),
            execute(system, x0, 0.0, tf, exec_cfg, always_minus),
        )
    ]
    return fig, params, exec_cfg, tf, leaves


def run_experiment(config: ExperimentConfig, seed=None) -> ExperimentResult:
    """Execute one experiment config; returns the report and artifacts."""
    report = _base_report(config, seed)
    artifacts = []

    if config.mode == "simulate-plant":
        sim = config.simulate_plant
        params = config.plant.to_params()
        controls = lambda t: (sim.u, sim.v, sim.omega)
        system = plant_hybrid_system(params, controls)
        leaves = _leaves(system, tuple(sim.state), config.horizon.t0,
                         config.horizon.tf, config.exec.to_config(),
                         config.branch_policy)
        cols = lambda s: (s[0], s[1], s[2], None, None, None)
        leaf_reports = _emit_leaves(leaves, cols, artifacts, invariants=None)
        _plot_xy(leaves, artifacts, lambda s: (s[0], s[1]))

    elif config.mode == "simulate-reduced":
        sim = config.simulate_reduced
        params = config.plant.to_params()
        system = reduced_hybrid_system(params)
        x0 = (sim.mu[0], sim.mu[1], sim.mu[2], sim.q)
        leaves = _leaves(system, x0, config.horizon.t0, config.horizon.tf,
                         config.exec.to_config(), config.branch_policy)
        cols = lambda s: (None, None, s[3], s[0], s[1], s[2])
        leaf_reports = _emit_leaves(leaves, cols, artifacts,
                                    invariants=_reduced_invariants)
        _plot_xy(leaves, artifacts, lambda s: (s[0], s[1]),
                 title="momentum orbit", xlabel="mu_x", ylabel="mu_y")

    elif config.mode == "simulate-reconstructed":
        sim = config.simulate_reconstructed
        params = config.plant.to_params()
        system = reconstructed_hybrid_system(sim.C, sim.D, params)
        leaves = _leaves(system, tuple(sim.state), config.horizon.t0,
                         config.horizon.tf, config.exec.to_config(),
                         config.branch_policy)
        cols = _recon_columns(sim.C, sim.D)
        leaf_reports = _emit_leaves(
            leaves, cols, artifacts,
            invariants=lambda tr: _reduced_invariants(
                _reconstructed_to_reduced(tr, sim.C, sim.D)))
        _plot_xy(leaves, artifacts, lambda s: (s[0], s[1]))

    elif config.mode in ("fig2", "fig3"):
        fig, params, exec_cfg, tf, leaves = _figure_runs(config)
        report["notes"] = {
            "tf": tf,
            "tf_source": "config" if fig.tf is not None else
            "default horizon chosen to capture three resets",
        }
        cols = _recon_columns(fig.C, fig.D)
        leaf_reports = _emit_leaves(
            leaves, cols, artifacts,
            invariants=lambda tr: _reduced_invariants(
                _reconstructed_to_reduced(tr, fig.C, fig.D)))
        if config.mode == "fig2":
            _plot_xy(leaves, artifacts, lambda s: (s[0], s[1]),
                     title="plane trajectory", xlabel="x", ylabel="y")
        else:
            _emit_costs(leaves, fig.C, fig.D, artifacts, leaf_reports)

    elif config.mode == "solve":
        leaf_reports = _run_solve(config, report, artifacts)

    else:  # pragma: no cover - mode literal is validated upstream
        raise ValueError(f"unknown mode {config.mode}")

    report["leaves"] = leaf_reports
    report["artifacts"] = [a.name for a in artifacts] + ["report.json"]
    artifacts.append(Artifact("report.json", _dumps(report)))
    return ExperimentResult(report, artifacts)


def _recon_columns(C: float, D: float):
    def cols(s):
        x, y, th, mt = s
        alpha = th - D
        return (x, y, th, C * math.cos(alpha), C * math.sin(alpha), mt)
    return cols


def _emit_leaves(leaves, cols, artifacts, invariants=None) -> list:
    leaf_reports = []
    single = len(leaves) == 1
    for path, traj in leaves:
        name = ("trajectory.csv" if single
                else f"trajectory_{_leaf_suffix(path)}.csv")
        artifacts.append(Artifact(name, render_csv(
            trajectory_rows(traj, cols, path))))
        entry = {
            "branch_path": path,
            "csv": name,
            "events": _event_summaries(traj),
            "terminal_state": list(traj.terminal_state()),
        }
        if invariants is not None:
            entry["invariants"] = invariants(traj)
        leaf_reports.append(entry)
    return leaf_reports


def _plot_xy(leaves, artifacts, to_xy, title="trajectory",
             xlabel="x", ylabel="y"):
    series = []
    for path, traj in leaves:
        pts = [to_xy(s) for arc in traj.arcs for s in arc.states]
        ev = [to_xy(e.pre_state) for e in traj.events]
        series.append({"label": f"branch {path or '(none)'}",
                       "points": pts, "events": ev})
    artifacts.append(Artifact(
        "plot.svg", render_svg(series, title, xlabel, ylabel)))


def _emit_costs(leaves, C, D, artifacts, leaf_reports):
    series = []
    for (path, traj), entry in zip(leaves, leaf_reports):
        samples = _cost_samples(traj, C, D)
        name = f"cost_{_leaf_suffix(path)}.csv"
        rows = [[repr(t), repr(c), str(seg), path[:seg]]
                for t, c, seg in samples]
        artifacts.append(Artifact(name, render_csv(
            rows, header=("t", "cost", "segment", "branch_path"))))
        entry["cost_csv"] = name
        entry["final_cost"] = samples[-1][1]
        series.append({"label": f"branch {path or '(none)'}",
                       "points": [(t, c) for t, c, _ in samples],
                       "events": []})
    artifacts.append(Artifact(
        "plot.svg",
        render_svg(series, "accumulated running cost", "t", "cost")))


def _run_solve(config: ExperimentConfig, report: dict, artifacts: list) -> list:
    sm = config.solve
    params = config.plant.to_params()
    phi = QuadraticGoalCost(sm.target[0], sm.target[1], sm.target[2],
                            sm.kappa)
    problem = OcpProblem(
        g_init=GroupElement(*sm.g_init),
        t0=sm.t0,
        tf=sm.tf,
        phi=phi,
        params=params,
        branch_policy=_policy_for(
            "plus" if config.branch_policy == "both" else config.branch_policy),
    )
    cfg = SolveConfig(sm.tol, sm.max_iters, sm.relaxation,
                      config.exec.to_config())
    result = solve(problem, GroupElement(*sm.guess), cfg)

    def iter_entry(rec):
        return {
            "guess": list(rec.guess.as_tuple()),
            "achieved": list(rec.achieved.as_tuple()),
            "delta_g": rec.delta_g if math.isfinite(rec.delta_g) else None,
            "cost": rec.cost,
            "backward_events": [e.t for e in rec.backward.events],
            "forward_events": [e.t for e in rec.forward.events],
            "event_mismatch": rec.event_mismatch,
        }

    report["solve"] = {
        "converged": result.converged,
        "final_cost": result.final_cost,
        "iterations": [iter_entry(r) for r in result.iterations],
        "seed_sweep": iter_entry(result.seed),
        "warnings": list(result.warnings),
        "terminal_state": list(result.last().achieved.as_tuple()),
    }
    last = result.last()
    cols = lambda s: (s[0], s[1], s[2], None, None, None)
    path = "".join(e.branch for e in last.forward.events)
    artifacts.append(Artifact("trajectory.csv", render_csv(
        trajectory_rows(last.forward, cols, path))))
    _plot_xy([(path, last.forward)], artifacts, lambda s: (s[0], s[1]),
             title="solved trajectory")
    return [{
        "branch_path": path,
        "csv": "trajectory.csv",
        "events": _event_summaries(last.forward),
        "terminal_state": list(last.forward.terminal_state()),
    }]
