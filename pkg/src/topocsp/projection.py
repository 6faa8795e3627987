"""Inner projection loop: iterative constraint projection over all nodes.

Each iteration sweeps every node once, Jacobi style: all gradients are taken
at the sweep-start state, then applied together. A node's target is

    v_v = s_v - alpha * eta_v * g_v

with eta_v the curvature step scale (1 when curvature is off) and g_v the
(optionally norm-clipped) loss gradient. The step is either the rank-one
update toward the target or the plain gradient step, followed by a
componentwise clip of the state to [-1, 1]. The loop stops when the driving
energy falls below tau or after t_max iterations.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import constraints as C
from .curvature import ETA_MAX, ETA_MIN, GAMMA, node_step_scales
from .delta import DEFAULT_CLIP, DEFAULT_EPSILON
from .errors import DivergenceError
from .graphs import build_graph


@dataclass
class ProjectionConfig:
    """Knobs of the inner loop; the booleans are the ablation axes."""

    alpha: float = 0.01
    tau: float = 1e-6
    t_max: int = 10
    grad_clip: float | None = 1.0
    use_delta: bool = True
    use_curvature: bool = True
    norm: str = C.MSE
    epsilon: float = DEFAULT_EPSILON
    state_clip: tuple | None = DEFAULT_CLIP
    gamma: float = GAMMA
    eta_min: float = ETA_MIN
    eta_max: float = ETA_MAX
    topology: str = "complete"
    record_states: bool = False

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.t_max < 1:
            raise ValueError("t_max must be >= 1")
        if self.grad_clip is not None and not self.grad_clip > 0:
            raise ValueError("grad_clip must be positive when set")


@dataclass
class ProjectionTrace:
    """Per-iteration records; losses are measured after each sweep."""

    l_total: np.ndarray = field(default_factory=lambda: np.empty(0))
    l_data: np.ndarray = field(default_factory=lambda: np.empty(0))
    l_phys: np.ndarray = field(default_factory=lambda: np.empty(0))
    l_logic: np.ndarray = field(default_factory=lambda: np.empty(0))
    grad_max: np.ndarray = field(default_factory=lambda: np.empty(0))
    grad_mean: np.ndarray = field(default_factory=lambda: np.empty(0))
    step_mean: np.ndarray = field(default_factory=lambda: np.empty(0))
    iterations_run: int = 0
    converged: bool = False
    start_states: list = field(default_factory=list)

    def as_rows(self):
        """Rows (iteration, L_total, L_data, L_phys, L_logic, grad_max, grad_mean)."""
        return [
            (t + 1, self.l_total[t], self.l_data[t], self.l_phys[t],
             self.l_logic[t], self.grad_max[t], self.grad_mean[t])
            for t in range(self.iterations_run)
        ]


class _TraceBuilder:
    def __init__(self):
        self.rows = {k: [] for k in ("l_total", "l_data", "l_phys", "l_logic",
                                     "grad_max", "grad_mean", "step_mean")}
        self.start_states = []

    def add(self, **kw):
        for k, v in kw.items():
            self.rows[k].append(v)

    def build(self, converged):
        return ProjectionTrace(
            **{k: np.array(v) for k, v in self.rows.items()},
            iterations_run=len(self.rows["l_total"]),
            converged=converged,
            start_states=self.start_states,
        )


def sweep_once(states, cs, weights, beta, cfg, stat_weights=None):
    """One Jacobi sweep; returns (new_states, stats dict).

    Exposed separately so update maps can be probed at a frozen state.
    stat_weights, when given, selects the weighting used for the reported
    gradient norms; the dynamics always use `weights`. Searched weight
    vectors carry an arbitrary overall scale (clipping makes the dynamics
    insensitive to it), so reports stay comparable only under one fixed
    weighting.
    """
    states = np.asarray(states, dtype=float)
    grad = C.loss_gradient(states, cs, weights, cfg.norm)
    norms = np.linalg.norm(grad, axis=1)
    if stat_weights is None:
        stat_norms = norms
    else:
        stat_grad = C.loss_gradient(states, cs, stat_weights, cfg.norm)
        stat_norms = np.linalg.norm(stat_grad, axis=1)
    stats = {"grad_max": float(stat_norms.max()),
             "grad_mean": float(stat_norms.mean())}

    active = norms >= cfg.epsilon
    if not np.any(active):
        stats["step_mean"] = 0.0
        return states.copy(), stats

    if cfg.grad_clip is not None:
        scale = np.minimum(1.0, cfg.grad_clip / np.maximum(norms, 1e-300))
        grad = grad * scale[:, None]
        # min, not norms*scale: keeps the clipped norm finite even when the
        # raw norm overflowed to inf (scale underflows to 0 there)
        norms = np.minimum(norms, cfg.grad_clip)

    if cfg.use_curvature:
        graph = build_graph(states, topology=cfg.topology)
        eta, _ = node_step_scales(graph, cfg.gamma, cfg.eta_min, cfg.eta_max)
    else:
        eta = np.ones(states.shape[0])

    target = states - cfg.alpha * eta[:, None] * grad
    if cfg.use_delta:
        # rank-one step toward the target along k = g/|g|; since the target
        # offset is itself along -g, the scalar projection is -alpha*eta*|g|
        k = grad / np.maximum(norms, 1e-300)[:, None]
        proj = np.einsum("ij,ij->i", k, target - states)
        new = states + beta * proj[:, None] * k
    else:
        new = target
    if cfg.state_clip is not None:
        np.clip(new, cfg.state_clip[0], cfg.state_clip[1], out=new)

    out = states.copy()
    out[active] = new[active]
    stats["step_mean"] = float(np.linalg.norm(out - states, axis=1).mean())
    return out, stats


def project_states(states, cs, weights, beta, cfg, stat_weights=None):
    """Run the projection loop; returns (final states, ProjectionTrace).

    Raises DivergenceError (carrying the partial trace) if the energy goes
    non-finite mid-run. stat_weights is forwarded to sweep_once.
    """
    states = np.array(states, dtype=float, copy=True)
    tb = _TraceBuilder()
    converged = False
    for _ in range(cfg.t_max):
        if cfg.record_states:
            tb.start_states.append(states.copy())
        states, stats = sweep_once(states, cs, weights, beta, cfg,
                                   stat_weights)
        breakdown = C.loss_components(states, cs, cfg.norm, weights)
        tb.add(l_total=breakdown.l_total, l_data=breakdown.l_data,
               l_phys=breakdown.l_phys, l_logic=breakdown.l_logic, **stats)
        if not np.isfinite(breakdown.l_total):
            raise DivergenceError("energy became non-finite",
                                  trace=tb.build(False))
        if breakdown.l_total < cfg.tau:
            converged = True
            break
    return states, tb.build(converged)
