"""Constraint families, the weighted energy, and its analytic gradient.

Three families act on the node states:
  - anchors: full-state quadratic pull toward a reference vector
  - separations: hinge-squared penalty on pairwise position distance
  - orderings: hinge-squared penalty on a coordinate ordering with margin

Positions are the first 3 components of the bound block. Energy is the
weighted sum of the family losses; each family may be normalized by its
constraint count (MSE) or left as a raw sum (SSE).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConstraintError
from .graphs import STATE_DIM

POSITION_DIM = 3
SUCCESS_THRESHOLD = 2.0
_DIST_FLOOR = 1e-12

MSE = "mse"
SSE = "sse"


def position_of(state):
    """Position slice of one state: the first 3 components."""
    return np.asarray(state, dtype=float)[:POSITION_DIM]


def positions(states):
    """(n, 3) position block of a state matrix."""
    return np.asarray(states, dtype=float)[:, :POSITION_DIM]


@dataclass
class LossWeights:
    """Weights for the three constraint families."""

    data: float = 1.0
    phys: float = 10.0
    logic: float = 2.0

    def __post_init__(self):
        vals = (self.data, self.phys, self.logic)
        if not all(np.isfinite(v) and v >= 0 for v in vals):
            raise ConstraintError("loss weights must be finite and non-negative")

    def as_array(self):
        return np.array([self.data, self.phys, self.logic])


DEFAULT_WEIGHTS = LossWeights(1.0, 10.0, 2.0)


@dataclass
class ConstraintSet:
    """Compiled constraint arrays over n_nodes states.

    anchors: {node id: reference state (64,)}
    separations: rows (a, b, min_dist)
    orderings: rows (a, b, axis, margin) meaning pos(a)[axis] + margin <= pos(b)[axis]
    """

    n_nodes: int
    anchor_ids: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    anchor_refs: np.ndarray = field(default_factory=lambda: np.empty((0, STATE_DIM)))
    sep_a: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    sep_b: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    sep_dist: np.ndarray = field(default_factory=lambda: np.empty(0))
    ord_a: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    ord_b: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    ord_axis: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    ord_margin: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        self._validate()

    @classmethod
    def build(cls, n_nodes, anchors=None, separations=None, orderings=None):
        """Build from mapping/sequence forms.

        anchors: {id: 64-vector}; separations: [(a, b, min_dist)];
        orderings: [(a, b, axis, margin)].
        """
        anchors = anchors or {}
        separations = separations or []
        orderings = orderings or []
        ids = sorted(int(k) for k in anchors)
        refs = (np.array([np.asarray(anchors[i], dtype=float) for i in ids])
                if ids else np.empty((0, STATE_DIM)))
        sep = np.array([(int(a), int(b), float(d)) for a, b, d in separations],
                       dtype=float).reshape(-1, 3)
        orde = np.array([(int(a), int(b), int(ax), float(m))
                         for a, b, ax, m in orderings], dtype=float).reshape(-1, 4)
        return cls(
            n_nodes=int(n_nodes),
            anchor_ids=np.array(ids, dtype=int),
            anchor_refs=refs,
            sep_a=sep[:, 0].astype(int), sep_b=sep[:, 1].astype(int),
            sep_dist=sep[:, 2],
            ord_a=orde[:, 0].astype(int), ord_b=orde[:, 1].astype(int),
            ord_axis=orde[:, 2].astype(int), ord_margin=orde[:, 3],
        )

    def _validate(self):
        n = self.n_nodes
        if n < 1:
            raise ConstraintError("n_nodes must be >= 1")
        for ids in (self.anchor_ids, self.sep_a, self.sep_b, self.ord_a, self.ord_b):
            if ids.size and (ids.min() < 0 or ids.max() >= n):
                raise ConstraintError("constraint references a missing node")
        if self.anchor_refs.shape != (self.anchor_ids.size, STATE_DIM):
            raise ConstraintError("anchor reference shape mismatch")
        if np.any(self.sep_a == self.sep_b) or np.any(self.ord_a == self.ord_b):
            raise ConstraintError("constraints must relate two distinct nodes")
        if self.sep_dist.size and np.any(self.sep_dist <= 0):
            raise ConstraintError("min_dist must be positive")
        if self.ord_margin.size and np.any(self.ord_margin < 0):
            raise ConstraintError("ordering margin must be non-negative")
        if self.ord_axis.size and (np.any(self.ord_axis < 0)
                                   or np.any(self.ord_axis >= POSITION_DIM)):
            raise ConstraintError("ordering axis must be in {0, 1, 2}")

    @property
    def n_separations(self):
        return int(self.sep_a.size)

    @property
    def n_orderings(self):
        return int(self.ord_a.size)

    def divisors(self, norm):
        """Per-family normalization divisors (empty family divides by 1)."""
        if norm == MSE:
            return (float(self.n_nodes),
                    float(max(1, self.n_separations)),
                    float(max(1, self.n_orderings)))
        if norm == SSE:
            return (1.0, 1.0, 1.0)
        raise ConstraintError(f"unknown normalization {norm!r}")


@dataclass
class LossBreakdown:
    """Family losses plus their weighted total."""

    l_data: float
    l_phys: float
    l_logic: float
    l_total: float
    norm: str

    def families(self):
        return np.array([self.l_data, self.l_phys, self.l_logic])


def _separation_residuals(states, cs):
    """Penetration depth phi = max(0, min_dist - |pos(a) - pos(b)|) per pair."""
    if cs.n_separations == 0:
        return np.empty(0), np.empty((0, POSITION_DIM)), np.empty(0)
    p = positions(states)
    diff = p[cs.sep_a] - p[cs.sep_b]
    dist = np.linalg.norm(diff, axis=1)
    phi = np.maximum(0.0, cs.sep_dist - dist)
    return phi, diff, dist


def _ordering_residuals(states, cs):
    """Violation psi = max(0, pos(a)[axis] - pos(b)[axis] + margin) per pair."""
    if cs.n_orderings == 0:
        return np.empty(0)
    p = positions(states)
    gap = p[cs.ord_a, cs.ord_axis] - p[cs.ord_b, cs.ord_axis] + cs.ord_margin
    return np.maximum(0.0, gap)


def loss_components(states, cs, norm=MSE, weights=None):
    """Family losses and weighted total.

    With weights=None the total is the plain sum of the three family losses.
    """
    states = np.asarray(states, dtype=float)
    if states.shape != (cs.n_nodes, STATE_DIM):
        raise ConstraintError(
            f"states must be ({cs.n_nodes}, {STATE_DIM}), got {states.shape}")
    d_data, d_phys, d_logic = cs.divisors(norm)

    if cs.anchor_ids.size:
        resid = states[cs.anchor_ids] - cs.anchor_refs
        l_data = float(np.sum(resid * resid)) / d_data
    else:
        l_data = 0.0
    phi, _, _ = _separation_residuals(states, cs)
    l_phys = float(np.sum(phi * phi)) / d_phys
    psi = _ordering_residuals(states, cs)
    l_logic = float(np.sum(psi * psi)) / d_logic

    if weights is None:
        total = l_data + l_phys + l_logic
    else:
        total = weights.data * l_data + weights.phys * l_phys + weights.logic * l_logic
    return LossBreakdown(l_data, l_phys, l_logic, total, norm)


def total_energy(states, cs, weights=DEFAULT_WEIGHTS, norm=MSE):
    """Weighted energy E; success means E < 2.0."""
    return loss_components(states, cs, norm, weights).l_total


def loss_gradient(states, cs, weights=DEFAULT_WEIGHTS, norm=MSE):
    """Analytic gradient of total_energy, shape (n, 64).

    Hinge terms contribute zero exactly at their kink (subgradient choice);
    the separation direction is zeroed when the pair distance is below 1e-12.
    """
    states = np.asarray(states, dtype=float)
    if states.shape != (cs.n_nodes, STATE_DIM):
        raise ConstraintError(
            f"states must be ({cs.n_nodes}, {STATE_DIM}), got {states.shape}")
    d_data, d_phys, d_logic = cs.divisors(norm)
    grad = np.zeros_like(states)

    if cs.anchor_ids.size:
        resid = states[cs.anchor_ids] - cs.anchor_refs
        np.add.at(grad, cs.anchor_ids, (2.0 * weights.data / d_data) * resid)

    phi, diff, dist = _separation_residuals(states, cs)
    if phi.size:
        # d(phi^2)/d pos(a) = -2 phi * (pos(a)-pos(b))/dist, active when phi > 0
        active = (phi > 0.0) & (dist > _DIST_FLOOR)
        if np.any(active):
            coef = (-2.0 * weights.phys / d_phys) * phi[active] / dist[active]
            g = coef[:, None] * diff[active]
            pa = cs.sep_a[active]
            pb = cs.sep_b[active]
            np.add.at(grad[:, :POSITION_DIM], pa, g)
            np.add.at(grad[:, :POSITION_DIM], pb, -g)

    psi = _ordering_residuals(states, cs)
    if psi.size:
        active = psi > 0.0
        if np.any(active):
            coef = (2.0 * weights.logic / d_logic) * psi[active]
            oa = cs.ord_a[active]
            ob = cs.ord_b[active]
            ax = cs.ord_axis[active]
            np.add.at(grad, (oa, ax), coef)
            np.add.at(grad, (ob, ax), -coef)
    return grad


@dataclass
class ViolationStats:
    """Raw residual magnitudes at a state (not squared, not normalized)."""

    phi_mean: float
    psi_mean: float
    combined: float
    phi_max: float
    psi_max: float


def violation_stats(states, cs):
    """Mean and max residuals over the inequality families."""
    phi, _, _ = _separation_residuals(states, cs)
    psi = _ordering_residuals(states, cs)
    phi_mean = float(phi.mean()) if phi.size else 0.0
    psi_mean = float(psi.mean()) if psi.size else 0.0
    total = phi.size + psi.size
    combined = float((phi.sum() + psi.sum()) / total) if total else 0.0
    return ViolationStats(
        phi_mean=phi_mean,
        psi_mean=psi_mean,
        combined=combined,
        phi_max=float(phi.max()) if phi.size else 0.0,
        psi_max=float(psi.max()) if psi.size else 0.0,
    )
