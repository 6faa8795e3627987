"""Benchmark studies: seed robustness, scaling, ablation, stability, traces.

Every study is deterministic given its spec: per-run seeds derive from
sha256(master_seed, variant, n, index), each run is isolated (a failing run
becomes a failed row, never an aborted study), and results land as CSV plus
a JSON copy of the spec so the study can be rerun from its output directory.
"""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .problems import generate_instance
from .solver import (DEFAULT_BUDGET, PRESETS, SolveResult, VariantConfig,
                     jacobian_stats, solve, variant)

SEED_STUDY_VARIANTS = ("baseline", "v1", "v2")
DEFAULT_SIZES = (2, 4, 6, 8, 10, 12, 15, 20)
DEFAULT_MASTER_SEED = 42

SEEDS_HEADER = ("variant", "seed", "e_final", "steps", "success", "wall_time")
SCALING_HEADER = ("n", "mean_energy", "std_energy", "mean_steps", "mean_time",
                  "mean_grad_norm", "success_rate", "mean_violations")
ABLATION_HEADER = ("label", "variant", "mean_energy", "std_energy",
                   "success_rate", "delta_energy")
TRACE_HEADER = ("step", "L_total", "L_data", "L_phys", "L_logic",
                "grad_max", "grad_mean")


def derive_seed(master_seed, variant_name, n, index):
    """Stable per-run seed from (master seed, variant, size, run index).

    Uses sha256 so the value is identical across processes and platforms.
    """
    key = f"{master_seed}:{variant_name}:{n}:{index}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big") >> 1


@dataclass
class StudySpec:
    study: str
    sizes: tuple = (6,)
    n_seeds: int = 20
    variants: tuple = SEED_STUDY_VARIANTS
    out_dir: str = "."
    budget: int = DEFAULT_BUDGET
    master_seed: int = DEFAULT_MASTER_SEED

    def __post_init__(self):
        self.sizes = tuple(int(n) for n in self.sizes)
        self.variants = tuple(self.variants)
        if self.study not in ("seeds", "scaling", "ablation", "trace"):
            raise ValueError(f"unknown study {self.study!r}")
        if self.n_seeds < 1:
            raise ValueError("n_seeds must be >= 1")
        if not self.sizes:
            raise ValueError("sizes must be non-empty")
        if any(n < 2 for n in self.sizes):
            raise ValueError("all sizes must be >= 2")

    def to_json_dict(self):
        d = asdict(self)
        d["sizes"] = list(self.sizes)
        d["variants"] = list(self.variants)
        return d

    @classmethod
    def from_json_dict(cls, d):
        return cls(**d)

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f, indent=2)

    @classmethod
    def load(cls, path):
        with open(path) as f:
            return cls.from_json_dict(json.load(f))


@dataclass
class StudyReport:
    """Rows written, per-group summary, and how many runs errored."""

    rows: list
    summary: dict
    n_failed: int
    out_files: list = field(default_factory=list)


def _write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)
    return str(path)


def _run_one(vc, n, run_seed, budget):
    """One isolated run; returns (SolveResult or None, failed flag)."""
    try:
        inst = generate_instance(n, run_seed)
        res = solve(inst, vc, budget=budget, seed=run_seed)
        return res, res.diverged
    except Exception:
        return None, True


def _mean_std(values):
    vals = np.array([v for v in values if np.isfinite(v)])
    if vals.size == 0:
        return float("nan"), float("nan")
    return float(vals.mean()), float(vals.std())


def run_seed_study(spec):
    """Per-(variant, seed) rows at a single size, plus per-variant summary."""
    out = Path(spec.out_dir)
    n = spec.sizes[0]
    rows = []
    summary = {}
    n_failed = 0
    for name in spec.variants:
        vc = variant(name) if name in PRESETS else VariantConfig(name=name)
        energies, successes = [], []
        for i in range(spec.n_seeds):
            run_seed = derive_seed(spec.master_seed, vc.canonical_name, n, i)
            res, failed = _run_one(vc, n, run_seed, spec.budget)
            n_failed += int(failed)
            if res is None:
                rows.append((name, run_seed, float("nan"), 0, 0, 0.0))
                successes.append(False)
                continue
            rows.append((name, run_seed, res.final_energy, res.steps,
                         int(res.success), res.wall_time))
            energies.append(res.final_energy)
            successes.append(res.success)
        mean, std = _mean_std(energies)
        summary[name] = {
            "mean_energy": mean,
            "std_energy": std,
            "success_rate": float(np.mean(successes)),
        }
    files = [_write_csv(out / "seeds.csv", SEEDS_HEADER, rows)]
    with open(out / "seeds_summary.json", "w") as f:
        json.dump(summary, f, indent=2)
    files.append(str(out / "seeds_summary.json"))
    spec.save(out / "spec.json")
    files.append(str(out / "spec.json"))
    return StudyReport(rows=rows, summary=summary, n_failed=n_failed,
                       out_files=files)


def fit_time_exponent(sizes, times):
    """Least-squares slope of log(time) against log(n)."""
    sizes = np.asarray(sizes, dtype=float)
    times = np.asarray(times, dtype=float)
    keep = (times > 0) & np.isfinite(times)
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(sizes[keep]), np.log(times[keep]), 1)[0])


def run_scaling_study(spec):
    """Per-size aggregates for the first listed variant (default v2)."""
    out = Path(spec.out_dir)
    name = spec.variants[0]
    vc = variant(name) if name in PRESETS else VariantConfig(name=name)
    rows = []
    n_failed = 0
    mean_times = []
    for n in spec.sizes:
        energies, steps, times, grads, succ, viol = [], [], [], [], [], []
        for i in range(spec.n_seeds):
            run_seed = derive_seed(spec.master_seed, vc.canonical_name, n, i)
            res, failed = _run_one(vc, n, run_seed, spec.budget)
            n_failed += int(failed)
            if res is None:
                succ.append(False)
                continue
            energies.append(res.final_energy)
            steps.append(res.steps)
            times.append(res.wall_time)
            grads.append(float(res.trace.grad_mean.mean())
                         if res.trace.n_steps else 0.0)
            succ.append(res.success)
            viol.append(res.violations.combined)
        mean_e, std_e = _mean_std(energies)
        mean_t = float(np.mean(times)) if times else float("nan")
        mean_times.append(mean_t)
        rows.append((n, mean_e, std_e,
                     float(np.mean(steps)) if steps else float("nan"),
                     mean_t,
                     float(np.mean(grads)) if grads else float("nan"),
                     float(np.mean(succ)),
                     float(np.mean(viol)) if viol else float("nan")))
    exponent = fit_time_exponent(spec.sizes, mean_times)
    summary = {"variant": name, "time_exponent": exponent,
               "per_size": {str(r[0]): {"mean_energy": r[1],
                                        "success_rate": r[6]} for r in rows}}
    files = [_write_csv(out / "scaling.csv", SCALING_HEADER, rows)]
    with open(out / "scaling_summary.json", "w") as f:
        json.dump(summary, f, indent=2)
    files.append(str(out / "scaling_summary.json"))
    spec.save(out / "spec.json")
    files.append(str(out / "spec.json"))
    return StudyReport(rows=rows, summary=summary, n_failed=n_failed,
                       out_files=files)


def ablation_configs():
    """The 7 cumulative configurations plus 3 single-removal ones.

    Toggles accumulate in the order: mse, grad clip, grid init, rank-one
    step, curvature, search. The 7th cumulative config is the full system
    (identical to the v2 preset); the removals each switch one toggle off
    from full.
    """
    order = ("use_mse", "use_grad_clip", "use_physics_init", "use_delta",
             "use_curvature", "use_cmaes")
    labels = ("+mse", "+grad_clip", "+physics_init", "+delta", "+curvature",
              "full")
    configs = [("baseline", VariantConfig(name="baseline"))]
    on = {}
    for flag, label in zip(order, labels):
        on[flag] = True
        configs.append((label, VariantConfig(name=label, **on)))
    full = dict(on)
    for flag, label in (("use_delta", "full-delta"),
                        ("use_curvature", "full-curvature"),
                        ("use_mse", "full-mse")):
        off = dict(full)
        off[flag] = False
        configs.append((label, VariantConfig(name=label, **off)))
    return configs


def run_ablation(spec):
    """10-row component study at a single size.

    delta_energy is previous-row mean minus this row's mean for the
    cumulative rows (positive = the added component helped; the column
    telescopes to baseline mean - full mean) and full-row mean minus this
    row's mean for the removal rows (negative = removing it hurt).
    """
    out = Path(spec.out_dir)
    n = spec.sizes[0]
    rows = []
    n_failed = 0
    means = []
    for label, vc in ablation_configs():
        energies, successes = [], []
        for i in range(spec.n_seeds):
            run_seed = derive_seed(spec.master_seed, vc.canonical_name, n, i)
            res, failed = _run_one(vc, n, run_seed, spec.budget)
            n_failed += int(failed)
            if res is None:
                successes.append(False)
                continue
            energies.append(res.final_energy)
            successes.append(res.success)
        mean, std = _mean_std(energies)
        means.append(mean)
        rows.append([label, vc.canonical_name, mean, std,
                     float(np.mean(successes)), 0.0])
    full_mean = means[6]
    for i in range(1, 7):
        rows[i][5] = means[i - 1] - means[i]
    for i in range(7, 10):
        rows[i][5] = full_mean - means[i]
    summary = {
        "baseline_mean": means[0],
        "full_mean": full_mean,
        "incremental_delta_sum": float(sum(r[5] for r in rows[1:7])),
        "rows": {r[0]: {"mean_energy": r[2], "delta_energy": r[5]}
                 for r in rows},
    }
    files = [_write_csv(out / "ablation.csv", ABLATION_HEADER,
                        [tuple(r) for r in rows])]
    with open(out / "ablation_summary.json", "w") as f:
        json.dump(summary, f, indent=2)
    files.append(str(out / "ablation_summary.json"))
    spec.save(out / "spec.json")
    files.append(str(out / "spec.json"))
    return StudyReport(rows=[tuple(r) for r in rows], summary=summary,
                       n_failed=n_failed, out_files=files)


def trace_rows(result: SolveResult):
    """Per-step rows matching TRACE_HEADER, steps numbered from 1."""
    t = result.trace
    return [
        (i + 1, t.l_total[i], t.l_data[i], t.l_phys[i], t.l_logic[i],
         t.grad_max[i], t.grad_mean[i])
        for i in range(t.n_steps)
    ]


def run_trace(n, seed, variant_name, budget=DEFAULT_BUDGET, out_csv=None):
    """Single-run loss/gradient trace; optionally written as CSV."""
    vc = variant(variant_name)
    inst = generate_instance(n, seed)
    res = solve(inst, vc, budget=budget, seed=seed)
    rows = trace_rows(res)
    if out_csv is not None:
        _write_csv(out_csv, TRACE_HEADER, rows)
    return res, rows


def run_stability_study(n=6, n_seeds=20, budget=DEFAULT_BUDGET,
                        master_seed=DEFAULT_MASTER_SEED):
    """Gradient-stability comparison: full system vs full without the
    rank-one step, on one shared list of instance seeds.

    Returns {label: {grad_mean, grad_max, divergences,
    energy_increase_events, lambda_max, cond, mean_energy}}.
    """
    full = variant("v2")
    no_delta = VariantConfig(name="full-delta", use_mse=True,
                             use_grad_clip=True, use_physics_init=True,
                             use_delta=False, use_curvature=True,
                             use_cmaes=True)
    seeds = [derive_seed(master_seed, "v2", n, i) for i in range(n_seeds)]
    out = {}
    for label, vc in (("full", full), ("no-delta", no_delta)):
        stats = []
        for s in seeds:
            inst = generate_instance(n, s)
            stats.append(jacobian_stats(inst, vc, budget=budget, seed=s))
        out[label] = {
            "grad_mean": float(np.mean([st.grad_mean for st in stats])),
            "grad_max": float(np.max([st.grad_max for st in stats])),
            "divergences": int(sum(st.divergence_flag for st in stats)),
            "energy_increase_events": int(
                sum(st.energy_increase_events for st in stats)),
            "lambda_max": float(np.max([st.lambda_max_j for st in stats])),
            "cond": float(np.max([st.cond_j for st in stats])),
            "mean_energy": float(np.mean([st.final_energy for st in stats])),
        }
    return out
