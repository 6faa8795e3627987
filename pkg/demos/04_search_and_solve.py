"""Tuning loss weights and the gating scalar with the evolution strategy.

First the strategy on a toy quadratic, then the full solver where each
candidate encodes (three loss weights, one gating scalar) and fitness is
the energy reached by the inner projection loop.
"""

import numpy as np

from topocsp import (ParamEncoding, cma_init, cma_optimize, generate_instance,
                     solve, variant)

# --- toy: minimize a shifted quadratic --------------------------------
target = np.array([1.0, -2.0, 0.5, 3.0])


def quad(x):
    return float(np.sum((x - target) ** 2))


state = cma_init(4, m0=np.zeros(4), sigma0=0.3)
res = cma_optimize(quad, state, budget=150, rng=np.random.default_rng(1))
print("quadratic: best fitness", f"{res.best_fitness:.2e}",
      "after", state.generation, "generations,", res.stopped_by)
print("recovered point:", np.round(res.best_theta, 4))

# --- the encoding the solver searches over ----------------------------
enc = ParamEncoding()
lam, beta = enc.decode(enc.encode([1.0, 10.0, 2.0], 0.8))
print("\nencoding round-trip:", np.round(lam, 3), round(beta, 3))

# --- full solve, three variants ---------------------------------------
inst = generate_instance(6, seed=11)
for name in ("baseline", "v1", "v2"):
    r = solve(inst, variant(name), budget=500, seed=11)
    print(f"{name:<9} E={r.final_energy:.4f} steps={r.steps:>3} "
          f"gens={r.generations:>2} success={r.success} "
          f"time={r.wall_time:.2f}s")

# v2 runs the search; its adopted candidates show the tuning trajectory
r = solve(inst, variant("v2"), budget=500, seed=11)
print("\nadopted energies:", [round(e, 4) for e in r.adopted_energies[:8]])
if r.adopted_params:
    lam, beta = r.adopted_params[-1]
    print("last adopted weights:", np.round(lam, 3), " gating:",
          round(beta, 3))
