# %% [markdown]
# # Tuning CART on one fold
#
# Split miyazaki into three folds, then let random search, differential
# evolution and FLASH each spend 220 evaluations on the training part.
# The winner is refit on the whole training fold and scored on the test fold.

# %%
import numpy as np

from effortune.harness import ExperimentPlan, run_cell

plan = ExperimentPlan(["miyazaki"], ["CART", "CART_RD", "CART_DE", "CART_FLASH"], repeats=1, seed=0)

# %%
for t in plan.treatments:
    res = run_cell(plan, "miyazaki", t, 0, 0)
    s = res.score
    print(f"{t:<11} mdMRE={s.mdmre:.3f} SA={s.sa:6.1f} evals={len(res.trace):>3} {res.winner or ''}")

# %% [markdown]
# Each trace row is (evaluation number, candidate token, validation median MRE).
# The running minimum shows how fast each optimizer closes in.

# %%
res = run_cell(plan, "miyazaki", "CART_FLASH", 0, 0)
best = np.minimum.accumulate([s for _, _, s in res.trace])
print(best[[0, 19, 49, 99, 219]])
