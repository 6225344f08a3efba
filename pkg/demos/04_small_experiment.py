# %% [markdown]
# # A small benchmark, end to end
#
# Three repeats of 3-fold cross-validation on two datasets, stored on disk,
# ranked per dataset and metric, then summed into a win count.

# %%
import tempfile

from effortune.harness import ExperimentPlan, render_report, run_experiment, store_tables, summarize_wins, wins_text

out = tempfile.mkdtemp()
plan = ExperimentPlan(["kemerer", "albrecht"], ["ABE0", "CART", "ATLM", "LP4EE", "CART_DE"],
                      repeats=3, seed=0, out=out)
store = run_experiment(plan)
print(len(store.records()), "fold scores,", len(store.failures()), "failures")

# %%
for ds in plan.datasets:
    text, _ = render_report(store, ds, "sa")
    print(text, end="\n\n")

# %%
print(wins_text(summarize_wins(store_tables([store]), plan.treatments)))
