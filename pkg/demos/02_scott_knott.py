# %% [markdown]
# # Ranking treatments with Scott-Knott
#
# Five made-up treatments, four measurements each (lower is better).

# %%
from effortune.stats import TreatmentSamples, a12, scott_knott

rx = {
    "rx1": [0.34, 0.49, 0.51, 0.6],
    "rx2": [0.6, 0.7, 0.8, 0.9],
    "rx3": [0.15, 0.25, 0.4, 0.35],
    "rx4": [0.6, 0.7, 0.8, 0.9],
    "rx5": [0.1, 0.2, 0.3, 0.4],
}
table = scott_knott([TreatmentSamples(k, v) for k, v in rx.items()])
print(table.to_text(percent=True))

# %% [markdown]
# rx3 and rx5 differ, but the effect size is below the 0.6 threshold,
# so they share rank 1.

# %%
print(a12(rx["rx3"], rx["rx5"]))

# %% [markdown]
# The CSV form keeps the raw scores, so a table can be re-ranked later.

# %%
csv_text = table.to_csv()
print(csv_text.splitlines()[0])
again = scott_knott(table.groups_from_csv(csv_text))
assert again.ranks() == table.ranks()
