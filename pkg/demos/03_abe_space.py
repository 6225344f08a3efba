# %% [markdown]
# # The analogy-based estimator family
#
# Six design decisions span 6912 raw combinations. Two rules remove the
# ones that make no sense, leaving 5292.

# %%
from collections import Counter

from effortune.abe import ABE0, abe_fit, enumerate_configs
from effortune.configspace import load_space
from effortune.dataset import load_bundled
from effortune.metrics import median_mre

raw = list(enumerate_configs())
valid = [c for c in raw if c.is_valid]
print(len(raw), len(valid))
print(Counter(v for c in raw for v in c.violations()))

# %% [markdown]
# The same family as a configuration space, the form the optimizers search.

# %%
space = load_space("aben")
print(space.raw_size(), sum(1 for _ in space.enumerate()))
print(space.sample_valid(seed=3).token)

# %% [markdown]
# Compare the default 1-nearest-neighbour estimator with a few sampled
# configurations on a simple 2:1 split.

# %%
d = load_bundled("albrecht")
train, test = d.subset(range(16)), d.subset(range(16, len(d)))
for c in [ABE0, *valid[::1000]]:
    m = abe_fit(train, c, keys=list(range(16)))
    print(f"{c.token:<48} {median_mre(test.efforts, m.predict(test.rows)):.3f}")
