# %% [markdown]
# # Node features from raw inputs
#
# Each node (a county, say) gets a handful of derived features before any
# network analysis: how spread out its activity is, how fast cases grow,
# and how strongly it connects to every other node.

# %%
import numpy as np

from aanearch import (
    ActivityGrid,
    AttributeTable,
    CaseSeries,
    PairwiseIndexMatrix,
    percent_change_from_baseline,
    reproduction_number,
    standardize,
    venables_distance,
    weighted_degree_centrality,
)

# %% [markdown]
# ## Venables distance
# Intensity-weighted mean distance between active cells. Concentrated
# activity gives a small value; activity spread across town gives a large one.

# %%
rng = np.random.default_rng(0)
downtown = ActivityGrid(rng.normal(0, 50, size=(40, 2)), rng.gamma(2.0, size=40))
sprawl = ActivityGrid(rng.normal(0, 500, size=(40, 2)), rng.gamma(2.0, size=40))
print("downtown:", round(venables_distance(downtown), 1), "m")
print("sprawl:  ", round(venables_distance(sprawl), 1), "m")

# multiplying every intensity by the same factor leaves it unchanged
scaled = ActivityGrid(downtown.positions, downtown.intensities * 7)
print("scaled downtown:", round(venables_distance(scaled), 1), "m")

# %% [markdown]
# ## Reproduction number from cumulative cases
# Growth rate K from the window endpoints, then R0 = exp(K tau) with a
# 5.1-day serial interval by default.

# %%
cases = CaseSeries([5, 9, 14, 22, 40], step=15.3 / 4)
print("R0:", reproduction_number(cases))
print("R0 over the last two rows:", round(reproduction_number(cases, window=(3, 4)), 3))

# %% [markdown]
# ## Connectedness and baseline-relative visits

# %%
sci = rng.random((5, 5))
sci = sci + sci.T
print("weighted degree:", np.round(weighted_degree_centrality(PairwiseIndexMatrix(sci)), 3))
print("visits vs week 0:", percent_change_from_baseline([120, 90, 60, 75]))

# %% [markdown]
# ## Standardization
# Missing values take the column median; constant columns become zero so the
# cosine similarity used later stays defined.

# %%
table = AttributeTable(
    ["a", "b", "c", "d"],
    ["venables", "r0", "always_one"],
    np.array([[120.0, 1.4, 1.0], [480.0, np.nan, 1.0], [300.0, 2.1, 1.0], [90.0, 1.1, 1.0]]),
)
z = standardize(table)
print(np.round(z.values, 3))
print("column means:", np.round(z.values.mean(axis=0), 12))
