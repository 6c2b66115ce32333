# %% [markdown]
# # Z-normalized metric ensemble
#
# Three member metrics are put on a common scale using dev-set means and
# standard deviations. Weights on the simplex are chosen to maximize Kendall
# tau-b against gold scores.

# %%
import numpy as np

from robusteval.ensemble import fit_ensemble, grid_taus, reference_weights
from robusteval.records import MetricVector

rng = np.random.default_rng(0)
gold = rng.normal(size=300)
dev = [(MetricVector(bleu=0.3 * g + rng.normal(),
                     chrf=0.5 * g + rng.normal(),
                     neural=g + 0.3 * rng.normal()), float(g)) for g in gold]

# %%
model = fit_ensemble(dev, resolution=50)
print(model.weights)
print(model.normalizer.means)

# %% [markdown]
# The tau surface over the grid shows how flat the optimum is.

# %%
grid, taus = grid_taus(dev, 50, model.normalizer)
order = np.argsort(taus)[::-1][:5]
for k in order:
    print(np.round(grid[k], 2), round(float(taus[k]), 4))

# %% [markdown]
# The bundled reference weights lean almost entirely on the neural member.

# %%
print(reference_weights())
