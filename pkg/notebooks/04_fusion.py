# %% [markdown]
# # Fusion regressor
#
# A synthetic task where the gold score is the fraction of OK tags. The tags
# are random, so only the `wl_tags` variant has the information needed.

# %%
from robusteval.fusion import FusionConfig, build_vocab, fit, grad_check, init_params
from robusteval.stats import pearson
from robusteval.synthetic import ok_fraction_task

train = ok_fraction_task(500, seed=100)
held = ok_fraction_task(100, seed=200)

# %% [markdown]
# Gradients are checked against central finite differences first.

# %%
for variant in ("baseline", "sl_features", "wl_tags"):
    cfg = FusionConfig(embed_dim=4, variant=variant)
    params = init_params(cfg, build_vocab([[f"w{i}" for i in range(30)]]))
    print(variant, f"{grad_check(params, cfg, train[0]):.1e}")

# %%
gold = [e.gold for e in held]
for variant in ("baseline", "wl_tags"):
    model = fit(train, FusionConfig(variant=variant, epochs=30))
    preds = [model.predict_example(e) for e in held]
    print(variant, round(pearson(preds, gold), 3))
