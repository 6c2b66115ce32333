# %% [markdown]
# # Challenge-set evaluation
#
# Each item pairs a good and an incorrect translation. A metric scores a
# concordant pair when it prefers the good one.

# %%
import json

from robusteval.challenge import evaluate, read_jsonl, score_items
from robusteval.scoring import make_scorer
from robusteval.synthetic import bundled_path

items = read_jsonl(bundled_path("synthetic_challenge.jsonl"))
print(len(items), "items")

# %%
reports = {}
for metric in ("bleu", "chrf"):
    scores = score_items(items, make_scorer(metric))
    reports[metric] = evaluate(items, scores)
    print(metric, json.dumps(reports[metric]["phenomena"], indent=1))

# %% [markdown]
# Severity accuracy and language-pair groups come from the same report.

# %%
for metric, rep in reports.items():
    print(metric, rep["severity"], rep["langpairs"])
