# %% [markdown]
# # Lexical metrics
#
# Sentence-level BLEU and chrF on a few hand-made hypotheses. Both return a
# `LexicalScore` whose `value` lies in [0, 1].

# %%
from robusteval.lexmetrics import sentence_bleu, sentence_chrf
from robusteval.text import tokenize

ref = "The dog is sleeping in the garden."
hyps = [
    "The dog is sleeping in the garden.",
    "The dog sleeps in the garden.",
    "A cat is sleeping in the garden.",
    "Garden.",
]

# %% [markdown]
# BLEU works on tokens. Exponential smoothing keeps short, partially matching
# hypotheses away from zero.

# %%
for h in hyps:
    b = sentence_bleu(tokenize(h), tokenize(ref))
    c = sentence_chrf(h, ref)
    print(f"{b.value:.3f}  {c.value:.3f}  {h}")

# %% [markdown]
# Smoothing matters most for short outputs where higher-order n-grams are missing.

# %%
for mode in ("exp", "floor", "none"):
    print(mode, round(sentence_bleu(tokenize("Garden ."), tokenize(ref), smoothing=mode).value, 4))

# %% [markdown]
# chrF sees inflection that BLEU misses: "sleeps" vs "sleeping" share most
# characters but no word.

# %%
print(sentence_bleu(tokenize("sleeps"), tokenize("sleeping")).value,
      sentence_chrf("sleeps", "sleeping").value)
