# %% [markdown]
# # Word-level OK/BAD tags
#
# Each hypothesis token is aligned to the reference by edit distance. Matched
# tokens are OK; substitutions and hypothesis-only insertions are BAD.

# %%
from robusteval.align import levenshtein_align, tags_from_alignment, word_tags
from robusteval.text import tokenize

hyp = tokenize("the big dog sleep in garden")
ref = tokenize("the dog sleeps in the garden")
distance, ops = levenshtein_align(hyp, ref)
print("distance", distance)
for op in ops:
    print(op)

# %%
tags = tags_from_alignment(hyp, ops)
for token, tag in zip(hyp, tags):
    print(f"{token:>8}  {tag}")
print("OK fraction", tags.ok_fraction)

# %% [markdown]
# `word_tags` is the one-call shortcut. An identical hypothesis is all OK.

# %%
print(word_tags(ref, ref))
