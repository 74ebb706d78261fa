"""
Option matching accuracy
========================

Each item pairs a source embedding with five candidate embeddings; the
first candidate is the correct one. An item scores when the source's
cosine-nearest candidate is that first option, with ties scoring zero.
Random candidates land near 1/5; planted ones land at 1.
"""

import numpy as np

from brainalign.csaa import OptionSet, cosine_similarity, csaa, scramble_words

rng = np.random.default_rng(11)

# 400 random items: accuracy should hover around chance
random_items = [
    OptionSet(f"r{k}", rng.normal(size=16), rng.normal(size=(5, 16)))
    for k in range(400)
]
print(f"random options:  accuracy = {csaa(random_items).csaa:.3f}")

# planted items: correct option = source plus small noise
planted = []
for k in range(400):
    src = rng.normal(size=16)
    options = rng.normal(size=(5, 16))
    options[0] = src + 0.1 * rng.normal(size=16)
    planted.append(OptionSet(f"p{k}", src, options))
print(f"planted options: accuracy = {csaa(planted).csaa:.3f}")

v = rng.normal(size=16)
print(f"cosine(v, 2v) = {cosine_similarity(v, 2 * v):.6f}")

# distractor text utilities are seeded and reproducible
tokens = ["the", "quick", "brown", "fox", "jumps"]
print(f"scrambled: {' '.join(scramble_words(tokens, seed=3))}")
