"""Deterministic stand-in embeddings, no checkpoint required.

Each (sentence text, layer) pair is hashed together with the seed and
the digest drives a dedicated random stream, so a vector depends on the
text itself rather than on the sentence's position in the list:
identical text gives the identical vector, any change to text, layer,
or seed gives an unrelated one. Useful for wiring up and testing the
downstream pipeline offline.
"""

import hashlib

import numpy as np

# field separator inside the hash preimage; never appears in a layer
# index and keeps "ab"+layer 1 distinct from "a"+layer 11
_SEP = b"\x1f"


def _stream(sentence, layer, seed):
    digest = hashlib.sha256(
        str(seed).encode() + _SEP + str(layer).encode() + _SEP
        + sentence.encode("utf-8")
    ).digest()
    words = np.frombuffer(digest, dtype="<u4")
    return np.random.default_rng(words.tolist())


def pseudo_embed(sentences, n_layers, dim, seed=0):
    """sentences x layers x dim array of hash-seeded unit normals.

    Parameters
    ----------
    sentences : ordered collection of str, non-empty
    n_layers, dim : int, both >= 1
    seed : int
        Varies every vector; same seed + same text reproduces bitwise.
    """
    sentences = list(sentences)
    if not sentences:
        raise ValueError("sentences must be non-empty")
    if n_layers < 1 or dim < 1:
        raise ValueError(f"need n_layers >= 1 and dim >= 1, "
                         f"got {n_layers}, {dim}")
    out = np.empty((len(sentences), n_layers, dim))
    for i, text in enumerate(sentences):
        for layer in range(n_layers):
            out[i, layer] = _stream(text, layer, seed).normal(size=dim)
    return out
