"""Translation-identification scoring.

Each item holds one source-language embedding and five candidate
embeddings, the true translation always sitting at index 0. An item
counts as correct when the cosine argmax lands on index 0; a tied
argmax never counts. The module also ships the mechanical text
perturbations (scramble, delete/insert, substitute) used to author
distractor options; richer distractors arrive via option files.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DataError

N_OPTIONS = 5
OPTION_LABELS = ("A", "B", "C", "D", "E")
CORRECT_INDEX = 0
MAX_SCRAMBLE_DRAWS = 100


@dataclass(frozen=True)
class OptionSet:
    item_id: str
    source_embedding: np.ndarray   # (D,)
    option_embeddings: np.ndarray  # (5, D), row 0 is the true translation

    def __post_init__(self):
        src = np.asarray(self.source_embedding, float)
        opts = np.asarray(self.option_embeddings, float)
        if opts.ndim != 2 or opts.shape[0] != N_OPTIONS:
            raise DataError(
                f"item {self.item_id!r}: need exactly {N_OPTIONS} options, "
                f"got shape {opts.shape}"
            )
        if src.ndim != 1 or opts.shape[1] != src.shape[0]:
            raise DataError(f"item {self.item_id!r}: dimension mismatch")
        if np.linalg.norm(src) == 0.0 or np.any(
            np.linalg.norm(opts, axis=1) == 0.0
        ):
            raise DataError(f"item {self.item_id!r}: zero-norm embedding")
        object.__setattr__(self, "source_embedding", src)
        object.__setattr__(self, "option_embeddings", opts)


@dataclass(frozen=True)
class CsaaResult:
    n: int
    delta: np.ndarray   # 0/1 per item
    chosen: np.ndarray  # argmax option index per item
    tied: np.ndarray    # bool per item

    @property
    def csaa(self):
        return float(self.delta.mean())


def cosine_similarity(u, v):
    """u.v / (|u||v|), clipped into [-1, 1]."""
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    if u.shape != v.shape:
        raise DataError(f"shape mismatch {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise DataError("zero-norm vector in cosine similarity")
    if np.array_equal(u, v):
        return 1.0  # keep cos(u, u) exact; sqrt rounding would shave an ulp
    return float(np.clip(u @ v / (nu * nv), -1.0, 1.0))


def select_option(item):
    """Cosine argmax over the five options.

    Returns (index, tied); a tied maximum reports the lowest index.
    """
    sims = np.array(
        [cosine_similarity(item.source_embedding, opt)
         for opt in item.option_embeddings]
    )
    idx = int(np.argmax(sims))
    tied = int(np.sum(sims == sims[idx])) > 1
    return idx, tied


def csaa(items):
    """Fraction of items whose cosine argmax is the true translation."""
    items = list(items)
    if not items:
        raise DataError("no items to score")
    chosen = np.empty(len(items), dtype=np.int64)
    tied = np.empty(len(items), dtype=bool)
    for i, item in enumerate(items):
        chosen[i], tied[i] = select_option(item)
    delta = ((chosen == CORRECT_INDEX) & ~tied).astype(np.int64)
    return CsaaResult(n=len(items), delta=delta, chosen=chosen, tied=tied)


# ---------------------------------------------------------------------------
# option text perturbations
# ---------------------------------------------------------------------------

def scramble_words(tokens, seed):
    """Seeded reorder, redrawn (up to 100 times) until it differs."""
    tokens = list(tokens)
    if len(tokens) < 2:
        raise DataError("need >= 2 tokens to scramble")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_SCRAMBLE_DRAWS):
        out = [tokens[i] for i in rng.permutation(len(tokens))]
        if out != tokens:
            return out
    raise DataError("unscramblable: all draws reproduced the input")


def delete_or_insert(tokens, mode, payload=None, seed=0):
    """Remove a short random span, or splice payload tokens in.

    Deletion takes a contiguous span of 1..ceil(len/4) tokens chosen by
    seed; insertion puts the whole payload at one seeded position.
    """
    tokens = list(tokens)
    rng = np.random.default_rng(seed)
    if mode == "delete":
        if len(tokens) < 2:
            raise DataError("need >= 2 tokens to delete from")
        max_span = -(len(tokens) // -4)  # ceil(len/4)
        span = int(rng.integers(1, max_span + 1))
        start = int(rng.integers(0, len(tokens) - span + 1))
        return tokens[:start] + tokens[start + span:]
    if mode == "insert":
        payload = list(payload or [])
        if not payload:
            raise DataError("insert needs a non-empty payload")
        pos = int(rng.integers(0, len(tokens) + 1))
        return tokens[:pos] + payload + tokens[pos:]
    raise ValueError(f"mode must be 'delete' or 'insert', got {mode!r}")


def substitute_words(tokens, lexicon, seed):
    """Swap one covered token for a seeded choice of its replacements."""
    tokens = list(tokens)
    covered = [i for i, t in enumerate(tokens) if lexicon.get(t)]
    if not covered:
        raise DataError("lexicon covers no token of the sentence")
    rng = np.random.default_rng(seed)
    i = covered[int(rng.integers(0, len(covered)))]
    choices = list(lexicon[tokens[i]])
    out = list(tokens)
    out[i] = choices[int(rng.integers(0, len(choices)))]
    return out


# ---------------------------------------------------------------------------
# option text files
# ---------------------------------------------------------------------------

def read_option_texts(path):
    """Option TSV (item_id, option_label, text) -> {item: {label: text}}."""
    out = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        header = next(reader, None)
        if header != ["item_id", "option_label", "text"]:
            raise DataError(f"{path}: unexpected header {header}")
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 fields")
            item_id, label, text = rec
            if label not in OPTION_LABELS:
                raise DataError(f"{path}:{lineno}: bad option label {label!r}")
            if label in out.setdefault(item_id, {}):
                raise DataError(
                    f"{path}:{lineno}: duplicate ({item_id}, {label})"
                )
            out[item_id][label] = text
    return out


def write_option_texts(path, texts):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(["item_id", "option_label", "text"])
        for item_id in sorted(texts):
            for label in OPTION_LABELS:
                if label in texts[item_id]:
                    writer.writerow([item_id, label, texts[item_id][label]])
