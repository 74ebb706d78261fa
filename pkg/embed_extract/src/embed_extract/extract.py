"""Per-layer sentence embeddings from a transformer checkpoint.

One request in, one NAT1 tensor out (sentences x layers x dim), plus a
key=value sidecar recording everything needed to reproduce the run:
checkpoint id, pooling, layer policy, tokenizer hash, and a content
hash of the sentence list.

Layer indexing follows the checkpoint's block count: index 0 is the
output of the first transformer block, so a 12-block encoder yields 12
layers. The pre-block embedding output is excluded unless
``include_embedding_layer`` is set, in which case it is prepended and
every block shifts up by one.

torch/transformers are imported lazily; nothing here is needed for
:func:`embed_extract.pseudo.pseudo_embed`.
"""

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ContextLengthError, UnresolvedCheckpointError
from .tensorfile import write_tensor

POOLINGS = ("mean", "last_token")

# tokenizers use enormous sentinels when the true limit is unknown
_NO_LIMIT = 10 ** 9


@dataclass(frozen=True)
class ExtractionRequest:
    model_id: str
    sentences: tuple
    out: Path
    pooling: str = "mean"
    layers: object = "all"      # "all" or a sequence of block indices
    include_embedding_layer: bool = False
    batch_size: int = 32

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        object.__setattr__(self, "out", Path(self.out))
        if not self.model_id:
            raise ValueError("model_id must be non-empty")
        if not self.sentences:
            raise ValueError("sentences must be non-empty")
        if self.pooling not in POOLINGS:
            raise ValueError(f"pooling must be one of {POOLINGS}, "
                             f"got {self.pooling!r}")
        if self.layers != "all":
            idx = tuple(int(i) for i in self.layers)
            if not idx:
                raise ValueError("layer list must be non-empty")
            if any(i < 0 for i in idx):
                raise ValueError("layer indices must be >= 0")
            if len(set(idx)) != len(idx):
                raise ValueError("duplicate layer index")
            object.__setattr__(self, "layers", idx)
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    def layer_policy(self):
        if self.layers == "all":
            return "all"
        return ",".join(str(i) for i in self.layers)


def content_hash(sentences):
    """Order-sensitive digest of the sentence list.

    Each sentence is length-prefixed before hashing so list structure
    is unambiguous ("ab","c" never collides with "a","bc").
    """
    h = hashlib.sha256()
    for text in sentences:
        raw = text.encode("utf-8")
        h.update(f"{len(raw)}:".encode())
        h.update(raw)
    return h.hexdigest()


def write_sidecar(path, pairs):
    """key=value lines, sorted by key, one per line."""
    with open(path, "w") as fh:
        for key in sorted(pairs):
            fh.write(f"{key}={pairs[key]}\n")
    return path


def read_sidecar(path):
    out = {}
    for line in Path(path).read_text().splitlines():
        if line.strip():
            key, _, value = line.partition("=")
            out[key] = value
    return out


def _load_checkpoint(model_id):
    try:
        import torch  # noqa: F401
        from transformers import AutoModel, AutoTokenizer
    except ImportError as exc:
        raise UnresolvedCheckpointError(
            f"checkpoint {model_id!r} needs torch+transformers installed "
            f"(pip install 'embed-extract[hf]'): {exc}"
        ) from exc
    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id)
        model = AutoModel.from_pretrained(model_id)
    except Exception as exc:
        raise UnresolvedCheckpointError(
            f"cannot resolve checkpoint {model_id!r}: {exc}"
        ) from exc
    model.eval()
    return tokenizer, model


def _position_limit(tokenizer, model):
    limits = []
    conf = getattr(model.config, "max_position_embeddings", None)
    if conf is not None and 0 < conf < _NO_LIMIT:
        limits.append(int(conf))
    tok = getattr(tokenizer, "model_max_length", None)
    if tok is not None and 0 < tok < _NO_LIMIT:
        limits.append(int(tok))
    return min(limits) if limits else None


def _check_lengths(tokenizer, model, sentences):
    limit = _position_limit(tokenizer, model)
    if limit is None:
        return
    for i, text in enumerate(sentences):
        n = len(tokenizer(text, truncation=False)["input_ids"])
        if n > limit:
            raise ContextLengthError(
                f"sentence {i}: {n} tokens exceeds context length {limit}"
            )


def _tokenizer_hash(tokenizer):
    vocab = tokenizer.get_vocab()
    blob = json.dumps(sorted(vocab.items()), ensure_ascii=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def _pool(hidden, mask, pooling):
    # hidden: (layers, batch, tokens, dim); mask: (batch, tokens) of 0/1
    if pooling == "mean":
        weights = mask[None, :, :, None].to(hidden.dtype)
        return (hidden * weights).sum(2) / weights.sum(2)
    last = mask.sum(1) - 1                      # index of final real token
    batch_idx = list(range(hidden.shape[1]))
    return hidden[:, batch_idx, last, :]


def _forward_batch(tokenizer, model, batch, request):
    import torch

    enc = tokenizer(list(batch), padding=True, return_tensors="pt")
    with torch.no_grad():
        out = model(**enc, output_hidden_states=True)
    hs = out.hidden_states                       # embeddings + one per block
    stack = torch.stack(hs if request.include_embedding_layer else hs[1:])
    pooled = _pool(stack, enc["attention_mask"], request.pooling)
    return pooled.permute(1, 0, 2).double().cpu().numpy()


def extract(request):
    """Run the checkpoint over the sentences and write tensor + sidecar.

    Returns the (sentences, layers, dim) array that was written.
    """
    tokenizer, model = _load_checkpoint(request.model_id)
    _check_lengths(tokenizer, model, request.sentences)

    chunks = []
    for start in range(0, len(request.sentences), request.batch_size):
        batch = request.sentences[start:start + request.batch_size]
        chunks.append(_forward_batch(tokenizer, model, batch, request))
    emb = np.concatenate(chunks, axis=0)

    if request.layers != "all":
        bad = [i for i in request.layers if i >= emb.shape[1]]
        if bad:
            raise ValueError(
                f"layer index {bad[0]} out of range, checkpoint has "
                f"{emb.shape[1]} layers in the selected stack"
            )
        emb = emb[:, list(request.layers), :]

    write_tensor(request.out, emb)
    write_sidecar(str(request.out) + ".meta", {
        "model_id": request.model_id,
        "pooling": request.pooling,
        "layer_policy": request.layer_policy(),
        "layers": emb.shape[1],
        "dim": emb.shape[2],
        "sentences": emb.shape[0],
        "embedding_layer_included": str(request.include_embedding_layer).lower(),
        "tokenizer_sha256": _tokenizer_hash(tokenizer),
        "content_sha256": content_hash(request.sentences),
    })
    return emb
