"""Command-line front end.

Two modes, one output shape. With ``--model`` the named checkpoint is
run over the sentence file; with ``--pseudo L D`` hash-seeded vectors
are generated instead, which needs no checkpoint, no torch, and no
network. Either way the result is a NAT1 tensor plus a ``.meta``
sidecar next to it.

    embed-extract --model ./ckpt --sentences s.txt --pooling mean --out e.nat
    embed-extract --pseudo 6 20 --sentences s.txt --out e.nat

Exit codes: 0 ok, 2 bad arguments, 3 extraction or I/O failure.
"""

import argparse
import sys
from pathlib import Path

from .errors import ExtractionError
from .extract import (
    POOLINGS,
    ExtractionRequest,
    content_hash,
    extract,
    write_sidecar,
)
from .pseudo import pseudo_embed
from .tensorfile import write_tensor


def read_sentences(path):
    """One sentence per line, blank lines dropped, order kept."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    sentences = [ln for ln in lines if ln.strip()]
    if not sentences:
        raise ValueError(f"{path}: no sentences")
    return sentences


def _parse_layers(raw):
    if raw == "all":
        return "all"
    return tuple(int(tok) for tok in raw.split(",") if tok.strip())


def _parser():
    p = argparse.ArgumentParser(
        prog="embed-extract",
        description="per-layer sentence embeddings as NAT1 tensor files",
    )
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", help="checkpoint id or local directory")
    src.add_argument("--pseudo", nargs=2, type=int, metavar=("L", "D"),
                     help="generate L x D hash-seeded vectors per sentence")
    p.add_argument("--sentences", required=True, help="text file, one per line")
    p.add_argument("--out", required=True, help="output tensor path")
    p.add_argument("--pooling", choices=POOLINGS, default="mean")
    p.add_argument("--layers", default="all",
                   help='"all" or comma-separated block indices')
    p.add_argument("--include-embedding-layer", action="store_true",
                   help="prepend the pre-block embedding output")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--seed", type=int, default=0,
                   help="pseudo mode only; varies every vector")
    return p


def run_pseudo(args, sentences):
    n_layers, dim = args.pseudo
    emb = pseudo_embed(sentences, n_layers, dim, seed=args.seed)
    write_tensor(args.out, emb)
    write_sidecar(str(args.out) + ".meta", {
        "model_id": "pseudo",
        "pooling": "none",
        "layer_policy": "all",
        "layers": n_layers,
        "dim": dim,
        "sentences": len(sentences),
        "seed": args.seed,
        "content_sha256": content_hash(sentences),
    })


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        sentences = read_sentences(args.sentences)
        if args.pseudo:
            run_pseudo(args, sentences)
        else:
            extract(ExtractionRequest(
                model_id=args.model,
                sentences=sentences,
                out=args.out,
                pooling=args.pooling,
                layers=_parse_layers(args.layers),
                include_embedding_layer=args.include_embedding_layer,
                batch_size=args.batch_size,
            ))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ExtractionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
