"""Transformer checkpoint to NAT1 embedding tensors."""

from .errors import (
    ContextLengthError,
    ExtractionError,
    UnresolvedCheckpointError,
)
from .extract import (
    ExtractionRequest,
    content_hash,
    extract,
    read_sidecar,
    write_sidecar,
)
from .pseudo import pseudo_embed
from .tensorfile import tensor_bytes, write_tensor

__version__ = "0.1.0"

__all__ = [
    "ContextLengthError",
    "ExtractionError",
    "ExtractionRequest",
    "UnresolvedCheckpointError",
    "content_hash",
    "extract",
    "pseudo_embed",
    "read_sidecar",
    "tensor_bytes",
    "write_sidecar",
    "write_tensor",
    "__version__",
]
