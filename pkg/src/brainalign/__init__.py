"""Sentence-level brain response modeling and model-to-brain encoding."""

__version__ = "0.1.0"

from . import csaa, encoding, errors, hrf_glm, roi, stats, synth, tensorio

__all__ = [
    "csaa",
    "encoding",
    "errors",
    "hrf_glm",
    "roi",
    "stats",
    "synth",
    "tensorio",
    "__version__",
]
