"""Seeded ground-truth generators.

Everything downstream is tested against data produced here: embedding
tensors with one signal-bearing layer, ROI responses built from a known
weight vector at a known SNR, and BOLD series assembled from known trial
amplitudes. Each generator draws from its own derived stream, so the
embeddings of a spec never change when, say, only the BOLD noise is
regenerated.
"""

from dataclasses import dataclass

import numpy as np

from .encoding import EmbeddingTensor
from .errors import DataError
from .hrf_glm import FINE_DT, _fine_boxcar, _fine_grid_size, _resample, _validate_onsets, canonical_hrf
from .roi import RoiResponse
from .tensorio import Event, EventTable

# sub-stream tags so the generators stay independent under one seed
_EMB_STREAM = 0
_RESPONSE_STREAM = 1
_BOLD_STREAM = 2

HRF_TAIL_SECONDS = 40.0


@dataclass(frozen=True)
class SynthSpec:
    """Knobs for one synthetic dataset; N doubles as trial count."""

    n: int = 200
    n_layers: int = 6
    dim: int = 20
    true_layer: int = 3
    weight_scale: float = 1.0
    snr: float = 4.0
    seed: int = 0
    n_scans: int = None   # derived from spacing when left unset
    tr: float = 2.0
    trial_spacing: float = 8.0
    noise_sd: float = 0.0

    def __post_init__(self):
        if self.snr <= 0:
            raise ValueError("snr must be positive")
        if not 0 <= self.true_layer < self.n_layers:
            raise ValueError(
                f"true_layer {self.true_layer} outside 0..{self.n_layers - 1}"
            )
        if self.tr <= 0 or self.trial_spacing <= 0:
            raise ValueError("tr and trial_spacing must be positive")

    def scan_count(self):
        """Explicit n_scans, or enough scans to cover the last response."""
        if self.n_scans is not None:
            return self.n_scans
        span = (self.n - 1) * self.trial_spacing + HRF_TAIL_SECONDS
        return int(np.ceil(span / self.tr))


@dataclass(frozen=True)
class TruthRecord:
    true_layer: int
    weights: np.ndarray


@dataclass(frozen=True)
class BoldSeries:
    values: np.ndarray  # scans x voxels
    tr: float


def gen_embeddings(spec, model_id="synthetic"):
    """N x L x D standard normals; layers mutually independent."""
    rng = np.random.default_rng([spec.seed, _EMB_STREAM])
    values = rng.normal(size=(spec.n, spec.n_layers, spec.dim))
    return EmbeddingTensor(model_id=model_id, values=values)


def gen_roi_response(spec, emb, subject_id="synth", roi_name="IFG",
                     hemisphere="LH"):
    """Response driven by one layer: y = X[l*] w + noise at spec.snr.

    Returns (RoiResponse, TruthRecord); the truth record is what
    recovery tests compare against.
    """
    X = emb.values
    if X.shape != (spec.n, spec.n_layers, spec.dim):
        raise DataError(
            f"embedding shape {X.shape} does not match spec "
            f"({spec.n}, {spec.n_layers}, {spec.dim})"
        )
    rng = np.random.default_rng([spec.seed, _RESPONSE_STREAM])
    w = rng.normal(size=spec.dim) * spec.weight_scale
    signal = X[:, spec.true_layer, :] @ w
    noise = rng.normal(size=spec.n)
    y = signal + noise * (signal.std() / spec.snr) / noise.std()
    response = RoiResponse(roi_name=roi_name, hemisphere=hemisphere,
                           subject_id=subject_id, values=y)
    return response, TruthRecord(true_layer=spec.true_layer, weights=w)


def default_events(spec):
    """One impulse trial every trial_spacing seconds, single condition."""
    return EventTable(
        [
            Event(f"t{i:04d}", i * spec.trial_spacing, 0.0, "sent")
            for i in range(spec.n)
        ]
    )


def gen_bold(events, amplitudes, spec):
    """Scans x voxels series: sum of amplitude-weighted trial responses.

    Each trial contributes amplitude[i, v] times its convolved unit
    regressor; white noise at spec.noise_sd (0 allowed) is added on top.
    """
    amplitudes = np.atleast_2d(np.asarray(amplitudes, float))
    if amplitudes.shape[0] != len(events):
        raise DataError(
            f"amplitudes have {amplitudes.shape[0]} rows for "
            f"{len(events)} trials"
        )
    n_scans = spec.scan_count()
    _validate_onsets(events, n_scans, spec.tr)
    kernel = canonical_hrf(FINE_DT).samples
    n_fine = _fine_grid_size(events, n_scans, spec.tr, FINE_DT)
    Y = np.zeros((n_scans, amplitudes.shape[1]))
    for i, ev in enumerate(events):
        box = _fine_boxcar([ev], n_fine, FINE_DT)
        reg = _resample(np.convolve(box, kernel), FINE_DT, n_scans, spec.tr)
        Y += reg[:, None] * amplitudes[i][None, :]
    if spec.noise_sd > 0:
        rng = np.random.default_rng([spec.seed, _BOLD_STREAM])
        Y = Y + spec.noise_sd * rng.normal(size=Y.shape)
    return BoldSeries(values=Y, tr=spec.tr)
