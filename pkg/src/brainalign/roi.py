"""Reduce voxel-level single-trial betas to per-ROI response vectors."""

from dataclasses import dataclass

import numpy as np

from .errors import DataError

AGGREGATORS = ("mean", "median")


@dataclass(frozen=True)
class RoiResponse:
    roi_name: str
    hemisphere: str
    subject_id: str
    values: np.ndarray  # one summary per trial, event-table order

    @property
    def key(self):
        return f"{self.hemisphere}_{self.roi_name}"


def extract_roi_responses(betas, masks, subject_id, aggregator="mean"):
    """One response vector per mask: aggregate beta columns over voxels.

    Parameters
    ----------
    betas : BetaMap or trials x voxels array
    masks : RoiMaskSet
    subject_id : str
    aggregator : {"mean", "median"}

    Returns
    -------
    list of RoiResponse, in mask order.
    """
    if aggregator not in AGGREGATORS:
        raise ValueError(f"aggregator must be one of {AGGREGATORS}")
    values = np.asarray(getattr(betas, "values", betas), float)
    n_vox = values.shape[1]
    reduce = np.mean if aggregator == "mean" else np.median
    out = []
    for mask in masks:
        idx = np.asarray(mask.voxel_indices)
        if idx.max() >= n_vox:
            raise DataError(
                f"mask {mask.key}: voxel index {idx.max()} out of range "
                f"(data has {n_vox} voxels)"
            )
        picked = values[:, np.sort(idx)]
        if not np.all(np.isfinite(picked)):
            raise DataError(f"mask {mask.key}: non-finite beta values")
        out.append(
            RoiResponse(
                roi_name=mask.name,
                hemisphere=mask.hemisphere,
                subject_id=subject_id,
                values=reduce(picked, axis=1),
            )
        )
    return out
