"""Writer for the NAT1 binary tensor container.

This is the hand-off format to the analysis side: magic ``NAT1``, a u8
dtype code (1 = float64 little-endian), a u8 rank in 1..4, one u64
little-endian length per axis, then the row-major payload. Nothing
after the payload. The writer here is deliberately independent of any
reader implementation; the byte layout is the contract.
"""

import struct

import numpy as np

MAGIC = b"NAT1"
DTYPE_F64 = 1
MAX_RANK = 4


def tensor_bytes(values):
    """Serialize an array to NAT1 bytes without touching disk."""
    arr = np.ascontiguousarray(np.asarray(values, dtype="<f8"))
    if not 1 <= arr.ndim <= MAX_RANK:
        raise ValueError(
            f"tensor rank {arr.ndim} outside supported range 1..{MAX_RANK}"
        )
    header = MAGIC + struct.pack("<BB", DTYPE_F64, arr.ndim)
    header += struct.pack(f"<{arr.ndim}Q", *arr.shape)
    return header + arr.tobytes()


def write_tensor(path, values):
    blob = tensor_bytes(values)
    with open(path, "wb") as fh:
        fh.write(blob)
    return path
