"""
Binary tensor files
===================

Every array that crosses a pipeline boundary travels in a small binary
format: 4-byte magic, dtype code, rank, little-endian u64 dims, then the
row-major float64 payload. This script writes one, reads it back, and
shows the exact bytes on disk.
"""

import tempfile
from pathlib import Path

import numpy as np

from brainalign.tensorio import read_tensor, write_tensor

out = Path(tempfile.mkdtemp()) / "demo.nat"

# the smallest interesting tensor: one element
write_tensor(out, np.array([0.0]))
raw = out.read_bytes()
print(f"[0.0] is {len(raw)} bytes on disk:")
print("  " + raw.hex(" "))

# magic 'NAT1', dtype 1 (f64), rank 1, dims [1], payload 8 zero bytes
assert raw[:4] == b"NAT1"
assert len(raw) == 22

# round-trip a bigger one, bit for bit
arr = np.random.default_rng(0).normal(size=(3, 4, 5))
write_tensor(out, arr)
back = read_tensor(out)
print(f"\nround-trip {arr.shape}: bitwise equal = "
      f"{back.tobytes() == arr.tobytes()}")

# Fortran-ordered input is stored row-major all the same
fortran = np.asfortranarray(arr)
write_tensor(out, fortran)
print(f"fortran-order input, same bytes = "
      f"{read_tensor(out).tobytes() == arr.tobytes()}")
