"""Pure-Python kernel loops; reference implementation for the compiled ones.

Signatures mirror the dispatch in kernels/__init__.py: tables arrive as plain
Python integers (exact), outputs land in preallocated numpy arrays.
"""

from __future__ import annotations

import numpy as np

_PHASE_SCALE = 2.0**-53
_PHASE_MASK = (1 << 53) - 1


def classify_block(vtab, etab, bits, k, count, t_lo, t_hi, out: np.ndarray) -> None:
    mask = (1 << bits) - 1
    v = list(vtab)
    e = list(etab)
    for idx in range(count):
        val, err = v[0], e[0]
        if val >= t_lo + err:
            if val + err <= t_hi:
                out[idx] = 1
            elif val > t_hi + err:
                out[idx] = 0
            else:
                out[idx] = 2
        elif val + err < t_lo:
            out[idx] = 0
        else:
            out[idx] = 2
        for j in range(k):
            v[j] = (v[j] + v[j + 1]) & mask
            e[j] = e[j] + e[j + 1]


def phase_block(vtab, bits, k, count, out: np.ndarray) -> None:
    mask = (1 << bits) - 1
    shift = bits - 53
    v = list(vtab)
    for idx in range(count):
        out[idx] = ((v[0] >> shift) & _PHASE_MASK) * _PHASE_SCALE
        for j in range(k):
            v[j] = (v[j] + v[j + 1]) & mask


def phases_at(mantissa, bits, k, ns, out: np.ndarray) -> None:
    mod = 1 << bits
    shift = bits - 53
    for i in range(len(ns)):
        v = (pow(int(ns[i]), k, mod) * mantissa) % mod
        out[i] = ((v >> shift) & _PHASE_MASK) * _PHASE_SCALE
