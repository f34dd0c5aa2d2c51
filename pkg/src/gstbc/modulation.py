"""Gray-mapped QPSK at unit symbol energy."""

from __future__ import annotations

import numpy as np

from .errors import OddBitCount

_SCALE = 1.0 / np.sqrt(2.0)


def qpsk_modulate(bits) -> np.ndarray:
    """Map a bit vector (values 0/1, even length) to QPSK symbols.

    The pair (b0, b1) maps to ((1 - 2 b0) + 1j (1 - 2 b1)) / sqrt(2), i.e.
    b0 selects the sign of the real part and b1 of the imaginary part.
    Adjacent constellation points differ in exactly one bit and the symbol
    energy is 1.
    """
    bits = np.asarray(bits)
    if bits.ndim != 1 or bits.size % 2 != 0:
        raise OddBitCount(f"need a flat, even-length bit vector, got shape {bits.shape}")
    if not np.all((bits == 0) | (bits == 1)):
        raise OddBitCount("bit values must be 0 or 1")
    re = 1.0 - 2.0 * bits[0::2]
    im = 1.0 - 2.0 * bits[1::2]
    return _SCALE * (re + 1j * im)


def qpsk_slice(y: complex) -> complex:
    """Quantize one soft value to the nearest QPSK point; zero maps to +."""
    re = _SCALE if y.real >= 0 else -_SCALE
    im = _SCALE if y.imag >= 0 else -_SCALE
    return complex(re, im)


def qpsk_slice_array(y) -> np.ndarray:
    """Vectorized `qpsk_slice`."""
    y = np.asarray(y)
    re = np.where(y.real >= 0, _SCALE, -_SCALE)
    im = np.where(y.imag >= 0, _SCALE, -_SCALE)
    return re + 1j * im


def qpsk_demap(symbols) -> np.ndarray:
    """Recover the bit vector from (hard or soft) symbol values by sign."""
    symbols = np.asarray(symbols)
    bits = np.empty(2 * symbols.size, dtype=np.int64)
    bits[0::2] = (symbols.real < 0).astype(np.int64)
    bits[1::2] = (symbols.imag < 0).astype(np.int64)
    return bits
