"""Flat-fading channel model for M parallel Alamouti-encoded layers.

Layer m (0-based) drives transmit antennas 2m and 2m+1 with the standard
two-slot Alamouti pattern: slot one sends (s_m1, s_m2), slot two sends
(-conj(s_m2), conj(s_m1)).  With N receive antennas and the per-antenna
received pair (x_n1, x_n2), stacking (x_n1, conj(x_n2)) for every antenna
turns the two-slot block system into the linear model

    x' = H' s' + n'

where s' = (s_11, s_12, ..., s_M1, s_M2) and H' is the 2N x 2M equivalent
channel assembled by `build_equivalent`.  Each receive antenna contributes
a row pair (h_1, ..., h_2M) and (conj(h_2), -conj(h_1), ..., conj(h_2M),
-conj(h_2M-1)), which makes every column pair of H' orthogonal with equal
norms.  That orthogonality is what the block-compressed detectors exploit.

Randomness is counter-based: every draw derives from a fresh Philox
generator keyed by the caller's seed (optionally a spawn-key tuple), so
identical keys reproduce identical draws regardless of call order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimensions

__all__ = [
    "ChannelMatrix",
    "EquivalentChannel",
    "SymbolVector",
    "ReceivedVector",
    "NoiseSpec",
    "keyed_generator",
    "generate_channel",
    "build_equivalent",
    "transmit",
]


def keyed_generator(seed, *spawn_key) -> np.random.Generator:
    """Philox generator keyed by (seed, *spawn_key); order-independent."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in spawn_key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class ChannelMatrix:
    """N x 2M complex gains; column 2m+k is antenna k of layer m."""

    gains: np.ndarray

    @property
    def n_rx(self) -> int:
        return self.gains.shape[0]

    @property
    def layers(self) -> int:
        return self.gains.shape[1] // 2


@dataclass(frozen=True)
class EquivalentChannel:
    """2N x 2M equivalent channel acting on the stacked symbol vector."""

    array: np.ndarray

    @property
    def n_rx(self) -> int:
        return self.array.shape[0] // 2

    @property
    def layers(self) -> int:
        return self.array.shape[1] // 2


@dataclass(frozen=True)
class SymbolVector:
    """Stacked layer symbols (s_11, s_12, ..., s_M1, s_M2)."""

    entries: np.ndarray
    sigma_s2: float = 1.0


@dataclass(frozen=True)
class ReceivedVector:
    """Stacked received samples (x_11, conj(x_12), ..., x_N1, conj(x_N2))."""

    entries: np.ndarray


@dataclass(frozen=True)
class NoiseSpec:
    """Complex AWGN with per-sample variance sigma_n2, drawn from `seed`."""

    sigma_n2: float
    seed: int = 0


def generate_channel(n_rx: int, layers: int, seed: int) -> ChannelMatrix:
    """Draw an i.i.d. CN(0, 1) channel (real and imaginary variance 1/2).

    Requires n_rx >= layers >= 1 so the group-wise detectors are
    well-posed.
    """
    if layers < 1 or n_rx < layers:
        raise InvalidDimensions(f"need n_rx >= layers >= 1, got n_rx={n_rx}, layers={layers}")
    rng = keyed_generator(seed)
    shape = (n_rx, 2 * layers)
    gains = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return ChannelMatrix(gains)


def build_equivalent(h: ChannelMatrix) -> EquivalentChannel:
    """Assemble the 2N x 2M equivalent channel from the physical gains."""
    g = np.asarray(h.gains)
    if g.ndim != 2 or g.shape[1] % 2 != 0 or g.shape[1] == 0:
        raise InvalidDimensions(f"channel gains must be N x 2M, got shape {g.shape}")
    n, two_m = g.shape
    out = np.empty((2 * n, two_m), dtype=np.complex128)
    out[0::2, :] = g
    out[1::2, 0::2] = np.conj(g[:, 1::2])
    out[1::2, 1::2] = -np.conj(g[:, 0::2])
    return EquivalentChannel(out)


def transmit(h: ChannelMatrix, s, noise: NoiseSpec) -> ReceivedVector:
    """Run one two-slot channel use and return the stacked received vector.

    `s` is a SymbolVector or any length-2M sequence of symbols.

    The per-slot transmit matrix is built explicitly from the Alamouti
    pattern, noise is added per receive antenna and slot, and the slot-two
    samples are conjugated during stacking; conjugated CN noise is CN with
    the same variance, so the stacked model sees i.i.d. noise.
    """
    g = np.asarray(h.gains)
    sv = np.asarray(getattr(s, "entries", s))
    if sv.ndim != 1 or sv.size != g.shape[1]:
        raise InvalidDimensions(f"symbol vector length {sv.size} does not match 2M={g.shape[1]}")
    if noise.sigma_n2 < 0:
        raise InvalidDimensions(f"noise variance must be >= 0, got {noise.sigma_n2}")
    two_m = sv.size
    code = np.empty((two_m, 2), dtype=np.complex128)
    code[0::2, 0] = sv[0::2]
    code[1::2, 0] = sv[1::2]
    code[0::2, 1] = -np.conj(sv[1::2])
    code[1::2, 1] = np.conj(sv[0::2])
    received = g @ code
    if noise.sigma_n2 > 0:
        rng = keyed_generator(noise.seed)
        w = (rng.standard_normal(received.shape) + 1j * rng.standard_normal(received.shape))
        received = received + np.sqrt(noise.sigma_n2 / 2.0) * w
    stacked = np.empty(2 * g.shape[0], dtype=np.complex128)
    stacked[0::2] = received[:, 0]
    stacked[1::2] = np.conj(received[:, 1])
    return ReceivedVector(stacked)
