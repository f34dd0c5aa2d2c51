"""Monte Carlo bit-error-rate harness.

Channel model: independent Rayleigh fading, flat over the two slots of
each space-time block, redrawn per block.  SNR is Eb/N0 in dB with unit
symbol energy and two bits per symbol, so

    sigma_n2 = sigma_s2 / (2 * 10**(snr_db / 10))

and the regularizer passed to the detectors is alpha = sigma_n2 /
sigma_s2.  Each point is split into fixed-size blocks; within a block
every detector sees the same channels, symbols and noise (common random
numbers), and the stream for (point, block) is keyed independently so
results do not depend on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .batch import (
    detect_fixed_order_batch,
    detect_gstbc_batch,
    detect_linear_mmse_batch,
    detect_osic_symbolwise_batch,
    detect_sic_groupwise_batch,
)
from .errors import ConfigInvalid
from .channel import keyed_generator

BLOCK_SIZE = 25_000

DETECTORS = {
    "proposed": detect_gstbc_batch,
    "fixed_order": detect_fixed_order_batch,
    "linear_mmse": detect_linear_mmse_batch,
    "osic_symbolwise": detect_osic_symbolwise_batch,
    "sic_groupwise": detect_sic_groupwise_batch,
}

_SCALE = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class SimConfig:
    """One sweep: trials are two-slot channel uses per SNR point."""

    layers: int
    n_rx: int
    snr_db: tuple = (0.0, 5.0, 10.0)
    detectors: tuple = ("proposed",)
    trials: int = 100_000
    seed: int = 0
    sigma_s2: float = 1.0
    modulation: str = "qpsk"

    def __post_init__(self):
        if self.layers < 1 or self.n_rx < self.layers:
            raise ConfigInvalid(
                f"need n_rx >= layers >= 1, got layers={self.layers} n_rx={self.n_rx}"
            )
        if not self.snr_db:
            raise ConfigInvalid("snr_db grid must be nonempty")
        unknown = [d for d in self.detectors if d not in DETECTORS]
        if unknown:
            raise ConfigInvalid(f"unknown detectors: {unknown}; known: {sorted(DETECTORS)}")
        if self.trials < 1:
            raise ConfigInvalid("trials must be positive")
        if self.modulation != "qpsk":
            raise ConfigInvalid(f"only qpsk modulation is supported, got {self.modulation!r}")


@dataclass
class BerRecord:
    detector: str
    snr_db: float
    bits: int
    bit_errors: int
    ber: float
    frames: int
    frame_errors: int


def sigma_n2_for_snr(snr_db: float, sigma_s2: float = 1.0) -> float:
    return sigma_s2 / (2.0 * 10.0 ** (snr_db / 10.0))


def _draw_block(rng, count, layers, n_rx, sigma_n2):
    """One block of channels, bit streams and stacked received vectors."""
    two_m = 2 * layers
    h = (
        rng.standard_normal((count, n_rx, two_m))
        + 1j * rng.standard_normal((count, n_rx, two_m))
    ) * _SCALE
    bits = rng.integers(0, 2, size=(count, 2 * two_m)).astype(np.int8)
    s = ((1 - 2 * bits[:, 0::2]) + 1j * (1 - 2 * bits[:, 1::2])) * _SCALE
    # second-slot transmit pattern of each antenna pair
    t2 = np.empty_like(s)
    t2[:, 0::2] = -np.conj(s[:, 1::2])
    t2[:, 1::2] = np.conj(s[:, 0::2])
    noise = (
        rng.standard_normal((count, n_rx, 2))
        + 1j * rng.standard_normal((count, n_rx, 2))
    ) * math.sqrt(sigma_n2 / 2.0)
    slot1 = np.einsum("bnj,bj->bn", h, s) + noise[:, :, 0]
    slot2 = np.einsum("bnj,bj->bn", h, t2) + noise[:, :, 1]
    x = np.empty((count, 2 * n_rx), dtype=np.complex128)
    x[:, 0::2] = slot1
    x[:, 1::2] = np.conj(slot2)  # stacked with the second slot conjugated
    return h, bits, s, x


def _bit_errors(decisions, bits):
    got = np.empty_like(bits)
    got[:, 0::2] = (decisions.real < 0).astype(np.int8)
    got[:, 1::2] = (decisions.imag < 0).astype(np.int8)
    wrong = got != bits
    return int(wrong.sum()), int(np.any(wrong, axis=1).sum())


def run_ber_sweep(config: SimConfig, progress=None) -> list:
    """Sweep SNR points, returning one record per (detector, point).

    Exactly `config.trials` channel uses are simulated per point, in
    blocks of at most BLOCK_SIZE; block (point_idx, block_idx) owns an
    independently keyed stream, so the output is a pure function of the
    config regardless of evaluation order.
    """
    records = []
    blocks = math.ceil(config.trials / BLOCK_SIZE)
    for point_idx, snr_db in enumerate(config.snr_db):
        sigma_n2 = sigma_n2_for_snr(snr_db, config.sigma_s2)
        alpha = sigma_n2 / config.sigma_s2
        tally = {d: [0, 0, 0, 0] for d in config.detectors}  # bits, errs, frames, ferrs
        for block_idx in range(blocks):
            count = min(BLOCK_SIZE, config.trials - block_idx * BLOCK_SIZE)
            rng = keyed_generator(config.seed, point_idx, block_idx)
            h, bits, _, x = _draw_block(
                rng, count, config.layers, config.n_rx, sigma_n2
            )
            for name in config.detectors:
                out = DETECTORS[name](h, x, alpha)
                errs, ferrs = _bit_errors(out.decisions, bits)
                t = tally[name]
                t[0] += bits.size
                t[1] += errs
                t[2] += bits.shape[0]
                t[3] += ferrs
            if progress is not None:
                progress(point_idx, block_idx, blocks)
        for name in config.detectors:
            nbits, errs, frames, ferrs = tally[name]
            records.append(
                BerRecord(
                    detector=name,
                    snr_db=float(snr_db),
                    bits=nbits,
                    bit_errors=errs,
                    ber=errs / nbits,
                    frames=frames,
                    frame_errors=ferrs,
                )
            )
    return records


_CSV_COLUMNS = "detector,snr_db,bits,bit_errors,ber,frames,frame_errors"


def format_csv(records, config: SimConfig | None = None) -> str:
    lines = []
    if config is not None:
        lines.append(
            f"# ber sweep: layers={config.layers} n_rx={config.n_rx} "
            f"trials={config.trials}"
        )
    seed_note = "" if config is None else f"; seed={config.seed}"
    lines.append(
        "# snr_db is Eb/N0: sigma_n2 = sigma_s2 / (2 * 10^(snr_db/10)), "
        f"two bits per symbol{seed_note}"
    )
    lines.append(_CSV_COLUMNS)
    for r in records:
        lines.append(
            f"{r.detector},{r.snr_db:.10g},{r.bits},{r.bit_errors},"
            f"{r.ber:.10g},{r.frames},{r.frame_errors}"
        )
    return "\n".join(lines) + "\n"


def emit_csv(records, path, config: SimConfig | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_csv(records, config))


def parse_csv(path) -> list:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line == _CSV_COLUMNS:
                continue
            parts = line.split(",")
            records.append(
                BerRecord(
                    detector=parts[0],
                    snr_db=float(parts[1]),
                    bits=int(parts[2]),
                    bit_errors=int(parts[3]),
                    ber=float(parts[4]),
                    frames=int(parts[5]),
                    frame_errors=int(parts[6]),
                )
            )
    return records


def snr_at_ber(records, detector: str, target: float):
    """SNR where the detector's curve crosses the target BER.

    Interpolates snr against log10(ber) between the bracketing points.
    Zero-error points cannot be placed on the log scale and act as
    "below target".  Returns None when the curve never crosses.
    """
    pts = sorted(
        ((r.snr_db, r.ber) for r in records if r.detector == detector),
        key=lambda p: p[0],
    )
    if not pts or pts[0][1] <= target:
        return None  # empty, or already below target at the lowest point
    logt = math.log10(target)
    prev = None
    for snr, ber in pts:
        if prev is not None:
            psnr, pber = prev
            if pber > target and ber <= target:
                if ber <= 0.0:
                    return float(snr)
                l1, l2 = math.log10(pber), math.log10(ber)
                frac = (logt - l1) / (l2 - l1)
                return float(psnr + frac * (snr - psnr))
        prev = (snr, ber)
    return None


def gap_db(records, detector_a: str, detector_b: str, target: float):
    """SNR penalty of detector_a relative to detector_b at the target BER."""
    a = snr_at_ber(records, detector_a, target)
    b = snr_at_ber(records, detector_b, target)
    if a is None or b is None:
        return None
    return a - b
