"""Keep-M hard-threshold wavelet compression and its distortion score.

The compression ratio fixes how many transform coefficients survive
(``M = floor(total / ratio)``); everything else is zeroed and the signal
is rebuilt from the survivors.  Distortion is scored as the percent
root-mean-square difference (PRD) against the original samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .wavelets import (
    DwtCoefficients,
    FilterPair,
    Signal,
    as_samples,
    dwt_forward,
    dwt_inverse,
    resolve_wavelet,
    select_scales,
)

__all__ = [
    "CompressionConfig",
    "CompressionResult",
    "keep_largest",
    "prd",
    "compress",
]

#: Default depth-selection target: the midpoint of the 4-6 cycles-per-minute
#: band of the canine gastric slow wave, in Hz.
DEFAULT_TARGET_FREQUENCY_HZ = 5.0 / 60.0


@dataclass(frozen=True)
class CompressionConfig:
    """Settings for one compression run.

    ``levels`` may be an explicit depth or ``"auto"``, which picks the
    depth whose coarsest band lies nearest ``target_frequency_hz``.
    """

    wavelet: object = "daubechies-3"
    cr: float = 3.0
    levels: object = "auto"
    target_frequency_hz: float = DEFAULT_TARGET_FREQUENCY_HZ

    def __post_init__(self):
        if not self.cr >= 1.0:
            raise ValueError("compression ratio must be at least 1")
        if isinstance(self.levels, str):
            if self.levels != "auto":
                raise ValueError(f"levels must be an integer or 'auto', got {self.levels!r}")
        elif int(self.levels) != self.levels or self.levels < 1:
            raise ValueError("levels must be a positive integer or 'auto'")
        if not self.target_frequency_hz > 0:
            raise ValueError("target frequency must be positive")

    def resolve_levels(self, filters: FilterPair, sample_period_s: float, n_samples: int) -> int:
        if self.levels == "auto":
            chosen = select_scales(filters, sample_period_s, self.target_frequency_hz)
            max_depth = int(np.floor(np.log2(n_samples)))
            return min(chosen, max_depth)
        return int(self.levels)


@dataclass(frozen=True)
class CompressionResult:
    """Outcome of one compression run."""

    reconstruction: Signal
    kept: int
    total_coefficients: int
    prd_percent: float
    kept_indices: np.ndarray
    levels: int
    cr: float


def _keep_order(flat: np.ndarray) -> np.ndarray:
    # Stable sort on descending magnitude: ties at the cutoff go to the
    # smaller flat index, and keep-sets are nested as M grows.
    return np.argsort(-np.abs(flat), kind="stable")


def keep_largest(coeffs: DwtCoefficients, keep: int) -> DwtCoefficients:
    """Zero all but the ``keep`` largest-magnitude coefficients.

    Retained values are copied bit-exactly; magnitude ties at the cutoff
    are resolved toward the smaller flat index (flat order: coarsest
    approximation first, then details coarse to fine).
    """
    total = coeffs.total_count
    if int(keep) != keep or not 1 <= keep <= total:
        raise ValueError(f"keep count must be in 1..{total}, got {keep}")
    flat = coeffs.to_flat()
    kept_idx = _keep_order(flat)[: int(keep)]
    mask = np.zeros(total, dtype=bool)
    mask[kept_idx] = True
    return coeffs.with_flat(np.where(mask, flat, 0.0))


def prd(x, reconstruction) -> float:
    """Percent root-mean-square difference between a signal and a reconstruction.

    ``sqrt(sum((x - rec)**2) / sum(x**2)) * 100``; the reference signal
    must carry nonzero energy.
    """
    ref = as_samples(x)
    rec = as_samples(reconstruction)
    if ref.size != rec.size:
        raise ValueError(f"length mismatch: {ref.size} vs {rec.size}")
    energy = float(np.dot(ref, ref))
    if energy == 0.0:
        raise ValueError("reference signal has zero energy")
    diff = ref - rec
    return float(np.sqrt(np.dot(diff, diff) / energy) * 100.0)


def compress(x, config: CompressionConfig = CompressionConfig()) -> CompressionResult:
    """Compress a signal by keep-M thresholding in the wavelet domain.

    Runs the forward transform, keeps the ``floor(total / cr)`` largest
    coefficients (at least one), reconstructs, and scores the PRD against
    the original samples.  Deterministic for identical inputs.
    """
    signal = x if isinstance(x, Signal) else Signal(x)
    filters = resolve_wavelet(config.wavelet)
    levels = config.resolve_levels(filters, signal.sample_period_s, len(signal))
    coeffs = dwt_forward(signal, filters, levels)
    total = coeffs.total_count
    kept = max(1, int(total // config.cr))
    flat = coeffs.to_flat()
    kept_indices = np.sort(_keep_order(flat)[:kept])
    mask = np.zeros(total, dtype=bool)
    mask[kept_indices] = True
    reconstruction = dwt_inverse(coeffs.with_flat(np.where(mask, flat, 0.0)), filters)
    return CompressionResult(
        reconstruction=reconstruction,
        kept=kept,
        total_coefficients=total,
        prd_percent=prd(signal, reconstruction),
        kept_indices=kept_indices,
        levels=levels,
        cr=float(config.cr),
    )
