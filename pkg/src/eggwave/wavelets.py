"""Orthonormal wavelet filters and the pyramid discrete wavelet transform.

Filters are represented by their analysis pair (low-pass ``h``, high-pass
``g``).  Supported filters are the classic short families (Haar,
Daubechies-2/-3, Coiflet-1) and a two-angle parameterization that maps
every point ``(a, b)`` of ``[-pi, pi] x [-pi, pi]`` to a 6-tap orthonormal
filter, so wavelet choice becomes a search over a plane.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SQRT2",
    "FILTER_TOL",
    "HAAR_POINT",
    "DAUBECHIES2_POINT",
    "DAUBECHIES3_POINT",
    "COIFLET1_POINT",
    "Signal",
    "FilterPair",
    "DwtCoefficients",
    "as_samples",
    "quadrature_mirror",
    "named_wavelet",
    "pollen_filter",
    "resolve_wavelet",
    "dwt_forward",
    "dwt_inverse",
    "center_frequency",
    "pseudo_frequency",
    "select_scales",
]

SQRT2 = math.sqrt(2.0)

#: Tolerance for filter admissibility and double-shift orthonormality.
FILTER_TOL = 1e-10

#: Plane coordinates (radians) at which the named filters appear in the
#: two-angle parameterization.  The whole ``a == b`` diagonal yields the
#: Haar filter; the other named filters sit at isolated points.
HAAR_POINT = (math.pi / 2, math.pi / 2)
DAUBECHIES2_POINT = (math.pi / 2, -math.pi / 3)
DAUBECHIES3_POINT = (1.3598037324443641, -0.7821063847427728)
COIFLET1_POINT = (-1.1467652873046936, -0.424031039490202)


@dataclass(frozen=True, eq=False)
class Signal:
    """A uniformly sampled real signal.

    Samples must be finite and non-empty; the default sample period of
    0.1 s matches 10 Hz acquisition.
    """

    samples: np.ndarray
    sample_period_s: float = 0.1

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("signal must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(samples)):
            raise ValueError("signal samples must all be finite")
        if not self.sample_period_s > 0:
            raise ValueError("sample period must be positive")
        samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @property
    def sample_rate_hz(self) -> float:
        return 1.0 / self.sample_period_s

    def __len__(self) -> int:
        return self.samples.size


def as_samples(x) -> np.ndarray:
    """Coerce a :class:`Signal` or array-like to a validated sample vector."""
    if isinstance(x, Signal):
        return x.samples
    return Signal(x).samples


def quadrature_mirror(h: np.ndarray) -> np.ndarray:
    """High-pass mate of a low-pass filter: ``g[n] = (-1)**n * h[L-1-n]``."""
    g = np.asarray(h, dtype=np.float64)[::-1].copy()
    g[1::2] *= -1.0
    return g


@dataclass(frozen=True, eq=False)
class FilterPair:
    """Analysis filter pair of an orthonormal wavelet.

    Construction validates admissibility (``sum(h) == sqrt(2)``),
    double-shift orthonormality and the quadrature-mirror relation, so a
    FilterPair is always safe to hand to the transform.
    """

    h: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=np.float64).copy()
        g = np.asarray(self.g, dtype=np.float64).copy()
        if h.ndim != 1 or h.size not in (2, 4, 6):
            raise ValueError("low-pass filter must have 2, 4, or 6 taps")
        if g.shape != h.shape:
            raise ValueError("high-pass filter must match the low-pass length")
        if abs(h.sum() - SQRT2) > FILTER_TOL:
            raise ValueError("filter not admissible: sum(h) != sqrt(2)")
        if abs(np.dot(h, h) - 1.0) > FILTER_TOL:
            raise ValueError("filter taps are not unit-norm")
        for k in range(1, h.size // 2):
            if abs(np.dot(h[: -2 * k], h[2 * k :])) > FILTER_TOL:
                raise ValueError("filter fails double-shift orthonormality")
        if np.max(np.abs(g - quadrature_mirror(h))) > FILTER_TOL:
            raise ValueError("high-pass filter is not the quadrature mirror of h")
        h.flags.writeable = False
        g.flags.writeable = False
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)

    @classmethod
    def from_lowpass(cls, h) -> "FilterPair":
        h = np.asarray(h, dtype=np.float64)
        return cls(h=h, g=quadrature_mirror(h))

    @property
    def length(self) -> int:
        return self.h.size


# Closed-form tap values keep the orthonormality residuals at machine
# precision (published decimal tables only reach ~5e-12).
_SQRT3 = math.sqrt(3.0)
_SQRT7 = math.sqrt(7.0)
_SQRT10 = math.sqrt(10.0)
_DB3_T = math.sqrt(5.0 + 2.0 * _SQRT10)

_NAMED_LOWPASS = {
    "haar": (1 / SQRT2, 1 / SQRT2),
    "daubechies-2": (
        (1 + _SQRT3) / (4 * SQRT2),
        (3 + _SQRT3) / (4 * SQRT2),
        (3 - _SQRT3) / (4 * SQRT2),
        (1 - _SQRT3) / (4 * SQRT2),
    ),
    "daubechies-3": (
        (1 + _SQRT10 + _DB3_T) / (16 * SQRT2),
        (5 + _SQRT10 + 3 * _DB3_T) / (16 * SQRT2),
        (10 - 2 * _SQRT10 + 2 * _DB3_T) / (16 * SQRT2),
        (10 - 2 * _SQRT10 - 2 * _DB3_T) / (16 * SQRT2),
        (5 + _SQRT10 - 3 * _DB3_T) / (16 * SQRT2),
        (1 + _SQRT10 - _DB3_T) / (16 * SQRT2),
    ),
    "coiflet-1": (
        (_SQRT7 - 3) / (16 * SQRT2),
        (1 - _SQRT7) / (16 * SQRT2),
        (14 - 2 * _SQRT7) / (16 * SQRT2),
        (14 + 2 * _SQRT7) / (16 * SQRT2),
        (5 + _SQRT7) / (16 * SQRT2),
        (1 - _SQRT7) / (16 * SQRT2),
    ),
}

_NAME_ALIASES = {
    "db1": "haar",
    "db2": "daubechies-2",
    "db3": "daubechies-3",
    "coif1": "coiflet-1",
}


def named_wavelet(name: str) -> FilterPair:
    """Return the analysis filters of a named wavelet family.

    Parameters
    ----------
    name : str
        One of ``haar``, ``daubechies-2``, ``daubechies-3``, ``coiflet-1``
        (short aliases ``db1``, ``db2``, ``db3``, ``coif1`` also work).

    Raises
    ------
    ValueError
        If the name is not one of the supported families.
    """
    key = _NAME_ALIASES.get(name.strip().lower(), name.strip().lower())
    try:
        taps = _NAMED_LOWPASS[key]
    except KeyError:
        supported = ", ".join(sorted(_NAMED_LOWPASS))
        raise ValueError(
            f"unknown wavelet {name!r}; supported families: {supported}"
        ) from None
    return FilterPair.from_lowpass(taps)


def pollen_filter(a: float, b: float) -> FilterPair:
    """Build the 6-tap orthonormal filter at plane point ``(a, b)``.

    The map is continuous in ``(a, b)`` and every point of
    ``[-pi, pi] x [-pi, pi]`` satisfies the filter invariants exactly.
    Haar appears on the full diagonal ``a == b`` and, shifted by one or
    two taps, at ``(pi/2, -pi/2)``, ``(pi/2, 0)``, ``(-pi/2, pi/2)`` and
    ``(-pi/2, 0)``.

    Parameters
    ----------
    a, b : float
        Plane coordinates in radians, each within ``[-pi, pi]``.
    """
    if not (-math.pi <= a <= math.pi and -math.pi <= b <= math.pi):
        raise ValueError(f"plane point ({a}, {b}) outside [-pi, pi] x [-pi, pi]")
    ca, sa = math.cos(a), math.sin(a)
    cb, sb = math.cos(b), math.sin(b)
    cab, sab = math.cos(a - b), math.sin(a - b)
    h0 = ((1 + ca + sa) * (1 - cb - sb) + 2 * sb * ca) / (4 * SQRT2)
    h1 = ((1 - ca + sa) * (1 + cb - sb) - 2 * sb * ca) / (4 * SQRT2)
    h2 = (1 + cab + sab) / (2 * SQRT2)
    h3 = (1 + cab - sab) / (2 * SQRT2)
    h4 = 1 / SQRT2 - h0 - h2
    h5 = 1 / SQRT2 - h1 - h3
    return FilterPair.from_lowpass((h0, h1, h2, h3, h4, h5))


def resolve_wavelet(spec) -> FilterPair:
    """Resolve a wavelet specification to analysis filters.

    Accepts a :class:`FilterPair` (returned unchanged), a family name, or
    a plane point ``(a, b)`` in radians.
    """
    if isinstance(spec, FilterPair):
        return spec
    if isinstance(spec, str):
        return named_wavelet(spec)
    try:
        a, b = spec
    except (TypeError, ValueError):
        raise ValueError(f"cannot interpret wavelet spec {spec!r}") from None
    return pollen_filter(float(a), float(b))


@dataclass
class DwtCoefficients:
    """Subband coefficients of a pyramid decomposition.

    ``details[j]`` is the detail vector of level ``j + 1`` (finest first);
    ``approximation`` is the coarsest low-pass band.  ``input_lengths``
    records the signal length entering each level so the inverse can drop
    the padding added at odd-length levels.
    """

    details: list
    approximation: np.ndarray
    input_lengths: tuple
    sample_period_s: float = 0.1

    @property
    def levels(self) -> int:
        return len(self.details)

    @property
    def total_count(self) -> int:
        return self.approximation.size + sum(d.size for d in self.details)

    def band_lengths(self) -> list:
        """Detail lengths fine-to-coarse, then the approximation length."""
        return [d.size for d in self.details] + [self.approximation.size]

    def to_flat(self) -> np.ndarray:
        """Flatten coarse-to-fine: ``a_J0``, then ``d_J0`` ... ``d_1``."""
        return np.concatenate([self.approximation] + self.details[::-1])

    def with_flat(self, flat: np.ndarray) -> "DwtCoefficients":
        """Rebuild a coefficient set from a vector in :meth:`to_flat` order."""
        flat = np.asarray(flat, dtype=np.float64)
        if flat.ndim != 1 or flat.size != self.total_count:
            raise ValueError(
                f"flat vector has {flat.size} entries, expected {self.total_count}"
            )
        approximation = flat[: self.approximation.size].copy()
        details = []
        pos = self.approximation.size
        for d in self.details[::-1]:
            details.append(flat[pos : pos + d.size].copy())
            pos += d.size
        return DwtCoefficients(
            details=details[::-1],
            approximation=approximation,
            input_lengths=self.input_lengths,
            sample_period_s=self.sample_period_s,
        )


def _analysis_step(v: np.ndarray, h: np.ndarray, g: np.ndarray):
    # Odd-length inputs repeat their final sample so decimation by two
    # stays invertible.
    if v.size % 2:
        v = np.append(v, v[-1])
    n = v.size
    starts = np.arange(0, n, 2)
    approx = np.zeros(n // 2)
    detail = np.zeros(n // 2)
    for m in range(h.size):
        vm = v[(starts + m) % n]
        approx += h[m] * vm
        detail += g[m] * vm
    return approx, detail


def _synthesis_step(approx, detail, h, g, out_len):
    n = 2 * approx.size
    out = np.zeros(n)
    starts = np.arange(0, n, 2)
    for m in range(h.size):
        # Indices (2k + m) mod n are distinct for fixed m, so fancy-index
        # accumulation is safe.
        out[(starts + m) % n] += h[m] * approx + g[m] * detail
    return out[:out_len]


def dwt_forward(x, filters: FilterPair, levels: int) -> DwtCoefficients:
    """Decompose a signal with the recursive filter-and-decimate pyramid.

    Each level circularly convolves with ``h`` and ``g`` and keeps every
    second output; odd-length levels are extended by repeating the last
    sample first.  The result is deterministic and never mutates ``x``.

    Parameters
    ----------
    x : Signal or array-like
        Input samples; must hold at least ``2**levels`` of them.
    filters : FilterPair
        Analysis filters of the chosen wavelet.
    levels : int
        Decomposition depth ``>= 1``.
    """
    period = x.sample_period_s if isinstance(x, Signal) else 0.1
    samples = as_samples(x)
    levels = int(levels)
    if levels < 1:
        raise ValueError("decomposition depth must be at least 1")
    if 2 ** levels > samples.size:
        raise ValueError(
            f"depth {levels} too deep for a {samples.size}-sample signal"
        )
    details = []
    lengths = []
    v = samples
    for _ in range(levels):
        lengths.append(v.size)
        v, d = _analysis_step(v, filters.h, filters.g)
        details.append(d)
    return DwtCoefficients(
        details=details,
        approximation=v,
        input_lengths=tuple(lengths),
        sample_period_s=period,
    )


def _check_bookkeeping(coeffs: DwtCoefficients):
    if coeffs.levels < 1 or len(coeffs.input_lengths) != coeffs.levels:
        raise ValueError("coefficient bookkeeping is inconsistent")
    for level, d in enumerate(coeffs.details):
        n_in = coeffs.input_lengths[level]
        expected = (n_in + 1) // 2
        if n_in < 1 or d.size != expected:
            raise ValueError(
                f"level {level + 1} detail length {d.size} does not match "
                f"recorded input length {n_in}"
            )
        if level + 1 < coeffs.levels and coeffs.input_lengths[level + 1] != expected:
            raise ValueError("recorded level lengths do not chain")
    if coeffs.approximation.size != coeffs.details[-1].size:
        raise ValueError("approximation length does not match the coarsest detail")


def dwt_inverse(coeffs: DwtCoefficients, filters: FilterPair) -> Signal:
    """Reconstruct a signal from (possibly thresholded) pyramid coefficients.

    With untouched coefficients the reconstruction matches the original
    signal sample for sample (perfect reconstruction).
    """
    _check_bookkeeping(coeffs)
    v = coeffs.approximation
    for detail, n_true in zip(coeffs.details[::-1], coeffs.input_lengths[::-1]):
        v = _synthesis_step(v, detail, filters.h, filters.g, n_true)
    return Signal(v, sample_period_s=coeffs.sample_period_s)


#: Cascade refinements used to approximate the wavelet function.
CASCADE_ITERATIONS = 10


def center_frequency(filters: FilterPair, iterations: int = CASCADE_ITERATIONS) -> float:
    """Spectral peak of the wavelet, in cycles per sample.

    The wavelet function is approximated by ``iterations`` cascade
    refinements (dyadic grid of spacing ``2**-iterations``) and the DFT
    magnitude peak over positive frequencies is returned, read on the raw
    DFT bin grid whose spacing ``1/(L - 1)`` is set by the filter support.
    """
    if iterations < 1:
        raise ValueError("cascade needs at least one refinement")
    return _center_frequency_cached(filters.h.tobytes(), int(iterations))


@functools.lru_cache(maxsize=512)
def _center_frequency_cached(h_bytes: bytes, iterations: int) -> float:
    h = np.frombuffer(h_bytes, dtype=np.float64)
    seq = SQRT2 * quadrature_mirror(h)
    kernel = SQRT2 * h
    for _ in range(iterations - 1):
        up = np.zeros(2 * seq.size - 1)
        up[::2] = seq
        seq = np.convolve(up, kernel)
    magnitude = np.abs(np.fft.rfft(seq))
    peak = int(np.argmax(magnitude[1:])) + 1  # skip the DC bin
    duration = seq.size * 2.0 ** -iterations
    return peak / duration


def pseudo_frequency(filters: FilterPair, level: int, sample_period_s: float) -> float:
    """Characteristic frequency (Hz) of a decomposition level.

    The wavelet's spectral peak mapped to the dyadic band of the level:
    ``center_frequency(filters) / (2**level * sample_period_s)``.
    """
    if int(level) != level or level < 1:
        raise ValueError("scale index must be a positive integer")
    if not sample_period_s > 0:
        raise ValueError("sample period must be positive")
    return center_frequency(filters) / (2.0 ** level * sample_period_s)


#: Deepest level considered when choosing a decomposition depth.
MAX_AUTO_LEVELS = 32


def select_scales(
    filters: FilterPair, sample_period_s: float, target_frequency_hz: float
) -> int:
    """Decomposition depth whose coarsest band sits nearest a target frequency.

    Scans levels ``1..32`` for the minimizer of
    ``|pseudo_frequency(level) - target_frequency_hz|``; ties resolve to
    the shallower level.
    """
    if not target_frequency_hz > 0:
        raise ValueError("target frequency must be positive")
    best_level = 1
    best_distance = math.inf
    for level in range(1, MAX_AUTO_LEVELS + 1):
        distance = abs(
            pseudo_frequency(filters, level, sample_period_s) - target_frequency_hz
        )
        if distance < best_distance:
            best_level, best_distance = level, distance
    return best_level
