"""Daubechies filters and the boundary-free pyramidal wavelet transform.

Coefficients are computed with Mallat's algorithm, the samples ``x_k`` being
taken as the scale-0 approximation coefficients. Only the ``n_j`` detail
coefficients whose support lies fully inside the sample are kept at scale
``j`` (no padding, no extension).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from .errors import ConfigurationError, InputError
from .series import as_array

MAX_VANISHING_MOMENTS = 10
QMF_TOL = 1e-12


@dataclass(frozen=True)
class WaveletSpec:
    """Daubechies wavelet descriptor.

    ``decay_alpha`` is a lower bound on the Fourier decay exponent
    (``sup |psi_hat(xi)| (1+|xi|)^alpha < inf``), obtained from the
    classical bound ``M - log2 sup|L|`` on the Daubechies factor ``L``.
    """

    vanishing_moments: int
    lowpass_taps: np.ndarray = field(repr=False)
    support_length: int
    decay_alpha: float

    @property
    def highpass_taps(self) -> np.ndarray:
        h = self.lowpass_taps
        k = np.arange(h.size)
        return (-1.0) ** k * h[::-1]

    @property
    def filter_length(self) -> int:
        return self.lowpass_taps.size

    @property
    def name(self) -> str:
        return f"db{self.vanishing_moments}"


def _daubechies_taps(M: int) -> np.ndarray:
    """Extremal-phase taps by spectral factorization, at 50 digits."""
    with mpmath.workdps(50):
        # |m0|^2 = cos^{2M}(w/2) P(sin^2(w/2)),  P(y) = sum_k C(M-1+k, k) y^k
        zeros = [mpmath.mpf(-1)] * M
        if M > 1:
            p_coeffs = [mpmath.binomial(M - 1 + k, k) for k in range(M)]
            y_roots = mpmath.polyroots(p_coeffs[::-1], maxsteps=200, extraprec=200)
            for y in y_roots:
                # y = (2 - z - 1/z) / 4  ->  z^2 - (2 - 4y) z + 1 = 0
                b = 2 - 4 * y
                disc = mpmath.sqrt(b * b - 4)
                z1, z2 = (b + disc) / 2, (b - disc) / 2
                zeros.append(z1 if abs(z1) < 1 else z2)
        poly = [mpmath.mpc(1)]
        for z in zeros:
            nxt = [mpmath.mpc(0)] * (len(poly) + 1)
            for i, c in enumerate(poly):
                nxt[i] += c
                nxt[i + 1] -= c * z
            poly = nxt
        total = sum(poly)
        scale = mpmath.sqrt(2) / total
        taps = [mpmath.re(c * scale) for c in poly]
        return np.array([float(t) for t in taps])


def _check_qmf(h: np.ndarray, tol: float = QMF_TOL) -> None:
    L = h.size
    if abs(h.sum() - math.sqrt(2.0)) > tol:
        raise ConfigurationError("lowpass taps do not sum to sqrt(2)")
    for m in range(0, L // 2):
        s = float(np.dot(h[: L - 2 * m], h[2 * m:]))
        target = 1.0 if m == 0 else 0.0
        if abs(s - target) > tol:
            raise ConfigurationError(f"QMF orthonormality violated at shift {2 * m}: {s!r}")


@lru_cache(maxsize=None)
def daubechies_spec(M: int) -> WaveletSpec:
    """Daubechies wavelet with ``M`` vanishing moments (``M = 1`` is Haar)."""
    if not isinstance(M, (int, np.integer)) or not 1 <= M <= MAX_VANISHING_MOMENTS:
        raise ConfigurationError(
            f"unsupported number of vanishing moments {M!r}; expected 1..{MAX_VANISHING_MOMENTS}"
        )
    M = int(M)
    h = _daubechies_taps(M)
    _check_qmf(h)
    h.setflags(write=False)
    # sup |L(w)|^2 = P(1) = C(2M-1, M-1)
    alpha = M - 0.5 * math.log2(math.comb(2 * M - 1, M - 1))
    return WaveletSpec(M, h, 2 * M - 1, alpha)


def check_memory_range(d: float, spec: WaveletSpec, beta: float = 1.0) -> list[str]:
    """Return warnings when ``d`` violates ``(1+beta)/2 - alpha < d <= M``.

    ``decay_alpha`` is only a lower bound, so values below the lower limit
    are flagged rather than rejected.
    """
    msgs = []
    if d > spec.vanishing_moments:
        msgs.append(
            f"d={d:g} exceeds the number of vanishing moments M={spec.vanishing_moments}"
        )
    lower = (1.0 + beta) / 2.0 - spec.decay_alpha
    if d <= lower:
        msgs.append(
            f"d={d:g} is at or below (1+beta)/2 - alpha = {lower:.4f} "
            f"(alpha={spec.decay_alpha:.4f} is a conservative bound)"
        )
    return msgs


def num_coeffs(n: int, j: int, T: int) -> int:
    """Number of boundary-free coefficients at scale ``j``: floor(2^-j (n-T+1) - T + 1), clamped at 0."""
    # exact integer arithmetic: floor((n - T + 1) / 2^j) - T + 1
    return max((n - T + 1) // (1 << j) - T + 1, 0)


@dataclass(frozen=True)
class ScalePyramid:
    """Detail coefficients per scale; ``coeffs[j - 1]`` holds scale ``j``."""

    coeffs: tuple
    n: int
    spec: WaveletSpec

    @property
    def j_max(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, j: int) -> np.ndarray:
        if not 1 <= j <= len(self.coeffs):
            raise IndexError(j)
        return self.coeffs[j - 1]

    def counts(self) -> list[int]:
        return [c.size for c in self.coeffs]

    def scales(self) -> range:
        return range(1, len(self.coeffs) + 1)


def default_j_max(n: int, T: int) -> int:
    """Largest scale carrying at least two coefficients (0 if none)."""
    j = 0
    while num_coeffs(n, j + 1, T) >= 2:
        j += 1
    return j


def decompose(x, spec: WaveletSpec, j_max: int | None = None) -> ScalePyramid:
    """Pyramidal DWT keeping the first ``n_j`` boundary-free details per scale.

    Scales with ``n_j = 0`` are omitted, so ``j_max`` is clipped to the last
    scale carrying at least one coefficient.
    """
    x = as_array(x)
    n = x.size
    T = spec.support_length
    L = spec.filter_length
    if n < L or num_coeffs(n, 1, T) < 1:
        raise InputError(
            f"series of length {n} is too short for {spec.name} (need n_1 >= 1)"
        )
    if j_max is None:
        j_max = max(default_j_max(n, T), 1)
    if j_max < 1:
        raise InputError("j_max must be >= 1")
    lo_rev = spec.lowpass_taps[::-1]
    hi_rev = spec.highpass_taps[::-1]
    approx = x
    details = []
    for j in range(1, j_max + 1):
        nj = num_coeffs(n, j, T)
        if nj < 1:
            break
        # correlation with the taps, valid part only, then decimation
        det = np.convolve(approx, hi_rev, mode="valid")[::2]
        approx = np.convolve(approx, lo_rev, mode="valid")[::2]
        assert det.size >= nj
        d = det[:nj].copy()
        d.setflags(write=False)
        details.append(d)
    return ScalePyramid(tuple(details), n, spec)


def vanishing_moment_residual(spec: WaveletSpec, degree: int) -> float:
    """max |sum_k k^m g_k| over m <= degree, a cheap annihilation diagnostic."""
    g = spec.highpass_taps
    k = np.arange(g.size, dtype=float)
    return max(abs(float(np.sum(k ** m * g))) for m in range(degree + 1))

