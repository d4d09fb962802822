"""Exact Gaussian ARFIMA(0, d, 0) simulation and additive outlier injection."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, InputError, NumericError
from .series import TimeSeries, as_array

HALF_INTEGER_GUARD = 1e-6
MASK64 = (1 << 64) - 1


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by ``(seed, stream)``."""
    ss = np.random.SeedSequence([int(seed) & MASK64, int(stream)])
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(master: int, replication: int) -> int:
    return (int(master) ^ int(replication)) & MASK64


def split_memory(d: float) -> tuple[float, int]:
    """Write ``d = d0 + m`` with ``d0`` in (-1/2, 1/2] and integer ``m``."""
    if not math.isfinite(d):
        raise DomainError("memory parameter must be finite")
    m = math.ceil(d - 0.5)
    d0 = d - m
    if abs(d0) >= 0.5 - HALF_INTEGER_GUARD:
        raise DomainError(
            f"d={d:g} is (nearly) a half-integer; the stationary part d0={d0:g} "
            "has a non-summable covariance and cannot be simulated exactly"
        )
    return d0, m


def arfima_autocov(d: float, k, sigma2: float = 1.0):
    """Autocovariance of ARFIMA(0, d, 0), |d| < 1/2.

    gamma(k) = sigma2 * G(1-2d) G(k+d) / (G(d) G(1-d) G(k+1-d)),
    written as gamma(0) * G(k+d) G(1-d) / (G(d) G(k+1-d)) and evaluated in
    log-gamma form for large lags.
    """
    if not abs(d) < 0.5:
        raise DomainError(f"stationary ARFIMA needs |d| < 1/2, got d={d:g}")
    k = np.asarray(k)
    if np.any(k < 0):
        raise InputError("lags must be non-negative")
    kf = k.astype(float)
    gamma0 = sigma2 * math.exp(special.gammaln(1 - 2 * d) - 2 * special.gammaln(1 - d))
    if d == 0.0:
        out = np.where(k == 0, gamma0, 0.0)
    else:
        # k+1-d and 1-d are positive; G(d) and G(k+d) carry the signs
        logr = (special.gammaln(kf + d) - special.gammaln(kf + 1 - d)
                + special.gammaln(1 - d) - special.gammaln(d))
        sign = special.gammasgn(kf + d) * special.gammasgn(d)
        out = gamma0 * sign * np.exp(logr)
    return float(out) if out.ndim == 0 else out


def ma_coefficients(d: float, count: int) -> np.ndarray:
    """psi_j = G(j+d) / (G(j+1) G(d)) for j = 0..count-1 by recursion."""
    psi = np.empty(count)
    psi[0] = 1.0
    j = np.arange(1, count)
    psi[1:] = np.cumprod((j - 1 + d) / j)
    return psi


def _circulant_sqrt_eigs(d: float, n: int, sigma2: float, max_doublings: int = 1):
    m = 1 << max(1, (n - 1).bit_length())
    for _ in range(max_doublings + 1):
        g = arfima_autocov(d, np.arange(m + 1), sigma2)
        row = np.concatenate([g, g[-2:0:-1]])
        lam = np.fft.fft(row).real
        if lam.min() >= -1e-10 * lam.max():
            return np.sqrt(np.clip(lam, 0.0, None) / row.size)
        m *= 2
    raise NumericError(f"circulant embedding is not non-negative for d={d:g}, n={n}")


def stationary_sample(d0: float, n: int, rng: np.random.Generator, sigma2: float = 1.0) -> np.ndarray:
    """Davies-Harte draw of length ``n`` with exact ARFIMA(0, d0, 0) covariance."""
    sq = _circulant_sqrt_eigs(d0, n, sigma2)
    size = sq.size
    z = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return np.fft.fft(sq * z).real[:n]


@dataclass(frozen=True)
class ArfimaConfig:
    d: float
    n: int
    seed: int = 0
    innovation_sd: float = 1.0

    def __post_init__(self):
        if int(self.n) < 2:
            raise InputError("sample length must be >= 2")
        if not self.innovation_sd > 0:
            raise InputError("innovation_sd must be positive")
        split_memory(self.d)


def generate(cfg: ArfimaConfig, rng: np.random.Generator | None = None) -> TimeSeries:
    """Gaussian ARFIMA(0, d, 0) sample of length ``cfg.n``.

    The stationary part is simulated exactly; integer ``m > 0`` is realized by
    ``m`` cumulative sums, ``m < 0`` by differencing a longer core.
    """
    d0, m = split_memory(cfg.d)
    if rng is None:
        rng = make_rng(cfg.seed)
    n = int(cfg.n)
    core_len = n + max(-m, 0)
    x = stationary_sample(d0, core_len, rng, cfg.innovation_sd ** 2)
    if m > 0:
        for _ in range(m):
            x = np.cumsum(x)
    elif m < 0:
        x = np.diff(x, n=-m)
    meta = {"model": "ARFIMA(0,d,0)", "d": cfg.d, "n": n, "seed": cfg.seed,
            "innovation_sd": cfg.innovation_sd}
    return TimeSeries(x, meta)


@dataclass(frozen=True)
class OutlierSpec:
    fraction: float = 0.01
    magnitude_multiplier: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.fraction <= 1.0:
            raise InputError("outlier fraction must lie in [0, 1]")


def inject_outliers(x, spec: OutlierSpec, rng: np.random.Generator | None = None):
    """Add ``multiplier * sd(x)`` to ``floor(fraction * n)`` distinct random indices.

    Returns the contaminated series and the sorted index array.
    """
    v = as_array(x)
    n = v.size
    count = int(math.floor(spec.fraction * n + 1e-9))
    if rng is None:
        rng = make_rng(spec.seed, stream=1)
    idx = np.sort(rng.choice(n, size=count, replace=False)) if count else np.zeros(0, dtype=int)
    out = v.copy()
    if count and spec.magnitude_multiplier != 0.0:
        out[idx] += spec.magnitude_multiplier * v.std(ddof=1)
    meta = dict(x.meta) if isinstance(x, TimeSeries) else {}
    meta["outliers"] = {"fraction": spec.fraction, "multiplier": spec.magnitude_multiplier,
                        "count": count}
    return TimeSeries(out, meta), idx
