"""Scale estimators (CL, MAD, CR), their influence functions and Hermite coefficients."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import InputError, NumericError

# Fisher-consistency constants at full precision (1.4826 and 2.21914 rounded)
MAD_CONSTANT = 1.0 / float(special.ndtri(0.75))
CR_CONSTANT = 1.0 / (math.sqrt(2.0) * float(special.ndtri(5.0 / 8.0)))

MIN_CR_LENGTH = 5


class EstimatorKind(str, enum.Enum):
    CL = "CL"
    MAD = "MAD"
    CR = "CR"

    @classmethod
    def parse(cls, value) -> "EstimatorKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise InputError(f"unknown estimator {value!r}; expected one of cl, mad, cr") from None


ALL_KINDS = (EstimatorKind.CL, EstimatorKind.MAD, EstimatorKind.CR)


@dataclass(frozen=True)
class ScaleSpectrum:
    """Per-scale estimates for scales ``j0, j0+1, ...``."""

    j0: int
    values: np.ndarray
    counts: np.ndarray
    kind: EstimatorKind

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        c = np.asarray(self.counts, dtype=int)
        if v.shape != c.shape or v.ndim != 1:
            raise InputError("values and counts must be 1-d arrays of equal length")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise NumericError("scale spectrum values must be finite and non-negative")
        if np.any(c <= 0):
            raise InputError("coefficient counts must be positive")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "counts", c)

    @property
    def scales(self) -> np.ndarray:
        return np.arange(self.j0, self.j0 + self.values.size)


def _vector(w) -> np.ndarray:
    w = np.asarray(w, dtype=float).ravel()
    if w.size == 0:
        raise InputError("empty coefficient vector")
    return w


def scale_cl(w) -> float:
    """Mean of squares; wavelet coefficients are centred, so no mean is removed."""
    w = _vector(w)
    return float(np.mean(w * w))


def scale_mad(w) -> float:
    """Squared MAD about zero: ``(m(Phi) * med |w_i|)^2``."""
    w = _vector(w)
    return float((MAD_CONSTANT * np.median(np.abs(w))) ** 2)


def cr_rank(n: int) -> int:
    """Rank ``floor(n^2/4)`` among the ``n^2`` ordered-pair distances (1-based)."""
    return (n * n) // 4


def _qn_order_stat_naive(w: np.ndarray, variant: str) -> float:
    n = w.size
    diffs = np.abs(w[:, None] - w[None, :])
    if variant == "all-pairs":
        k = cr_rank(n)
        flat = diffs.ravel()
    else:
        h = n // 2 + 1
        k = h * (h - 1) // 2
        flat = diffs[np.triu_indices(n, 1)]
    return float(np.partition(flat, k - 1)[k - 1])


def _row_count(y: np.ndarray, rows: np.ndarray, pivot: float, strict: bool) -> np.ndarray:
    """For each row i, count j > i with y[j] - y[i] < pivot (or <= pivot).

    ``searchsorted`` gives a starting point; the boundary is then settled on
    the computed differences themselves, which are monotone in j, so the
    comparison matches the brute-force path bit for bit.
    """
    n = y.size
    yi = y[rows]
    side = "left" if strict else "right"
    pos = np.clip(np.searchsorted(y, yi + pivot, side=side), rows + 1, n)

    def inside(k):
        d = y[np.minimum(k, n - 1)] - yi
        return (d < pivot) if strict else (d <= pivot)

    while True:
        back = (pos > rows + 1) & ~inside(pos - 1)
        if not back.any():
            break
        pos = np.where(back, pos - 1, pos)
    while True:
        fwd = (pos < n) & inside(pos)
        if not fwd.any():
            break
        pos = np.where(fwd, pos + 1, pos)
    return pos - (rows + 1)


def _select_pairwise(y: np.ndarray, r: int) -> float:
    """r-th smallest (1-based) of y[j] - y[i], i < j, for sorted ``y``.

    Johnson-Mitra style selection in the implicitly sorted difference
    matrix, pivoting on the weighted median of row medians.
    """
    n = y.size
    rows = np.arange(n - 1)
    left = rows + 1
    right = np.full(n - 1, n - 1)
    while True:
        width = right - left + 1
        active = width > 0
        remaining = int(width[active].sum())
        if remaining <= max(n, 64):
            below = int((left - (rows + 1)).sum())
            ai = np.nonzero(active)[0]
            counts = width[ai]
            start = np.repeat(left[ai] - np.cumsum(counts) + counts, counts)
            cols = start + np.arange(int(counts.sum()))
            cand = y[cols] - y[np.repeat(ai, counts)]
            k = r - below
            return float(np.partition(cand, k - 1)[k - 1])
        ai = np.nonzero(active)[0]
        mids = (left[ai] + right[ai]) // 2
        med_vals = y[mids] - y[ai]
        order = np.argsort(med_vals, kind="stable")
        cw = np.cumsum(width[ai][order])
        pivot = float(med_vals[order][np.searchsorted(cw, cw[-1] / 2.0)])
        p = _row_count(y, rows, pivot, strict=True)
        q = _row_count(y, rows, pivot, strict=False)
        if r <= p.sum():
            right = np.minimum(right, rows + p)
        elif r > q.sum():
            left = np.maximum(left, rows + q + 1)
        else:
            return pivot


def _qn_order_stat_fast(w: np.ndarray, variant: str) -> float:
    n = w.size
    y = np.sort(w)
    if variant == "all-pairs":
        k = cr_rank(n)
        # n diagonal zeros come first, then every unordered distance twice
        if k <= n:
            return 0.0
        r = (k - n + 1) // 2
    else:
        h = n // 2 + 1
        r = h * (h - 1) // 2
    return _select_pairwise(y, r)


CR_VARIANTS = ("standard", "all-pairs")
DEFAULT_CR_VARIANT = "standard"


def scale_cr(w, *, method: str = "fast", variant: str = DEFAULT_CR_VARIANT) -> float:
    """Squared Croux-Rousseeuw scale: ``(c(Phi) * d_(k))^2``.

    ``variant="standard"`` (default) is the usual Qn over pairs ``i < j``
    with ``k = C(floor(n/2)+1, 2)``; ``variant="all-pairs"`` ranks all ``n^2``
    ordered pairs including the diagonal with ``k = floor(n^2/4)``, which
    carries a downward small-sample bias of order 1/n.
    ``method`` selects the O(n log n) selection or the brute-force path.
    """
    w = _vector(w)
    if w.size < MIN_CR_LENGTH:
        raise InputError(
            f"CR scale needs at least {MIN_CR_LENGTH} coefficients, got {w.size}"
        )
    if variant not in CR_VARIANTS:
        raise InputError(f"unknown CR variant {variant!r}")
    if method == "fast":
        stat = _qn_order_stat_fast(w, variant)
    elif method == "naive":
        stat = _qn_order_stat_naive(w, variant)
    else:
        raise InputError(f"unknown CR method {method!r}")
    return float((CR_CONSTANT * stat) ** 2)


def scale(w, kind, cr_variant: str = DEFAULT_CR_VARIANT) -> float:
    kind = EstimatorKind.parse(kind)
    if kind is EstimatorKind.CL:
        return scale_cl(w)
    if kind is EstimatorKind.MAD:
        return scale_mad(w)
    return scale_cr(w, variant=cr_variant)


def min_coeffs(kind) -> int:
    return MIN_CR_LENGTH if EstimatorKind.parse(kind) is EstimatorKind.CR else 1


# --- influence functions -------------------------------------------------

_Q75 = 1.0 / MAD_CONSTANT
_CR_SHIFT = 1.0 / CR_CONSTANT
# int phi(y) phi(y + a) dy is the N(0, 2) density at a
_CR_DENOM = math.exp(-_CR_SHIFT ** 2 / 4.0) / math.sqrt(4.0 * math.pi)


def influence(x, kind):
    """Influence function IF(x, kind, Phi) of the scale (not squared scale) functional."""
    kind = EstimatorKind.parse(kind)
    x = np.asarray(x, dtype=float)
    if kind is EstimatorKind.CL:
        out = 0.5 * (x * x - 1.0)
    elif kind is EstimatorKind.MAD:
        upper = (x <= _Q75).astype(float) - 0.75
        lower = (x <= -_Q75).astype(float) - 0.25
        phi_q = math.exp(-0.5 * _Q75 ** 2) / math.sqrt(2.0 * math.pi)
        out = -MAD_CONSTANT * (upper - lower) / (2.0 * phi_q)
    else:
        num = 0.25 - special.ndtr(x + _CR_SHIFT) + special.ndtr(x - _CR_SHIFT)
        out = CR_CONSTANT * num / _CR_DENOM
    return float(out) if out.ndim == 0 else out


_BREAKPOINTS = {
    EstimatorKind.CL: (),
    EstimatorKind.MAD: (-_Q75, _Q75),
    EstimatorKind.CR: (),
}
_HALF_WIDTH = 16.0


def _gl_rule(kind: EstimatorKind, chunks_per_unit: int, order: int = 24):
    """Composite Gauss-Legendre nodes and N(0,1)-weighted weights on [-16, 16],
    split at the discontinuities of IF."""
    edges = [-_HALF_WIDTH, *_BREAKPOINTS[kind], _HALF_WIDTH]
    t, wt = np.polynomial.legendre.leggauss(order)
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        m = max(1, int(math.ceil((b - a) * chunks_per_unit)))
        cut = np.linspace(a, b, m + 1)
        half = 0.5 * np.diff(cut)
        mid = 0.5 * (cut[:-1] + cut[1:])
        xs.append((mid[:, None] + half[:, None] * t[None, :]).ravel())
        ws.append((half[:, None] * wt[None, :]).ravel())
    x = np.concatenate(xs)
    w = np.concatenate(ws) * np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return x, w


def _normalized_hermite(x: np.ndarray, p_max: int) -> np.ndarray:
    """Rows h_p(x) = He_p(x) / sqrt(p!) for p = 0..p_max."""
    out = np.empty((p_max + 1, x.size))
    out[0] = 1.0
    if p_max >= 1:
        out[1] = x
    for p in range(1, p_max):
        out[p + 1] = (x * out[p] - math.sqrt(p) * out[p - 1]) / math.sqrt(p + 1)
    return out


def _expectations(kind: EstimatorKind, p_max: int, chunks_per_unit: int):
    x, w = _gl_rule(kind, chunks_per_unit)
    f = influence(x, kind)
    second = float(np.sum(w * f * f))
    proj = _normalized_hermite(x, p_max) @ (w * f)
    return second, proj


QUAD_TOL = 1e-8


def _cl_table(p_max: int):
    # IF_CL = He_2 / 2, so only h_2 = 1/sqrt(2) is nonzero
    proj = np.zeros(p_max + 1)
    if p_max >= 2:
        proj[2] = 1.0 / math.sqrt(2.0)
    return 0.5, proj


@lru_cache(maxsize=None)
def _hermite_table(kind: EstimatorKind, p_max: int):
    if kind is EstimatorKind.CL:
        second, proj = _cl_table(p_max)
        proj.setflags(write=False)
        return second, proj
    coarse = _expectations(kind, p_max, 2)
    fine = _expectations(kind, p_max, 4)
    err = max(abs(coarse[0] - fine[0]), float(np.max(np.abs(coarse[1] - fine[1]))))
    if err > QUAD_TOL:
        raise NumericError(f"Hermite quadrature for {kind.value} not converged (diff {err:.2e})")
    second, proj = fine
    proj = proj.copy()
    proj.setflags(write=False)
    return second, proj


def if_second_moment(kind) -> float:
    """E[IF(Z)^2] for Z ~ N(0, 1)."""
    return _hermite_table(EstimatorKind.parse(kind), 2)[0]


def hermite_projections(kind, p_max: int) -> np.ndarray:
    """E[IF(Z) He_p(Z)] / sqrt(p!) for p = 0..p_max, so that sum of squares -> E[IF^2]."""
    if p_max < 0:
        raise InputError("p_max must be >= 0")
    return _hermite_table(EstimatorKind.parse(kind), int(p_max))[1]


def hermite_coeff(kind, p: int) -> float:
    """c_p = E[IF(Z) He_p(Z)] with probabilists' Hermite polynomials."""
    if p < 0:
        raise InputError("Hermite index must be >= 0")
    h = hermite_projections(kind, max(int(p), 2))[p]
    return float(h * math.sqrt(math.factorial(p)))


def efficiency_bound(kind) -> float:
    """Lower bound 0.5 / E[IF^2] on the per-scale relative efficiency against CL."""
    return 0.5 / if_second_moment(kind)
