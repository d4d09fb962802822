"""Log-scale regression estimator of the memory parameter and the J0 scan."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import EstimationError, InputError, NumericError, RangeError
from .robust import DEFAULT_CR_VARIANT, EstimatorKind, ScaleSpectrum, min_coeffs, scale
from .wavelet import ScalePyramid

TWO_LOG2 = 2.0 * math.log(2.0)


@dataclass(frozen=True)
class RegressionWeights:
    w: np.ndarray
    ell: int

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.size != self.ell + 1:
            raise InputError("weight vector must have ell + 1 entries")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    def constraint_residuals(self) -> tuple[float, float]:
        i = np.arange(self.w.size)
        return float(self.w.sum()), float(TWO_LOG2 * np.dot(i, self.w) - 1.0)


def default_weights(ell: int, D=None) -> RegressionWeights:
    """w = D B (B^T D B)^{-1} b with B = [1, i], b = (0, 1/(2 log 2)).

    ``D`` defaults to diag(2^-i); pass a vector (diagonal) or a matrix to override.
    """
    if int(ell) < 1:
        raise InputError("ell must be >= 1")
    ell = int(ell)
    i = np.arange(ell + 1, dtype=float)
    if D is None:
        D = np.diag(2.0 ** -i)
    else:
        D = np.asarray(D, dtype=float)
        if D.ndim == 1:
            D = np.diag(D)
        if D.shape != (ell + 1, ell + 1):
            raise InputError("D must be (ell+1) x (ell+1)")
    B = np.column_stack([np.ones(ell + 1), i])
    b = np.array([0.0, 1.0 / TWO_LOG2])
    G = B.T @ D @ B
    if abs(np.linalg.det(G)) < 1e-300:
        raise NumericError("singular regression system")
    w = D @ B @ np.linalg.solve(G, b)
    return RegressionWeights(w, ell)


@dataclass(frozen=True)
class MemoryEstimate:
    d_hat: float
    kind: EstimatorKind
    j0: int
    ell: int
    weights: RegressionWeights
    spectrum: ScaleSpectrum
    n: int | None = None
    se: float | None = None
    ci: tuple | None = None
    level: float | None = None
    ci_method: str | None = None
    warnings: tuple = field(default_factory=tuple)

    def with_ci(self, se: float, level: float, method: str, z: float, warnings=()) -> "MemoryEstimate":
        half = z * se
        return replace(self, se=float(se), ci=(self.d_hat - half, self.d_hat + half),
                       level=level, ci_method=method,
                       warnings=tuple(self.warnings) + tuple(warnings))

    def to_dict(self) -> dict:
        return {
            "d_hat": self.d_hat,
            "estimator": self.kind.value,
            "j0": self.j0,
            "ell": self.ell,
            "coarse_scale": self.j0 + self.ell,
            "weights": self.weights.w.tolist(),
            "se": self.se,
            "ci": list(self.ci) if self.ci is not None else None,
            "level": self.level,
            "ci_method": self.ci_method,
            "spectrum": {
                "scales": self.spectrum.scales.tolist(),
                "values": self.spectrum.values.tolist(),
                "counts": self.spectrum.counts.tolist(),
            },
            "warnings": list(self.warnings),
        }


def scale_spectrum(pyr: ScalePyramid, j0: int, ell: int, kind,
                   cr_variant: str = DEFAULT_CR_VARIANT) -> ScaleSpectrum:
    kind = EstimatorKind.parse(kind)
    if j0 < 1 or ell < 0:
        raise InputError("need j0 >= 1 and ell >= 0")
    need = min_coeffs(kind)
    values, counts = [], []
    for j in range(j0, j0 + ell + 1):
        if j > pyr.j_max:
            raise RangeError(
                f"scale {j} is not available (pyramid stops at scale {pyr.j_max})"
            )
        w = pyr[j]
        if w.size < need:
            raise RangeError(
                f"scale {j} has {w.size} coefficients; {kind.value} needs at least {need}"
            )
        values.append(scale(w, kind, cr_variant))
        counts.append(w.size)
    return ScaleSpectrum(j0, np.array(values), np.array(counts), kind)


def regress(spectrum: ScaleSpectrum, weights: RegressionWeights) -> float:
    v = spectrum.values
    bad = np.nonzero(~(v > 0))[0]
    if bad.size:
        j = int(spectrum.j0 + bad[0])
        raise EstimationError(f"scale spectrum is zero at scale {j}; log undefined", scale=j)
    return float(np.dot(weights.w, np.log(v)))


def estimate_d(pyr: ScalePyramid, j0: int, ell: int, kind, weights: RegressionWeights | None = None,
               cr_variant: str = DEFAULT_CR_VARIANT) -> MemoryEstimate:
    """d_hat = sum_i w_i log sigma2_hat(j0 + i)."""
    kind = EstimatorKind.parse(kind)
    if weights is None:
        weights = default_weights(ell)
    spec = scale_spectrum(pyr, j0, ell, kind, cr_variant)
    d_hat = regress(spec, weights)
    return MemoryEstimate(d_hat, kind, j0, ell, weights, spec, n=pyr.n)


def max_coarse_scale(pyr: ScalePyramid, kind) -> int:
    need = min_coeffs(kind)
    top = 0
    for j in pyr.scales():
        if pyr[j].size >= need:
            top = j
    return top


def _nested(inner, outer) -> bool:
    return outer[0] <= inner[0] and inner[1] <= outer[1]


def recommend_j0(estimates) -> int | None:
    """Smallest J0 from which successive CIs are nested, each inside the next coarser one.

    ``estimates`` are ordered by increasing J0 and carry CIs. Nesting of
    consecutive intervals implies every finer CI of the tail lies inside
    every coarser one.
    """
    ests = list(estimates)
    if not ests or any(e.ci is None for e in ests):
        return None
    rec = ests[-1].j0
    for a, b in zip(reversed(ests[:-1]), reversed(ests[1:])):
        if not _nested(a.ci, b.ci):
            break
        rec = a.j0
    return rec


def joint_recommendation(scans) -> int | None:
    """Smallest J0 acceptable to every scan; feasible J0 sets are upward closed."""
    recs = [s.recommended_j0 for s in scans]
    if not recs or any(r is None for r in recs):
        return None
    return max(recs)


@dataclass(frozen=True)
class ScanResult:
    coarse_scale: int
    kind: EstimatorKind
    estimates: tuple
    recommended_j0: int | None

    def to_dict(self) -> dict:
        return {
            "coarse_scale": self.coarse_scale,
            "estimator": self.kind.value,
            "recommended_j0": self.recommended_j0,
            "estimates": [e.to_dict() for e in self.estimates],
        }


def j0_scan(pyr: ScalePyramid, j_max: int, kind, level: float = 0.95, ci: str = "mc",
            cr_variant: str = DEFAULT_CR_VARIANT, **ci_options) -> ScanResult:
    """Estimate d for J0 = 1..j_max-1 with ``j0 + ell = j_max`` and attach CIs.

    The recommended J0 is reported, never applied.
    """
    kind = EstimatorKind.parse(kind)
    top = max_coarse_scale(pyr, kind)
    if j_max > top:
        raise RangeError(
            f"coarse scale {j_max} exceeds the largest feasible scale {top} for {kind.value}"
        )
    if j_max < 2:
        raise RangeError("coarse scale must be >= 2")
    from .asympvar import attach_ci

    # per-scale values do not depend on J0, so compute them once
    full = scale_spectrum(pyr, 1, j_max - 1, kind, cr_variant)
    out = []
    for j0 in range(1, j_max):
        ell = j_max - j0
        part = ScaleSpectrum(j0, full.values[j0 - 1:], full.counts[j0 - 1:], kind)
        weights = default_weights(ell)
        est = MemoryEstimate(regress(part, weights), kind, j0, ell, weights, part, n=pyr.n)
        if ci != "none":
            est = attach_ci(est, pyr, level=level, method=ci, cr_variant=cr_variant, **ci_options)
        out.append(est)
    rec = recommend_j0(out) if ci != "none" else None
    return ScanResult(j_max, kind, tuple(out), rec)
