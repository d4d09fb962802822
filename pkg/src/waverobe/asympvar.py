"""Asymptotic covariance of the log scale spectrum and Monte-Carlo variance.

The limiting covariance of ``(log sigma2_hat_{J0+i})_i`` is written with the
normalized cross-scale correlations ``rho_{u,r}(tau) = 2^{du} a_{u,r}(tau) / K``,
where ``a_{u,r}(tau)`` are the Fourier coefficients of the cross-spectral
density ``D_u`` of the generalized fractional Brownian motion and
``K = int |xi|^{-2d} |psi_hat(xi)|^2 dxi``::

    V_ij = 4 * 2^(i ^ j) * sum_{p >= 2} c_p^2 / p! * sum_{tau, r} rho^p

The single term with ``rho = 1`` (``u = 0``, ``tau = 0``) is summed in closed
form as ``E[IF^2]``; the remaining terms are truncated at ``p_max`` with a
reported bound on the neglected part.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .errors import DomainError, InputError, NumericError
from .estimator import MemoryEstimate, default_weights
from .robust import DEFAULT_CR_VARIANT, EstimatorKind, hermite_projections, if_second_moment
from .wavelet import ScalePyramid, WaveletSpec, check_memory_range, daubechies_spec

DEFAULT_GRID = 2048
DEFAULT_L_MAX = 64
DEFAULT_P_MAX = 20
DEFAULT_TAU_MAX = 512
DEFAULT_MC_REPS = 200
MIN_MC_REPS = 50
# plug-in d values closer than this to d0 = +-1/2 are pulled back before simulation
PLUGIN_HALF_MARGIN = 1e-3
CASCADE_EXTRA_DEPTH = 30
K_GL_ORDER = 16
K_MAX_DYADIC = 12
K_TOL = 1e-9
K_MAX_RATIO = 0.9
# residual tolerances: relative for the p and tau series, absolute on rho for l
RESIDUAL_TOLS = {"p_series": 1e-6, "tau_series": 1e-6, "l_series": 1e-3}


# --- Fourier transform of the wavelet --------------------------------------

@lru_cache(maxsize=None)
def _residual_factor(M: int) -> np.ndarray:
    """Ascending coefficients of Q with sum_l h_l z^l / sqrt(2) = ((1+z)/2)^M Q(z)."""
    spec = daubechies_spec(M)
    num = spec.lowpass_taps / math.sqrt(2.0)
    den = np.array([1.0])
    for _ in range(M):
        den = np.convolve(den, [0.5, 0.5])
    q, rem = np.polydiv(num[::-1], den[::-1])
    if np.max(np.abs(rem)) > 1e-12:
        raise NumericError("lowpass filter does not factor through (1+z)^M")
    q = q[::-1].copy()
    q.setflags(write=False)
    return q


def _m0(omega: np.ndarray, M: int) -> np.ndarray:
    q = _residual_factor(M)
    half = np.exp(-0.5j * omega) * np.cos(0.5 * omega)
    return half ** M * np.polynomial.polynomial.polyval(np.exp(-1j * omega), q)


def _m1(omega: np.ndarray, M: int) -> np.ndarray:
    # g_k = (-1)^k h_{L-1-k}  gives  m1(w) = -e^{-i(L-1)w} m0(pi - w);
    # cos((pi - w)/2) is written as sin(w/2) to keep the zero at w = 0 exact
    q = _residual_factor(M)
    v = math.pi - omega
    half = np.exp(-0.5j * v) * np.sin(0.5 * omega)
    L = 2 * M
    return -np.exp(-1j * (L - 1) * omega) * half ** M * np.polynomial.polynomial.polyval(np.exp(-1j * v), q)


def _cascade_depth(xi: np.ndarray) -> int:
    top = float(np.max(np.abs(xi))) if xi.size else 0.0
    return max(20, int(math.ceil(math.log2(top + 1.0))) + CASCADE_EXTRA_DEPTH)


def _phi_hat_levels(xi: np.ndarray, M: int, levels: int) -> list:
    """phi_hat(xi / 2^k) for k = 1..levels from one truncated infinite product."""
    depth = max(_cascade_depth(xi), levels + 1)
    # phi_hat(xi / 2^depth) ~ 1, then phi_hat(w) = m0(w / 2) phi_hat(w / 2)
    prod = np.ones(xi.shape, dtype=complex)
    out = [None] * levels
    for k in range(depth - 1, 0, -1):
        prod = _m0(xi / 2.0 ** (k + 1), M) * prod
        if k <= levels:
            out[k - 1] = prod
    return out


def psi_hat(xi, spec: WaveletSpec):
    """psi_hat(xi) = m1(xi/2) prod_{k >= 2} m0(xi / 2^k), with int psi^2 = 1."""
    x = np.asarray(xi, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InputError("psi_hat needs finite frequencies")
    M = spec.vanishing_moments
    flat = x.ravel()
    phi_half = _phi_hat_levels(flat, M, 1)[0]
    out = (_m1(flat / 2.0, M) * phi_half).reshape(x.shape)
    return complex(out) if out.ndim == 0 else out


# --- K(d) ------------------------------------------------------------------

def memory_domain(spec: WaveletSpec) -> tuple[float, float]:
    """Open interval of d for which K(d) converges (with the conservative alpha)."""
    return 0.5 - spec.decay_alpha, spec.vanishing_moments + 0.5


def _check_domain(d: float, spec: WaveletSpec) -> None:
    lo, hi = memory_domain(spec)
    if not lo < d < hi:
        raise DomainError(
            f"d={d:g} outside ({lo:.4f}, {hi:.4f}): the integral over |xi|^-2d |psi_hat|^2 diverges "
            f"for {spec.name}"
        )


@dataclass(frozen=True)
class KIntegral:
    value: float
    residual: float
    segments: int


def _k_integral(d: float, spec: WaveletSpec, resolution: int) -> KIntegral:
    M = spec.vanishing_moments

    def smooth(x):
        # |psi_hat|^2 / x^{2M} is smooth at 0; the power goes into the weight
        x = np.maximum(np.asarray(x, dtype=float), 1e-12)
        return np.abs(psi_hat(x, spec)) ** 2 / x ** (2 * M)

    head, head_err = integrate.quad(smooth, 0.0, 2.0 * math.pi, weight="alg",
                                    wvar=(2 * M - 2 * d, 0.0), limit=400,
                                    epsabs=0.0, epsrel=1e-11)
    t, wt = np.polynomial.legendre.leggauss(K_GL_ORDER)

    def block(lo, hi):
        pieces = max(1, int(round((hi - lo) / math.pi * resolution)))
        edges = np.linspace(lo, hi, pieces + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        x = (mid[:, None] + half[:, None] * t[None, :]).ravel()
        w = (half[:, None] * wt[None, :]).ravel()
        return float(np.sum(w * x ** (-2.0 * d) * np.abs(psi_hat(x, spec)) ** 2))

    # dyadic blocks [2 pi 2^k, 2 pi 2^(k+1)] shrink geometrically; the rest
    # is extrapolated and the stop rule compares successive extrapolations
    partial, blocks, prev = head, [], None
    for k in range(K_MAX_DYADIC):
        blocks.append(block(2.0 * math.pi * 2 ** k, 2.0 * math.pi * 2 ** (k + 1)))
        partial += blocks[-1]
        if k < 2:
            continue
        q = blocks[-1] / blocks[-2] if blocks[-2] > 0 else 0.0
        if q >= K_MAX_RATIO:
            continue
        current = partial + blocks[-1] * q / (1.0 - q)
        if prev is not None and abs(current - prev) < K_TOL * abs(current):
            break
        prev = current
    q = blocks[-1] / blocks[-2] if blocks[-2] > 0 else 0.0
    if q >= K_MAX_RATIO:
        raise DomainError(f"K(d) does not converge numerically for d={d:g} ({spec.name})")
    total = partial + blocks[-1] * q / (1.0 - q)
    change = abs(total - prev) if prev is not None else abs(blocks[-1])
    return KIntegral(2.0 * total, 2.0 * (change + abs(head_err)), len(blocks))


@lru_cache(maxsize=256)
def _k_cached(d: float, M: int, resolution: int) -> KIntegral:
    return _k_integral(d, daubechies_spec(M), resolution)


def k_integral(d: float, spec: WaveletSpec, resolution: int = 2) -> float:
    """K(d) = int |xi|^{-2d} |psi_hat(xi)|^2 dxi (squared modulus)."""
    d = float(d)
    _check_domain(d, spec)
    return _k_cached(d, spec.vanishing_moments, int(resolution)).value


def k_integral_report(d: float, spec: WaveletSpec, resolution: int = 2) -> KIntegral:
    d = float(d)
    _check_domain(d, spec)
    return _k_cached(d, spec.vanishing_moments, int(resolution))


# --- cross-spectral density D_u --------------------------------------------

def lambda_grid(grid: int) -> np.ndarray:
    """Midpoint grid on (-pi, pi); lambda = 0 is never a node."""
    h = 2.0 * math.pi / grid
    return -math.pi + h * (np.arange(grid) + 0.5)


@lru_cache(maxsize=8)
def _psi_tables(M: int, grid: int, l_lo: int, l_hi: int, u_max: int):
    """psi_hat at xi = lambda + 2 pi l and at xi / 2^u, u = 0..u_max.

    Returns ``(xi, [psi_hat(xi / 2^u) for u])`` with shape (l_hi - l_lo + 1, grid).
    """
    lam = lambda_grid(grid)
    ls = np.arange(l_lo, l_hi + 1)
    xi = lam[None, :] + 2.0 * math.pi * ls[:, None]
    flat = xi.ravel()
    phis = _phi_hat_levels(flat, M, u_max + 1)
    psis = []
    for u in range(u_max + 1):
        p = _m1(flat / 2.0 ** (u + 1), M) * phis[u]
        p = p.reshape(xi.shape)
        p.setflags(write=False)
        psis.append(p)
    xi.setflags(write=False)
    return xi, psis


def _d_values(u: int, d: float, M: int, grid: int, l_lo: int, l_hi: int, u_max: int) -> np.ndarray:
    xi, psis = _psi_tables(M, grid, l_lo, l_hi, u_max)
    base = np.abs(xi) ** (-2.0 * d) * np.conj(psis[0]) * psis[u]
    width = 1 << u
    out = np.empty((grid, width), dtype=complex)
    step = np.exp(-1j * xi / width)
    e = np.full(xi.shape, 2.0 ** (-u / 2.0), dtype=complex)
    for r in range(width):
        out[:, r] = np.sum(base * e, axis=0)
        e = e * step
    return out


@dataclass(frozen=True)
class SpectralTable:
    """D_u^{(r)}(lambda; d) on a midpoint grid, one column per r = 0..2^u - 1."""

    u: int
    lambda_grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    d: float
    truncation: int
    tail: float
    tail_abs: float

    def fourier(self, tau_max: int) -> np.ndarray:
        """a_r(tau) = int D^{(r)}(lambda) e^{i lambda tau} dlambda for |tau| <= tau_max.

        Rows are tau = -tau_max..tau_max. The coefficients are real up to
        rounding because D^{(r)}(-lambda) is the conjugate of D^{(r)}(lambda).
        """
        G = self.lambda_grid.size
        if not 1 <= tau_max < G // 2:
            raise InputError(f"tau_max must lie in [1, {G // 2 - 1}] for a grid of {G}")
        h = 2.0 * math.pi / G
        spec = np.fft.ifft(self.values, axis=0) * G
        taus = np.arange(-tau_max, tau_max + 1)
        phase = np.exp(1j * (-math.pi + 0.5 * h) * taus)
        a = h * phase[:, None] * spec[taus % G, :]
        return a.real

    def max_modulus(self) -> float:
        return float(np.max(np.abs(self.values)))


def d_infinity(u: int, d: float, spec: WaveletSpec, grid: int = DEFAULT_GRID,
               l_max: int = DEFAULT_L_MAX, u_max: int | None = None) -> SpectralTable:
    """Tabulate all 2^u components of D_u(lambda; d).

    The l-sum is truncated to |l| <= l_max. ``tail`` is the largest
    ``int |block|`` over r of the block l_max < |l| <= 2 l_max, divided by the
    largest ``int |partial sum|``; ``tail_abs`` is the same integral unscaled.
    """
    if u < 0:
        raise InputError("scale gap u must be >= 0")
    if l_max < 10:
        raise InputError("l_max must be >= 10")
    if grid < 16 or grid % 2:
        raise InputError("grid must be an even integer >= 16")
    d = float(d)
    _check_domain(d, spec)
    M = spec.vanishing_moments
    u_max = max(u, u_max or 0)
    vals = _d_values(u, d, M, grid, -l_max, l_max, u_max)
    outer = (_d_values(u, d, M, grid, -2 * l_max, -l_max - 1, u_max)
             + _d_values(u, d, M, grid, l_max + 1, 2 * l_max, u_max))
    if not np.all(np.isfinite(vals)):
        raise DomainError(f"cross-spectral density is not finite for d={d:g}")
    h = 2.0 * math.pi / grid
    tail_abs = h * float(np.max(np.sum(np.abs(outer), axis=0)))
    partial = h * float(np.max(np.sum(np.abs(vals), axis=0)))
    tail = tail_abs / partial if partial > 0 else 0.0
    vals.setflags(write=False)
    return SpectralTable(u, lambda_grid(grid), vals, d, l_max, tail, tail_abs)


# --- covariance matrices -----------------------------------------------------

@dataclass(frozen=True)
class CovMatrix:
    entries: np.ndarray
    kind: EstimatorKind
    flavor: str
    p_max: int
    tau_max: int
    l_max: int
    d: float
    residuals: dict = field(default_factory=dict)
    warnings: tuple = ()

    def quad(self, w) -> float:
        w = np.asarray(w, dtype=float)
        return float(w @ self.entries @ w)


@dataclass(frozen=True)
class _Correlations:
    """Normalized correlations rho_{u}(tau, r) for u = 0..ell (unit term removed)."""

    rho: tuple
    k_table: float
    tail: float
    tau_residual: float


@lru_cache(maxsize=64)
def _correlations(d: float, ell: int, M: int, grid: int, l_max: int, tau_max: int) -> _Correlations:
    spec = daubechies_spec(M)
    tables = [d_infinity(u, d, spec, grid, l_max, u_max=ell) for u in range(ell + 1)]
    coeffs = [t.fourier(tau_max) for t in tables]
    k_table = float(coeffs[0][tau_max, 0])
    if not k_table > 0:
        raise NumericError(f"non-positive variance integral for d={d:g}")
    rho = []
    tau_res = 0.0
    quarter = max(1, tau_max // 2)
    for u, a in enumerate(coeffs):
        r = (2.0 ** (d * u)) * a / k_table
        if u == 0:
            r = r.copy()
            r[tau_max, 0] = 0.0
        # share of sum rho^2 carried by tau_max/2 < |tau| <= tau_max
        total = float(np.sum(r * r)) + (1.0 if u == 0 else 0.0)
        outer = float(np.sum(r[: tau_max - quarter + 1] ** 2) + np.sum(r[tau_max + quarter:] ** 2))
        tau_res = max(tau_res, outer / total if total > 0 else 0.0)
        r.setflags(write=False)
        rho.append(r)
    # bound on the change of any rho from the next block of l terms
    tail = max(2.0 ** (d * t.u) * t.tail_abs / k_table for t in tables)
    return _Correlations(tuple(rho), k_table, tail, tau_res)


def _power_sums(rho: np.ndarray, p_max: int) -> np.ndarray:
    out = np.zeros(p_max + 1)
    pw = np.ones_like(rho)
    for p in range(1, p_max + 1):
        pw = pw * rho
        out[p] = float(np.sum(pw))
    return out


def _resolve_spec(spec, d: float) -> WaveletSpec:
    if spec is None:
        return daubechies_spec(2 if d <= 2 else 4)
    if isinstance(spec, (int, np.integer)):
        return daubechies_spec(int(spec))
    return spec


def cov_v(d: float, ell: int, kind, spec: WaveletSpec | int | None = None, *,
          p_max: int = DEFAULT_P_MAX, tau_max: int = DEFAULT_TAU_MAX,
          grid: int = DEFAULT_GRID, l_max: int = DEFAULT_L_MAX) -> CovMatrix:
    """Limiting covariance of sqrt(n 2^-J0) (log sigma2_hat_{J0+i})_{i=0..ell}.

    It does not depend on f*(0). ``spec`` defaults to db2 for d <= 2 and db4 above.
    """
    kind = EstimatorKind.parse(kind)
    if p_max < 2 or tau_max < 1 or ell < 1:
        raise InputError("need p_max >= 2, tau_max >= 1 and ell >= 1")
    d = float(d)
    spec = _resolve_spec(spec, d)
    corr = _correlations(d, int(ell), spec.vanishing_moments, int(grid), int(l_max), int(tau_max))
    h2 = np.asarray(hermite_projections(kind, p_max)) ** 2
    second = if_second_moment(kind)
    energy_tail = max(second - float(np.sum(h2)), 0.0)
    per_gap = []
    p_res = 0.0
    for u, rho in enumerate(corr.rho):
        sums = _power_sums(rho, p_max)
        acc = second if u == 0 else 0.0
        for p in range(2, p_max + 1):
            acc += h2[p] * sums[p]
        bound = energy_tail * float(np.sum(np.abs(rho) ** (p_max + 1)))
        p_res = max(p_res, bound / abs(acc) if acc != 0 else bound)
        p_res = float(p_res)
        per_gap.append(acc)
    V = np.empty((ell + 1, ell + 1))
    for i in range(ell + 1):
        for j in range(ell + 1):
            V[i, j] = 4.0 * 2.0 ** min(i, j) * per_gap[abs(i - j)]
    residuals = {"p_series": p_res, "tau_series": corr.tau_residual, "l_series": corr.tail}
    msgs = tuple(f"{name} truncation residual {val:.2e} exceeds {RESIDUAL_TOLS[name]:g}"
                 for name, val in residuals.items() if val > RESIDUAL_TOLS[name])
    V.setflags(write=False)
    return CovMatrix(V, kind, "V", int(p_max), int(tau_max), int(l_max), d, residuals, msgs)


def cov_u(d: float, ell: int, kind, fstar0: float = 1.0, spec: WaveletSpec | int | None = None,
          **truncation) -> CovMatrix:
    """Limiting covariance of the scale spectrum itself.

    U_ij = f*(0)^2 K(d)^2 2^{2d(i+j)} V_ij, with K taken from the same
    truncated table that normalizes V.
    """
    d = float(d)
    spec = _resolve_spec(spec, d)
    v = cov_v(d, ell, kind, spec, **truncation)
    corr = _correlations(d, int(ell), spec.vanishing_moments,
                         int(truncation.get("grid", DEFAULT_GRID)),
                         int(truncation.get("l_max", DEFAULT_L_MAX)),
                         int(truncation.get("tau_max", DEFAULT_TAU_MAX)))
    i = np.arange(ell + 1)
    factor = (float(fstar0) ** 2) * corr.k_table ** 2 * 2.0 ** (2.0 * d * (i[:, None] + i[None, :]))
    U = factor * v.entries
    U.setflags(write=False)
    return CovMatrix(U, v.kind, "U", v.p_max, v.tau_max, v.l_max, d, v.residuals, v.warnings)


def cl_closed_form(d: float, ell: int, fstar0: float = 1.0, spec: WaveletSpec | int | None = None,
                   grid: int = 4096, l_max: int = DEFAULT_L_MAX) -> np.ndarray:
    """U_CL from 4 pi f*(0)^2 2^{4d(i v j) + (i ^ j)} int |D_{|i-j|}|^2 dlambda.

    The integral is evaluated directly on its own grid, independently of the
    Fourier-coefficient route used by :func:`cov_u`.
    """
    d = float(d)
    spec = _resolve_spec(spec, d)
    h = 2.0 * math.pi / grid
    energy = []
    for u in range(ell + 1):
        t = d_infinity(u, d, spec, grid=grid, l_max=l_max, u_max=ell)
        energy.append(h * float(np.sum(np.abs(t.values) ** 2)))
    U = np.empty((ell + 1, ell + 1))
    for i in range(ell + 1):
        for j in range(ell + 1):
            U[i, j] = (4.0 * math.pi * float(fstar0) ** 2
                       * 2.0 ** (4.0 * d * max(i, j) + min(i, j)) * energy[abs(i - j)])
    return U


def are_analytic(d: float, ell: int, kind, spec: WaveletSpec | int | None = None, weights=None,
                 **truncation) -> float:
    """w^T V_CL w / w^T V_* w."""
    w = default_weights(ell).w if weights is None else np.asarray(weights, dtype=float)
    v_cl = cov_v(d, ell, EstimatorKind.CL, spec, **truncation).quad(w)
    v_k = cov_v(d, ell, kind, spec, **truncation).quad(w)
    return v_cl / v_k


# --- diagnostics -------------------------------------------------------------

def rate_condition_value(n: int, j0: int, beta: float = 1.0) -> float:
    return float(n) * 2.0 ** (-(1.0 + 2.0 * beta) * j0)


def rate_condition_warning(n: int, j0: int, beta: float = 1.0) -> str | None:
    """Warn when n 2^{-(1+2 beta) J0} >= 1 (bias not negligible against the SE)."""
    val = rate_condition_value(n, j0, beta)
    if val >= 1.0:
        return (f"rate condition n*2^(-(1+2*beta)*J0) = {val:.3g} >= 1 for n={n}, J0={j0}, "
                f"beta={beta:g}; the bias may not be negligible against the standard error")
    return None


def z_quantile(level: float) -> float:
    if not 0.0 < level < 1.0:
        raise InputError("confidence level must lie in (0, 1)")
    return float(special.ndtri(0.5 + 0.5 * level))


def plugin_memory(d_hat: float, margin: float = PLUGIN_HALF_MARGIN) -> float:
    """Move a plug-in d away from the half-integers the simulator rejects."""
    m = math.ceil(d_hat - 0.5)
    d0 = d_hat - m
    if d0 > 0.5 - margin:
        return m + 0.5 - margin
    if d0 < -0.5 + margin:
        return m - 0.5 + margin
    return d_hat


# --- Monte Carlo ---------------------------------------------------------------

def mc_variance(d: float, n: int, j0: int, ell: int, kind, reps: int = DEFAULT_MC_REPS,
                seed: int = 0, wavelet_m: int | None = None, threads: int | None = None,
                cr_variant: str = DEFAULT_CR_VARIANT) -> float:
    """Empirical variance of sqrt(n 2^-J0) (d_hat - d) over ARFIMA(0, d, 0) replications."""
    from .harness import ExperimentPlan, run_plan

    if reps < MIN_MC_REPS:
        raise InputError(f"mc_variance needs reps >= {MIN_MC_REPS}, got {reps}")
    kind = EstimatorKind.parse(kind)
    plan = ExperimentPlan(d_values=(float(d),), n=int(n), reps=int(reps), j0=int(j0), ell=int(ell),
                          kinds=(kind,), wavelet_m=wavelet_m, master_seed=int(seed),
                          cr_variant=cr_variant)
    res = run_plan(plan, threads=threads)
    return res.cell(float(d), kind).std_variance


def attach_ci(est: MemoryEstimate, pyr: ScalePyramid, level: float = 0.95, method: str = "mc",
              reps: int = DEFAULT_MC_REPS, seed: int = 0, threads: int | None = None,
              cr_variant: str = DEFAULT_CR_VARIANT, **truncation) -> MemoryEstimate:
    """Return ``est`` with a normal CI from the MC or analytic variance at the plug-in d_hat."""
    z = z_quantile(level)
    d_plug = plugin_memory(est.d_hat)
    spec = pyr.spec
    notes = [f"CI from {method} variance evaluated at plug-in d={d_plug:.6g}"]
    notes += check_memory_range(d_plug, spec)
    scale_n = pyr.n * 2.0 ** (-est.j0)
    if method == "mc":
        var = mc_variance(d_plug, pyr.n, est.j0, est.ell, est.kind, reps=reps, seed=seed,
                          wavelet_m=spec.vanishing_moments, threads=threads, cr_variant=cr_variant)
    elif method == "analytic":
        cov = cov_v(d_plug, est.ell, est.kind, spec, **truncation)
        var = cov.quad(est.weights.w)
        notes += list(cov.warnings)
    else:
        raise InputError(f"unknown CI method {method!r}; expected mc or analytic")
    if not (math.isfinite(var) and var > 0):
        raise NumericError(f"{method} variance is not positive ({var!r})")
    se = math.sqrt(var / scale_n)
    return est.with_ci(se, level, method, z, notes)


__all__ = [
    "CovMatrix", "KIntegral", "SpectralTable", "are_analytic", "attach_ci", "cl_closed_form",
    "cov_u", "cov_v", "d_infinity", "k_integral", "k_integral_report",
    "lambda_grid", "mc_variance", "memory_domain", "plugin_memory", "psi_hat",
    "rate_condition_value", "rate_condition_warning", "z_quantile",
]
