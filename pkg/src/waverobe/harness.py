"""Monte-Carlo experiments: ARE tables, bias sweeps and density studies."""
from __future__ import annotations

import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import stats

from .arfima import ArfimaConfig, OutlierSpec, derive_seed, generate, inject_outliers, make_rng, split_memory
from .errors import ConfigurationError, ExperimentError, InputError, NumericError
from .estimator import estimate_d
from .robust import ALL_KINDS, CR_VARIANTS, DEFAULT_CR_VARIANT, EstimatorKind, min_coeffs
from .wavelet import MAX_VANISHING_MOMENTS, daubechies_spec, decompose, num_coeffs

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

FAILURE_THRESHOLD = 0.01
MIN_DENSITY_REPS = 500


def auto_wavelet_m(d: float) -> int:
    """Two vanishing moments up to d = 2, four above."""
    return 2 if d <= 2 else 4


def resolve_threads(requested: int | None = None) -> int:
    """WAVEROBE_THREADS wins over ``requested``; the fallback is the CPU count."""
    env = os.environ.get("WAVEROBE_THREADS")
    if env:
        try:
            val = int(env)
        except ValueError:
            raise ConfigurationError(f"WAVEROBE_THREADS must be an integer, got {env!r}") from None
    elif requested is not None:
        val = int(requested)
    else:
        val = os.cpu_count() or 1
    if val < 1:
        raise ConfigurationError("thread count must be >= 1")
    return val


@dataclass(frozen=True)
class ExperimentPlan:
    """A Monte-Carlo design; ``wavelet_m=None`` picks M per d with :func:`auto_wavelet_m`."""

    d_values: tuple
    n: int = 4096
    reps: int = 500
    j0: int = 3
    ell: int = 5
    kinds: tuple = ALL_KINDS
    outliers: OutlierSpec | None = None
    wavelet_m: int | None = None
    master_seed: int = 0
    cr_variant: str = DEFAULT_CR_VARIANT
    name: str = ""
    density: bool = False

    def __post_init__(self):
        d_values = tuple(float(d) for d in np.atleast_1d(np.asarray(self.d_values, dtype=float)))
        object.__setattr__(self, "d_values", d_values)
        kinds = tuple(EstimatorKind.parse(k) for k in self.kinds)
        object.__setattr__(self, "kinds", kinds)
        if not d_values:
            raise ConfigurationError("plan.d_values: at least one value is required")
        if not kinds:
            raise ConfigurationError("plan.kinds: at least one estimator is required")
        if len(set(kinds)) != len(kinds):
            raise ConfigurationError("plan.kinds: duplicate estimator")
        for name in ("n", "reps", "j0", "ell"):
            val = getattr(self, name)
            if isinstance(val, bool) or int(val) != val:
                raise ConfigurationError(f"plan.{name}: expected an integer, got {val!r}")
            object.__setattr__(self, name, int(val))
        if self.reps < 1:
            raise ConfigurationError("plan.reps: must be >= 1")
        if self.j0 < 1:
            raise ConfigurationError("plan.j0: must be >= 1")
        if self.ell < 1:
            raise ConfigurationError("plan.ell: must be >= 1")
        if not isinstance(self.density, bool):
            raise ConfigurationError("plan.density: expected true or false")
        if self.cr_variant not in CR_VARIANTS:
            raise ConfigurationError(f"plan.cr_variant: expected one of {', '.join(CR_VARIANTS)}")
        if self.wavelet_m is not None and not 1 <= int(self.wavelet_m) <= MAX_VANISHING_MOMENTS:
            raise ConfigurationError(f"plan.wavelet_m: expected 1..{MAX_VANISHING_MOMENTS}")
        need = max(min_coeffs(k) for k in kinds)
        for i, d in enumerate(d_values):
            try:
                split_memory(d)
            except NumericError as exc:
                raise ConfigurationError(f"plan.d_values[{i}]: {exc}") from None
            M = self.wavelet_for(d)
            if d > M:
                raise ConfigurationError(
                    f"plan.d_values[{i}]: d={d:g} exceeds wavelet_m={M}; the regression needs d <= M"
                )
            top = num_coeffs(self.n, self.j0 + self.ell, 2 * M - 1)
            if top < need:
                raise ConfigurationError(
                    f"plan.n: scale {self.j0 + self.ell} has {top} coefficients for n={self.n} "
                    f"and db{M}; at least {need} are needed"
                )

    def wavelet_for(self, d: float) -> int:
        return int(self.wavelet_m) if self.wavelet_m is not None else auto_wavelet_m(d)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "d_values": list(self.d_values),
            "n": self.n,
            "reps": self.reps,
            "j0": self.j0,
            "ell": self.ell,
            "kinds": [k.value for k in self.kinds],
            "wavelet_m": self.wavelet_m,
            "master_seed": self.master_seed,
            "cr_variant": self.cr_variant,
            "density": self.density,
            "outliers": None,
        }
        if self.outliers is not None:
            out["outliers"] = {"fraction": self.outliers.fraction,
                               "magnitude_multiplier": self.outliers.magnitude_multiplier,
                               "seed": self.outliers.seed}
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentPlan":
        if not isinstance(data, dict):
            raise ConfigurationError("plan: expected a table/object at top level")
        allowed = {"name", "d_values", "n", "reps", "j0", "ell", "kinds", "wavelet_m",
                   "master_seed", "cr_variant", "outliers", "density"}
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise ConfigurationError(f"plan.{unknown[0]}: unknown field")
        if "d_values" not in data:
            raise ConfigurationError("plan.d_values: required field missing")
        kw = dict(data)
        out = kw.pop("outliers", None)
        if out is not None:
            if not isinstance(out, dict):
                raise ConfigurationError("plan.outliers: expected a table/object")
            bad = sorted(set(out) - {"fraction", "magnitude_multiplier", "seed"})
            if bad:
                raise ConfigurationError(f"plan.outliers.{bad[0]}: unknown field")
            try:
                kw["outliers"] = OutlierSpec(**out)
            except InputError as exc:
                raise ConfigurationError(f"plan.outliers: {exc}") from None
        try:
            return cls(**kw)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(f"plan: {exc}") from None


def load_plan(path) -> ExperimentPlan:
    """Read a plan from JSON or TOML (chosen by suffix)."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read plan {path}: {exc.strerror}") from exc
    try:
        if path.suffix.lower() == ".toml":
            data = tomllib.loads(raw.decode("utf-8"))
        else:
            data = json.loads(raw.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise ConfigurationError(f"{path}: cannot parse plan: {exc}") from None
    try:
        return ExperimentPlan.from_dict(data)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{path}: {exc}") from None


@dataclass(frozen=True)
class CellStats:
    """Summary of one (d, estimator) cell."""

    d: float
    kind: EstimatorKind
    d_hats: np.ndarray = field(repr=False)
    failures: int
    norm: float

    @property
    def valid(self) -> np.ndarray:
        return self.d_hats[np.isfinite(self.d_hats)]

    @property
    def mean(self) -> float:
        return float(np.mean(self.valid))

    @property
    def bias(self) -> float:
        return self.mean - self.d

    @property
    def variance(self) -> float:
        v = self.valid
        return float(np.var(v, ddof=1)) if v.size > 1 else float("nan")

    @property
    def std_samples(self) -> np.ndarray:
        """sqrt(n 2^-J0) (d_hat - d) over the successful replications."""
        return self.norm * (self.valid - self.d)

    @property
    def std_variance(self) -> float:
        return self.norm ** 2 * self.variance

    def __eq__(self, other):
        if not isinstance(other, CellStats):
            return NotImplemented
        return (self.d == other.d and self.kind == other.kind and self.failures == other.failures
                and np.array_equal(self.d_hats, other.d_hats, equal_nan=True))

    __hash__ = None

    def to_dict(self, include_samples: bool = True) -> dict:
        out = {
            "d": self.d,
            "estimator": self.kind.value,
            "mean": self.mean,
            "bias": self.bias,
            "variance": self.variance,
            "std_variance": self.std_variance,
            "failures": self.failures,
        }
        if include_samples:
            out["std_samples"] = self.std_samples.tolist()
        return out


@dataclass(frozen=True)
class ExperimentResult:
    plan: ExperimentPlan
    cells: dict
    runtime: dict = field(default_factory=dict, compare=False)

    def cell(self, d: float, kind) -> CellStats:
        return self.cells[(float(d), EstimatorKind.parse(kind))]

    def are(self, d: float, kind) -> float:
        """var_CL / var_kind of the standardized errors."""
        ref = self.cell(d, EstimatorKind.CL).variance
        return ref / self.cell(d, kind).variance

    def are_table(self) -> dict:
        if EstimatorKind.CL not in self.plan.kinds:
            return {}
        return {d: {k.value: self.are(d, k) for k in self.plan.kinds if k is not EstimatorKind.CL}
                for d in self.plan.d_values}

    def to_dict(self, include_samples: bool = True) -> dict:
        return {
            "plan": self.plan.to_dict(),
            "cells": [c.to_dict(include_samples) for c in self.cells.values()],
            "are": [{"d": d, **row} for d, row in self.are_table().items()],
            "runtime": dict(self.runtime),
        }


def _replicate(plan: ExperimentPlan, d: float, rep: int) -> tuple[np.ndarray, list]:
    seed = derive_seed(plan.master_seed, rep)
    x = generate(ArfimaConfig(d, plan.n, seed))
    if plan.outliers is not None:
        rng = make_rng(seed ^ int(plan.outliers.seed), stream=1)
        x, _ = inject_outliers(x, plan.outliers, rng=rng)
    spec = daubechies_spec(plan.wavelet_for(d))
    pyr = decompose(x, spec, j_max=plan.j0 + plan.ell)
    out = np.full(len(plan.kinds), np.nan)
    errors = []
    for i, kind in enumerate(plan.kinds):
        try:
            out[i] = estimate_d(pyr, plan.j0, plan.ell, kind, cr_variant=plan.cr_variant).d_hat
        except (InputError, NumericError) as exc:
            errors.append(f"d={d:g} rep={rep} {kind.value}: {exc}")
    return out, errors


def run_plan(plan: ExperimentPlan, threads: int | None = None) -> ExperimentResult:
    """Run every (d, replication) of ``plan``; results do not depend on ``threads``."""
    workers = resolve_threads(threads)
    start = time.perf_counter()
    jobs = [(d, rep) for d in plan.d_values for rep in range(plan.reps)]
    if workers == 1:
        results = [_replicate(plan, d, rep) for d, rep in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: _replicate(plan, *job), jobs))
    # ordered reduction
    norm = math.sqrt(plan.n * 2.0 ** (-plan.j0))
    cells, messages = {}, []
    for di, d in enumerate(plan.d_values):
        block = results[di * plan.reps:(di + 1) * plan.reps]
        mat = np.vstack([r[0] for r in block])
        for r in block:
            messages.extend(r[1])
        for ki, kind in enumerate(plan.kinds):
            col = mat[:, ki].copy()
            col.setflags(write=False)
            fails = int(np.sum(~np.isfinite(col)))
            if fails > FAILURE_THRESHOLD * plan.reps:
                first = next((m for m in messages if f" {kind.value}:" in m), "")
                raise ExperimentError(
                    f"{fails} of {plan.reps} replications failed for d={d:g}, {kind.value} "
                    f"(threshold {FAILURE_THRESHOLD:.0%}); first failure: {first}"
                )
            cells[(d, kind)] = CellStats(d, kind, col, fails, norm)
    runtime = {"seconds": time.perf_counter() - start, "threads": workers,
               "failures": len(messages)}
    return ExperimentResult(plan, cells, runtime)


# --- density studies ----------------------------------------------------------

@dataclass(frozen=True)
class DensityCurve:
    condition: str
    d: float
    kind: EstimatorKind
    samples: np.ndarray = field(repr=False)
    edges: np.ndarray = field(repr=False)
    hist: np.ndarray = field(repr=False)
    grid: np.ndarray = field(repr=False)
    kde: np.ndarray = field(repr=False)

    @property
    def median(self) -> float:
        return float(np.median(self.samples))

    @property
    def sd(self) -> float:
        return float(np.std(self.samples, ddof=1))

    @property
    def mean(self) -> float:
        return float(np.mean(self.samples))


@dataclass(frozen=True)
class DensityBundle:
    curves: tuple
    results: dict

    def get(self, condition: str, d: float, kind) -> DensityCurve:
        kind = EstimatorKind.parse(kind)
        for c in self.curves:
            if c.condition == condition and c.d == float(d) and c.kind is kind:
                return c
        raise KeyError((condition, d, kind))

    def summary_rows(self) -> list:
        return [{"condition": c.condition, "d": c.d, "estimator": c.kind.value,
                 "mean": c.mean, "median": c.median, "sd": c.sd, "count": int(c.samples.size)}
                for c in self.curves]


def density_experiment(plan: ExperimentPlan, threads: int | None = None, bins: int = 40,
                       grid_points: int = 256) -> DensityBundle:
    """Histograms and Gaussian KDEs of sqrt(n 2^-J0)(d_hat - d), clean and contaminated.

    The contaminated run uses ``plan.outliers`` or, when absent, 1% outliers at 5 sd.
    """
    if plan.reps < MIN_DENSITY_REPS:
        raise InputError(f"density_experiment needs reps >= {MIN_DENSITY_REPS}, got {plan.reps}")
    runs = {
        "clean": run_plan(replace(plan, outliers=None), threads),
        "contaminated": run_plan(replace(plan, outliers=plan.outliers or OutlierSpec()), threads),
    }
    curves = []
    for cond, res in runs.items():
        for d in plan.d_values:
            pooled = np.concatenate([res.cell(d, k).std_samples for k in plan.kinds])
            lo, hi = float(pooled.min()), float(pooled.max())
            pad = 0.1 * (hi - lo) if hi > lo else 1.0
            edges = np.linspace(lo - pad, hi + pad, bins + 1)
            grid = np.linspace(lo - pad, hi + pad, grid_points)
            for k in plan.kinds:
                s = res.cell(d, k).std_samples
                hist, _ = np.histogram(s, bins=edges, density=True)
                kde = stats.gaussian_kde(s)(grid) if np.ptp(s) > 0 else np.zeros_like(grid)
                curves.append(DensityCurve(cond, d, k, s, edges, hist, grid, kde))
    return DensityBundle(tuple(curves), runs)


# --- persistence ----------------------------------------------------------------

def write_are_csv(result: ExperimentResult, path) -> None:
    kinds = [k for k in result.plan.kinds if k is not EstimatorKind.CL]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["d"] + [f"ARE_{k.value}" for k in kinds])
        for d, row in result.are_table().items():
            w.writerow([repr(d)] + [repr(row[k.value]) for k in kinds])


def write_summary_csv(result: ExperimentResult, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["d", "estimator", "mean", "bias", "variance", "std_variance", "failures"])
        for c in result.cells.values():
            w.writerow([repr(c.d), c.kind.value, repr(c.mean), repr(c.bias), repr(c.variance),
                        repr(c.std_variance), c.failures])


def write_samples_csv(cell: CellStats, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["replication", "d_hat", "standardized"])
        for i, v in enumerate(cell.d_hats):
            std = cell.norm * (v - cell.d) if np.isfinite(v) else float("nan")
            w.writerow([i, repr(float(v)), repr(float(std))])


def write_density_csv(curve: DensityCurve, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "kde", "bin_left", "bin_right", "histogram"])
        rows = max(curve.grid.size, curve.hist.size)
        for i in range(rows):
            x = repr(float(curve.grid[i])) if i < curve.grid.size else ""
            k = repr(float(curve.kde[i])) if i < curve.kde.size else ""
            if i < curve.hist.size:
                b = [repr(float(curve.edges[i])), repr(float(curve.edges[i + 1])),
                     repr(float(curve.hist[i]))]
            else:
                b = ["", "", ""]
            w.writerow([x, k] + b)
