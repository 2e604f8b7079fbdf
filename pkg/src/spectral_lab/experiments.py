"""Monte Carlo harness: convergence sweeps, bulk-imaginary sweeps,
resolvent-error sweeps, window rasters, and log-log rate fitting.

Every (N, trial) cell draws its matrix from an independent derived stream,
so results are identical for any execution order or parallelism degree.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .ensembles import EnsembleKind, EnsembleSpec, sample
from .matops import order_by_distance, spectrum
from .outliers import (
    JordanSpec,
    OutlierPrediction,
    PredictionSource,
    matrix_spike_predictions,
)
from .perturbation import (
    DeformedWindowParams,
    MatrixPoly,
    PerturbationModel,
    Rectangle,
    constant_model,
    eval_perturbation,
    in_deformed_window,
    resolvent_error,
    zero_model,
)
from .stieltjes import LawKind, LimitLaw, WindowParams


class Family(Enum):
    MATRIX_SPIKE = "matrix-spike"
    BULK_IMAG = "bulk-imag"
    HX_PRODUCT = "hx-product"
    QUADRATIC = "quadratic"
    HANKEL = "hankel"
    RESOLVENT_ERROR = "resolvent-error"
    WINDOW_SCAN = "window-scan"


@dataclass(frozen=True)
class RateEstimate:
    slope: float
    intercept: float
    r_squared: float
    per_N_medians: tuple[tuple[int, float, float, float], ...]

    def __post_init__(self):
        if not 0.0 <= self.r_squared <= 1.0 + 1e-12:
            raise ValueError(f"r_squared {self.r_squared} outside [0, 1]")


@dataclass(frozen=True)
class FrequencyEstimate:
    frequency: float
    lower: float
    upper: float
    trials: int


@dataclass
class Scenario:
    """One experiment design: the perturbed object family, its parameters,
    and the sweep controls (size grid, trial count, seed)."""

    name: str
    family: Family
    law: LimitLaw
    N_grid: list[int]
    trials: int = 10
    seed: int = 0
    # family-specific parameters
    cmat: np.ndarray | None = None        # constant C for spikes / bulk sweeps
    jordan: JordanSpec | None = None
    target: complex | None = None          # designated limit point
    target_multiplicity: int = 1
    exclude: int = 0                       # eigenvalues dropped in bulk sweeps
    offdiag: bool = False                  # embed C off the diagonal: Q P = 0
    c_list: tuple[float, ...] = ()         # product weights
    p_coeffs: tuple[complex, ...] = ()     # scalar polynomial scenarios
    q_coeffs: tuple[complex, ...] = ()
    zeta: complex = 1.0
    grid: tuple[complex, ...] = ()         # probe points for resolvent sweeps
    rect: Rectangle | None = None          # raster region for window scans
    omega: float = 0.9
    beta: float = 0.45
    complex_entries: bool = False          # complex Gaussian entries for Wigner
    signal: object | None = None           # hankel signal model
    z_probe: complex = 2.0
    sigma: float = 1.0

    def __post_init__(self):
        if list(self.N_grid) != sorted(set(self.N_grid)):
            raise ValueError("N_grid must be strictly increasing")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")


def ensemble_spec(law: LimitLaw, N: int, seed: int, stream: tuple[int, ...],
                  complex_entries: bool = False) -> EnsembleSpec:
    if law.kind is LawKind.WIGNER:
        kind = EnsembleKind.WIGNER_COMPLEX if complex_entries else EnsembleKind.WIGNER_REAL
        return EnsembleSpec(kind=kind, N=N, seed=seed, stream=stream)
    M = max(1, round(law.phi * N))
    return EnsembleSpec(kind=EnsembleKind.MARCHENKO_PASTUR, N=N, M=M, seed=seed, stream=stream)


def scenario_model(scn: Scenario, N: int) -> PerturbationModel:
    if scn.cmat is None:
        return zero_model(N)
    if scn.offdiag:
        C = np.atleast_2d(np.asarray(scn.cmat, dtype=complex))
        n = C.shape[0]
        P = np.zeros((N, n), dtype=complex)
        P[:n, :] = np.eye(n)
        Q = np.zeros((n, N), dtype=complex)
        Q[:, n : 2 * n] = np.eye(n)
        return PerturbationModel(P=P, Cpoly=MatrixPoly([C]), Q=Q)
    return constant_model(scn.cmat, N)


class BudgetExceededError(RuntimeError):
    """Wall-clock budget ran out; partial per-cell results are attached."""

    def __init__(self, partial: dict, rows: list | None = None):
        super().__init__("wall-clock budget exceeded")
        self.partial = partial
        self.rows = rows or []


def _map_cells(fn, cells, jobs: int = 1, deadline: float | None = None) -> dict:
    """Apply fn to each cell, optionally across threads; order-independent.

    A deadline (time.monotonic value) forces serial execution so the
    partial results flushed on budget exhaustion are well defined.
    """
    cells = list(cells)
    if jobs <= 1 or deadline is not None:
        out: dict = {}
        for cell in cells:
            if deadline is not None and time.monotonic() > deadline:
                raise BudgetExceededError(out)
            out[cell] = fn(cell)
        return out
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        results = pool.map(fn, cells)
        return dict(zip(cells, list(results)))


def fit_loglog(points) -> RateEstimate:
    """Least-squares line through (log N, log median value).

    Values are grouped by N; the median per N is fitted and the quartiles
    recorded.  Nonpositive values and fewer than two distinct N are errors.
    """
    groups: dict[int, list[float]] = {}
    for N, v in points:
        v = float(v)
        if v <= 0.0 or not math.isfinite(v):
            raise ValueError(f"log-log fit needs positive finite values, got {v} at N={N}")
        groups.setdefault(int(N), []).append(v)
    if len(groups) < 2:
        raise ValueError("log-log fit needs at least two distinct N")
    med = []
    for N in sorted(groups):
        vals = np.asarray(groups[N])
        med.append((N, float(np.median(vals)),
                    float(np.quantile(vals, 0.25)), float(np.quantile(vals, 0.75))))
    x = np.log([m[0] for m in med])
    y = np.log([m[1] for m in med])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return RateEstimate(float(slope), float(intercept), max(0.0, min(1.0, r2)), tuple(med))


def empirical_high_probability(indicators) -> FrequencyEstimate:
    """Success frequency with a 95% Wilson confidence interval."""
    flags = [bool(b) for b in indicators]
    if not flags:
        raise ValueError("no trials supplied")
    n = len(flags)
    p = sum(flags) / n
    z = 1.959963984540054
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return FrequencyEstimate(p, max(0.0, center - half), min(1.0, center + half), n)


def _row(scn: Scenario, N: int, trial: int, statistic: str, value: float) -> dict:
    return {
        "scenario": scn.name,
        "N": N,
        "trial": trial,
        "seed": scn.seed,
        "statistic": statistic,
        "value": float(value),
    }


def designated_prediction(scn: Scenario) -> OutlierPrediction:
    """The limit point a convergence sweep measures against."""
    if scn.target is not None:
        return OutlierPrediction(
            z0=scn.target,
            multiplicity=scn.target_multiplicity,
            rate_exponent=-0.5,
            source=PredictionSource.MATRIX_SPIKE,
        )
    if scn.jordan is None:
        raise ValueError(f"scenario {scn.name} carries no prediction")
    preds = matrix_spike_predictions(scn.jordan, scn.law)
    if not preds:
        raise ValueError(f"scenario {scn.name} yields no valid prediction")
    return preds[0]


def sample_perturbed(scn: Scenario, N: int, trial: int) -> np.ndarray:
    X = sample(ensemble_spec(scn.law, N, scn.seed, (N, trial)))
    model = scenario_model(scn, N)
    return X.astype(complex) + eval_perturbation(model, 0.0)


def run_outlier_convergence(scn: Scenario, jobs: int = 1, deadline: float | None = None):
    """Distance of the k nearest eigenvalues to the predicted limit point.

    Returns (RateEstimate or None, rows); the estimate is absent when the
    grid is degenerate (fewer than two sizes with positive medians).
    """
    pred = designated_prediction(scn)
    z0, k = pred.z0, pred.multiplicity

    def cell(nt):
        N, trial = nt
        ev = spectrum(sample_perturbed(scn, N, trial))
        nearest = order_by_distance(ev, z0)[:k]
        return float(np.max(np.abs(nearest - z0)))

    cells = [(N, t) for N in scn.N_grid for t in range(scn.trials)]
    try:
        values = _map_cells(cell, cells, jobs, deadline)
    except BudgetExceededError as exc:
        exc.rows = [_row(scn, N, t, "delta", v) for (N, t), v in sorted(exc.partial.items())]
        raise
    rows = [_row(scn, N, t, "delta", values[(N, t)]) for N, t in cells]
    try:
        est = fit_loglog([(N, values[(N, t)]) for N, t in cells])
    except ValueError:
        est = None
    return est, rows


def run_bulk_imag(scn: Scenario, jobs: int = 1, deadline: float | None = None):
    """Largest imaginary part of the spectrum after excluding the outliers
    designated by the scenario's exclusion rule."""
    z0 = scn.target
    if scn.exclude > 0 and z0 is None:
        pred = designated_prediction(scn)
        z0 = pred.z0

    def cell(nt):
        N, trial = nt
        ev = spectrum(sample_perturbed(scn, N, trial))
        if scn.exclude > 0:
            ordered = order_by_distance(ev, z0)
            ev = ordered[scn.exclude:]
        return float(np.max(np.abs(ev.imag)))

    cells = [(N, t) for N in scn.N_grid for t in range(scn.trials)]
    try:
        values = _map_cells(cell, cells, jobs, deadline)
    except BudgetExceededError as exc:
        exc.rows = [_row(scn, N, t, "Delta", v) for (N, t), v in sorted(exc.partial.items())]
        raise
    rows = [_row(scn, N, t, "Delta", values[(N, t)]) for N, t in cells]
    try:
        est = fit_loglog([(N, values[(N, t)]) for N, t in cells])
    except ValueError:
        est = None
    return est, rows


def run_resolvent_error(scn: Scenario, grid=None, jobs: int = 1,
                        deadline: float | None = None):
    """Sup over a fixed probe grid of the max-norm resolvent error.

    Probe points must lie in the deformed window for every N in the grid;
    violators are dropped up front and reported, keeping the surviving
    grid identical across sizes so the slopes are comparable.
    """
    probes = list(grid if grid is not None else scn.grid)
    if not probes:
        raise ValueError("no probe points supplied")
    surviving, dropped = [], []
    for z in probes:
        ok = True
        for N in scn.N_grid:
            model = scenario_model(scn, N)
            params = DeformedWindowParams(
                beta=scn.beta, base=WindowParams(omega=scn.omega, N=N, beta=scn.beta))
            if not in_deformed_window(model, scn.law, z, params, N):
                ok = False
                break
        (surviving if ok else dropped).append(complex(z))
    if not surviving:
        raise ValueError("every probe point fell outside the deformed window")

    def cell(nt):
        N, trial = nt
        X = sample(ensemble_spec(scn.law, N, scn.seed, (N, trial))).astype(complex)
        model = scenario_model(scn, N)
        worst = 0.0
        for z in surviving:
            S = X - z * np.eye(N) + eval_perturbation(model, z)
            worst = max(worst, resolvent_error(S, model, scn.law, z))
        return worst

    cells = [(N, t) for N in scn.N_grid for t in range(scn.trials)]
    try:
        values = _map_cells(cell, cells, jobs, deadline)
    except BudgetExceededError as exc:
        exc.rows = [_row(scn, N, t, "sup_err", v) for (N, t), v in sorted(exc.partial.items())]
        raise
    rows = [_row(scn, N, t, "sup_err", values[(N, t)]) for N, t in cells]
    try:
        est = fit_loglog([(N, values[(N, t)]) for N, t in cells])
    except ValueError:
        est = None
    return est, rows, dropped


def run_window_scan(scn: Scenario, resolution: float = 0.05):
    """Boolean raster of the deformed window plus one sampled spectrum."""
    if scn.rect is None:
        raise ValueError("window scans need a raster rectangle")
    N = scn.N_grid[-1]
    model = scenario_model(scn, N)
    params = DeformedWindowParams(
        beta=scn.beta,
        base=WindowParams(omega=scn.omega, N=N, beta=scn.beta),
        jordan=scn.jordan,
    )
    raster = []
    xs = np.arange(scn.rect.x0, scn.rect.x1 + resolution / 2, resolution)
    ys = np.arange(scn.rect.y0, scn.rect.y1 + resolution / 2, resolution)
    for y in ys:
        for x in xs:
            inside = in_deformed_window(model, scn.law, complex(x, y), params, N)
            raster.append({
                "scenario": scn.name, "N": N,
                "x": float(x), "y": float(y), "inside": int(inside),
            })
    ev = spectrum(sample_perturbed(scn, N, 0))
    spectrum_rows = [
        {"scenario": scn.name, "N": N, "trial": 0, "seed": scn.seed,
         "re": float(v.real), "im": float(v.imag)}
        for v in ev
    ]
    return raster, spectrum_rows
