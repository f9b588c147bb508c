"""The four-step measurement cycle: works, optimization and sweeps.

Cycle steps at temperature T (quasi-static, single heat bath): (i) insert a
wall at ell_ins, (ii) measure the left particle count n at zero work cost,
(iii) move the wall to a removal position rem_n, (iv) withdraw it.  Each
step's work is a free-energy difference, and the sum telescopes into the
closed form

    W / k_B T = -sum_n p_n(ell_ins) ln[ p_n(ell_ins) / p_n(rem_n) ],

which is what ``work_total`` reports (the step works are exposed too; their
sum agrees with the closed form to rounding).  All works are returned in
units of k_B T and the figure of merit is W / (k_B T ln 2).

A plan is optimal when each rem_n maximizes p_n(ell); remarkably the
removal positions do not depend on the insertion point, which makes
insertion scans cheap once the removals are known.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .baselines import (
    ClassicalEnsemble,
    IdealEnsemble,
    PerturbativeEnsemble,
    peak_temperature_estimate,
)
from .cache import SpectrumCache
from .errors import InvalidParameterError, QszilardError
from .search import golden_max, local_maxima, parabolic_peak
from .spectrum import BasisControls
from .thermo import Ensemble, ExactEnsemble, outcome_distribution, shannon_information
from .units import E1, EngineParams

LN2 = np.log(2.0)

EnsembleKind = Literal["exact", "ideal-bose", "ideal-fermi", "perturbative", "classical"]


def make_ensemble(
    params: EngineParams,
    kind: EnsembleKind = "exact",
    controls: BasisControls | None = None,
    cache: SpectrumCache | None = None,
) -> Ensemble:
    if kind == "exact":
        return ExactEnsemble(params, controls=controls, cache=cache)
    if kind == "ideal-bose":
        return IdealEnsemble(params, statistics="bose")
    if kind == "ideal-fermi":
        return IdealEnsemble(params, statistics="fermi")
    if kind == "perturbative":
        return PerturbativeEnsemble(params)
    if kind == "classical":
        return ClassicalEnsemble(params)
    raise InvalidParameterError(f"unknown ensemble kind {kind!r}")


@dataclass
class CyclePlan:
    """Insertion point plus one removal position per measurement outcome."""

    insertion: float
    removals: np.ndarray

    def __post_init__(self):
        self.removals = np.asarray(self.removals, dtype=float)
        if not 0.0 < self.insertion < 1.0:
            raise InvalidParameterError(f"insertion must be in (0, 1), got {self.insertion}")
        if np.any(self.removals < 0.0) or np.any(self.removals > 1.0):
            raise InvalidParameterError("removal positions must lie in [0, 1]")

    @property
    def n_outcomes(self) -> int:
        return len(self.removals)


@dataclass
class WorkBreakdown:
    """Per-step works (units of k_B T) and the cycle total.

    ``w_total`` is the closed form; ``w_insert + w_measure + w_expand +
    w_remove`` reproduces it to rounding.  ``ratio`` is W/W1 with
    W1 = k_B T ln 2 and ``info`` the Shannon information of the
    measurement, an upper bound on w_total.
    """

    w_insert: float
    w_measure: float
    w_expand: float
    w_remove: float
    w_total: float
    info: float
    ratio: float
    plan: CyclePlan
    probabilities: np.ndarray
    removal_probabilities: np.ndarray
    converged: bool = True
    note: str | None = None

    @property
    def step_sum(self) -> float:
        return self.w_insert + self.w_measure + self.w_expand + self.w_remove


def work_insertion(insertion: float, ensemble: Ensemble) -> float:
    """Step (i): k_BT ln[sum_n Z_n(ell_ins) / Z_N(L)], typically negative."""
    if not 0.0 < insertion < 1.0:
        raise InvalidParameterError(f"insertion must be in (0, 1), got {insertion}")
    dist = outcome_distribution(ensemble, insertion)
    return dist.log_normalization - ensemble.full_log_z()


def work_expansion(plan: CyclePlan, ensemble: Ensemble) -> float:
    """Step (iii): mean work of sliding the wall to its outcome position."""
    dist = outcome_distribution(ensemble, plan.insertion)
    total = 0.0
    for n, p in enumerate(dist.probabilities):
        if p <= 0.0:
            continue
        d_rem = outcome_distribution(ensemble, plan.removals[n])
        total += p * (d_rem.per_outcome_log_z[n] - dist.per_outcome_log_z[n])
    return total


def work_removal(plan: CyclePlan, ensemble: Ensemble) -> float:
    """Step (iv): mean work of withdrawing the wall (irreversible if p_n < 1)."""
    dist = outcome_distribution(ensemble, plan.insertion)
    log_z_full = ensemble.full_log_z()
    total = 0.0
    for n, p in enumerate(dist.probabilities):
        if p <= 0.0:
            continue
        d_rem = outcome_distribution(ensemble, plan.removals[n])
        total += p * (log_z_full - d_rem.log_normalization)
    return total


def work_total(plan: CyclePlan, ensemble: Ensemble) -> WorkBreakdown:
    """Evaluate a full cycle; see the module docstring for conventions."""
    if plan.n_outcomes != ensemble.params.n_particles + 1:
        raise InvalidParameterError(
            f"plan has {plan.n_outcomes} removals, expected {ensemble.params.n_particles + 1}"
        )
    ensemble.reset_convergence()
    dist = outcome_distribution(ensemble, plan.insertion)
    log_z_full = ensemble.full_log_z()
    lse_ins = dist.log_normalization

    rem_dists = {}
    for n, p in enumerate(dist.probabilities):
        if p > 0.0:
            pos = float(plan.removals[n])
            if pos not in rem_dists:
                rem_dists[pos] = outcome_distribution(ensemble, pos)

    w_insert = lse_ins - log_z_full
    w_expand = 0.0
    w_remove = 0.0
    w_closed = 0.0
    p_rem = np.zeros_like(dist.probabilities)
    for n, p in enumerate(dist.probabilities):
        if p <= 0.0:
            continue
        d_rem = rem_dists[float(plan.removals[n])]
        log_p_ins = dist.per_outcome_log_z[n] - lse_ins
        log_p_rem = d_rem.per_outcome_log_z[n] - d_rem.log_normalization
        p_rem[n] = np.exp(log_p_rem)
        w_expand += p * (d_rem.per_outcome_log_z[n] - dist.per_outcome_log_z[n])
        w_remove += p * (log_z_full - d_rem.log_normalization)
        w_closed -= p * (log_p_ins - log_p_rem)

    return WorkBreakdown(
        w_insert=w_insert,
        w_measure=0.0,
        w_expand=w_expand,
        w_remove=w_remove,
        w_total=w_closed,
        info=shannon_information(dist),
        ratio=w_closed / LN2,
        plan=plan,
        probabilities=dist.probabilities,
        removal_probabilities=p_rem,
        converged=ensemble.converged,
    )


# ---------------------------------------------------------------------------
# optimization
# ---------------------------------------------------------------------------

def _probability(ensemble: Ensemble, ell: float, n: int) -> float:
    return float(outcome_distribution(ensemble, ell).probabilities[n])


def optimize_removals(
    ensemble: Ensemble,
    insertion: float = 0.5,
    grid_points: int = 101,
    xtol: float = 1e-5,
    refine: Literal["golden", "parabolic"] = "golden",
) -> CyclePlan:
    """Plan with each removal maximizing p_n(ell).

    A uniform grid (default 101 points, endpoints included as exact limits)
    brackets each maximum and a golden-section pass refines it to ``xtol``.
    ``refine="parabolic"`` replaces the golden pass with a single quadratic
    interpolation step, trading ~1e-4 positional accuracy for one function
    evaluation; the work is quadratically insensitive to removal error, so
    temperature searches use this cheap mode and re-optimize at the end.
    By mirror symmetry the optimum for N - n is one minus the optimum for
    n, so only half the outcomes need a search.
    """
    if grid_points < 3:
        raise InvalidParameterError("grid needs at least 3 points")
    big = ensemble.params.n_particles
    grid = np.linspace(0.0, 1.0, grid_points)
    table = np.array([outcome_distribution(ensemble, x).probabilities for x in grid])
    removals = np.empty(big + 1)
    for n in range(big // 2 + 1):
        col = table[:, n]
        i = int(np.argmax(col))
        if col[i] <= 0.0:
            # outcome fully suppressed at this temperature; a degenerate
            # endpoint would fake p_n = 0 exactly, the center is harmless
            best = 0.5
        elif col[i] >= 1.0 - 1e-12 or i in (0, len(grid) - 1):
            best = grid[i]
        elif refine == "parabolic":
            best, _ = parabolic_peak(
                lambda x: _probability(ensemble, x, n),
                (grid[i - 1], grid[i], grid[i + 1]),
                (col[i - 1], col[i], col[i + 1]),
            )
        else:
            best, fbest = golden_max(
                lambda x: _probability(ensemble, x, n), grid[i - 1], grid[i + 1], xtol
            )
            if fbest < col[i]:
                best = grid[i]
        removals[n] = best
        removals[big - n] = 1.0 - best
    return CyclePlan(insertion=insertion, removals=removals)


@dataclass
class InsertionOptimum:
    """Best insertion plus every local maximum (bifurcation tracking)."""

    plan: CyclePlan
    breakdown: WorkBreakdown
    maxima: list[tuple[float, float]] = field(default_factory=list)


def optimize_insertion(
    ensemble: Ensemble,
    search_grid: np.ndarray | None = None,
    xtol: float = 1e-5,
    removal_kwargs: dict | None = None,
) -> InsertionOptimum:
    """Maximize the cycle work over the insertion point.

    The removal plan is insertion-independent, so it is optimized once and
    the insertion landscape is then cheap.  Every local grid maximum is
    golden-refined and reported (the high-temperature landscape splits into
    symmetric twins); ties break toward the centered insertion.  A probe
    just right of center catches splittings narrower than the grid spacing.
    """
    grid = (
        np.asarray(search_grid, dtype=float)
        if search_grid is not None
        else np.linspace(0.005, 0.995, 199)
    )
    if np.any(grid <= 0.0) or np.any(grid >= 1.0):
        raise InvalidParameterError("insertion grid must lie strictly inside (0, 1)")
    base = optimize_removals(ensemble, insertion=0.5, **(removal_kwargs or {}))
    rem_dists = [outcome_distribution(ensemble, x) for x in base.removals]
    log_p_rem = np.array(
        [d.per_outcome_log_z[n] - d.log_normalization for n, d in enumerate(rem_dists)]
    )

    def work_at(x: float) -> float:
        dist = outcome_distribution(ensemble, x)
        log_p = dist.per_outcome_log_z - dist.log_normalization
        p = np.exp(log_p)
        mask = p > 0.0
        return float(-np.sum(p[mask] * (log_p[mask] - log_p_rem[mask])))

    values = np.array([work_at(x) for x in grid])
    candidates: list[tuple[float, float]] = []
    for i in local_maxima(values):
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, len(grid) - 1)]
        x, w = golden_max(work_at, lo, hi, xtol)
        if values[i] > w:
            x, w = grid[i], values[i]
        candidates.append((x, w))

    # symmetric landscapes can split just off-center below grid resolution
    center = np.argmin(np.abs(grid - 0.5))
    if abs(grid[center] - 0.5) < 1e-12:
        spacing = grid[1] - grid[0]
        x, w = golden_max(work_at, 0.5, 0.5 + 2.0 * spacing, xtol)
        if w > work_at(0.5):
            candidates.append((x, w))

    # dedupe by position, keep the better value
    candidates.sort()
    maxima: list[tuple[float, float]] = []
    for x, w in candidates:
        if maxima and abs(x - maxima[-1][0]) < 5.0 * xtol:
            if w > maxima[-1][1]:
                maxima[-1] = (x, w)
        else:
            maxima.append((x, w))

    w_best = max(w for _, w in maxima)
    # an optimal plan never loses work, so flat stretches of the landscape
    # sit at zero; drop their rounding-level wiggles from the report
    floor = 1e-9 + 1e-6 * abs(w_best)
    maxima = [(x, w) for x, w in maxima if w > floor] or maxima[:1]
    tied = [(x, w) for x, w in maxima if w >= w_best - 1e-12 * max(abs(w_best), 1.0)]
    x_best = min(tied, key=lambda t: abs(t[0] - 0.5))[0]
    plan = CyclePlan(insertion=x_best, removals=base.removals)
    return InsertionOptimum(plan=plan, breakdown=work_total(plan, ensemble), maxima=maxima)


# ---------------------------------------------------------------------------
# sweeps and peak finding
# ---------------------------------------------------------------------------

@dataclass
class ScanPoint:
    axis: str
    value: float
    breakdown: WorkBreakdown | None
    error: str | None = None

    @property
    def converged(self) -> bool:
        return self.breakdown is not None and self.breakdown.converged and self.error is None


def scan(
    params: EngineParams,
    axis: Literal["temperature", "coupling", "insertion"],
    values: np.ndarray,
    kind: EnsembleKind = "exact",
    insertion: float = 0.5,
    controls: BasisControls | None = None,
    cache: SpectrumCache | None = None,
    removal_kwargs: dict | None = None,
) -> list[ScanPoint]:
    """Sweep one axis, emitting every point even when a point fails.

    ``values`` must be monotone (axis values are also the merge key, so the
    sweep is deterministic and, through the spectrum cache, resumable).
    Temperatures are in natural units here; the CLI converts from k_BT/E1.
    """
    values = np.asarray(values, dtype=float)
    if len(values) == 0:
        raise InvalidParameterError("scan needs at least one axis value")
    diffs = np.diff(values)
    if len(diffs) and not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise InvalidParameterError("scan values must be strictly monotone")
    cache = cache if cache is not None else SpectrumCache()
    points: list[ScanPoint] = []
    shared_plan: CyclePlan | None = None
    for v in values:
        try:
            if axis == "temperature":
                p = params.with_temperature(float(v))
                ens = make_ensemble(p, kind, controls, cache)
                plan = optimize_removals(ens, insertion, **(removal_kwargs or {}))
            elif axis == "coupling":
                p = EngineParams(params.n_particles, float(v), params.temperature)
                ens = make_ensemble(p, kind, controls, cache)
                plan = optimize_removals(ens, insertion, **(removal_kwargs or {}))
            elif axis == "insertion":
                ens = make_ensemble(params, kind, controls, cache)
                if shared_plan is None:
                    shared_plan = optimize_removals(ens, insertion, **(removal_kwargs or {}))
                plan = CyclePlan(insertion=float(v), removals=shared_plan.removals)
            else:
                raise InvalidParameterError(f"unknown scan axis {axis!r}")
            points.append(ScanPoint(axis, float(v), work_total(plan, ens)))
        except QszilardError as exc:
            points.append(ScanPoint(axis, float(v), None, error=str(exc)))
    return points


@dataclass
class PeakResult:
    temperature: float  # natural units
    ratio: float
    breakdown: WorkBreakdown

    @property
    def temperature_e1(self) -> float:
        return self.temperature / E1


def find_peak(
    params: EngineParams,
    coupling: float | None = None,
    kind: EnsembleKind = "exact",
    insertion: float = 0.5,
    controls: BasisControls | None = None,
    cache: SpectrumCache | None = None,
    t_tol: float = 1e-3 * E1,
    bracket_decades: tuple[float, float] = (0.3, 8.0),
    bracket_points: int = 9,
    grid_points: int = 101,
) -> PeakResult:
    """Maximize W/W1 over temperature for an attractively coupled engine.

    The initial bracket comes from the interaction-energy estimate
    k_B T* ~ -3 (N-1) g; a geometric pre-scan locates the global maximum
    (falling back to bracket widening when it sits on an edge) and a
    golden-section pass narrows it to ``t_tol``.  Pre-scan and golden
    iterations use single-step parabolic removal refinement; the reported
    breakdown is recomputed with the full golden removal optimization.
    """
    g = params.coupling if coupling is None else float(coupling)
    if g >= 0:
        raise InvalidParameterError(f"find_peak requires attractive coupling, got g={g}")
    cache = cache if cache is not None else SpectrumCache()
    t_star = peak_temperature_estimate(params.n_particles, g)

    def ratio_at(t: float) -> float:
        p = EngineParams(params.n_particles, g, t)
        ens = make_ensemble(p, kind, controls, cache)
        plan = optimize_removals(
            ens, insertion, grid_points=grid_points, refine="parabolic"
        )
        return work_total(plan, ens).ratio

    lo, hi = bracket_decades
    ts = np.geomspace(t_star * lo, t_star * hi, bracket_points)
    rs = np.array([ratio_at(t) for t in ts])
    for _ in range(3):  # widen if the maximum sits on a scan edge
        i = int(np.argmax(rs))
        if i == 0:
            ts = np.concatenate([np.geomspace(ts[0] / 8.0, ts[0], 4)[:-1], ts])
            rs = np.concatenate([[ratio_at(t) for t in ts[:3]], rs])
        elif i == len(ts) - 1:
            ts = np.concatenate([ts, np.geomspace(ts[-1], ts[-1] * 8.0, 4)[1:]])
            rs = np.concatenate([rs, [ratio_at(t) for t in ts[-3:]]])
        else:
            break
    i = int(np.argmax(rs))
    a = ts[max(i - 1, 0)]
    b = ts[min(i + 1, len(ts) - 1)]
    t_best, _ = golden_max(ratio_at, a, b, t_tol)

    p = EngineParams(params.n_particles, g, t_best)
    ens = make_ensemble(p, kind, controls, cache)
    plan = optimize_removals(ens, insertion, grid_points=grid_points, refine="golden")
    breakdown = work_total(plan, ens)
    return PeakResult(temperature=t_best, ratio=breakdown.ratio, breakdown=breakdown)
