"""Closed-form and semi-analytic reference engines.

Four baselines bracket the exact-diagonalization engine: the classical
cycle (exact closed form, temperature independent in reduced units), ideal
quantum gases via the canonical recursion

    Z_n = (1/n) sum_{k=1}^{n} (+-1)^{k+1} Z_1(k beta) Z_{n-k},

first-order perturbation theory for weak coupling at low temperature, and
the peak-temperature estimate k_B T* = -3 (N-1) g / L derived from the
interaction-energy cost of moving one boson across a centered wall.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.special import logsumexp

from .errors import InvalidParameterError, TruncationError
from .thermo import Ensemble
from .units import E1, EngineParams


def box_levels(length: float, count: int) -> np.ndarray:
    """Lowest ``count`` single-particle energies of a box of length ``length``."""
    if not length > 0:
        raise InvalidParameterError(f"length must be positive, got {length}")
    k = np.arange(1, count + 1, dtype=float)
    return k**2 * np.pi**2 / (2.0 * length**2)


def ideal_canonical_log_z(
    n: int,
    single_particle_energies: np.ndarray,
    temperature: float,
    statistics: str = "bose",
    check_levels: bool = True,
) -> float:
    """Exact n-particle canonical ln Z by the Z_1(k beta) recursion.

    ``statistics`` selects the sign convention: "bose" (+) or "fermi" (-).
    The whole recursion runs in (signed) log space, so low temperatures do
    not underflow.  When a physical (infinite) spectrum is being
    approximated the supplied levels must reach far enough that the top one
    is thermally irrelevant, otherwise a :class:`TruncationError` asks for
    escalation; ``check_levels=False`` skips that guard for genuinely
    finite level sets.
    """
    if n < 0:
        raise InvalidParameterError(f"particle number must be >= 0, got {n}")
    if statistics not in ("bose", "fermi"):
        raise InvalidParameterError(f"unknown statistics {statistics!r}")
    if n == 0:
        return 0.0
    e = np.sort(np.asarray(single_particle_energies, dtype=float))
    if e.size == 0:
        raise InvalidParameterError("at least one single-particle level is required")
    if statistics == "fermi" and n > e.size:
        return -np.inf  # Pauli exclusion leaves no state
    beta = 1.0 / temperature
    if check_levels and e.size > 1 and np.exp(-(e[-1] - e[0]) * beta) >= 1e-12:
        raise TruncationError(
            f"top level at {e[-1]:.4g} still thermally occupied at T={temperature:.4g}",
            hint="supply more single-particle levels",
        )

    log_z1 = np.array([logsumexp(-(k * beta) * e) for k in range(1, n + 1)])
    log_zn = [0.0]
    for m in range(1, n + 1):
        terms = np.array([log_z1[k - 1] + log_zn[m - k] for k in range(1, m + 1)])
        signs = np.array(
            [1.0 if statistics == "bose" else (-1.0) ** (k + 1) for k in range(1, m + 1)]
        )
        val, sgn = logsumexp(terms, b=signs, return_sign=True)
        if statistics == "fermi":
            # The alternating sum cancels down to ~eps * exp(largest term).
            # A result below the Pauli-filled ground configuration (which is
            # a strict lower bound on Z) is pure rounding noise; in that
            # regime the ground configuration itself is the better value
            # whenever the first excitation it neglects is smaller than the
            # recursion noise floor.
            log_ground = -beta * float(np.sum(e[:m]))
            candidate = float(val) - np.log(m)
            if not np.isfinite(candidate) or sgn <= 0 or candidate < log_ground:
                log_noise = float(np.max(terms)) + np.log(16 * np.finfo(float).eps)
                gap = e[m] - e[m - 1] if m < e.size else np.inf
                if log_ground - beta * gap <= log_noise + np.log(10.0):
                    log_zn.append(log_ground)
                    continue
                raise ArithmeticError(
                    "canonical recursion lost all significant digits "
                    f"(fermionic cancellation at n={m}, T={temperature:.4g})"
                )
        log_zn.append(float(val) - np.log(m))
    return log_zn[n]


class IdealEnsemble(Ensemble):
    """Non-interacting quantum gas via the canonical recursion."""

    def __init__(self, params: EngineParams, statistics: str = "bose"):
        super().__init__(params)
        if statistics not in ("bose", "fermi"):
            raise InvalidParameterError(f"unknown statistics {statistics!r}")
        self.statistics = statistics
        self.kind = f"ideal-{statistics}"

    def _level_count(self, length: float) -> int:
        # ground level plus a window of ln(1e12 + margin) * T in energy
        span = 30.0 * self.params.temperature
        k_top = np.sqrt(1.0 + 2.0 * span * length**2 / np.pi**2)
        return max(int(np.ceil(k_top)) + 2, 4)

    def side_log_z(self, n: int, length: float) -> float:
        if n == 0:
            return 0.0
        levels = box_levels(length, self._level_count(length))
        return ideal_canonical_log_z(n, levels, self.params.temperature, self.statistics)


# ---------------------------------------------------------------------------
# classical engine
# ---------------------------------------------------------------------------

class ClassicalEnsemble(Ensemble):
    """Distinguishable classical particles: Z_n(ell) proportional to ell^n / n!.

    The thermal-wavelength factor is the same for every left-count and
    cancels from all probabilities and work differences, so it is dropped.
    Outcome probabilities are binomial, wall insertion costs nothing, and
    p_m(ell) peaks at m/N, reproducing the closed form of
    :func:`classical_work` through the generic cycle machinery.
    """

    kind = "classical"

    def side_log_z(self, n: int, length: float) -> float:
        if n == 0:
            return 0.0
        return n * np.log(length) - sum(np.log(k) for k in range(2, n + 1))


def classical_work(n_particles: int, insertion: float) -> float:
    """Average classical cycle work in units of k_B T.

    Outcome probabilities are binomial, the all-left/all-right outcomes
    expand to the full box, and outcome m removes the wall at m/N (the
    optimal classical removal); the binomial prefactor cancels from the
    probability ratio.
    """
    if n_particles < 1:
        raise InvalidParameterError(f"n_particles must be >= 1, got {n_particles}")
    if not 0.0 < insertion < 1.0:
        raise InvalidParameterError(f"insertion must be in (0, 1), got {insertion}")
    big, x = n_particles, insertion
    work = -big * (x**big * np.log(x) + (1.0 - x) ** big * np.log1p(-x))
    for m in range(1, big):
        p = comb(big, m) * x**m * (1.0 - x) ** (big - m)
        log_ratio = m * (np.log(x) - np.log(m / big)) + (big - m) * (
            np.log1p(-x) - np.log(1.0 - m / big)
        )
        work -= p * log_ratio
    return work


def classical_optimum(
    n_particles: int, grid_points: int = 199, xtol: float = 1e-7
) -> tuple[float, float]:
    """Maximize the classical work over the insertion point.

    Returns (insertion, work/kT); ties between mirror maxima resolve toward
    the centered insertion.
    """
    from .search import golden_max  # local import avoids a cycle

    grid = np.linspace(0.005, 0.995, grid_points)
    vals = np.array([classical_work(n_particles, x) for x in grid])
    best_x, best_w = 0.5, classical_work(n_particles, 0.5)
    for i in range(len(grid)):
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, len(grid) - 1)]
        if vals[i] >= vals[max(i - 1, 0)] and vals[i] >= vals[min(i + 1, len(grid) - 1)]:
            x, w = golden_max(lambda t: classical_work(n_particles, t), lo, hi, xtol)
            better = w > best_w * (1 + 1e-12)
            tie = abs(w - best_w) <= abs(best_w) * 1e-12
            if better or (tie and abs(x - 0.5) < abs(best_x - 0.5)):
                best_x, best_w = x, w
    return best_x, best_w


# ---------------------------------------------------------------------------
# first-order perturbation theory
# ---------------------------------------------------------------------------

def pair_interaction_energy(length: float, coupling: float) -> float:
    """First-order energy 3g/(2 ell) of one boson pair in the lowest mode."""
    if not length > 0:
        raise InvalidParameterError(f"length must be positive, got {length}")
    return 3.0 * coupling / (2.0 * length)


@dataclass(frozen=True)
class PerturbativeLevels:
    """Lowest-configuration energies of the split box at first order in g."""

    n_left: int
    n_total: int
    wall: float
    coupling: float

    def __post_init__(self):
        if not 0 <= self.n_left <= self.n_total:
            raise InvalidParameterError("n_left must be within [0, n_total]")
        if not 0.0 <= self.wall <= 1.0:
            raise InvalidParameterError("wall must be within [0, 1]")

    @property
    def valid(self) -> bool:
        """Weak-coupling flag |g| << pi^2 g0 / (N - 1)."""
        if self.n_total < 2:
            return True
        return abs(self.coupling) * (self.n_total - 1) <= 0.1 * np.pi**2

    def _side(self, m: int, length: float) -> float:
        if m == 0:
            return 0.0
        if length == 0.0:
            return np.inf
        kinetic = m * E1 / length**2
        shift = 0.0 if m < 2 else (m * (m - 1) / 2.0) * pair_interaction_energy(length, self.coupling)
        return kinetic + shift

    @property
    def kinetic(self) -> float:
        left = 0.0 if self.n_left == 0 else self.n_left * E1 / self.wall**2
        rest = self.n_total - self.n_left
        right = 0.0 if rest == 0 else rest * E1 / (1.0 - self.wall) ** 2
        return left + right

    @property
    def shift(self) -> float:
        return self.total - self.kinetic

    @property
    def total(self) -> float:
        return self._side(self.n_left, self.wall) + self._side(
            self.n_total - self.n_left, 1.0 - self.wall
        )


def perturbative_energy(n_left: int, n_total: int, wall: float, coupling: float) -> float:
    """Lowest configuration energy with n_left particles left of the wall."""
    return PerturbativeLevels(n_left, n_total, wall, coupling).total


class PerturbativeEnsemble(Ensemble):
    """Single-configuration Boltzmann weights from first-order energies.

    Valid for weak coupling at temperatures well below the level spacing;
    at g = 0 and a centered wall every left-count is degenerate, so all
    outcomes are equiprobable.  ``valid`` mirrors the weak-coupling flag.
    """

    kind = "perturbative"

    def __init__(self, params: EngineParams):
        super().__init__(params)

    @property
    def valid(self) -> bool:
        return PerturbativeLevels(0, self.params.n_particles, 0.5, self.params.coupling).valid

    def side_log_z(self, n: int, length: float) -> float:
        if n == 0:
            return 0.0
        levels = PerturbativeLevels(n, n, length, self.params.coupling)
        return -levels.total / self.params.temperature


def peak_temperature_estimate(n_particles: int, coupling: float) -> float:
    """Temperature scale -3 (N-1) g / L where outcomes beyond 0/N open up.

    Returns k_B T in natural units; equals 0.608 (N-1) |g/g0| E1.  Only
    attractive couplings cluster, so g >= 0 is out of domain.
    """
    if n_particles < 2:
        raise InvalidParameterError("the estimate needs at least two particles")
    if coupling >= 0:
        raise InvalidParameterError(f"peak estimate requires g < 0, got {coupling}")
    return -3.0 * (n_particles - 1) * coupling
