"""Canonical-ensemble layer: partition functions and outcome probabilities.

A wall at position ell splits the box into independent left/right
subsystems (the contact interaction acts only within a side), so the
composite partition function with n particles on the left factorizes:

    ln Z_n(ell) = ln Z_n^side(ell) + ln Z_{N-n}^side(1 - ell).

All probability arithmetic stays in log space with a single log-sum-exp
per distribution; at low temperature the p_n span hundreds of orders of
magnitude.  The degenerate wall positions ell in {0, 1} are exact limits:
the empty side contributes ln Z = 0 and the particle count is forced.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .cache import SpectrumCache
from .errors import InvalidParameterError, TruncationError
from .spectrum import BasisControls, Spectrum, subsystem_spectrum
from .units import EngineParams


@dataclass(frozen=True)
class PartitionValue:
    """ln Z together with the ground-state shift used to stabilize it."""

    log_z: float
    ground_energy_offset: float


def partition_function(
    spectrum: Spectrum, temperature: float, trunc_tol: float = 1e-10
) -> PartitionValue:
    """Canonical ln Z = ln sum_j exp(-E_j / T) from a retained spectrum.

    Refuses when the spectrum is truncated and the first discarded level
    would still carry Boltzmann weight above ``trunc_tol`` at this
    temperature.
    """
    if not temperature > 0:
        raise InvalidParameterError(f"temperature must be positive, got {temperature}")
    e = np.asarray(spectrum.energies, dtype=float)
    e0 = e[0]
    span = e[-1] - e0
    if not spectrum.is_complete and np.exp(-span / temperature) >= trunc_tol:
        raise TruncationError(
            f"spectrum spans only {span:.4g} above the ground state, "
            f"insufficient at temperature {temperature:.4g}",
            hint="recompute the spectrum with a larger t_max or energy cutoff",
        )
    return PartitionValue(
        log_z=float(-e0 / temperature + logsumexp(-(e - e0) / temperature)),
        ground_energy_offset=float(e0),
    )


@dataclass
class OutcomeDistribution:
    """Probabilities p_0..p_N of finding n particles left of the wall."""

    wall_position: float
    probabilities: np.ndarray
    per_outcome_log_z: np.ndarray

    def __post_init__(self):
        self.probabilities = np.asarray(self.probabilities, dtype=float)
        self.per_outcome_log_z = np.asarray(self.per_outcome_log_z, dtype=float)

    @property
    def log_normalization(self) -> float:
        return float(logsumexp(self.per_outcome_log_z))


def shannon_information(dist: OutcomeDistribution) -> float:
    """Measurement information I = -sum_n p_n ln p_n (0 ln 0 := 0)."""
    p = dist.probabilities
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


class Ensemble:
    """Provider of composite ln Z_n(ell) at a fixed engine configuration.

    Subclasses implement ``side_log_z`` for one subsystem; the two box
    sides are physically identical up to length.  Convergence bookkeeping
    is a no-op here and overridden by the exact-diagonalization ensemble.
    """

    kind = "abstract"

    def __init__(self, params: EngineParams):
        self.params = params

    def side_log_z(self, n: int, length: float) -> float:
        raise NotImplementedError

    def composite_log_z(self, n: int, ell: float) -> float:
        big = self.params.n_particles
        if not 0 <= n <= big:
            raise InvalidParameterError(f"left count must be in [0, {big}], got {n}")
        if not 0.0 <= ell <= 1.0:
            raise InvalidParameterError(f"wall position must be in [0, 1], got {ell}")
        if ell == 0.0:
            return self.side_log_z(big, 1.0) if n == 0 else -np.inf
        if ell == 1.0:
            return self.side_log_z(big, 1.0) if n == big else -np.inf
        return self.side_log_z(n, ell) + self.side_log_z(big - n, 1.0 - ell)

    def full_log_z(self) -> float:
        return self.side_log_z(self.params.n_particles, 1.0)

    def outcome_log_zs(self, ell: float) -> np.ndarray:
        return np.array(
            [self.composite_log_z(n, ell) for n in range(self.params.n_particles + 1)]
        )

    # convergence bookkeeping (trivial for analytic ensembles)
    def reset_convergence(self):
        pass

    @property
    def converged(self) -> bool:
        return True

    @property
    def worst_residual(self) -> float:
        return 0.0


class ExactEnsemble(Ensemble):
    """Ensemble backed by exact diagonalization of each subsystem.

    Spectra come from the shared cache and are certified at the ensemble
    temperature; convergence failures are recorded (not raised) so that
    sweeps can flag individual points.
    """

    kind = "exact"

    def __init__(
        self,
        params: EngineParams,
        controls: BasisControls | None = None,
        cache: SpectrumCache | None = None,
    ):
        super().__init__(params)
        self.controls = (controls or BasisControls()).relaxed()
        self.cache = cache if cache is not None else SpectrumCache()
        self._converged = True
        self._worst_residual = 0.0

    def spectrum(self, n: int, length: float) -> Spectrum:
        spec = subsystem_spectrum(
            n,
            length,
            self.params.coupling,
            t_max=self.params.temperature,
            controls=self.controls,
            cache=self.cache,
        )
        if not spec.converged:
            self._converged = False
        if np.isfinite(spec.residual):
            self._worst_residual = max(self._worst_residual, spec.residual)
        return spec

    def side_log_z(self, n: int, length: float) -> float:
        if n == 0:
            return 0.0
        spec = self.spectrum(n, length)
        return partition_function(
            spec, self.params.temperature, self.controls.trunc_tol
        ).log_z

    def reset_convergence(self):
        self._converged = True
        self._worst_residual = 0.0

    @property
    def converged(self) -> bool:
        return self._converged

    @property
    def worst_residual(self) -> float:
        return self._worst_residual


def outcome_distribution(ensemble: Ensemble, ell: float) -> OutcomeDistribution:
    """Measurement outcome probabilities p_n(ell) = Z_n(ell) / sum Z_n'(ell)."""
    log_zs = ensemble.outcome_log_zs(ell)
    probs = np.exp(log_zs - logsumexp(log_zs))
    return OutcomeDistribution(
        wall_position=ell, probabilities=probs, per_outcome_log_z=log_zs
    )
