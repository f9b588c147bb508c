"""Subsystem spectra with automated basis-convergence escalation.

Every interacting spectrum is diagonalized in the unit box at the scaled
coupling g_eff = g * ell and rescaled by 1/ell^2 (see ``units``), so the
cache is one-dimensional in g_eff per particle number and basis size.
Convergence is certified by re-solving with an enlarged basis and requiring
the partition-function change |Delta ln Z| at the requested temperature to
fall below ``z_tol``; enlarging a basis is variational, so retained
eigenvalues can only move down.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import logsumexp

from .cache import CacheRecord, SpectrumCache
from .errors import ConvergenceError, InvalidParameterError
from .fock import ModeBasis, assemble_hamiltonian, build_fock_basis, lowest_eigenvalues
from .units import SubsystemKey

# initial mode counts per particle number; escalation grows them
_DEFAULT_MODES = {2: 26, 3: 18, 4: 13, 5: 10}


@dataclass
class BasisControls:
    """Truncation and solver knobs for subsystem diagonalization.

    ``n_modes``/``energy_cutoff`` of ``None`` pick per-particle-number
    defaults with the cutoff tied to the mode count, so escalation grows
    both together.  ``z_tol`` is the |Delta ln Z| convergence criterion at
    the requested temperature; ``trunc_tol`` bounds the Boltzmann weight of
    the first discarded level.  With ``strict`` unset, convergence failure
    is reported through the ``converged``/``residual`` fields instead of an
    exception (scan points must survive individual failures).
    """

    n_modes: int | None = None
    energy_cutoff: float | None = None
    z_tol: float = 1e-4
    trunc_tol: float = 1e-10
    delta_modes: int = 4
    max_escalations: int = 6
    max_dimension: int = 12000
    solver_tol: float = 1e-9
    dense_threshold: int = 4500
    strict: bool = True

    def relaxed(self) -> "BasisControls":
        return replace(self, strict=False)


@dataclass
class Spectrum:
    """Low-lying many-body eigenvalues of one subsystem, already rescaled.

    ``n_basis`` is the dimension of the Fock space the eigenvalues came
    from; when ``len(energies) == n_basis`` the truncated tail is empty by
    construction.  ``residual`` is the achieved |Delta ln Z| of the last
    basis-growth step (0 for analytic spectra).
    """

    energies: np.ndarray
    n: int
    length: float
    key: SubsystemKey
    converged: bool
    residual: float
    n_basis: int

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])

    @property
    def is_complete(self) -> bool:
        return len(self.energies) >= self.n_basis


def _log_z(energies: np.ndarray, temperature: float) -> float:
    e0 = energies[0]
    return float(-e0 / temperature + logsumexp(-(energies - e0) / temperature))


def _required_span(t_eff: float, trunc_tol: float) -> float:
    # levels must reach E0 + span with exp(-span/T) below the tail tolerance
    return max(np.log(1.0 / trunc_tol) * t_eff, 5.0)


def _auto_cutoff(n: int, n_modes: int, span: float) -> float:
    eps1 = np.pi**2 / 2.0
    by_modes = ((n - 1) + n_modes**2) * eps1
    by_span = n * eps1 + 1.6 * span
    return max(by_modes, by_span)


def _min_modes(span: float) -> int:
    # highest single-particle mode must reach the thermal window on its own
    return int(np.ceil(np.sqrt(1.0 + 2.4 * span / np.pi**2))) + 1


def _unit_record(
    n: int,
    g_eff: float,
    n_modes: int,
    energy_cutoff: float,
    span: float,
    controls: BasisControls,
    cache: SpectrumCache,
) -> CacheRecord | None:
    key = SubsystemKey(n=n, g_eff=g_eff, n_modes=n_modes, energy_cutoff=energy_cutoff)
    rec = cache.get(key)
    if rec is not None:
        covered = rec.energies[-1] - rec.energies[0] >= span or rec.k >= rec.dim
        if covered:
            return rec
    basis = build_fock_basis(n, n_modes, energy_cutoff)
    if basis.shape[0] > controls.max_dimension:
        return None  # escalation must stop here; caller handles
    mode_basis = ModeBasis(length=1.0, n_modes=n_modes)
    ham = assemble_hamiltonian(basis, g_eff, mode_basis, energy_cutoff)
    dim = ham.shape[0]
    cache.computed += 1
    if dim <= controls.dense_threshold:
        vals = lowest_eigenvalues(
            ham, dim, solver_tol=controls.solver_tol, dense_threshold=controls.dense_threshold
        )
    else:
        # iterative path: grow k until the thermal window is covered
        k = min(dim, 32)
        while True:
            vals = lowest_eigenvalues(
                ham, k, solver_tol=controls.solver_tol, dense_threshold=controls.dense_threshold
            )
            if vals[-1] - vals[0] >= span or k >= dim:
                break
            k = min(dim, 2 * k)
    keep = np.searchsorted(vals, vals[0] + 1.05 * span, side="right")
    keep = min(len(vals), max(int(keep) + 3, 8))
    rec = CacheRecord(key=key, energies=vals[:keep].copy(), dim=dim, solver_tol=controls.solver_tol)
    cache.put(rec)
    return rec


def subsystem_spectrum(
    n: int,
    length: float,
    coupling: float,
    t_max: float,
    controls: BasisControls | None = None,
    cache: SpectrumCache | None = None,
) -> Spectrum:
    """Thermally sufficient spectrum of ``n`` bosons in a box of length ``length``.

    ``t_max`` is the largest temperature (natural units) the spectrum will
    be used at; it fixes both the number of retained levels and the
    temperature at which basis convergence is certified.  ``length`` may be
    1 (full box); the empty box gives the vacuum spectrum {0}.
    """
    controls = controls or BasisControls()
    cache = cache if cache is not None else SpectrumCache()
    if n < 0:
        raise InvalidParameterError(f"particle number must be >= 0, got {n}")
    if not t_max > 0:
        raise InvalidParameterError(f"t_max must be positive, got {t_max}")
    if n == 0:
        key = SubsystemKey(n=0, g_eff=0.0, n_modes=0, energy_cutoff=np.inf)
        return Spectrum(np.zeros(1), 0, length, key, True, 0.0, 1)
    if not 0.0 < length <= 1.0:
        raise InvalidParameterError(f"length must be in (0, 1] for an occupied side, got {length}")

    t_eff = t_max * length**2
    span = _required_span(t_eff, controls.trunc_tol)

    if n == 1:
        # exact mode energies, no self-interaction
        k_top = _min_modes(span) + 2
        k = np.arange(1, k_top + 1, dtype=float)
        energies = k**2 * np.pi**2 / 2.0
        key = SubsystemKey(n=1, g_eff=0.0, n_modes=k_top, energy_cutoff=energies[-1])
        return Spectrum(energies / length**2, 1, length, key, True, 0.0, k_top)

    g_eff = coupling * length
    n_modes = max(controls.n_modes or _DEFAULT_MODES.get(n, 8), _min_modes(span))

    def cutoff_for(m: int) -> float:
        if controls.energy_cutoff is not None:
            grown = m - (controls.n_modes or m)
            return controls.energy_cutoff + grown * np.pi**2  # widen with escalation
        return _auto_cutoff(n, m, span)

    prev = _unit_record(n, g_eff, n_modes, cutoff_for(n_modes), span, controls, cache)
    if prev is None:
        raise ConvergenceError(
            f"initial basis for n={n}, g_eff={g_eff:.6g} already exceeds "
            f"max_dimension={controls.max_dimension}"
        )
    residual = np.inf
    for _ in range(controls.max_escalations):
        grown = n_modes + controls.delta_modes
        cur = _unit_record(n, g_eff, grown, cutoff_for(grown), span, controls, cache)
        if cur is None:
            break  # dimension budget exhausted; report the best basis so far
        residual = abs(_log_z(cur.energies, t_eff) - _log_z(prev.energies, t_eff))
        if residual < controls.z_tol:
            key = SubsystemKey(n=n, g_eff=g_eff, n_modes=grown, energy_cutoff=cutoff_for(grown))
            return Spectrum(
                cur.energies / length**2, n, length, key, True, residual, cur.dim
            )
        n_modes = grown
        prev = cur

    key = SubsystemKey(n=n, g_eff=g_eff, n_modes=n_modes, energy_cutoff=cutoff_for(n_modes))
    spectrum = Spectrum(prev.energies / length**2, n, length, key, False, residual, prev.dim)
    if controls.strict:
        raise ConvergenceError(
            f"basis growth exhausted for n={n}, g_eff={g_eff:.6g}: "
            f"|d lnZ| = {residual:.3e} > z_tol = {controls.z_tol:.1e}",
            residual=residual,
            payload=spectrum,
        )
    return spectrum
