"""Physical parameters, the natural-unit convention and the box scaling law.

All internal arithmetic uses natural units hbar = m = L = 1, where L is the
full box length.  In these units the coupling unit is g0 = hbar^2/(L m) = 1,
the single-particle ground-state energy of the full box is E1 = pi^2/2, and
k_B is absorbed into the temperature (temperatures are energies).  Reduced
quantities (k_B T / E1, g / g0, W / (k_B T ln 2)) appear only at the I/O
boundary.

The scaling law implemented by :func:`scale_spectrum` lets every subsystem
spectrum be computed in a unit-length box: rescaling a box of length ``ell``
to unit length multiplies kinetic energies by ``ell**2`` and turns the
contact coupling ``g`` into ``g * ell``, so

    E_i(ell, g) = E_i(1, g * ell) / ell**2.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidParameterError

# Single-particle ground-state energy of the unit box, natural units.
E1 = np.pi**2 / 2.0
# Coupling unit hbar^2/(L m); identically 1 in natural units.
G0 = 1.0


@dataclass(frozen=True)
class EngineParams:
    """Dimensionless engine configuration in natural units.

    ``coupling`` is the contact-interaction strength in units of g0 (may be
    negative, zero or positive) and ``temperature`` is k_B*T in natural
    energy units, i.e. ``temperature = (k_B T / E1) * E1``.
    """

    n_particles: int
    coupling: float
    temperature: float
    box_length: float = 1.0

    def __post_init__(self):
        if self.n_particles < 1:
            raise InvalidParameterError(f"n_particles must be >= 1, got {self.n_particles}")
        if not self.temperature > 0:
            raise InvalidParameterError(f"temperature must be positive, got {self.temperature}")
        if self.box_length != 1.0:
            raise InvalidParameterError("box_length is fixed to 1 after normalization")

    @property
    def beta(self) -> float:
        return 1.0 / self.temperature

    @property
    def temperature_e1(self) -> float:
        """Temperature in the reduced unit k_B T / E1."""
        return self.temperature / E1

    @classmethod
    def from_reduced(cls, n_particles: int, coupling: float, temperature_e1: float) -> "EngineParams":
        """Build params from the reduced units used on the wire (g/g0, k_BT/E1)."""
        return cls(n_particles=n_particles, coupling=coupling, temperature=temperature_e1 * E1)

    def with_temperature(self, temperature: float) -> "EngineParams":
        return replace(self, temperature=temperature)


@dataclass(frozen=True)
class RawParameters:
    """Engine parameters with explicit units (any consistent unit system).

    ``coupling`` carries dimensions of energy*length, ``kb_temperature`` of
    energy; ``box_length``, ``mass`` and ``hbar`` set the unit system.
    """

    n_particles: int
    box_length: float = 1.0
    mass: float = 1.0
    hbar: float = 1.0
    coupling: float = 0.0
    kb_temperature: float = 1.0


def normalize(raw: RawParameters | EngineParams) -> EngineParams:
    """Convert dimensional parameters to natural units (idempotent).

    The natural energy unit is hbar^2/(m L^2); couplings are divided by
    g0 = hbar^2/(L m).  Passing an already-normalized :class:`EngineParams`
    returns it unchanged.
    """
    if isinstance(raw, EngineParams):
        return raw
    if raw.box_length <= 0 or raw.mass <= 0 or raw.hbar <= 0:
        raise InvalidParameterError("box_length, mass and hbar must be positive")
    if raw.kb_temperature <= 0:
        raise InvalidParameterError("kb_temperature must be positive")
    energy_unit = raw.hbar**2 / (raw.mass * raw.box_length**2)
    g0 = raw.hbar**2 / (raw.box_length * raw.mass)
    return EngineParams(
        n_particles=raw.n_particles,
        coupling=raw.coupling / g0,
        temperature=raw.kb_temperature / energy_unit,
    )


def scale_spectrum(unit_box_energies: np.ndarray, length: float) -> np.ndarray:
    """Rescale a unit-box spectrum to a box of length ``length`` <= 1.

    The input must have been computed at the scaled coupling g*length for
    the identity E_i(length, g) = E_i(1, g*length) / length**2 to hold.
    Ordering is preserved (positive scale factor).
    """
    if not 0.0 < length <= 1.0:
        raise InvalidParameterError(f"length must be in (0, 1], got {length}")
    return np.asarray(unit_box_energies, dtype=float) / length**2


def round_sig(x: float, digits: int = 12) -> float:
    """Round to ``digits`` significant digits (cache-key canonicalization)."""
    if x == 0.0 or not np.isfinite(x):
        return float(x)
    return float(f"{x:.{digits}g}")


@dataclass(frozen=True)
class SubsystemKey:
    """Cache key for a unit-box subsystem spectrum.

    Two subsystems with equal keys have identical unit-box spectra by the
    scaling law; ``g_eff`` is rounded to 12 significant digits so that wall
    positions differing only by float noise share an entry.
    """

    n: int
    g_eff: float
    n_modes: int
    energy_cutoff: float

    def __post_init__(self):
        object.__setattr__(self, "g_eff", round_sig(self.g_eff, 12))
        object.__setattr__(self, "energy_cutoff", round_sig(self.energy_cutoff, 9))
