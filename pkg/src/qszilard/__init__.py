"""Quasi-static Szilard engine for interacting bosons in a 1D box.

The working medium is N spin-0 bosons with a contact interaction in a
hard-wall box, in equilibrium with a single heat bath.  The package
computes exact subsystem spectra (configuration interaction over box
modes), canonical outcome statistics for a wall inserted anywhere in the
box, the cycle-averaged work of the insert-measure-shift-remove protocol,
and classical / ideal-gas / perturbative baselines.
"""

from .baselines import (
    ClassicalEnsemble,
    IdealEnsemble,
    PerturbativeEnsemble,
    PerturbativeLevels,
    classical_optimum,
    classical_work,
    ideal_canonical_log_z,
    peak_temperature_estimate,
    perturbative_energy,
)
from .cache import SpectrumCache
from .cycle import (
    CyclePlan,
    InsertionOptimum,
    PeakResult,
    ScanPoint,
    WorkBreakdown,
    find_peak,
    make_ensemble,
    optimize_insertion,
    optimize_removals,
    scan,
    work_expansion,
    work_insertion,
    work_removal,
    work_total,
)
from .errors import (
    ConvergenceError,
    EmptyBasisError,
    InvalidParameterError,
    QszilardError,
    TruncationError,
)
from .fock import ModeBasis, assemble_hamiltonian, build_fock_basis, delta_matrix_element, lowest_eigenvalues
from .spectrum import BasisControls, Spectrum, subsystem_spectrum
from .thermo import (
    ExactEnsemble,
    OutcomeDistribution,
    PartitionValue,
    outcome_distribution,
    partition_function,
    shannon_information,
)
from .units import E1, G0, EngineParams, RawParameters, SubsystemKey, normalize, scale_spectrum

__version__ = "0.1.0"

__all__ = [
    "BasisControls",
    "ClassicalEnsemble",
    "ConvergenceError",
    "CyclePlan",
    "E1",
    "EmptyBasisError",
    "EngineParams",
    "ExactEnsemble",
    "G0",
    "IdealEnsemble",
    "InsertionOptimum",
    "InvalidParameterError",
    "ModeBasis",
    "OutcomeDistribution",
    "PartitionValue",
    "PeakResult",
    "PerturbativeEnsemble",
    "PerturbativeLevels",
    "QszilardError",
    "RawParameters",
    "ScanPoint",
    "Spectrum",
    "SpectrumCache",
    "SubsystemKey",
    "TruncationError",
    "WorkBreakdown",
    "assemble_hamiltonian",
    "build_fock_basis",
    "classical_optimum",
    "classical_work",
    "delta_matrix_element",
    "find_peak",
    "ideal_canonical_log_z",
    "lowest_eigenvalues",
    "make_ensemble",
    "normalize",
    "optimize_insertion",
    "optimize_removals",
    "outcome_distribution",
    "partition_function",
    "peak_temperature_estimate",
    "perturbative_energy",
    "scale_spectrum",
    "scan",
    "shannon_information",
    "subsystem_spectrum",
    "work_expansion",
    "work_insertion",
    "work_removal",
    "work_total",
]
