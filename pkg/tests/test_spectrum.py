import numpy as np
import pytest

from qszilard import (
    BasisControls,
    ConvergenceError,
    InvalidParameterError,
    ModeBasis,
    SpectrumCache,
    assemble_hamiltonian,
    build_fock_basis,
    lowest_eigenvalues,
    scale_spectrum,
    subsystem_spectrum,
)
from qszilard.cache import CacheRecord, FORMAT_VERSION
from qszilard.oracles import richardson_two_particle
from qszilard.units import SubsystemKey


def test_vacuum_spectrum(cache):
    spec = subsystem_spectrum(0, 0.7, -1.0, t_max=1.0, cache=cache)
    assert spec.energies == pytest.approx([0.0])
    assert spec.converged


def test_single_particle_exact(cache):
    spec = subsystem_spectrum(1, 0.5, -3.0, t_max=1.0, cache=cache)
    k = np.arange(1, len(spec.energies) + 1)
    assert spec.energies == pytest.approx(k**2 * np.pi**2 / (2 * 0.25))
    assert spec.converged and spec.residual == 0.0


def test_length_domain(cache):
    with pytest.raises(InvalidParameterError):
        subsystem_spectrum(2, 0.0, 0.0, t_max=1.0, cache=cache)
    with pytest.raises(InvalidParameterError):
        subsystem_spectrum(2, 1.5, 0.0, t_max=1.0, cache=cache)


def test_scaling_consistency_direct_vs_unit_box():
    # diagonalize directly at length 0.3 and compare with the rescaled
    # unit-box spectrum at g_eff = g * 0.3, same basis size
    n, n_modes, g, ell = 2, 16, -0.5, 0.3
    cutoff_unit = 36 * np.pi**2
    basis = build_fock_basis(n, n_modes, cutoff_unit)
    unit_vals = lowest_eigenvalues(
        assemble_hamiltonian(basis, g * ell, ModeBasis(1.0, n_modes)), 10
    )
    direct_basis = build_fock_basis(
        n, n_modes, cutoff_unit / ell**2, mode_energies=ModeBasis(ell, n_modes).energies
    )
    direct_vals = lowest_eigenvalues(
        assemble_hamiltonian(direct_basis, g, ModeBasis(ell, n_modes)), 10
    )
    scaled = scale_spectrum(unit_vals, ell)
    assert np.max(np.abs(scaled - direct_vals) / np.abs(direct_vals)) < 1e-10


def test_ground_energy_matches_grid_oracle(cache):
    spec = subsystem_spectrum(
        2, 0.3, -0.5, t_max=20.0, controls=BasisControls(z_tol=1e-3), cache=cache
    )
    oracle = richardson_two_particle(0.3, -0.5, 90, k=1).extrapolated[0]
    assert spec.ground_energy == pytest.approx(oracle, rel=0.01)


def test_interacting_ground_below_free_above_perturbative_margin(cache):
    # n=3 attractive: condensate energy drops below the free value but by
    # no more than first order plus an O(g^2) margin
    spec = subsystem_spectrum(
        3, 0.5, -0.1, t_max=0.5, controls=BasisControls(z_tol=1e-3), cache=cache
    )
    free = 3 * np.pi**2 / 2 / 0.25
    first_order = 3 * (3 * -0.1 / (2 * 0.5))
    assert spec.ground_energy < free
    assert spec.ground_energy > free + first_order - 0.5 * 0.1**2 / 0.25


def test_convergence_failure_strict_raises(cache):
    controls = BasisControls(z_tol=1e-18, max_escalations=1, n_modes=8)
    with pytest.raises(ConvergenceError) as err:
        subsystem_spectrum(2, 0.5, -1.0, t_max=1.0, controls=controls, cache=cache)
    assert err.value.residual > 1e-18
    payload = err.value.payload
    assert payload is not None and not payload.converged


def test_convergence_failure_relaxed_flags(cache):
    controls = BasisControls(z_tol=1e-18, max_escalations=1, n_modes=8, strict=False)
    spec = subsystem_spectrum(2, 0.5, -1.0, t_max=1.0, controls=controls, cache=cache)
    assert not spec.converged
    assert spec.residual > 0


def test_attractive_spectra_bounded_and_convergent(cache):
    # strong attraction within scope stays bounded below and converges
    # under basis growth at a documented tolerance
    controls = BasisControls(n_modes=40, delta_modes=8, z_tol=5e-2)
    spec = subsystem_spectrum(2, 1.0, -5.0, t_max=2.0, controls=controls, cache=cache)
    assert spec.converged
    assert -20.0 < spec.ground_energy < 2 * np.pi**2 / 2


def test_fermionization_trend_strong_repulsion(cache):
    # ground energies approach the free-fermion sum from below as g grows
    controls = BasisControls(n_modes=60, delta_modes=6, z_tol=5e-2)
    tg = (1 + 4) * np.pi**2 / 2
    previous = -np.inf
    for g in (10.0, 25.0, 50.0):
        spec = subsystem_spectrum(2, 1.0, g, t_max=1.0, controls=controls, cache=cache)
        assert previous < spec.ground_energy < tg
        previous = spec.ground_energy


class TestCache:
    def test_roundtrip_and_reuse(self, tmp_path):
        store = SpectrumCache(tmp_path)
        controls = BasisControls(z_tol=1e-3)
        subsystem_spectrum(2, 0.4, -0.5, t_max=1.0, controls=controls, cache=store)
        computed = store.computed
        assert computed >= 2  # base plus escalation partner

        reloaded = SpectrumCache(tmp_path)
        assert len(reloaded) == len(store)
        subsystem_spectrum(2, 0.4, -0.5, t_max=1.0, controls=controls, cache=reloaded)
        assert reloaded.computed == 0

    def test_stale_version_ignored(self, tmp_path):
        store = SpectrumCache(tmp_path)
        key = SubsystemKey(2, -0.1, 10, 100.0)
        store.put(CacheRecord(key=key, energies=np.array([1.0, 2.0]), dim=5, solver_tol=1e-9))
        with open(store.store_path, "a", encoding="utf-8") as fh:
            fh.write(
                '{"v": %d, "n": 2, "g_eff": -0.2, "n_modes": 10, "energy_cutoff": 100.0,'
                ' "k": 1, "dim": 5, "solver_tol": 1e-9, "energies": [1.0]}\n' % (FORMAT_VERSION + 1)
            )
        reloaded = SpectrumCache(tmp_path)
        assert len(reloaded) == 1
        assert reloaded.get(key) is not None

    def test_duplicate_put_idempotent(self, tmp_path):
        store = SpectrumCache(tmp_path)
        key = SubsystemKey(2, -0.1, 10, 100.0)
        rec = CacheRecord(key=key, energies=np.array([1.0]), dim=3, solver_tol=1e-9)
        store.put(rec)
        store.put(rec)
        assert len(store) == 1
        assert len(SpectrumCache(tmp_path)) == 1

    def test_clear(self, tmp_path):
        store = SpectrumCache(tmp_path)
        key = SubsystemKey(2, -0.1, 10, 100.0)
        store.put(CacheRecord(key=key, energies=np.array([1.0]), dim=3, solver_tol=1e-9))
        store.clear()
        assert len(store) == 0
        assert len(SpectrumCache(tmp_path)) == 0
