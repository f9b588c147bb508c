import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qszilard import (
    E1,
    EngineParams,
    InvalidParameterError,
    RawParameters,
    SubsystemKey,
    normalize,
    scale_spectrum,
)


def test_natural_units_identity():
    # k_BT = E1 in the unit system hbar = m = L = 1 stays pi^2/2
    raw = RawParameters(n_particles=3, box_length=1, mass=1, hbar=1, coupling=0.0, kb_temperature=E1)
    p = normalize(raw)
    assert p.n_particles == 3
    assert p.coupling == 0.0
    assert p.temperature == pytest.approx(np.pi**2 / 2, abs=0)
    assert p.temperature_e1 == pytest.approx(1.0)


def test_single_particle_ground_energy_unit():
    assert E1 == pytest.approx(np.pi**2 / 2, rel=0)


def test_coupling_unit_covariance():
    # g expressed in the local hbar^2/(L m) survives normalization unchanged
    g0 = 1.0**2 / (2.0 * 1.0)  # L = 2
    raw = RawParameters(n_particles=2, box_length=2.0, coupling=-1.0 * g0, kb_temperature=1.0)
    assert normalize(raw).coupling == pytest.approx(-1.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(box_length=-1.0),
        dict(mass=0.0),
        dict(hbar=-2.0),
        dict(kb_temperature=0.0),
    ],
)
def test_normalize_rejects_nonpositive(kwargs):
    with pytest.raises(InvalidParameterError):
        normalize(RawParameters(n_particles=1, **kwargs))


def test_engine_params_validation():
    with pytest.raises(InvalidParameterError):
        EngineParams(n_particles=0, coupling=0.0, temperature=1.0)
    with pytest.raises(InvalidParameterError):
        EngineParams(n_particles=1, coupling=0.0, temperature=-1.0)
    with pytest.raises(InvalidParameterError):
        EngineParams(n_particles=1, coupling=0.0, temperature=1.0, box_length=2.0)


@given(
    length=st.floats(0.1, 10),
    mass=st.floats(0.1, 10),
    hbar=st.floats(0.5, 2),
    g=st.floats(-5, 5),
    t=st.floats(0.01, 100),
)
def test_normalize_idempotent(length, mass, hbar, g, t):
    raw = RawParameters(2, length, mass, hbar, g, t)
    once = normalize(raw)
    assert normalize(once) == once


def test_scale_spectrum_single_particle_half_box():
    unit = np.array([np.pi**2 / 2])
    assert scale_spectrum(unit, 0.5)[0] == pytest.approx(2 * np.pi**2)


def test_scale_spectrum_preserves_order():
    unit = np.array([1.0, 2.0, 5.0])
    scaled = scale_spectrum(unit, 0.3)
    assert np.all(np.diff(scaled) > 0)


@pytest.mark.parametrize("bad", [0.0, -0.5, 1.2])
def test_scale_spectrum_domain(bad):
    with pytest.raises(InvalidParameterError):
        scale_spectrum(np.array([1.0]), bad)


def test_subsystem_key_rounding():
    a = SubsystemKey(2, -0.1234567890123, 20, 100.0)
    b = SubsystemKey(2, -0.1234567890124, 20, 100.0)
    c = SubsystemKey(2, -0.1234567891, 20, 100.0)
    assert a == b
    assert a != c
