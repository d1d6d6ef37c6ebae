import math

import pytest
from hypothesis import given, strategies as st

from ultrashort.units import (
    ELECTRON, HBAR2_OVER_2ME, PhysicalContext, energy_from_k, energy_from_z,
    from_dimensionless_energy, k_from_energy, to_dimensionless_energy,
)

# hbar^2/(2 m_e) from CODATA 2018 at 40 digits (mpmath)
C_REF = 0.03809982111485961422647


def test_constant_matches_codata():
    assert HBAR2_OVER_2ME == pytest.approx(C_REF, rel=1e-14)
    assert ELECTRON.hbar2_over_2m == pytest.approx(0.0380998, rel=1e-6)


def test_mass_scales_kinetic_constant():
    assert PhysicalContext(4.0).hbar2_over_2m == pytest.approx(C_REF / 4, rel=1e-14)


@pytest.mark.parametrize("mass", [0.0, -1.0, math.nan, math.inf])
def test_mass_rejected(mass):
    with pytest.raises(ValueError):
        PhysicalContext(mass)


@pytest.mark.parametrize("energy, mass, k", [
    (-0.0380998, 1.0, 1.0),
    (-4 * 0.0380998, 1.0, 2.0),
    (-0.0380998, 4.0, 2.0),
])
def test_k_from_energy(energy, mass, k):
    assert k_from_energy(energy, PhysicalContext(mass)) == pytest.approx(k, rel=1e-6)


@pytest.mark.parametrize("energy", [0.0, 1e-3])
def test_k_rejects_unbound(energy):
    with pytest.raises(ValueError):
        k_from_energy(energy)


def test_energy_from_z_examples():
    assert energy_from_z(1.0, 1.0) == pytest.approx(C_REF, rel=1e-14)
    assert energy_from_z(1.0, 5.0) * 1e3 == pytest.approx(1.52399, abs=1e-5)
    with pytest.raises(ValueError):
        energy_from_z(0.0, 5.0)
    with pytest.raises(ValueError):
        energy_from_z(1.0, 0.0)


def test_dimensionless_energy_examples():
    assert to_dimensionless_energy(0.0, 5.0) == 0.0
    assert to_dimensionless_energy(-C_REF / 25, 5.0) == pytest.approx(-1.0, rel=1e-14)
    z, dx = 0.37, 2.5
    assert to_dimensionless_energy(-energy_from_z(z, dx), dx) == pytest.approx(-z * z, rel=1e-14)


@given(st.floats(1e-3, 10.0), st.floats(0.01, 100.0))
def test_round_trip_z(z, dx):
    assert k_from_energy(-energy_from_z(z, dx)) * dx == pytest.approx(z, rel=1e-12)


@given(st.floats(1e-6, 10.0), st.floats(0.01, 100.0))
def test_round_trip_dimensionless(e_abs, dx):
    eps = to_dimensionless_energy(-e_abs, dx)
    assert from_dimensionless_energy(eps, dx) == pytest.approx(-e_abs, rel=1e-14)


@given(st.floats(1e-6, 1.0), st.floats(0.01, 100.0))
def test_mass_scaling_of_k(e_abs, mass):
    ratio = k_from_energy(-e_abs, PhysicalContext(mass)) / k_from_energy(-e_abs)
    assert ratio == pytest.approx(math.sqrt(mass), rel=1e-12)


@given(st.floats(1e-3, 10.0), st.floats(0.01, 10.0), st.floats(0.1, 10.0))
def test_dx_scaling(z, dx, s):
    assert energy_from_z(z, s * dx) * s * s == pytest.approx(energy_from_z(z, dx), rel=1e-14)


def test_energy_from_k_inverse():
    assert energy_from_k(1.0) == pytest.approx(-C_REF, rel=1e-14)
