import cmath

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import cdlattice as cdl
from cdlattice.errors import (
    DomainError,
    InvalidSpecError,
    SingularityError,
    UnsupportedPathError,
)


# ---------------------------------------------------------------------------
# quasimomenta
# ---------------------------------------------------------------------------

def test_quasimomenta_standard_chain():
    ks = cdl.bulk_quasimomenta(cdl.ssh_spec(101, -1, 0.5))
    assert len(ks) == 101
    assert ks[50] == pytest.approx(np.pi / 2, abs=1e-15)
    assert np.all(np.diff(ks) > 0)
    assert ks[0] > 0 and ks[-1] < np.pi


def test_quasimomenta_small_chains():
    ks = cdl.bulk_quasimomenta(cdl.ssh_spec(11, -1, 0.5))
    np.testing.assert_allclose(ks, np.pi * np.arange(1, 12) / 12)
    spec3 = cdl.LatticeSpec(x0=-1, L=3, t=np.ones(2, dtype=complex), mu=np.zeros(3), tau=1)
    np.testing.assert_allclose(cdl.bulk_quasimomenta(spec3), [np.pi / 4, np.pi / 2, 3 * np.pi / 4])


def test_quasimomenta_rejects_incommensurate():
    with pytest.raises(UnsupportedPathError):
        cdl.bulk_quasimomenta(cdl.ssh_spec(10, -1, 0.5))


# ---------------------------------------------------------------------------
# dispersion
# ---------------------------------------------------------------------------

def test_energy_uniform_chain_against_diagonalization():
    # alpha = e^{i pi/4} exists in the 7-site uniform chain (k = 2 pi / 8)
    e = cdl.ssh_energy(cmath.exp(1j * np.pi / 4), 0.0, 0)
    spec = cdl.LatticeSpec(x0=-1, L=7, t=np.ones(6, dtype=complex), mu=np.zeros(7), tau=1)
    w = np.linalg.eigvalsh(cdl.build_hamiltonian(spec))
    assert np.min(np.abs(w - e)) <= 1e-12
    assert e == pytest.approx(np.sqrt(2.0), abs=1e-14)


def test_energy_in_gap_family_is_zero():
    assert cdl.ssh_energy(0.0224j, 0.999, 0) == 0.0
    assert cdl.ssh_energy(0.0224j, 0.999, 1) == 0.0


@given(k=st.floats(min_value=1e-3, max_value=np.pi - 1e-3),
       lam=st.floats(min_value=-0.99, max_value=0.99),
       s=st.sampled_from([0, 1]))
def test_energy_alpha_inversion_symmetry(k, lam, s):
    alpha = cmath.exp(1j * k)
    assert cdl.ssh_energy(alpha, lam, s) == pytest.approx(
        cdl.ssh_energy(1 / alpha, lam, s), abs=1e-12
    )


@given(a=st.floats(min_value=0.05, max_value=0.95),
       lam=st.floats(min_value=-0.99, max_value=0.99))
def test_energy_inversion_on_imaginary_axis(a, lam):
    assert cdl.ssh_energy(1j * a, lam, 0) == cdl.ssh_energy(1 / (1j * a), lam, 0) == 0.0


def test_energy_rejects_unsupported_alpha():
    with pytest.raises(DomainError):
        cdl.ssh_energy(0.3 * cmath.exp(1j * np.pi / 4), 0.5, 0)
    with pytest.raises(DomainError):
        cdl.ssh_energy(0.0, 0.5, 0)


# ---------------------------------------------------------------------------
# Bloch pairs
# ---------------------------------------------------------------------------

def test_bloch_satisfies_local_equations_on_three_sites():
    lam = 0.0
    alpha = cmath.exp(1j * np.pi / 4)
    energy = cdl.ssh_energy(alpha, lam, 0)
    bloch = cdl.ssh_bloch(alpha, lam, 0)
    assert bloch.phi_plus[0] == 1.0
    assert bloch.phi_plus[1] == pytest.approx((1 + alpha**2) / (energy * alpha))
    spec = cdl.ssh_spec(3, -1, lam)
    record = cdl.assemble_state(spec, bloch, alpha, energy)
    h = cdl.build_hamiltonian(spec)
    assert np.max(np.abs(h @ record.coeffs - energy * record.coeffs)) <= 1e-12


@given(k=st.floats(min_value=0.05, max_value=np.pi / 2 - 0.05),
       lam=st.floats(min_value=-0.9, max_value=0.9))
def test_bloch_minus_is_plus_under_alpha_inversion(k, lam):
    alpha = cmath.exp(1j * k)
    direct = cdl.ssh_bloch(alpha, lam, 0)
    inverted = cdl.ssh_bloch(1 / alpha, lam, 0)
    np.testing.assert_allclose(direct.phi_minus, inverted.phi_plus, atol=1e-12)


def test_bloch_zero_mode_polarized_pair():
    lam = 0.999
    alpha = cdl.zero_mode_internal_alpha(cdl.ssh_spec(101, -1, lam), lam)
    bloch = cdl.ssh_bloch(alpha, lam, 0)
    np.testing.assert_array_equal(bloch.phi_plus, [1.0, 0.0])
    np.testing.assert_array_equal(bloch.phi_minus, [0.0, 1.0])


def test_bloch_rejects_zero_energy_off_branch():
    with pytest.raises(SingularityError):
        cdl.ssh_bloch(1j, 0.5, 0)


# ---------------------------------------------------------------------------
# edge alpha
# ---------------------------------------------------------------------------

def test_edge_alpha_reference_points():
    spec999 = cdl.ssh_spec(101, -1, 0.999)
    assert abs(cdl.edge_alpha(spec999, 0.999)) == pytest.approx(0.0224, abs=5e-5)
    spec_small = cdl.ssh_spec(101, -1, 1e-3)
    assert abs(cdl.edge_alpha(spec_small, 1e-3)) == pytest.approx(0.999, abs=5e-4)
    spec_half = cdl.ssh_spec(101, -1, 0.5)
    assert abs(cdl.edge_alpha(spec_half, 0.5)) == pytest.approx(0.57735, abs=5e-6)


def test_edge_alpha_matches_dense_decay_ratio():
    lam = 0.5
    spec = cdl.ssh_spec(11, -1, lam)
    w, v = np.linalg.eigh(cdl.build_hamiltonian(spec))
    zero_mode = v[:, int(np.argmin(np.abs(w)))]
    ratio = abs(zero_mode[2] / zero_mode[0])
    assert abs(cdl.edge_alpha(spec, lam)) ** 2 == pytest.approx(ratio, rel=1e-9)


def test_edge_alpha_phase_and_negative_coupling():
    spec = cdl.ssh_spec(101, -1, -0.999)
    alpha = cdl.edge_alpha(spec, -0.999)
    assert alpha.real == 0.0
    assert alpha.imag == pytest.approx(0.0224, abs=5e-5)


def test_edge_alpha_guards():
    with pytest.raises(SingularityError):
        cdl.edge_alpha(cdl.ssh_spec(11, -1, 0.0), 0.0)
    with pytest.warns(UserWarning):
        spec1 = cdl.ssh_spec(11, -1, 1.0)
    with pytest.raises(SingularityError):
        cdl.edge_alpha(spec1, 1.0)
    with pytest.raises(InvalidSpecError):
        cdl.edge_alpha(cdl.ssh_spec(10, -1, 0.5), 0.5)


# ---------------------------------------------------------------------------
# state assembly
# ---------------------------------------------------------------------------

def test_assembled_bulk_state_is_eigenstate():
    lam = 0.6
    spec = cdl.ssh_spec(11, -1, lam)
    alpha = cmath.exp(1j * np.pi / 12)
    for s in (0, 1):
        energy = cdl.ssh_energy(alpha, lam, s)
        record = cdl.assemble_state(spec, cdl.ssh_bloch(alpha, lam, s), alpha, energy, band=s)
        assert np.linalg.norm(record.coeffs) == pytest.approx(1.0, abs=1e-12)
        assert cdl.eigen_residual(spec, record) <= 1e-10
        assert record.kind == "bulk"


def test_assembled_state_vanishes_at_walls():
    lam = 0.4
    spec = cdl.ssh_spec(11, -1, lam)
    alpha = cmath.exp(1j * np.pi / 6)
    bloch = cdl.ssh_bloch(alpha, lam, 0)
    for wall in (spec.x0, spec.L):
        amp = cdl.extended_amplitude(spec, bloch, alpha, wall)
        assert abs(amp) <= 1e-10


def test_assemble_rejects_vanishing_minus_branch():
    bloch = cdl.BlochPair(np.array([1.0, 1.0]), np.array([1.0, 0.0]))
    spec = cdl.ssh_spec(11, -1, 0.5)
    with pytest.raises(SingularityError):
        cdl.assemble_state(spec, bloch, cmath.exp(1j * 0.3), 1.0)


def test_in_gap_record_localization_sides():
    for lam, side in ((0.999, slice(0, 2)), (-0.999, slice(-2, None))):
        spec = cdl.ssh_spec(101, -1, lam)
        record = cdl.in_gap_record(spec, lam)
        density = np.abs(record.coeffs) ** 2
        assert density[side].sum() >= 0.99
        assert density[1::2].sum() <= 1e-20
        assert abs(record.alpha) < 1
        assert record.energy == 0.0
        assert cdl.eigen_residual(spec, record) <= 1e-12


def test_in_gap_limit_matches_uniform_midband_state():
    lam = 1e-9
    spec = cdl.ssh_spec(11, -1, lam)
    record = cdl.in_gap_record(spec, lam)
    assert abs(record.alpha) == pytest.approx(1.0, abs=1e-8)
    # the k = pi/2 standing wave of the uniform chain: flat on even sites
    uniform = np.zeros(11)
    uniform[::2] = np.sin(np.pi / 2 * (np.arange(0, 11, 2) + 1))
    uniform /= np.linalg.norm(uniform)
    np.testing.assert_allclose(np.abs(record.coeffs[::2]), np.abs(uniform[::2]), atol=1e-8)


# ---------------------------------------------------------------------------
# quantization routes
# ---------------------------------------------------------------------------

def test_boundary_quantization_accepts_commensurate_momenta():
    spec = cdl.ssh_spec(11, -1, 0.9)
    for n in (1, 3, 5):
        residual = cdl.quantization_residual(spec, cmath.exp(1j * np.pi * n / 12))
        assert abs(residual) <= 1e-12


def test_boundary_quantization_rejects_off_grid_momentum():
    spec = cdl.ssh_spec(11, -1, 0.9)
    assert abs(cdl.quantization_residual(spec, cmath.exp(1j * 0.1))) > 0.1


def test_boundary_quantization_degenerate_at_edge_state():
    # bound states are fixed by the local single-site equation, not by the
    # wall condition: there the Bloch ratio degenerates to 0/0
    spec = cdl.ssh_spec(11, -1, 0.9)
    alpha = cdl.edge_alpha(spec, 0.9)
    with pytest.raises(SingularityError):
        cdl.quantization_residual(spec, alpha)


def test_edge_root_satisfies_local_equation_route():
    # consistency of the two quantization routes, stated through the
    # residual that actually quantizes the bound state
    from cdlattice.states import _edge_residual

    for lam in (0.9, 0.3, -0.7):
        spec = cdl.ssh_spec(11, -1, lam)
        alpha = cdl.edge_alpha(spec, lam)
        res = _edge_residual(abs(alpha), lam, spec.L, spec.x0, spec.t[0].real)
        assert abs(res) <= 1e-8
        closed = np.sqrt((1 - abs(lam)) / (1 + abs(lam)))
        assert abs(alpha) == pytest.approx(closed, abs=1e-10)


# ---------------------------------------------------------------------------
# full basis
# ---------------------------------------------------------------------------

def test_full_basis_structure_and_spectrum():
    lam = 0.9
    spec = cdl.ssh_spec(101, -1, lam)
    basis = cdl.full_basis(spec, lam)
    assert len(basis) == 101
    kinds = [r.kind for r in basis]
    assert kinds.count("in-gap") == 1
    assert sum(1 for r in basis if r.energy > 1e-9) == 50
    assert sum(1 for r in basis if r.energy < -1e-9) == 50
    numeric = np.linalg.eigvalsh(cdl.build_hamiltonian(spec))
    np.testing.assert_allclose([r.energy for r in basis], numeric, atol=1e-10)


def test_full_basis_orthonormal_and_complete():
    lam = -0.35
    spec = cdl.ssh_spec(25, -1, lam)
    basis = cdl.full_basis(spec, lam)
    p = np.array([r.coeffs for r in basis])
    np.testing.assert_allclose(p.conj() @ p.T, np.eye(25), atol=1e-8)
    np.testing.assert_allclose(p.T @ p.conj(), np.eye(25), atol=1e-8)


def test_full_basis_residuals_large_chain():
    lam = 0.5
    spec = cdl.ssh_spec(401, -1, lam)
    basis = cdl.full_basis(spec, lam)
    assert max(cdl.eigen_residual(spec, r) for r in basis) <= 1e-10


def test_full_basis_smooth_limit_to_uniform_chain():
    lam = 1e-12
    spec = cdl.ssh_spec(11, -1, lam)
    energies = np.sort([r.energy for r in cdl.full_basis(spec, lam)])
    uniform = np.sort(2 * np.cos(np.pi * np.arange(1, 12) / 12))
    np.testing.assert_allclose(energies, uniform, atol=1e-9)


def test_full_basis_even_count_rejected():
    with pytest.raises(UnsupportedPathError):
        cdl.full_basis(cdl.ssh_spec(10, -1, 0.5), 0.5)


def test_full_basis_requires_matching_lambda():
    with pytest.raises(InvalidSpecError):
        cdl.full_basis(cdl.ssh_spec(11, -1, 0.5), 0.7)


def test_full_basis_other_odd_wall():
    # walls at 1 and 14: twelve sites starting on an even label
    spec = cdl.ssh_spec(14, 1, 0.4)
    assert spec.n_sites == 12
    assert not spec.is_commensurate
    spec = cdl.ssh_spec(15, 1, 0.4)
    basis = cdl.full_basis(spec, 0.4)
    numeric = np.linalg.eigvalsh(cdl.build_hamiltonian(spec))
    np.testing.assert_allclose([r.energy for r in basis], numeric, atol=1e-10)
    assert max(cdl.eigen_residual(spec, r) for r in basis) <= 1e-10


# ---------------------------------------------------------------------------
# generic unit-cell route
# ---------------------------------------------------------------------------

def test_generic_route_agrees_with_ssh_closed_forms():
    lam = 0.45
    spec = cdl.ssh_spec(11, -1, lam)
    alpha = cmath.exp(1j * np.pi / 3)
    energy = cdl.ssh_energy(alpha, lam, 0)
    residual, phi = cdl.generic_bloch(spec, alpha, energy)
    assert residual <= 1e-12
    bloch = cdl.ssh_bloch(alpha, lam, 0)
    assert phi[1] / phi[0] == pytest.approx(bloch.phi_plus[1], abs=1e-10)


def test_generic_route_flags_off_dispersion_pair():
    spec = cdl.ssh_spec(11, -1, 0.45)
    residual, _ = cdl.generic_bloch(spec, cmath.exp(1j * np.pi / 3), 0.123)
    assert residual > 1e-3


def test_generic_route_single_band():
    spec = cdl.LatticeSpec(x0=-1, L=9, t=np.ones(8, dtype=complex), mu=np.zeros(9), tau=1)
    k = 0.7
    residual, phi = cdl.generic_bloch(spec, cmath.exp(1j * k), 2 * np.cos(k))
    assert residual <= 1e-12
    assert phi[0] == pytest.approx(1.0)
