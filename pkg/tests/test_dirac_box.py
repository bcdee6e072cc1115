import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.polynomial import chebyshev as C

from oracles import gl_nodes, spinor_table
from relkick.core import ParameterError
from relkick.dirac_box import (
    ALPHA_X,
    BETA,
    Basis,
    InvalidQuantumNumber,
    OutOfBox,
    apply_free_hamiltonian,
    current,
    density,
    eval_spinor,
    eval_spinor_derivative,
    mode,
    normalization,
    superpose,
)


def test_mode_example_values():
    m = mode(1, 1.0)
    assert m.k == pytest.approx(math.pi, rel=1e-15)
    assert m.energy == pytest.approx(math.sqrt(math.pi ** 2 + 1), rel=1e-15)
    assert m.ratio == pytest.approx(math.pi / (math.sqrt(math.pi ** 2 + 1) + 1), rel=1e-15)
    m40 = mode(40, 10.0)
    assert m40.k == pytest.approx(4 * math.pi, rel=1e-15)


@pytest.mark.parametrize("bad", [0, -3, 2.5])
def test_mode_rejects_bad_quantum_number(bad):
    with pytest.raises(InvalidQuantumNumber):
        mode(bad, 1.0)


def test_mode_rejects_bad_length():
    with pytest.raises(ParameterError):
        mode(1, 0.0)


def test_dispersion_relation_exact():
    b = Basis(64, 7.3)
    assert np.max(np.abs(b.energy ** 2 - b.k ** 2 - 1.0)) <= 1e-14 * b.energy.max() ** 2


def test_normalization_matches_numerical():
    for n in (1, 5, 64):
        x, w = gl_nodes(3.0, 1600, 16)
        psi, _, _ = spinor_table(n, 3.0, x)
        s = eval_spinor(mode(n, 3.0), x)
        assert np.max(np.abs(s.as_array() - psi[n - 1])) <= 1e-13
        assert normalization(n, 3.0) == pytest.approx(mode(n, 3.0).norm)


@pytest.mark.parametrize("L", [1.0, 10.0])
def test_orthonormality_by_quadrature(L):
    x, w = gl_nodes(L, 1600, 16)
    b = Basis(64, L)
    up, lo = b.upper(x), b.lower(x)
    gram = (np.conj(up) * w) @ up.T + (lo * w) @ lo.T
    assert np.max(np.abs(gram - np.eye(64))) <= 1e-10


def test_eigen_relation_with_analytic_derivative():
    x = np.linspace(0, 2.0, 101)
    for n in range(1, 65):
        m = mode(n, 2.0)
        psi = eval_spinor(m, x).as_array()
        hpsi = apply_free_hamiltonian(psi, eval_spinor_derivative(m, x).as_array())
        assert np.max(np.abs(hpsi - m.energy * psi)) <= 1e-12 * m.energy


def test_eigen_relation_with_spectral_derivative():
    # derivative from a Chebyshev interpolant, independent of the analytic one
    L = 1.0
    nodes = 0.5 * L * (1 - np.cos(np.pi * np.arange(121) / 120))
    for n in (1, 3, 8):
        m = mode(n, L)
        psi = eval_spinor(m, nodes).as_array()
        dpsi = np.empty_like(psi)
        for comp in range(4):
            for part in (np.real, np.imag):
                coef = C.chebfit(2 * nodes / L - 1, part(psi[comp]), 120)
                d = C.chebval(2 * nodes / L - 1, C.chebder(coef)) * 2 / L
                if part is np.real:
                    dpsi[comp] = d
                else:
                    dpsi[comp] += 1j * d
        hpsi = apply_free_hamiltonian(psi, dpsi)
        assert np.max(np.abs(hpsi - m.energy * psi)) <= 1e-8


def test_representation_matrices():
    assert np.allclose(ALPHA_X @ ALPHA_X, np.eye(4))
    assert np.allclose(BETA @ BETA, np.eye(4))
    assert np.allclose(ALPHA_X @ BETA + BETA @ ALPHA_X, 0)


def test_upper_component_vanishes_at_walls():
    for n in (1, 17, 64):
        s = eval_spinor(mode(n, 4.0), np.array([0.0, 4.0]))
        assert abs(s.phi1[0]) == 0.0
        assert abs(s.phi1[1]) == 0.0


def test_current_vanishes_at_walls_and_for_single_modes():
    x = np.linspace(0, 5.0, 777)
    for n in range(1, 65):
        s = eval_spinor(mode(n, 5.0), x)
        j = current(s)
        assert np.max(np.abs(j)) <= 1e-14
    # superpositions carry current inside but not at the walls
    modes = [mode(n, 5.0) for n in (1, 2)]
    s = superpose([1 / math.sqrt(2), 1j / math.sqrt(2)], modes, np.array([0.0, 2.5, 5.0]))
    j = current(s)
    assert j[0] == 0.0
    assert j[2] == 0.0
    assert abs(j[1]) > 1e-3


def test_density_is_nonnegative_and_integrates_to_one():
    x, w = gl_nodes(2.0, 800)
    s = eval_spinor(mode(3, 2.0), x)
    rho = density(s)
    assert rho.min() >= 0
    assert np.sum(w * rho) == pytest.approx(1.0, abs=1e-13)


def test_nonrelativistic_limit():
    # large box: E_n - 1 -> k^2 / 2 and the lower component is suppressed
    m = mode(1, 1000.0)
    assert m.energy - 1 == pytest.approx(m.k ** 2 / 2, rel=1e-5)
    assert m.ratio == pytest.approx(m.k / 2, rel=1e-5)


def test_out_of_box_rejected():
    with pytest.raises(OutOfBox):
        eval_spinor(mode(1, 1.0), [1.5])
    with pytest.raises(OutOfBox):
        Basis(4, 1.0).upper(np.array([-0.1]))
    # exact endpoints of a linspace grid are fine
    Basis(4, 3.3).lower(np.linspace(0, 3.3, 11))


def test_basis_immutable_and_hashable():
    b = Basis(8, 2.0)
    with pytest.raises(ValueError):
        b.energy[0] = 3.0
    assert b == Basis(8, 2.0) and hash(b) == hash(Basis(8, 2.0))
    assert b != Basis(8, 2.5)
    assert [m.n for m in b.modes()] == list(range(1, 9))


def test_beta_diagonal_matches_quadrature():
    x, w = gl_nodes(3.0, 1600, 16)
    b = Basis(16, 3.0)
    up, lo = b.upper(x), b.lower(x)
    expected = np.sum(w * (np.abs(up) ** 2 - lo ** 2), axis=1)
    assert np.max(np.abs(expected - b.beta_diagonal)) <= 1e-12
    off = (np.conj(up) * w) @ up.T - (lo * w) @ lo.T
    assert np.max(np.abs(off - np.diag(b.beta_diagonal))) <= 1e-12


@given(n=st.integers(1, 500), L=st.floats(0.05, 100))
def test_mode_invariants(n, L):
    m = mode(n, L)
    assert m.energy > 1.0
    assert 0 < m.ratio < 1
    assert abs(m.energy ** 2 - m.k ** 2 - 1) <= 1e-14 * m.energy ** 2
    assert 2 * L * m.norm ** 2 * (1 + m.ratio ** 2) == pytest.approx(1.0, rel=1e-14)
