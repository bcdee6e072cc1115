"""Stationary Dirac particle in the box (0, L).

Boundary condition: the upper component vanishes at both walls. Only the
positive-energy family with phi2 = chi1 = 0 is used,

    psi_n(x) = 2 A_n (i sin(k_n x), 0, 0, c_n cos(k_n x)),

with k_n = pi n / L, E_n = sqrt(k_n^2 + 1), c_n = k_n / (E_n + 1) and
A_n = 1 / sqrt(2 L (1 + c_n^2)).

Dirac representation: beta = diag(1, 1, -1, -1), alpha_x has Pauli-x blocks
off the diagonal. Spinor components are ordered (phi1, phi2, chi1, chi2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ParameterError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
ALPHA_X = np.block([[np.zeros((2, 2)), SIGMA_X], [SIGMA_X, np.zeros((2, 2))]])
BETA = np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex)


class InvalidQuantumNumber(ParameterError):
    name = "InvalidQuantumNumber"


class OutOfBox(ParameterError):
    name = "OutOfBox"


@dataclass(frozen=True)
class EigenMode:
    n: int
    box_length: float
    k: float
    energy: float
    ratio: float
    norm: float


@dataclass(frozen=True)
class SpinorValue:
    """Four spinor components at one point (or over an array of points)."""

    phi1: np.ndarray | complex
    phi2: np.ndarray | complex
    chi1: np.ndarray | complex
    chi2: np.ndarray | complex

    def as_array(self) -> np.ndarray:
        return np.stack(np.broadcast_arrays(self.phi1, self.phi2, self.chi1, self.chi2))


def _ratio(k, energy):
    return k / (energy + 1.0)


def normalization(n: int, L: float) -> float:
    """A_n making the eigenspinor unit-normalized on (0, L).

    Integrating 4 A^2 (sin^2 + c^2 cos^2) over the box gives 2 L A^2 (1 + c^2)
    because sin^2 and cos^2 of k_n x each average to 1/2 over whole half-waves.
    """
    m = mode(n, L)
    return m.norm


def mode(n: int, L: float) -> EigenMode:
    if int(n) != n or n < 1:
        raise InvalidQuantumNumber(f"n must be a positive integer, got {n!r}")
    if not L > 0:
        raise ParameterError(f"box length must be positive, got {L!r}")
    n = int(n)
    k = math.pi * n / L
    energy = math.sqrt(k * k + 1.0)
    c = _ratio(k, energy)
    norm = 1.0 / math.sqrt(2.0 * L * (1.0 + c * c))
    return EigenMode(n, float(L), k, energy, c, norm)


def _check_inside(x, L):
    x = np.asarray(x, dtype=float)
    # one ulp of slack so grids built as linspace(0, L) are accepted
    tol = 4 * np.finfo(float).eps * L
    if np.any(x < -tol) or np.any(x > L + tol):
        raise OutOfBox(f"positions must lie in [0, {L}]")
    return x


def _wall_sin(n, x, L):
    """sin(n pi x / L), exactly zero where n x / L is an integer (the walls)."""
    u = np.multiply.outer(n, x) / L
    return np.where(u == np.round(u), 0.0, np.sin(np.pi * u))


def eval_spinor(m: EigenMode, x) -> SpinorValue:
    x = _check_inside(x, m.box_length)
    phi1 = 2j * m.norm * _wall_sin(m.n, x, m.box_length)
    chi2 = (2.0 * m.norm * m.ratio) * np.cos(m.k * x) + 0j
    zero = np.zeros_like(phi1)
    return SpinorValue(phi1, zero, zero, chi2)


def eval_spinor_derivative(m: EigenMode, x) -> SpinorValue:
    """Analytic d/dx of the eigenspinor."""
    x = _check_inside(x, m.box_length)
    dphi1 = 2j * m.norm * m.k * np.cos(m.k * x)
    dchi2 = -(2.0 * m.norm * m.ratio * m.k) * np.sin(m.k * x) + 0j
    zero = np.zeros_like(dphi1)
    return SpinorValue(dphi1, zero, zero, dchi2)


def apply_free_hamiltonian(psi: np.ndarray, dpsi: np.ndarray) -> np.ndarray:
    """H0 psi = -i alpha_x psi' + beta psi for arrays of shape (4, ...)."""
    return (-1j * np.tensordot(ALPHA_X, dpsi, axes=1)
            + np.tensordot(BETA, psi, axes=1))


def density(s: SpinorValue):
    """Probability density rho = |phi1|^2 + |chi2|^2 (channel of the basis)."""
    return np.abs(s.phi1) ** 2 + np.abs(s.chi2) ** 2


def current(s: SpinorValue):
    """Current j = psi^dagger alpha_x psi = 2 Re(conj(phi1) chi2)."""
    return 2.0 * np.real(np.conj(s.phi1) * s.chi2)


def superpose(coeffs, modes, x) -> SpinorValue:
    """Spinor of sum_n coeffs[n] psi_n at positions x."""
    parts = [eval_spinor(m, x) for m in modes]
    return SpinorValue(*(sum(c * getattr(p, f) for c, p in zip(coeffs, parts))
                         for f in ("phi1", "phi2", "chi1", "chi2")))


class Basis:
    """Vectorized set of the first ``size`` eigenmodes of a box of length L.

    Arrays are indexed by n - 1. Immutable after construction.
    """

    def __init__(self, size: int, box_length: float):
        if int(size) != size or size < 1:
            raise InvalidQuantumNumber(f"basis size must be >= 1, got {size!r}")
        if not box_length > 0:
            raise ParameterError(f"box length must be positive, got {box_length!r}")
        self.size = int(size)
        self.box_length = float(box_length)
        self.n = np.arange(1, self.size + 1)
        self.k = math.pi * self.n / self.box_length
        self.energy = np.sqrt(self.k ** 2 + 1.0)
        self.ratio = _ratio(self.k, self.energy)
        self.norm = 1.0 / np.sqrt(2.0 * self.box_length * (1.0 + self.ratio ** 2))
        for arr in (self.n, self.k, self.energy, self.ratio, self.norm):
            arr.flags.writeable = False

    def __eq__(self, other):
        return (isinstance(other, Basis) and self.size == other.size
                and self.box_length == other.box_length)

    def __hash__(self):
        return hash((self.size, self.box_length))

    def __repr__(self):
        return f"Basis(size={self.size}, box_length={self.box_length})"

    def modes(self) -> list[EigenMode]:
        return [mode(n, self.box_length) for n in self.n]

    @property
    def beta_diagonal(self) -> np.ndarray:
        """<psi_n|beta|psi_n> = (1 - c_n^2) / (1 + c_n^2); beta is diagonal here."""
        c2 = self.ratio ** 2
        return (1.0 - c2) / (1.0 + c2)

    def upper(self, x) -> np.ndarray:
        """phi1 of every mode on ``x``; shape (size, len(x))."""
        x = _check_inside(x, self.box_length)
        return 2j * self.norm[:, None] * _wall_sin(self.n, x, self.box_length)

    def lower(self, x) -> np.ndarray:
        """chi2 of every mode on ``x``; shape (size, len(x)), real."""
        x = _check_inside(x, self.box_length)
        return (2.0 * self.norm * self.ratio)[:, None] * np.cos(np.outer(self.k, x))
