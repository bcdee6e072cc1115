"""Kicked Dirac particle in the box, propagated in the truncated eigenbasis.

Over one period the coefficients evolve as

    A_n(t + T) = sum_l A_l(t) V_ln exp(-i E_l T),

where V_ln = <psi_n| exp(i eps cos(2 pi x / lambda)) |psi_l>. The kick matrix
is built from the Bessel expansion exp(i eps cos u) = sum_m i^m J_m(eps) e^{imu}
and elementary integrals of exponentials times products of sines and cosines.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf, jv

from .core import ParameterError, PhysicalParams, validate
from .dirac_box import Basis
from .quadrature import gauss_legendre


class BasisMismatch(ParameterError):
    name = "BasisMismatch"


class DegenerateSpin(ParameterError):
    name = "DegenerateSpin"


class PhaseMode(str, enum.Enum):
    """How the kick phase acts on the spinor components.

    ``SCALAR``: both components pick up exp(+i eps cos). ``MASS_TERM``: the
    lower component picks up exp(-i eps cos), i.e. the kick enters through beta.
    """

    SCALAR = "scalar"
    MASS_TERM = "mass-term"


def bessel_order(eps: float) -> int:
    """Truncation order M of the Bessel series, |J_M(eps)| < 1e-16 for eps <= 10."""
    return int(math.ceil(eps)) + 30


@dataclass(frozen=True, eq=False)
class KickOperator:
    basis: Basis
    matrix: np.ndarray
    bessel_order: int
    phase_mode: PhaseMode
    kick_strength: float
    wavelength: float
    defect: float

    @property
    def size(self) -> int:
        return self.basis.size


@dataclass(frozen=True, eq=False)
class QuantumState:
    coeffs: np.ndarray
    basis: Basis
    time: float = 0.0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.basis.size,):
            raise BasisMismatch(
                f"expected {self.basis.size} coefficients, got shape {c.shape}")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)


@dataclass(frozen=True)
class GaussianPacketSpec:
    """Spinor Gaussian exp(-(x-x0)^2 / 2d^2 + i v0 x) times (s1, s2, s3, s4)."""

    center: float
    width: float
    velocity: float = 0.0
    spin: tuple = (1.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.width > 0:
            raise ParameterError(f"packet width must be positive, got {self.width!r}")
        if not abs(self.velocity) < 1:
            raise ParameterError(f"|v0| must be < 1, got {self.velocity!r}")
        if len(self.spin) != 4:
            raise ParameterError("spin needs four amplitudes")
        if sum(abs(complex(s)) ** 2 for s in self.spin) == 0:
            raise DegenerateSpin("all spin amplitudes are zero")


@dataclass(frozen=True, eq=False)
class PacketProjection:
    state: QuantumState
    captured_norm: float
    in_box_fraction: float
    support_warning: bool

    @property
    def discarded_fraction(self) -> float:
        return 1.0 - self.captured_norm


@dataclass(eq=False)
class ObservableSeries:
    time: np.ndarray
    norm: np.ndarray
    energy: np.ndarray
    position: np.ndarray
    max_step_norm_change: float = 0.0
    grid: np.ndarray | None = None
    snapshots: dict = field(default_factory=dict)
    final: QuantumState | None = None


# -- closed-form integrals over (0, L) -------------------------------------

def _exact_sinc(u):
    """sinc(u) = sin(pi u) / (pi u), exactly zero at nonzero integers."""
    out = np.sinc(u)
    out[(u == np.round(u)) & (u != 0)] = 0.0
    return out


def _exact_sin_pi(u):
    out = np.sin(np.pi * u)
    out[u == np.round(u)] = 0.0
    return out


def _exp_cos_integral(u_plus, u_minus, L):
    """int_0^L exp(iqx) cos(bx) dx from u_pm = (q +- b) L / (2 pi).

    Uses int cos(ax) = L sinc(2u) and int sin(ax) = L sin(pi u) sinc(u) with
    u = a L / 2 pi, keeping the structural zeros exact.
    """
    re = 0.5 * L * (_exact_sinc(2 * u_plus) + _exact_sinc(2 * u_minus))
    im = 0.5 * L * (_exact_sin_pi(u_plus) * _exact_sinc(u_plus)
                    + _exact_sin_pi(u_minus) * _exact_sinc(u_minus))
    return re + 1j * im


def _mode_product_integrals(basis: Basis, m: int, wavelength: float):
    """(int e^{iqx} sin_l sin_n, int e^{iqx} cos_l cos_n) for q = 2 pi m / lambda."""
    L = basis.box_length
    n = basis.n.astype(float)
    diff = 0.5 * (n[:, None] - n[None, :])
    summ = 0.5 * (n[:, None] + n[None, :])
    um = m * L / wavelength
    cos_diff = _exp_cos_integral(um + diff, um - diff, L)
    cos_sum = _exp_cos_integral(um + summ, um - summ, L)
    return 0.5 * (cos_diff - cos_sum), 0.5 * (cos_diff + cos_sum)


def unitarity_defect(matrix: np.ndarray) -> float:
    """Operator 2-norm of V^dagger V - I."""
    gram = matrix.conj().T @ matrix
    gram[np.diag_indices_from(gram)] -= 1.0
    return float(np.linalg.norm(gram, 2))


def kick_matrix(params: PhysicalParams, basis: Basis,
                phase_mode: PhaseMode = PhaseMode.SCALAR,
                order: int | None = None) -> KickOperator:
    """Kick matrix V[l, n] = <psi_n| kick |psi_l> in closed form."""
    validate(params)
    phase_mode = PhaseMode(phase_mode)
    eps = params.kick_strength
    M = bessel_order(eps) if order is None else int(order)
    N = basis.size
    if eps == 0.0:
        V = np.eye(N, dtype=complex)
    else:
        V = np.zeros((N, N), dtype=complex)
        cc_weight = np.outer(basis.ratio, basis.ratio)
        for m in range(-M, M + 1):
            b_upper = 1j ** (m % 4) * jv(m, eps)
            if phase_mode is PhaseMode.SCALAR:
                b_lower = b_upper
            else:
                b_lower = 1j ** (m % 4) * jv(m, -eps)
            if b_upper == 0 and b_lower == 0:
                continue
            ss, cc = _mode_product_integrals(basis, m, params.wavelength)
            V += b_upper * ss + b_lower * (cc_weight * cc)
        V *= 4.0 * np.outer(basis.norm, basis.norm)
    V.flags.writeable = False
    return KickOperator(basis, V, M, phase_mode, eps, params.wavelength,
                        unitarity_defect(V))


# -- state operations ------------------------------------------------------

def eigenstate(basis: Basis, level: int) -> QuantumState:
    if not 1 <= level <= basis.size:
        raise ParameterError(f"level {level} outside basis 1..{basis.size}")
    c = np.zeros(basis.size, dtype=complex)
    c[level - 1] = 1.0
    return QuantumState(c, basis)


def _same_basis(state: QuantumState, op: KickOperator):
    if state.basis != op.basis:
        raise BasisMismatch(f"state basis {state.basis!r} != operator basis {op.basis!r}")


def step(state: QuantumState, op: KickOperator, params: PhysicalParams,
         renormalize: bool = False) -> QuantumState:
    """Free phases over one period followed by the kick."""
    _same_basis(state, op)
    T = params.kick_period
    phased = state.coeffs * np.exp(-1j * state.basis.energy * T)
    new = phased @ op.matrix
    if renormalize:
        new = new / math.sqrt(float(np.vdot(new, new).real))
    return QuantumState(new, state.basis, state.time + T)


def free_evolve(state: QuantumState, dt: float, params: PhysicalParams) -> QuantumState:
    if not 0 <= dt <= params.kick_period:
        raise ParameterError(f"dt must lie in [0, T={params.kick_period}], got {dt!r}")
    phased = state.coeffs * np.exp(-1j * state.basis.energy * dt)
    return QuantumState(phased, state.basis, state.time + dt)


def norm(state: QuantumState) -> float:
    """sum_n |A_n|^2."""
    return float(np.sum(np.abs(state.coeffs) ** 2))


def mean_kinetic_energy(state: QuantumState) -> float:
    """<Psi| -i alpha_x d/dx |Psi> = sum_n |A_n|^2 (E_n - <beta>_nn).

    Relies on -i alpha_x d/dx = H0 - beta and beta being diagonal in the basis.
    """
    b = state.basis
    weights = np.abs(state.coeffs) ** 2
    return float(np.sum(weights * (b.energy - b.beta_diagonal)))


_position_cache: dict = {}


def position_matrix(basis: Basis) -> np.ndarray:
    """X[m, n] = int_0^L psi_m^dagger x psi_n dx (real symmetric)."""
    key = (basis.size, basis.box_length)
    if key in _position_cache:
        return _position_cache[key]
    L = basis.box_length
    n = basis.n

    def moment(j):
        # int_0^L x cos(j pi x / L) dx
        j = np.asarray(j)
        jf = np.where(j == 0, 1, j).astype(float)
        val = (np.where(j % 2 == 0, 1.0, -1.0) - 1.0) * (L / (math.pi * jf)) ** 2
        return np.where(j == 0, 0.5 * L * L, val)

    g_diff = moment(np.abs(n[:, None] - n[None, :]))
    g_sum = moment(n[:, None] + n[None, :])
    ss = 0.5 * (g_diff - g_sum)
    cc = 0.5 * (g_diff + g_sum)
    X = 4.0 * np.outer(basis.norm, basis.norm) * (ss + np.outer(basis.ratio, basis.ratio) * cc)
    X.flags.writeable = False
    if len(_position_cache) > 8:
        _position_cache.clear()
    _position_cache[key] = X
    return X


def mean_position(state: QuantumState) -> float:
    c = state.coeffs
    return float(np.real(np.vdot(c, position_matrix(state.basis) @ c)))


def density_profile(state: QuantumState, x) -> np.ndarray:
    """rho(x) = |sum_n A_n phi1_n(x)|^2 + |sum_n A_n chi2_n(x)|^2."""
    b = state.basis
    up = state.coeffs @ b.upper(x)
    lo = state.coeffs @ b.lower(x)
    return np.abs(up) ** 2 + np.abs(lo) ** 2


def gaussian_packet(spec: GaussianPacketSpec, basis: Basis) -> PacketProjection:
    """Project a spinor Gaussian onto the basis and renormalize.

    The envelope is unit-normalized on the real line. Only the phi1 and chi2
    amplitudes overlap with the basis; whatever the truncated positive-energy
    basis cannot represent shows up as ``captured_norm < 1``.
    """
    L = basis.box_length
    x0, d, v0 = spec.center, spec.width, spec.velocity
    if not 0 < x0 < L:
        raise ParameterError(f"packet center must lie in (0, {L}), got {x0!r}")
    spin = np.array([complex(s) for s in spec.spin])
    spin /= np.linalg.norm(spin)

    in_box = 0.5 * (erf((L - x0) / d) + erf(x0 / d))
    kmax = basis.k[-1] + abs(v0) + 1.0
    h = min(d, 2.0 * math.pi / kmax, L / 64)
    nodes, weights = gauss_legendre(0.0, L, int(math.ceil(L / h)), order=32)
    envelope = np.exp(-(nodes - x0) ** 2 / (2 * d * d) + 1j * v0 * nodes)
    envelope /= math.sqrt(d * math.sqrt(math.pi))
    wf = weights * envelope
    coeffs = (np.conj(basis.upper(nodes)) @ wf) * spin[0]
    coeffs += (basis.lower(nodes) @ wf) * spin[3]

    captured = float(np.sum(np.abs(coeffs) ** 2))
    if captured == 0:
        raise DegenerateSpin("packet has no overlap with the basis channel")
    warn = bool(in_box < 0.99)
    if warn:
        warnings.warn(f"only {in_box:.4f} of the packet lies inside the box",
                      RuntimeWarning, stacklevel=2)
    state = QuantumState(coeffs / math.sqrt(captured), basis)
    return PacketProjection(state, captured, float(in_box), warn)


def observable_series(initial: QuantumState, params: PhysicalParams, op: KickOperator,
                      n_kicks: int, samples_per_period: int = 1,
                      density_at=(), grid_points: int = 1024,
                      renormalize: bool = False) -> ObservableSeries:
    """Norm, kinetic energy and mean position sampled within and across periods.

    Samples are taken at t = kT + jT/s (j = 0..s-1) for every period and once
    more after the last kick. ``density_at`` lists kick indices at which a
    density snapshot on ``grid_points`` uniform points is stored.
    """
    _same_basis(initial, op)
    if samples_per_period < 1:
        raise ParameterError("samples_per_period must be >= 1")
    if n_kicks < 0:
        raise ParameterError("n_kicks must be >= 0")
    basis = initial.basis
    T = params.kick_period
    s = int(samples_per_period)
    X = position_matrix(basis)
    ekin = basis.energy - basis.beta_diagonal
    sub_phases = np.exp(-1j * np.outer(np.arange(s) * (T / s), basis.energy))
    period_phase = np.exp(-1j * basis.energy * T)
    V = op.matrix
    free = op.kick_strength == 0.0

    total = n_kicks * s + 1
    times = np.empty(total)
    norms = np.empty(total)
    energies = np.empty(total)
    positions = np.empty(total)
    grid = np.linspace(0.0, basis.box_length, grid_points)
    wanted = set(int(k) for k in density_at)
    snapshots = {}

    c = initial.coeffs.copy()
    t0 = initial.time
    max_change = 0.0
    for k in range(n_kicks + 1):
        if k in wanted:
            snapshots[k] = density_profile(QuantumState(c, basis), grid)
        w = np.abs(c) ** 2
        nk = w.sum()
        ek = w @ ekin
        if k == n_kicks:
            i = n_kicks * s
            times[i] = t0 + k * T
            norms[i], energies[i] = nk, ek
            positions[i] = np.real(np.vdot(c, X @ c))
            break
        B = c[None, :] * sub_phases
        sl = slice(k * s, (k + 1) * s)
        times[sl] = t0 + k * T + np.arange(s) * (T / s)
        norms[sl] = nk
        energies[sl] = ek
        positions[sl] = np.real(np.sum(np.conj(B) * (B @ X), axis=1))
        if free:
            # phases from elapsed time so rounding does not accumulate
            c = initial.coeffs * np.exp(-1j * basis.energy * ((k + 1) * T))
        else:
            c = (c * period_phase) @ V
        after = float(np.vdot(c, c).real)
        max_change = max(max_change, abs(after - nk))
        if renormalize:
            c /= math.sqrt(after)
    final = QuantumState(c, basis, t0 + n_kicks * T)
    return ObservableSeries(times, norms, energies, positions, max_change,
                            grid if wanted else None, snapshots, final)


def energy_convergence(make_state, params: PhysicalParams, basis_size: int, n_kicks: int,
                       phase_mode: PhaseMode = PhaseMode.SCALAR) -> float:
    """Max relative deviation of the kinetic-energy series between N and N/2.

    ``make_state(basis)`` builds the initial state in a given basis.
    """
    series = []
    for size in (basis_size, max(1, basis_size // 2)):
        basis = Basis(size, params.box_length)
        op = kick_matrix(params, basis, phase_mode)
        series.append(observable_series(make_state(basis), params, op, n_kicks).energy)
    full, half = series
    return float(np.max(np.abs(full - half) / np.maximum(np.abs(full), 1e-300)))
