"""Open-system dynamics: thermal-bath master equation and trajectories.

Everything is dimensionless: the Hamiltonian in units of hbar*omega, time
as tau = omega*t, and the damping g = gamma/(hbar*omega).  The master
equation for a monochromatic bath with mean occupation M reads

    drho/dtau = -i [H, rho]
                + (g/2) (M+1) (2 a rho a† - a†a rho - rho a†a)
                + (g/2) M     (2 a† rho a - a a† rho - rho a a†),

integrated with fixed-step classical fourth-order Runge-Kutta so that
trajectories are bit-reproducible.  The generator preserves trace exactly,
so per-step renormalisation only absorbs roundoff; any larger correction
signals a step-size problem and raises.
"""

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ParameterError, PositivityWarning, StepSizeError
from .params import CODATA2018

__all__ = [
    "BathParams",
    "Observables",
    "Trajectory",
    "StateTrajectory",
    "bath_occupation",
    "lindblad_generator",
    "propagate",
    "propagate_state",
    "evolve_closed_spectral",
    "state_observables",
]


@dataclass(frozen=True)
class BathParams:
    """Monochromatic thermal bath: temperature (K), frequency (rad/s) and
    dimensionless damping rate g in units of the ring frequency.

    frequency=None means "equal to the ring frequency" and is resolved by
    the propagator.
    """

    temperature: float
    damping: float
    frequency: float | None = None

    def __post_init__(self):
        if self.temperature < 0.0:
            raise ParameterError(f"temperature must be >= 0, got {self.temperature}")
        if self.damping < 0.0:
            raise ParameterError(f"damping must be >= 0, got {self.damping}")

    def resolved(self, scales):
        """Copy with frequency filled in from the ring scales when absent."""
        if self.frequency is not None:
            return self
        return replace(self, frequency=scales.omega)


def bath_occupation(bath: BathParams, constants=CODATA2018):
    """Mean bath occupation M = 1/(exp(hbar*w_b/(kB*T)) - 1); 0 at T = 0."""
    if bath.frequency is None:
        raise ParameterError("bath frequency unresolved; call resolved() first")
    if bath.temperature == 0.0:
        return 0.0
    ratio = constants.hbar * bath.frequency / (constants.boltzmann * bath.temperature)
    return 1.0 / math.expm1(ratio)


def lindblad_generator(rho, hamiltonian, a, bath: BathParams,
                       constants=CODATA2018):
    """Right-hand side drho/dtau of the master equation (dense matrices).

    Reference implementation by matrix products; the propagator uses an
    equivalent form that exploits the ladder-operator structure.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != hamiltonian.shape or rho.shape != a.shape:
        raise ParameterError(
            f"dimension mismatch: rho {rho.shape}, H {hamiltonian.shape}, "
            f"a {a.shape}")
    g = bath.damping
    m_occ = bath_occupation(bath, constants)
    adag = a.conj().T
    out = -1j * (hamiltonian @ rho - rho @ hamiltonian)
    if g > 0.0:
        n_op = adag @ a
        out += 0.5 * g * (m_occ + 1.0) * (
            2.0 * a @ rho @ adag - n_op @ rho - rho @ n_op)
        if m_occ > 0.0:
            nbar = a @ adag
            out += 0.5 * g * m_occ * (
                2.0 * adag @ rho @ a - nbar @ rho - rho @ nbar)
    return out


@dataclass
class Observables:
    trace: float
    purity: float
    mean_x: float
    mean_p: float
    var_x: float
    var_p: float
    occupation: float


def state_observables(state):
    """Trace, purity and quadrature moments of a density matrix or vector."""
    arr = np.asarray(state, dtype=complex)
    if arr.ndim == 1:
        dim = arr.size
        norm2 = float(np.vdot(arr, arr).real)
        rec = _moments_psi(arr, dim)
        return Observables(trace=norm2, purity=1.0, **rec)
    dim = arr.shape[0]
    rec = _moments_rho(arr, dim)
    tr = float(np.trace(arr).real)
    purity = float(np.sum(np.abs(arr) ** 2))
    return Observables(trace=tr, purity=purity, **rec)


def _ladder_moments(first, second, diag_n):
    """Shared moment algebra given <a>, <a^2>, <a†a> contractions."""
    mean_x = math.sqrt(2.0) * first.real
    mean_p = math.sqrt(2.0) * first.imag
    # x^2 = (a^2 + a†^2 + 2 a†a + 1)/2, p^2 likewise with a sign on a^2 terms
    x2 = (2.0 * second.real + 2.0 * diag_n + 1.0) / 2.0
    p2 = (-2.0 * second.real + 2.0 * diag_n + 1.0) / 2.0
    return {
        "mean_x": mean_x,
        "mean_p": mean_p,
        "var_x": x2 - mean_x**2,
        "var_p": p2 - mean_p**2,
        "occupation": diag_n,
    }


def _moments_psi(psi, dim):
    s = np.sqrt(np.arange(1.0, dim))
    a_psi = np.zeros_like(psi)
    a_psi[:-1] = s * psi[1:]
    first = complex(np.vdot(psi, a_psi))
    aa_psi = np.zeros_like(psi)
    aa_psi[:-1] = s * a_psi[1:]
    second = complex(np.vdot(psi, aa_psi))
    diag_n = float(np.sum(np.arange(dim) * np.abs(psi) ** 2))
    return _ladder_moments(first, second, diag_n)


def _moments_rho(rho, dim):
    s = np.sqrt(np.arange(1.0, dim))
    diag = np.diagonal(rho).real
    first = complex(np.sum(s * np.diagonal(rho, offset=-1)))
    second = complex(np.sum(s[:-1] * s[1:] * np.diagonal(rho, offset=-2)))
    diag_n = float(np.sum(np.arange(dim) * diag))
    return _ladder_moments(first, second, diag_n)


@dataclass
class Trajectory:
    """Observable time series (and optional snapshots) of a Lindblad run."""

    times: np.ndarray
    mean_x: np.ndarray
    mean_p: np.ndarray
    var_x: np.ndarray
    var_p: np.ndarray
    occupation: np.ndarray
    trace: np.ndarray
    purity: np.ndarray
    snapshot_times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    max_trace_correction: float = 0.0

    COLUMNS = ("tau", "mean_x", "mean_p", "var_x", "var_p",
               "occupation", "trace", "purity")

    def as_table(self):
        return np.column_stack([
            self.times, self.mean_x, self.mean_p, self.var_x, self.var_p,
            self.occupation, self.trace, self.purity,
        ])

    def write_csv(self, fh):
        fh.write(",".join(self.COLUMNS) + "\n")
        for row in self.as_table():
            fh.write(",".join(f"{v:.12g}" for v in row) + "\n")


@dataclass
class StateTrajectory:
    """Observable time series of a closed (pure-state) run."""

    times: np.ndarray
    mean_x: np.ndarray
    mean_p: np.ndarray
    var_x: np.ndarray
    var_p: np.ndarray
    occupation: np.ndarray
    norm: np.ndarray
    final_state: np.ndarray = None


def propagate(rho0, hamiltonian, bath: BathParams, *, dtau=0.005, tau_max,
              record_stride=1, snapshot_stride=None, scales=None,
              constants=CODATA2018):
    """Propagate a density matrix under the thermal master equation.

    Fixed-step RK4 with per-step Hermitisation and trace renormalisation.
    Observables are recorded every `record_stride` steps (always including
    tau = 0 and tau_max); deep copies of rho are stored every
    `snapshot_stride` steps when given.  Raises StepSizeError when a single
    step changes the trace by more than 1e-6; warns when a snapshot
    develops eigenvalues below -1e-4.
    """
    rho = np.array(rho0, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ParameterError("rho0 must be a square matrix")
    dim = rho.shape[0]
    if hamiltonian.shape != rho.shape:
        raise ParameterError("Hamiltonian and rho dimensions differ")
    if scales is not None:
        bath = bath.resolved(scales)
    g = bath.damping
    m_occ = bath_occupation(bath, constants) if g > 0.0 else 0.0

    h = np.asarray(hamiltonian, dtype=complex)
    s = np.sqrt(np.arange(1.0, dim))
    n_diag = np.arange(dim, dtype=float)
    # anticommutator weights from the truncated products: a†a = diag(0..N-1)
    # but (a a†) has a zero in its last slot, not N
    aa_diag = np.arange(1.0, dim + 1.0)
    aa_diag[-1] = 0.0
    anti_down = n_diag[:, None] + n_diag[None, :]
    anti_up = aa_diag[:, None] + aa_diag[None, :]
    half_down = 0.5 * g * (m_occ + 1.0)
    half_up = 0.5 * g * m_occ
    outer_s = np.outer(s, s)

    def rhs_full(r):
        out = h @ r
        out -= r @ h
        out *= -1j
        if g > 0.0:
            out[:-1, :-1] += (2.0 * half_down) * outer_s * r[1:, 1:]
            out -= (half_down * anti_down) * r
            if half_up > 0.0:
                out[1:, 1:] += (2.0 * half_up) * outer_s * r[:-1, :-1]
                out -= (half_up * anti_up) * r
        return out

    n_steps = int(round(tau_max / dtau))
    records = []
    rec_times = []
    snapshot_times, snapshots = [], []
    max_correction = 0.0
    last_recorded = last_snapped = -1

    def record(step, r):
        nonlocal last_recorded
        rec_times.append(step * dtau)
        records.append(state_observables(r))
        last_recorded = step

    def snap(step, r):
        nonlocal last_snapped
        snapshot_times.append(step * dtau)
        snapshots.append(r.copy())
        last_snapped = step

    record(0, rho)
    if snapshot_stride is not None:
        snap(0, rho)

    for step in range(1, n_steps + 1):
        k1 = rhs_full(rho)
        k2 = rhs_full(rho + (0.5 * dtau) * k1)
        k3 = rhs_full(rho + (0.5 * dtau) * k2)
        k4 = rhs_full(rho + dtau * k3)
        rho = rho + (dtau / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        rho = 0.5 * (rho + rho.conj().T)
        tr = float(np.trace(rho).real)
        correction = abs(tr - 1.0)
        if correction > 1e-6:
            raise StepSizeError(
                f"trace changed by {correction:.3g} in one step at "
                f"tau={step * dtau:.4g}; reduce dtau")
        max_correction = max(max_correction, correction)
        rho /= tr
        if (step % record_stride == 0 or step == n_steps) and step != last_recorded:
            record(step, rho)
        if snapshot_stride is not None and step != last_snapped and (
                step % snapshot_stride == 0 or step == n_steps):
            snap(step, rho)

    for t_snap, snap_rho in zip(snapshot_times, snapshots):
        low = float(np.linalg.eigvalsh(snap_rho)[0])
        if low < -1e-4:
            warnings.warn(
                f"density matrix at tau={t_snap:.4g} has eigenvalue {low:.3g}",
                PositivityWarning, stacklevel=2)

    def col(name):
        return np.array([getattr(r, name) for r in records])

    return Trajectory(
        times=np.array(rec_times),
        mean_x=col("mean_x"), mean_p=col("mean_p"),
        var_x=col("var_x"), var_p=col("var_p"),
        occupation=col("occupation"), trace=col("trace"),
        purity=col("purity"),
        snapshot_times=snapshot_times, snapshots=snapshots,
        max_trace_correction=max_correction,
    )


def propagate_state(psi0, hamiltonian, *, dtau=0.005, tau_max,
                    record_stride=1):
    """Closed-system fixed-step RK4 for a pure state (g = 0 limit).

    Much cheaper than density-matrix propagation for long coherent runs;
    records the same quadrature observables plus the norm.
    """
    psi = np.array(psi0, dtype=complex).ravel()
    dim = psi.size
    if hamiltonian.shape != (dim, dim):
        raise ParameterError("Hamiltonian and state dimensions differ")
    h = np.asarray(hamiltonian, dtype=complex)

    n_steps = int(round(tau_max / dtau))
    rec_times, rows = [], []

    def record(step, v):
        rec_times.append(step * dtau)
        rows.append((_moments_psi(v, dim), float(np.vdot(v, v).real)))

    record(0, psi)
    for step in range(1, n_steps + 1):
        k1 = -1j * (h @ psi)
        k2 = -1j * (h @ (psi + (0.5 * dtau) * k1))
        k3 = -1j * (h @ (psi + (0.5 * dtau) * k2))
        k4 = -1j * (h @ (psi + dtau * k3))
        psi = psi + (dtau / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step % record_stride == 0 or step == n_steps:
            record(step, psi)

    return StateTrajectory(
        times=np.array(rec_times),
        mean_x=np.array([m["mean_x"] for m, _ in rows]),
        mean_p=np.array([m["mean_p"] for m, _ in rows]),
        var_x=np.array([m["var_x"] for m, _ in rows]),
        var_p=np.array([m["var_p"] for m, _ in rows]),
        occupation=np.array([m["occupation"] for m, _ in rows]),
        norm=np.array([n for _, n in rows]),
        final_state=psi,
    )


def evolve_closed_spectral(psi, spectral, tau):
    """Exact closed evolution exp(-i H tau) |psi> through an eigensystem."""
    coeff = spectral.eigenvectors.conj().T @ np.asarray(psi, dtype=complex)
    coeff = coeff * np.exp(-1j * spectral.eigenvalues * tau)
    return spectral.eigenvectors @ coeff
