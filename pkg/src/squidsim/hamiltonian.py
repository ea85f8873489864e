"""Ring Hamiltonian in two independent representations, plus spectra.

The production path builds the Hamiltonian in the truncated number basis,

    H/(hbar*omega) = (a†a + 1/2) - (nu/omega) * cos(k*(a + a†) + 2*pi*phi_x),

with k = cosine_scale_k.  The independent cross-check discretises the
flux-basis Hamiltonian

    H = Q^2/(2C) + (Phi - Phi_x)^2/(2L) - hbar*nu*cos(2*pi*Phi/Phi_0)

with second-order central differences on a uniform flux grid and hard-wall
boundaries.  The two spectra must agree; that agreement is what validates
the number-basis route.
"""

from dataclasses import dataclass, field
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import minimize_scalar

from .errors import ConvergenceError, GridResolutionError, ParameterError
from .operators import cosine_operator, hermiticity_defect, number_operator
from .params import CODATA2018, DerivedScales, SquidParams, derive_scales

__all__ = [
    "SpectralResult",
    "FluxSweep",
    "FluxGridHamiltonian",
    "Well",
    "potential_energy",
    "potential_energy_scaled",
    "find_potential_wells",
    "barrier_between",
    "build_fock_hamiltonian",
    "build_flux_grid_hamiltonian",
    "default_flux_grid",
    "eigensolve",
    "spectrum_sweep",
    "converge_dimension",
]

DEFAULT_DIM = 400


@dataclass
class SpectralResult:
    """Ascending eigenvalues (units hbar*omega) with orthonormal column eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def residual(self, hamiltonian):
        """max |H v - E v| over the retained pairs."""
        r = hamiltonian @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        return float(np.max(np.abs(r)))


@dataclass
class FluxSweep:
    """Eigenvalue table over a bias-flux sweep: rows = bias values, cols = levels."""

    bias_values: np.ndarray
    levels: np.ndarray

    def write_csv(self, fh):
        ncols = self.levels.shape[1]
        fh.write("phi_x," + ",".join(f"E{i}" for i in range(ncols)) + "\n")
        for phi, row in zip(self.bias_values, self.levels):
            fh.write(f"{phi:.12g}," + ",".join(f"{e:.12g}" for e in row) + "\n")


def potential_energy(phi, params: SquidParams, constants=CODATA2018):
    """Ring potential U(Phi) in joule; phi in weber (scalar or array)."""
    phi = np.asarray(phi, dtype=float)
    phi_x = params.bias_flux * constants.flux_quantum
    quad = (phi - phi_x) ** 2 / (2.0 * params.inductance)
    joseph = params.josephson_energy * np.cos(
        2.0 * np.pi * phi / constants.flux_quantum
    )
    return quad - joseph


def potential_energy_scaled(x, params: SquidParams, scales: DerivedScales = None,
                            constants=CODATA2018, frame="oscillator"):
    """Dimensionless potential in units of hbar*omega at dimensionless position x.

    frame="oscillator" puts the origin at the parabola minimum (the frame of
    the number-basis Hamiltonian, where the bias enters as a cosine phase);
    frame="flux" keeps the physical flux origin, x = sqrt(C*omega/hbar)*Phi.
    """
    if scales is None:
        scales = derive_scales(params, constants)
    x = np.asarray(x, dtype=float)
    if frame == "oscillator":
        arg = np.sqrt(2.0) * scales.cosine_scale_k * x + 2.0 * np.pi * params.bias_flux
        return 0.5 * x * x - scales.nu_over_omega * np.cos(arg)
    if frame == "flux":
        phi = x / scales.x_per_weber
        return potential_energy(phi, params, constants) / (
            constants.hbar * scales.omega
        )
    raise ParameterError(f"unknown frame {frame!r}")


@dataclass(frozen=True)
class Well:
    """A local minimum of the dimensionless potential (oscillator frame)."""

    position: float   # dimensionless x
    energy: float     # hbar*omega
    curvature: float  # d2u/dx2 at the minimum


def find_potential_wells(params: SquidParams, scales: DerivedScales = None,
                         constants=CODATA2018, span=None):
    """Locate all local minima of the potential, left to right.

    A coarse scan with spacing 1e-3 of a flux quantum brackets each minimum,
    which is then refined by 1-D minimisation.
    """
    if scales is None:
        scales = derive_scales(params, constants)
    period = scales.flux_quantum_in_x
    if span is None:
        # local minima can only exist where the parabola slope can be balanced
        reach = scales.nu_over_omega * np.sqrt(2.0) * scales.cosine_scale_k
        span = reach + period
    step = 1e-3 * period
    grid = np.arange(-span, span + step, step)
    u = potential_energy_scaled(grid, params, scales, constants)
    interior = np.nonzero((u[1:-1] < u[:-2]) & (u[1:-1] <= u[2:]))[0] + 1

    def f(x):
        return potential_energy_scaled(x, params, scales, constants)

    wells = []
    for i in interior:
        res = minimize_scalar(f, bracket=(grid[i - 1], grid[i], grid[i + 1]))
        h = 1e-4
        curv = (f(res.x + h) - 2.0 * res.fun + f(res.x - h)) / h**2
        wells.append(Well(float(res.x), float(res.fun), float(curv)))
    wells.sort(key=lambda w: w.position)
    return wells


def barrier_between(params, scales, x_left, x_right, constants=CODATA2018):
    """Maximum of the dimensionless potential between two positions."""
    xs = np.linspace(x_left, x_right, 2001)
    u = potential_energy_scaled(xs, params, scales, constants)
    i = int(np.argmax(u))
    res = minimize_scalar(
        lambda x: -potential_energy_scaled(x, params, scales, constants),
        bounds=(xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]),
        method="bounded",
    )
    return float(res.x), float(-res.fun)


def build_fock_hamiltonian(params: SquidParams, scales: DerivedScales = None,
                           dim: int = DEFAULT_DIM, constants=CODATA2018):
    """Number-basis Hamiltonian in units of hbar*omega (real symmetric)."""
    if scales is None:
        scales = derive_scales(params, constants)
    h = number_operator(dim)
    np.fill_diagonal(h, np.arange(dim) + 0.5)
    cos = cosine_operator(dim, scales.cosine_scale_k,
                          2.0 * np.pi * params.bias_flux)
    return h - scales.nu_over_omega * cos


@dataclass
class FluxGridHamiltonian:
    """Central-difference discretisation of the flux-basis Hamiltonian.

    Stored as the tridiagonal (diagonal, off_diagonal) in units of
    hbar*omega on a uniform dimensionless grid x, with hard walls beyond
    the grid ends.
    """

    x: np.ndarray
    diagonal: np.ndarray
    off_diagonal: np.ndarray
    hbar_omega: float
    dx: float = field(init=False)

    def __post_init__(self):
        self.dx = float(self.x[1] - self.x[0])

    def to_dense(self):
        n = len(self.diagonal)
        h = np.zeros((n, n))
        np.fill_diagonal(h, self.diagonal)
        idx = np.arange(n - 1)
        h[idx, idx + 1] = self.off_diagonal
        h[idx + 1, idx] = self.off_diagonal
        return h

    def solve(self, count):
        """Lowest `count` eigenvalues (hbar*omega) and grid eigenfunctions.

        Eigenfunctions are normalised so that sum(|psi|^2)*dx = 1.
        """
        vals, vecs = eigh_tridiagonal(
            self.diagonal, self.off_diagonal,
            select="i", select_range=(0, count - 1),
        )
        return vals, vecs / np.sqrt(self.dx)

    def solve_values(self, count):
        return eigh_tridiagonal(
            self.diagonal, self.off_diagonal,
            select="i", select_range=(0, count - 1), eigvals_only=True,
        )


def default_flux_grid(params: SquidParams, scales: DerivedScales = None,
                      constants=CODATA2018, padding_quanta=3.0,
                      num_points=500_001):
    """Uniform dimensionless grid with walls `padding_quanta` flux quanta
    beyond the outermost potential well."""
    if scales is None:
        scales = derive_scales(params, constants)
    wells = find_potential_wells(params, scales, constants)
    period = scales.flux_quantum_in_x
    if wells:
        lo, hi = wells[0].position, wells[-1].position
    else:
        lo = hi = 0.0
    return np.linspace(lo - padding_quanta * period,
                       hi + padding_quanta * period, num_points)


def build_flux_grid_hamiltonian(params: SquidParams, grid=None,
                                scales: DerivedScales = None,
                                constants=CODATA2018, frame="oscillator",
                                min_points_per_oscillation=8):
    """Independent finite-difference Hamiltonian on a uniform position grid.

    Parameters
    ----------
    grid : ndarray, optional
        Uniform dimensionless positions; defaults to :func:`default_flux_grid`.
    frame : str
        "oscillator" (parabola at the origin, bias inside the cosine) or
        "flux" (physical flux coordinate); the two are related by a unitary
        translation and must share a spectrum.

    Raises GridResolutionError when the spacing undersamples the shortest
    local de Broglie oscillation supported by the potential range on the grid.
    """
    if scales is None:
        scales = derive_scales(params, constants)
    if grid is None:
        grid = default_flux_grid(params, scales, constants)
    grid = np.asarray(grid, dtype=float)
    dx = grid[1] - grid[0]
    if not np.allclose(np.diff(grid), dx, rtol=1e-9, atol=0.0):
        raise GridResolutionError("flux grid must be uniformly spaced")

    u = potential_energy_scaled(grid, params, scales, constants, frame=frame)
    p_max = np.sqrt(2.0 * max(float(u.max() - u.min()), 1.0))
    if dx > 2.0 * np.pi / p_max / min_points_per_oscillation:
        raise GridResolutionError(
            f"grid spacing {dx:.3g} exceeds 1/{min_points_per_oscillation} of the "
            f"shortest local oscillation {2.0 * np.pi / p_max:.3g}"
        )

    kin = 1.0 / (2.0 * dx * dx)
    diagonal = u + 2.0 * kin
    off_diagonal = np.full(len(grid) - 1, -kin)
    return FluxGridHamiltonian(grid, diagonal, off_diagonal,
                               constants.hbar * scales.omega)


def eigensolve(hamiltonian, count=None):
    """Dense Hermitian eigensolver with a deterministic phase convention.

    The returned eigenvectors are orthonormal columns, each rotated so that
    its largest-magnitude component is real and positive.
    """
    h = np.asarray(hamiltonian)
    scale = float(np.max(np.abs(h))) or 1.0
    if hermiticity_defect(h) > 1e-12 * scale:
        raise ParameterError("eigensolve requires a Hermitian matrix")
    vals, vecs = np.linalg.eigh(h)
    if count is not None:
        vals = vals[:count]
        vecs = vecs[:, :count]
    for j in range(vecs.shape[1]):
        i = int(np.argmax(np.abs(vecs[:, j])))
        piv = vecs[i, j]
        vecs[:, j] *= np.conj(piv) / abs(piv)
    if np.isrealobj(h):
        vecs = vecs.real
    return SpectralResult(vals, vecs)


def spectrum_sweep(params: SquidParams, start, stop, step, levels=10,
                   dim=DEFAULT_DIM, constants=CODATA2018, workers=1):
    """Eigenvalues of the number-basis Hamiltonian over a bias-flux range.

    Each bias point is independent; `workers` > 1 diagonalises them on a
    thread pool (LAPACK releases the GIL).
    """
    if step <= 0.0:
        raise ParameterError(f"sweep step must be > 0, got {step}")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    bias = start + step * np.arange(n)
    scales = derive_scales(params, constants)

    def solve(phi):
        h = build_fock_hamiltonian(params.with_bias(phi), scales, dim, constants)
        return np.linalg.eigvalsh(h)[:levels]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(solve, bias))
    else:
        rows = [solve(phi) for phi in bias]
    return FluxSweep(bias, np.array(rows))


def converge_dimension(params: SquidParams, levels=20, tol=1e-8,
                       dim=DEFAULT_DIM, step=100, max_dim=1000,
                       constants=CODATA2018):
    """Smallest basis size whose lowest `levels` eigenvalues are stable.

    Accepts `dim` once enlarging the basis by `step` moves none of the
    tracked eigenvalues by more than `tol` (in hbar*omega); raises
    ConvergenceError carrying the last two trial dimensions otherwise.
    """
    scales = derive_scales(params, constants)
    current = np.linalg.eigvalsh(
        build_fock_hamiltonian(params, scales, dim, constants))[:levels]
    shift = np.inf
    while dim + step <= max_dim:
        larger = np.linalg.eigvalsh(
            build_fock_hamiltonian(params, scales, dim + step, constants))[:levels]
        shift = float(np.max(np.abs(larger - current)))
        if shift < tol:
            return dim, current
        dim += step
        current = larger
    raise ConvergenceError(
        f"eigenvalues moved by {shift:.3g} (> {tol}) between dim={dim - step} "
        f"and dim={dim}; max_dim={max_dim} reached", dims=(dim - step, dim))
