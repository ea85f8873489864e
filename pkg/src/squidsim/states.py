"""Construction and classification of ring states.

States are complex amplitude vectors in the truncated number basis, unit
norm.  Position-space evaluation goes through the normalised oscillator
eigenfunctions, generated by the stable three-term recurrence (factorial
formulas overflow long before n = 400).
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DegeneracyError, ParameterError, TruncationError
from .hamiltonian import (SpectralResult, barrier_between, find_potential_wells,
                          potential_energy_scaled)
from .operators import quadrature_operators
from .params import CODATA2018, derive_scales

__all__ = [
    "hermite_functions",
    "position_wavefunction",
    "coherent_state",
    "fock_state",
    "phase_superposition",
    "parity_pair",
    "WellLabel",
    "WellClassification",
    "classify_well_states",
]


def hermite_functions(n_max, x):
    """Normalised oscillator eigenfunctions phi_0..phi_n_max at points x.

    Returns an array of shape (len(x), n_max + 1); column n satisfies
    integral(phi_n^2) = 1 with phi_0(x) = pi**-0.25 * exp(-x^2/2).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((x.size, n_max + 1))
    out[:, 0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n_max >= 1:
        out[:, 1] = np.sqrt(2.0) * x * out[:, 0]
    for n in range(2, n_max + 1):
        out[:, n] = (np.sqrt(2.0 / n) * x * out[:, n - 1]
                     - np.sqrt((n - 1) / n) * out[:, n - 2])
    return out


def _as_state(psi):
    psi = np.asarray(psi, dtype=complex).ravel()
    norm = np.linalg.norm(psi)
    if norm == 0.0:
        raise ParameterError("zero state vector")
    return psi / norm


def position_wavefunction(psi, x):
    """Evaluate psi(x) = sum_n c_n phi_n(x) on a grid of dimensionless positions.

    Warns when the grid reaches beyond the classical turning point of the
    highest basis state, where the truncated basis cannot represent anything.
    """
    psi = np.asarray(psi, dtype=complex).ravel()
    x = np.asarray(x, dtype=float)
    support = np.sqrt(2.0 * (len(psi) - 1) + 1.0)
    if np.max(np.abs(x)) > support:
        warnings.warn(
            f"grid reaches |x| = {np.max(np.abs(x)):.3g}, beyond the "
            f"truncation-supported region |x| <= {support:.3g}",
            stacklevel=2)
    return hermite_functions(len(psi) - 1, x) @ psi


def fock_state(n, dim):
    """Number state |n> as an amplitude vector."""
    if not 0 <= n < dim:
        raise ParameterError(f"need 0 <= n < dim, got n={n}, dim={dim}")
    psi = np.zeros(dim, dtype=complex)
    psi[n] = 1.0
    return psi


def coherent_state(alpha, dim):
    """Coherent state amplitudes c_n = exp(-|a|^2/2) a^n / sqrt(n!), renormalised.

    Requires |alpha|^2 <= dim/4 so the Poisson tail is safely inside the
    truncation; raises TruncationError otherwise.
    """
    alpha = complex(alpha)
    if abs(alpha) ** 2 > dim / 4.0:
        raise TruncationError(
            f"|alpha|^2 = {abs(alpha)**2:.3g} exceeds dim/4 = {dim / 4.0:.3g}")
    n = np.arange(dim)
    if alpha == 0.0:
        return fock_state(0, dim)
    log_mag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1.0)
    psi = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    return psi / np.linalg.norm(psi)


def phase_superposition(psi1, psi2, theta):
    """(psi1 + exp(i*theta) * psi2) / norm for two non-parallel states."""
    psi1 = _as_state(psi1)
    psi2 = _as_state(psi2)
    if abs(np.vdot(psi1, psi2)) > 1.0 - 1e-10:
        raise DegeneracyError("superposition inputs are parallel")
    out = psi1 + np.exp(1j * theta) * psi2
    return out / np.linalg.norm(out)


def parity_pair(spectral: SpectralResult, params, scales=None,
                indices=(0, 1), constants=CODATA2018):
    """Symmetric/antisymmetric pair from two near-degenerate eigenstates.

    Returns (s, a) where s is the even-parity member.  Both signs are fixed
    by requiring a positive wavefunction value at the left well, so that
    (s + a)/sqrt(2) localises in the left well.
    """
    if scales is None:
        scales = derive_scales(params, constants)
    wells = find_potential_wells(params, scales, constants)
    if len(wells) < 2:
        raise ParameterError("parity pair needs a potential with >= 2 wells")
    x_left = wells[0].position
    dim = spectral.eigenvectors.shape[0]
    par = (-1.0) ** np.arange(dim)

    states = []
    for idx in indices:
        v = spectral.eigenvectors[:, idx].astype(complex)
        states.append((float(np.real(np.vdot(v, par * v))), v))
    states.sort(key=lambda t: -t[0])  # even parity first
    even, odd = states[0][1], states[1][1]
    if not (states[0][0] > 0.5 and states[1][0] < -0.5):
        raise DegeneracyError(
            "selected eigenstates are not parity eigenstates; "
            f"<P> = {states[0][0]:.3f}, {states[1][0]:.3f}")

    for v in (even, odd):
        val = position_wavefunction(v, np.array([x_left]))[0]
        if abs(val) < 1e-12:
            raise DegeneracyError("pair member vanishes at the well centre")
        v *= np.conj(val) / abs(val)
    return even, odd


@dataclass(frozen=True)
class WellLabel:
    """Classification of one eigenstate against the potential wells.

    kind is "localized" (bound in a single well), "pair" (member of a
    near-degenerate delocalised doublet) or "delocalized" (above every
    barrier).  For pair members, role is "s" or "a" and partner is the
    index of the other member; ordinals maps well index -> level ordinal
    occupied by this state in that well.
    """

    state_index: int
    kind: str
    mean_x: float
    energy: float
    well_index: int = -1
    level_ordinal: int = -1
    role: str = ""
    partner: int = -1
    ordinals: tuple = ()


@dataclass
class WellClassification:
    wells: list
    barriers: list          # (position, energy) between adjacent wells
    labels: list

    def pairs(self):
        return [l for l in self.labels if l.kind == "pair"]

    def localized(self, well_index=None):
        out = [l for l in self.labels if l.kind == "localized"]
        if well_index is not None:
            out = [l for l in out if l.well_index == well_index]
        return out


def classify_well_states(spectral: SpectralResult, params, scales=None,
                         constants=CODATA2018, pair_gap_ratio=0.5,
                         mixing_floor=0.05):
    """Assign (well, level ordinal) labels to eigenstates below the barriers.

    Two adjacent states form a tunnelling doublet when their gap is small
    against the bracketing level spacings (ratio `pair_gap_ratio`) and both
    carry probability mass on the two sides of an inter-well barrier (at
    least `mixing_floor` on the minority side).  That detects s/a pairs at
    exact resonance and partially mixed doublets between wells of unequal
    depth alike.  Pair roles come from the reflection symmetry about the
    midpoint of the two wells, falling back to energy order (the bonding,
    symmetric member lies lower) when the well shapes differ.  States above
    every barrier are labelled "delocalized".
    """
    if scales is None:
        scales = derive_scales(params, constants)
    wells = find_potential_wells(params, scales, constants)
    if not wells:
        raise ParameterError("potential has no local minimum in the scanned region")
    barriers = [
        barrier_between(params, scales, wells[i].position, wells[i + 1].position,
                        constants)
        for i in range(len(wells) - 1)
    ]
    top = max((b[1] for b in barriers), default=-np.inf)

    dim = spectral.eigenvectors.shape[0]
    x_op, _ = quadrature_operators(dim)
    x2_op = x_op @ x_op

    def moments(vec):
        mx = float(np.real(np.vdot(vec, x_op @ vec)))
        vx = float(np.real(np.vdot(vec, x2_op @ vec))) - mx * mx
        return mx, np.sqrt(max(vx, 0.0))

    stats = [moments(spectral.eigenvectors[:, j])
             for j in range(spectral.eigenvectors.shape[1])]
    means = [s[0] for s in stats]
    spreads = [s[1] for s in stats]

    def nearest_well(x):
        return int(np.argmin([abs(x - w.position) for w in wells]))

    energies = spectral.eigenvalues
    reach = np.sqrt(2.0 * (dim - 1) + 1.0)
    mass_grid = np.linspace(-reach, reach, 3001)
    mass_dx = mass_grid[1] - mass_grid[0]
    densities: dict = {}

    def left_mass(idx, x_barrier):
        if idx not in densities:
            psi = position_wavefunction(spectral.eigenvectors[:, idx], mass_grid)
            densities[idx] = np.abs(psi) ** 2
        dens = densities[idx]
        total = float(np.sum(dens) * mass_dx)
        left = float(np.sum(dens[mass_grid < x_barrier]) * mass_dx)
        return left / total

    def doublet_wells(j):
        """(well_lo, well_hi) when (j, j+1) behaves as an s/a pair, else None."""
        gap = energies[j + 1] - energies[j]
        brackets = []
        if j > 0:
            brackets.append(energies[j] - energies[j - 1])
        if j + 2 < len(energies):
            brackets.append(energies[j + 2] - energies[j + 1])
        if not brackets or gap >= pair_gap_ratio * max(brackets):
            return None
        best = None
        for b_idx, (x_barrier, _) in enumerate(barriers):
            mixing = min(
                min(m, 1.0 - m)
                for m in (left_mass(j, x_barrier), left_mass(j + 1, x_barrier)))
            if mixing > mixing_floor and (best is None or mixing > best[0]):
                best = (mixing, b_idx)
        if best is None:
            return None
        return best[1], best[1] + 1

    counters = [0] * len(wells)
    labels: list = [None] * len(energies)
    j = 0
    while j < len(energies):
        if energies[j] >= top:
            labels[j] = WellLabel(j, "delocalized", means[j], float(energies[j]))
            j += 1
            continue
        pair_wells = None
        if j + 1 < len(energies) and energies[j + 1] < top:
            pair_wells = doublet_wells(j)
        if pair_wells is not None:
            w_lo, w_hi = pair_wells
            midpoint = 0.5 * (wells[w_lo].position + wells[w_hi].position)
            roles = _pair_roles(spectral, (j, j + 1), midpoint)
            ordinals = ((w_lo, counters[w_lo]), (w_hi, counters[w_hi]))
            for idx, role in zip((j, j + 1), roles):
                labels[idx] = WellLabel(
                    idx, "pair", means[idx], float(energies[idx]),
                    role=role, partner=(2 * j + 1 - idx), ordinals=ordinals)
            counters[w_lo] += 1
            counters[w_hi] += 1
            j += 2
        else:
            w = nearest_well(means[j])
            labels[j] = WellLabel(j, "localized", means[j], float(energies[j]),
                                  well_index=w, level_ordinal=counters[w])
            counters[w] += 1
            j += 1
    return WellClassification(wells, barriers, labels)


def _pair_roles(spectral, indices, midpoint):
    """("s", "a") or ("a", "s") by reflection symmetry about `midpoint`.

    When the two well components have different local shapes the reflection
    overlap loses contrast; energy order then decides (the symmetric,
    bonding member of an adjacent doublet lies lower in one dimension).
    """
    dim = spectral.eigenvectors.shape[0]
    half = np.sqrt(2.0 * (dim - 1) + 1.0) / np.sqrt(2.0)
    x = np.linspace(midpoint - half, midpoint + half, 2048)
    dx = x[1] - x[0]
    overlaps = []
    for idx in indices:
        psi = position_wavefunction(spectral.eigenvectors[:, idx], x)
        overlaps.append(float(np.sum(np.conj(psi[::-1]) * psi).real * dx))
    if min(abs(o) for o in overlaps) > 0.1 and overlaps[0] * overlaps[1] < 0.0:
        return tuple("s" if o > 0.0 else "a" for o in overlaps)
    lower_first = spectral.eigenvalues[indices[0]] <= spectral.eigenvalues[indices[1]]
    return ("s", "a") if lower_first else ("a", "s")
