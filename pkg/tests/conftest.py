import numpy as np
import pytest

import squidsim as sq


@pytest.fixture(scope="session")
def standard_scales():
    return sq.derive_scales(sq.standard_ring())


@pytest.fixture(scope="session")
def spectral_049():
    """Eigensystem of the standard ring at the detuned double-well bias."""
    ring = sq.standard_ring(0.49)
    scales = sq.derive_scales(ring)
    h = sq.build_fock_hamiltonian(ring, scales, 400)
    return ring, scales, h, sq.eigensolve(h)


@pytest.fixture(scope="session")
def spectral_05():
    """Eigensystem of the standard ring at the symmetric double-well bias."""
    ring = sq.standard_ring(0.5)
    scales = sq.derive_scales(ring)
    h = sq.build_fock_hamiltonian(ring, scales, 400)
    return ring, scales, h, sq.eigensolve(h)


@pytest.fixture(scope="session")
def quadratures_400():
    x, p = sq.quadrature_operators(400)
    return x, p


def expectation(op, psi):
    return complex(np.vdot(psi, op @ psi))
