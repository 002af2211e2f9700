"""Detector species, density matrices and basis bookkeeping.

Two qudit families are provided:

* ``su2-j``: spin-j representation, monopole J_x, free Hamiltonian
  Omega (J_z + j), basis ordered m = +j, ..., -j (highest energy first).
* ``hw-d``: Heisenberg-Weyl (clock and shift) qudit, monopole X + X^dagger,
  free Hamiltonian Omega (Z + Z^dagger) / 2, basis |0>, ..., |d-1>.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from ._validation import (
    HERMITIAN_TOL,
    POSITIVITY_SLACK,
    check_positive,
    check_square_matrix,
    check_state,
    hermiticity_defect,
)


def _readonly(arr):
    arr = np.array(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DetectorModel:
    """A qudit detector: basis energies plus a Hermitian monopole operator."""

    dim: int
    energies: np.ndarray
    monopole: np.ndarray
    label: str
    gap: float

    def __post_init__(self):
        energies = np.asarray(self.energies, dtype=float)
        monopole = np.asarray(self.monopole, dtype=complex)
        if self.dim < 2:
            raise ValueError("a detector needs at least two levels")
        if energies.shape != (self.dim,) or not np.all(np.isfinite(energies)):
            raise ValueError("energies must be dim finite reals")
        if monopole.shape != (self.dim, self.dim):
            raise ValueError("monopole must be dim x dim")
        if hermiticity_defect(monopole) > HERMITIAN_TOL:
            raise ValueError("monopole must be Hermitian")
        object.__setattr__(self, "energies", _readonly(energies))
        object.__setattr__(self, "monopole", _readonly(monopole))

    @property
    def hamiltonian(self):
        return np.diag(self.energies).astype(complex)

    def basis_projector(self, index):
        """|index><index| as a complex array."""
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        rho[index, index] = 1.0
        return rho


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated, immutable detector state.

    ``slack`` is the tolerated negative eigenvalue and ``tol`` the Hermiticity
    and trace tolerance; perturbed states loosen both.
    """

    entries: np.ndarray
    slack: float = POSITIVITY_SLACK
    tol: float = HERMITIAN_TOL

    def __post_init__(self):
        arr = check_state(self.entries, slack=self.slack, hermitian_tol=self.tol,
                          trace_tol=self.tol)
        object.__setattr__(self, "entries", _readonly(arr))

    @property
    def dim(self):
        return self.entries.shape[0]

    @classmethod
    def from_populations(cls, populations):
        return cls(np.diag(np.asarray(populations, dtype=complex)))

    @classmethod
    def from_pure(cls, amplitudes):
        psi = np.asarray(amplitudes, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))


class Transition(NamedTuple):
    m: int
    n: int
    element: complex
    bohr: float


def _as_array(state):
    if isinstance(state, DensityMatrix):
        return np.array(state.entries)
    return check_square_matrix(state, "state")


def spin_matrices(j):
    """Return (J_x, J_y, J_z) for spin j in the descending Dicke basis."""
    two_j = Fraction(j).limit_denominator(2) * 2
    if two_j.denominator != 1 or two_j <= 0 or abs(float(two_j) - 2 * float(j)) > 1e-12:
        raise ValueError(f"j must be a positive integer or half-integer, got {j!r}")
    j = float(two_j) / 2
    m = np.arange(j, -j - 1, -1)
    # <m+1|J+|m> sits one row above m because the basis descends
    jp = np.diag(np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1)), 1).astype(complex)
    jm = jp.conj().T
    jx = 0.5 * (jp + jm)
    jy = -0.5j * (jp - jm)
    jz = np.diag(m).astype(complex)
    return jx, jy, jz


def build_su2_model(j, gap):
    """Spin-j detector with monopole J_x and energies gap * (m + j)."""
    gap = check_positive(gap, "gap")
    jx, _, jz = spin_matrices(j)
    two_j = jx.shape[0] - 1
    energies = gap * (np.real(np.diag(jz)) + two_j / 2)
    label = f"su2-{Fraction(two_j, 2)}"
    return DetectorModel(dim=two_j + 1, energies=energies, monopole=jx,
                         label=label, gap=gap)


def clock_shift(dim):
    """Shift X = sum |k+1 mod d><k| and clock Z = diag(exp(2 pi i k / d))."""
    shift = np.roll(np.eye(dim), 1, axis=0).astype(complex)
    clock = np.diag(np.exp(2j * np.pi * np.arange(dim) / dim))
    return shift, clock


def build_hw_model(dim, gap):
    """Heisenberg-Weyl qudit with monopole X + X^dagger."""
    if not isinstance(dim, (int, np.integer)) or dim < 2:
        raise ValueError(f"dim must be an integer >= 2, got {dim!r}")
    gap = check_positive(gap, "gap")
    shift, _ = clock_shift(dim)
    k = np.arange(dim)
    # cos(2 pi k/d) = cos(2 pi (d-k)/d) must hold exactly for the degeneracies
    kk = np.minimum(k, dim - k)
    cosines = np.round(np.cos(2 * np.pi * kk / dim), 15)
    return DetectorModel(dim=int(dim), energies=gap * cosines,
                         monopole=shift + shift.T, label=f"hw-{dim}", gap=gap)


def transition_table(model):
    """Nonzero monopole entries with their Bohr frequencies, row-major."""
    out = []
    for m in range(model.dim):
        for n in range(model.dim):
            element = complex(model.monopole[m, n])
            if element != 0:
                bohr = float(model.energies[m] - model.energies[n])
                out.append(Transition(m, n, element, bohr))
    return out


def x_o_split(state):
    """Split a qutrit state into its X-block and O-block parts."""
    rho = _as_array(state)
    if rho.shape != (3, 3):
        raise ValueError("x_o_split is defined for qutrits only")
    mask = np.array([[1, 0, 1], [0, 1, 0], [1, 0, 1]], dtype=bool)
    return np.where(mask, rho, 0), np.where(mask, 0, rho)


def gibbs_state(model, beta):
    beta = check_positive(beta, "beta")
    # shift by the ground energy so large beta*E cannot overflow
    weights = np.exp(-beta * (model.energies - model.energies.min()))
    return DensityMatrix(np.diag(weights / weights.sum()).astype(complex))
