import numbers

import numpy as np

from .exceptions import InvalidStateError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_SLACK = 1e-10


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite real, got {value!r}")
    return float(value)


def check_square_matrix(mat, name="matrix"):
    arr = np.asarray(mat, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be a square 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def hermiticity_defect(mat):
    return float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0


def check_state(mat, *, slack=POSITIVITY_SLACK, hermitian_tol=HERMITIAN_TOL,
                trace_tol=TRACE_TOL):
    """Validate a density matrix and return it as a complex array.

    Raises InvalidStateError on a Hermiticity, trace or positivity violation.
    """
    arr = check_square_matrix(mat, "state")
    if hermiticity_defect(arr) > hermitian_tol:
        raise InvalidStateError("state is not Hermitian")
    tr = np.trace(arr)
    if abs(tr - 1.0) > trace_tol:
        raise InvalidStateError(f"state trace is {tr.real:.15g}, expected 1")
    lam_min = float(np.linalg.eigvalsh(0.5 * (arr + arr.conj().T))[0])
    if lam_min < -slack:
        raise InvalidStateError(f"state has negative eigenvalue {lam_min:.3e}")
    return arr
