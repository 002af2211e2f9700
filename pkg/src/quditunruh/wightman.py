"""Pulled-back Wightman functions of a massless scalar in 3+1 dimensions.

All kernels are functions of the proper-time difference u = tau - tau'.
The accelerated kernel is split as W_a = W_M + W_reg, with W_M the inertial
vacuum piece carrying the distributional singularity at u = 0 and W_reg a
smooth, even remainder that vanishes as a -> 0.
"""
import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import bernoulli

from ._validation import check_positive
from .exceptions import RegimeWarning

FOUR_PI2 = 4 * math.pi**2
SIXTEEN_PI2 = 16 * math.pi**2

SERIES_THRESHOLD = 0.05
_N_SERIES = 8


def _series_coefficients(n_terms):
    # 1/s^2 - csch^2 s = sum_{n>=1} 2^{2n} B_{2n} (2n-1) s^{2n-2} / (2n)!
    b = bernoulli(2 * n_terms)
    return np.array([
        2.0 ** (2 * n) * b[2 * n] * (2 * n - 1) / math.factorial(2 * n)
        for n in range(1, n_terms + 1)
    ])


_COEFFS = _series_coefficients(_N_SERIES)
_COEFFS_HORNER = tuple(_COEFFS[::-1])


@dataclass(frozen=True)
class WorldlineParams:
    """Uniformly accelerated, Gaussian-switched pointlike detector.

    accel is the proper acceleration a, switching_width the Gaussian width T
    of chi(tau) = exp(-tau^2/T^2) and i_epsilon the distributional shift
    u -> u - i eps (defaults to 1e-6 / a).
    """

    accel: float
    switching_width: float
    i_epsilon: float = None

    def __post_init__(self):
        a = check_positive(self.accel, "accel")
        width = check_positive(self.switching_width, "switching_width")
        eps = 1e-6 / a if self.i_epsilon is None else self.i_epsilon
        eps = check_positive(eps, "i_epsilon")
        object.__setattr__(self, "accel", a)
        object.__setattr__(self, "switching_width", width)
        object.__setattr__(self, "i_epsilon", eps)
        if eps >= width / 100:
            warnings.warn(f"i_epsilon={eps:g} is not small compared to T={width:g}",
                          RegimeWarning, stacklevel=2)

    @property
    def beta(self):
        """Inverse Unruh temperature 2 pi / a."""
        return 2 * math.pi / self.accel


def _csch2(z):
    # csch^2 is even; reflect to Re z >= 0 and use exp(-2z) to avoid overflow
    z = np.where(np.real(z) < 0, -z, z)
    return 4 * np.exp(-2 * z) / np.expm1(-2 * z) ** 2


def accel_wightman(u, params):
    """-a^2 / (16 pi^2) / sinh^2(a (u - i eps) / 2)."""
    a = params.accel
    z = 0.5 * a * (np.asarray(u) - 1j * params.i_epsilon)
    return -(a**2 / SIXTEEN_PI2) * _csch2(z)


def inertial_thermal_wightman(u, beta, epsilon):
    """Inertial detector in a thermal bath of inverse temperature beta."""
    beta = check_positive(beta, "beta")
    z = (math.pi / beta) * (np.asarray(u) - 1j * epsilon)
    return -_csch2(z) / (4 * beta**2)


def vacuum_wightman(u, epsilon):
    """Inertial Minkowski-vacuum kernel -1 / (4 pi^2 (u - i eps)^2)."""
    return -1.0 / (FOUR_PI2 * (np.asarray(u) - 1j * epsilon) ** 2)


def regular_kernel(s):
    """1/s^2 - csch^2(s), smooth and even; equals 1/3 at s = 0.

    Accepts real or complex s.  A Taylor series is used below
    SERIES_THRESHOLD where the two terms cancel catastrophically.
    """
    s = np.asarray(s) + 0.0
    s2 = s * s
    small = np.abs(s) < SERIES_THRESHOLD
    series = np.zeros_like(s2)
    for c in _COEFFS_HORNER:
        series = series * s2 + c
    safe = np.where(small, 1.0, s)
    direct = 1.0 / (safe * safe) - _csch2(safe)
    return np.where(small, series, direct)


def regular_kernel_scalar(s):
    """Scalar float fast path of regular_kernel, used inside quadrature."""
    s = abs(s)
    if s < SERIES_THRESHOLD:
        s2 = s * s
        acc = 0.0
        for c in _COEFFS_HORNER:
            acc = acc * s2 + c
        return acc
    return 1.0 / (s * s) - 4 * math.exp(-2 * s) / math.expm1(-2 * s) ** 2


def regular_part(u, accel):
    """Smooth remainder W_a - W_M = a^2/(16 pi^2) (1/s^2 - csch^2 s), s = a u/2."""
    a = check_positive(accel, "accel")
    out = (a**2 / SIXTEEN_PI2) * regular_kernel(0.5 * a * np.asarray(u))
    return out if np.ndim(out) else out[()]


class KernelSplit(NamedTuple):
    full: Callable
    vacuum: Callable
    regular: Callable


def kernel_split(params):
    """Evaluators for the Hadamard split at the worldline's i-epsilon.

    ``regular`` is the remainder at the shifted argument u - i eps, so the
    three pieces add up to the full kernel at finite eps; for real u it
    differs from regular_part(u) only at O(eps).
    """
    a, eps = params.accel, params.i_epsilon
    return KernelSplit(
        full=lambda u: accel_wightman(u, params),
        vacuum=lambda u: vacuum_wightman(u, eps),
        regular=lambda u: (a**2 / SIXTEEN_PI2) * regular_kernel(0.5 * a * (np.asarray(u) - 1j * eps)),
    )


def kms_fourier_ratio(omega, params, window_width):
    """Windowed power spectrum at +-omega and the detailed-balance ratio.

    Returns (W(omega), W(-omega), |W(omega)| / |W(-omega)|) where
    W(omega) = int du exp(-u^2 / (2 w^2)) W_a(u) exp(-i omega u).  For a
    thermal kernel the ratio approaches exp(-2 pi omega / a) as a*w grows.
    """
    from .response_integrals import line_transform

    if omega == 0:
        raise ValueError("omega must be nonzero")
    width = check_positive(window_width, "window_width")
    if params.accel * width < 20:
        warnings.warn(f"a*window = {params.accel * width:g} < 20; the windowed ratio "
                      "is far from its thermal limit", RegimeWarning, stacklevel=2)
    # line_transform uses exp(+i omega u)
    fwd, _ = line_transform(-omega, params.accel, width, params.i_epsilon)
    bwd, _ = line_transform(omega, params.accel, width, params.i_epsilon)
    return complex(fwd), complex(bwd), abs(fwd) / abs(bwd)
