"""Windowed double-time transforms of the accelerated Wightman kernel.

Every second-order integral reduces to one of two primitives,

    G(w1, w2)         = int dt dt' chi(t) chi(t') e^{i w1 t + i w2 t'} W(t - t')
    G^Theta(w1, w2, +-) = same with Theta(+-(t - t')) inserted,

with chi(t) = exp(-t^2/T^2).  In the coordinates u = t - t', v = t + t' the
Gaussian switching separates, giving

    G = sqrt(pi/2) T exp(-T^2 (w1 + w2)^2 / 8) F((w1 - w2) / 2),
    F(w) = int du exp(-u^2 / (2 T^2)) e^{i w u} W(u),

and the same with a half-line integral H^+-(w) in place of F.  F and H split
into a vacuum piece (closed form, or distributional with a UV regulator for
the half line) and a regular piece (adaptive quadrature).

All values have lambda^2 stripped.
"""
import functools
import math
import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import integrate
from scipy.special import erfc

from ._validation import check_positive
from .exceptions import (
    QuadratureError,
    RegimeWarning,
    RegulatorScaleError,
    UnsupportedRegulatorError,
)
from .qudit_algebra import transition_table
from .wightman import WorldlineParams, regular_kernel_scalar

SQRT_HALF_PI = math.sqrt(math.pi / 2)
SQRT_2PI = math.sqrt(2 * math.pi)
FOUR_PI2 = 4 * math.pi**2

EPSREL = 1e-10
EPSABS = 1e-16
# exp(-x^2/2) < 1e-20 beyond this many switching widths
GAUSS_CUTOFF = math.sqrt(2 * math.log(1e20))
_QUAD_LIMIT = 2000


# --------------------------------------------------------------------------
# regulators and parameters


@dataclass(frozen=True)
class NascentDelta:
    """Gaussian nascent delta of width a0 in the Sokhotsky delta' term."""

    a0: float


@dataclass(frozen=True)
class TanhHeaviside:
    """Step function smoothed to (1 + tanh(u / a0)) / 2."""

    a0: float


@dataclass(frozen=True)
class IEpsilon:
    """Sharp step; the kernel keeps the worldline's finite i-epsilon.

    Reproduces a direct double integral at that epsilon, so it serves as
    the common ground for brute-force comparisons.
    """


RegulatorScheme = Union[NascentDelta, TanhHeaviside, IEpsilon]


@dataclass(frozen=True)
class IntegralParams:
    worldline: WorldlineParams
    regulator: RegulatorScheme = None

    def __post_init__(self):
        T = self.worldline.switching_width
        reg = self.regulator
        if reg is None:
            reg = TanhHeaviside(T / 200)
            object.__setattr__(self, "regulator", reg)
        if isinstance(reg, (NascentDelta, TanhHeaviside)):
            a0 = check_positive(reg.a0, "a0")
            if a0 >= T:
                raise RegulatorScaleError(f"a0={a0:g} must be below T={T:g}")
            if a0 > T / 20:
                warnings.warn(f"a0={a0:g} is not small compared to T={T:g}",
                              RegimeWarning, stacklevel=2)
        elif not isinstance(reg, IEpsilon):
            raise TypeError(f"unknown regulator {reg!r}")

    @property
    def kernel_epsilon(self):
        """i-epsilon used in the full-line transform (0 means the eps -> 0 limit)."""
        return self.worldline.i_epsilon if isinstance(self.regulator, IEpsilon) else 0.0


# --------------------------------------------------------------------------
# quadrature helpers


def _quad(func, lo, hi, *, weight=None, wvar=None, complex_func=False,
          epsabs=EPSABS, epsrel=EPSREL, points=None):
    kwargs = dict(epsabs=epsabs, epsrel=epsrel, limit=_QUAD_LIMIT, full_output=1)
    if weight is not None:
        kwargs.update(weight=weight, wvar=wvar)
    if points is not None:
        kwargs.update(points=points)
    if complex_func:
        kwargs.update(complex_func=True)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        res = integrate.quad(func, lo, hi, **kwargs)
    val, err = res[0], res[1]
    # a trailing message means QUADPACK flagged the result
    if complex_func:
        flagged = len(res[2]["real"]) > 1 or len(res[2]["imag"]) > 1
        # complex mode reports re_err + 1j * im_err
        err = abs(err.real) + abs(err.imag)
    else:
        flagged = len(res) > 3
    if flagged and err > max(1e3 * epsabs, 1e-6 * abs(val)):
        raise QuadratureError(f"quadrature on [{lo:g}, {hi:g}] did not converge", err)
    if not np.isfinite(val):
        raise QuadratureError(f"non-finite quadrature result on [{lo:g}, {hi:g}]", np.inf)
    return val, err


def _panels(lo, hi, max_len):
    n = max(1, int(math.ceil((hi - lo) / max_len)))
    edges = np.linspace(lo, hi, n + 1)
    return list(zip(edges[:-1], edges[1:]))


# --------------------------------------------------------------------------
# full-line transform F(w)


def vacuum_transform(omega, T, epsilon=0.0):
    """Closed form of int du e^{-u^2/(2T^2)} e^{i w u} W_M(u - i eps).

    epsilon = 0 gives the distributional limit.  The result is real.
    """
    w = omega - epsilon / T**2
    x = w * T / math.sqrt(2)
    base = (SQRT_2PI / FOUR_PI2) * (math.exp(-x * x) / T + w * SQRT_HALF_PI * erfc(-x))
    return base * math.exp(epsilon**2 / (2 * T**2) - omega * epsilon)


@functools.lru_cache(maxsize=8192)
def _regular_cos_sin(omega, accel, T, kind):
    """int_0^inf du e^{-u^2/(2T^2)} W_reg(u) {cos|sin}(w u), with its error."""
    if kind == "sin" and omega == 0:
        return 0.0, 0.0
    a = accel
    scale = a / (8 * math.pi**2)
    aT = a * T
    smax = GAUSS_CUTOFF * aT / 2
    freq = 2 * omega / a
    trig = math.cos if kind == "cos" else math.sin

    def env(s):
        return math.exp(-2 * (s / aT) ** 2) * regular_kernel_scalar(s)

    total, err = 0.0, 0.0
    split = min(1.0, smax)
    # near the origin: plain adaptive rule on the full oscillating integrand
    for lo, hi in _panels(0.0, split, max(0.25, math.pi / max(abs(freq), 1e-300))):
        v, e = _quad(lambda s: env(s) * trig(freq * s), lo, hi)
        total += v
        err += e
    if smax > split:
        if freq == 0:
            for lo, hi in _panels(split, smax, 50.0):
                v, e = _quad(env, lo, hi)
                total += v
                err += e
        else:
            for lo, hi in _panels(split, smax, 200.0):
                v, e = _quad(env, lo, hi, weight=kind, wvar=freq)
                total += v
                err += e
    return scale * total, scale * err


def regular_transform(omega, accel, T):
    """Regular-part contribution to F(w); real and even in w."""
    v, e = _regular_cos_sin(abs(float(omega)), float(accel), float(T), "cos")
    return 2 * v, 2 * e


@functools.lru_cache(maxsize=8192)
def line_transform(omega, accel, T, epsilon=0.0):
    """F(w) = int du e^{-u^2/(2T^2)} e^{i w u} W_a(u - i eps), with error.

    A finite epsilon is handled exactly by shifting the contour, which maps
    it onto the eps -> 0 transform at w - eps/T^2.
    """
    w = omega - epsilon / T**2
    vac = vacuum_transform(w, T)
    reg, err = regular_transform(w, accel, T)
    factor = math.exp(epsilon**2 / (2 * T**2) - omega * epsilon)
    return factor * (vac + reg), factor * err


# --------------------------------------------------------------------------
# half-line transform H^+(w)


@functools.lru_cache(maxsize=8192)
def _tanh_sine_integral(omega, T, a0):
    """int_0^inf tanh(u/a0) e^{-u^2/(2T^2)} sin(w u) / u^2 du."""
    if omega == 0:
        return 0.0, 0.0
    umax = GAUSS_CUTOFF * T

    def near(u):
        x = u / a0
        th = 1.0 / a0 if x < 1e-8 else math.tanh(x) / u
        sn = omega if omega * u == 0 else math.sin(omega * u) / u
        return th * sn * math.exp(-0.5 * (u / T) ** 2)

    def far(u):
        return math.tanh(u / a0) * math.exp(-0.5 * (u / T) ** 2) / (u * u)

    total, err = _quad(near, 0.0, a0)
    edges = [a0, 10 * a0, 100 * a0]
    edges = [e for e in edges if e < umax] + [umax]
    for lo, hi in zip(edges[:-1], edges[1:]):
        for plo, phi in _panels(lo, hi, 200.0 / abs(omega)):
            v, e = _quad(far, plo, phi, weight="sin", wvar=omega)
            total += v
            err += e
    return total, err


@functools.lru_cache(maxsize=8192)
def _iepsilon_half_line(omega, accel, T, epsilon):
    """int_0^inf e^{-u^2/(2T^2)} e^{i w u} W_a(u - i eps) du by direct quadrature."""
    a = accel
    umax = min(GAUSS_CUTOFF * T, 60.0 / a + 10 * epsilon)

    def f(u):
        z = 0.5 * a * (u - 1j * epsilon)
        kern = -(a * a / (16 * math.pi**2)) * 4 * np.exp(-2 * z) / np.expm1(-2 * z) ** 2
        return complex(math.exp(-0.5 * (u / T) ** 2) * kern * np.exp(1j * omega * u))

    if epsilon >= T / 100:
        raise RegulatorScaleError("i_epsilon must be far below the switching width")
    edges = [0.0]
    e = epsilon
    cap = min(T, 0.5 * math.pi / max(abs(omega), 1e-300), 2.0 / a)
    while e < umax and e < cap:
        edges.append(e)
        e *= 4
    if edges[-1] < umax:
        start = edges[-1]
        edges.extend(hi for _, hi in _panels(start, umax, cap))
    scale = 1.0 / (FOUR_PI2 * epsilon)
    total, err = 0j, 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, er = _quad(f, lo, hi, complex_func=True, epsabs=1e-15 * scale)
        total += v
        err += er
    return total, err


def vacuum_half_line(omega, T, regulator):
    """Regulated half-line vacuum transform H_M^+(w) in the eps -> 0 limit."""
    re = 0.5 * vacuum_transform(omega, T)
    if isinstance(regulator, NascentDelta):
        if omega != 0:
            raise UnsupportedRegulatorError(
                "the nascent-delta regulator only covers zero difference frequency; "
                "use TanhHeaviside")
        a0 = regulator.a0
        im = -T**2 / (4 * math.pi * SQRT_2PI * a0 * (a0**2 + T**2))
        return complex(re, im), 0.0
    if isinstance(regulator, TanhHeaviside):
        a0 = regulator.a0
        tint, terr = _tanh_sine_integral(float(omega), float(T), float(a0))
        im = -1.0 / (8 * math.pi * a0) - tint / FOUR_PI2
        return complex(re, im), terr / FOUR_PI2
    raise UnsupportedRegulatorError(f"{regulator!r} has no distributional vacuum piece")


def half_line_transform(omega, sign, params):
    """H^+-(w) = int du Theta(+-u) e^{-u^2/(2T^2)} e^{i w u} W_a(u), with error.

    H^- is the complex conjugate of H^+ because W(-u) = conj(W(u)).
    """
    if sign not in ("+", "-"):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    wl = params.worldline
    a, T = wl.accel, wl.switching_width
    omega = float(omega)
    if isinstance(params.regulator, IEpsilon):
        val, err = _iepsilon_half_line(omega, a, T, wl.i_epsilon)
    else:
        vac, verr = vacuum_half_line(omega, T, params.regulator)
        c, cerr = _regular_cos_sin(abs(omega), a, T, "cos")
        s, serr = _regular_cos_sin(abs(omega), a, T, "sin")
        s = math.copysign(s, omega) if omega else 0.0
        val = vac + complex(c, s)
        err = verr + cerr + serr
    return (val if sign == "+" else val.conjugate()), err


# --------------------------------------------------------------------------
# two-time primitives


def _envelope(w1, w2, T):
    return SQRT_HALF_PI * T * math.exp(-(T * (w1 + w2)) ** 2 / 8)


def full_plane_transform(w1, w2, params, *, full_output=False):
    """G(w1, w2) over the whole (t, t') plane."""
    T = params.worldline.switching_width
    F, err = line_transform(0.5 * (w1 - w2), params.worldline.accel, T,
                            params.kernel_epsilon)
    env = _envelope(w1, w2, T)
    val = complex(env * F)
    return (val, env * err) if full_output else val


def half_plane_transform(w1, w2, sign, params, *, full_output=False):
    """G^Theta(w1, w2, +-) restricted to +-(t - t') > 0."""
    T = params.worldline.switching_width
    H, err = half_line_transform(0.5 * (w1 - w2), sign, params)
    env = _envelope(w1, w2, T)
    val = complex(env * H)
    return (val, env * err) if full_output else val


def full_plane_vacuum(w1, w2, T):
    """Inertial-vacuum part of G(w1, w2) in the eps -> 0 limit."""
    return _envelope(w1, w2, T) * vacuum_transform(0.5 * (w1 - w2), T)


def half_plane_vacuum(w1, w2, sign, T, regulator):
    """Regulated inertial-vacuum part of G^Theta(w1, w2, +-)."""
    H, _ = vacuum_half_line(0.5 * (w1 - w2), T, regulator)
    return _envelope(w1, w2, T) * (H if sign == "+" else H.conjugate())


# named integrals at gap Omega; q scales the gap


def integral_I(params, gap):
    return full_plane_transform(gap, gap, params)


def integral_L(params, sign, gap):
    s = 1 if sign == "+" else -1
    return full_plane_transform(s * gap, -s * gap, params)


def integral_Q(params, gap):
    return half_plane_transform(gap, gap, "+", params)


def integral_R(params, sign, gap):
    s = 1 if sign == "+" else -1
    return half_plane_transform(s * gap, -s * gap, "+", params)


def integral_Lq(params, q, gap=1.0):
    return full_plane_transform(q * gap, -q * gap, params)


def integral_Rq(params, q, gap=1.0):
    return half_plane_transform(q * gap, -q * gap, "+", params)


def integral_U(params, q, gap=1.0):
    return full_plane_transform(q * gap, 0.0, params)


def integral_V(params, q, sign, gap=1.0):
    return half_plane_transform(q * gap, 0.0, sign, params)


# --------------------------------------------------------------------------
# table


HALFLINES = ("none", "+", "-")


def canonical_frequencies(values, rtol=1e-12):
    """Merge frequencies equal up to rounding; returns a mapping function.

    Magnitudes within rtol of each other share one representative and zero
    stays exactly zero, so +w and -w map to exact negatives.
    """
    mags = sorted({abs(float(v)) for v in values})
    scale = max(mags) if mags else 1.0
    reps = []
    for m in mags:
        if m <= rtol * scale:
            continue
        if reps and m - reps[-1] <= rtol * scale:
            continue
        reps.append(m)

    def snap(w):
        w = float(w)
        mag = abs(w)
        if mag <= rtol * scale:
            return 0.0
        for r in reps:
            if abs(mag - r) <= rtol * scale:
                return math.copysign(r, w)
        raise KeyError(f"frequency {w!r} is not in the table")

    return reps, snap


@dataclass(frozen=True, eq=False)
class ResponseIntegralTable:
    """Cached G / G^Theta values keyed by (w1, w2, halfline)."""

    params: IntegralParams
    gap: float
    bohr: tuple
    values: dict = field(repr=False)
    errors: dict = field(repr=False)
    _snap: object = field(repr=False, default=None)

    def key(self, w1, w2, halfline="none"):
        if halfline not in HALFLINES:
            raise ValueError(f"halfline must be one of {HALFLINES}")
        return (self._snap(w1), self._snap(w2), halfline)

    def value(self, w1, w2, halfline="none"):
        return self.values[self.key(w1, w2, halfline)]

    def error(self, w1, w2, halfline="none"):
        return self.errors[self.key(w1, w2, halfline)]

    @property
    def worst_error(self):
        return max(self.errors.values()) if self.errors else 0.0

    @property
    def max_magnitude(self):
        return max(abs(v) for v in self.values.values())

    def __len__(self):
        return len(self.values)


def evaluate_key(w1, w2, halfline, params):
    if halfline == "none":
        return full_plane_transform(w1, w2, params, full_output=True)
    return half_plane_transform(w1, w2, halfline, params, full_output=True)


def build_table(model, params):
    """Evaluate every key reachable from the model's Bohr frequencies."""
    bohr_raw = [t.bohr for t in transition_table(model)]
    _, snap = canonical_frequencies(bohr_raw + [model.gap])
    bohr = tuple(sorted({snap(w) for w in bohr_raw}))
    values, errors = {}, {}
    for w1 in bohr:
        for w2 in bohr:
            for hl in HALFLINES:
                val, err = evaluate_key(w1, w2, hl, params)
                values[(w1, w2, hl)] = val
                errors[(w1, w2, hl)] = err
    table = ResponseIntegralTable(params=params, gap=snap(model.gap), bohr=bohr,
                                  values=values, errors=errors, _snap=snap)
    _check_table_symmetry(table)
    return table


def _check_table_symmetry(table):
    # G(w1, w2) = conj G(-w2, -w1) and G^Theta+(w1, w2) = conj G^Theta-(-w2, -w1)
    flip = {"none": "none", "+": "-", "-": "+"}
    for (w1, w2, hl), val in table.values.items():
        partner = (-w2 if w2 else 0.0, -w1 if w1 else 0.0, flip[hl])
        if partner not in table.values:
            continue
        tol = 1e-9 * max(abs(val), 1e-300) + 10 * (table.errors[(w1, w2, hl)]
                                                   + table.errors[partner])
        if abs(val - table.values[partner].conjugate()) > tol:
            raise QuadratureError(f"table symmetry violated at {(w1, w2, hl)}",
                                  abs(val - table.values[partner].conjugate()))
