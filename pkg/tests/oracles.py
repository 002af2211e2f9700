"""Independent reference values computed without the factorized path.

The double integral over (t, t') is done directly with composite
Gauss-Legendre rules in t and s = t - t'.  The s mesh is graded
geometrically towards the coincidence point so the i-epsilon peak of the
kernel is resolved; nothing here knows about the (u, v) separation.
"""
import numpy as np

from quditunruh.wightman import WorldlineParams, accel_wightman

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(20)


def _composite(edges):
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1, None], edges[1:, None]
    x = 0.5 * (hi - lo) * _NODES + 0.5 * (hi + lo)
    w = 0.5 * (hi - lo) * _WEIGHTS
    return x.ravel(), w.ravel()


def _s_mesh(eps, reach, width):
    # geometric panels from eps/8 up to ~1, then uniform panels of `width`
    small = [eps / 8]
    while small[-1] < 1.0:
        small.append(small[-1] * 2)
    n = max(1, int(np.ceil((reach - small[-1]) / width)))
    tail = np.linspace(small[-1], reach, n + 1)[1:]
    pos = np.concatenate([[0.0], small, tail])
    return np.concatenate([-pos[::-1], pos[1:]])


def brute_force_transform(w1, w2, accel, T, eps, halfline="none", box=6.0, width=2.0):
    """int int dt dt' chi(t) chi(t') e^{i w1 t + i w2 t'} W_a(t - t' - i eps).

    halfline '+' or '-' keeps only t > t' or t < t'.  Both times range over
    [-box T, box T].
    """
    params = WorldlineParams(accel, T, eps)
    s, ws = _composite(_s_mesh(eps, 2 * box * T, width))
    if halfline == "+":
        keep = s > 0
    elif halfline == "-":
        keep = s < 0
    else:
        keep = np.ones_like(s, dtype=bool)
    s, ws = s[keep], ws[keep]
    kern = accel_wightman(s, params) * ws * np.exp(-1j * w2 * s)
    n_t = int(np.ceil(2 * box * T / width))
    t, wt = _composite(np.linspace(-box * T, box * T, n_t + 1))
    total = 0j
    # chunk over t to bound memory
    for start in range(0, t.size, 200):
        tt = t[start:start + 200, None]
        tp = tt - s[None, :]
        inside = np.abs(tp) <= box * T
        chi = np.exp(-(tt / T) ** 2) * np.exp(-(tp / T) ** 2) * inside
        phase = np.exp(1j * (w1 + w2) * tt)
        total += np.sum(wt[start:start + 200, None] * phase * chi * kern[None, :])
    return complex(total)
