"""Thermality diagnostics built on the second-order correction."""
import dataclasses
import math
import warnings
from typing import NamedTuple, Union

import numpy as np
from scipy import stats

from ._validation import check_positive, check_square_matrix
from .exceptions import RegimeWarning
from .qudit_algebra import DensityMatrix, gibbs_state
from .perturbation import second_order_correction
from .response_integrals import IntegralParams, build_table

INDETERMINATE = "INDETERMINATE"
# both probabilities below this fraction of lambda^2 * max|table| => O(lambda^4) channel
INDETERMINATE_FRACTION = 1e-3


class EdrVerdict(NamedTuple):
    from_level: int
    to_level: int
    forward: float
    backward: float
    ratio: Union[float, str]
    target: float
    residual: float

    @property
    def indeterminate(self):
        return self.ratio == INDETERMINATE


def _as_array(state):
    if isinstance(state, DensityMatrix):
        return np.array(state.entries)
    return check_square_matrix(state, "state")


def transition_probability(model, i, j, p, coupling, table=None):
    """P(i -> j) at order lambda^2: start in |i><i| and read off slot (j, j)."""
    if i == j:
        raise ValueError("transition_probability needs i != j")
    if table is None:
        table = build_table(model, p)
    report = second_order_correction(model, model.basis_projector(i), p, coupling, table)
    return float(report.correction[j, j].real)


def edr(model, i, j, p, coupling, table=None):
    """Excitation-to-deexcitation ratio P(i->j) / P(j->i) against exp(-beta dE)."""
    if table is None:
        table = build_table(model, p)
    fwd = transition_probability(model, i, j, p, coupling, table)
    bwd = transition_probability(model, j, i, p, coupling, table)
    beta = p.worldline.beta
    target = math.exp(-beta * (model.energies[j] - model.energies[i]))
    floor = INDETERMINATE_FRACTION * table.max_magnitude * float(coupling) ** 2
    if abs(fwd) < floor and abs(bwd) < floor:
        return EdrVerdict(i, j, fwd, bwd, INDETERMINATE, target, math.nan)
    ratio = fwd / bwd if bwd != 0 else math.inf
    return EdrVerdict(i, j, fwd, bwd, ratio, target, abs(ratio / target - 1))


def trace_distance(rho, sigma):
    diff = _as_array(rho) - _as_array(sigma)
    if diff.shape[0] != diff.shape[1]:
        raise ValueError("dimension mismatch")
    return 0.5 * float(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))).sum())


def gibbs_distance(state, model, beta):
    """Trace distance between state and the model's Gibbs state at beta."""
    rho = _as_array(state)
    if rho.shape != (model.dim, model.dim):
        raise ValueError(f"state is {rho.shape}, model has dim {model.dim}")
    return trace_distance(rho, gibbs_state(model, beta))


def coherence_norm(state):
    """l1 norm of the off-diagonal entries."""
    rho = _as_array(state)
    return float(np.abs(rho).sum() - np.abs(np.diag(rho)).sum())


def _lowest_excitation(model):
    E = np.asarray(model.energies)
    i = int(np.argmin(E))
    up = [k for k in range(model.dim)
          if model.monopole[k, i] != 0 and E[k] > E[i]]
    if not up:
        raise ValueError("ground level has no allowed excitation")
    j = min(up, key=lambda k: E[k])
    return i, j, float(E[j] - E[i])


def secular_fit(model, p, coupling, T_grid):
    """Least-squares line through the lowest excitation probability versus T.

    Returns (slope, r_squared).  Outside aT >= 50, gap*T >= 10 the growth
    is not yet linear and a RegimeWarning is raised.
    """
    grid = np.asarray(T_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("T_grid must be an increasing sequence of at least two widths")
    i, j, gap = _lowest_excitation(model)
    a = p.worldline.accel
    if a * grid[0] < 50 or gap * grid[0] < 10:
        warnings.warn(f"secular fit starts at aT={a * grid[0]:g}, gap*T={gap * grid[0]:g}; "
                      "linear growth needs aT >= 50 and gap*T >= 10",
                      RegimeWarning, stacklevel=2)
    probs = []
    for T in grid:
        T = check_positive(float(T), "switching width")
        wl = dataclasses.replace(p.worldline, switching_width=T)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RegimeWarning)
            pT = IntegralParams(wl, p.regulator)
        probs.append(transition_probability(model, i, j, pT, coupling))
    fit = stats.linregress(grid, probs)
    return float(fit.slope), float(fit.rvalue**2)
