"""Second-order perturbative final state of a qudit detector.

With O(t)_mn = O_mn exp(i w_mn t) and the integral table G / G^Theta,

    rho11_mn = sum_kl O_mk rho_kl O_ln G(w_ln, w_mk)
    rho20_mn = -sum_kl O_mk O_kl rho_ln G^Theta_+(w_mk, w_kl)
    rho02    = rho20^dagger

and the correction is lambda^2 (rho11 + rho20 + rho02).  The hard-coded
matrices further down are transcriptions of known closed-form results and
serve as independent checks of the engine's conventions.
"""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._validation import POSITIVITY_SLACK, check_state
from .exceptions import InvalidStateError, RegimeWarning
from .qudit_algebra import DensityMatrix, build_hw_model, build_su2_model
from .response_integrals import build_table


@dataclass(frozen=True, eq=False)
class CorrectionReport:
    """Order-lambda^2 correction plus where every number came from.

    integral_provenance holds one (slot, terms) pair per nonzero slot; each
    term is (coefficient, table key, conjugated).
    """

    correction: np.ndarray
    integral_provenance: list = field(repr=False)
    worst_error: float
    parts: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self):
        return self.correction.shape[0]


def _state_array(initial):
    if isinstance(initial, DensityMatrix):
        return np.array(initial.entries)
    return check_state(initial)


def _provenance(terms):
    out = []
    for slot in sorted(terms):
        merged = {}
        for coef, key, conj in terms[slot]:
            merged[(key, conj)] = merged.get((key, conj), 0) + coef
        kept = [(c, k, cj) for (k, cj), c in merged.items() if c != 0]
        if kept:
            out.append((slot, kept))
    return out


def second_order_correction(model, initial, p, coupling, table=None):
    """lambda^2 correction to the detector state after the interaction."""
    rho = _state_array(initial)
    if rho.shape != (model.dim, model.dim):
        raise InvalidStateError(f"state is {rho.shape}, model has dim {model.dim}")
    if table is None:
        table = build_table(model, p)
    O = np.asarray(model.monopole)
    E = np.asarray(model.energies)
    d = model.dim
    lam2 = float(coupling) ** 2
    bohr = E[:, None] - E[None, :]
    nz = [np.flatnonzero(O[m]) for m in range(d)]

    rho11 = np.zeros((d, d), dtype=complex)
    rho20 = np.zeros((d, d), dtype=complex)
    terms, errs = {}, np.zeros((d, d))
    for m in range(d):
        for n in range(d):
            acc11 = acc20 = 0j
            for k in nz[m]:
                for l in range(d):
                    # rho11: O_mk rho_kl O_ln G(w_ln, w_mk)
                    if O[l, n] != 0 and rho[k, l] != 0:
                        coef = O[m, k] * rho[k, l] * O[l, n]
                        key = table.key(bohr[l, n], bohr[m, k])
                        acc11 += coef * table.values[key]
                        errs[m, n] += abs(coef) * table.errors[key]
                        terms.setdefault((m, n), []).append((coef, key, False))
                    # rho20: -O_mk O_kl rho_ln G^Theta+(w_mk, w_kl)
                    if O[k, l] != 0 and rho[l, n] != 0:
                        coef = -O[m, k] * O[k, l] * rho[l, n]
                        key = table.key(bohr[m, k], bohr[k, l], "+")
                        acc20 += coef * table.values[key]
                        e = abs(coef) * table.errors[key]
                        errs[m, n] += e
                        errs[n, m] += e
                        terms.setdefault((m, n), []).append((coef, key, False))
                        terms.setdefault((n, m), []).append((np.conj(coef), key, True))
            rho11[m, n] = acc11
            rho20[m, n] = acc20
    rho02 = rho20.conj().T
    correction = lam2 * (rho11 + rho20 + rho02)
    return CorrectionReport(
        correction=correction,
        integral_provenance=_provenance(terms),
        worst_error=lam2 * float(errs.max()),
        parts={"rho11": lam2 * rho11, "rho20": lam2 * rho20, "rho02": lam2 * rho02},
    )


def assemble_final_state(initial, report):
    """initial + correction as a DensityMatrix.

    Truncating at lambda^2 can leave O(lambda^4) negative eigenvalues, so
    positivity is not enforced; a RegimeWarning reports a violation larger
    than the exact-state slack.
    """
    rho = _state_array(initial)
    if rho.shape != report.correction.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {report.correction.shape}")
    final = rho + report.correction
    # Hermiticity and trace hold up to accumulated rounding of the correction
    scale = max(1.0, float(np.abs(report.correction).max()))
    state = DensityMatrix(final, slack=np.inf, tol=1e-10 * scale)
    lam_min = float(np.linalg.eigvalsh(state.entries)[0])
    if lam_min < -POSITIVITY_SLACK:
        warnings.warn(f"perturbed state has eigenvalue {lam_min:.3e}", RegimeWarning,
                      stacklevel=2)
    return state


# --------------------------------------------------------------------------
# closed-form reference matrices
#
# Each oracle reads the named integrals out of the table and places them by
# hand; none of them calls the engine above.


def _named_qutrit(table):
    W = table.gap
    return {
        "I": table.value(W, W),
        "Lp": table.value(W, -W),
        "Lm": table.value(-W, W),
        "Q": table.value(W, W, "+"),
        "Rp": table.value(W, -W, "+"),
        "Rm": table.value(-W, W, "+"),
    }


def _oracle_report(mat, coupling, provenance):
    return CorrectionReport(correction=float(coupling) ** 2 * mat,
                            integral_provenance=provenance, worst_error=0.0)


def qutrit_oracle_diagonal(a, b, c, integrals, coupling=1.0):
    """Spin-1 correction for the initial state diag(a, b, c)."""
    pops = np.array([a, b, c], dtype=float)
    if np.any(pops < -POSITIVITY_SLACK) or abs(pops.sum() - 1) > 1e-12:
        raise InvalidStateError(f"invalid populations {pops}")
    v = _named_qutrit(integrals)
    I, Lp, Lm, Q = v["I"], v["Lp"], v["Lm"], v["Q"]
    r = np.zeros((3, 3), dtype=complex)
    r[0, 0] = 0.5 * (b * Lm - a * Lp)
    r[1, 1] = 0.5 * (a * Lp + c * Lm - b * (Lm + Lp))
    r[2, 2] = 0.5 * (b * Lp - c * Lm)
    r[0, 2] = 0.5 * (b * I - a * np.conj(Q) - c * Q)
    r[2, 0] = np.conj(r[0, 2])
    prov = [((0, 0), "b Lm - a Lp"), ((1, 1), "a Lp + c Lm - b (Lm + Lp)"),
            ((2, 2), "b Lp - c Lm"), ((0, 2), "b I - a Q* - c Q")]
    return _oracle_report(r, coupling, prov)


def qutrit_oracle_general(a, b, c, d, e, f, integrals, coupling=1.0):
    """Spin-1 correction for the general initial state [[a,d,e],[d*,b,f],[e*,f*,c]]."""
    rho = np.array([[a, d, e],
                    [np.conj(d), b, f],
                    [np.conj(e), np.conj(f), c]], dtype=complex)
    check_state(rho)
    a, b, c = (float(np.real(x)) for x in (a, b, c))
    v = _named_qutrit(integrals)
    I, Lp, Lm, Q, Rp, Rm = v["I"], v["Lp"], v["Lm"], v["Q"], v["Rp"], v["Rm"]
    cj = np.conj
    dc, ec, fc = cj(d), cj(e), cj(f)
    r = np.empty((3, 3), dtype=complex)
    r[0, 0] = -a * Lp + b * Lm - 2 * np.real(e * cj(Q))
    r[0, 1] = dc * I - d * (Lp + cj(Rm)) + f * Lm - fc * Q
    r[0, 2] = -a * cj(Q) + b * I - c * Q - e * (cj(Rm) + Rp)
    r[1, 0] = d * I - dc * (Lp + Rm) + fc * Lm - f * cj(Q)
    r[1, 1] = a * Lp - b * (Lm + Lp) + c * Lm + 2 * I * np.real(e)
    r[1, 2] = d * Lp - dc * cj(Q) - f * (Lm + Rp) + fc * I
    r[2, 0] = -a * Q + b * I - c * cj(Q) - ec * (cj(Rp) + Rm)
    r[2, 1] = dc * Lp - d * Q - fc * (Lm + cj(Rp)) + f * I
    r[2, 2] = b * Lp - c * Lm - 2 * np.real(e * Q)
    return _oracle_report(0.5 * r, coupling, [("all", "general spin-1 closed form")])


QUQUINT_NONZERO = ((0, 2), (1, 1), (1, 3), (2, 0), (2, 2), (2, 4), (3, 1), (3, 3), (4, 2))


def ququint_oracle_middle(integrals, coupling=1.0):
    """Spin-2 correction for the middle initial state |0><0|.

    Only the sparsity pattern and the coefficient magnitudes are fixed in
    closed form; the phase content of the off-centre slots follows the
    engine's own frequency bookkeeping.
    """
    v = _named_qutrit(integrals)
    W = integrals.gap
    I, Lp, Lm, Q = v["I"], v["Lp"], v["Lm"], v["Q"]
    Q_low = integrals.value(-W, -W, "+")
    s = math.sqrt(1.5)
    r = np.zeros((5, 5), dtype=complex)
    r[1, 1] = 1.5 * Lm
    r[2, 2] = -1.5 * (Lp + Lm)
    r[3, 3] = 1.5 * Lp
    r[1, 3] = r[3, 1] = 1.5 * I
    r[0, 2] = -s * Q
    r[2, 0] = -s * np.conj(Q)
    r[4, 2] = -s * Q_low
    r[2, 4] = -s * np.conj(Q_low)
    prov = [((1, 1), "3/2 Lm"), ((2, 2), "-3/2 (Lp + Lm)"), ((3, 3), "3/2 Lp"),
            ((1, 3), "3/2 full-plane"), ((3, 1), "3/2 full-plane"),
            ((0, 2), "-sqrt(3/2) half-plane"), ((2, 0), "-sqrt(3/2) half-plane"),
            ((2, 4), "-sqrt(3/2) half-plane"), ((4, 2), "-sqrt(3/2) half-plane")]
    return _oracle_report(r, coupling, prov)


def hw_oracle_diagonal(a, b, c, integrals, coupling=1.0):
    """Clock-and-shift qutrit correction for the initial state diag(a, b, c).

    Basis |0>, |1>, |2> with |0> the excited level.  q = 3/2 labels the gap.
    """
    pops = np.array([a, b, c], dtype=float)
    if np.any(pops < -POSITIVITY_SLACK) or abs(pops.sum() - 1) > 1e-12:
        raise InvalidStateError(f"invalid populations {pops}")
    W = 1.5 * integrals.gap
    L_up = integrals.value(W, -W)           # L_{+3/2}
    L_dn = integrals.value(-W, W)           # L_{-3/2}
    U_dn = integrals.value(-W, 0.0)         # U_{-3/2}
    U0 = integrals.value(0.0, 0.0)
    V_plus = integrals.value(W, 0.0, "+")   # V^+_{+3/2}
    V_minus = integrals.value(W, 0.0, "-")  # V^-_{+3/2}
    R_dn = integrals.value(-W, W, "+")      # R_{-3/2}
    cj = np.conj

    r11 = (a * np.array([[0, 0, 0], [0, L_up, L_up], [0, L_up, L_up]])
           + b * np.array([[L_dn, 0, cj(U_dn)], [0, 0, 0], [U_dn, 0, U0]])
           + c * np.array([[L_dn, cj(U_dn), 0], [U_dn, U0, 0], [0, 0, 0]]))
    r20 = -(a * np.array([[2 * L_up, V_minus, V_minus],
                          [cj(V_minus), 0, 0],
                          [cj(V_minus), 0, 0]])
            + b * np.array([[0, V_plus, 0],
                            [cj(V_plus), U0 + L_dn, cj(R_dn)],
                            [0, R_dn, 0]])
            + c * np.array([[0, 0, V_plus],
                            [0, 0, R_dn],
                            [cj(V_plus), cj(R_dn), U0 + L_dn]]))
    prov = [("rho11", "a L_{+3/2}; b, c: L_{-3/2}, U_{-3/2}, U_0"),
            ("rho20+rho02", "a: L_{+3/2}, V^-; b, c: V^+, U_0 + L_{-3/2}, R_{-3/2}")]
    return _oracle_report(np.asarray(r11 + r20, dtype=complex), coupling, prov)


# --------------------------------------------------------------------------
# oracle suites


def _rel_dev(x, y):
    x, y = np.asarray(x), np.asarray(y)
    scale = max(float(np.abs(y).max()), 1e-300)
    return float(np.abs(x - y).max()) / scale


def random_qutrit_state(rng):
    """Haar-ish random full-rank qutrit state from a Ginibre matrix."""
    g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def run_oracle_suites(p, engine=None, n_random=100, seed=0, gap=1.0):
    """Compare the engine against every closed-form matrix family.

    engine(model, state, p, coupling, table) defaults to
    second_order_correction; passing another callable lets a harness check
    that a broken engine is caught.  Returns {suite name: max relative
    deviation}.
    """
    engine = engine or second_order_correction
    su2 = build_su2_model(1, gap)
    t1 = build_table(su2, p)
    out = {}

    dev = 0.0
    for pops in ((1, 0, 0), (0, 1, 0), (0, 0, 1), (0.5, 0.3, 0.2), (0.2, 0.2, 0.6)):
        got = engine(su2, np.diag(np.array(pops, dtype=complex)), p, 1.0, t1)
        dev = max(dev, _rel_dev(got.correction, qutrit_oracle_diagonal(*pops, t1).correction))
    out["spin1-diagonal"] = dev

    psi = np.array([1, 1, 0]) / math.sqrt(2)
    got = engine(su2, np.outer(psi, psi), p, 1.0, t1)
    v = _named_qutrit(t1)
    cj = np.conj
    reference = 0.25 * np.array([
        [v["Lm"] - v["Lp"], v["I"] - v["Lp"] - cj(v["Rm"]), v["I"] - cj(v["Q"])],
        [v["I"] - v["Lp"] - v["Rm"], -v["Lm"], v["Lp"] - cj(v["Q"])],
        [v["I"] - v["Q"], v["Lp"] - v["Q"], v["Lp"]],
    ])
    out["spin1-coherent"] = _rel_dev(got.correction, reference)

    rng = np.random.default_rng(seed)
    dev = 0.0
    for _ in range(n_random):
        rho = random_qutrit_state(rng)
        got = engine(su2, rho, p, 1.0, t1)
        ref = qutrit_oracle_general(rho[0, 0].real, rho[1, 1].real, rho[2, 2].real,
                                    rho[0, 1], rho[0, 2], rho[1, 2], t1)
        dev = max(dev, _rel_dev(got.correction, ref.correction))
    out["spin1-general"] = dev

    spin2 = build_su2_model(2, gap)
    t2 = build_table(spin2, p)
    mid = np.zeros((5, 5), dtype=complex)
    mid[2, 2] = 1
    got = engine(spin2, mid, p, 1.0, t2).correction
    ref = ququint_oracle_middle(t2).correction
    pattern = np.zeros((5, 5), dtype=bool)
    for slot in QUQUINT_NONZERO:
        pattern[slot] = True
    # pattern violations count as total failure
    dev = _rel_dev(np.abs(got), np.abs(ref))
    if np.any(got[~pattern] != 0):
        dev = max(dev, np.inf)
    out["spin2-middle"] = dev

    hw = build_hw_model(3, gap)
    t3 = build_table(hw, p)
    dev = 0.0
    for pops in ((1, 0, 0), (0, 1, 0), (0, 0, 1), (0.5, 0.3, 0.2)):
        got = engine(hw, np.diag(np.array(pops, dtype=complex)), p, 1.0, t3)
        dev = max(dev, _rel_dev(got.correction, hw_oracle_diagonal(*pops, t3).correction))
    out["hw3-diagonal"] = dev
    return out
