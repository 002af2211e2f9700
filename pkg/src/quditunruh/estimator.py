"""scikit-learn style wrapper: fit builds the integral table, transform
maps a batch of initial populations to second-order final populations."""
import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import RegimeWarning
from .perturbation import assemble_final_state, second_order_correction
from .qudit_algebra import DensityMatrix, build_hw_model, build_su2_model
from .response_integrals import IEpsilon, IntegralParams, NascentDelta, TanhHeaviside, build_table
from .wightman import WorldlineParams


class QuditDetector(TransformerMixin, BaseEstimator):
    """Accelerated qudit detector with a cached response-integral table.

    Parameters mirror the CLI config.  ``kind`` is 'su2' (uses ``j``) or
    'hw' (uses ``d``); ``regulator`` is 'tanh', 'nascent' or 'iepsilon'.
    """

    def __init__(self, kind="su2", j=1, d=3, gap=1.0, accel=1.0, switching=50.0,
                 i_epsilon=None, regulator="tanh", a0=None, coupling=0.01):
        self.kind = kind
        self.j = j
        self.d = d
        self.gap = gap
        self.accel = accel
        self.switching = switching
        self.i_epsilon = i_epsilon
        self.regulator = regulator
        self.a0 = a0
        self.coupling = coupling

    def _build(self):
        if self.kind == "su2":
            model = build_su2_model(self.j, self.gap)
        elif self.kind == "hw":
            model = build_hw_model(self.d, self.gap)
        else:
            raise ValueError(f"kind must be 'su2' or 'hw', got {self.kind!r}")
        wl = WorldlineParams(self.accel, self.switching, self.i_epsilon)
        if self.regulator == "iepsilon":
            reg = IEpsilon()
        elif self.regulator in ("tanh", "nascent"):
            a0 = self.a0 if self.a0 is not None else self.switching / 200
            reg = TanhHeaviside(a0) if self.regulator == "tanh" else NascentDelta(a0)
        else:
            raise ValueError(f"unknown regulator {self.regulator!r}")
        return model, IntegralParams(wl, reg)

    def fit(self, X=None, y=None):
        """Build the model and evaluate every integral it needs.  X is ignored."""
        self.model_, self.params_ = self._build()
        self.table_ = build_table(self.model_, self.params_)
        self.n_features_in_ = self.model_.dim
        return self

    def evolve(self, state):
        """Final DensityMatrix for one initial state (array or DensityMatrix)."""
        check_is_fitted(self, "table_")
        report = second_order_correction(self.model_, state, self.params_,
                                         self.coupling, self.table_)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RegimeWarning)
            return assemble_final_state(state, report)

    def transform(self, X):
        """Rows of initial populations -> rows of final populations."""
        check_is_fitted(self, "table_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} populations per row, "
                             f"got {X.shape[1]}")
        out = np.empty_like(X)
        for row, pops in enumerate(X):
            final = self.evolve(DensityMatrix.from_populations(pops))
            out[row] = np.real(np.diag(final.entries))
        return out

    def correction(self, state):
        check_is_fitted(self, "table_")
        return second_order_correction(self.model_, state, self.params_,
                                       self.coupling, self.table_)
