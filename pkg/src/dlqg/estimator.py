"""Scikit-learn style front end for the synthesis pipeline.

``fit`` takes a ProblemInstance (or a problem-file path) and computes the
optimal distributed controller; ``predict`` runs the fitted controller
over a measurement sequence.  Parameters follow the sklearn convention so
the object composes with get_params/set_params/clone.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .core import ProblemInstance, load_problem
from .evaluation import analytic_cost, closed_loop
from .synthesis import synthesize


class DistributedLQG(BaseEstimator):
    """Optimal two-subsystem output-feedback controller synthesizer.

    Parameters
    ----------
    tol : float
        Convergence tolerance of the coupled Riccati iteration.
    dare_tol : float
        Residual tolerance of the inner DARE solves.
    max_iter : int
        Outer iteration cap for the coupled pair.
    damping : float
        Step damping in (0, 1]; 1 means undamped.

    Attributes (after fit)
    ----------------------
    gains_ : GainSet
    realization_ : ControllerRealization
    cost_ : float, analytic closed-loop cost of the fitted controller.
    """

    def __init__(self, tol: float = 1e-9, dare_tol: float = 1e-12,
                 max_iter: int = 200, damping: float = 1.0):
        self.tol = tol
        self.dare_tol = dare_tol
        self.max_iter = max_iter
        self.damping = damping

    def fit(self, X, y=None):
        instance = X if isinstance(X, ProblemInstance) else load_problem(X)
        gains, realization = synthesize(instance, tol=self.tol,
                                        dare_tol=self.dare_tol,
                                        max_iter=self.max_iter,
                                        damping=self.damping)
        self.instance_ = instance
        self.gains_ = gains
        self.realization_ = realization
        self.cost_ = analytic_cost(closed_loop(instance, realization))
        return self

    def predict(self, Y):
        """Run the controller over measurements Y (T x p); returns U (T x m).

        The controller is strictly proper: U[t] depends on Y[:t] only.
        """
        check_is_fitted(self, "realization_")
        Y = np.asarray(Y, dtype=float)
        if Y.ndim != 2 or Y.shape[1] != self.realization_.G.shape[1]:
            raise ValueError(f"Y must be (T, {self.realization_.G.shape[1]})")
        r = self.realization_
        eta = np.zeros(r.q)
        U = np.empty((Y.shape[0], r.H.shape[0]))
        for t in range(Y.shape[0]):
            U[t] = r.H @ eta
            eta = r.F @ eta + r.G @ Y[t]
        return U

    def score(self, X=None, y=None):
        """Negative analytic cost (higher is better, sklearn convention)."""
        check_is_fitted(self, "cost_")
        return -self.cost_
