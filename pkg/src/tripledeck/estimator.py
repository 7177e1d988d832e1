"""
Scikit-learn style facade.

``fit`` builds the data-independent operators (grid, multiplier table, mode
kernel); ``transform`` maps roughness profiles, one per row, to their
displacements.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .grid import Grid, RoughnessProfile
from .kernel import build_mode_kernel
from .linear import build_multiplier, solve_linear
from .nonlinear import SolverOptions, solve_nonlinear

__all__ = ["TripleDeckSolver"]


class TripleDeckSolver(TransformerMixin, BaseEstimator):
    """Roughness-to-displacement solver.

    Parameters
    ----------
    L : float
        Half period of the x window.
    n_x : int
        Number of x modes (even).
    M : float
        Sublayer height.
    n_y : int
        Number of y nodes (odd).
    nonlinear : bool
        Run the Picard iteration; otherwise return the linear response.
    tol, max_iter, alpha, epsilon, damping
        Iteration controls, see :class:`SolverOptions`.
    threads : int
        FFT worker threads.

    Attributes
    ----------
    grid_ : Grid
    table_ : MultiplierTable
    kernel_ : ModeKernel
    states_ : list
        Solver output of the last ``transform`` call, one per row.
    """

    def __init__(self, L=40.0, n_x=512, M=30.0, n_y=513, nonlinear=True, tol=1e-8,
                 max_iter=50, alpha=1.0, epsilon=1.0 / 6.0, damping=1.0, threads=1):
        self.L = L
        self.n_x = n_x
        self.M = M
        self.n_y = n_y
        self.nonlinear = nonlinear
        self.tol = tol
        self.max_iter = max_iter
        self.alpha = alpha
        self.epsilon = epsilon
        self.damping = damping
        self.threads = threads

    def fit(self, X=None, y=None):
        """Build the operators; ``X`` is only shape-checked when given."""
        self.grid_ = Grid(self.L, self.n_x, self.M, self.n_y, self.threads)
        if X is not None:
            self._validate(X)
        self.table_ = build_multiplier(self.grid_)
        self.kernel_ = build_mode_kernel(self.grid_.xi, self.grid_)
        self.n_features_in_ = self.n_x
        return self

    def _validate(self, X):
        X = check_array(X, dtype=float, ensure_2d=True)
        if X.shape[1] != self.n_x:
            raise ValueError(f"expected {self.n_x} samples per profile, got {X.shape[1]}")
        return X

    def solve(self, samples):
        """Full solver output for one profile."""
        check_is_fitted(self, "grid_")
        f = RoughnessProfile(np.asarray(samples, dtype=float), self.grid_)
        if self.nonlinear:
            opts = SolverOptions(self.tol, self.max_iter, self.alpha, self.epsilon, self.damping)
            return solve_nonlinear(f, self.grid_, opts, self.table_, self.kernel_)
        return solve_linear(f, self.grid_, self.table_, self.kernel_)

    def transform(self, X):
        """Displacement ``A(x)`` for each roughness row of ``X``."""
        check_is_fitted(self, "grid_")
        X = self._validate(X)
        self.states_ = [self.solve(row) for row in X]
        if self.nonlinear:
            return np.stack([s.a for s in self.states_])
        return np.stack([s.a0 for s in self.states_])
