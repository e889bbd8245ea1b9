"""Discrete algebraic Riccati and Lyapunov solvers with residual contracts.

Solutions are certified by direct substitution into the defining equation;
the numerical method (scipy's invariant-subspace solver, refined by
fixed-point iteration of the Riccati map when needed) is an implementation
detail behind the residual + stabilizing-radius contract.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, DefinitenessError, InstabilityError

DARE_TOL = 1e-10
DLYAP_TOL = 1e-11
MAX_ITER = 10000


@dataclass(frozen=True)
class ControlDareSolution:
    Pi: np.ndarray
    L: np.ndarray
    closed_loop_radius: float
    residual: float
    iterations: int


@dataclass(frozen=True)
class EstimationDareSolution:
    P: np.ndarray
    K: np.ndarray
    closed_loop_radius: float
    residual: float
    iterations: int


def spectral_radius(A) -> float:
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0.0
    return float(np.abs(np.linalg.eigvals(A)).max())


def _sym(X):
    return 0.5 * (X + X.T)


def _control_gain(Pi, A, B, S, R):
    return np.linalg.solve(B.T @ Pi @ B + R, (A.T @ Pi @ B + S).T)


def _control_residual(Pi, A, B, Q, S, R):
    """Relative residual of the closed-loop Riccati identity."""
    L = _control_gain(Pi, A, B, S, R)
    Acl = A - B @ L
    rhs = Acl.T @ Pi @ Acl + Q - L.T @ S.T - S @ L + L.T @ R @ L
    return float(np.linalg.norm(Pi - rhs) / max(1.0, np.linalg.norm(Pi)))


def _riccati_map(Pi, A, B, Q, S, R):
    G = A.T @ Pi @ B + S
    return _sym(A.T @ Pi @ A + Q - G @ np.linalg.solve(B.T @ Pi @ B + R, G.T))


def solve_control_dare(A, B, Q, S, R, tol: float = DARE_TOL,
                       max_iter: int = MAX_ITER) -> ControlDareSolution:
    """Stabilizing solution of the control-type DARE with cross weight S.

    Returns Pi and the gain L = (B'Pi B + R)^-1 (A'Pi B + S)' with
    rho(A - B L) < 1 and substitution residual <= tol.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    Q = _sym(np.asarray(Q, dtype=float))
    S = np.asarray(S, dtype=float)
    R = _sym(np.asarray(R, dtype=float))
    try:
        np.linalg.cholesky(R)
    except np.linalg.LinAlgError:
        raise DefinitenessError("R is not positive definite") from None

    Pi = None
    if B.any():
        try:
            Pi = _sym(scipy.linalg.solve_discrete_are(A, B, Q, R, s=S))
        except (scipy.linalg.LinAlgError, ValueError, np.linalg.LinAlgError):
            Pi = None
    if Pi is None:
        Pi = Q.copy()

    residual = _control_residual(Pi, A, B, Q, S, R)
    iterations = 0
    while residual > tol and iterations < max_iter:
        Pi = _riccati_map(Pi, A, B, Q, S, R)
        residual = _control_residual(Pi, A, B, Q, S, R)
        iterations += 1
    if residual > tol:
        raise ConvergenceError(
            f"control DARE did not reach residual {tol:g} after {iterations} iterations",
            residual=residual)

    L = _control_gain(Pi, A, B, S, R)
    radius = spectral_radius(A - B @ L)
    if radius >= 1.0:
        raise InstabilityError(
            f"control DARE solution is not stabilizing (radius {radius:.6g})",
            radius=radius)
    return ControlDareSolution(Pi=Pi, L=L, closed_loop_radius=radius,
                               residual=residual, iterations=iterations)


def solve_estimation_dare(A, C, W, U, V, tol: float = DARE_TOL,
                          max_iter: int = MAX_ITER) -> EstimationDareSolution:
    """Stabilizing solution of the estimation-type DARE with cross covariance U.

    Solved through duality: the control DARE on (A', C', W, U, V) with
    K = L'.  Returns P, K = (A P C' + U)(C P C' + V)^-1, rho(A - K C) < 1.
    """
    A = np.asarray(A, dtype=float)
    C = np.asarray(C, dtype=float)
    dual = solve_control_dare(A.T, C.T, W, U, V, tol=tol, max_iter=max_iter)
    P = dual.Pi
    K = dual.L.T
    return EstimationDareSolution(P=P, K=K,
                                  closed_loop_radius=dual.closed_loop_radius,
                                  residual=dual.residual,
                                  iterations=dual.iterations)


def solve_dlyap(A, Sigma, tol: float = DLYAP_TOL) -> np.ndarray:
    """Solve X = A X A' + Sigma for stable A; X symmetric PSD."""
    A = np.asarray(A, dtype=float)
    Sigma = _sym(np.asarray(Sigma, dtype=float))
    radius = spectral_radius(A)
    if radius >= 1.0:
        raise InstabilityError(
            f"discrete Lyapunov equation requires rho(A) < 1, got {radius:.6g}",
            radius=radius)
    X = _sym(scipy.linalg.solve_discrete_lyapunov(A, Sigma))

    def rel_residual(X):
        return float(np.linalg.norm(X - (A @ X @ A.T + Sigma))
                     / max(1.0, np.linalg.norm(X)))

    residual = rel_residual(X)
    iterations = 0
    while residual > tol and iterations < MAX_ITER:
        X = _sym(A @ X @ A.T + Sigma)
        residual = rel_residual(X)
        iterations += 1
    if residual > tol:
        raise ConvergenceError(
            f"discrete Lyapunov residual {residual:g} exceeds {tol:g}",
            residual=residual)
    return X
