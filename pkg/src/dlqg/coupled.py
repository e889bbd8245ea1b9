"""Second-layer noise model and the coupled Riccati pair.

The common-information filter sees subsystem dynamics driven by the
first-layer Kalman innovations; their joint covariance (the script noise)
feeds a pair of Riccati equations whose estimator and controller gains
depend on each other.  The pair is solved by Gauss-Seidel alternation of
standard stabilizing DAREs, then certified by substitution residuals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CostModel, NoiseModel, PartitionedSystem
from .errors import ConvergenceError, DimensionError, InstabilityError, PipelineError
from .riccati import solve_control_dare, solve_estimation_dare, spectral_radius

COUPLED_TOL = 1e-9
COUPLED_MAX_ITER = 200


@dataclass(frozen=True)
class ScriptNoise:
    Wc: np.ndarray  # n x n, innovation-drive covariance
    Uc: np.ndarray  # n x p1, cross covariance with the y1 innovation
    Vc: np.ndarray  # p1 x p1, y1 innovation covariance


@dataclass(frozen=True)
class CoupledSolution:
    P1: np.ndarray
    Pi2: np.ndarray
    K1: np.ndarray
    L2: np.ndarray
    iterations: int
    final_step_size: float
    step_history: tuple
    residual_estimation: float
    residual_control: float
    radius_est: float


def build_script_noise(P, K, system: PartitionedSystem, noise: NoiseModel) -> ScriptNoise:
    """Covariance of (omega, nu) = (K(Cx~+v), C1 x~ + v1) at stationarity.

    Wc = K (C P C' + V) K',  Uc = K (C P C1' + V1),  Vc = C1 P C1' + V11.
    """
    P = np.asarray(P, dtype=float)
    K = np.asarray(K, dtype=float)
    C, C1 = system.C, system.C1
    n, p = system.dims.n, system.dims.p
    if P.shape != (n, n):
        raise DimensionError(f"P has shape {P.shape}, expected {(n, n)}")
    if K.shape != (n, p):
        raise DimensionError(f"K has shape {K.shape}, expected {(n, p)}")
    Wc = K @ (C @ P @ C.T + noise.V) @ K.T
    Uc = K @ (C @ P @ C1.T + noise.V1)
    Vc = C1 @ P @ C1.T + noise.V11
    return ScriptNoise(Wc=0.5 * (Wc + Wc.T), Uc=Uc, Vc=0.5 * (Vc + Vc.T))


def _polish_gains(P1, Pi2, K1, L2, A, B2, C1, S2, R22, Uc, Vc, rounds=40):
    """Iterate the two gain formulas at fixed (P1, Pi2) to mutual consistency."""
    for _ in range(rounds):
        K1_new = np.linalg.solve((C1 @ P1 @ C1.T + Vc).T,
                                 ((A - B2 @ L2) @ P1 @ C1.T + Uc).T).T
        L2_new = np.linalg.solve(B2.T @ Pi2 @ B2 + R22,
                                 ((A - K1_new @ C1).T @ Pi2 @ B2 + S2).T)
        delta = max(np.abs(K1_new - K1).max(initial=0.0),
                    np.abs(L2_new - L2).max(initial=0.0))
        K1, L2 = K1_new, L2_new
        if delta <= 1e-15 * max(1.0, np.abs(K1).max(initial=0.0),
                                np.abs(L2).max(initial=0.0)):
            break
    return K1, L2


def _residuals(P1, Pi2, K1, L2, A, B2, C1, Q, S2, R22, script):
    Acl = A - K1 @ C1 - B2 @ L2
    est_rhs = (Acl @ P1 @ Acl.T + script.Wc - K1 @ script.Uc.T
               - script.Uc @ K1.T + K1 @ script.Vc @ K1.T)
    ctr_rhs = (Acl.T @ Pi2 @ Acl + Q - L2.T @ S2.T - S2 @ L2
               + L2.T @ R22 @ L2)
    res_est = np.linalg.norm(P1 - est_rhs) / max(1.0, np.linalg.norm(P1))
    res_ctr = np.linalg.norm(Pi2 - ctr_rhs) / max(1.0, np.linalg.norm(Pi2))
    return float(res_est), float(res_ctr)


def solve_coupled(system: PartitionedSystem, noise: NoiseModel, cost: CostModel,
                  script: ScriptNoise, tol: float = COUPLED_TOL,
                  max_iter: int = COUPLED_MAX_ITER, damping: float = 1.0,
                  dare_tol: float = 1e-12) -> CoupledSolution:
    """Solve the coupled estimation/control Riccati pair by alternation.

    Warm-started from the centralized feedback gain; each half-step is a
    standard stabilizing DARE.  Convergence is declared on gain deltas and
    then certified by the substitution residuals of both equations.
    """
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    A, B2, C1 = system.A, system.B2, system.C1
    Q, S2, R22 = cost.Q, cost.S2, cost.R22

    try:
        central = solve_control_dare(A, system.B, cost.Q, cost.S, cost.R, tol=dare_tol)
    except Exception as exc:
        raise PipelineError("coupled.init", exc) from exc
    L2 = central.L[system.dims.m1 :, :]
    K1 = np.zeros((system.dims.n, system.dims.p1))

    history = []
    step = np.inf
    for it in range(1, max_iter + 1):
        try:
            est = solve_estimation_dare(A - B2 @ L2, C1, script.Wc, script.Uc,
                                        script.Vc, tol=dare_tol)
            ctr = solve_control_dare(A - est.K @ C1, B2, Q, S2, R22, tol=dare_tol)
        except Exception as exc:
            raise PipelineError(f"coupled.iteration[{it}]", exc) from exc
        P1, K1_new = est.P, est.K
        Pi2 = ctr.Pi
        L2_new = (1.0 - damping) * L2 + damping * ctr.L

        scale = max(1.0, np.linalg.norm(K1_new), np.linalg.norm(L2_new))
        step = max(np.linalg.norm(K1_new - K1), np.linalg.norm(L2_new - L2)) / scale
        history.append(float(step))
        K1, L2 = K1_new, L2_new

        if step <= tol:
            K1p, L2p = _polish_gains(P1, Pi2, K1, L2, A, B2, C1, S2, R22,
                                     script.Uc, script.Vc)
            res_est, res_ctr = _residuals(P1, Pi2, K1p, L2p, A, B2, C1, Q, S2,
                                          R22, script)
            if max(res_est, res_ctr) <= tol:
                K1, L2 = K1p, L2p
                radius = spectral_radius(A - K1 @ C1 - B2 @ L2)
                if radius >= 1.0:
                    raise InstabilityError(
                        f"coupled solution not stabilizing (radius {radius:.6g})",
                        radius=radius)
                return CoupledSolution(P1=P1, Pi2=Pi2, K1=K1, L2=L2,
                                       iterations=it, final_step_size=float(step),
                                       step_history=tuple(history),
                                       residual_estimation=res_est,
                                       residual_control=res_ctr,
                                       radius_est=float(radius))

    raise ConvergenceError(
        f"coupled Riccati iteration did not converge in {max_iter} iterations "
        f"(last step {step:g})", residual=float(step), history=history)
