import numpy as np
import pytest

from dlqg import BlockDims, make_instance

SCALAR_DIMS = BlockDims(1, 1, 1, 1, 1, 1)


@pytest.fixture
def trivial_instance():
    """All-scalar-blocks instance where every invariant holds by construction."""
    eye2 = np.eye(2)
    return make_instance(
        SCALAR_DIMS,
        A=np.array([[0.5, 0.0], [0.3, 0.4]]),
        B=eye2, C=eye2,
        W=eye2, U=np.zeros((2, 2)), V=eye2,
        Q=eye2, S=np.zeros((2, 2)), R=eye2,
    )


def estimation_residual(P, K, A, C, W, U, V):
    """Relative substitution residual of the estimation Riccati identity."""
    Acl = A - K @ C
    rhs = Acl @ P @ Acl.T + W - K @ U.T - U @ K.T + K @ V @ K.T
    return np.linalg.norm(P - rhs) / max(1.0, np.linalg.norm(P))


def control_residual(Pi, L, A, B, Q, S, R):
    """Relative substitution residual of the control Riccati identity."""
    Acl = A - B @ L
    rhs = Acl.T @ Pi @ Acl + Q - L.T @ S.T - S @ L + L.T @ R @ L
    return np.linalg.norm(Pi - rhs) / max(1.0, np.linalg.norm(Pi))


def coupled_residuals(instance, gains, script):
    """Substitution residuals of the two coupled Riccati identities."""
    sys_, cost = instance.system, instance.cost
    A, B2, C1 = sys_.A, sys_.B2, sys_.C1
    Acl = A - gains.K1 @ C1 - B2 @ gains.L2
    est_rhs = (Acl @ gains.P1 @ Acl.T + script.Wc - gains.K1 @ script.Uc.T
               - script.Uc @ gains.K1.T + gains.K1 @ script.Vc @ gains.K1.T)
    ctr_rhs = (Acl.T @ gains.Pi2 @ Acl + cost.Q - gains.L2.T @ cost.S2.T
               - cost.S2 @ gains.L2 + gains.L2.T @ cost.R22 @ gains.L2)
    res_est = np.linalg.norm(gains.P1 - est_rhs) / max(1.0, np.linalg.norm(gains.P1))
    res_ctr = np.linalg.norm(gains.Pi2 - ctr_rhs) / max(1.0, np.linalg.norm(gains.Pi2))
    return float(res_est), float(res_ctr)


def single_system_lqg_cost(A, B, C, W, V, Q, R):
    """Centralized one-step-delay LQG cost for an isolated system.

    Independent oracle for decoupled instances: solve the two DAREs,
    close the loop with u = -L xhat, and evaluate the stationary cost.
    """
    from dlqg.riccati import solve_control_dare, solve_dlyap, solve_estimation_dare

    n, p = C.shape[1], C.shape[0]
    est = solve_estimation_dare(A, C, W, np.zeros((n, p)), V, tol=1e-12)
    ctr = solve_control_dare(A, B, Q, np.zeros((n, B.shape[1])), R, tol=1e-12)
    F = A - est.K @ C - B @ ctr.L
    Acl = np.block([[A, -B @ ctr.L], [est.K @ C, F]])
    Bcl = np.block([[np.eye(n), np.zeros((n, p))],
                    [np.zeros((n, n)), est.K]])
    ncov = np.block([[W, np.zeros((n, p))], [np.zeros((p, n)), V]])
    M = np.block([[Q, np.zeros((n, n))],
                  [np.zeros((n, n)), ctr.L.T @ R @ ctr.L]])
    sigma = solve_dlyap(Acl, Bcl @ ncov @ Bcl.T)
    return float(np.trace(M @ sigma))
