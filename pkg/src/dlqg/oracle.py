"""Exact finite-horizon optimum over structured linear policies.

Independent ground truth for the synthesized controller.  Inputs are
parameterized as u(t) = sum_{s<t} Theta[t,s] ytilde(s) where ytilde are
purified outputs (outputs of the noise-driven plant with u = 0), with the
information-pattern mask: u1 rows may use only the y1 channels.  Purified
outputs do not depend on the inputs, so the expected M-step average cost
is a convex quadratic in Theta:

    M J(Theta) = c0 + 2 <Theta, Chat> + <Theta, Hhat Theta Lam>

with Hhat the input-trajectory curvature and Lam = Cov(ytilde stack).
The masked normal equations  mask(Hhat Theta Lam + Chat) = 0  are solved
by preconditioned conjugate gradients (the mask prevents a closed-form
two-sided solve), with an optional ridge when the system is singular.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import ProblemInstance
from .errors import ConvergenceError

SIZE_GUARD = 4000


@dataclass
class OracleResult:
    horizon: int
    J: float
    theta: np.ndarray          # (M*m, M*p), masked entries exactly zero
    free_mask: np.ndarray      # boolean, same shape
    n_free: int
    cg_iterations: int
    regularized: bool
    _quad: tuple = None        # (Hhat, Lam, Chat, c0) for cost re-evaluation

    def cost_of(self, theta) -> float:
        """Average cost of an arbitrary (masked) policy matrix."""
        Hhat, lam, chat, c0 = self._quad
        theta = np.asarray(theta, dtype=float)
        val = c0 + 2.0 * float(np.sum(theta * chat)) \
            + float(np.sum(theta * (Hhat @ theta @ lam)))
        return val / self.horizon


def _build_quadratic(instance: ProblemInstance, M: int):
    d = instance.dims
    n, m, p = d.n, d.m, d.p
    A, B, C = instance.system.A, instance.system.B, instance.system.C
    W, U, V = instance.noise.W, instance.noise.U, instance.noise.V
    Q, S, R = instance.cost.Q, instance.cost.S, instance.cost.R

    Apow = [np.eye(n)]
    for _ in range(M):
        Apow.append(A @ Apow[-1])

    # Covariance of the noise-driven state, x0(0) = 0.
    Px = [np.zeros((n, n))]
    for _ in range(M):
        Px.append(A @ Px[-1] @ A.T + W)

    # Lam[t,s] = Cov(ytilde(t), ytilde(s));  Xi[t,s] = Cov(x0(t), ytilde(s)).
    lam = np.zeros((M * p, M * p))
    xi = np.zeros((M * n, M * p))
    for s in range(M):
        PsCT = Px[s] @ C.T
        lam[s * p : (s + 1) * p, s * p : (s + 1) * p] = C @ PsCT + V
        xi[s * n : (s + 1) * n, s * p : (s + 1) * p] = PsCT
        for t in range(s + 1, M):
            blk = A @ Apow[t - 1 - s] @ PsCT + Apow[t - 1 - s] @ U
            lam[t * p : (t + 1) * p, s * p : (s + 1) * p] = C @ blk
            lam[s * p : (s + 1) * p, t * p : (t + 1) * p] = (C @ blk).T
            xi[t * n : (t + 1) * n, s * p : (s + 1) * p] = blk
    # Anti-causal side of Xi: E[x0(t) ytilde(s)'] = Px[t] (A^(s-t))' C' for t < s
    # (measurement noise at s is independent of x0(t)).
    for t in range(M):
        for s in range(t + 1, M):
            xi[t * n : (t + 1) * n, s * p : (s + 1) * p] = Px[t] @ Apow[s - t].T @ C.T

    # Causal input-to-state map: x(t) += A^(t-1-s) B u(s), s < t.
    hc = np.zeros((M * n, M * m))
    for t in range(1, M):
        for s in range(t):
            hc[t * n : (t + 1) * n, s * m : (s + 1) * m] = Apow[t - 1 - s] @ B

    Qb = np.kron(np.eye(M), Q)
    Sb = np.kron(np.eye(M), S)
    Rb = np.kron(np.eye(M), R)

    Hhat = hc.T @ Qb @ hc + hc.T @ Sb + Sb.T @ hc + Rb
    Hhat = 0.5 * (Hhat + Hhat.T)
    chat = (hc.T @ Qb + Sb.T) @ xi
    c0 = float(sum(np.trace(Q @ Px[t]) for t in range(M)))
    return Hhat, lam, chat, c0


def _free_mask(instance: ProblemInstance, M: int) -> np.ndarray:
    d = instance.dims
    m, p = d.m, d.p
    mask = np.zeros((M * m, M * p), dtype=bool)
    for t in range(M):
        for s in range(t):
            # u2 rows see both channels; u1 rows only the y1 channels.
            mask[t * m + d.m1 : (t + 1) * m, s * p : (s + 1) * p] = True
            mask[t * m : t * m + d.m1, s * p : s * p + d.p1] = True
    return mask


def _pcg(apply_op, apply_prec, rhs, tol, max_iter):
    x = np.zeros_like(rhs)
    r = rhs.copy()
    z = apply_prec(r)
    pdir = z.copy()
    rz = float(np.sum(r * z))
    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm == 0.0:
        return x, 0, True
    for it in range(1, max_iter + 1):
        op_p = apply_op(pdir)
        alpha = rz / float(np.sum(pdir * op_p))
        x += alpha * pdir
        r -= alpha * op_p
        if np.linalg.norm(r) <= tol * rhs_norm:
            return x, it, True
        z = apply_prec(r)
        rz_new = float(np.sum(r * z))
        pdir = z + (rz_new / rz) * pdir
        rz = rz_new
    return x, max_iter, False


def finite_horizon_oracle(instance: ProblemInstance, horizon: int,
                          cg_tol: float = 1e-12, max_cg_iter: int = 2000):
    """Optimal M-step average cost over information-respecting linear
    policies; returns (OracleResult, J_oracle)."""
    M = int(horizon)
    if M < 2:
        raise ValueError("horizon must be >= 2")
    if instance.dims.n * M > SIZE_GUARD:
        raise ValueError(f"problem too large: n*M = {instance.dims.n * M} "
                         f"> {SIZE_GUARD}")

    Hhat, lam, chat, c0 = _build_quadratic(instance, M)
    mask = _free_mask(instance, M)

    cho_h = scipy.linalg.cho_factor(Hhat, check_finite=False)
    cho_l = scipy.linalg.cho_factor(lam, check_finite=False)

    regularized = False
    ridge = 0.0

    def apply_op(theta):
        out = Hhat @ theta @ lam
        if ridge:
            out = out + ridge * theta
        out[~mask] = 0.0
        return out

    def apply_prec(resid):
        out = scipy.linalg.cho_solve(cho_h, resid, check_finite=False)
        out = scipy.linalg.cho_solve(cho_l, out.T, check_finite=False).T
        out[~mask] = 0.0
        return out

    rhs = -chat.copy()
    rhs[~mask] = 0.0
    theta, iters, ok = _pcg(apply_op, apply_prec, rhs, cg_tol, max_cg_iter)
    if not ok:
        regularized = True
        ridge = 1e-10 * max(1.0, float(np.abs(Hhat).max()) * float(np.abs(lam).max()))
        theta, iters, ok = _pcg(apply_op, apply_prec, rhs, cg_tol, max_cg_iter)
        if not ok:
            raise ConvergenceError("oracle normal equations did not converge "
                                   "even with ridge regularization")

    theta[~mask] = 0.0
    result = OracleResult(horizon=M, J=0.0, theta=theta, free_mask=mask,
                          n_free=int(mask.sum()), cg_iterations=iters,
                          regularized=regularized,
                          _quad=(Hhat, lam, chat, c0))
    J = result.cost_of(theta)
    result.J = J
    return result, J
