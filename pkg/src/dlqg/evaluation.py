"""Closed-loop cost analysis: Lyapunov-based evaluation, the three-way
cost decomposition with orthogonality diagnostics, and a seeded simulator.

The infinite-horizon average cost is evaluated at stationarity:
J = trace(M Sigma) with Sigma the stationary covariance of the lifted
plant+controller state.  The decomposition splits J into the
common-information part, the private-correction part, and the
irreducible estimation part.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import ProblemInstance
from .errors import DimensionError, NoiseModelError
from .riccati import solve_dlyap, spectral_radius
from .synthesis import ControllerRealization, GainSet, assemble_realization

DLYAP_TOL = 1e-11


@dataclass(frozen=True)
class ClosedLoopModel:
    Acl: np.ndarray
    Bcl: np.ndarray
    M: np.ndarray
    noise_cov: np.ndarray


@dataclass(frozen=True)
class DecompositionReport:
    J_total: float
    J_hat_z: float
    J_tilde_z: float
    J_tilde_x: float
    cross_covariance_norms: dict

    def to_dict(self):
        return {
            "J_total": self.J_total,
            "J_hat_z": self.J_hat_z,
            "J_tilde_z": self.J_tilde_z,
            "J_tilde_x": self.J_tilde_x,
            "cross_covariance_norms": dict(self.cross_covariance_norms),
        }


def closed_loop(instance: ProblemInstance,
                realization: ControllerRealization) -> ClosedLoopModel:
    """Interconnect plant and strictly proper controller over [x; eta]."""
    d = instance.dims
    n, m, p, q = d.n, d.m, d.p, realization.q
    A, B, C = instance.system.A, instance.system.B, instance.system.C
    F, G, H = realization.F, realization.G, realization.H
    if F.shape != (q, q) or G.shape != (q, p) or H.shape != (m, q):
        raise DimensionError("controller realization shapes are inconsistent")

    Acl = np.block([[A, B @ H], [G @ C, F]])
    Bcl = np.zeros((n + q, n + p))
    Bcl[:n, :n] = np.eye(n)
    Bcl[n:, n:] = G

    T = np.zeros((n + m, n + q))
    T[:n, :n] = np.eye(n)
    T[n:, n:] = H
    M = T.T @ instance.cost.joint @ T
    return ClosedLoopModel(Acl=Acl, Bcl=Bcl, M=0.5 * (M + M.T),
                           noise_cov=instance.noise.joint)


def analytic_cost(model: ClosedLoopModel, tol: float = DLYAP_TOL) -> float:
    """Stationary average cost trace(M Sigma); requires a stable loop."""
    drive = model.Bcl @ model.noise_cov @ model.Bcl.T
    sigma = solve_dlyap(model.Acl, drive, tol=tol)
    return float(np.trace(model.M @ sigma))


def _lifted_synthesized_loop(instance: ProblemInstance, gains: GainSet):
    """State matrix and noise map of the closed loop over [x; zhat; z]."""
    d = instance.dims
    n, m, p = d.n, d.m, d.p
    sys_ = instance.system
    A, B, C, C1, B2 = sys_.A, sys_.B, sys_.C, sys_.C1, sys_.B2
    K, L, K1, L2 = gains.K, gains.L, gains.K1, gains.L2
    E2u = np.zeros((m, d.m2))
    E2u[d.m1 :, :] = np.eye(d.m2)

    # u = -L zhat - E2 L2 (z - zhat)
    u_zhat = -L + E2u @ L2
    u_z = -E2u @ L2

    Al = np.zeros((3 * n, 3 * n))
    Al[:n, :n] = A
    Al[:n, n : 2 * n] = B @ u_zhat
    Al[:n, 2 * n :] = B @ u_z
    Al[n : 2 * n, :n] = K1 @ C1
    Al[n : 2 * n, n : 2 * n] = A - K1 @ C1 - B @ L
    Al[2 * n :, :n] = K @ C
    Al[2 * n :, n : 2 * n] = -B @ L + B2 @ L2
    Al[2 * n :, 2 * n :] = A - K @ C - B2 @ L2

    Bl = np.zeros((3 * n, n + p))
    Bl[:n, :n] = np.eye(n)
    Bl[n : 2 * n, n : n + d.p1] = K1
    Bl[2 * n :, n:] = K
    return Al, Bl, u_zhat, u_z


def cost_decomposition(instance: ProblemInstance, gains: GainSet,
                       tol: float = DLYAP_TOL) -> DecompositionReport:
    """Split the synthesized closed-loop cost into its three components.

    Works from the stationary covariance of [x; zhat; z]; the components
    are the quadratic costs carried by zhat (with u_hat = -L zhat),
    z~ = z - zhat (with u~ = [0; -L2 z~]) and x~ = x - z.
    """
    d = instance.dims
    n, m = d.n, d.m
    Al, Bl, _, _ = _lifted_synthesized_loop(instance, gains)
    if spectral_radius(Al) >= 1.0:
        # solve_dlyap raises with the radius; call it for the error path.
        solve_dlyap(Al, np.eye(3 * n), tol=tol)
    drive = Bl @ instance.noise.joint @ Bl.T
    sigma = solve_dlyap(Al, drive, tol=tol)

    sel_x = np.zeros((n, 3 * n)); sel_x[:, :n] = np.eye(n)
    sel_zh = np.zeros((n, 3 * n)); sel_zh[:, n : 2 * n] = np.eye(n)
    sel_z = np.zeros((n, 3 * n)); sel_z[:, 2 * n :] = np.eye(n)
    sel_zt = sel_z - sel_zh
    sel_xt = sel_x - sel_z

    cov = lambda S1, S2: S1 @ sigma @ S2.T
    phi = instance.cost.joint

    E2u = np.zeros((m, d.m2))
    E2u[d.m1 :, :] = np.eye(d.m2)
    T_hat = np.vstack([np.eye(n), -gains.L])           # (zhat, u_hat)
    T_til = np.vstack([np.eye(n), -E2u @ gains.L2])    # (z~, u~)

    J_hat_z = float(np.trace(T_hat.T @ phi @ T_hat @ cov(sel_zh, sel_zh)))
    J_tilde_z = float(np.trace(T_til.T @ phi @ T_til @ cov(sel_zt, sel_zt)))
    J_tilde_x = float(np.trace(instance.cost.Q @ cov(sel_xt, sel_xt)))

    # Total cost from the same stationary covariance over [x; u].
    u_map = np.hstack([np.zeros((m, n)), -gains.L + E2u @ gains.L2, -E2u @ gains.L2])
    xu_map = np.vstack([sel_x, u_map])
    J_total = float(np.trace(phi @ xu_map @ sigma @ xu_map.T))

    norms = {
        "zhat_ztilde": float(np.abs(cov(sel_zh, sel_zt)).max(initial=0.0)),
        "zhat_xtilde": float(np.abs(cov(sel_zh, sel_xt)).max(initial=0.0)),
        "ztilde_xtilde": float(np.abs(cov(sel_zt, sel_xt)).max(initial=0.0)),
    }
    return DecompositionReport(J_total=J_total, J_hat_z=J_hat_z,
                               J_tilde_z=J_tilde_z, J_tilde_x=J_tilde_x,
                               cross_covariance_norms=norms)


def _jittered_cholesky(ncov):
    try:
        return np.linalg.cholesky(ncov)
    except np.linalg.LinAlgError:
        try:
            return np.linalg.cholesky(ncov + 1e-12 * np.eye(ncov.shape[0]))
        except np.linalg.LinAlgError as exc:
            raise NoiseModelError("joint noise covariance is not PSD even "
                                  "with 1e-12 jitter") from exc


def simulate(instance: ProblemInstance, realization: ControllerRealization,
             steps: int, seed: int):
    """Seeded Monte-Carlo run of the closed loop from zero initial state.

    Returns (empirical_cost, trace_summary).  Deterministic in seed on a
    given platform; noise is drawn jointly per step via Cholesky with a
    1e-12 diagonal jitter fallback for semidefinite covariances.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    model = closed_loop(instance, realization)
    d = instance.dims
    n, q = d.n, realization.q
    ncov = model.noise_cov
    if not ncov.any():
        chol = np.zeros_like(ncov)
    else:
        chol = _jittered_cholesky(ncov)

    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((steps, ncov.shape[0])) @ chol.T
    drive = noise @ model.Bcl.T

    states = np.empty((steps, n + q))
    s = np.zeros(n + q)
    Acl = model.Acl
    for t in range(steps):
        states[t] = s
        s = Acl @ s + drive[t]

    empirical_cost = float(np.sum((states @ model.M) * states) / steps)

    x = states[:, :n]
    u = states[:, n:] @ realization.H.T
    trace_summary = {
        "mean_x": x.mean(axis=0).tolist(),
        "cov_x": np.cov(x.T, bias=True).reshape(n, n).tolist(),
        "mean_u": u.mean(axis=0).tolist(),
        "cov_u": np.cov(u.T, bias=True).reshape(u.shape[1], u.shape[1]).tolist(),
        "steps": int(steps),
        "seed": int(seed),
    }
    return empirical_cost, trace_summary


def export_report(path, report: DecompositionReport, provenance: dict) -> None:
    doc = report.to_dict()
    doc["provenance"] = dict(provenance)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
