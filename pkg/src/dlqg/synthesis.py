"""End-to-end controller synthesis and realization assembly.

Pipeline: centralized estimation and control DAREs, script-noise
construction, the coupled pair, then a strictly proper state-space
realization over the controller state [zhat; z].  The realization is
built so the information-pattern constraint (u1 is a function of the
y1 history only) is visible as exact structural zeros.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .coupled import build_script_noise, solve_coupled
from .core import BlockDims, PartitionedSystem, ProblemInstance, validate
from .errors import DimensionError, InstabilityError, ParseError, PipelineError, ValidationFailure
from .riccati import solve_control_dare, solve_estimation_dare, spectral_radius


@dataclass(frozen=True)
class GainSet:
    P: np.ndarray
    Pi: np.ndarray
    P1: np.ndarray
    Pi2: np.ndarray
    K: np.ndarray
    L: np.ndarray
    K1: np.ndarray
    L2: np.ndarray


@dataclass(frozen=True)
class BlockStructure:
    """Index ranges (start, stop) into the controller state, inputs, outputs."""

    zhat: tuple
    z: tuple
    y1: tuple
    y2: tuple
    u1: tuple
    u2: tuple


@dataclass(frozen=True)
class ControllerRealization:
    """Strictly proper LTI controller eta+ = F eta + G y, u = H eta."""

    F: np.ndarray
    G: np.ndarray
    H: np.ndarray
    q: int
    blocks: BlockStructure | None = None


def assemble_realization(gains: GainSet, system: PartitionedSystem) -> ControllerRealization:
    """Realize the optimal two-layer controller with state eta = [zhat; z].

    zhat is the y1-driven estimate of the centralized filter state z; the
    control is u = -L zhat - E2 L2 (z - zhat) with E2 embedding u2.  The
    top-right block of G and the u1 rows of H over the z block are exact
    zeros, which encodes the information pattern structurally.
    """
    return _realization_from_gains(gains.K, gains.L, gains.K1, gains.L2, system)


def _realization_from_gains(K, L, K1, L2, system: PartitionedSystem) -> ControllerRealization:
    d = system.dims
    n, m, p = d.n, d.m, d.p
    A, B, C, C1, B2 = system.A, system.B, system.C, system.C1, system.B2
    if K.shape != (n, p) or L.shape != (m, n):
        raise DimensionError("K or L has an inconsistent shape")
    if K1.shape != (n, d.p1) or L2.shape != (d.m2, n):
        raise DimensionError("K1 or L2 has an inconsistent shape")

    E2u = np.zeros((m, d.m2))
    E2u[d.m1 :, :] = np.eye(d.m2)

    F = np.zeros((2 * n, 2 * n))
    F[:n, :n] = A - K1 @ C1 - B @ L
    F[n:, :n] = -B @ L + B2 @ L2
    F[n:, n:] = A - K @ C - B2 @ L2

    G = np.zeros((2 * n, p))
    G[:n, : d.p1] = K1
    G[n:, :] = K

    H = np.hstack([-L + E2u @ L2, -E2u @ L2])

    blocks = BlockStructure(zhat=(0, n), z=(n, 2 * n), y1=(0, d.p1), y2=(d.p1, p),
                            u1=(0, d.m1), u2=(d.m1, m))
    return ControllerRealization(F=F, G=G, H=H, q=2 * n, blocks=blocks)


def synthesize(instance: ProblemInstance, tol: float = 1e-9,
               dare_tol: float = 1e-12, max_iter: int = 200,
               damping: float = 1.0):
    """Full synthesis pipeline; returns (GainSet, ControllerRealization)."""
    report = validate(instance)
    if report:
        raise ValidationFailure(report)

    sys_, noise, cost = instance.system, instance.noise, instance.cost
    try:
        est = solve_estimation_dare(sys_.A, sys_.C, noise.W, noise.U, noise.V,
                                    tol=dare_tol)
    except Exception as exc:
        raise PipelineError("estimation_dare", exc) from exc
    try:
        ctr = solve_control_dare(sys_.A, sys_.B, cost.Q, cost.S, cost.R,
                                 tol=dare_tol)
    except Exception as exc:
        raise PipelineError("control_dare", exc) from exc

    script = build_script_noise(est.P, est.K, sys_, noise)
    try:
        coupled = solve_coupled(sys_, noise, cost, script, tol=tol,
                                max_iter=max_iter, damping=damping,
                                dare_tol=dare_tol)
    except Exception as exc:
        raise PipelineError("coupled", exc) from exc

    gains = GainSet(P=est.P, Pi=ctr.Pi, P1=coupled.P1, Pi2=coupled.Pi2,
                    K=est.K, L=ctr.L, K1=coupled.K1, L2=coupled.L2)
    realization = assemble_realization(gains, sys_)
    rho_f = spectral_radius(realization.F)
    if rho_f >= 1.0:
        raise PipelineError(
            "assemble",
            InstabilityError(f"controller realization unstable (rho(F) = {rho_f:.6g})",
                             radius=rho_f))
    return gains, realization


def check_information_pattern(realization: ControllerRealization,
                              horizon: int, tol: float = 1e-12) -> bool:
    """True iff no y2 influence ever reaches u1 and there is no feedthrough.

    Checks the Markov parameters H F^k G, k < horizon, restricted to the
    u1 rows and y2 columns.  Strict properness holds structurally (the
    realization carries no direct term), so u depends on outputs only
    through the delayed state.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if realization.blocks is None:
        return False
    u1 = slice(*realization.blocks.u1)
    y2 = slice(*realization.blocks.y2)
    X = realization.G
    for _ in range(horizon):
        markov = realization.H @ X
        if np.abs(markov[u1, y2]).max(initial=0.0) > tol:
            return False
        X = realization.F @ X
    return True


def save_controller(path, realization: ControllerRealization,
                    gains: GainSet | None = None) -> None:
    doc = {
        "q": int(realization.q),
        "F": realization.F.tolist(),
        "G": realization.G.tolist(),
        "H": realization.H.tolist(),
    }
    if realization.blocks is not None:
        doc["blocks"] = {k: list(getattr(realization.blocks, k))
                         for k in ("zhat", "z", "y1", "y2", "u1", "u2")}
    if gains is not None:
        doc["gains"] = {k: getattr(gains, k).tolist()
                        for k in ("P", "Pi", "P1", "Pi2", "K", "L", "K1", "L2")}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)


def load_controller(path):
    """Load a controller file; returns (realization, gains-or-None)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    for name in ("q", "F", "G", "H"):
        if name not in doc:
            raise ParseError(f"{path}: missing field '{name}'")
    blocks = None
    if "blocks" in doc:
        blocks = BlockStructure(**{k: tuple(v) for k, v in doc["blocks"].items()})
    realization = ControllerRealization(F=np.array(doc["F"], dtype=float),
                                        G=np.array(doc["G"], dtype=float),
                                        H=np.array(doc["H"], dtype=float),
                                        q=int(doc["q"]), blocks=blocks)
    gains = None
    if "gains" in doc:
        gains = GainSet(**{k: np.array(v, dtype=float)
                           for k, v in doc["gains"].items()})
    return realization, gains
