"""Reference controllers bounding the synthesized cost from both sides.

The centralized LQG controller (both inputs see all outputs, one-step
delay) is a lower bound; the common-information controller (both inputs
restricted to the shared y1 history) is an upper bound.  Together with
the finite-horizon convex oracle they sandwich and certify the
synthesized distributed controller.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .coupled import build_script_noise
from .core import ProblemInstance, validate
from .errors import PipelineError, ValidationFailure
from .evaluation import analytic_cost, closed_loop
from .oracle import finite_horizon_oracle
from .riccati import solve_control_dare, solve_estimation_dare
from .synthesis import (ControllerRealization, _realization_from_gains,
                        synthesize)

SANDWICH_SLACK = 1e-9


@dataclass(frozen=True)
class ComparisonReport:
    J_central: float
    J_distributed: float
    J_common_info: float
    J_oracle: float
    horizon: int
    sandwich_ok: bool
    gaps: dict

    def to_dict(self):
        return {
            "J_central": self.J_central,
            "J_distributed": self.J_distributed,
            "J_common_info": self.J_common_info,
            "J_oracle": self.J_oracle,
            "horizon": self.horizon,
            "sandwich_ok": self.sandwich_ok,
            "gaps": dict(self.gaps),
        }


def centralized_lqg(instance: ProblemInstance, dare_tol: float = 1e-12):
    """Globally informed LQG baseline with the same one-step delay.

    Realization: xhat+ = (A - KC - BL) xhat + K y,  u = -L xhat.
    Returns (realization, J_central).
    """
    sys_, noise, cost = instance.system, instance.noise, instance.cost
    est = solve_estimation_dare(sys_.A, sys_.C, noise.W, noise.U, noise.V,
                                tol=dare_tol)
    ctr = solve_control_dare(sys_.A, sys_.B, cost.Q, cost.S, cost.R, tol=dare_tol)
    F = sys_.A - est.K @ sys_.C - sys_.B @ ctr.L
    realization = ControllerRealization(F=F, G=est.K, H=-ctr.L,
                                        q=sys_.dims.n, blocks=None)
    J = analytic_cost(closed_loop(instance, realization))
    return realization, J


def common_info_controller(instance: ProblemInstance, dare_tol: float = 1e-12):
    """Baseline where both inputs use only the shared y1 history (u~2 = 0).

    Uses the synthesized structure with L2 = 0 and the matching estimator
    gain from the plain second-layer estimation DARE.
    """
    sys_, noise, cost = instance.system, instance.noise, instance.cost
    d = sys_.dims
    est = solve_estimation_dare(sys_.A, sys_.C, noise.W, noise.U, noise.V,
                                tol=dare_tol)
    ctr = solve_control_dare(sys_.A, sys_.B, cost.Q, cost.S, cost.R, tol=dare_tol)
    script = build_script_noise(est.P, est.K, sys_, noise)
    layer2 = solve_estimation_dare(sys_.A, sys_.C1, script.Wc, script.Uc,
                                   script.Vc, tol=dare_tol)
    L2 = np.zeros((d.m2, d.n))
    realization = _realization_from_gains(est.K, ctr.L, layer2.K, L2, sys_)
    J = analytic_cost(closed_loop(instance, realization))
    return realization, J


def compare(instance: ProblemInstance, horizon: int,
            tol: float = 1e-9, dare_tol: float = 1e-12) -> ComparisonReport:
    """Run all controllers plus the oracle and evaluate the cost sandwich."""
    report = validate(instance)
    if report:
        raise ValidationFailure(report)

    try:
        gains, realization = synthesize(instance, tol=tol, dare_tol=dare_tol)
        J_dist = analytic_cost(closed_loop(instance, realization))
    except (ValidationFailure, PipelineError):
        raise
    except Exception as exc:
        raise PipelineError("synthesize", exc) from exc
    try:
        _, J_central = centralized_lqg(instance, dare_tol=dare_tol)
    except Exception as exc:
        raise PipelineError("centralized", exc) from exc
    try:
        _, J_common = common_info_controller(instance, dare_tol=dare_tol)
    except Exception as exc:
        raise PipelineError("common_info", exc) from exc
    try:
        _, J_oracle = finite_horizon_oracle(instance, horizon)
    except Exception as exc:
        raise PipelineError("oracle", exc) from exc

    eps = SANDWICH_SLACK * max(1.0, J_dist)
    sandwich_ok = (J_central <= J_dist + eps) and (J_dist <= J_common + eps)
    gaps = {
        "central_vs_distributed": (J_dist - J_central) / max(1.0, J_dist),
        "distributed_vs_common_info": (J_common - J_dist) / max(1.0, J_dist),
        "oracle_vs_distributed": (J_dist - J_oracle) / max(1.0, J_dist),
    }
    return ComparisonReport(J_central=float(J_central),
                            J_distributed=float(J_dist),
                            J_common_info=float(J_common),
                            J_oracle=float(J_oracle), horizon=int(horizon),
                            sandwich_ok=bool(sandwich_ok), gaps=gaps)


def export_comparison(path, report: ComparisonReport, provenance: dict) -> None:
    doc = report.to_dict()
    doc["provenance"] = dict(provenance)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
