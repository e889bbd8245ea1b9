"""Problem data model: partitioned plant, noise and cost matrices.

Two subsystems over an acyclic (lower block-triangular) interconnection.
Block (1,2) of A, B, C is structurally zero; subsystem 1 neither sees nor
is driven by subsystem 2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParseError, ValidationFailure

MATRIX_FIELDS = ("A", "B", "C", "W", "U", "V", "Q", "S", "R")
DIM_FIELDS = ("n1", "n2", "m1", "m2", "p1", "p2")


@dataclass(frozen=True)
class Tolerances:
    """Numeric tolerances for admissibility checks."""

    symmetry: float = 1e-12
    definiteness: float = 1e-10
    rank: float = 1e-9


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class BlockDims:
    n1: int
    n2: int
    m1: int
    m2: int
    p1: int
    p2: int

    @property
    def n(self):
        return self.n1 + self.n2

    @property
    def m(self):
        return self.m1 + self.m2

    @property
    def p(self):
        return self.p1 + self.p2


def _freeze(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PartitionedSystem:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    dims: BlockDims

    def __post_init__(self):
        for name in ("A", "B", "C"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))

    @property
    def C1(self):
        return self.C[: self.dims.p1, :]

    @property
    def C2(self):
        return self.C[self.dims.p1 :, :]

    @property
    def B1(self):
        return self.B[:, : self.dims.m1]

    @property
    def B2(self):
        return self.B[:, self.dims.m1 :]


@dataclass(frozen=True)
class NoiseModel:
    W: np.ndarray
    U: np.ndarray
    V: np.ndarray
    dims: BlockDims

    def __post_init__(self):
        for name in ("W", "U", "V"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))

    @property
    def V1(self):
        """First block column of V (p x p1)."""
        return self.V[:, : self.dims.p1]

    @property
    def V11(self):
        return self.V[: self.dims.p1, : self.dims.p1]

    @property
    def joint(self):
        """Covariance of the stacked noise [w; v]."""
        return np.block([[self.W, self.U], [self.U.T, self.V]])


@dataclass(frozen=True)
class CostModel:
    Q: np.ndarray
    S: np.ndarray
    R: np.ndarray
    dims: BlockDims

    def __post_init__(self):
        for name in ("Q", "S", "R"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))

    @property
    def S2(self):
        """Last m2 block columns of S (n x m2)."""
        return self.S[:, self.dims.m1 :]

    @property
    def R22(self):
        return self.R[self.dims.m1 :, self.dims.m1 :]

    @property
    def joint(self):
        return np.block([[self.Q, self.S], [self.S.T, self.R]])


@dataclass(frozen=True)
class ProblemInstance:
    system: PartitionedSystem
    noise: NoiseModel
    cost: CostModel

    @property
    def dims(self):
        return self.system.dims


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


def _check_shape(name, mat, shape):
    if mat.shape != shape:
        raise DimensionError(f"{name} has shape {mat.shape}, expected {shape}")


def _min_eig(sym):
    return float(np.linalg.eigvalsh(0.5 * (sym + sym.T)).min())


def _asymmetry(mat):
    scale = max(1.0, float(np.abs(mat).max(initial=0.0)))
    return float(np.abs(mat - mat.T).max(initial=0.0)) / scale


def _pbh_ok(A, B, tol):
    """PBH rank test at every eigenvalue of A on or outside the unit circle."""
    n = A.shape[0]
    eigs = np.linalg.eigvals(A)
    ident = np.eye(n)
    for lam in eigs:
        if abs(lam) < 1.0 - tol:
            continue
        pencil = np.hstack([lam * ident - A, B.astype(complex)])
        sv = np.linalg.svd(pencil, compute_uv=False)
        if sv[n - 1] <= tol * max(1.0, sv[0]):
            return False
    return True


def validate(instance: ProblemInstance, tol: Tolerances = DEFAULT_TOLERANCES):
    """Check every admissibility invariant; return the list of violations.

    Pure function: an empty list means the instance is admissible.  Shape
    mismatches raise DimensionError instead of being reported, since no
    other check is meaningful on misshapen data.
    """
    d = instance.dims
    report: list[Violation] = []

    for name, value in zip(DIM_FIELDS, (d.n1, d.n2, d.m1, d.m2, d.p1, d.p2)):
        if int(value) < 1:
            report.append(Violation("dims.nonpositive", f"dims must be >= 1 ({name}={value})"))
    if report:
        return report

    n, m, p = d.n, d.m, d.p
    sys_, noise, cost = instance.system, instance.noise, instance.cost
    _check_shape("A", sys_.A, (n, n))
    _check_shape("B", sys_.B, (n, m))
    _check_shape("C", sys_.C, (p, n))
    _check_shape("W", noise.W, (n, n))
    _check_shape("U", noise.U, (n, p))
    _check_shape("V", noise.V, (p, p))
    _check_shape("Q", cost.Q, (n, n))
    _check_shape("S", cost.S, (n, m))
    _check_shape("R", cost.R, (m, m))

    # Acyclic structure: the (1,2) blocks are exactly zero, bitwise.
    if np.any(sys_.A[: d.n1, d.n1 :] != 0.0):
        report.append(Violation("sparsity.A12", "sparsity: A block (1,2) nonzero"))
    if np.any(sys_.B[: d.n1, d.m1 :] != 0.0):
        report.append(Violation("sparsity.B12", "sparsity: B block (1,2) nonzero"))
    if np.any(sys_.C[: d.p1, d.n1 :] != 0.0):
        report.append(Violation("sparsity.C12", "sparsity: C block (1,2) nonzero"))

    joint_noise = noise.joint
    if _asymmetry(joint_noise) > tol.symmetry:
        report.append(Violation("noise.asymmetric", "noise covariance not symmetric"))
    elif _min_eig(joint_noise) < -tol.definiteness:
        report.append(Violation("noise.joint_not_psd", "joint noise covariance not PSD"))
    if _min_eig(noise.V) < tol.definiteness:
        report.append(Violation("noise.V_not_pd", "V not positive definite"))

    joint_cost = cost.joint
    if _asymmetry(joint_cost) > tol.symmetry:
        report.append(Violation("cost.asymmetric", "cost matrix not symmetric"))
    elif _min_eig(joint_cost) < tol.definiteness:
        report.append(Violation("cost.not_pd", "cost matrix not positive definite"))

    if not _pbh_ok(sys_.A, sys_.B, tol.rank):
        report.append(Violation("system.not_stabilizable", "(A, B) not stabilizable"))
    if not _pbh_ok(sys_.A.T, sys_.C.T, tol.rank):
        report.append(Violation("system.not_detectable", "(A, C) not detectable"))

    return report


def make_instance(dims: BlockDims, A, B, C, W, U, V, Q, S, R) -> ProblemInstance:
    return ProblemInstance(
        system=PartitionedSystem(A=A, B=B, C=C, dims=dims),
        noise=NoiseModel(W=W, U=U, V=V, dims=dims),
        cost=CostModel(Q=Q, S=S, R=R, dims=dims),
    )


def random_instance(seed: int, dims: BlockDims, spectral_target: float,
                    decoupled: bool = False, eps: float = 1e-3) -> ProblemInstance:
    """Deterministic random admissible instance.

    A is scaled to the requested spectral radius; the forbidden blocks of
    A, B, C are zeroed; noise and cost matrices are built as G^T G + eps*I
    so definiteness holds by construction.  With decoupled=True the two
    subsystems share no dynamics, noise or cost coupling.
    """
    if not 0.0 < spectral_target < 2.0:
        raise ValueError("spectral_target must lie in (0, 2)")
    rng = np.random.default_rng(seed)
    n, m, p = dims.n, dims.m, dims.p
    n1, m1, p1 = dims.n1, dims.m1, dims.p1

    A = rng.standard_normal((n, n))
    B = rng.standard_normal((n, m))
    C = rng.standard_normal((p, n))
    A[:n1, n1:] = 0.0
    B[:n1, m1:] = 0.0
    C[:p1, n1:] = 0.0
    if decoupled:
        A[n1:, :n1] = 0.0
        B[n1:, :m1] = 0.0
        C[p1:, :n1] = 0.0
    radius = max(np.abs(np.linalg.eigvals(A)))
    if radius > 0:
        A *= spectral_target / radius

    gn = rng.standard_normal((n + p, n + p))
    joint_noise = gn.T @ gn + eps * np.eye(n + p)
    gc = rng.standard_normal((n + m, n + m))
    joint_cost = gc.T @ gc + eps * np.eye(n + m)
    if decoupled:
        # Block-diagonal W, V, Q, R with U = 0, S = 0; pinching a PSD matrix
        # to its diagonal blocks preserves the definiteness margin.
        joint_noise = _pinch(joint_noise, [n1, n - n1, p1, p - p1])
        joint_cost = _pinch(joint_cost, [n1, n - n1, m1, m - m1])

    W, U, V = joint_noise[:n, :n], joint_noise[:n, n:], joint_noise[n:, n:]
    Q, S, R = joint_cost[:n, :n], joint_cost[:n, n:], joint_cost[n:, n:]
    return make_instance(dims, A, B, C, W, U, V, Q, S, R)


def _pinch(mat, sizes):
    """Zero all off-diagonal blocks of a PSD matrix (a PSD-preserving map)."""
    out = np.zeros_like(mat)
    start = 0
    for s in sizes:
        out[start : start + s, start : start + s] = mat[start : start + s, start : start + s]
        start += s
    return out


def save_problem(instance: ProblemInstance, path) -> None:
    d = instance.dims
    doc = {
        "dims": {k: int(getattr(d, k)) for k in DIM_FIELDS},
        "A": instance.system.A.tolist(),
        "B": instance.system.B.tolist(),
        "C": instance.system.C.tolist(),
        "W": instance.noise.W.tolist(),
        "U": instance.noise.U.tolist(),
        "V": instance.noise.V.tolist(),
        "Q": instance.cost.Q.tolist(),
        "S": instance.cost.S.tolist(),
        "R": instance.cost.R.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)


def load_problem(path, check: bool = True) -> ProblemInstance:
    """Load a problem file; with check=True raise on inadmissible instances."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc

    if "dims" not in doc:
        raise ParseError(f"{path}: missing field 'dims'")
    for k in DIM_FIELDS:
        if k not in doc["dims"]:
            raise ParseError(f"{path}: missing field 'dims.{k}'")
    dims = BlockDims(**{k: int(doc["dims"][k]) for k in DIM_FIELDS})

    mats = {}
    for name in MATRIX_FIELDS:
        if name not in doc:
            raise ParseError(f"{path}: missing field '{name}'")
        try:
            mats[name] = np.array(doc[name], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{path}: field '{name}' is not a numeric matrix") from exc
        if mats[name].ndim != 2:
            raise ParseError(f"{path}: field '{name}' must be a 2-D nested array")
        if not np.all(np.isfinite(mats[name])):
            raise ParseError(f"{path}: field '{name}' has non-finite entries")

    instance = make_instance(dims, **mats)
    if check:
        report = validate(instance)
        if report:
            raise ValidationFailure(report)
    return instance
