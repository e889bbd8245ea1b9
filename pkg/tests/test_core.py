import numpy as np
import pytest

from dlqg import (BlockDims, ParseError, ValidationFailure, load_problem,
                  make_instance, random_instance, save_problem, validate)
from dlqg.riccati import spectral_radius

from conftest import SCALAR_DIMS


def test_trivial_instance_is_valid(trivial_instance):
    assert validate(trivial_instance) == []


def test_sparsity_breach_is_reported(trivial_instance):
    bad = make_instance(
        SCALAR_DIMS,
        A=np.array([[0.5, 0.1], [0.3, 0.4]]),
        B=trivial_instance.system.B, C=trivial_instance.system.C,
        W=trivial_instance.noise.W, U=trivial_instance.noise.U,
        V=trivial_instance.noise.V,
        Q=trivial_instance.cost.Q, S=trivial_instance.cost.S,
        R=trivial_instance.cost.R,
    )
    report = validate(bad)
    assert any(v.code == "sparsity.A12" for v in report)
    assert any("sparsity: A block (1,2) nonzero" in v.message for v in report)


def test_indefinite_cost_is_reported(trivial_instance):
    bad = make_instance(
        SCALAR_DIMS,
        A=trivial_instance.system.A, B=trivial_instance.system.B,
        C=trivial_instance.system.C,
        W=trivial_instance.noise.W, U=trivial_instance.noise.U,
        V=trivial_instance.noise.V,
        Q=trivial_instance.cost.Q, S=trivial_instance.cost.S,
        R=-np.eye(2),
    )
    report = validate(bad)
    assert any(v.code == "cost.not_pd" for v in report)
    assert any("cost matrix not positive definite" in v.message for v in report)


def test_validate_is_pure(trivial_instance):
    assert validate(trivial_instance) == validate(trivial_instance)


def test_unstabilizable_instance_is_reported():
    # A = 2I with B driving only the second state: the unstable first mode
    # is unreachable; by symmetry (C) it is also undetectable.
    inst = make_instance(
        SCALAR_DIMS,
        A=np.array([[2.0, 0.0], [0.0, 2.0]]),
        B=np.array([[0.0, 0.0], [0.0, 1.0]]),
        C=np.array([[0.0, 0.0], [0.0, 1.0]]),
        W=np.eye(2), U=np.zeros((2, 2)), V=np.eye(2),
        Q=np.eye(2), S=np.zeros((2, 2)), R=np.eye(2),
    )
    codes = {v.code for v in validate(inst)}
    assert "system.not_stabilizable" in codes
    assert "system.not_detectable" in codes


def test_save_load_round_trip(tmp_path, trivial_instance):
    path = tmp_path / "problem.json"
    save_problem(trivial_instance, path)
    loaded = load_problem(path)
    for name in ("A", "B", "C"):
        assert np.array_equal(getattr(loaded.system, name),
                              getattr(trivial_instance.system, name))
    for name in ("W", "U", "V"):
        assert np.array_equal(getattr(loaded.noise, name),
                              getattr(trivial_instance.noise, name))
    for name in ("Q", "S", "R"):
        assert np.array_equal(getattr(loaded.cost, name),
                              getattr(trivial_instance.cost, name))


def test_load_missing_dims(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"A": [[1.0]]}')
    with pytest.raises(ParseError, match="dims"):
        load_problem(path)


def test_load_nonpositive_dim(tmp_path, trivial_instance):
    path = tmp_path / "bad_dim.json"
    save_problem(trivial_instance, path)
    doc = path.read_text().replace('"p1": 1', '"p1": 0')
    path.write_text(doc)
    with pytest.raises(ValidationFailure, match="dims must be >= 1"):
        load_problem(path)


def test_load_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ParseError, match="invalid JSON"):
        load_problem(path)


def test_random_instance_deterministic():
    a = random_instance(7, SCALAR_DIMS, 0.9)
    b = random_instance(7, SCALAR_DIMS, 0.9)
    assert np.array_equal(a.system.A, b.system.A)
    assert np.array_equal(a.noise.W, b.noise.W)
    assert np.array_equal(a.cost.Q, b.cost.Q)


def test_random_instance_seed_sensitivity():
    a = random_instance(7, SCALAR_DIMS, 0.9)
    b = random_instance(8, SCALAR_DIMS, 0.9)
    assert not np.array_equal(a.system.A, b.system.A)


def test_random_instance_is_admissible():
    dims = BlockDims(2, 2, 1, 1, 1, 1)
    inst = random_instance(1, dims, 0.95)
    assert validate(inst) == []
    assert spectral_radius(inst.system.A) == pytest.approx(0.95, rel=1e-12)


@pytest.mark.parametrize("seed", [3, 11, 29])
def test_sparsity_blocks_bitwise_zero(seed):
    dims = BlockDims(2, 1, 2, 1, 1, 2)
    inst = random_instance(seed, dims, 0.8)
    d = inst.dims
    assert np.all(inst.system.A[: d.n1, d.n1 :] == 0.0)
    assert np.all(inst.system.B[: d.n1, d.m1 :] == 0.0)
    assert np.all(inst.system.C[: d.p1, d.n1 :] == 0.0)


def test_decoupled_instance_structure():
    dims = BlockDims(2, 2, 1, 1, 1, 1)
    inst = random_instance(11, dims, 0.8, decoupled=True)
    d = inst.dims
    assert validate(inst) == []
    assert np.all(inst.system.A[d.n1 :, : d.n1] == 0.0)
    assert np.all(inst.noise.U == 0.0)
    assert np.all(inst.cost.S == 0.0)
    assert np.all(inst.noise.W[: d.n1, d.n1 :] == 0.0)
    assert np.all(inst.noise.V[: d.p1, d.p1 :] == 0.0)
    assert np.all(inst.cost.Q[: d.n1, d.n1 :] == 0.0)
    assert np.all(inst.cost.R[: d.m1, d.m1 :] == 0.0)


def test_spectral_target_bounds():
    with pytest.raises(ValueError):
        random_instance(1, SCALAR_DIMS, 2.5)


def test_accessors(trivial_instance):
    sys_, noise, cost = (trivial_instance.system, trivial_instance.noise,
                         trivial_instance.cost)
    assert np.array_equal(sys_.C1, sys_.C[:1, :])
    assert np.array_equal(sys_.C2, sys_.C[1:, :])
    assert np.array_equal(sys_.B1, sys_.B[:, :1])
    assert np.array_equal(sys_.B2, sys_.B[:, 1:])
    assert np.array_equal(noise.V1, noise.V[:, :1])
    assert noise.V11.shape == (1, 1)
    assert np.array_equal(cost.S2, cost.S[:, 1:])
    assert cost.R22.shape == (1, 1)
