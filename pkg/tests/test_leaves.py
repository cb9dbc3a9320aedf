import numpy as np
import pytest

from quiverpoisson.leaves import (
    NumericPoint,
    antisymmetry_defect,
    bivector_at,
    cubic_structure,
    family_structure,
    flow,
    flow_group_law_residual,
    flow_jacobian,
    gamma_field,
    hamiltonian_commutation,
    jacobiator_residual,
    leaf_rank,
    lie_derivative_residual,
    linear_structure,
    pushforward_residual,
    random_point,
    symplectic_check,
    symplectic_form_matrix,
)
from quiverpoisson.quiver import QuiverError


def rng_for(seed):
    return np.random.default_rng(seed)


def test_bivector_antisymmetric_and_finite():
    for seed in range(5):
        p = random_point(2, rng_for(seed))
        for pi in (linear_structure(), cubic_structure(), family_structure(1)):
            B = bivector_at(pi, 2, p)
            assert antisymmetry_defect(B) < 1e-12


def test_linear_structure_matches_displayed_map():
    # the bracket sends a covector (A, B) to -(XA - AX - BY, YA)
    k = 2
    rng = rng_for(11)
    p = random_point(k, rng)
    B0 = bivector_at(linear_structure(), k, p)
    A = rng.uniform(-1, 1, (k, k))
    Bc = rng.uniform(-1, 1, (k, k))
    cov = np.concatenate([A.T.ravel(), Bc.T.ravel()])
    vec = B0 @ cov
    VX, VY = vec[:k * k].reshape(k, k), vec[k * k:].reshape(k, k)
    LX = p.X @ A - A @ p.X - Bc @ p.Y
    LY = p.Y @ A
    assert np.abs(VX + LX).max() < 1e-12
    assert np.abs(VY + LY).max() < 1e-12


@pytest.mark.parametrize("k", [2, 3])
def test_rank_full_when_y_invertible(k):
    p = random_point(k, rng_for(k), invertible=("y",))
    B = bivector_at(linear_structure(), k, p)
    rank = leaf_rank(B)
    assert rank == 2 * k * k
    assert rank % 2 == 0


def test_rank_drops_at_singular_y():
    k = 2
    p0 = NumericPoint(rng_for(3).uniform(-1, 1, (k, k)), np.zeros((k, k)))
    B = bivector_at(linear_structure(), k, p0)
    rank = leaf_rank(B)
    assert rank < 2 * k * k
    assert rank % 2 == 0
    # the image is (XA - AX, 0): compare dimensions
    assert rank == 2


def test_zero_structure_has_rank_zero():
    pi = linear_structure() - linear_structure()
    p = random_point(2, rng_for(5))
    assert leaf_rank(bivector_at(pi, 2, p)) == 0


@pytest.mark.parametrize("k", [2, 3])
@pytest.mark.parametrize("form,invertible", [
    ("i", ("y",)),
    ("ii", ("x", "y")),
    ("inverse-x", ("x",)),
    ("bb", ("x", "y")),
])
def test_symplectic_forms_invert_their_structures(form, invertible, k):
    rng = rng_for(hash((form, k)) & 0xFFFF)
    for _ in range(4):
        if form == "bb":
            p = random_point(k, rng, invertible=("x", "y"))
            # also require the shifted matrix to be conditioned
            W = np.linalg.inv(p.Y) - p.X
            if np.linalg.svd(W, compute_uv=False)[-1] < 1e-3:
                continue
        else:
            p = random_point(k, rng, invertible=invertible)
        residual, sign = symplectic_check(form, k, p, eps=1.0)
        assert residual < 1e-8
        assert sign in (1, -1)


def test_form_domain_errors():
    k = 2
    p = NumericPoint(np.zeros((k, k)), np.eye(k))
    with pytest.raises(QuiverError, match="singular"):
        symplectic_form_matrix("inverse-x", k, p)


def test_flow_identity_at_zero():
    p = random_point(2, rng_for(8), invertible=("y",))
    q = flow(0.0, p)
    assert np.abs(q.X - p.X).max() == 0
    assert np.abs(q.Y - p.Y).max() < 1e-14


def test_flow_group_law():
    rng = rng_for(9)
    for _ in range(5):
        p = random_point(2, rng, invertible=("y",))
        assert flow_group_law_residual(0.2, 0.15, p) < 1e-10
        assert flow_group_law_residual(-0.1, 0.25, p) < 1e-10


def test_flow_generator_is_gamma():
    # d/dt flow at t=0 equals (0, YXY)
    p = random_point(2, rng_for(10), invertible=("y",))
    h = 1e-6
    qp, qm = flow(h, p), flow(-h, p)
    dX = (qp.X - qm.X) / (2 * h)
    dY = (qp.Y - qm.Y) / (2 * h)
    gX, gY = gamma_field(p)
    assert np.abs(dX - gX).max() < 1e-8
    assert np.abs(dY - gY).max() < 1e-8
    assert np.abs(gX).max() == 0


def test_flow_jacobian_matches_finite_differences():
    p = random_point(2, rng_for(12), invertible=("y",))
    t = 0.3
    J = flow_jacobian(t, p)
    h = 1e-6
    k = p.k
    for z in range(2 * k * k):
        dv = np.zeros(2 * k * k)
        dv[z] = h
        dX, dY = dv[:k * k].reshape(k, k), dv[k * k:].reshape(k, k)
        qp = flow(t, NumericPoint(p.X + dX, p.Y + dY))
        qm = flow(t, NumericPoint(p.X - dX, p.Y - dY))
        col = np.concatenate([(qp.X - qm.X).ravel(),
                              (qp.Y - qm.Y).ravel()]) / (2 * h)
        assert np.abs(col - J[:, z]).max() < 1e-6


def test_pushforward_matches_family():
    rng = rng_for(13)
    for _ in range(5):
        p = random_point(2, rng, invertible=("x", "y"))
        W = np.linalg.inv(p.Y) - p.X
        if np.linalg.svd(W, compute_uv=False)[-1] < 1e-3:
            continue
        residual, direction = pushforward_residual(1.0, 2, p)
        assert residual < 1e-7
        # the printed transport identity holds in the inverse-flow direction
        assert direction == -1


def test_lie_derivative_second_order():
    p = random_point(2, rng_for(14), invertible=("x", "y"))
    r4 = lie_derivative_residual(1e-4, 2, p)
    r5 = lie_derivative_residual(1e-5, 2, p)
    assert 50 <= r4 / r5 <= 200


@pytest.mark.parametrize("k", [2, 3, 4])
def test_trace_powers_commute(k):
    rng = rng_for(20 + k)
    for _ in range(4):
        p = random_point(k, rng)
        worst, control = hamiltonian_commutation(k, p)
        assert worst < 1e-10


def test_negative_control_brackets_do_not_vanish():
    rng = rng_for(30)
    hits = 0
    for _ in range(10):
        p = random_point(2, rng)
        _, control = hamiltonian_commutation(2, p)
        if control > 1e-3:
            hits += 1
    assert hits >= 8


def test_numeric_jacobi_identity():
    rng = rng_for(40)
    for eps in (1.0, 0.5):
        pi = family_structure(eps)
        for _ in range(3):
            p = random_point(2, rng)
            assert jacobiator_residual(pi, 2, p) < 1e-8
    for pi in (linear_structure(), cubic_structure()):
        p = random_point(2, rng)
        assert jacobiator_residual(pi, 2, p) < 1e-8
