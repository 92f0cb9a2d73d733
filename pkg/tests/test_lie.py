import numpy as np
import pytest

from conftest import random_hermitian
from oracles import nested_commutator_dim, span_rank
from qdot_control.errors import ShapeError
from qdot_control.lie import Label, classify, closure, has_identity, invariant_form, span_basis
from qdot_control.matrix_core import SIGMA_X, SIGMA_Y, SIGMA_Z


def _e(i, j, n=4):
    m = np.zeros((n, n), dtype=complex)
    m[i, j] = 1
    return m


def sp2_hermitian_generators():
    """Hermitian H with i H spanning the compact symplectic algebra sp(2) in u(4).

    Elements are [[A, B], [-conj(B), conj(A)]] with A in u(2) and B complex symmetric.
    """
    e2 = lambda i, j: _e(i, j, 2)
    a_parts = [1j * e2(0, 0), 1j * e2(1, 1), e2(0, 1) - e2(1, 0), 1j * (e2(0, 1) + e2(1, 0))]
    b_parts = []
    for b in (e2(0, 0), e2(1, 1), e2(0, 1) + e2(1, 0)):
        b_parts += [b, 1j * b]
    skews = []
    for a in a_parts:
        skews.append(np.block([[a, np.zeros((2, 2))], [np.zeros((2, 2)), a.conj()]]))
    for b in b_parts:
        skews.append(np.block([[np.zeros((2, 2)), b], [-b.conj(), np.zeros((2, 2))]]))
    return [-1j * x for x in skews]


SO3_HERMITIAN = [
    -1j * np.array([[0, 0, 0], [0, 0, -1], [0, 1, 0]]),
    -1j * np.array([[0, 0, 1], [0, 0, 0], [-1, 0, 0]]),
    -1j * np.array([[0, -1, 0], [1, 0, 0], [0, 0, 0]]),
]


def test_single_dot_su2():
    basis = closure([SIGMA_Z, SIGMA_X])
    assert basis.dim == 3
    c = classify(basis)
    assert c.label is Label.SPECIAL_UNITARY
    assert c.mixed_state and c.pure_state and not c.complete


def test_full_u2():
    c = classify(closure([SIGMA_X, SIGMA_Y, SIGMA_Z, np.eye(2)]))
    assert c.label is Label.FULL_UNITARY and c.dim == 4
    assert c.complete and c.mixed_state and c.pure_state


def test_basis_is_orthonormal_skew_and_closed(lambda_distinct):
    basis = closure(lambda_distinct.hamiltonians())
    q = basis.vectors
    assert np.abs(q @ q.T - np.eye(basis.dim)).max() <= 1e-9
    for e in basis.elements:
        assert np.linalg.norm(e + e.conj().T) <= 1e-12
    assert basis.closure_residual <= basis.independence_tol


def test_sp2_is_symplectic():
    gens = sp2_hermitian_generators()
    assert span_rank([1j * h for h in gens]) == 10
    assert nested_commutator_dim(gens, depth=4) == 10
    basis = closure(gens)
    assert basis.dim == 10 == 4 * 5 // 2
    c = classify(basis)
    assert c.label is Label.SYMPLECTIC
    assert c.pure_state and not c.mixed_state and not c.complete


def test_sp2_plus_phase():
    basis = closure(sp2_hermitian_generators() + [np.eye(4)])
    assert basis.dim == 11
    assert classify(basis).label is Label.SYMPLECTIC_PLUS_PHASE


def test_sp2_invariant_form_is_nondegenerate_and_invariant():
    basis = closure(sp2_hermitian_generators())
    j = invariant_form(basis)
    assert j is not None
    assert np.allclose(j, -j.T)
    assert np.linalg.svd(j, compute_uv=False).min() > 1e-6
    for x in basis.elements:
        assert np.linalg.norm(x.T @ j + j @ x) < 1e-9


def test_invariant_form_su2():
    j = invariant_form(closure([SIGMA_Z, SIGMA_X]))
    ref = np.array([[0, 1], [-1, 0]])
    # equal up to a complex scale
    scale = j[0, 1]
    assert abs(scale) > 0
    assert np.allclose(j / scale, ref)


def _form_constraint_rank(elements, n):
    """Independent rank count: unknowns are the n(n-1)/2 complex upper entries of J."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    cols = []
    for i, j in pairs:
        for phase in (1, 1j):
            jm = np.zeros((n, n), dtype=complex)
            jm[i, j], jm[j, i] = phase, -phase
            cols.append(np.concatenate([np.concatenate([(x.T @ jm + jm @ x).real.ravel(), (x.T @ jm + jm @ x).imag.ravel()]) for x in elements]))
    return np.linalg.matrix_rank(np.array(cols).T, tol=1e-9), 2 * len(pairs)


def test_invariant_form_su4_none(rng):
    basis = closure([random_hermitian(rng, 4), random_hermitian(rng, 4)])
    su4 = span_basis([e - np.trace(e) / 4 * np.eye(4) for e in basis.elements], 4)
    assert su4.dim == 15
    rank, unknowns = _form_constraint_rank(su4.elements, 4)
    assert rank == unknowns  # trivial null space
    assert invariant_form(su4) is None


def test_invariant_form_sp2_constraint_nullity():
    basis = closure(sp2_hermitian_generators())
    rank, unknowns = _form_constraint_rank(basis.elements, 4)
    # sp(2) preserves exactly one antisymmetric form up to complex scale
    assert unknowns - rank == 2


def test_invariant_form_odd_n():
    with pytest.raises(ValueError):
        invariant_form(closure(SO3_HERMITIAN))


def test_so3_is_other():
    basis = closure(SO3_HERMITIAN)
    assert basis.dim == 3
    c = classify(basis)
    assert c.label is Label.OTHER
    assert not c.pure_state


def test_commuting_generators():
    basis = closure([np.diag([1.0, -1.0]), np.diag([2.0, -2.0])])
    assert basis.dim == 1
    assert classify(basis).label is Label.OTHER


def test_identity_detection():
    assert has_identity(closure([np.eye(3), np.diag([1.0, 2.0, 3.0])]))
    assert not has_identity(closure([SIGMA_X, SIGMA_Z]))


@pytest.mark.parametrize(
    "gens, err",
    [
        ([np.eye(2), np.eye(3)], ShapeError),
        ([np.ones((2, 3))], ShapeError),
        ([], ValueError),
    ],
)
def test_closure_input_errors(gens, err):
    with pytest.raises(err):
        closure(gens)


@pytest.mark.parametrize("tol", [0.0, 1.0, -1e-3, 2.0])
def test_closure_tolerance_range(tol):
    with pytest.raises(ValueError):
        closure([SIGMA_X], tol)


def test_random_pairs_n2(rng):
    for _ in range(100):
        a, b = random_hermitian(rng, 2), random_hermitian(rng, 2)
        assert np.linalg.norm(a @ b - b @ a) > 1e-6
        assert closure([a, b]).dim in (3, 4)


def test_dimension_never_exceeds_n_squared(rng):
    for n in (2, 3, 4):
        gens = [random_hermitian(rng, n) for _ in range(3)]
        assert closure(gens).dim == n * n


def _structured_generators(rng, n, kind):
    if kind == "random":
        return [random_hermitian(rng, n), random_hermitian(rng, n)]
    if kind == "diagonal_plus_coupler":
        h0 = np.diag(rng.standard_normal(n))
        h1 = np.zeros((n, n))
        h1[0, 1] = h1[1, 0] = 1.0
        return [h0, h1]
    if kind == "real_symmetric":
        a, b = rng.standard_normal((2, n, n))
        return [a + a.T, b + b.T]
    if kind == "traceless":
        gens = [random_hermitian(rng, n), random_hermitian(rng, n)]
        return [g - np.trace(g) / n * np.eye(n) for g in gens]
    raise ValueError(kind)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("kind", ["random", "diagonal_plus_coupler", "real_symmetric", "traceless"])
def test_closure_matches_nested_commutator_oracle(rng, n, kind):
    for _ in range(5):
        gens = _structured_generators(rng, n, kind)
        assert closure(gens).dim == nested_commutator_dim(gens, depth=6)


def test_closure_matches_oracle_on_so3_and_pauli():
    assert nested_commutator_dim(SO3_HERMITIAN) == closure(SO3_HERMITIAN).dim == 3
    assert nested_commutator_dim([SIGMA_Z, SIGMA_X]) == 3
