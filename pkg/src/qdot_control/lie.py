"""Dynamical Lie algebra closure and controllability classification.

The closure works in the real vector space of skew-Hermitian N x N matrices,
flattened by :func:`~qdot_control.matrix_core.to_real_vector` so that the
Euclidean dot product equals the Hilbert-Schmidt inner product.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError
from .matrix_core import from_real_vector, hermitian, to_real_vector

log = logging.getLogger(__name__)

INDEPENDENCE_TOL = 1e-9
IDENTITY_TOL = 1e-9


class Label(str, enum.Enum):
    FULL_UNITARY = "FULL_UNITARY"
    SPECIAL_UNITARY = "SPECIAL_UNITARY"
    SYMPLECTIC = "SYMPLECTIC"
    SYMPLECTIC_PLUS_PHASE = "SYMPLECTIC_PLUS_PHASE"
    OTHER = "OTHER"


_DEGREES = {
    Label.FULL_UNITARY: (True, True, True),
    Label.SPECIAL_UNITARY: (False, True, True),
    Label.SYMPLECTIC: (False, False, True),
    Label.SYMPLECTIC_PLUS_PHASE: (False, False, True),
    Label.OTHER: (False, False, False),
}


@dataclass(frozen=True)
class ControllabilityClass:
    label: Label
    dim: int
    complete: bool = field(init=False)
    mixed_state: bool = field(init=False)
    pure_state: bool = field(init=False)

    def __post_init__(self):
        complete, mixed, pure = _DEGREES[self.label]
        object.__setattr__(self, "complete", complete)
        object.__setattr__(self, "mixed_state", mixed)
        object.__setattr__(self, "pure_state", pure)

    def as_dict(self) -> dict:
        return {
            "label": self.label.value,
            "dim": self.dim,
            "complete": self.complete,
            "mixed_state": self.mixed_state,
            "pure_state": self.pure_state,
        }


@dataclass(frozen=True)
class LieBasis:
    """Hilbert-Schmidt orthonormal basis of a real Lie algebra inside u(N).

    ``vectors`` holds the flattened real form, one row per element.
    ``closure_residual`` is the largest out-of-span bracket norm seen by the
    final all-pairs sweep (0.0 when no sweep ran).
    """

    dim_hilbert: int
    vectors: np.ndarray
    independence_tol: float = INDEPENDENCE_TOL
    closure_residual: float = 0.0

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def elements(self) -> np.ndarray:
        n = self.dim_hilbert
        if self.dim == 0:
            return np.zeros((0, n, n), dtype=complex)
        return np.stack([from_real_vector(v, n) for v in self.vectors])

    def project_residual(self, x: np.ndarray) -> np.ndarray:
        """Component of matrix ``x`` orthogonal to the span, as a real vector."""
        v = to_real_vector(x)
        q = self.vectors
        for _ in range(2):
            v = v - q.T @ (q @ v)
        return v

    def contains(self, x: np.ndarray, tol: float | None = None) -> bool:
        tol = self.independence_tol if tol is None else tol
        scale = max(1.0, np.linalg.norm(x))
        return bool(np.linalg.norm(self.project_residual(x)) <= tol * scale)


class _Orthonormalizer:
    """Incremental classical Gram-Schmidt with one re-orthogonalization pass."""

    def __init__(self, length: int, capacity: int, tol: float):
        self.q = np.zeros((capacity, length))
        self.k = 0
        self.tol = tol

    @property
    def basis(self) -> np.ndarray:
        return self.q[: self.k]

    def add(self, v: np.ndarray, scale: float = 1.0) -> bool:
        if self.k == self.q.shape[0]:
            return False
        q = self.basis
        r = v - q.T @ (q @ v)
        r = r - q.T @ (q @ r)
        norm = np.linalg.norm(r)
        if norm <= self.tol * max(1.0, scale):
            return False
        self.q[self.k] = r / norm
        self.k += 1
        return True


def _brackets(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """All commutators ``[l, r]`` for stacks ``left`` (a,n,n) and ``right`` (b,n,n)."""
    lr = np.einsum("aij,bjk->abik", left, right)
    rl = np.einsum("bij,ajk->abik", right, left)
    return lr - rl


def _check_generators(generators) -> list[np.ndarray]:
    gens = [np.asarray(g, dtype=complex) for g in generators]
    if not gens:
        raise ValueError("closure needs at least one generator")
    for g in gens:
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ShapeError(f"generator must be square, got shape {g.shape}")
    shapes = {g.shape for g in gens}
    if len(shapes) != 1:
        raise ShapeError(f"generators have mismatched shapes {sorted(shapes)}")
    return [hermitian(g) for g in gens]


def closure(generators, independence_tol: float = INDEPENDENCE_TOL, certify: bool = True) -> LieBasis:
    """Real Lie algebra generated by ``i H`` for each Hermitian ``H`` in ``generators``.

    Seeds are normalized to unit Frobenius norm so ``independence_tol`` is an
    absolute threshold on residual norms.  Each round brackets the current
    basis against the elements added in the previous round; the loop ends when
    a round adds nothing or the dimension reaches N^2.  With ``certify`` an
    all-pairs sweep confirms closure (and resumes the loop if it does not).
    """
    if not 0.0 < independence_tol < 1.0:
        raise ValueError(f"independence_tol must lie in (0, 1), got {independence_tol}")
    gens = _check_generators(generators)
    n = gens[0].shape[0]
    ortho = _Orthonormalizer(2 * n * n, n * n, independence_tol)

    for h in gens:
        norm = np.linalg.norm(h)
        if norm > 0:
            ortho.add(to_real_vector(1j * h / norm))

    def elems(rows):
        return np.stack([from_real_vector(v, n) for v in rows]) if len(rows) else np.zeros((0, n, n), complex)

    def grow(start: int) -> None:
        lo = start
        while lo < ortho.k and ortho.k < n * n:
            hi = ortho.k
            new = elems(ortho.basis[lo:hi])
            current = elems(ortho.basis[:hi])
            for row in _brackets(current, new):
                for c in row:
                    ortho.add(to_real_vector(c))
                    if ortho.k == n * n:
                        return
            lo = hi

    grow(0)
    residual = 0.0
    while certify and ortho.k < n * n:
        k0 = ortho.k
        e = elems(ortho.basis)
        residual = 0.0
        for i in range(k0):
            for c in _brackets(e[i : i + 1], e[i + 1 :])[0]:
                v = to_real_vector(c)
                q = ortho.basis[:k0]
                r = v - q.T @ (q @ v)
                r = r - q.T @ (q @ r)
                residual = max(residual, float(np.linalg.norm(r)))
        if residual <= independence_tol:
            break
        log.debug("certification sweep found residual %.3e; resuming closure", residual)
        for i in range(k0):
            for c in _brackets(e[i : i + 1], e[i + 1 :])[0]:
                ortho.add(to_real_vector(c))
        grow(k0)

    return LieBasis(n, ortho.basis.copy(), independence_tol, residual)


def span_basis(matrices, n: int | None = None, tol: float = INDEPENDENCE_TOL) -> LieBasis:
    """Orthonormal basis of the real span of skew-Hermitian ``matrices`` (no bracketing)."""
    mats = [np.asarray(m, dtype=complex) for m in matrices]
    if n is None:
        if not mats:
            raise ValueError("n is required for an empty span")
        n = mats[0].shape[0]
    ortho = _Orthonormalizer(2 * n * n, n * n, tol)
    for m in mats:
        ortho.add(to_real_vector(m), np.linalg.norm(m))
    return LieBasis(n, ortho.basis.copy(), tol)


def identity_residual(basis: LieBasis) -> float:
    """Distance of ``i I/sqrt(N)`` from the span of ``basis``."""
    n = basis.dim_hilbert
    return float(np.linalg.norm(basis.project_residual(1j * np.eye(n) / np.sqrt(n))))


def has_identity(basis: LieBasis, tol: float = IDENTITY_TOL) -> bool:
    return identity_residual(basis) <= tol


def is_traceless(basis: LieBasis, tol: float = IDENTITY_TOL) -> bool:
    return all(abs(np.trace(e)) <= tol for e in basis.elements)


def traceless_part(basis: LieBasis) -> LieBasis:
    """Span of ``X - Tr(X)/N I`` over the basis (the projection onto su(N))."""
    n = basis.dim_hilbert
    eye = np.eye(n)
    return span_basis([e - np.trace(e) / n * eye for e in basis.elements], n, basis.independence_tol)


def _antisymmetric_basis(n: int) -> list[np.ndarray]:
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            for phase in (1.0, 1j):
                j_mat = np.zeros((n, n), dtype=complex)
                j_mat[i, j] = phase
                j_mat[j, i] = -phase
                out.append(j_mat)
    return out


def invariant_form(basis: LieBasis, tol: float = 1e-9) -> np.ndarray | None:
    """Nondegenerate antisymmetric ``J`` with ``X^T J + J X = 0`` for every basis element.

    Returns ``None`` when the solution space is trivial or contains only
    singular forms.  The result is scaled to unit largest entry.
    """
    n = basis.dim_hilbert
    if n % 2:
        raise ValueError(f"an invariant symplectic form needs even N, got {n}")
    candidates = _antisymmetric_basis(n)
    elems = basis.elements
    if len(elems) == 0:
        columns = [to_real_vector(c) for c in candidates]
        system = np.zeros((1, len(candidates)))
    else:
        columns = []
        for c in candidates:
            images = np.transpose(elems, (0, 2, 1)) @ c + c @ elems
            columns.append(np.concatenate([to_real_vector(m) for m in images]))
        system = np.array(columns).T
    _, s, vh = np.linalg.svd(system, full_matrices=True)
    smax = s[0] if s.size and s[0] > 0 else 1.0
    rank = int(np.sum(s > tol * smax)) if len(elems) else 0
    null = vh[rank:]
    if null.shape[0] == 0:
        return None

    def assemble(coeffs):
        return sum(c * m for c, m in zip(coeffs, candidates))

    rng = np.random.default_rng(0)
    trials = [null[0]] if null.shape[0] == 1 else [rng.standard_normal(null.shape[0]) @ null for _ in range(8)]
    for coeffs in trials:
        j_mat = assemble(coeffs)
        sv = np.linalg.svd(j_mat, compute_uv=False)
        if sv[-1] > 1e-8 * sv[0]:
            return j_mat / np.abs(j_mat).max()
    return None


def classify(basis: LieBasis) -> ControllabilityClass:
    """Controllability degree of a single system from its dynamical Lie algebra.

    u(N) gives complete controllability, su(N) mixed-state, and for even N
    sp(N/2) or sp(N/2) + u(1) (phase direction) pure-state only.  At N = 2,
    sp(1) coincides with su(2) and is reported as SPECIAL_UNITARY.
    """
    n = basis.dim_hilbert
    dim = basis.dim
    identity = has_identity(basis)
    if dim == n * n and identity:
        return ControllabilityClass(Label.FULL_UNITARY, dim)
    if dim == n * n - 1 and is_traceless(basis):
        return ControllabilityClass(Label.SPECIAL_UNITARY, dim)
    sp_dim = n * (n + 1) // 2
    if n % 2 == 0 and dim in (sp_dim, sp_dim + 1):
        if dim == sp_dim and is_traceless(basis):
            if invariant_form(basis) is not None:
                return ControllabilityClass(Label.SYMPLECTIC, dim)
        elif dim == sp_dim + 1:
            if identity and invariant_form(traceless_part(basis)) is not None:
                return ControllabilityClass(Label.SYMPLECTIC_PLUS_PHASE, dim)
            if not identity:
                log.info("codimension-1 extension of sp(%d) without the phase direction; reporting OTHER", n // 2)
    return ControllabilityClass(Label.OTHER, dim)
