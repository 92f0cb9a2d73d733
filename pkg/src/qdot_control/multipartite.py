"""Decomposable (block-diagonal) systems and simultaneous controllability."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError
from .lie import INDEPENDENCE_TOL, ControllabilityClass, Label, LieBasis, classify, closure, span_basis
from .matrix_core import block_diag, from_real_vector, hermitian

RANK_RTOL = 1e-9


@dataclass(frozen=True)
class BlockSystem:
    """Drift and control Hamiltonians stored block by block.

    ``controls[m][l]`` is block ``l`` of control Hamiltonian ``m``.
    ``excitation`` optionally gives, per block, the photon number of each
    level; it locates the excited level and defines the rotating frame.
    """

    drift: tuple
    controls: tuple
    excitation: tuple | None = None

    def __post_init__(self):
        drift = tuple(hermitian(np.atleast_2d(np.asarray(h, dtype=complex))) for h in self.drift)
        if not drift:
            raise ValueError("a block system needs at least one block")
        if len(self.controls) < 1:
            raise ValueError("a block system needs at least one control Hamiltonian")
        dims = tuple(h.shape[0] for h in drift)
        controls = []
        for m, blocks in enumerate(self.controls):
            blocks = tuple(hermitian(np.atleast_2d(np.asarray(h, dtype=complex))) for h in blocks)
            if len(blocks) != len(drift):
                raise ShapeError(f"control {m} has {len(blocks)} blocks, drift has {len(drift)}")
            for l, (h, n) in enumerate(zip(blocks, dims)):
                if h.shape != (n, n):
                    raise ShapeError(f"control {m} block {l} has shape {h.shape}, expected {(n, n)}")
            controls.append(blocks)
        object.__setattr__(self, "drift", drift)
        object.__setattr__(self, "controls", tuple(controls))
        if self.excitation is not None:
            exc = tuple(np.asarray(e, dtype=float) for e in self.excitation)
            if tuple(len(e) for e in exc) != dims:
                raise ShapeError("excitation numbers must match block dimensions")
            object.__setattr__(self, "excitation", exc)

    @property
    def block_dims(self) -> tuple[int, ...]:
        return tuple(h.shape[0] for h in self.drift)

    @property
    def n_blocks(self) -> int:
        return len(self.drift)

    @property
    def n_controls(self) -> int:
        return len(self.controls)

    @property
    def dim(self) -> int:
        return sum(self.block_dims)

    def hamiltonians(self) -> list[np.ndarray]:
        """Full block-diagonal ``[H_0, H_1, ..., H_M]``."""
        return [block_diag(self.drift)] + [block_diag(c) for c in self.controls]

    def block(self, l: int) -> list[np.ndarray]:
        """``[H_{0,l}, H_{1,l}, ..., H_{M,l}]`` for block ``l``."""
        if not 0 <= l < self.n_blocks:
            raise IndexError(f"block index {l} out of range for {self.n_blocks} blocks")
        return [self.drift[l]] + [c[l] for c in self.controls]

    def excited_level(self, l: int) -> int:
        if self.excitation is None:
            return self.block_dims[l] - 1
        return int(np.argmax(self.excitation[l]))

    def offsets(self) -> list[int]:
        return list(np.cumsum((0,) + self.block_dims[:-1]))


@dataclass(frozen=True)
class TraceSplit:
    """Per-block split ``H_{m,l} = traceless[m][l] + alpha[m, l]/N_l * I``."""

    block_dims: tuple
    traceless: tuple
    alpha: np.ndarray

    def traceless_generator(self, m: int) -> np.ndarray:
        return block_diag(self.traceless[m])

    def diagonal_generator(self, m: int) -> np.ndarray:
        return np.diag(np.concatenate([np.full(n, a) for n, a in zip(self.block_dims, self.alpha[m])])).astype(complex)


@dataclass(frozen=True)
class SimultaneousVerdict:
    computed_dim: int
    traceless_dim: int
    a_matrix: np.ndarray
    rank_r: int
    expected_dim: int
    mixed_state_simultaneous: bool
    pure_state_simultaneous: bool
    per_block_labels: list
    block_intersections: list = field(default_factory=list)
    direct_sum_consistent: bool = True
    independence_tol: float = INDEPENDENCE_TOL
    rank_rtol: float = RANK_RTOL


def trace_split(sys: BlockSystem) -> TraceSplit:
    dims = sys.block_dims
    gens = [sys.drift] + list(sys.controls)
    alpha = np.array([[np.trace(h).real for h in blocks] for blocks in gens])
    traceless = tuple(
        tuple(h - (a / n) * np.eye(n) for h, a, n in zip(blocks, row, dims)) for blocks, row in zip(gens, alpha)
    )
    return TraceSplit(dims, traceless, alpha)


def a_matrix_rank(split: TraceSplit, rtol: float = RANK_RTOL) -> tuple[np.ndarray, int]:
    """Matrix of block traces and its numerical rank (singular values above ``rtol * s_max``)."""
    a = np.array(split.alpha, dtype=float)
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return a, 0
    return a, int(np.sum(s > rtol * s[0]))


def expected_dimension(block_dims, rank_r: int) -> int:
    return rank_r + sum(n * n - 1 for n in block_dims)


def individual_check(sys: BlockSystem, l: int, tol: float = INDEPENDENCE_TOL) -> ControllabilityClass:
    return classify(closure(sys.block(l), tol))


def block_intersections(traceless_basis: LieBasis, block_dims, tol: float = INDEPENDENCE_TOL) -> list[LieBasis]:
    """For every block, the part of the algebra supported on that block alone.

    The coefficients that make a combination of basis elements vanish outside
    block ``l`` form the null space of the basis restricted to the outside
    entries; the basis is orthonormal, so singular values below ``tol`` mark it.
    """
    n = traceless_basis.dim_hilbert
    q = traceless_basis.vectors
    out = []
    start = 0
    for nl in block_dims:
        inside = np.zeros((n, n), dtype=bool)
        inside[start : start + nl, start : start + nl] = True
        mask = np.concatenate([inside.ravel(), inside.ravel()])
        if q.shape[0] == 0:
            out.append(LieBasis(nl, np.zeros((0, 2 * nl * nl)), tol))
            start += nl
            continue
        u, s, _ = np.linalg.svd(q[:, ~mask], full_matrices=True)
        s_full = np.zeros(q.shape[0])
        s_full[: s.size] = s
        coeffs = u[:, s_full <= tol].T
        blocks = [from_real_vector(c @ q, n)[start : start + nl, start : start + nl] for c in coeffs]
        out.append(span_basis(blocks, nl, tol))
        start += nl
    return out


def assess(sys: BlockSystem, tol: float = INDEPENDENCE_TOL, rank_rtol: float = RANK_RTOL) -> SimultaneousVerdict:
    """Full simultaneous-controllability assessment of a decomposable system.

    Mixed-state: the Lie dimension must equal ``r + sum(N_l^2 - 1)`` with
    ``r`` the rank of the block-trace matrix.  Pure-state: the traceless
    algebra must split into one su(N_l) or sp(N_l/2) term per block.
    """
    full = closure(sys.hamiltonians(), tol)
    split = trace_split(sys)
    a, r = a_matrix_rank(split, rank_rtol)
    expected = expected_dimension(sys.block_dims, r)
    traceless = closure([split.traceless_generator(m) for m in range(sys.n_controls + 1)], tol)

    pieces = block_intersections(traceless, sys.block_dims, tol)
    piece_labels = [classify(p) for p in pieces]
    pure = (
        all(c.label in (Label.SPECIAL_UNITARY, Label.SYMPLECTIC) for c in piece_labels)
        and sum(p.dim for p in pieces) == traceless.dim
    )
    return SimultaneousVerdict(
        computed_dim=full.dim,
        traceless_dim=traceless.dim,
        a_matrix=a,
        rank_r=r,
        expected_dim=expected,
        mixed_state_simultaneous=full.dim == expected,
        pure_state_simultaneous=pure,
        per_block_labels=[individual_check(sys, l, tol) for l in range(sys.n_blocks)],
        block_intersections=piece_labels,
        direct_sum_consistent=traceless.dim == full.dim - r,
        independence_tol=tol,
        rank_rtol=rank_rtol,
    )


def simultaneous_mixed_check(sys: BlockSystem, tol: float = INDEPENDENCE_TOL) -> SimultaneousVerdict:
    """Dimension criterion for simultaneous mixed-state controllability (see :func:`assess`)."""
    return assess(sys, tol)


def simultaneous_pure_check(sys: BlockSystem, tol: float = INDEPENDENCE_TOL) -> SimultaneousVerdict:
    """Direct-sum criterion for simultaneous pure-state controllability (see :func:`assess`)."""
    return assess(sys, tol)
