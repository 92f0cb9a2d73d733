"""Dense complex matrix primitives.

Everything here works on plain ``numpy`` arrays.  Hamiltonians are Hermitian,
Lie-algebra elements are skew-Hermitian, and units follow the hbar = 1
convention (energies in eV, time in hbar/eV).
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import ShapeError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

HERMITICITY_TOL = 1e-12


class HermiticityWarning(UserWarning):
    """Raised (as a warning) when ingestion had to repair a non-Hermitian input."""


def _square(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def _same_shape(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = _square(a, "a")
    b = _square(b, "b")
    if a.shape != b.shape:
        raise ShapeError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def hermitian(h, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Ingest ``h`` as a Hermitian operator.

    The input is always symmetrized to ``(h + h^dagger)/2``.  When the repair
    exceeds ``tol`` relative to ``max(1, ||h||_F)`` a
    :class:`HermiticityWarning` is emitted instead of failing.
    """
    h = _square(h, "hamiltonian")
    defect = np.linalg.norm(h - h.conj().T)
    if defect > tol * max(1.0, np.linalg.norm(h)):
        warnings.warn(
            f"non-Hermitian input symmetrized (||H - H^dag||_F = {defect:.3e})",
            HermiticityWarning,
            stacklevel=2,
        )
    return 0.5 * (h + h.conj().T)


def is_hermitian(h, tol: float = HERMITICITY_TOL) -> bool:
    h = np.asarray(h)
    return bool(np.linalg.norm(h - h.conj().T) <= tol * max(1.0, np.linalg.norm(h)))


def is_skew_hermitian(x, tol: float = 1e-10) -> bool:
    x = np.asarray(x)
    return bool(np.linalg.norm(x + x.conj().T) <= tol * max(1.0, np.linalg.norm(x)))


def check_density(rho, trace: float = 1.0, tol: float = 1e-10) -> np.ndarray:
    """Validate a density operator: Hermitian, PSD (>= -tol) and of the given trace."""
    rho = _square(rho, "density operator")
    if not is_hermitian(rho, 1e-10):
        raise ValueError("density operator is not Hermitian")
    rho = 0.5 * (rho + rho.conj().T)
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < -tol:
        raise ValueError(f"density operator has negative eigenvalue {evals.min():.3e}")
    tr = np.trace(rho).real
    if abs(tr - trace) > tol:
        raise ValueError(f"density operator trace {tr!r} differs from expected {trace!r}")
    return rho


def commutator(a, b) -> np.ndarray:
    """Return ``ab - ba``."""
    a, b = _same_shape(a, b)
    return a @ b - b @ a


def hs_inner(a, b) -> float:
    """Real Hilbert-Schmidt inner product ``Re Tr(a^dagger b)``."""
    a, b = _same_shape(a, b)
    return float(np.vdot(a, b).real)


def expm_unitary(h, t: float) -> np.ndarray:
    """``exp(-i h t)`` for Hermitian ``h`` via its eigendecomposition."""
    h = _square(h, "hamiltonian")
    evals, vecs = np.linalg.eigh(0.5 * (h + h.conj().T))
    if not (np.all(np.isfinite(evals)) and np.all(np.isfinite(vecs))):
        raise np.linalg.LinAlgError("eigendecomposition produced non-finite values")
    return (vecs * np.exp(-1j * evals * t)) @ vecs.conj().T


def expm_unitary_batch(h: np.ndarray, t: float):
    """Batched ``exp(-i h_k t)`` over a stack ``h`` of shape (K, n, n).

    Returns ``(U, evals, vecs)`` so callers that need derivatives of the
    exponential can reuse the decomposition.
    """
    evals, vecs = np.linalg.eigh(h)
    if not (np.all(np.isfinite(evals)) and np.all(np.isfinite(vecs))):
        raise np.linalg.LinAlgError("eigendecomposition produced non-finite values")
    phases = np.exp(-1j * evals * t)
    u = np.einsum("kij,kj,klj->kil", vecs, phases, vecs.conj())
    return u, evals, vecs


def block_diag(blocks) -> np.ndarray:
    """Assemble square blocks into one block-diagonal complex matrix."""
    blocks = [np.atleast_2d(np.asarray(b, dtype=complex)) for b in blocks]
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=complex)
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i : i + k, i : i + k] = b
        i += k
    return out


def to_real_vector(x: np.ndarray) -> np.ndarray:
    """Flatten a complex matrix into a real vector whose dot product is ``hs_inner``."""
    x = np.asarray(x, dtype=complex).ravel()
    return np.concatenate([x.real, x.imag])


def from_real_vector(v: np.ndarray, n: int) -> np.ndarray:
    half = n * n
    return (v[:half] + 1j * v[half:]).reshape(n, n)
