"""Reference computations that share no code path with the package internals."""

import itertools

import numpy as np


def span_rank(mats, rtol=1e-8):
    """Real dimension of the span of complex matrices (SVD of stacked re/im parts)."""
    if not mats:
        return 0
    rows = np.array([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in mats])
    s = np.linalg.svd(rows, compute_uv=False)
    return int(np.sum(s > rtol * s[0])) if s[0] > 0 else 0


def nested_commutator_dim(hamiltonians, depth=6):
    """Dimension of the real span of all left-nested brackets of ``i H`` up to ``depth``."""
    gens = [1j * np.asarray(h, dtype=complex) for h in hamiltonians]
    gens = [g / np.linalg.norm(g) for g in gens if np.linalg.norm(g) > 0]
    words = list(gens)
    layer = list(gens)
    for _ in range(depth - 1):
        nxt = []
        for g, w in itertools.product(gens, layer):
            c = g @ w - w @ g
            n = np.linalg.norm(c)
            if n > 1e-12:
                nxt.append(c / n)
        words.extend(nxt)
        layer = nxt
    return span_rank(words)


def rwa_rabi_excited(area):
    """Resonant two-level excitation after a pulse of the given envelope area."""
    return np.sin(area / 2) ** 2


def sequential_propagation(blocks, fields, dt, rho0):
    """Step-by-step ``rho <- U rho U^dag`` with scipy-free eigendecomposition per step."""
    rho = np.array(rho0, dtype=complex)
    h0, hcs = blocks[0], blocks[1:]
    for f in fields:
        h = h0 + sum(fk * hk for fk, hk in zip(f, hcs))
        w, v = np.linalg.eigh(h)
        u = v @ np.diag(np.exp(-1j * w * dt)) @ v.conj().T
        rho = u @ rho @ u.conj().T
    return rho
