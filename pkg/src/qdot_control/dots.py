"""Builders for quantum-dot ensembles.

Level ordering: two-level dots are (ground, excited) = (0, 1); Lambda dots are
(ground+, ground-, excited) = (0, 1, 2).  Dot indices are 0-based here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matrix_core import SIGMA_X
from .multipartite import BlockSystem

# sigma_z written in the (ground, excited) ordering, so the ground level sits at -1
SIGMA_Z_GE = np.diag([-1.0, 1.0]).astype(complex)

LAMBDA_DRIFT = np.diag([-1.0, -1.0, 2.0]).astype(complex) / 3.0
LAMBDA_PLUS = np.array([[0, 0, 1], [0, 0, 0], [1, 0, 0]], dtype=complex)
LAMBDA_MINUS = np.array([[0, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=complex)


@dataclass(frozen=True)
class TwoLevelDot:
    epsilon: float
    dipole: float


@dataclass(frozen=True)
class LambdaDot:
    epsilon: float
    d_plus: float
    d_minus: float


@dataclass(frozen=True)
class Region:
    name: str
    members: frozenset

    def __init__(self, name, members):
        object.__setattr__(self, "name", str(name))
        object.__setattr__(self, "members", frozenset(int(i) for i in members))
        if not self.members:
            raise ValueError(f"region {name!r} has no members")


def two_level_ensemble(dots) -> BlockSystem:
    """Drift ``(eps/2) sigma_z`` and a single control ``d sigma_x`` per dot.

    The half factor makes ``eps`` the level splitting.
    """
    dots = list(dots)
    if not dots:
        raise ValueError("need at least one dot")
    drift = [0.5 * d.epsilon * SIGMA_Z_GE for d in dots]
    control = [d.dipole * SIGMA_X for d in dots]
    return BlockSystem(drift, [control], excitation=[[0, 1]] * len(dots))


def lambda_ensemble(dots) -> BlockSystem:
    """Two controls: ``d_plus`` couples levels 0-2, ``d_minus`` couples 1-2."""
    dots = list(dots)
    if not dots:
        raise ValueError("need at least one dot")
    drift = [d.epsilon * LAMBDA_DRIFT for d in dots]
    plus = [d.d_plus * LAMBDA_PLUS for d in dots]
    minus = [d.d_minus * LAMBDA_MINUS for d in dots]
    return BlockSystem(drift, [plus, minus], excitation=[[0, 0, 1]] * len(dots))


def mixed_polarization_control(sys: BlockSystem, alpha: float) -> BlockSystem:
    """Replace the two polarization controls by ``cos(alpha) H_1 + sin(alpha) H_2``."""
    if sys.n_controls != 2:
        raise ValueError(f"expected the two Lambda controls, got {sys.n_controls}")
    if not 0.0 <= alpha <= np.pi / 2:
        raise ValueError(f"alpha must lie in [0, pi/2], got {alpha}")
    c, s = np.cos(alpha), np.sin(alpha)
    combined = [c * h1 + s * h2 for h1, h2 in zip(*sys.controls)]
    return BlockSystem(sys.drift, [combined], sys.excitation)


def region_controls(sys: BlockSystem, regions, base_dipoles=None) -> BlockSystem:
    """One control per region: the dot's coupler inside the region, zero outside.

    ``base_dipoles`` gives the per-dot coupler blocks; by default the blocks of
    the system's first control are used.
    """
    base = list(sys.controls[0] if base_dipoles is None else base_dipoles)
    if len(base) != sys.n_blocks:
        raise ValueError(f"need {sys.n_blocks} base couplers, got {len(base)}")
    regions = list(regions)
    if not regions:
        raise ValueError("need at least one region")
    controls = []
    for region in regions:
        bad = [i for i in region.members if not 0 <= i < sys.n_blocks]
        if bad:
            raise IndexError(f"region {region.name!r} references unknown dots {sorted(bad)}")
        controls.append(
            [np.asarray(b, dtype=complex) if l in region.members else np.zeros((n, n), complex)
             for l, (b, n) in enumerate(zip(base, sys.block_dims))]
        )
    return BlockSystem(sys.drift, controls, sys.excitation)
