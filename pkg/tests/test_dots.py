import numpy as np
import pytest

from conftest import LAMBDA_EPS
from qdot_control.dots import (
    LambdaDot,
    Region,
    TwoLevelDot,
    lambda_ensemble,
    mixed_polarization_control,
    region_controls,
    two_level_ensemble,
)
from qdot_control.lie import Label, closure
from qdot_control.multipartite import assess, individual_check


def test_two_level_blocks():
    sys = two_level_ensemble([TwoLevelDot(1.4, 0.7)])
    assert np.allclose(sys.drift[0], [[-0.7, 0], [0, 0.7]])
    assert np.allclose(sys.controls[0][0], [[0, 0.7], [0.7, 0]])
    assert sys.excited_level(0) == 1


def test_lambda_blocks_match_printed_matrices():
    sys = lambda_ensemble([LambdaDot(1.5, 0.8, -0.6)])
    assert np.allclose(sys.drift[0], 0.5 * np.diag([-1, -1, 2]))
    assert np.allclose(sys.controls[0][0], [[0, 0, 0.8], [0, 0, 0], [0.8, 0, 0]])
    assert np.allclose(sys.controls[1][0], [[0, 0, 0], [0, 0, -0.6], [0, -0.6, 0]])
    assert sys.excited_level(0) == 2


def test_closely_spaced_ensemble(selective_system):
    assert selective_system.dim == 10
    assert assess(selective_system).mixed_state_simultaneous


def test_single_dot_su2():
    sys = two_level_ensemble([TwoLevelDot(1.0, 1.0)])
    assert individual_check(sys, 0).label is Label.SPECIAL_UNITARY


def test_sign_flipped_pair_not_simultaneous():
    sys = two_level_ensemble([TwoLevelDot(1.2, 0.9), TwoLevelDot(-1.2, -0.9)])
    v = assess(sys)
    assert v.computed_dim == 3
    assert not v.mixed_state_simultaneous


def test_lambda_dimensions(lambda_distinct, lambda_repeated):
    assert closure(lambda_distinct.hamiltonians()).dim == 40
    assert closure(lambda_repeated.hamiltonians()).dim == 32


def test_lambda_repeat_energy_different_dipole():
    dots = [LambdaDot(e, 1.0, -1.0) for e in LAMBDA_EPS]
    dots[3] = LambdaDot(LAMBDA_EPS[0], 1.5, -1.0)
    v = assess(lambda_ensemble(dots))
    assert v.computed_dim == 40 and v.mixed_state_simultaneous


def test_empty_ensembles():
    with pytest.raises(ValueError):
        two_level_ensemble([])
    with pytest.raises(ValueError):
        lambda_ensemble([])


# --- regions -------------------------------------------------------------------


def test_region_controls_zero_outside(five_dot_regions):
    sys = five_dot_regions
    assert sys.n_controls == 2
    a, b = sys.controls
    for l in range(5):
        assert np.any(a[l]) == (l in (0, 1, 2))
        assert np.any(b[l]) == (l in (2, 3, 4))
    assert np.allclose(a[1], 0.8 * np.array([[0, 1], [1, 0]]))


def test_region_errors(selective_system):
    with pytest.raises(ValueError):
        Region("empty", [])
    with pytest.raises(IndexError):
        region_controls(selective_system, [Region("A", [0, 7])])
    with pytest.raises(ValueError):
        region_controls(selective_system, [])
    with pytest.raises(ValueError):
        region_controls(selective_system, [Region("A", [0])], base_dipoles=[np.eye(2)])


def test_overlapping_regions_allowed(selective_system):
    sys = region_controls(selective_system, [Region("A", [0, 1, 2]), Region("B", [2, 3])])
    assert np.any(sys.controls[0][2]) and np.any(sys.controls[1][2])


# --- mixed polarization --------------------------------------------------------


@pytest.mark.parametrize("alpha", [0.0, np.pi / 2])
def test_single_polarization_not_controllable(lambda_distinct, alpha):
    sys = mixed_polarization_control(lambda_distinct, alpha)
    assert sys.n_controls == 1
    for l in range(sys.n_blocks):
        assert individual_check(sys, l).label is Label.OTHER


@pytest.mark.parametrize("alpha", [0.1, 0.4, 0.7])
def test_opposite_dipoles_give_dim4(alpha):
    sys = mixed_polarization_control(lambda_ensemble([LambdaDot(1.2, 1.0, -1.0)]), alpha)
    c = individual_check(sys, 0)
    assert c.dim == 4 and c.label is Label.OTHER


@pytest.mark.parametrize("d_plus, d_minus, alpha", [(1.0, 0.5, 0.6), (0.8, -1.7, 1.1), (2.0, 0.3, 0.2)])
def test_generic_dipoles_still_leave_a_dark_state(d_plus, d_minus, alpha):
    sys = mixed_polarization_control(lambda_ensemble([LambdaDot(1.2, d_plus, d_minus)]), alpha)
    h0, hc = sys.block(0)
    # the ground combination orthogonal to the driven one never couples
    dark = np.array([-np.sin(alpha) * d_minus, np.cos(alpha) * d_plus, 0.0])
    dark /= np.linalg.norm(dark)
    assert np.allclose(hc @ dark, 0)
    assert np.allclose(h0 @ dark, (h0 @ dark)[0] / dark[0] * dark)
    c = individual_check(sys, 0)
    assert c.dim == 4 and c.label is Label.OTHER


@pytest.mark.parametrize("alpha", [-0.1, np.pi / 2 + 1e-6])
def test_alpha_out_of_range(lambda_distinct, alpha):
    with pytest.raises(ValueError):
        mixed_polarization_control(lambda_distinct, alpha)


def test_mixed_polarization_needs_two_controls(selective_system):
    with pytest.raises(ValueError):
        mixed_polarization_control(selective_system, 0.3)

