"""Gradient-ascent pulse shaping for selective excitation.

The objective is ``<A>(t_f)`` for a block-diagonal observable ``A`` minus an
optional fluence penalty.  Gradients come from one forward (state) and one
backward (observable) pass through the piecewise-constant step unitaries,
with the exact derivative of each step exponential.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import OptimizationError
from .multipartite import BlockSystem
from .propagator import (
    PulseSchedule,
    effective_drive,
    ground_state,
    prefix_products,
    split_blocks,
    step_unitaries,
    suffix_products,
    total_product,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ObjectiveSpec:
    observable: list  # per-block Hermitian blocks
    target_time: float
    initial_state: list
    target_dot: int | None = None


@dataclass(frozen=True)
class OptimizerOptions:
    max_iters: int = 500
    step0: float = 1e-3
    backtrack: float = 0.5
    grow: float = 2.0
    min_step: float = 1e-12
    rel_gain_tol: float = 1e-6
    stall_window: int = 10
    pin_boundaries: bool = False
    fluence_penalty: float = 0.0
    optimize_waveform: bool = False
    rwa: bool = False
    grad_tol: float = 1e-10
    accept_tol: float = 1e-13  # gains below accept_tol * max(1, |objective|) count as rounding noise
    check_every: int = 0  # >0: finite-difference gradient check every so many iterations


@dataclass
class OptimizationRun:
    iterations: list  # (objective, step, grad_norm) per accepted iteration, entry 0 = start
    final_pulse: PulseSchedule
    converged: bool
    reason: str = ""
    initial_objective: float = float("nan")
    final_objective: float = float("nan")
    gradient_checks: list = field(default_factory=list)  # (iteration, relative error)

    @property
    def objective_history(self) -> np.ndarray:
        return np.array([it[0] for it in self.iterations])

    def as_dict(self) -> dict:
        return {
            "iterations": [
                {"iteration": i, "objective": obj, "step": step, "grad_norm": g}
                for i, (obj, step, g) in enumerate(self.iterations)
            ],
            "converged": self.converged,
            "reason": self.reason,
            "initial_objective": self.initial_objective,
            "final_objective": self.final_objective,
        }


def selective_objective(sys: BlockSystem, target_dot: int, target_only: bool = False, target_time: float | None = None) -> ObjectiveSpec:
    """``A = diag(P, Q, ..., Q)`` with ``P`` the excited-level projector of the target and ``Q = -P``.

    ``target_only`` builds ``diag(P, 0, ..., 0)`` instead, the observable that
    ignores the other dots.
    """
    if not 0 <= target_dot < sys.n_blocks:
        raise IndexError(f"target dot {target_dot} out of range for {sys.n_blocks} dots")
    blocks = []
    for l, n in enumerate(sys.block_dims):
        p = np.zeros((n, n), dtype=complex)
        e = sys.excited_level(l)
        p[e, e] = 1.0
        if l == target_dot:
            blocks.append(p)
        else:
            blocks.append(np.zeros_like(p) if target_only else -p)
    return ObjectiveSpec(blocks, target_time, ground_state(sys), target_dot)


def _exp_derivative_weights(evals: np.ndarray, dt: float) -> np.ndarray:
    """Divided differences of ``exp(-i x dt)`` on the eigenvalues, shape (K, n, n)."""
    li = evals[:, :, None]
    lj = evals[:, None, :]
    half = 0.5 * (li - lj) * dt
    return -1j * dt * np.exp(-0.5j * (li + lj) * dt) * np.sinc(half / np.pi)


def evaluate(sys: BlockSystem, pulse: PulseSchedule, obj: ObjectiveSpec, rwa: bool = False) -> float:
    """``<A>`` at the end of the pulse."""
    model, fields, _ = effective_drive(sys, pulse, rwa)
    total = 0.0
    for l in range(sys.n_blocks):
        h = model.block(l)
        u, _, _ = step_unitaries(h[0], h[1:], fields, pulse.dt)
        p = total_product(u)
        rho = p @ obj.initial_state[l] @ p.conj().T
        total += np.einsum("ij,ji->", obj.observable[l], rho).real
    return float(total)


def value_and_gradient(sys: BlockSystem, pulse: PulseSchedule, obj: ObjectiveSpec, rwa: bool = False):
    """``<A>(t_f)`` and its derivative with respect to every pulse sample, shape (steps, M)."""
    model, fields, dfield = effective_drive(sys, pulse, rwa)
    dt = pulse.dt
    grad = np.zeros_like(pulse.samples)
    total = 0.0
    for l in range(sys.n_blocks):
        h = model.block(l)
        u, evals, vecs = step_unitaries(h[0], h[1:], fields, dt)
        fwd = prefix_products(u)
        rho0 = obj.initial_state[l]
        # state entering step k
        before = np.concatenate([rho0[None], fwd[:-1] @ rho0 @ np.conj(np.transpose(fwd[:-1], (0, 2, 1)))])
        # observable pulled back to just after step k
        after = np.concatenate([suffix_products(u)[1:], np.eye(len(rho0))[None]])
        a_back = np.conj(np.transpose(after, (0, 2, 1))) @ obj.observable[l] @ after
        rho_f = fwd[-1] @ rho0 @ fwd[-1].conj().T
        total += np.einsum("ij,ji->", obj.observable[l], rho_f).real

        weights = _exp_derivative_weights(evals, dt)
        vdag = np.conj(np.transpose(vecs, (0, 2, 1)))
        udag = np.conj(np.transpose(u, (0, 2, 1)))
        tail = before @ udag @ a_back  # rho_{k-1} U_k^dag A_k
        for m, hm in enumerate(h[1:]):
            hm_eig = vdag @ hm @ vecs
            du = vecs @ (weights * hm_eig) @ vdag
            grad[:, m] += 2.0 * np.einsum("kij,kji->k", du, tail).real * dfield
    return float(total), grad


def gradient(sys: BlockSystem, pulse: PulseSchedule, obj: ObjectiveSpec, rwa: bool = False) -> np.ndarray:
    return value_and_gradient(sys, pulse, obj, rwa)[1]


def optimize(sys: BlockSystem, pulse0: PulseSchedule, obj: ObjectiveSpec, opts: OptimizerOptions | None = None) -> OptimizationRun:
    """Backtracking gradient ascent on the pulse samples.

    Each iteration steps along the function-space gradient (sample gradient
    divided by dt).  A trial is accepted only if it raises the objective by
    more than rounding noise; the step then grows by ``opts.grow``, otherwise
    it shrinks by ``opts.backtrack`` until ``opts.min_step``.  Iteration stops when the
    relative gain over the last ``opts.stall_window`` iterations drops below
    ``opts.rel_gain_tol``.
    """
    opts = opts or OptimizerOptions()
    pulse = pulse0.to_waveform() if opts.optimize_waveform else pulse0
    if opts.max_iters <= 0:
        obj0 = evaluate(sys, pulse, obj, opts.rwa) - _penalty(pulse.samples, pulse.dt, opts)
        return OptimizationRun([(obj0, 0.0, 0.0)], pulse0, False, "max_iters", obj0, obj0)

    x = pulse.samples.copy()
    if opts.pin_boundaries:
        x[0] = 0.0
        x[-1] = 0.0
    dt = pulse.dt

    def value_grad(samples):
        trial = pulse.with_samples(samples)
        val, g = value_and_gradient(sys, trial, obj, opts.rwa)
        val -= _penalty(samples, dt, opts)
        g = g - 2.0 * opts.fluence_penalty * samples * dt
        if opts.pin_boundaries:
            g[0] = 0.0
            g[-1] = 0.0
        return val, g / dt

    def value(samples):
        val = evaluate(sys, pulse.with_samples(samples), obj, opts.rwa) - _penalty(samples, dt, opts)
        if not np.isfinite(val):
            raise OptimizationError("objective is not finite", iteration=len(history))
        return val

    history, checks = [], []
    current, g = value_grad(x)
    if not np.isfinite(current):
        raise OptimizationError("initial objective is not finite", iteration=0)
    gnorm = float(np.sqrt(np.sum(g**2) * dt))
    history.append((current, 0.0, gnorm))
    step = opts.step0
    converged, reason = False, "max_iters"

    for it in range(1, opts.max_iters + 1):
        if gnorm <= opts.grad_tol:
            converged, reason = True, "gradient below grad_tol"
            break
        while step >= opts.min_step:
            trial = x + step * g
            val = value(trial)
            if val > current + opts.accept_tol * max(1.0, abs(current)):
                break
            step *= opts.backtrack
        else:
            converged, reason = True, "step below min_step"
            break
        x = trial
        current, g = value_grad(x)
        gnorm = float(np.sqrt(np.sum(g**2) * dt))
        history.append((current, step, gnorm))
        log.debug("iteration %d: objective %.10f step %.3e |g| %.3e", it, current, step, gnorm)
        step *= opts.grow
        if opts.check_every and it % opts.check_every == 0 and opts.fluence_penalty == 0.0:
            idx = np.linspace(0, pulse.steps - 1, 10).astype(int)
            err = finite_difference_check(sys, pulse.with_samples(x), obj, idx, rwa=opts.rwa)
            checks.append((it, err))
        w = opts.stall_window
        if len(history) > w:
            old = history[-1 - w][0]
            if abs(current - old) <= opts.rel_gain_tol * max(abs(old), 1e-300):
                converged, reason = True, "relative gain below tolerance"
                break

    final = pulse.with_samples(x, optimized=True)
    return OptimizationRun(history, final, converged, reason, history[0][0], history[-1][0], checks)


def finite_difference_check(sys, pulse, obj, indices, delta: float = 1e-6, control: int = 0, rwa: bool = False) -> float:
    """Relative error between the adjoint gradient and central differences on ``indices``."""
    g = gradient(sys, pulse, obj, rwa)[indices, control]
    fd = np.empty(len(indices))
    for i, k in enumerate(indices):
        x = pulse.samples.copy()
        x[k, control] += delta
        up = evaluate(sys, pulse.with_samples(x), obj, rwa)
        x[k, control] -= 2 * delta
        down = evaluate(sys, pulse.with_samples(x), obj, rwa)
        fd[i] = (up - down) / (2 * delta)
    return float(np.linalg.norm(g - fd) / max(np.linalg.norm(fd), 1e-300))


def _penalty(samples, dt, opts) -> float:
    if opts.fluence_penalty == 0.0:
        return 0.0
    return float(opts.fluence_penalty * np.sum(samples**2) * dt)
