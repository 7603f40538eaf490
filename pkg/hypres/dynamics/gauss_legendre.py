"""
Fixed-step Gauss-Legendre collocation, used as a symplectic cross-check of
the adaptive integrator.

The s-stage method has order 2s and preserves quadratic invariants, so the
fundamental matrix it produces for the variational system is symplectic up
to the fixed-point iteration tolerance.
"""

from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial.legendre import leggauss

from hypres.utils.error_manager import IntegrationError


@lru_cache(maxsize=8)
def gauss_legendre_tableau(stages: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Butcher tableau (a, b, c) of the s-stage Gauss method on [0, 1]."""
    if stages < 1:
        raise ValueError("Gauss-Legendre needs at least one stage")
    nodes, weights = leggauss(stages)
    c = 0.5 * (nodes + 1.0)
    b = 0.5 * weights
    a = np.empty((stages, stages))
    for j in range(stages):
        others = np.delete(c, j)
        basis = Polynomial.fromroots(others) / np.prod(c[j] - others)
        primitive = basis.integ()
        a[:, j] = primitive(c) - primitive(0.0)
    for arr in (a, b, c):
        arr.setflags(write=False)
    return a, b, c


def gauss_legendre_step(rhs: Callable[[float, np.ndarray], np.ndarray], t: float, y: np.ndarray,
                        h: float, stages: int = 3, tol: float = 1e-14,
                        max_iter: int = 100) -> np.ndarray:
    """Advance y by one step of size h; stages are solved by fixed-point iteration."""
    a, b, c = gauss_legendre_tableau(stages)
    f0 = rhs(t, y)
    K = np.tile(f0, (stages, 1))
    scale = 1.0 + np.max(np.abs(y))
    for _ in range(max_iter):
        K_new = np.array([rhs(t + c[i] * h, y + h * (a[i] @ K)) for i in range(stages)])
        change = np.max(np.abs(K_new - K)) * abs(h)
        K = K_new
        if change <= tol * scale:
            break
    else:
        raise IntegrationError(
            "Gauss-Legendre stage iteration did not converge; reduce the step",
            t_last=t, state_last=y, context={"step": h},
        )
    return y + h * (b @ K)


def integrate_gauss_legendre(rhs: Callable[[float, np.ndarray], np.ndarray], y0: np.ndarray,
                             t_final: float, step: float, stages: int = 3,
                             t_eval=None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Integrate from 0 to t_final with equal steps no larger than `step`.

    Returns (times, states) with states shaped (len(times), len(y0)). Without
    t_eval every step is recorded; with t_eval the requested times are hit
    exactly by shortening the step that contains them.
    """
    y = np.asarray(y0, dtype=float).copy()
    if t_final == 0.0:
        return np.array([0.0]), y[None, :]
    n_steps = max(1, int(np.ceil(abs(t_final) / step)))
    grid = np.linspace(0.0, t_final, n_steps + 1)
    if t_eval is not None:
        grid = np.union1d(grid, np.asarray(t_eval, dtype=float))
        if t_final < 0:
            grid = grid[::-1]
    times = [grid[0]]
    states = [y.copy()]
    for t0, t1 in zip(grid[:-1], grid[1:]):
        y = gauss_legendre_step(rhs, t0, y, t1 - t0, stages)
        times.append(t1)
        states.append(y.copy())
    times = np.asarray(times)
    states = np.asarray(states)
    if t_eval is not None:
        wanted = np.isin(times, np.asarray(t_eval, dtype=float))
        times, states = times[wanted], states[wanted]
    return times, states
