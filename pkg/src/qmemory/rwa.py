"""Exact dynamics of the number-conserving (rotating-wave) model.

At zero temperature the reduced qubit state is fully determined by the
excited-state amplitude Gamma(t), the solution of

    dGamma/dt = - int_0^t f(t - s) Gamma(s) ds,   Gamma(0) = 1,

with f the bath correlation kernel.  The solver below uses trapezoidal
product integration with a single predictor-corrector pass per step,
which is globally second order in dt.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bath import CorrelationKernel
from .qubit import AffineChannel, validate_density

RATE_FLOOR = 1e-6  # |Gamma| below this masks the generator rates
ATOL_GAMMA = 1e-8  # slack on |Gamma| <= 1


@dataclass(frozen=True)
class GammaTrajectory:
    """Amplitude Gamma(t) on the uniform solver grid."""

    time_grid: np.ndarray
    values: np.ndarray

    @property
    def dt(self) -> float:
        return float(self.time_grid[1] - self.time_grid[0])

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.values)


def solve_gamma(kernel: CorrelationKernel, dt: float, t_final: float) -> GammaTrajectory:
    """Solve the memory-kernel amplitude equation on [0, t_final].

    The convolution integral up to t_n is evaluated with the trapezoid
    rule on the solver grid; each step takes an Euler predictor and one
    trapezoidal corrector pass (Heun scheme), giving O(dt^2) global error.
    The kernel must be tabulated on the same grid.
    """
    n_steps = int(round(t_final / dt))
    if n_steps < 1:
        raise ValueError("t_final must cover at least one step")
    if abs(kernel.dt - dt) > 1e-12 * max(1.0, dt):
        raise ValueError(f"kernel grid step {kernel.dt} does not match dt {dt}")
    if len(kernel.values) < n_steps + 1:
        raise ValueError(
            f"kernel covers {len(kernel.values) - 1} steps, need {n_steps}"
        )
    f = np.ascontiguousarray(kernel.values[: n_steps + 1])
    half_f0 = 0.5 * dt * f[0]

    gamma = np.empty(n_steps + 1, dtype=complex)
    dgamma = np.empty(n_steps + 1, dtype=complex)
    # gamma stored reversed as well, so the convolution is a contiguous dot
    gamma_rev = np.empty(n_steps + 1, dtype=complex)
    gamma[0] = 1.0
    dgamma[0] = 0.0
    gamma_rev[n_steps] = 1.0

    for n in range(n_steps):
        # trapezoid history sum over nodes 0..n of f(t_{n+1} - t_j) Gamma_j
        hist = np.dot(f[1 : n + 2], gamma_rev[n_steps - n :])
        hist = dt * (hist - 0.5 * f[n + 1] * gamma[0])
        predicted = gamma[n] + dt * dgamma[n]
        d_pred = -(hist + half_f0 * predicted)
        gamma[n + 1] = gamma[n] + 0.5 * dt * (dgamma[n] + d_pred)
        dgamma[n + 1] = -(hist + half_f0 * gamma[n + 1])
        gamma_rev[n_steps - n - 1] = gamma[n + 1]

    time_grid = np.arange(n_steps + 1) * dt
    return GammaTrajectory(time_grid=time_grid, values=gamma)


def rwa_channel_at(gamma_t: complex, rho0: np.ndarray) -> np.ndarray:
    """Apply the amplitude-damping channel at amplitude Gamma to a state.

    In the sigma_z eigenbasis (excited first): the excited population is
    scaled by |Gamma|^2 and the coherence by Gamma.
    """
    if abs(gamma_t) > 1.0 + ATOL_GAMMA:
        raise ValueError(f"|Gamma| = {abs(gamma_t)} exceeds 1")
    rho0 = validate_density(rho0)
    g2 = abs(gamma_t) ** 2
    return np.array(
        [
            [g2 * rho0[0, 0], gamma_t * rho0[0, 1]],
            [np.conj(gamma_t) * rho0[1, 0], 1.0 - g2 * rho0[0, 0]],
        ],
        dtype=complex,
    )


def channel_of_gamma(gamma_t: complex) -> AffineChannel:
    """Affine Bloch form (M, q) of the channel at amplitude Gamma."""
    re, im = gamma_t.real, gamma_t.imag
    g2 = re * re + im * im
    m = np.array([[re, im, 0.0], [-im, re, 0.0], [0.0, 0.0, g2]])
    return AffineChannel(linear_part=m, offset=np.array([0.0, 0.0, g2 - 1.0]))


def channel_series(trajectory: GammaTrajectory, stride: int = 1):
    """(times, M array, q array) sampled every `stride` solver steps."""
    values = trajectory.values[::stride]
    times = trajectory.time_grid[::stride]
    re, im = values.real, values.imag
    g2 = re * re + im * im
    n = len(values)
    m = np.zeros((n, 3, 3))
    m[:, 0, 0] = re
    m[:, 0, 1] = im
    m[:, 1, 0] = -im
    m[:, 1, 1] = re
    m[:, 2, 2] = g2
    q = np.zeros((n, 3))
    q[:, 2] = g2 - 1.0
    return times, m, q


def fopt_of_gamma(gamma_abs) -> np.ndarray:
    """Optimal recovery fidelity 1/2 + (|G|^2 + 2|G|)/6; vectorized."""
    g = np.abs(np.asarray(gamma_abs))
    out = 0.5 + (g * g + 2.0 * g) / 6.0
    return out if out.ndim else float(out)


def nm_of_gamma(trajectory: GammaTrajectory) -> np.ndarray:
    """Accumulated positive increments of |Gamma| up to each grid time."""
    rises = np.clip(np.diff(trajectory.magnitudes), 0.0, None)
    return np.concatenate([[0.0], np.cumsum(rises)])


@dataclass(frozen=True)
class RatePair:
    """Time-dependent Lamb shift S(t) and damping rate gamma(t).

    Masked (NaN, valid_mask False) where |Gamma| falls below the floor or
    at the grid endpoints, since centered differences are used.
    """

    time_grid: np.ndarray
    lamb_shift: np.ndarray
    damping_rate: np.ndarray
    valid_mask: np.ndarray


def rates_of_gamma(trajectory: GammaTrajectory, floor: float = RATE_FLOOR) -> RatePair:
    """Generator rates S = -2 Im(G'/G), gamma = -2 Re(G'/G)."""
    gamma = trajectory.values
    dt = trajectory.dt
    n = len(gamma)
    deriv = np.empty(n, dtype=complex)
    deriv[1:-1] = (gamma[2:] - gamma[:-2]) / (2.0 * dt)
    deriv[0] = deriv[-1] = 0.0
    valid = np.abs(gamma) >= floor
    valid[0] = valid[-1] = False
    ratio = np.zeros(n, dtype=complex)
    np.divide(deriv, gamma, out=ratio, where=valid)
    lamb = np.where(valid, -2.0 * ratio.imag, np.nan)
    damp = np.where(valid, -2.0 * ratio.real, np.nan)
    return RatePair(
        time_grid=trajectory.time_grid,
        lamb_shift=lamb,
        damping_rate=damp,
        valid_mask=valid,
    )
