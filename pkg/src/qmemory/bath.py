"""Structured spectral density, star discretization and bath correlations.

The environment is a bosonic continuum with a tunable dip (pseudogap,
h < 1) or vanishing region (full gap, h > 1) around the central frequency
omega0.  All frequencies and times are in units of omega0 (and c = 1).
The continuum is reduced to a finite star of modes by quadrature, and the
two-point correlation kernel f(tau) is precomputed on the uniform time
grid used by the amplitude solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Effective low-frequency prefactor of the spectral density is
# coupling_scale * eta.  The default reproduces an overall coupling of 0.1
# in front of omega^2 for the default gap width eta = 0.05.
DEFAULT_COUPLING_SCALE = 2.0


@dataclass(frozen=True)
class SpectralDensity:
    """Gap-tunable density  coupling_scale * eta * w^2 * (1 - h exp(-((w-omega0)/eta)^2)).

    Clamped below at zero (a spectral density is nonnegative; for h > 1
    the raw bracket goes negative near omega0) and zero outside
    [0, omega_max].
    """

    h: float
    coupling_scale: float = DEFAULT_COUPLING_SCALE
    omega0: float = 1.0
    eta: float = 0.05
    omega_max: float = 3.0
    clamp_negative: bool = True

    def evaluate(self, omega):
        """J(omega); accepts scalars or arrays."""
        omega = np.asarray(omega, dtype=float)
        x = (omega - self.omega0) / self.eta
        bracket = 1.0 - self.h * np.exp(-x * x)
        j = self.coupling_scale * self.eta * omega * omega * bracket
        if self.clamp_negative:
            j = np.maximum(j, 0.0)
        j = np.where((omega < 0.0) | (omega > self.omega_max), 0.0, j)
        return j if j.ndim else float(j)

    def __call__(self, omega):
        return self.evaluate(omega)

    def clamped_interval(self) -> tuple[float, float] | None:
        """Frequency interval where the bracket is negative (h > 1 only)."""
        if not self.clamp_negative or self.h <= 1.0:
            return None
        half_width = self.eta * np.sqrt(np.log(self.h))
        lo = max(self.omega0 - half_width, 0.0)
        hi = min(self.omega0 + half_width, self.omega_max)
        return (lo, hi) if lo < hi else None


@dataclass(frozen=True)
class DiscretizedBath:
    """Star environment: mode frequencies and couplings g_k = sqrt(J dw)."""

    frequencies: np.ndarray
    couplings: np.ndarray

    def __post_init__(self):
        if len(self.frequencies) != len(self.couplings):
            raise ValueError("frequencies and couplings must have equal length")

    @property
    def count(self) -> int:
        return len(self.frequencies)

    @property
    def total_weight(self) -> float:
        """sum g_k^2, the quadrature approximation of the J integral."""
        return float(np.sum(self.couplings**2))


def discretize(
    density: SpectralDensity, n_omega: int, scheme: str = "midpoint"
) -> DiscretizedBath:
    """Reduce the continuum to n_omega modes on a uniform grid in (0, omega_max].

    midpoint: w_k = (k + 1/2) dw with weight dw.
    trapezoid: w_k = k dw, k = 1..N, weight dw except dw/2 at omega_max
    (the omega = 0 node carries no weight since J(0) = 0).
    """
    if n_omega < 2:
        raise ValueError(f"n_omega must be at least 2, got {n_omega}")
    dw = density.omega_max / n_omega
    if scheme == "midpoint":
        freqs = (np.arange(n_omega) + 0.5) * dw
        weights = np.full(n_omega, dw)
    elif scheme == "trapezoid":
        freqs = np.arange(1, n_omega + 1) * dw
        weights = np.full(n_omega, dw)
        weights[-1] = 0.5 * dw
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    couplings = np.sqrt(density.evaluate(freqs) * weights)
    return DiscretizedBath(frequencies=freqs, couplings=couplings)


@dataclass(frozen=True)
class CorrelationKernel:
    """Two-point bath correlation f(tau) on a uniform time grid.

    f(tau) = sum_k g_k^2 exp(i (omega_s - omega_k) tau), so f(0) is the
    total coupling weight and |f(tau)| <= f(0).
    """

    time_grid: np.ndarray
    values: np.ndarray
    system_frequency: float

    @property
    def dt(self) -> float:
        return float(self.time_grid[1] - self.time_grid[0])


def correlation_function(
    bath: DiscretizedBath,
    omega_s: float,
    dt: float,
    t_final: float,
    chunk: int = 4096,
) -> CorrelationKernel:
    """Evaluate the correlation kernel on the grid 0, dt, ..., t_final."""
    if bath.count == 0:
        raise ValueError("bath has no modes")
    if dt <= 0.0 or t_final <= 0.0:
        raise ValueError("dt and t_final must be positive")
    n_steps = int(round(t_final / dt))
    tau = np.arange(n_steps + 1) * dt
    weights = bath.couplings**2
    detuning = omega_s - bath.frequencies
    values = np.empty(n_steps + 1, dtype=complex)
    for start in range(0, n_steps + 1, chunk):
        block = tau[start : start + chunk]
        values[start : start + chunk] = np.exp(
            1.0j * np.outer(block, detuning)
        ) @ weights
    return CorrelationKernel(time_grid=tau, values=values, system_frequency=omega_s)
