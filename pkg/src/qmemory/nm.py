"""Distinguishability traces, memory gains and losses, and bound audits.

Information backflow is quantified per initial antipodal pure-state pair:
the accumulated positive increments of the trace distance along a
direction are the memory gains N(t), the negative increments the losses
P(t), and the backflow measure is the maximum of the gains over the
scanned directions.  The decomposition

    F_opt(t) = 1 + (1/6) sum_a (N_a(t) + P_a(t))

holds for every orthogonal frame, and yields the chain of bounds audited
by `audit_bounds`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qubit import direction_from_angles

ATOL_TRACE = 1e-10
AUDIT_TOL = 1e-8


@dataclass(frozen=True)
class DistinguishabilityTrace:
    """Trace distance D(t) of an evolved antipodal pair along `direction`."""

    direction: np.ndarray
    time_grid: np.ndarray
    values: np.ndarray
    theta: float = np.nan
    phi: float = np.nan

    def __post_init__(self):
        if len(self.time_grid) != len(self.values):
            raise ValueError("time grid and values must have equal length")
        if abs(self.values[0] - 1.0) > ATOL_TRACE:
            raise ValueError(f"D(0) = {self.values[0]}, expected 1 for an orthogonal pair")
        if self.values.min() < -ATOL_TRACE or self.values.max() > 1.0 + ATOL_TRACE:
            raise ValueError("distinguishability values outside [0, 1]")


@dataclass(frozen=True)
class GainLossLedger:
    """Accumulated gains N(t) >= 0 (non-decreasing) and losses P(t) <= 0."""

    direction: np.ndarray
    time_grid: np.ndarray
    gains: np.ndarray
    losses: np.ndarray


def gains_losses(trace: DistinguishabilityTrace) -> GainLossLedger:
    """Split the increments of D(t) into accumulated gains and losses."""
    if len(trace.values) < 2:
        raise ValueError("need at least two grid points")
    diffs = np.diff(trace.values)
    gains = np.concatenate([[0.0], np.cumsum(np.clip(diffs, 0.0, None))])
    losses = np.concatenate([[0.0], np.cumsum(np.clip(diffs, None, 0.0))])
    return GainLossLedger(
        direction=trace.direction,
        time_grid=trace.time_grid,
        gains=gains,
        losses=losses,
    )


@dataclass(frozen=True)
class DirectionGrid:
    """Scan directions n(theta, phi) for antipodal pairs.

    theta ranges over [0, pi/2] and phi over [0, pi): antipodal pairs make
    the two hemispheres redundant, and both models here are symmetric
    under phi -> phi + pi (z rotations in the number-conserving model,
    parity sigma_z x (-1)^N in the full model).
    """

    polar_samples: np.ndarray
    azimuth_samples: np.ndarray

    @classmethod
    def default(cls, n_theta: int = 31, n_phi: int = 16) -> "DirectionGrid":
        return cls(
            polar_samples=np.linspace(0.0, np.pi / 2, n_theta),
            azimuth_samples=np.linspace(0.0, np.pi, n_phi, endpoint=False),
        )

    @classmethod
    def polar_only(cls, n_theta: int = 31) -> "DirectionGrid":
        """Scan theta with phi fixed to 0 (z-rotation-symmetric channels)."""
        return cls(
            polar_samples=np.linspace(0.0, np.pi / 2, n_theta),
            azimuth_samples=np.zeros(1),
        )

    def angle_pairs(self) -> list[tuple[float, float]]:
        """(theta, phi) pairs in scan order: theta-major, phi-minor."""
        return [
            (float(th), float(ph))
            for th in self.polar_samples
            for ph in self.azimuth_samples
        ]

    def directions(self) -> np.ndarray:
        return np.array([direction_from_angles(th, ph) for th, ph in self.angle_pairs()])


@dataclass(frozen=True)
class NMResult:
    """Backflow measure N(t): the running max of gains over the scan."""

    time_grid: np.ndarray
    nm_value: np.ndarray
    best_direction: np.ndarray
    best_theta: float
    best_phi: float


def nm_measure(
    traces: Sequence[DistinguishabilityTrace], horizon: float | None = None
) -> NMResult:
    """Maximize accumulated gains over a set of direction traces.

    The argmax direction is reported at `horizon` (default: the end of the
    grid); ties resolve to the earliest trace in scan order, i.e. smallest
    theta then smallest phi for grids from DirectionGrid.
    """
    if not traces:
        raise ValueError("no traces to scan")
    grid = traces[0].time_grid
    for tr in traces[1:]:
        if len(tr.time_grid) != len(grid) or np.max(np.abs(tr.time_grid - grid)) > 1e-12:
            raise ValueError("all traces must share one time grid")
    all_gains = np.stack([gains_losses(tr).gains for tr in traces])
    nm_value = all_gains.max(axis=0)
    if horizon is None:
        h_idx = len(grid) - 1
    else:
        h_idx = int(np.searchsorted(grid, horizon - 1e-12))
        if h_idx >= len(grid):
            raise ValueError(f"horizon {horizon} beyond the grid end {grid[-1]}")
    best = int(np.argmax(all_gains[:, h_idx]))
    tr = traces[best]
    return NMResult(
        time_grid=grid,
        nm_value=nm_value,
        best_direction=tr.direction,
        best_theta=tr.theta,
        best_phi=tr.phi,
    )


def _check_orthogonal_frame(directions: np.ndarray) -> None:
    gram = directions @ directions.T
    if np.max(np.abs(gram - np.eye(3))) > ATOL_TRACE:
        raise ValueError("ledger directions do not form an orthonormal frame")


def fidelity_decomposition(ledgers: Sequence[GainLossLedger]) -> np.ndarray:
    """Optimal recovery fidelity 1 + (1/6) sum_a (N_a + P_a) per grid time.

    The three ledgers must belong to mutually orthogonal directions; the
    result is frame independent.
    """
    if len(ledgers) != 3:
        raise ValueError("need exactly three ledgers")
    _check_orthogonal_frame(np.array([l.direction for l in ledgers]))
    total = sum(l.gains + l.losses for l in ledgers)
    return 1.0 + total / 6.0


@dataclass(frozen=True)
class BoundAudit:
    """Per-time margins (bound minus constrained quantity) of the backflow
    and fidelity bounds; a negative margin beyond tolerance is a violation."""

    time_grid: np.ndarray
    margins: dict[str, np.ndarray]
    tolerance: float = AUDIT_TOL

    def worst(self) -> dict[str, float]:
        return {name: float(m.min()) for name, m in self.margins.items()}

    def violations(self) -> dict[str, int]:
        return {
            name: int(np.sum(m < -self.tolerance)) for name, m in self.margins.items()
        }

    def total_violations(self) -> int:
        return sum(self.violations().values())

    def report(self) -> str:
        lines = ["bound audit (margin >= 0 means the bound holds)"]
        for name, m in self.margins.items():
            lines.append(
                f"  {name}: worst margin {m.min():+.3e} at t={self.time_grid[m.argmin()]:.4g}, "
                f"violations beyond {self.tolerance:g}: {np.sum(m < -self.tolerance)}"
            )
        return "\n".join(lines)


def audit_bounds(nm: NMResult, ledgers: Sequence[GainLossLedger]) -> BoundAudit:
    """Check the gain-loss bounds on a frame whose z axis is the best
    direction.

    `ledgers` hold (x, y, z) with z equal to nm.best_direction.  Audited
    at every grid time, with N(t) taken as the larger of the scanned
    maximum and the frame's own gains (the scan is a lower bound to the
    true maximum, and the bounds require N >= N_a for frame directions):

      gain_vs_loss_frame:   N <= |sum_a P_a| - N_x - N_y
      gain_vs_total_loss:   N <= |sum_a P_a|
      loss_dominance:       sum_a N_a <= |sum_a P_a|
      fidelity_upper:       F_opt <= 1 + N/2 + (1/6) sum_a P_a

    Violations are reported with magnitude, never raised.
    """
    if len(ledgers) != 3:
        raise ValueError("need exactly three ledgers (x, y, z frame)")
    frame = np.array([l.direction for l in ledgers])
    _check_orthogonal_frame(frame)
    if np.max(np.abs(frame[2] - nm.best_direction)) > 1e-9:
        raise ValueError("third ledger direction must equal nm.best_direction")
    grid = nm.time_grid
    for l in ledgers:
        if len(l.time_grid) != len(grid) or np.max(np.abs(l.time_grid - grid)) > 1e-12:
            raise ValueError("ledgers must share the nm time grid")

    gains = np.stack([l.gains for l in ledgers])
    total_loss = sum(l.losses for l in ledgers)
    abs_loss = np.abs(total_loss)
    n_eff = np.maximum(nm.nm_value, gains.max(axis=0))
    f_opt = 1.0 + (gains.sum(axis=0) + total_loss) / 6.0

    margins = {
        "gain_vs_loss_frame": abs_loss - gains[0] - gains[1] - n_eff,
        "gain_vs_total_loss": abs_loss - n_eff,
        "loss_dominance": abs_loss - gains.sum(axis=0),
        "fidelity_upper": 1.0 + 0.5 * n_eff + total_loss / 6.0 - f_opt,
    }
    return BoundAudit(time_grid=grid, margins=margins)
