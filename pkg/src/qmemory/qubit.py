"""Qubit state and channel algebra on the Bloch sphere.

States are plain 2x2 complex arrays, polarization (Bloch) vectors are real
3-arrays.  A channel acting on polarization vectors is stored as the affine
pair (M, q) with P -> M P + q.  The optimal recovery fidelity is computed
from the column norms of M (the L_{2,1} norm) or equivalently from the
differences of evolved antipodal pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Numerical tolerances used by every validity check in this package.
ATOL_ALGEBRA = 1e-12   # hermiticity, unit trace, identity cross-checks
ATOL_PSD = 1e-10       # eigenvalue slack below zero
ATOL_BLOCH = 1e-10     # |P| <= 1 slack

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

AXES = {
    "x": np.array([1.0, 0.0, 0.0]),
    "y": np.array([0.0, 1.0, 0.0]),
    "z": np.array([0.0, 0.0, 1.0]),
}


def validate_density(rho: np.ndarray) -> np.ndarray:
    """Check hermiticity, unit trace and positivity of a 2x2 state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"density matrix must be 2x2, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > ATOL_ALGEBRA:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > ATOL_ALGEBRA:
        raise ValueError(f"density matrix trace is {np.trace(rho)}, not 1")
    if np.linalg.eigvalsh(rho).min() < -ATOL_PSD:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def bloch_from_density(rho: np.ndarray) -> np.ndarray:
    """Polarization vector P_a = tr(rho sigma_a)."""
    rho = np.asarray(rho, dtype=complex)
    return np.array([np.trace(rho @ s).real for s in PAULIS])


def density_from_bloch(p: np.ndarray) -> np.ndarray:
    """State (1 + P.sigma)/2 for a point of the closed Bloch ball."""
    p = np.asarray(p, dtype=float)
    if p.shape != (3,):
        raise ValueError(f"Bloch vector must have 3 components, got {p.shape}")
    if np.linalg.norm(p) > 1.0 + ATOL_BLOCH:
        raise ValueError(f"|P| = {np.linalg.norm(p)} lies outside the Bloch ball")
    return 0.5 * (IDENTITY + p[0] * SIGMA_X + p[1] * SIGMA_Y + p[2] * SIGMA_Z)


def direction_from_angles(theta: float, phi: float) -> np.ndarray:
    return np.array(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
    )


@dataclass(frozen=True)
class PolarizedPair:
    """Antipodal pure-state pair |n+> , |n-> along a unit direction."""

    direction: np.ndarray
    plus_state: np.ndarray
    minus_state: np.ndarray

    @classmethod
    def along(cls, direction: np.ndarray) -> "PolarizedPair":
        direction = np.asarray(direction, dtype=float)
        norm = np.linalg.norm(direction)
        if abs(norm - 1.0) > ATOL_BLOCH:
            raise ValueError(f"direction must be a unit vector, |n| = {norm}")
        return cls(
            direction=direction,
            plus_state=density_from_bloch(direction),
            minus_state=density_from_bloch(-direction),
        )


def trace_distance(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """Half the trace norm of rho1 - rho2.

    The difference of two states is traceless Hermitian, so its two
    eigenvalues are +-lambda and the trace norm is 2|lambda|.
    """
    diff = np.asarray(rho1, dtype=complex) - np.asarray(rho2, dtype=complex)
    eigs = np.linalg.eigvalsh(diff)
    return 0.5 * float(np.sum(np.abs(eigs)))


def trace_distance_bloch(p1: np.ndarray, p2: np.ndarray) -> float:
    """Half the Euclidean distance of the polarization vectors (qubit case)."""
    return 0.5 * float(np.linalg.norm(np.asarray(p1) - np.asarray(p2)))


@dataclass(frozen=True)
class AffineChannel:
    """Bloch-ball map P -> linear_part @ P + offset."""

    linear_part: np.ndarray
    offset: np.ndarray

    def apply(self, p: np.ndarray) -> np.ndarray:
        return self.linear_part @ np.asarray(p, dtype=float) + self.offset

    def apply_state(self, rho: np.ndarray) -> np.ndarray:
        return density_from_bloch(self.apply(bloch_from_density(rho)))

    def max_image_norm(self, n_probe: int = 200, seed: int = 7) -> float:
        """Largest |M P + q| over random unit probes; <= 1 + 1e-8 for a
        physical channel."""
        rng = np.random.default_rng(seed)
        probes = rng.normal(size=(n_probe, 3))
        probes /= np.linalg.norm(probes, axis=1, keepdims=True)
        images = probes @ self.linear_part.T + self.offset
        return float(np.linalg.norm(images, axis=1).max())


def reconstruct_affine_map(images: dict[str, np.ndarray]) -> AffineChannel:
    """Assemble (M, q) from the images of the four probe inputs.

    `images` maps "x", "y", "z" (unit-axis inputs) and "origin" (the
    maximally mixed input) to output polarization vectors.  The offset is
    the image of the origin and column a of M is image(+a) - offset.
    """
    missing = {"x", "y", "z", "origin"} - images.keys()
    if missing:
        raise ValueError(f"missing probe images: {sorted(missing)}")
    q = np.asarray(images["origin"], dtype=float)
    m = np.column_stack([np.asarray(images[a], dtype=float) - q for a in "xyz"])
    return AffineChannel(linear_part=m, offset=q)


def l21_norm(m: np.ndarray) -> float:
    """Sum over columns of the Euclidean column norms."""
    m = np.asarray(m, dtype=float)
    return float(np.sum(np.sqrt(np.sum(m * m, axis=0))))


def optimal_fidelity_from_deltas(deltas: np.ndarray) -> float:
    """Optimal recovery fidelity from the 3x3 array of polarization
    differences.

    Row a holds the components of P(+a) - P(-a) for the pair launched
    along axis a; F = 1/2 + (1/12) sum_a |row_a|.
    """
    deltas = np.asarray(deltas, dtype=float)
    return 0.5 + np.sum(np.sqrt(np.sum(deltas * deltas, axis=1))) / 12.0


def optimal_fidelity_from_channel(channel: AffineChannel) -> float:
    """Optimal recovery fidelity 1/2 + ||M||_{2,1}/6 of an affine channel."""
    return 0.5 + l21_norm(channel.linear_part) / 6.0
