"""Star-to-chain mapping of the discretized environment.

The star bath (modes omega_k, couplings g_k) defines a discrete measure
with weights g_k^2.  The three-term recurrence coefficients of its monic
orthogonal polynomials give a unitarily equivalent nearest-neighbor
chain: onsite energies alpha_n, hoppings sqrt(beta_n), and the system
coupled to site 0 with strength rho_0 = sqrt(sum g_k^2).

Two routes compute the same coefficients and serve as mutual checks:
the discrete Stieltjes procedure on polynomial values, and Lanczos
tridiagonalization of diag(omega_k) started from the coupling vector.
Both use full reorthogonalization, without which the recurrence breaks
down around n = 30 for smooth measures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bath import DiscretizedBath

BREAKDOWN_RELTOL = 1e-14  # beta_n below this times omega_max^2 ends the recurrence


class ChainLengthError(ValueError):
    """Requested chain length exceeds what the measure supports."""

    def __init__(self, requested: int, max_stable: int):
        self.requested = requested
        self.max_stable = max_stable
        super().__init__(
            f"recurrence breaks down at n = {max_stable}; "
            f"cannot build {requested} chain sites from this measure"
        )


@dataclass(frozen=True)
class RecurrenceCoefficients:
    """Three-term recurrence data: onsite alpha_n, squared hoppings beta_n
    (beta_0 unused and zero), and the system coupling norm0 = sqrt(sum w)."""

    onsite: np.ndarray
    hopping_sq: np.ndarray
    norm0: float

    @property
    def length(self) -> int:
        return len(self.onsite)

    def hoppings(self) -> np.ndarray:
        """Chain hopping amplitudes sqrt(beta_1 .. beta_{M-1})."""
        return np.sqrt(self.hopping_sq[1:])


def _validate_measure(bath: DiscretizedBath, m_chain: int) -> np.ndarray:
    if m_chain < 1:
        raise ValueError("m_chain must be at least 1")
    if m_chain > bath.count:
        raise ValueError(
            f"m_chain = {m_chain} exceeds the number of bath modes {bath.count}"
        )
    weights = bath.couplings.astype(float) ** 2
    if np.any(bath.couplings < 0):
        raise ValueError("couplings must be nonnegative")
    n_support = int(np.sum(weights > 0.0))
    if n_support == 0:
        raise ValueError("measure has zero total weight")
    if m_chain > n_support:
        raise ValueError(
            f"measure has only {n_support} support points, cannot build {m_chain} sites"
        )
    return weights


def stieltjes_coefficients(
    bath: DiscretizedBath, m_chain: int
) -> RecurrenceCoefficients:
    """Discrete Stieltjes procedure with full reorthogonalization.

    Works with orthonormal polynomial values q_n(omega_k) under the
    weighted inner product <u, v> = sum_k w_k u_k v_k; alpha_n =
    <x q_n, q_n> and beta_n = ||r_n||^2 before normalization.
    """
    weights = _validate_measure(bath, m_chain)
    x = bath.frequencies.astype(float)
    scale = float(np.max(np.abs(x)) ** 2) or 1.0

    alpha = np.zeros(m_chain)
    beta = np.zeros(m_chain)
    norm0 = float(np.sqrt(weights.sum()))

    q = np.zeros((m_chain, len(x)))
    q[0] = 1.0 / norm0
    for n in range(m_chain):
        qn = q[n]
        alpha[n] = float(np.sum(weights * x * qn * qn))
        if n == m_chain - 1:
            break
        r = (x - alpha[n]) * qn
        if n > 0:
            r -= np.sqrt(beta[n]) * q[n - 1]
        # full reorthogonalization, two passes, in the weighted inner product
        for _ in range(2):
            overlaps = q[: n + 1] @ (weights * r)
            r -= overlaps @ q[: n + 1]
        beta_next = float(np.sum(weights * r * r))
        if beta_next <= BREAKDOWN_RELTOL * scale:
            raise ChainLengthError(requested=m_chain, max_stable=n + 1)
        beta[n + 1] = beta_next
        q[n + 1] = r / np.sqrt(beta_next)
    return RecurrenceCoefficients(onsite=alpha, hopping_sq=beta, norm0=norm0)


def lanczos_tridiagonalize(
    bath: DiscretizedBath, m_chain: int | None = None
) -> RecurrenceCoefficients:
    """Lanczos tridiagonalization of diag(omega_k), started from the
    normalized coupling vector, with full reorthogonalization.

    Mathematically identical to `stieltjes_coefficients`; kept as an
    independent route for cross-checking.
    """
    if m_chain is None:
        m_chain = bath.count
    _validate_measure(bath, m_chain)
    x = bath.frequencies.astype(float)
    scale = float(np.max(np.abs(x)) ** 2) or 1.0

    norm0 = float(np.linalg.norm(bath.couplings))
    alpha = np.zeros(m_chain)
    beta = np.zeros(m_chain)

    v = np.zeros((m_chain, len(x)))
    v[0] = bath.couplings / norm0
    for n in range(m_chain):
        u = x * v[n]
        alpha[n] = float(v[n] @ u)
        if n == m_chain - 1:
            break
        r = u - alpha[n] * v[n]
        if n > 0:
            r -= np.sqrt(beta[n]) * v[n - 1]
        for _ in range(2):
            r -= (v[: n + 1] @ r) @ v[: n + 1]
        beta_next = float(r @ r)
        if beta_next <= BREAKDOWN_RELTOL * scale:
            raise ChainLengthError(requested=m_chain, max_stable=n + 1)
        beta[n + 1] = beta_next
        v[n + 1] = r / np.sqrt(beta_next)
    return RecurrenceCoefficients(onsite=alpha, hopping_sq=beta, norm0=norm0)


@dataclass(frozen=True)
class ChainHamiltonian:
    """Tight-binding chain equivalent of the star bath.

    coupling_operator selects how the qubit attaches to site 0:
    "sigma_x" for the full model, "sigma_pm" for the number-conserving
    variant.
    """

    onsite_energies: np.ndarray
    hoppings: np.ndarray
    system_coupling: float
    coupling_operator: str = "sigma_x"

    def __post_init__(self):
        if len(self.hoppings) != len(self.onsite_energies) - 1:
            raise ValueError("need one hopping per adjacent site pair")
        if self.coupling_operator not in ("sigma_x", "sigma_pm"):
            raise ValueError(f"unknown coupling operator {self.coupling_operator!r}")

    @property
    def length(self) -> int:
        return len(self.onsite_energies)

    @classmethod
    def from_coefficients(
        cls, coeffs: RecurrenceCoefficients, coupling_operator: str = "sigma_x"
    ) -> "ChainHamiltonian":
        return cls(
            onsite_energies=coeffs.onsite.copy(),
            hoppings=coeffs.hoppings(),
            system_coupling=coeffs.norm0,
            coupling_operator=coupling_operator,
        )

    def single_particle_matrix(self) -> np.ndarray:
        """Tridiagonal one-boson matrix of the chain."""
        m = np.diag(self.onsite_energies).astype(float)
        if self.length > 1:
            m += np.diag(self.hoppings, k=1) + np.diag(self.hoppings, k=-1)
        return m


@dataclass(frozen=True)
class EquivalenceReport:
    """Deviations between a chain and the star bath it was built from."""

    max_frequency_error: float
    max_coupling_error: float
    truncated: bool
    interlacing_ok: bool

    def passed(self, freq_tol: float = 1e-8, coupling_tol: float = 1e-6) -> bool:
        if self.truncated:
            return self.interlacing_ok
        return (
            self.max_frequency_error <= freq_tol
            and self.max_coupling_error <= coupling_tol
        )


def verify_unitary_equivalence(
    chain: ChainHamiltonian, bath: DiscretizedBath
) -> EquivalenceReport:
    """Check that diagonalizing the chain recovers the star data.

    For a full-length chain the eigenvalues must reproduce the bath
    frequencies (relative) and g * first-row eigenvector components the
    couplings up to sign.  A truncated chain is checked for Cauchy
    interlacing of its spectrum with the star frequencies instead.
    """
    matrix = chain.single_particle_matrix()
    eigvals, eigvecs = np.linalg.eigh(matrix)
    freq_scale = max(np.max(np.abs(bath.frequencies)), 1e-300)

    if chain.length == bath.count:
        order = np.argsort(bath.frequencies)
        freqs = bath.frequencies[order]
        coups = bath.couplings[order]
        freq_err = float(np.max(np.abs(eigvals - freqs)) / freq_scale)
        recovered = np.abs(chain.system_coupling * eigvecs[0, :])
        coup_err = float(np.max(np.abs(recovered - coups)))
        return EquivalenceReport(
            max_frequency_error=freq_err,
            max_coupling_error=coup_err,
            truncated=False,
            interlacing_ok=True,
        )

    # truncated chain: lambda_k(star) <= lambda_k(chain) <= lambda_{k + N - M}(star)
    star = np.sort(bath.frequencies)
    gap = bath.count - chain.length
    slack = 1e-10 * freq_scale
    ok = bool(
        np.all(eigvals >= star[: chain.length] - slack)
        and np.all(eigvals <= star[gap:] + slack)
    )
    return EquivalenceReport(
        max_frequency_error=np.nan,
        max_coupling_error=np.nan,
        truncated=True,
        interlacing_ok=ok,
    )
