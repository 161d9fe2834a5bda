"""Truncated Fock-space states, operators and entropies.

Every constructor works on the first ``dim`` number states and reports the
probability mass that falls outside the cutoff.  Mass above ``TAIL_TOL`` is an
error rather than something to renormalise away silently.

All entropies are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln, xlogy
from scipy.stats import poisson

from .errors import DomainError, DimensionMismatch, TruncationError

TAIL_TOL = 1e-6
EIG_FLOOR = 1e-14
PSD_TOL = 1e-10
HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class StateVector:
    """Normalised pure state; ``tail_mass`` is what the cutoff removed."""

    amplitudes: np.ndarray
    tail_mass: float = 0.0

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def projector(self) -> "DensityOperator":
        v = self.amplitudes
        return DensityOperator(np.outer(v, v.conj()), self.tail_mass)


@dataclass(frozen=True)
class DensityOperator:
    """Unit-trace Hermitian matrix.

    ``trace_deficit`` is the mass lost to truncation before renormalisation.
    Construction checks hermiticity and trace; positivity is checked by
    :func:`check_density`, which needs an eigendecomposition.
    """

    matrix: np.ndarray
    trace_deficit: float = 0.0

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"density matrix must be square, got {m.shape}")
        check_hermitian(m)
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-8:
            raise DomainError(f"density matrix trace is {tr!r}, expected 1")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


StateLike = Union[StateVector, DensityOperator, np.ndarray]


def check_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    defect = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if defect > tol:
        raise DomainError(f"matrix is not Hermitian (max |M - M^H| = {defect:.3g})")


def check_density(rho: DensityOperator) -> None:
    """Raise if ``rho`` has an eigenvalue below ``-PSD_TOL``."""
    lam = np.linalg.eigvalsh(rho.matrix)
    if lam[0] < -PSD_TOL:
        raise DomainError(f"density matrix has eigenvalue {lam[0]:.3g}")


def as_matrix(state: StateLike) -> np.ndarray:
    if isinstance(state, StateVector):
        v = state.amplitudes
        return np.outer(v, v.conj())
    if isinstance(state, DensityOperator):
        return state.matrix
    return np.asarray(state)


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1)


def number_operator(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float))


def _renormalised(matrix: np.ndarray, deficit: float, what: str) -> DensityOperator:
    if deficit > TAIL_TOL:
        raise TruncationError(
            f"{what}: truncation discards {deficit:.3g} of the trace (limit {TAIL_TOL:g}); "
            "increase dim"
        )
    m = matrix / np.trace(matrix).real
    m = 0.5 * (m + m.conj().T)
    return DensityOperator(m, max(deficit, 0.0))


def coherent_amplitudes(z, dim: int) -> np.ndarray:
    """Unnormalised truncated coherent-state amplitudes, one row per entry of ``z``.

    Built in log space so that large photon numbers do not overflow.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    n = np.arange(dim)
    r = np.abs(z)[:, None]
    with np.errstate(divide="ignore"):
        log_mag = -0.5 * r**2 + xlogy(n, r) - 0.5 * gammaln(n + 1)
    phase = np.exp(1j * np.outer(np.angle(z), n))
    return np.exp(log_mag) * phase


def coherent_tail(z, dim: int) -> np.ndarray:
    """Poisson mass above the cutoff for each amplitude in ``z``."""
    return poisson.sf(dim - 1, np.abs(np.atleast_1d(z)) ** 2)


def coherent_state(z: complex, dim: int) -> StateVector:
    """Coherent state |z>, truncated to ``dim`` levels and renormalised."""
    if dim < 1:
        raise DomainError("dim must be >= 1")
    tail = float(coherent_tail(z, dim)[0])
    if tail > TAIL_TOL:
        raise TruncationError(
            f"coherent state |{z}> loses {tail:.3g} of its norm at dim={dim}; increase dim"
        )
    v = coherent_amplitudes(z, dim)[0]
    return StateVector(v / np.linalg.norm(v), tail)


def thermal_weights(N: float, size: int) -> np.ndarray:
    """Geometric photon-number distribution with mean ``N`` (first ``size`` terms)."""
    if N < 0:
        raise DomainError(f"mean noise quanta must be >= 0, got {N}")
    n = np.arange(size)
    if N == 0:
        return (n == 0).astype(float)
    return np.exp(n * math.log(N / (N + 1.0))) / (N + 1.0)


def thermal_state(N: float, dim: int) -> DensityOperator:
    w = thermal_weights(N, dim)
    deficit = (N / (N + 1.0)) ** dim if N > 0 else 0.0
    return _renormalised(np.diag(w).astype(complex), deficit, f"thermal state N={N}")


def _guard(alpha_abs: float, dim: int) -> int:
    return int(math.ceil(4.0 * alpha_abs * math.sqrt(dim)))


@lru_cache(maxsize=16)
def _real_displacement(r: float, work_dim: int) -> np.ndarray:
    a = annihilation(work_dim)
    out = expm(r * (a.T - a))
    out.flags.writeable = False
    return out


def _rotate(matrix: np.ndarray, phi: float) -> np.ndarray:
    """Conjugate by the phase rotation exp(i phi a^dagger a)."""
    ph = np.exp(1j * phi * np.arange(matrix.shape[0]))
    return matrix * np.outer(ph, ph.conj())


def displacement(alpha: complex, dim: int) -> np.ndarray:
    """Displacement operator exp(alpha a^dagger - conj(alpha) a) on ``dim`` levels.

    The exponential is taken on a padded space of ``dim + g`` levels, with
    ``g = ceil(4 |alpha| sqrt(dim))``, and cropped.  The crop is not exactly
    unitary near the cutoff; only the block of indices below ``dim - g`` is
    required to be unitary to within ``TAIL_TOL``.
    """
    r, phi = abs(alpha), float(np.angle(alpha))
    g = _guard(r, dim)
    v = np.asarray(_real_displacement(float(r), dim + g), dtype=complex)
    v = _rotate(v, phi)[:dim, :dim]
    safe = dim - g
    if safe > 0:
        block = v[:, :safe]
        defect = np.max(np.abs(block.conj().T @ block - np.eye(safe)))
        if defect > TAIL_TOL:
            raise TruncationError(
                f"displacement by {alpha} is not unitary on the guarded block "
                f"(defect {defect:.3g}); increase dim"
            )
    return v


# sized for the distinct radii of a fine polar grid
@lru_cache(maxsize=2048)
def _displaced_thermal_real(r: float, N: float, dim: int) -> DensityOperator:
    work = dim + _guard(r, dim)
    v = np.asarray(_real_displacement(r, work))[:dim, :]
    m = (v * thermal_weights(N, work)) @ v.T
    deficit = 1.0 - np.trace(m)
    return _renormalised(m.astype(complex), deficit, f"displaced thermal |alpha|={r}, N={N}")


def displaced_thermal(alpha: complex, N: float, dim: int) -> DensityOperator:
    """Thermal state with mean noise ``N`` displaced to amplitude ``alpha``."""
    if N < 0:
        raise DomainError(f"mean noise quanta must be >= 0, got {N}")
    base = _displaced_thermal_real(float(abs(alpha)), float(N), dim)
    phi = float(np.angle(alpha))
    if phi == 0.0:
        return base
    return DensityOperator(_rotate(base.matrix, phi), base.trace_deficit)


def entropy_from_eigenvalues(lam: np.ndarray) -> float:
    lam = np.where(lam < EIG_FLOOR, 0.0, lam)
    return float(max(-np.sum(xlogy(lam, lam)), 0.0))


def von_neumann_entropy(rho: StateLike) -> float:
    """-Tr rho ln rho in nats; eigenvalues below 1e-14 contribute nothing."""
    if isinstance(rho, StateVector):
        return 0.0
    return entropy_from_eigenvalues(np.linalg.eigvalsh(as_matrix(rho)))


def mean_photon_number(rho: StateLike) -> float:
    if isinstance(rho, StateVector):
        return float(np.sum(np.arange(rho.dim) * np.abs(rho.amplitudes) ** 2))
    m = as_matrix(rho)
    return float(np.real(np.arange(m.shape[0]) @ np.diag(m)))


def hermitian_function(
    m: np.ndarray, fn: Callable[[np.ndarray], np.ndarray], psd: bool = False
) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its eigenbasis.

    With ``psd=True`` (needed for fractional powers) eigenvalues in
    ``[-1e-10, 0)`` are clipped to zero and anything more negative raises.
    """
    m = np.asarray(m)
    check_hermitian(m)
    lam, u = np.linalg.eigh(m)
    if psd:
        if lam[0] < -PSD_TOL:
            raise DomainError(f"eigenvalue {lam[0]:.3g} passed to a power map")
        lam = np.clip(lam, 0.0, None)
    return (u * fn(lam)) @ u.conj().T


def hermitian_power(m: np.ndarray, t: float) -> np.ndarray:
    return hermitian_function(m, lambda x: x**t, psd=True)


def hermitian_sqrt(m: np.ndarray) -> np.ndarray:
    return hermitian_function(m, np.sqrt, psd=True)


def trace_power(m: np.ndarray, t: float) -> float:
    """Tr M^t for a positive semidefinite Hermitian ``m``."""
    lam = np.linalg.eigvalsh(m)
    if lam[0] < -PSD_TOL * max(1.0, lam[-1]):
        raise DomainError(f"eigenvalue {lam[0]:.3g} passed to a power map")
    return float(np.sum(np.clip(lam, 0.0, None) ** t))


def compressed_entropy(rho: StateLike, m: int) -> float:
    """H(P rho P) + t ln t for the projection P onto the first ``m`` levels, t = Tr P rho P.

    This is ``t`` times the entropy of the normalised compression; it is
    nondecreasing in ``m`` and equals H(rho) at the full dimension.
    """
    block = as_matrix(rho)[:m, :m]
    lam = np.linalg.eigvalsh(block)
    lam = np.where(lam < EIG_FLOOR, 0.0, lam)
    t = lam.sum()
    return float(-np.sum(xlogy(lam, lam)) + xlogy(t, t))


def fidelity(a: StateLike, b: StateLike) -> float:
    """Overlap fidelity; at least one argument must be pure."""
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
    if isinstance(b, StateVector):
        a, b = b, a
    if not isinstance(a, StateVector):
        raise DomainError("fidelity needs at least one pure state")
    v = a.amplitudes
    return float(np.real(v.conj() @ as_matrix(b) @ v))
