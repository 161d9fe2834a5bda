"""Closed forms for the single-mode Gaussian channel and its photon-channel twin.

``noise`` is the mean number of thermal noise quanta N and ``budget`` the mean
number of signal quanta E.  Everything is in nats.

The state families at the bottom feed :class:`cqcap.channel.Ensemble`:

* :class:`CoherentFamily`: alpha -> |alpha><alpha| (pure-state Gaussian channel)
* :class:`DisplacedThermalFamily`: alpha -> V(alpha) S_0 V(alpha)^*
* :class:`PhotonFamily`: m -> S_0 shifted up by m quanta
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from . import fock
from .channel import Ensemble, average_state, holevo_quantity
from .discretizer import discretize, energy_cost
from .errors import DomainError, TruncationError


@dataclass(frozen=True)
class GaussianChannel:
    noise: float
    budget: float

    def __post_init__(self):
        if not self.noise >= 0:
            raise DomainError(f"noise N must be >= 0, got {self.noise}")
        if not self.budget >= 0:
            raise DomainError(f"energy E must be >= 0, got {self.budget}")


def thermal_entropy(N):
    """Entropy (N+1) ln(N+1) - N ln N of a thermal state; 0 at N = 0."""
    N = np.asarray(N, dtype=float)
    if np.any(N < 0):
        raise DomainError("mean quanta must be >= 0")
    out = xlogy(N + 1.0, N + 1.0) - xlogy(N, N)
    return float(out) if out.ndim == 0 else out


def max_output_entropy(ch: GaussianChannel) -> float:
    return thermal_entropy(ch.noise + ch.budget)


def _x_log1p_inv(x: float) -> float:
    # x ln(1 + 1/x) -> 0 as x -> 0
    return 0.0 if x == 0 else x * math.log1p(1.0 / x)


def gaussian_capacity(ch: GaussianChannel) -> float:
    """Capacity of the Gaussian channel under the mean-energy constraint."""
    N, E = ch.noise, ch.budget
    return math.log1p(E / (N + 1.0)) + _x_log1p_inv(N + E) - _x_log1p_inv(N)


@dataclass(frozen=True)
class GaussianPrior:
    """Circular complex Gaussian with E[|alpha|^2] = ``budget``."""

    budget: float

    @property
    def point_mass(self):
        return 0j if self.budget == 0 else None

    def pdf(self, alpha):
        if self.budget == 0:
            raise DomainError("the E = 0 prior is a point mass and has no density")
        a2 = np.abs(np.asarray(alpha)) ** 2
        return np.exp(-a2 / self.budget) / (math.pi * self.budget)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """|alpha|^2 ~ Exponential(mean E), phase uniform."""
        s = math.sqrt(self.budget / 2.0)
        return s * (rng.standard_normal(size) + 1j * rng.standard_normal(size))

    def cell_mass(self, r0, r1, t0, t1):
        r0, r1 = np.asarray(r0, float), np.asarray(r1, float)
        span = (np.asarray(t1, float) - np.asarray(t0, float)) / (2.0 * math.pi)
        # exp(-a) - exp(-b) = exp(-a) * (-expm1(a - b)), stable for thin annuli
        a, b = r0**2 / self.budget, r1**2 / self.budget
        return span * np.exp(-a) * -np.expm1(a - b)

    def tail_radius(self, eps: float) -> float:
        return math.sqrt(self.budget * math.log(1.0 / eps))


def optimal_gaussian_prior(ch: GaussianChannel) -> GaussianPrior:
    return GaussianPrior(ch.budget)


def default_radius(budget: float) -> float:
    """Disc radius leaving e^-9 ~ 1.2e-4 of the optimal prior outside."""
    return 3.0 * math.sqrt(budget) if budget > 0 else 1.0


def photon_state(m: int, N: float, dim: int) -> fock.DensityOperator:
    """Thermal state with its number distribution shifted up by ``m`` quanta."""
    if m < 0 or int(m) != m:
        raise DomainError(f"shift m must be a nonnegative integer, got {m}")
    m = int(m)
    deficit = 1.0 if m >= dim else ((N / (N + 1.0)) ** (dim - m) if N > 0 else 0.0)
    if deficit > fock.TAIL_TOL:
        raise TruncationError(f"photon state m={m}, N={N} does not fit in dim={dim}")
    w = np.zeros(dim)
    w[m:] = fock.thermal_weights(N, dim - m)
    return fock.DensityOperator(np.diag(w / w.sum()).astype(complex), deficit)


def photon_optimal_prior(ch: GaussianChannel, size: int) -> np.ndarray:
    """First ``size`` terms of the capacity-achieving prior over shifts m."""
    N, E = ch.noise, ch.budget
    m = np.arange(size)
    delta0 = (m == 0).astype(float)
    if E == 0:
        return delta0
    M = N + E
    geo = np.exp(m * math.log(M / (M + 1.0))) / (M + 1.0)
    return (N / M) * delta0 + (E / M) * geo


def photon_max_shift(N: float, dim: int) -> int:
    """Largest shift whose photon state keeps truncation loss under ``TAIL_TOL``."""
    if N == 0:
        return dim - 1
    return dim - int(math.ceil(math.log(fock.TAIL_TOL) / math.log(N / (N + 1.0))))


def photon_ensemble(ch: GaussianChannel, dim: int) -> Ensemble:
    """Photon-channel ensemble under the optimal prior, cut at the largest safe shift."""
    size = photon_max_shift(ch.noise, dim) + 1
    if size < 1:
        raise TruncationError(f"dim={dim} is too small for noise N={ch.noise}")
    pi = photon_optimal_prior(ch, size)
    tail = 1.0 - pi.sum()
    if tail > fock.TAIL_TOL:
        raise TruncationError(f"optimal photon prior loses {tail:.3g} beyond m={size - 1}")
    pi = pi / pi.sum()
    m = np.arange(size)
    keep = pi > 0
    return Ensemble(pi[keep], PhotonFamily(ch.noise, dim), m[keep], ch.budget, m[keep])


def gaussian_family(ch: GaussianChannel, dim: int):
    return CoherentFamily(dim) if ch.noise == 0 else DisplacedThermalFamily(ch.noise, dim)


def gaussian_ensemble(ch: GaussianChannel, dim: int, level: int, radius: float | None = None):
    """Optimal Gaussian prior discretised at ``level`` and pushed through the channel."""
    import warnings
    from .errors import DegenerateLevelSet

    radius = default_radius(ch.budget) if radius is None else radius
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateLevelSet)
        return discretize(optimal_gaussian_prior(ch), gaussian_family(ch, dim), energy_cost,
                          ch.budget, level, radius)


def output_energy(ens: Ensemble) -> float:
    """Mean photon number of the ensemble's average output state."""
    return fock.mean_photon_number(average_state(ens))


def satisfies_output_constraint(ens: Ensemble, ch: GaussianChannel, tol: float = 1e-9) -> bool:
    return output_energy(ens) <= ch.noise + ch.budget + tol


@dataclass
class EquivalenceReport:
    capacity: float
    photon: float
    gaussian: dict[int, float] = field(default_factory=dict)

    @property
    def photon_deviation(self) -> float:
        return abs(self.photon - self.capacity)

    @property
    def gaussian_deviation(self) -> float:
        """Deviation at the finest grid level."""
        return abs(self.gaussian[max(self.gaussian)] - self.capacity) if self.gaussian else 0.0

    @property
    def max_deviation(self) -> float:
        return max(self.photon_deviation, self.gaussian_deviation)

    def rows(self):
        yield ("closed_form", "", self.capacity, 0.0)
        yield ("photon", "", self.photon, self.photon - self.capacity)
        for lvl, v in sorted(self.gaussian.items()):
            yield ("gaussian_grid", lvl, v, v - self.capacity)


def equivalence_check(ch: GaussianChannel, dim: int, levels=(1, 2, 3, 4),
                      radius: float | None = None) -> EquivalenceReport:
    """Holevo quantities of the photon and discretised Gaussian ensembles against C."""
    report = EquivalenceReport(gaussian_capacity(ch), holevo_quantity(photon_ensemble(ch, dim)))
    for lvl in levels:
        report.gaussian[lvl] = holevo_quantity(gaussian_ensemble(ch, dim, lvl, radius))
    return report


class CoherentFamily:
    pure = True

    def __init__(self, dim: int):
        self.dim = dim

    def vectors(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=complex)
        tail = fock.coherent_tail(points, self.dim)
        if tail.size and tail.max() > fock.TAIL_TOL:
            bad = points[tail.argmax()]
            raise TruncationError(f"coherent state |{bad}> does not fit in dim={self.dim}")
        v = fock.coherent_amplitudes(points, self.dim)
        return v / np.linalg.norm(v, axis=1, keepdims=True)

    def __call__(self, x) -> fock.StateVector:
        return fock.coherent_state(complex(x), self.dim)

    def entropies(self, points) -> np.ndarray:
        return np.zeros(np.size(points))


class DisplacedThermalFamily:
    pure = False

    def __init__(self, noise: float, dim: int):
        self.noise, self.dim = float(noise), dim

    def __call__(self, x) -> fock.DensityOperator:
        return fock.displaced_thermal(complex(x), self.noise, self.dim)

    def matrices(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=complex)
        radii, inv = np.unique(np.abs(points), return_inverse=True)
        base = np.array([fock._displaced_thermal_real(float(r), self.noise, self.dim).matrix
                         for r in radii])
        n = np.arange(self.dim)
        ph = np.exp(1j * np.angle(points)[:, None] * n[None, :])
        return base[inv] * ph[:, :, None] * ph.conj()[:, None, :]

    def entropies(self, points) -> np.ndarray:
        # rotations leave the spectrum unchanged
        radii, inv = np.unique(np.abs(np.asarray(points)), return_inverse=True)
        h = np.array([fock.von_neumann_entropy(
            fock._displaced_thermal_real(float(r), self.noise, self.dim)) for r in radii])
        return h[inv]


class PhotonFamily:
    pure = False

    def __init__(self, noise: float, dim: int):
        self.noise, self.dim = float(noise), dim

    def __call__(self, x) -> fock.DensityOperator:
        return photon_state(int(round(complex(x).real)), self.noise, self.dim)

    def matrices(self, points) -> np.ndarray:
        return np.array([self(p).matrix for p in np.asarray(points)])

    def entropies(self, points) -> np.ndarray:
        return np.array([fock.entropy_from_eigenvalues(np.diag(self(p).matrix).real)
                         for p in np.asarray(points)])


def family_from_name(name: str, dim: int):
    """``coherent``, ``displaced_thermal:N`` or ``photon:N``."""
    kind, _, arg = name.partition(":")
    if kind == "coherent" and not arg:
        return CoherentFamily(dim)
    if kind in ("displaced_thermal", "photon") and arg:
        N = float(arg)
        return DisplacedThermalFamily(N, dim) if kind == "displaced_thermal" else PhotonFamily(N, dim)
    raise DomainError(f"unknown state generator {name!r}")
