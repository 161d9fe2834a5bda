"""Discretisation of continuous-alphabet ensembles on the complex plane.

A prior on the plane is replaced by finitely many point masses.  The disc of
radius ``c`` is cut into annular sectors; each sector carries the prior mass
it covers and is represented by the point of its closure where the cost
``f`` is smallest.  So the discrete prior never spends more than the
continuous one, and stays feasible.  Mass outside the disc goes to one extra
cell represented on the boundary circle.

At level ``l`` every interior cell satisfies

* diameter at most ``2c/l``;
* ``f`` varies by at most ``budget / (2l)**2`` across it (sampled);
* if the state entropy is not constant, it varies by less than ``1/l``.

The second condition bounds the constraint slack lost by moving mass to the
minimiser.  Without it, cells ``c/l`` wide leave a slack of order ``c/l``,
and the Holevo quantity converges far too slowly to be useful.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import integrate

from .channel import Ensemble, average_state, holevo_quantity
from .errors import DegenerateLevelSet, DomainError
from .fock import von_neumann_entropy

TWO_PI = 2.0 * math.pi
MASS_TOL = 1e-9
QUAD_EPSREL = 1e-8
MAX_SPLIT_DEPTH = 6


class EnergyCost:
    """The cost f(alpha) = |alpha|^2, with its exact minimiser on polar cells."""

    def __call__(self, x):
        return np.abs(x) ** 2

    def cell_minimizer(self, r0, r1, t0, t1):
        # inner arc; smallest angle breaks the tie
        return np.asarray(r0) * np.exp(1j * np.asarray(t0))

    def level_radii(self, radius: float, f_tol: float, dr_max: float) -> np.ndarray:
        k = np.arange(int(math.floor(radius**2 / f_tol)) + 1)
        r = np.unique(np.append(np.sqrt(k * f_tol), radius))
        return _fill_gaps(r, dr_max)

    def __repr__(self):
        return "EnergyCost()"


energy_cost = EnergyCost()


def _fill_gaps(r: np.ndarray, dr_max: float) -> np.ndarray:
    out = [r[0]]
    for a, b in zip(r[:-1], r[1:]):
        pieces = max(1, int(math.ceil((b - a) / dr_max - 1e-12)))
        out.extend(a + (b - a) * np.arange(1, pieces + 1) / pieces)
    return np.array(out)


class Cell(NamedTuple):
    r0: float
    r1: float
    t0: float
    t1: float
    mass: float
    representative: complex
    f_value: float


@dataclass(frozen=True)
class CellPartition:
    """Cells as parallel arrays; the last cell is the exterior ``|x| >= radius``.

    A point-mass prior gives a single cell with ``r1 = 0``.
    """

    level: int
    radius: float
    diameter_bound: float
    r0: np.ndarray
    r1: np.ndarray
    t0: np.ndarray
    t1: np.ndarray
    mass: np.ndarray
    representative: np.ndarray
    f_value: np.ndarray
    raw_mass_total: float = 1.0
    degenerate_entropy: bool = False

    def __len__(self):
        return self.mass.size

    @property
    def cells(self) -> list[Cell]:
        return [Cell(*row) for row in zip(self.r0, self.r1, self.t0, self.t1, self.mass,
                                          self.representative, self.f_value)]

    def diameters(self) -> np.ndarray:
        return sector_diameter(self.r0, self.r1, self.t1 - self.t0)


def sector_diameter(r0, r1, dt):
    """Diameter of the annular sector r0 <= |x| <= r1, angle span dt."""
    r0, r1, dt = np.broadcast_arrays(*(np.asarray(a, float) for a in (r0, r1, dt)))
    chord = 2.0 * r1 * np.sin(np.minimum(dt, math.pi) / 2.0)
    cross = np.sqrt(np.maximum(r0**2 + r1**2 - 2.0 * r0 * r1 * np.cos(np.minimum(dt, math.pi)), 0))
    d = np.maximum.reduce([chord, cross, r1 - r0])
    return np.where(dt >= math.pi - 1e-15, 2.0 * r1, d)


def _sectors_for(r0: float, r1: float, eps: float) -> int:
    n = max(1, int(math.ceil(TWO_PI * r1 / eps)))
    while sector_diameter(r0, r1, TWO_PI / n) > eps * (1 + 1e-12):
        n += 1
    return n


def _cell_samples(r0, r1, t0, t1, k: int = 5):
    """k x k polar grid over each cell (includes corners and edge points)."""
    u = np.linspace(0.0, 1.0, k)
    r = r0[:, None, None] + (r1 - r0)[:, None, None] * u[None, :, None]
    t = t0[:, None, None] + (t1 - t0)[:, None, None] * u[None, None, :]
    r, t = np.broadcast_arrays(r, t)
    n = r0.size
    return r.reshape(n, -1), t.reshape(n, -1)


def _argmin_smallest_angle(fv: np.ndarray, t: np.ndarray, r: np.ndarray) -> np.ndarray:
    fmin = fv.min(axis=1, keepdims=True)
    ok = fv <= fmin + 1e-12 * (1.0 + np.abs(fmin))
    key = np.where(ok, t + 1e-9 * r, np.inf)
    return key.argmin(axis=1)


def _representatives(f, r0, r1, t0, t1) -> np.ndarray:
    if hasattr(f, "cell_minimizer"):
        return np.asarray(f.cell_minimizer(r0, r1, t0, t1), dtype=complex)
    r, t = _cell_samples(r0, r1, t0, t1, k=9)
    fv = np.asarray(f(r * np.exp(1j * t)), dtype=float)
    j = _argmin_smallest_angle(fv, t, r)
    idx = np.arange(r0.size)
    return r[idx, j] * np.exp(1j * t[idx, j])


def _circle_minimizer(f, radius: float) -> complex:
    if hasattr(f, "cell_minimizer"):
        return complex(f.cell_minimizer(np.array([radius]), np.array([radius]),
                                        np.array([0.0]), np.array([TWO_PI]))[0])
    t = np.linspace(0.0, TWO_PI, 721)[:-1]
    fv = np.asarray(f(radius * np.exp(1j * t)), dtype=float)
    j = _argmin_smallest_angle(fv[None, :], t[None, :], np.full((1, t.size), radius))[0]
    return complex(radius * np.exp(1j * t[j]))


def _radial_breaks(f, radius: float, f_tol: float, dr_max: float) -> np.ndarray:
    """Ring edges.  A radial cost can supply its own level radii; any other
    cost gets uniform rings and relies on per-cell splitting."""
    if math.isfinite(f_tol) and hasattr(f, "level_radii"):
        return f.level_radii(radius, f_tol, dr_max)
    return _fill_gaps(np.array([0.0, radius]), dr_max)


def _split_until(cells, oscillation: Callable, tol: float):
    """Quarter cells (radial x angular halves) while ``oscillation`` exceeds ``tol``."""
    r0, r1, t0, t1 = cells
    done = [[], [], [], []]
    for _ in range(MAX_SPLIT_DEPTH + 1):
        if r0.size == 0:
            break
        bad = oscillation(r0, r1, t0, t1) >= tol
        for acc, arr in zip(done, (r0, r1, t0, t1)):
            acc.append(arr[~bad])
        r0, r1, t0, t1 = (a[bad] for a in (r0, r1, t0, t1))
        rm, tm = 0.5 * (r0 + r1), 0.5 * (t0 + t1)
        r0, r1, t0, t1 = (np.concatenate(x) for x in (
            (r0, r0, rm, rm), (rm, rm, r1, r1), (t0, tm, t0, tm), (tm, t1, tm, t1)))
    else:
        for acc, arr in zip(done, (r0, r1, t0, t1)):
            acc.append(arr)
    return tuple(np.concatenate(a) for a in done)


def _state_entropy_fn(state_map) -> Callable:
    if hasattr(state_map, "entropies"):
        return lambda pts: np.asarray(state_map.entropies(np.asarray(pts)))
    return lambda pts: np.array([von_neumann_entropy(state_map(complex(p))) for p in np.ravel(pts)])


def _quad_cell_mass(pdf, r0, r1, t0, t1) -> float:
    val, _ = integrate.dblquad(
        lambda r, t: r * float(np.real(pdf(r * np.exp(1j * t)))),
        t0, t1, r0, r1, epsabs=0.0, epsrel=QUAD_EPSREL,
    )
    return val


def cell_masses(prior, r0, r1, t0, t1) -> np.ndarray:
    """Prior mass of each polar cell: closed form when the prior offers one, else 2-D quadrature."""
    if hasattr(prior, "cell_mass"):
        return np.asarray(prior.cell_mass(r0, r1, t0, t1), dtype=float)
    return np.array([_quad_cell_mass(prior.pdf, *c) for c in zip(r0, r1, t0, t1)])


def exterior_mass(prior, radius: float) -> float:
    if hasattr(prior, "cell_mass"):
        return float(prior.cell_mass(radius, np.inf, 0.0, TWO_PI))
    return _quad_cell_mass(prior.pdf, radius, np.inf, 0.0, TWO_PI)


def partition(prior, f, budget: float, level: int, radius: float, state_map=None) -> CellPartition:
    """Build the level-``level`` polar partition of the disc of ``radius``.

    ``state_map`` is only consulted for entropy slicing; pass ``None`` to skip it.
    """
    if level < 1:
        raise DomainError(f"level must be >= 1, got {level}")
    if not radius > 0:
        raise DomainError(f"radius must be > 0, got {radius}")
    eps = 2.0 * radius / level
    point = getattr(prior, "point_mass", None)
    if point is not None:
        one = lambda v: np.array([v], dtype=float)
        return CellPartition(level, radius, eps, one(abs(point)), one(abs(point)), one(0.0),
                             one(TWO_PI), one(1.0), np.array([point], dtype=complex),
                             np.asarray(f(np.array([point])), dtype=float).reshape(1))

    f_tol = budget / (2 * level) ** 2 if 0 < budget < math.inf else math.inf
    breaks = _radial_breaks(f, radius, f_tol, radius / level)
    cols = [[], [], [], []]
    for a, b in zip(breaks[:-1], breaks[1:]):
        n = _sectors_for(a, b, eps)
        edges = TWO_PI * np.arange(n + 1) / n
        for acc, arr in zip(cols, (np.full(n, a), np.full(n, b), edges[:-1], edges[1:])):
            acc.append(arr)
    cells = tuple(np.concatenate(c) for c in cols)

    if math.isfinite(f_tol) and not hasattr(f, "level_radii"):
        def f_osc(r0, r1, t0, t1):
            r, t = _cell_samples(r0, r1, t0, t1)
            v = np.asarray(f(r * np.exp(1j * t)), dtype=float)
            return v.max(axis=1) - v.min(axis=1)
        cells = _split_until(cells, f_osc, f_tol)

    degenerate = False
    if state_map is not None:
        h = _state_entropy_fn(state_map)
        probe = np.concatenate([[0.0], np.outer([radius / 4, radius / 2, radius],
                                                np.exp(1j * TWO_PI * np.arange(3) / 3)).ravel()])
        hp = h(probe)
        if np.ptp(hp) < 1e-6:
            degenerate = True
            warnings.warn("state entropy is constant over the plane; entropy slicing skipped, "
                          "geometric refinement only", DegenerateLevelSet, stacklevel=2)
        else:
            def h_osc(r0, r1, t0, t1):
                r, t = _cell_samples(r0, r1, t0, t1, k=3)
                v = h((r * np.exp(1j * t)).ravel()).reshape(r.shape)
                return v.max(axis=1) - v.min(axis=1)
            cells = _split_until(cells, h_osc, 1.0 / level)

    r0, r1, t0, t1 = cells
    mass = cell_masses(prior, r0, r1, t0, t1)
    outside = exterior_mass(prior, radius)
    total = mass.sum() + outside
    if abs(total - 1.0) > MASS_TOL:
        raise DomainError(f"prior mass over the plane is {total!r}, expected 1")
    reps = _representatives(f, r0, r1, t0, t1)
    ext_rep = _circle_minimizer(f, radius)

    r0 = np.append(r0, radius)
    r1 = np.append(r1, np.inf)
    t0 = np.append(t0, 0.0)
    t1 = np.append(t1, TWO_PI)
    reps = np.append(reps, ext_rep)
    mass = np.append(mass, outside) / total
    fv = np.asarray(f(reps), dtype=float)
    return CellPartition(level, radius, eps, r0, r1, t0, t1, mass, reps, fv, total, degenerate)


def ensemble_from_partition(part: CellPartition, state_map, budget: float) -> Ensemble:
    keep = part.mass > 0
    w = part.mass[keep] / part.mass[keep].sum()
    pts = part.representative[keep]
    fv = part.f_value[keep]
    if hasattr(state_map, "pure") and hasattr(state_map, "dim"):
        return Ensemble(w, state_map, fv, budget, pts)
    return Ensemble(w, [state_map(complex(p)) for p in pts], fv, budget, pts)


def discretize(prior, state_map, f=energy_cost, budget: float = math.inf, level: int = 8,
               radius: float = 4.0) -> Ensemble:
    """Finite ensemble approximating ``prior`` pushed through ``state_map``.

    ``state_map`` is a state family (see :mod:`cqcap.gaussian`) or any callable
    returning a state for a complex input.  The result is feasible whenever
    the continuous prior is: every cell's mass sits where ``f`` is smallest.
    """
    part = partition(prior, f, budget, level, radius, state_map)
    return ensemble_from_partition(part, state_map, budget)


@dataclass
class ConvergenceReport:
    levels: list[int]
    delta_h: list[float]
    target: float
    reference_state: np.ndarray = field(repr=False)
    finest_state: np.ndarray = field(repr=False)

    @property
    def deficits(self) -> list[float]:
        return [self.target - v for v in self.delta_h]

    @property
    def final_deficit(self) -> float:
        return self.deficits[-1]

    @property
    def matrix_error(self) -> float:
        """Largest entry of |finest average state - reference average state|."""
        return float(np.max(np.abs(self.finest_state - self.reference_state)))

    def rows(self):
        return list(zip(self.levels, self.delta_h, self.deficits))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            self.write_rows(fh)

    def write_rows(self, fh) -> None:
        w = csv.writer(fh)
        w.writerow(["level", "delta_h", "deficit"])
        for lvl, dh, d in self.rows():
            w.writerow([lvl, repr(dh), repr(d)])


def reference_ensemble(prior, state_map, f=energy_cost, budget: float = math.inf,
                       radius: float | None = None, panels: int = 8, nodes: int = 40,
                       angles: int | None = None) -> Ensemble:
    """Product-quadrature stand-in for the continuous prior.

    Composite Gauss-Legendre in the radius, equispaced angles (exact for the
    angular Fourier modes a ``dim``-level state can carry).  Nodes are the
    quadrature points themselves, not cost minimisers.
    """
    if getattr(prior, "point_mass", None) is not None:
        p = complex(prior.point_mass)
        return ensemble_from_partition(
            CellPartition(1, 0.0, 0.0, *(np.zeros(1),) * 4, np.ones(1), np.array([p]),
                          np.asarray(f(np.array([p])), float).reshape(1)), state_map, budget)
    if radius is None:
        radius = prior.tail_radius(1e-7) if hasattr(prior, "tail_radius") else 8.0
    dim = getattr(state_map, "dim", 32)
    n_t = angles or 2 * dim + 1
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(0.0, radius, panels + 1)
    r = np.concatenate([0.5 * (b - a) * x + 0.5 * (a + b) for a, b in zip(edges[:-1], edges[1:])])
    wr = np.concatenate([0.5 * (b - a) * w for a, b in zip(edges[:-1], edges[1:])])
    t = TWO_PI * np.arange(n_t) / n_t
    pts = (r[:, None] * np.exp(1j * t)[None, :]).ravel()
    wts = np.repeat(wr * r * (TWO_PI / n_t), n_t) * np.real(prior.pdf(pts))
    wts = wts / wts.sum()
    if hasattr(state_map, "pure") and hasattr(state_map, "dim"):
        return Ensemble(wts, state_map, f(pts), budget, pts)
    return Ensemble(wts, [state_map(complex(p)) for p in pts], f(pts), budget, pts)


def convergence_report(prior, state_map, f=energy_cost, budget: float = math.inf,
                       levels: Sequence[int] = (2, 4, 8, 16), radius: float = 4.0,
                       reference: Ensemble | None = None,
                       reference_radius: float | None = None) -> ConvergenceReport:
    """Holevo quantity of the discretised prior at each level against a fine reference."""
    if len(levels) == 0:
        raise DomainError("need at least one level")
    ref = reference or reference_ensemble(prior, state_map, f, budget, reference_radius)
    values, finest = [], None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateLevelSet)
        for lvl in levels:
            ens = discretize(prior, state_map, f, budget, lvl, radius)
            values.append(holevo_quantity(ens))
            finest = ens
    return ConvergenceReport(list(levels), values, holevo_quantity(ref),
                             average_state(ref).matrix, average_state(finest).matrix)
