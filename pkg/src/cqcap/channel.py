"""Finite ensembles of quantum states, the Holevo quantity and measured information.

An :class:`Ensemble` keeps its states in one of three forms:

* an ``(n, d)`` array of state vectors (pure ensembles),
* an ``(n, d, d)`` array of density matrices,
* a *state family* plus input points, evaluated lazily in chunks.

The lazy form lets discretised continuous ensembles with 10^5 cells be
handled without holding every density matrix in memory.  A state family is
any object with ``dim``, ``pure`` and either ``vectors(points)`` (pure) or
``matrices(points)`` (mixed); see :mod:`cqcap.gaussian` for the built-in ones.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import DimensionMismatch, DomainError
from .fock import (
    PSD_TOL,
    DensityOperator,
    StateVector,
    as_matrix,
    check_hermitian,
    entropy_from_eigenvalues,
    von_neumann_entropy,
)

WEIGHT_TOL = 1e-12
CHUNK_ENTRIES = 1 << 22  # complex entries per chunk (64 MB)


class Ensemble:
    """Weighted states with an additive input constraint ``sum_i w_i f_i <= budget``."""

    def __init__(self, weights, states, f_values=None, budget=math.inf, points=None):
        w = np.asarray(weights, dtype=float).ravel()
        if w.size == 0:
            raise DomainError("ensemble is empty")
        if np.any(w < 0) or abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise DomainError(f"weights must be a probability vector (sum = {w.sum()!r})")
        n = w.size
        self.weights = w
        self.f_values = np.zeros(n) if f_values is None else np.asarray(f_values, float).ravel()
        self.budget = float(budget)
        self.points = (
            np.arange(n, dtype=complex) if points is None else np.asarray(points, complex).ravel()
        )
        if self.f_values.size != n or self.points.size != n:
            raise DimensionMismatch("weights, f_values and points must have equal length")

        self._vectors = self._matrices = self._family = None
        if hasattr(states, "pure") and hasattr(states, "dim"):
            self._family = states
            self.dim = states.dim
        elif isinstance(states, np.ndarray) and states.ndim in (2, 3):
            if states.ndim == 2:
                self._vectors = states.astype(complex, copy=False)
            else:
                self._matrices = states.astype(complex, copy=False)
            self.dim = states.shape[-1]
            if states.shape[0] != n:
                raise DimensionMismatch("number of states differs from number of weights")
        else:
            states = list(states)
            if len(states) != n:
                raise DimensionMismatch("number of states differs from number of weights")
            dims = {s.dim if hasattr(s, "dim") else np.asarray(s).shape[0] for s in states}
            if len(dims) != 1:
                raise DimensionMismatch(f"states have different dimensions {sorted(dims)}")
            self.dim = dims.pop()
            if all(isinstance(s, StateVector) for s in states):
                self._vectors = np.array([s.amplitudes for s in states])
            else:
                self._matrices = np.array([as_matrix(s) for s in states], dtype=complex)

    def __len__(self) -> int:
        return self.weights.size

    @property
    def is_pure(self) -> bool:
        if self._family is not None:
            return bool(self._family.pure)
        return self._vectors is not None

    def chunks(self, size: int | None = None) -> Iterator[tuple[slice, np.ndarray]]:
        """Yield ``(index_slice, block)``; blocks are vectors if pure, else matrices."""
        if size is None:
            size = max(1, CHUNK_ENTRIES // (self.dim if self.is_pure else self.dim**2))
        for start in range(0, len(self), size):
            sl = slice(start, min(start + size, len(self)))
            if self._vectors is not None:
                yield sl, self._vectors[sl]
            elif self._matrices is not None:
                yield sl, self._matrices[sl]
            elif self._family.pure:
                yield sl, self._family.vectors(self.points[sl])
            else:
                yield sl, self._family.matrices(self.points[sl])

    def vectors(self) -> np.ndarray:
        if not self.is_pure:
            raise DomainError("ensemble states are not pure")
        if self._vectors is not None:
            return self._vectors
        return np.concatenate([blk for _, blk in self.chunks()])

    @property
    def states(self) -> list:
        """Materialised list of :class:`StateVector` or :class:`DensityOperator`."""
        out = []
        for _, blk in self.chunks():
            if self.is_pure:
                out.extend(StateVector(v) for v in blk)
            else:
                out.extend(DensityOperator(m) for m in blk)
        return out

    def with_weights(self, weights) -> "Ensemble":
        """Same states, f-values and budget under a new prior."""
        source = next(s for s in (self._family, self._vectors, self._matrices) if s is not None)
        return Ensemble(weights, source, self.f_values, self.budget, self.points)

    def state_entropies(self) -> np.ndarray:
        if self.is_pure:
            return np.zeros(len(self))
        if self._family is not None and hasattr(self._family, "entropies"):
            return np.asarray(self._family.entropies(self.points), dtype=float)
        out = np.empty(len(self))
        for sl, blk in self.chunks():
            lam = np.linalg.eigvalsh(blk)
            out[sl] = [entropy_from_eigenvalues(x) for x in lam]
        return out


def weighted_operator(ens: Ensemble, coeffs: np.ndarray) -> np.ndarray:
    """sum_i coeffs_i S_i as a dense matrix."""
    acc = np.zeros((ens.dim, ens.dim), dtype=complex)
    pure = ens.is_pure
    for sl, blk in ens.chunks():
        c = coeffs[sl]
        if pure:
            acc += (blk.T * c) @ blk.conj()
        else:
            acc += np.tensordot(c, blk, axes=1)
    return 0.5 * (acc + acc.conj().T)


def average_state(ens: Ensemble) -> DensityOperator:
    """The prior-weighted mixture of the ensemble's states."""
    m = weighted_operator(ens, ens.weights)
    return DensityOperator(m / np.trace(m).real)


def holevo_quantity(ens: Ensemble) -> float:
    """H(average state) - sum_i w_i H(S_i), in nats."""
    h_avg = von_neumann_entropy(average_state(ens))
    return h_avg - float(ens.weights @ ens.state_entropies())


def constraint_value(ens: Ensemble) -> float:
    return float(ens.weights @ ens.f_values)


def is_feasible(ens: Ensemble, tol: float = 1e-12) -> bool:
    return constraint_value(ens) <= ens.budget + tol


@dataclass(frozen=True)
class Povm:
    """Measurement outcomes ``elements`` plus the completing element ``I - sum``."""

    elements: tuple
    completion: np.ndarray

    @classmethod
    def from_elements(cls, elements: Sequence[np.ndarray]) -> "Povm":
        elements = tuple(np.asarray(x, dtype=complex) for x in elements)
        if not elements:
            raise DomainError("a POVM needs at least one element")
        d = elements[0].shape[0]
        if any(x.shape != (d, d) for x in elements):
            raise DimensionMismatch("POVM elements have different shapes")
        for x in elements:
            check_hermitian(x)
            if np.linalg.eigvalsh(x)[0] < -PSD_TOL:
                raise DomainError("POVM element is not positive semidefinite")
        rest = np.eye(d) - sum(elements)
        lam = np.linalg.eigvalsh(rest)
        if lam[0] < -PSD_TOL:
            raise DomainError(f"POVM elements sum to more than I (eigenvalue {lam[0]:.3g})")
        return cls(elements, rest)

    @classmethod
    def projective(cls, vectors: Sequence[np.ndarray]) -> "Povm":
        return cls.from_elements([np.outer(v, np.conj(v)) for v in vectors])

    @property
    def dim(self) -> int:
        return self.completion.shape[0]

    @property
    def outcomes(self) -> list[np.ndarray]:
        """Every outcome, the completing (evasion) element last."""
        return [*self.elements, self.completion]


def transition_matrix(ens: Ensemble, povm: Povm) -> np.ndarray:
    """P[i, j] = Tr S_i X_j over all outcomes, including the completing one."""
    if povm.dim != ens.dim:
        raise DimensionMismatch(f"POVM dim {povm.dim} != ensemble dim {ens.dim}")
    xs = np.array(povm.outcomes)
    p = np.empty((len(ens), xs.shape[0]))
    for sl, blk in ens.chunks():
        if ens.is_pure:
            p[sl] = np.einsum("im,jmn,in->ij", blk.conj(), xs, blk).real
        else:
            p[sl] = np.einsum("imn,jnm->ij", blk, xs).real
    return np.clip(p, 0.0, None)


def mutual_information(ens: Ensemble, povm: Povm) -> float:
    """Shannon information between the input and the measurement outcome, in nats."""
    p = transition_matrix(ens, povm)
    q = ens.weights @ p
    joint = ens.weights[:, None] * p
    mask = (joint > 0) & (q[None, :] > 0)
    ratio = np.where(mask, p / np.where(q > 0, q, 1.0)[None, :], 1.0)
    return float(np.sum(np.where(mask, joint * np.log(ratio), 0.0)))


def two_letter_ensemble(ens: Ensemble, joint: np.ndarray) -> Ensemble:
    """Product-state ensemble on words (i, k) with joint prior ``joint[i, k]``."""
    joint = np.asarray(joint, dtype=float)
    n = len(ens)
    if joint.shape != (n, n):
        raise DimensionMismatch(f"joint prior must be {n}x{n}")
    mats = [as_matrix(s) for s in ens.states]
    states = np.array([np.kron(a, b) for a in mats for b in mats])
    f = (ens.f_values[:, None] + ens.f_values[None, :]).ravel()
    return Ensemble(joint.ravel(), states, f, 2 * ens.budget)


def marginals(joint: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    joint = np.asarray(joint)
    return joint.sum(axis=1), joint.sum(axis=0)


CSV_COLUMNS = ("re(point)", "im(point)", "weight", "f_value")


def write_ensemble_csv(ens: Ensemble, path) -> None:
    with open(path, "w", newline="") as fh:
        write_ensemble_rows(ens, fh)


def write_ensemble_rows(ens: Ensemble, fh) -> None:
    w = csv.writer(fh)
    w.writerow(CSV_COLUMNS)
    for x, p, f in zip(ens.points, ens.weights, ens.f_values):
        w.writerow([repr(float(x.real)), repr(float(x.imag)), repr(float(p)), repr(float(f))])


def read_ensemble_csv(path, generator: str, dim: int, budget: float = math.inf) -> Ensemble:
    """Load an ensemble, rebuilding states with a named generator.

    ``generator`` is ``coherent``, ``displaced_thermal:N`` or ``photon:N``.
    Weights are renormalised to absorb decimal round-off in the file.
    """
    from .gaussian import family_from_name

    family = family_from_name(generator, dim)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or tuple(rows[0].keys()) != CSV_COLUMNS:
        raise DomainError(f"expected CSV columns {CSV_COLUMNS}")
    points = np.array([complex(float(r["re(point)"]), float(r["im(point)"])) for r in rows])
    w = np.array([float(r["weight"]) for r in rows])
    f = np.array([float(r["f_value"]) for r in rows])
    return Ensemble(w / w.sum(), family, f, budget, points)


def entropy_terms(ens: Ensemble) -> tuple[float, float]:
    """(H(average), average entropy): the two terms of the Holevo quantity."""
    return von_neumann_entropy(average_state(ens)), float(ens.weights @ ens.state_entropies())
