"""Error exponents for pure-state channels with an additive input constraint.

Two families of functions live here:

* generic ``mu_generic`` / ``mu_tilde_generic``, evaluated on any finite
  :class:`~cqcap.channel.Ensemble`;
* closed forms for the pure-state Gaussian channel with the Gaussian prior of
  mean ``E`` quanta, and the random-coding and expurgated exponents built on
  them.

``s`` is the Gallager-style exponent parameter and ``p >= 0`` tilts the prior
by ``exp(p (f - E))`` to enforce the constraint.  Rates and exponents are in
nats.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect, minimize_scalar
from scipy.special import logsumexp

from .channel import Ensemble, weighted_operator
from .errors import DomainError, NoRoot
from .fock import trace_power

S_TOL = 1e-8
EXPURGATED_S_MAX = 50.0
CURVE_COLUMNS = ("R", "E_r", "E_ex", "regime", "s_opt", "p_opt")


# -- generic ensembles -------------------------------------------------------

def _tilt_logs(ens: Ensemble, p: float) -> np.ndarray:
    """log of pi_i exp(p (f_i - E)), with -inf for zero weights."""
    if p < 0:
        raise DomainError(f"tilt p must be >= 0, got {p}")
    shift = p * (ens.f_values - ens.budget) if p > 0 else np.zeros(len(ens))
    with np.errstate(divide="ignore"):
        return np.log(ens.weights) + shift


def mu_generic(ens: Ensemble, s: float, p: float) -> float:
    """-ln Tr T^(1+s) with T = sum_i pi_i exp(p (f_i - E)) S_i."""
    if s < 0:
        raise DomainError(f"s must be >= 0, got {s}")
    t = weighted_operator(ens, np.exp(_tilt_logs(ens, p)))
    return -math.log(trace_power(t, 1.0 + s))


def mu_tilde_generic(ens: Ensemble, s: float, p: float, chunk: int = 2048) -> float:
    """-s ln sum_{i,k} pi_i pi_k exp(p (f_i + f_k - 2E)) |<psi_i|psi_k>|^(2/s).

    The double sum is accumulated in log space, ``chunk`` rows at a time.
    """
    if s <= 0:
        raise DomainError(f"s must be > 0, got {s}")
    v = ens.vectors()
    lw = _tilt_logs(ens, p)
    total = -np.inf
    for start in range(0, len(ens), chunk):
        blk = slice(start, start + chunk)
        ov = np.abs(v[blk].conj() @ v.T) ** 2
        with np.errstate(divide="ignore"):
            terms = lw[blk, None] + lw[None, :] + np.log(ov) / s
        total = np.logaddexp(total, logsumexp(terms))
    return float(-s * total)


def best_over(candidates, fn, s: float, p: float) -> tuple[float, int]:
    """Largest ``fn(ens, s, p)`` over a candidate list, and its index."""
    values = [fn(ens, s, p) for ens in candidates]
    k = int(np.argmax(values))
    return values[k], k


# -- Gaussian closed forms ---------------------------------------------------

def _check_tilt(E: float, p: float) -> None:
    if E < 0:
        raise DomainError(f"E must be >= 0, got {E}")
    if p < 0 or (E > 0 and p >= 1.0 / E):
        raise DomainError(f"tilt p={p} outside [0, 1/E) for E={E}")


def g(E: float) -> float:
    """(1 + sqrt(4 E^2 + 1)) / 2; solves g^2 - g = E^2."""
    return 0.5 * (1.0 + math.sqrt(4.0 * E * E + 1.0))


def mu_gauss(E: float, s: float, p: float) -> float:
    """(1+s) p E + ln[(1 + E - pE)^(1+s) - E^(1+s)], for p < 1/E.

    Valid for any s > -1; the slightly negative side is used by central
    differences at s = 0.
    """
    _check_tilt(E, p)
    if s <= -1:
        raise DomainError(f"s must be > -1, got {s}")
    a = 1.0 + E - p * E
    return (1.0 + s) * p * E + math.log(a ** (1.0 + s) - E ** (1.0 + s))


def mu_tilde_gauss(E: float, s: float, p: float) -> float:
    """s {2pE + ln[1 + p^2 E^2 - 2pE + 2E(1 - pE)/s]}, for s > 0 and p < 1/E."""
    _check_tilt(E, p)
    if s <= 0:
        raise DomainError(f"s must be > 0, got {s}")
    arg = 1.0 + (p * E) ** 2 - 2.0 * p * E + 2.0 * E * (1.0 - p * E) / s
    if arg <= 0:
        raise DomainError(f"log argument {arg} <= 0 at E={E}, s={s}, p={p}")
    return s * (2.0 * p * E + math.log(arg))


def partial_s(E: float, s: float, p: float, h: float = 1e-5) -> float:
    """Central difference of ``mu_gauss`` in s at fixed p."""
    return (mu_gauss(E, s + h, p) - mu_gauss(E, s - h, p)) / (2.0 * h)


def _p_star_residual(p: float, E: float, s: float) -> float:
    return (1.0 + E - p * E) ** s * (1.0 - p) - E**s


def solve_p_star(E: float, s: float) -> float:
    """Tilt maximising ``mu_gauss(E, s, .)``: the root of (1+E-pE)^s (1-p) = E^s.

    Found by bisection on [0, min(1, 1/E) - 1e-12].  Also used for s > 1,
    where the same bracket holds.
    """
    if E <= 0:
        raise DomainError(f"E must be > 0, got {E}")
    if s < 0:
        raise DomainError(f"s must be >= 0, got {s}")
    if s == 0:
        return 0.0
    hi = min(1.0, 1.0 / E) - 1e-12
    lo_val, hi_val = _p_star_residual(0.0, E, s), _p_star_residual(hi, E, s)
    if lo_val * hi_val > 0:
        raise NoRoot(f"no sign change for E={E}, s={s} ({lo_val:.3g}, {hi_val:.3g})")
    return bisect(_p_star_residual, 0.0, hi, args=(E, s), xtol=1e-16, rtol=4 * np.finfo(float).eps,
                  maxiter=200)


def _check_positive(E: float) -> None:
    if not E > 0:
        raise DomainError(f"E must be > 0, got {E}")


def p_one(E: float) -> float:
    _check_positive(E)
    return 1.0 + 1.0 / E - g(E) / E


def mu_one(E: float) -> float:
    """``mu_gauss`` at s = 1 and its optimal tilt."""
    _check_positive(E)
    gE = g(E)
    return 2.0 * (E + 1.0 - gE) + math.log(gE)


def dmu_ds_one(E: float) -> float:
    """Slope in s of the p-optimised ``mu_gauss`` at s = 1."""
    _check_positive(E)
    gE = g(E)
    return E + 1.0 - gE + (gE**2 * math.log(gE) - E**2 * math.log(E)) / (gE**2 - E**2)


def capacity_pure(E: float) -> float:
    """(E+1) ln(E+1) - E ln E, the slope of ``mu_gauss`` at s = p = 0."""
    return (E + 1.0) * math.log1p(E) - (E * math.log(E) if E > 0 else 0.0)


def _maximise(fn, lo: float, hi: float) -> tuple[float, float]:
    """Bounded maximum of a 1-D function, endpoints included: (x, fn(x))."""
    res = minimize_scalar(lambda x: -fn(x), bounds=(lo, hi), method="bounded",
                          options={"xatol": S_TOL})
    best = max(((x, fn(x)) for x in (lo, float(res.x), hi)), key=lambda t: t[1])
    return best


def random_coding_exponent(E: float, R: float) -> tuple[float, float, float]:
    """max over s in [0, 1] of mu_gauss(E, s, p*(s)) - sR; returns (value, s, p)."""
    _check_positive(E)
    if not R > 0:
        raise DomainError(f"rate must be > 0, got {R}")
    s, val = _maximise(lambda s: mu_gauss(E, s, solve_p_star(E, s)) - s * R, 0.0, 1.0)
    if val <= 0:
        return 0.0, 0.0, 0.0
    return val, s, solve_p_star(E, s)


def expurgated_tilt(E: float, s: float) -> float:
    """Tilt maximising ``mu_tilde_gauss(E, s, .)``: 1/E + 1/s - g(E/s)/E."""
    return 1.0 / E + 1.0 / s - g(E / s) / E


def expurgated_exponent(E: float, R: float) -> tuple[float, str, float, float]:
    """Expurgated exponent (value, regime, s, p) over s >= 1.

    Below R = ln g(E) the unconstrained optimum s = E / sqrt(e^{2R} - e^R)
    is at least 1 and gives 2E(1 - sqrt(1 - e^{-R})).  Above it the optimum
    sits on s = 1 and the exponent is linear in R, clamped at zero.
    """
    _check_positive(E)
    if not R > 0:
        raise DomainError(f"rate must be > 0, got {R}")
    if R < math.log(g(E)):
        s = E / math.sqrt(math.exp(2.0 * R) - math.exp(R))
        # 1 - sqrt(1 - x) written to keep precision as x -> 0
        x = math.exp(-R)
        value = 2.0 * E * x / (1.0 + math.sqrt(1.0 - x))
        return value, "expurgated", s, expurgated_tilt(E, s)
    return max(mu_one(E) - R, 0.0), "linear", 1.0, p_one(E)


def expurgated_search(E: float, R: float, s_max: float = EXPURGATED_S_MAX) -> tuple[float, float, float]:
    """Direct numerical max of mu_tilde_gauss - sR over s in [1, s_max], p in [0, (1-1e-9)/E].

    Independent of the closed-form branches; returns (value, s, p).
    """
    p_hi = (1.0 - 1e-9) / E

    def inner(s):
        return _maximise(lambda p: mu_tilde_gauss(E, s, p), 0.0, p_hi)

    s, val = _maximise(lambda s: inner(s)[1] - s * R, 1.0, s_max)
    return val, s, inner(s)[0]


@dataclass
class ExponentCurve:
    """Random-coding and expurgated exponents on a rate grid."""

    budget: float
    R: np.ndarray
    E_r: np.ndarray
    E_ex: np.ndarray
    s_r: np.ndarray
    p_r: np.ndarray
    s_ex: np.ndarray
    p_ex: np.ndarray
    regime: list

    @property
    def value(self) -> np.ndarray:
        return np.maximum(self.E_r, self.E_ex)

    @property
    def boundaries(self) -> tuple[float, float]:
        """Rates where the expurgated band ends and the random-coding band starts."""
        return math.log(g(self.budget)), dmu_ds_one(self.budget)

    def rows(self):
        for i, R in enumerate(self.R):
            ex = self.E_ex[i] > self.E_r[i]
            s, p = (self.s_ex[i], self.p_ex[i]) if ex else (self.s_r[i], self.p_r[i])
            yield float(R), float(self.E_r[i]), float(self.E_ex[i]), self.regime[i], float(s), float(p)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            self.write_rows(fh)

    def write_rows(self, fh) -> None:
        w = csv.writer(fh)
        w.writerow(CURVE_COLUMNS)
        for R, er, ex, regime, s, p in self.rows():
            w.writerow([repr(R), repr(er), repr(ex), regime, repr(s), repr(p)])


def regime_of(E: float, R: float) -> str:
    lo, hi = math.log(g(E)), dmu_ds_one(E)
    if R < lo:
        return "expurgated"
    return "linear" if R <= hi else "random-coding"


def exponent_curve(E: float, rates) -> ExponentCurve:
    rates = np.asarray(rates, dtype=float).ravel()
    if rates.size == 0:
        raise DomainError("rate grid is empty")
    out = {k: np.empty(rates.size) for k in ("E_r", "E_ex", "s_r", "p_r", "s_ex", "p_ex")}
    regime = []
    for i, R in enumerate(rates):
        out["E_r"][i], out["s_r"][i], out["p_r"][i] = random_coding_exponent(E, R)
        out["E_ex"][i], _, out["s_ex"][i], out["p_ex"][i] = expurgated_exponent(E, R)
        regime.append(regime_of(E, R))
    return ExponentCurve(E, rates, regime=regime, **out)
