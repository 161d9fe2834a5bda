"""Random coding with coherent-state words and square-root-measurement decoding.

Words are n-letter strings of coherent amplitudes drawn i.i.d. from the
Gaussian prior and kept only if their total energy falls in the shell
``[nE - delta, nE]``.  Product coherent words have closed-form overlaps, so
decoding needs only the N x N Gram matrix and no Fock truncation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SamplingTimeout
from .fock import PSD_TOL, check_hermitian
from .gaussian import GaussianPrior
from .reliability import expurgated_exponent, mu_gauss, mu_tilde_gauss, random_coding_exponent

MAX_WORDS = 4096
MAX_PROPOSALS = 10**7
MIN_ACCEPTANCE = 1e-6
BATCH = 1024


@dataclass(frozen=True)
class Codebook:
    """``words[k, t]`` is the amplitude of letter t in word k."""

    words: np.ndarray
    budget: float
    delta: float
    proposals: int
    accepted: int

    @property
    def n(self) -> int:
        return self.words.shape[1]

    @property
    def size(self) -> int:
        return self.words.shape[0]

    @property
    def nu_hat(self) -> float:
        return self.accepted / self.proposals

    def energies(self) -> np.ndarray:
        return np.sum(np.abs(self.words) ** 2, axis=1)


def _in_shell(energy: np.ndarray, E: float, n: int, delta: float) -> np.ndarray:
    return (energy >= n * E - delta) & (energy <= n * E)


def sample_codebook(E: float, n: int, n_words: int, delta: float,
                    rng: np.random.Generator) -> Codebook:
    """Rejection-sample ``n_words`` words from the shell-conditioned product prior."""
    if not delta > 0:
        raise DomainError(f"shell width delta must be > 0, got {delta}")
    if n_words < 1 or n < 1:
        raise DomainError("need n >= 1 letters and at least one word")
    prior = GaussianPrior(E)
    kept, n_kept, proposals, accepted = [], 0, 0, 0
    while n_kept < n_words:
        batch = prior.sample(rng, (BATCH, n))
        ok = _in_shell(np.sum(np.abs(batch) ** 2, axis=1), E, n, delta)
        proposals += BATCH
        accepted += int(ok.sum())
        kept.append(batch[ok])
        n_kept += int(ok.sum())
        if proposals >= MAX_PROPOSALS and accepted / proposals < MIN_ACCEPTANCE:
            raise SamplingTimeout(
                f"acceptance {accepted}/{proposals} below {MIN_ACCEPTANCE:g}; widen delta"
            )
    words = np.concatenate(kept)[:n_words]
    return Codebook(words, E, delta, proposals, accepted)


def estimate_acceptance(E: float, n: int, delta: float, rng: np.random.Generator,
                        proposals: int = 10**5) -> float:
    """Fraction of i.i.d. prior words whose energy lands in the shell."""
    prior = GaussianPrior(E)
    hits = 0
    for start in range(0, proposals, BATCH):
        m = min(BATCH, proposals - start)
        energy = np.sum(np.abs(prior.sample(rng, (m, n))) ** 2, axis=1)
        hits += int(_in_shell(energy, E, n, delta).sum())
    return hits / proposals


def gram_matrix(words) -> np.ndarray:
    """Overlaps <u_j|u_k> of product coherent words."""
    w = words.words if isinstance(words, Codebook) else np.asarray(words, dtype=complex)
    half = 0.5 * np.sum(np.abs(w) ** 2, axis=1)
    return np.exp(w.conj() @ w.T - half[:, None] - half[None, :])


def srm_error(G: np.ndarray) -> float:
    """Average error of the square-root measurement, 1 - mean_k ((G^1/2)_kk)^2."""
    G = np.asarray(G)
    check_hermitian(G)
    lam, u = np.linalg.eigh(G)
    if lam[0] < -PSD_TOL * max(1.0, lam[-1]):
        raise DomainError(f"Gram matrix has eigenvalue {lam[0]:.3g}")
    root_diag = np.einsum("ij,j,ij->i", u, np.sqrt(np.clip(lam, 0.0, None)), u.conj()).real
    return float(np.clip(1.0 - np.mean(root_diag**2), 0.0, 1.0))


@dataclass(frozen=True)
class MCReport:
    n: int
    N: int
    R: float
    trials: int
    mean_error: float
    stderr: float
    nu_hat: float
    bound40: float
    bound43: float
    seed: int


REPORT_COLUMNS = ("n", "N", "R", "mean_error", "stderr", "nu_hat", "bound40", "bound43", "seed")


def word_count(n: int, R: float) -> int:
    """ceil(e^{nR}), ignoring round-off just above an integer."""
    x = math.exp(n * R)
    k = round(x)
    return k if abs(x - k) <= 1e-9 * x else math.ceil(x)


def random_coding_bound(E: float, R: float, n: int, delta: float, nu: float) -> float:
    """2 (e^{p delta} / nu)^2 exp(-n [mu(s, p) - sR]) at the optimising (s, p)."""
    _, s, p = random_coding_exponent(E, R)
    log_b = math.log(2.0) + 2.0 * (p * delta - math.log(nu)) - n * (mu_gauss(E, s, p) - s * R)
    return math.exp(log_b)


def expurgated_bound(E: float, R: float, n: int, delta: float, nu: float) -> float:
    """exp(-n [mu~(s, p) - s (R + (2/n) ln(2 e^{p delta} / nu))]) at the optimising (s, p)."""
    _, _, s, p = expurgated_exponent(E, R)
    shift = (2.0 / n) * (math.log(2.0) + p * delta - math.log(nu))
    return math.exp(-n * (mu_tilde_gauss(E, s, p) - s * (R + shift)))


def run_experiment(E: float, R: float, n_list, trials: int = 200, delta: float = 1.0,
                   seed: int = 0) -> list[MCReport]:
    """Mean SRM error over fresh random codebooks, one report per word length.

    Trial ``t`` at length ``n`` draws from ``default_rng([seed, n, t])``, so
    reports do not depend on the order in which lengths are run.  A code with
    one word never errs; its bound fields are reported as 0.
    """
    if R < 0:
        raise DomainError(f"rate must be >= 0, got {R}")
    if trials < 1:
        raise DomainError("need at least one trial")
    reports = []
    for n in n_list:
        n = int(n)
        N = word_count(n, R)
        if N > MAX_WORDS:
            raise DomainError(f"ceil(e^(nR)) = {N} words exceeds the limit of {MAX_WORDS}")
        errors = np.zeros(trials)
        proposals = accepted = 0
        for t in range(trials):
            rng = np.random.default_rng([seed, n, t])
            cb = sample_codebook(E, n, N, delta, rng)
            proposals += cb.proposals
            accepted += cb.accepted
            errors[t] = srm_error(gram_matrix(cb)) if N > 1 else 0.0
        nu = accepted / proposals
        stderr = float(errors.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
        if N > 1:
            b40 = random_coding_bound(E, R, n, delta, nu)
            b43 = expurgated_bound(E, R, n, delta, nu)
        else:
            b40 = b43 = 0.0
        reports.append(MCReport(n, N, R, trials, float(errors.mean()), stderr, nu, b40, b43, seed))
    return reports


def write_reports_csv(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        write_report_rows(reports, fh)


def write_report_rows(reports, fh) -> None:
    w = csv.writer(fh)
    w.writerow(REPORT_COLUMNS)
    for rep in reports:
        w.writerow([repr(getattr(rep, name)) for name in REPORT_COLUMNS])


def strictly_decreasing(reports, z: float = 2.0) -> bool:
    """Each mean error exceeds the next by more than ``z`` combined standard errors."""
    for a, b in zip(reports, reports[1:]):
        if not a.mean_error - b.mean_error > z * math.hypot(a.stderr, b.stderr):
            return False
    return True
