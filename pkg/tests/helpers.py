"""Random test objects and small oracles shared by the test modules."""

import math

import numpy as np


def random_density(rng, d, rank=None):
    """Random density matrix of the given rank (full rank by default)."""
    k = rank or d
    a = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    m = a @ a.conj().T
    return m / np.trace(m).real


def random_pure(rng, d):
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_probs(rng, n):
    w = rng.random(n) + 1e-3
    return w / w.sum()


def random_povm(rng, d, k):
    """k PSD elements summing to I (the completion is then zero)."""
    raw = [random_density(rng, d) for _ in range(k)]
    s = sum(raw)
    lam, u = np.linalg.eigh(s)
    inv_root = (u / np.sqrt(lam)) @ u.conj().T
    return [inv_root @ x @ inv_root for x in raw]


def entropy_oracle(rho):
    """-sum lam ln lam over strictly positive eigenvalues, no floor."""
    lam = np.linalg.eigvalsh(rho)
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log(lam)))


def thermal_entropy_oracle(N):
    return 0.0 if N == 0 else (N + 1) * math.log(N + 1) - N * math.log(N)


def poisson_weights(mean, size):
    n = np.arange(size)
    return np.array([math.exp(-mean) * mean**k / math.factorial(k) for k in n])
