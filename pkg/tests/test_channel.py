import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqcap.channel import (
    CSV_COLUMNS,
    Ensemble,
    Povm,
    average_state,
    constraint_value,
    entropy_terms,
    holevo_quantity,
    is_feasible,
    marginals,
    mutual_information,
    read_ensemble_csv,
    transition_matrix,
    two_letter_ensemble,
    write_ensemble_csv,
)
from cqcap.errors import DimensionMismatch, DomainError
from cqcap.fock import StateVector, coherent_state, thermal_state, von_neumann_entropy
from cqcap.gaussian import (
    CoherentFamily,
    GaussianChannel,
    GaussianPrior,
    gaussian_ensemble,
    photon_ensemble,
)
from helpers import (
    entropy_oracle,
    random_density,
    random_povm,
    random_probs,
    random_pure,
    thermal_entropy_oracle,
)

KET0, KET1 = StateVector(np.array([1, 0, 0], complex)), StateVector(np.array([0, 1, 0], complex))


def test_average_of_single_state():
    rho = thermal_state(0.3, 10)
    assert np.allclose(average_state(Ensemble([1.0], [rho])).matrix, rho.matrix)


def test_average_of_orthogonal_pair():
    avg = average_state(Ensemble([0.5, 0.5], [KET0, KET1])).matrix
    assert np.allclose(avg, np.diag([0.5, 0.5, 0]))


def test_gaussian_grid_average_approaches_max_entropy_spectrum():
    # eigenvalues of the average output should be geometric with mean N + E = 1.5
    ch = GaussianChannel(0.5, 1.0)
    target = (1 / 2.5) * (1.5 / 2.5) ** np.arange(60)
    errs = []
    for lvl in (1, 2, 3):
        lam = np.sort(np.linalg.eigvalsh(average_state(gaussian_ensemble(ch, 60, lvl)).matrix))[::-1]
        errs.append(np.max(np.abs(lam - target)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-2


def test_holevo_identical_states():
    rho = thermal_state(0.5, 20)
    assert abs(holevo_quantity(Ensemble([0.2, 0.3, 0.5], [rho, rho, rho]))) < 1e-10


def test_holevo_orthogonal_pure_states():
    assert np.isclose(holevo_quantity(Ensemble([0.5, 0.5], [KET0, KET1])), math.log(2), atol=1e-10)


def test_holevo_photon_ensemble_reaches_capacity():
    N, E = 0.5, 1.0
    oracle = thermal_entropy_oracle(N + E) - thermal_entropy_oracle(N)
    assert np.isclose(holevo_quantity(photon_ensemble(GaussianChannel(N, E), 80)), oracle, atol=1e-3)


@given(st.integers(0, 10**6), st.integers(2, 5), st.integers(2, 5))
@settings(max_examples=40)
def test_holevo_of_pure_ensemble_is_average_entropy(seed, n, d):
    rng = np.random.default_rng(seed)
    ens = Ensemble(random_probs(rng, n), np.array([random_pure(rng, d) for _ in range(n)]))
    h_avg = entropy_oracle(sum(w * np.outer(v, v.conj()) for w, v in zip(ens.weights, ens.vectors())))
    assert np.isclose(holevo_quantity(ens), h_avg, atol=1e-10)
    assert entropy_terms(ens)[1] == 0


def test_constraint_value_trivial():
    ens = Ensemble([0.5, 0.5], [KET0, KET1])
    assert constraint_value(ens) == 0
    assert is_feasible(Ensemble([0.5, 0.5], [KET0, KET1], budget=0.0))


def test_constraint_value_of_sampled_gaussian_prior():
    rng = np.random.default_rng(11)
    n, E = 10**5, 1.0
    x = GaussianPrior(E).sample(rng, n)
    ens = Ensemble(np.full(n, 1 / n), CoherentFamily(40), np.abs(x) ** 2, E, x)
    # exponential with mean E has standard deviation E
    assert abs(constraint_value(ens) - E) < 3 * E / math.sqrt(n)


def test_constraint_value_of_photon_prior():
    ens = photon_ensemble(GaussianChannel(0.5, 1.0), 80)
    assert np.isclose(constraint_value(ens), 1.0, atol=1e-9)


def test_ensemble_validation():
    with pytest.raises(DomainError):
        Ensemble([0.5, 0.6], [KET0, KET1])
    with pytest.raises(DomainError):
        Ensemble([], [])
    with pytest.raises(DimensionMismatch):
        Ensemble([0.5, 0.5], [KET0, thermal_state(0.01, 5)])
    with pytest.raises(DimensionMismatch):
        Ensemble([1.0], [KET0, KET1])


def test_povm_with_one_element_gives_no_information():
    ens = Ensemble([0.5, 0.5], [KET0, KET1])
    assert mutual_information(ens, Povm.from_elements([np.eye(3)])) == 0


def test_projective_measurement_on_orthogonal_states():
    ens = Ensemble([0.5, 0.5], [KET0, KET1])
    povm = Povm.projective([KET0.amplitudes, KET1.amplitudes])
    assert np.isclose(mutual_information(ens, povm), math.log(2), atol=1e-10)


def test_povm_completion_and_validation():
    povm = Povm.projective([KET0.amplitudes])
    assert np.allclose(sum(povm.outcomes), np.eye(3), atol=1e-9)
    assert np.allclose(povm.completion, np.diag([0, 1, 1]))
    with pytest.raises(DomainError):
        Povm.from_elements([np.eye(2), np.eye(2)])
    with pytest.raises(DomainError):
        Povm.from_elements([np.diag([1.0, -0.1])])
    with pytest.raises(DimensionMismatch):
        mutual_information(Ensemble([1.0], [KET0]), Povm.from_elements([np.eye(2)]))


def mi_oracle(weights, states, elements):
    """Direct evaluation of sum_ij pi_i P(j|i) ln(P(j|i) / q_j)."""
    total = 0.0
    p = [[np.trace(s @ x).real for x in elements] for s in states]
    q = [sum(weights[i] * p[i][j] for i in range(len(states))) for j in range(len(elements))]
    for i, w in enumerate(weights):
        for j in range(len(elements)):
            if p[i][j] > 1e-300 and q[j] > 0:
                total += w * p[i][j] * math.log(p[i][j] / q[j])
    return total


def test_random_qutrit_information_below_holevo():
    for seed in range(500):
        rng = np.random.default_rng(seed)
        states = [random_density(rng, 3, rank=1 + seed % 3) for _ in range(2)]
        w = random_probs(rng, 2)
        povm = Povm.from_elements(random_povm(rng, 3, 3))
        ens = Ensemble(w, states)
        i1 = mutual_information(ens, povm)
        assert np.isclose(i1, mi_oracle(w, states, povm.outcomes), atol=1e-12)
        assert -1e-12 <= i1 <= holevo_quantity(ens) + 1e-9


@given(st.integers(0, 10**6), st.integers(2, 6), st.integers(2, 5), st.integers(1, 6))
@settings(max_examples=80)
def test_entropy_bound_property(seed, d, n, k):
    rng = np.random.default_rng(seed)
    ens = Ensemble(random_probs(rng, n), [random_density(rng, d, rank=1 + seed % d) for _ in range(n)])
    povm = Povm.from_elements(random_povm(rng, d, k))
    assert mutual_information(ens, povm) <= holevo_quantity(ens) + 1e-9


def test_transition_matrix_rows_sum_to_one():
    rng = np.random.default_rng(3)
    ens = Ensemble(random_probs(rng, 4), [random_density(rng, 4) for _ in range(4)])
    povm = Povm.from_elements([0.5 * x for x in random_povm(rng, 4, 3)])
    assert np.allclose(transition_matrix(ens, povm).sum(axis=1), 1.0)


@given(st.integers(0, 10**6), st.integers(2, 4), st.integers(2, 5), st.floats(0, 1))
@settings(max_examples=60)
def test_holevo_concave_in_prior(seed, d, n, lam):
    rng = np.random.default_rng(seed)
    states = [random_density(rng, d, rank=1 + seed % d) for _ in range(n)]
    p, q = random_probs(rng, n), random_probs(rng, n)
    h = lambda w: holevo_quantity(Ensemble(w, states))
    assert h(lam * p + (1 - lam) * q) >= lam * h(p) + (1 - lam) * h(q) - 1e-9


@given(st.integers(0, 10**6), st.integers(2, 4), st.integers(2, 4))
@settings(max_examples=40, deadline=None)
def test_two_letter_subadditivity(seed, d, n):
    rng = np.random.default_rng(seed)
    ens = Ensemble(random_probs(rng, n), [random_density(rng, d, rank=1 + seed % d) for _ in range(n)])
    joint = rng.random((n, n))
    joint /= joint.sum()
    p1, p2 = marginals(joint)
    two = two_letter_ensemble(ens, joint)
    assert two.dim == d * d
    assert holevo_quantity(two) <= (holevo_quantity(ens.with_weights(p1))
                                    + holevo_quantity(ens.with_weights(p2)) + 1e-9)


def test_two_letter_product_prior_is_additive():
    rng = np.random.default_rng(5)
    ens = Ensemble(random_probs(rng, 3), [random_density(rng, 2) for _ in range(3)], f_values=[0, 1, 2],
                   budget=1.5)
    two = two_letter_ensemble(ens, np.outer(ens.weights, ens.weights))
    assert np.isclose(holevo_quantity(two), 2 * holevo_quantity(ens), atol=1e-10)
    assert np.isclose(constraint_value(two), 2 * constraint_value(ens))


def test_holevo_nonnegative_on_chunked_family():
    x = np.array([0.0, 0.5, 1j, -0.7])
    ens = Ensemble(np.full(4, 0.25), CoherentFamily(20), np.abs(x) ** 2, 1.0, x)
    small = [c for c in ens.chunks(size=1)]
    assert len(small) == 4
    direct = Ensemble(np.full(4, 0.25), [coherent_state(z, 20) for z in x])
    assert np.isclose(holevo_quantity(ens), holevo_quantity(direct))
    assert holevo_quantity(ens) >= 0


def test_csv_round_trip(tmp_path):
    x = np.array([0.0, 0.5 + 0.25j, -1j])
    ens = Ensemble([0.2, 0.3, 0.5], CoherentFamily(30), np.abs(x) ** 2, 1.0, x)
    path = tmp_path / "ens.csv"
    write_ensemble_csv(ens, path)
    assert path.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)
    back = read_ensemble_csv(path, "coherent", 30, budget=1.0)
    assert np.allclose(back.points, x) and np.allclose(back.weights, ens.weights)
    assert np.isclose(holevo_quantity(back), holevo_quantity(ens), atol=1e-14)
    mixed = read_ensemble_csv(path, "displaced_thermal:0.5", 40)
    assert np.isclose(von_neumann_entropy(mixed.states[0]), thermal_entropy_oracle(0.5), atol=1e-8)
    with pytest.raises(DomainError):
        read_ensemble_csv(path, "squeezed", 30)
