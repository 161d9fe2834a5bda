import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from cqcap.channel import constraint_value, holevo_quantity, is_feasible
from cqcap.discretizer import (
    MAX_SPLIT_DEPTH,
    convergence_report,
    discretize,
    energy_cost,
    partition,
    sector_diameter,
)
from cqcap.errors import DegenerateLevelSet, DomainError
from cqcap.fock import thermal_state
from cqcap.gaussian import (
    CoherentFamily,
    DisplacedThermalFamily,
    GaussianPrior,
    thermal_entropy,
)


class PdfOnly:
    """Hides the closed-form cell masses so quadrature is used."""

    def __init__(self, prior):
        self.pdf = prior.pdf
        self.point_mass = None


class ConstantFamily:
    pure = False

    def __init__(self, rho):
        self.rho, self.dim = rho, rho.dim

    def __call__(self, x):
        return self.rho

    def matrices(self, points):
        return np.broadcast_to(self.rho.matrix, (len(points), self.dim, self.dim))


class GrowingNoiseFamily:
    """x -> thermal state with 0.3 |x| noise quanta; entropy grows with |x|."""

    pure = False
    dim = 40

    def __call__(self, x):
        return thermal_state(0.3 * abs(x), self.dim)

    def matrices(self, points):
        return np.array([self(p).matrix for p in points])

    def entropies(self, points):
        return thermal_entropy(0.3 * np.abs(np.asarray(points)))


def sample_cell(c, k=41):
    r = np.linspace(c.r0, c.r1, k)[:, None]
    t = np.linspace(c.t0, c.t1, k)[None, :]
    return (r * np.exp(1j * t)).ravel()


def test_point_mass_prior_gives_single_cell():
    rho = thermal_state(0.5, 20)
    ens = discretize(GaussianPrior(0.0), DisplacedThermalFamily(0.5, 20), energy_cost, 0.0, 4, 2.0)
    assert len(ens) == 1 and ens.points[0] == 0
    assert np.allclose(ens.states[0].matrix, rho.matrix)


def test_gaussian_partition_representatives_and_mass():
    part = partition(GaussianPrior(1.0), energy_cost, 1.0, 8, 4.0)
    assert np.isclose(part.mass.sum(), 1.0, atol=1e-9)
    for c in part.cells[:-1][::37]:
        assert c.f_value <= np.min(energy_cost(sample_cell(c))) + 1e-12
    ext = part.cells[-1]
    assert ext.representative == 4.0 and ext.f_value == 16.0


def test_cell_masses_match_quadrature_oracle():
    prior = GaussianPrior(1.0)
    part = partition(prior, energy_cost, 1.0, 8, 4.0)
    for c in part.cells[:-1][::97]:
        oracle, _ = integrate.dblquad(lambda r, t: r * math.exp(-r * r) / math.pi,
                                      c.t0, c.t1, c.r0, c.r1, epsabs=0, epsrel=1e-10)
        assert np.isclose(c.mass, oracle, rtol=1e-8, atol=1e-15)
    ext_oracle = math.exp(-16.0)
    assert np.isclose(part.mass[-1], ext_oracle, rtol=1e-9)


def test_quadrature_masses_agree_with_closed_form():
    a = partition(GaussianPrior(1.0), energy_cost, 1.0, 2, 2.0)
    b = partition(PdfOnly(GaussianPrior(1.0)), energy_cost, 1.0, 2, 2.0)
    assert np.allclose(a.mass, b.mass, rtol=1e-7, atol=1e-12)
    assert np.isclose(b.raw_mass_total, 1.0, atol=1e-9)


def test_mass_accounting_is_exact():
    part = partition(GaussianPrior(0.6), energy_cost, 0.6, 5, 2.5)
    assert np.isclose(part.raw_mass_total, 1.0, atol=1e-12)
    assert np.isclose(part.mass.sum(), 1.0, atol=1e-12)


@given(st.integers(1, 12), st.floats(0.5, 5.0), st.floats(0.2, 3.0))
@settings(max_examples=40, deadline=None)
def test_feasibility_and_diameters(level, c, E):
    part = partition(GaussianPrior(E), energy_cost, E, level, c)
    assert part.mass @ part.f_value <= E + 1e-12
    assert np.all(part.diameters()[:-1] <= 2 * c / level * (1 + 1e-9))
    # every interior cell also keeps f within budget / (2 level)^2
    assert np.all(part.r1[:-1] ** 2 - part.r0[:-1] ** 2 <= E / (2 * level) ** 2 * (1 + 1e-9))


def test_feasibility_of_ensembles():
    for level, c in [(2, 1.0), (4, 3.0), (8, 4.0)]:
        ens = discretize(GaussianPrior(1.0), CoherentFamily(40), energy_cost, 1.0, level, c)
        assert constraint_value(ens) <= 1.0 + 1e-12
        assert is_feasible(ens)


def test_generic_cost_uses_sampled_minimiser():
    # f(x) = |x - 1|^2 has its minimiser at the point nearest to 1
    f = lambda x: np.abs(np.asarray(x) - 1.0) ** 2
    part = partition(GaussianPrior(1.0), f, 8.0, 2, 1.0)
    assert np.isclose(part.mass.sum(), 1.0)
    for c in part.cells[:-1]:
        x = sample_cell(c, 9)
        assert c.f_value <= np.min(f(x)) + 1e-12
        assert np.ptp(f(x)) <= 8.0 / 4**2 + 1e-12
    assert part.representative[-1] == 1.0


def test_sector_diameter():
    assert np.isclose(sector_diameter(0, 1, 2 * math.pi), 2.0)
    assert np.isclose(sector_diameter(1, 2, 0), 1.0)
    assert np.isclose(sector_diameter(0, 1, math.pi / 2), math.sqrt(2))


def test_degenerate_level_set_warns():
    with pytest.warns(DegenerateLevelSet):
        partition(GaussianPrior(1.0), energy_cost, 1.0, 2, 2.0, DisplacedThermalFamily(0.5, 60))


def test_entropy_slicing_bounds_oscillation():
    level = 4
    fam = GrowingNoiseFamily()
    with warnings.catch_warnings():
        warnings.simplefilter("error", DegenerateLevelSet)
        part = partition(GaussianPrior(1.0), energy_cost, 1.0, level, 2.0, fam)
    plain = partition(GaussianPrior(1.0), energy_cost, 1.0, level, 2.0)
    assert len(part) >= len(plain)
    for c in part.cells[:-1]:
        h = fam.entropies(sample_cell(c, 3))
        small = c.r1 - c.r0 <= (2.0 / level) / 2**MAX_SPLIT_DEPTH + 1e-12
        assert np.ptp(h) < 1.0 / level or small


def test_partition_argument_errors():
    with pytest.raises(DomainError):
        partition(GaussianPrior(1.0), energy_cost, 1.0, 0, 2.0)
    with pytest.raises(DomainError):
        partition(GaussianPrior(1.0), energy_cost, 1.0, 2, -1.0)


def test_single_state_channel_has_zero_holevo():
    fam = ConstantFamily(thermal_state(0.5, 20))
    rep = convergence_report(GaussianPrior(1.0), fam, energy_cost, 1.0, levels=(1, 2, 4), radius=2.0)
    assert all(abs(v) < 1e-10 for v in rep.delta_h)
    assert abs(rep.target) < 1e-10


def test_pure_channel_convergence():
    rep = convergence_report(GaussianPrior(1.0), CoherentFamily(40), energy_cost, 1.0,
                             levels=(2, 4, 8), radius=3.0)
    assert np.isclose(rep.target, 2 * math.log(2), atol=1e-5)
    assert all(b >= a - 1e-6 for a, b in zip(rep.delta_h, rep.delta_h[1:]))
    assert 0 < rep.final_deficit < 5e-2
    assert rep.rows()[0][0] == 2


def test_average_state_spot_check_at_fine_level():
    # reference: the average of coherent states under the Gaussian prior is thermal with mean E
    rep = convergence_report(GaussianPrior(1.0), CoherentFamily(40), energy_cost, 1.0,
                             levels=(32,), radius=3.0)
    assert np.allclose(rep.reference_state, np.diag(0.5 ** (np.arange(40) + 1)), atol=1e-6)
    assert rep.matrix_error < 1e-4


@pytest.mark.parametrize("E", [0.5, 1.0])
def test_holevo_monotone_under_refinement(E):
    fam = CoherentFamily(40)
    values = [holevo_quantity(discretize(GaussianPrior(E), fam, energy_cost, E, lvl, 3.0))
              for lvl in (1, 2, 4, 8)]
    assert all(b >= a - 1e-6 for a, b in zip(values, values[1:]))


def test_convergence_csv(tmp_path):
    rep = convergence_report(GaussianPrior(1.0), CoherentFamily(30), energy_cost, 1.0, levels=(1, 2),
                             radius=2.5, reference_radius=3.0)
    path = tmp_path / "conv.csv"
    rep.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "level,delta_h,deficit" and len(lines) == 3
    with pytest.raises(DomainError):
        convergence_report(GaussianPrior(1.0), CoherentFamily(30), levels=())
