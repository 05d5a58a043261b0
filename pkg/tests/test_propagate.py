import math

import numpy as np
import pytest

from localgen.errors import DomainError, StiffnessError, ValidationError
from localgen.generator import GeneratorFamily, LinearZ
from localgen.models import TwoRateModel
from localgen.propagate import (
    TimeGrid,
    certify_trajectory,
    composition_defect,
    exp_map,
    markovianity_probe,
    solve_ordered,
)
from localgen.scalar import ScalarFn
from localgen.superop import expm, identity_superop, max_abs, unvec, vec

from conftest import random_density, random_generator

ONE = ScalarFn.constant(1.0)
RAMP = ScalarFn.polynomial([0.0, 1.0])


@pytest.fixture(scope="module")
def ramp_model():
    return TwoRateModel(ONE, RAMP)


# -- grid -----------------------------------------------------------------------


def test_grid_linspace():
    g = TimeGrid.linspace(0, 2, 5)
    assert g.samples == (0.0, 0.5, 1.0, 1.5, 2.0)


@pytest.mark.parametrize(
    "t0, t_end, samples",
    [
        (0.0, 0.0, (0.0, 0.0)),
        (1.0, 0.5, (1.0, 0.5)),
        (0.0, 1.0, (0.0, 0.5)),
        (0.0, 1.0, (0.1, 1.0)),
        (0.0, 1.0, (0.0, 0.6, 0.4, 1.0)),
        (0.0, 1.0, (0.0, 0.5, 0.5, 1.0)),
        (0.0, float("inf"), (0.0, float("inf"))),
    ],
)
def test_grid_rejects(t0, t_end, samples):
    with pytest.raises(ValidationError):
        TimeGrid(t0, t_end, samples)


def test_grid_needs_two_samples():
    with pytest.raises(ValidationError):
        TimeGrid.linspace(0, 1, 1)


# -- ordered solver -------------------------------------------------------------


def test_zero_generator_gives_identity():
    gf = GeneratorFamily.constant(np.zeros((4, 4)))
    res = solve_ordered(gf, TimeGrid.linspace(0, 3, 4))
    for m in res.maps:
        assert max_abs(m - identity_superop(2)) == 0.0
    assert all(res.cpt_report)


def test_constant_generator_matches_expm(L0):
    grid = TimeGrid.linspace(0, 5, 11)
    res = solve_ordered(GeneratorFamily.constant(L0), grid)
    for t, m in zip(grid.samples, res.maps):
        assert max_abs(m - expm(t * L0)) <= 1e-9
    assert res.dim == 2
    assert res.integrator_stats.steps > 0
    assert res.integrator_stats.evaluations >= 6 * res.integrator_stats.steps


def test_constant_random_generator_matches_expm(rng):
    l = random_generator(rng, 3)
    grid = TimeGrid.linspace(0, 1, 5)
    res = solve_ordered(GeneratorFamily.constant(l), grid)
    for t, m in zip(grid.samples, res.maps):
        assert max_abs(m - expm(t * l)) <= 1e-9


def test_initial_map_is_identity(ramp_model):
    res = solve_ordered(ramp_model.generator_family(), TimeGrid.linspace(0, 1, 3))
    assert max_abs(res.maps[0] - identity_superop(2)) <= 1e-13


def test_ramp_model_matches_exponent(ramp_model):
    grid = TimeGrid.linspace(0, 3, 16)
    res = solve_ordered(ramp_model.generator_family(), grid)
    zf = ramp_model.z_family()
    for t, m in zip(grid.samples, res.maps):
        assert max_abs(m - exp_map(zf, t)) <= 1e-6


def test_trace_preserved_on_states(rng, ramp_model):
    grid = TimeGrid.linspace(0, 2, 5)
    res = solve_ordered(ramp_model.generator_family(), grid)
    rho = random_density(rng, 2)
    for m in res.maps:
        out = unvec(m @ vec(rho))
        assert abs(np.trace(out) - 1) <= 1e-9
        assert max_abs(out - out.conj().T) <= 1e-9


def test_tightening_tolerance_shrinks_error(ramp_model):
    grid = TimeGrid.linspace(0, 3, 7)
    zf = ramp_model.z_family()
    devs = []
    for rtol in (1e-6, 1e-8, 1e-10):
        res = solve_ordered(ramp_model.generator_family(), grid, rtol=rtol, atol=rtol * 1e-2)
        devs.append(max(max_abs(m - exp_map(zf, t)) for t, m in zip(grid.samples, res.maps)))
    assert devs[0] > devs[1] > devs[2]


def test_family_from_main_formula_reproduces_exponent(L0, L1, L2):
    zf = LinearZ((L0, L1, L2), (ScalarFn.polynomial([0.5, 0.2]), ONE, ScalarFn.exp_decay(1.0, 0.5)))
    grid = TimeGrid.linspace(0, 1.5, 4)
    res = solve_ordered(GeneratorFamily.from_z_family(zf), grid)
    for t, m in zip(grid.samples, res.maps):
        assert max_abs(m - exp_map(zf, t)) <= 1e-8


def test_nonzero_start_time(L0):
    gf = GeneratorFamily(2, lambda t, t0: (t - t0) * L0)
    grid = TimeGrid.linspace(2.0, 3.0, 3)
    res = solve_ordered(gf, grid)
    for t, m in zip(grid.samples, res.maps):
        assert max_abs(m - expm(0.5 * (t - 2.0) ** 2 * L0)) <= 1e-9


def test_bad_tolerances(L0):
    with pytest.raises(ValidationError):
        solve_ordered(GeneratorFamily.constant(L0), TimeGrid.linspace(0, 1, 2), rtol=0)


def test_finite_time_blow_up_raises_stiffness(L0):
    gf = GeneratorFamily(2, lambda t, t0: -L0 / (1 - t) ** 2)
    with pytest.raises(StiffnessError) as info:
        solve_ordered(gf, TimeGrid.linspace(0, 2, 3))
    assert 0.9 < info.value.t < 1.0


def test_generator_errors_propagate(L0):
    def ev(t, t0):
        if t > 0.5:
            raise DomainError("outside model range")
        return L0

    with pytest.raises(DomainError):
        solve_ordered(GeneratorFamily(2, ev), TimeGrid.linspace(0, 1, 2))


# -- closed-form maps -----------------------------------------------------------


def test_exp_map_dephasing_factor(L0):
    zf = LinearZ((L0,), (ONE,))
    m = exp_map(zf, 1.0)
    e12 = np.array([[0, 1], [0, 0]], dtype=complex)
    assert max_abs(unvec(m @ vec(e12)) - math.exp(-2) * e12) <= 1e-15
    e11 = np.diag([1.0, 0.0]).astype(complex)
    assert max_abs(unvec(m @ vec(e11)) - e11) <= 1e-15


def test_composition_markov_case(L0):
    zf = LinearZ((L0,), (ONE,))
    for t, s in [(2.0, 1.0), (3.0, 0.5), (1.0, 1.0)]:
        assert composition_defect(zf, t, s) <= 1e-11


def test_composition_ramp_case(L0):
    # Z(t, s) = (t - s)^2 / 2 L0, coherences scale by exp(-(t - s)^2)
    zf = LinearZ((L0,), (RAMP,))
    assert composition_defect(zf, 2.0, 1.0) == pytest.approx(math.exp(-2) - math.exp(-4), abs=1e-14)


def test_composition_endpoints(ramp_model):
    zf = ramp_model.z_family()
    assert composition_defect(zf, 2.0, 0.0) <= 1e-13
    assert composition_defect(zf, 2.0, 2.0) <= 1e-13


def test_composition_ordering(L0):
    zf = LinearZ((L0,), (ONE,))
    with pytest.raises(DomainError):
        composition_defect(zf, 1.0, 2.0)
    with pytest.raises(DomainError):
        composition_defect(zf.with_t0(1.0), 2.0, 0.5)


# -- Markovianity ---------------------------------------------------------------

PAIRS = [(1.0, 0.5), (2.0, 1.0), (3.0, 0.2)]


def test_probe_semigroup_is_markovian(L0):
    rep = markovianity_probe(LinearZ((L0,), (ONE,)), PAIRS)
    assert rep.classification == "markovian"
    assert rep.max_generator_shift <= 1e-9
    assert rep.max_composition_defect <= 1e-9


def test_probe_ramp_model_is_non_markovian(ramp_model):
    rep = markovianity_probe(ramp_model.z_family(), PAIRS)
    assert rep.classification == "non_markovian"
    assert rep.max_composition_defect > 1e-4
    assert rep.worst_composition_pair in PAIRS
    assert rep.threshold == 1e-8


def test_probe_inhomogeneous_commuting_family_is_markovian(L0):
    # a(t) L0 with t-dependent rate but integration anchored at t0: a genuine process
    zf = LinearZ((L0,), (RAMP,), homogeneous=False)
    rep = markovianity_probe(zf, PAIRS)
    assert rep.classification == "markovian"


# -- certification --------------------------------------------------------------


def test_certify_lindblad_trajectory(ramp_model):
    res = solve_ordered(ramp_model.generator_family(), TimeGrid.linspace(0, 3, 20))
    cert = certify_trajectory(res)
    assert cert.passed and cert.n_passed == 20 and cert.first_failure is None


def test_certify_flipped_sign_fails_with_witness(L0):
    grid = TimeGrid.linspace(0, 1, 5)
    res = solve_ordered(GeneratorFamily.constant(-L0), grid)
    cert = certify_trajectory(res)
    assert not cert.passed
    assert cert.n_failed == 4 and cert.n_passed == 1
    assert cert.first_failure == grid.samples[1]
    bad = cert.verdicts[1]
    assert bad.witness is not None and bad.witness.eigenvalue < -1e-10
