import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from anneal_vqo.algorithms import (
    AqaConfig,
    EhqoConfig,
    InitStrategy,
    Problem,
    VariationalCost,
    adaptive_depths,
    aqa_scan,
    as_problem,
    exact_evolution_reference,
    layers_for,
    overlap_trace,
    qaoa_state,
    run_aqa,
    run_ehqo,
    run_qaoa,
)
from anneal_vqo.exceptions import CapacityError
from anneal_vqo.hamiltonian import IsingModel, diagonal_energies, two_sat_to_ising
from anneal_vqo.instances import generate_hard_instance
from anneal_vqo.schedule import VariationalParams, aqa_parameters
from anneal_vqo.spectra import lowest_eigenstates
from anneal_vqo.statevector import overlap, transverse_field_expectation, uniform_superposition
from conftest import acceptance_ensemble, dense_transverse


def fidelity(a, b):
    return abs(overlap(a, b)) ** 2


@pytest.fixture(scope="module")
def small():
    inst, _ = generate_hard_instance(5, seed=4)
    return inst


def test_single_layer_leaves_uniform_probabilities(small):
    for tau in (0.1, 0.7, 3.0):
        assert abs(run_aqa(small, AqaConfig(tau, 1)).success_probability - 2**-5) < 1e-15


def test_aqa_reports_realized_time_and_rounding():
    cfg = AqaConfig.from_total_time(25, 0.6)
    assert cfg.p == 42 and abs(cfg.t_a - 25.2) < 1e-12
    assert layers_for(25, 0.4) == 63 and layers_for(1.0, 0.4) == 3
    with pytest.raises(ValueError):
        AqaConfig(0.0, 3)
    with pytest.raises(ValueError):
        AqaConfig(0.5, 0)


def test_step_sizes_agree_at_fixed_total_time(hard8):
    inst, _ = hard8
    a = run_aqa(inst, AqaConfig(0.1, 250)).success_probability
    b = run_aqa(inst, AqaConfig(0.25, 100)).success_probability
    assert abs(a - b) < 0.05


def test_small_step_matches_reference(hard8):
    inst, _ = hard8
    state = run_aqa(inst, AqaConfig.from_total_time(25, 0.05)).state
    assert fidelity(state, exact_evolution_reference(inst, 25)) >= 0.999


def test_degenerate_ground_state_summed_and_flagged():
    res = run_aqa(IsingModel.zeros(3), AqaConfig(0.5, 10))
    assert res.degenerate and abs(res.success_probability - 1) < 1e-12
    energies = np.array([0.0, 0.0, 1.0, 2.0])
    res = run_aqa(energies, AqaConfig(0.5, 4))
    probs = res.state.probabilities()
    assert abs(res.success_probability - probs[:2].sum()) < 1e-15


def test_reference_zero_time_is_plus(small):
    ref = exact_evolution_reference(small, 0.0)
    np.testing.assert_array_equal(ref.amplitudes, uniform_superposition(5).amplitudes)


def test_reference_limits():
    with pytest.raises(CapacityError):
        exact_evolution_reference(IsingModel.zeros(13), 1.0)
    with pytest.raises(ValueError):
        exact_evolution_reference(IsingModel.zeros(2), 1.0, reference_tau=0.01)


@pytest.mark.parametrize("t_a", [0.7, 3.0, 10.0])
def test_reference_single_spin_against_ode(t_a):
    energies = np.array([-1.0, 1.0])
    HI, HP = dense_transverse(1), np.diag(energies)

    def rhs(t, y):
        s = t / t_a
        return -1j * (((1 - s) * HI + s * HP) @ y)

    sol = solve_ivp(rhs, (0, t_a), np.full(2, 2**-0.5, dtype=complex), rtol=1e-11, atol=1e-12)
    ref = exact_evolution_reference(energies, t_a)
    exact = sol.y[:, -1]
    assert abs(abs(np.vdot(exact, ref.amplitudes)) ** 2 - 1) < 1e-4
    np.testing.assert_allclose(ref.probabilities(), np.abs(exact) ** 2, atol=1e-4)


def test_reference_self_convergence(small):
    a = exact_evolution_reference(small, 25, 0.005)
    b = exact_evolution_reference(small, 25, 0.0025)
    assert abs(1 - fidelity(a, b)) < 1e-6


def test_first_order_trotter_convergence(small):
    # compare at the realized t_a = tau * p (25 / 0.4 rounds to 63 layers)
    errors = []
    for tau in (0.4, 0.2, 0.1, 0.05):
        cfg = AqaConfig.from_total_time(25, tau)
        state = run_aqa(small, cfg).state
        errors.append(np.sqrt(max(0.0, 1 - fidelity(state, exact_evolution_reference(small, cfg.t_a)))))
    ratios = np.array(errors[:-1]) / np.array(errors[1:])
    assert np.all((ratios >= 1.6) & (ratios <= 2.4)), ratios


def test_scan_single_cell_and_errors(small):
    res = aqa_scan(small, [0.5], [25])
    assert res.success.shape == (1, 1)
    assert res.success[0, 0] == run_aqa(small, AqaConfig(0.5, 25)).success_probability
    res = aqa_scan(small, [0.5, -1.0], [0, 10])
    assert np.isnan(res.success[0, 0]) and np.isnan(res.success[1, 1])
    assert np.isfinite(res.success[0, 1])
    assert set(res.errors) == {(0, 0), (1, 0), (1, 1)}
    with pytest.raises(ValueError):
        aqa_scan(small, [], [10])


def test_scan_regimes(hard8):
    inst, _ = hard8
    ps = [10, 25, 50, 100, 250]
    res = aqa_scan(inst, [0.1, 0.2, 0.3], ps)
    # small steps: success grows with the total time tau*p
    assert np.all(np.diff(res.success, axis=1) > 0)
    # large steps: at the top of the scanned p range, worse than tau = 0.5
    big = aqa_scan(inst, [0.5, 1.0, 1.2, 1.5], [1000]).success[:, 0]
    assert np.all(big[1:] < big[0])


def test_overlap_trace_small_step_follows_continuous_evolution(hard8):
    # the t_a = 25 evolution is not fully adiabatic on this instance, so the
    # claim checked is that small steps trace the continuous-time curve
    inst, _ = hard8
    fine = overlap_trace(inst, AqaConfig.from_total_time(25, 0.05), k=3)
    finer = overlap_trace(inst, AqaConfig.from_total_time(25, 0.025), k=3)
    assert len(fine.records) == 500
    assert np.abs(fine.column(0) - finer.column(0)[1::2]).max() < 0.01
    coarse = overlap_trace(inst, AqaConfig.from_total_time(25, 0.2), k=3)
    assert abs(fine.column(0).min() - coarse.column(0).min()) < 0.02
    sums = fine.level_sum()
    assert np.all(sums <= 1 + 1e-9) and sums.min() > 0.99
    assert all(0 <= w <= 1 + 1e-12 for r in fine.records for w in r.overlaps)


@pytest.mark.parametrize("tau", [0.2, 0.4, 0.6, 0.8])
def test_overlap_sum_stays_close_to_one_below_tau_09(hard8, tau):
    inst, _ = hard8
    sums = overlap_trace(inst, AqaConfig.from_total_time(25, tau), k=3).level_sum()
    assert sums.min() > 0.9 and sums.max() <= 1 + 1e-9


def test_overlap_trace_departs_near_minimum_gap(hard8):
    inst, meta = hard8
    trace = overlap_trace(inst, AqaConfig.from_total_time(25, 0.6), k=3)
    e0 = trace.column(0)
    s = np.array([r.s for r in trace.records])
    assert e0[s < meta["gap_s"] - 0.2].min() > 0.93
    steepest = s[np.argmin(np.diff(e0)) + 1]
    assert abs(steepest - meta["gap_s"]) <= 0.1
    assert trace.level_sum().min() > 0.9


def test_overlap_trace_energy_column(small):
    cfg = AqaConfig(0.5, 4)
    trace = overlap_trace(small, cfg)
    problem = as_problem(small)
    params = aqa_parameters(0.5, 4)
    for j, rec in enumerate(trace.records, start=1):
        state = problem.evolve(VariationalParams(params.beta[:j], params.gamma[:j]))
        expected = (1 - rec.s) * transverse_field_expectation(state) + rec.s * float(
            state.probabilities() @ problem.energies
        )
        assert abs(rec.energy - expected) < 1e-10


def test_qaoa_state_zero_params_is_plus(small):
    state = qaoa_state(small, VariationalParams.filled(3, 0.0))
    np.testing.assert_allclose(state.amplitudes, uniform_superposition(5).amplitudes, atol=1e-15)
    cost = VariationalCost(as_problem(small))
    assert abs(cost(np.zeros(6)) - diagonal_energies(two_sat_to_ising(small)).mean()) < 1e-12


def test_qaoa_state_reproduces_aqa_exactly(small):
    params = aqa_parameters(0.5, 25)
    a = run_aqa(small, AqaConfig(0.5, 25)).state
    b = qaoa_state(small, params)
    np.testing.assert_array_equal(a.amplitudes, b.amplitudes)
    assert abs(fidelity(a, b) - 1) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 2.0), st.integers(1, 60))
def test_aqa_qaoa_consistency_property(tau, p):
    problem = Problem(np.array([2.0, 0.0, 1.0, 1.0, 3.0, 1.0, 0.0, 2.0]))
    a = run_aqa(problem, AqaConfig(tau, p)).state.probabilities()
    b = qaoa_state(problem, aqa_parameters(tau, p)).probabilities()
    np.testing.assert_allclose(a, b, atol=1e-12, rtol=0)


def test_cost_matches_dense_expectations(small):
    problem = as_problem(small)
    rng = np.random.default_rng(0)
    x = rng.uniform(0, 1, 8)
    state = problem.evolve(VariationalParams.from_vector(x))
    psi = state.amplitudes
    hi = np.vdot(psi, dense_transverse(5) @ psi).real
    hp = float(np.sum(np.abs(psi) ** 2 * problem.energies))
    assert abs(VariationalCost(problem)(x) - hp) < 1e-12
    assert abs(VariationalCost.interpolated(problem, 0.3)(x) - (0.7 * hi + 0.3 * hp)) < 1e-12
    probes = VariationalCost.interpolated(problem, 0.3).central_probes(x, 1e-3)
    for k in range(8):
        e = np.zeros(8)
        e[k] = 1e-3
        assert probes[k, 0] == VariationalCost.interpolated(problem, 0.3)(x + e)
        assert probes[k, 1] == VariationalCost.interpolated(problem, 0.3)(x - e)


def test_qaoa_warm_start_improves_on_aqa(hard8):
    inst, _ = hard8
    init = aqa_parameters(0.5, 25)
    res = run_qaoa(inst, init, "bfgs", 8000)
    assert res.run.best_cost <= res.run.initial_cost
    assert res.initial_success_probability == run_aqa(inst, AqaConfig(0.5, 25)).success_probability
    assert res.success_probability > res.initial_success_probability + 0.2
    assert 0 <= res.success_probability <= 1


def test_qaoa_rejects_bad_init(small):
    with pytest.raises(TypeError):
        run_qaoa(small, np.zeros(4))


def test_init_strategies():
    rng = np.random.default_rng(0)
    assert InitStrategy("epsilon").params(3) == VariationalParams.filled(3, 1e-2)
    assert InitStrategy("zero").params(2) == VariationalParams.filled(2, 0.0)
    assert InitStrategy("aqa", tau=0.5).params(25) == aqa_parameters(0.5, 25)
    seeded = InitStrategy("aqa", tau=0.5, p_seed=25).params(5)
    assert seeded == aqa_parameters(0.5, 25).resample(5)
    r = InitStrategy("random").params(50, rng)
    assert np.all((r.beta >= 0) & (r.beta < np.pi)) and np.all((r.gamma >= 0) & (r.gamma < np.pi))
    assert InitStrategy("random", seed=3).params(4) == InitStrategy("random", seed=3).params(4)
    with pytest.raises(ValueError):
        InitStrategy("gaussian")


def test_ehqo_single_step_is_qaoa(small):
    init = InitStrategy("aqa", tau=0.5)
    cfg = EhqoConfig(n_steps=1, depths=6, init=init, final_budget=500)
    ehqo = run_ehqo(small, cfg)
    qaoa = run_qaoa(small, init.params(6), "bfgs", 500)
    assert ehqo.params == qaoa.params
    assert ehqo.success_probability == qaoa.success_probability
    assert ehqo.steps[0].s == 1.0


@pytest.mark.parametrize("depths", [4, [1, 3, 5, 7]])
def test_ehqo_hand_off_is_exact(small, depths):
    cfg = EhqoConfig(n_steps=4, depths=depths, intermediate_budget=300, final_budget=600)
    res = run_ehqo(small, cfg)
    problem = as_problem(small)
    assert [st.s for st in res.steps] == [0.25, 0.5, 0.75, 1.0]
    assert res.evaluations == sum(st.run.evaluations_used for st in res.steps) <= 3 * 300 + 600
    assert res.steps[-1].run.evaluations_used <= 600
    for prev, nxt in zip(res.steps, res.steps[1:]):
        theta = prev.run.best_params
        if theta.p != nxt.p:
            theta = theta.resample(nxt.p)
        assert VariationalCost.interpolated(problem, nxt.s)(theta.to_vector()) == nxt.initial_cost
        assert nxt.run.initial_params == theta
    for step in res.steps:
        assert step.final_cost <= step.initial_cost
        assert 0 <= step.initial_overlaps[0] + step.initial_overlaps[1] <= 1 + 1e-9


def test_ehqo_tracks_ground_energy(hard8):
    inst, _ = hard8
    model = two_sat_to_ising(inst)
    res = run_ehqo(inst, EhqoConfig(n_steps=10, depths=25, record_trace=False))
    for step in res.steps:
        e0 = lowest_eigenstates(model, step.s, 1).eigenvalues[0]
        assert step.final_cost - e0 < 0.01
    assert res.success_probability > 0.99


@pytest.mark.slow
def test_ehqo_post_anticrossing_overlaps():
    # smallest-gap instance of the 12-variable acceptance ensemble; first step past the gap
    ens = acceptance_ensemble(12)
    k = min(range(len(ens)), key=lambda i: ens.metadata[i]["min_gap"])
    res = run_ehqo(ens.instances[k], EhqoConfig(n_steps=10, depths=25, record_trace=False))
    step = next(x for x in res.steps if x.s > ens.metadata[k]["gap_s"])
    e0, e1 = step.initial_overlaps
    assert e0 < 0.1 and e1 > 0.5, (step.s, e0, e1)


def test_ehqo_config_validation():
    assert adaptive_depths(1, 19, 2) == [1, 3, 5, 7, 9, 11, 13, 15, 17, 19]
    assert adaptive_depths(1, 28, 3)[-1] == 28
    with pytest.raises(ValueError):
        adaptive_depths(1, 20, 2)
    with pytest.raises(ValueError):
        EhqoConfig(n_steps=3, depths=[1, 2])
    with pytest.raises(ValueError):
        EhqoConfig(optimizer="sgd")
    assert EhqoConfig(n_steps=3, depths=[1, 2, 3]).adaptive
    assert not EhqoConfig(n_steps=3).adaptive
