"""SystemModel contract: conjugate closure, Jacobian agreement, LTI wrapper."""

import numpy as np
import pytest

from conftest import conjugate_consistent_state
from ltpkit import (
    SystemModel,
    UsageError,
    build_case1,
    build_case2,
    check_conjugate_closure,
    eval_dynamics,
    eval_jacobians,
    fd_jacobian,
    linear_model,
)

OM1 = 2.0 * np.pi * 50.0


def all_variants():
    for case in (build_case1, build_case2):
        built = case({"u_gbeta_mag": 0.5, "u_gbeta_deg": -90.0, "k_sym_g": 1.6})
        yield built["closed_loop"]
        yield built["open_loop"]


class TestValidation:
    def test_conjugate_pairs_must_be_valid_indices(self):
        a = np.eye(2, dtype=complex)
        kwargs = dict(
            n_states=2, n_inputs=1, n_outputs=1, omega1=OM1,
            dynamics=lambda t, x, u: x, output=lambda t, x, u: x[..., :1],
            jac_state=lambda t, x, u: a, jac_input=lambda t, x, u: a[:, :1],
            out_jac_state=lambda t, x, u: a[:1], out_jac_input=lambda t, x, u: a[:1, :1],
            input_fn=lambda t: np.zeros(np.shape(t) + (1,)),
        )
        with pytest.raises(UsageError):
            SystemModel(conjugate_pairs=((0, 5),), **kwargs)

    def test_state_scales_must_be_positive(self):
        a = np.eye(2, dtype=complex)
        kwargs = dict(
            n_states=2, n_inputs=1, n_outputs=1, omega1=OM1,
            dynamics=lambda t, x, u: x, output=lambda t, x, u: x[..., :1],
            jac_state=lambda t, x, u: a, jac_input=lambda t, x, u: a[:, :1],
            out_jac_state=lambda t, x, u: a[:1], out_jac_input=lambda t, x, u: a[:1, :1],
            input_fn=lambda t: np.zeros(np.shape(t) + (1,)),
        )
        with pytest.raises(UsageError):
            SystemModel(state_scales=np.array([1.0, -1.0]), **kwargs)


class TestInputPeriodicity:
    @pytest.mark.parametrize("builder", [build_case1, build_case2])
    def test_input_repeats_each_period(self, builder, rng):
        model = builder({"u_gbeta_mag": 0.5, "u_gbeta_deg": -90.0})["closed_loop"]
        t = rng.uniform(0.0, 0.02, size=16)
        u0 = model.input_fn(t)
        u1 = model.input_fn(t + model.period)
        assert np.max(np.abs(u1 - u0)) < 1e-12


class TestConjugateClosure:
    @pytest.mark.parametrize("model", list(all_variants()), ids=lambda m: m.name)
    def test_dynamics_closed_under_conjugation(self, model, rng):
        x = conjugate_consistent_state(model, rng)
        u = model.input_fn(np.array([0.00137]))[0]
        defect = check_conjugate_closure(model, 0.00137, x, u)
        assert defect < 1e-10


class TestJacobians:
    @pytest.mark.parametrize("model", list(all_variants()), ids=lambda m: m.name)
    @pytest.mark.parametrize("which", ["state", "input", "out_state", "out_input"])
    def test_analytic_matches_finite_differences(self, model, which, rng):
        x = conjugate_consistent_state(model, rng)
        u = model.input_fn(np.array([0.0042]))[0]
        t = 0.0042
        jacs = eval_jacobians(model, t, x, u)
        key = {"state": 0, "input": 1, "out_state": 2, "out_input": 3}[which]
        analytic = jacs[key]
        numeric = fd_jacobian(model, t, x, u, which=which)
        scale = max(1.0, float(np.max(np.abs(analytic))))
        assert np.max(np.abs(analytic - numeric)) / scale < 1e-5

    def test_case1_pll_angle_row_is_linear_in_integrator(self, rng):
        model = build_case1()["closed_loop"]
        labels = list(model.state_labels)
        delta, xpll = labels.index("delta_pll"), labels.index("x_pll")
        x = conjugate_consistent_state(model, rng)
        u = model.input_fn(np.array([0.003]))[0]
        jac = eval_jacobians(model, 0.003, x, u)[0]
        assert jac[delta, xpll] == pytest.approx(1.0)

    def test_periodic_modulation_present(self, rng):
        # A(t) of the benchmark models carries e^{±jω₁t} terms: two sample
        # times a quarter period apart must differ.
        model = build_case1()["closed_loop"]
        x = conjugate_consistent_state(model, rng)
        u = model.input_fn(np.array([0.0]))[0]
        j0 = eval_jacobians(model, 0.0, x, u)[0]
        j1 = eval_jacobians(model, 0.005, x, u)[0]
        assert np.max(np.abs(j0 - j1)) > 1e-3


class TestLinearModel:
    def test_jacobians_time_independent_and_exact(self, rng):
        a = np.array([[-2.0, 1.0], [0.0, -3.0]], dtype=complex)
        model = linear_model(a, omega1=OM1)
        x = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        u = np.zeros(2, dtype=complex)
        j0 = eval_jacobians(model, 0.0, x, u)[0]
        j1 = eval_jacobians(model, 0.0123, x, u)[0]
        assert np.array_equal(j0, j1)
        assert np.allclose(j0, a)
        numeric = fd_jacobian(model, 0.0, x, u, which="state")
        assert np.max(np.abs(numeric - a)) < 1e-6

    def test_dynamics_is_linear_map(self, rng):
        a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        model = linear_model(a, omega1=OM1)
        x = rng.standard_normal(3) + 0j
        u = np.zeros(3, dtype=complex)
        assert np.allclose(eval_dynamics(model, 0.0, x, u), a @ x)

    def test_zero_state_zero_input_gives_zero_rate(self):
        model = linear_model(np.diag([-1.0, -2.0]).astype(complex), omega1=OM1)
        f = eval_dynamics(model, 0.0, np.zeros(2, complex), np.zeros(2, complex))
        assert np.max(np.abs(f)) == 0.0


class TestPeriodProperty:
    def test_period_matches_omega1(self):
        model = build_case1()["closed_loop"]
        assert model.period == pytest.approx(2.0 * np.pi / model.omega1)
        assert model.period == pytest.approx(0.02)
