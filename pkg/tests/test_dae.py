import numpy as np
import pytest

from circ2crn.dae import (
    AffineOde,
    DaeSystem,
    InputModel,
    Trajectory,
    backward_euler_map,
    check_regularity,
    compose_direct,
    compose_input,
    consistent_project,
    default_h_probes,
    fourier_input,
    reference_solve,
)
from circ2crn.errors import NonFiniteState, SingularMatrix, UnknownColumn
from circ2crn.sim import integrate

from conftest import hand_rl_pencil, hand_rl_input_dc, sine_input_2state

PROBES = default_h_probes(0)


class TestRegularity:
    def test_rl_pencil_is_regular(self):
        # det(E - hA) = -h - h^2, nonzero for every probe
        assert check_regularity(hand_rl_pencil(), PROBES)

    def test_purely_algebraic_regular(self):
        sys = DaeSystem(np.zeros((2, 2)), np.eye(2), np.zeros((2, 0)), ("a", "b"), 0)
        assert check_regularity(sys, PROBES)

    def test_singular_pencil(self):
        sys = DaeSystem(
            np.zeros((2, 2)), np.ones((2, 2)), np.zeros((2, 0)), ("a", "b"), 0
        )
        assert not check_regularity(sys, PROBES)

    def test_probe_validation(self):
        sys = hand_rl_pencil()
        with pytest.raises(ValueError):
            check_regularity(sys, [])
        with pytest.raises(ValueError):
            check_regularity(sys, [1.5])

    def test_default_probes_deterministic(self, monkeypatch):
        assert default_h_probes(7) == default_h_probes(7)
        assert len(PROBES) == 8
        assert all(1e-4 < h < 0.5 for h in PROBES)
        monkeypatch.setenv("CIRC2CRN_SEED", "99")
        assert default_h_probes() == default_h_probes(99)


class TestConsistentProject:
    def test_consistent_point_untouched(self):
        sys = hand_rl_pencil()
        x0, flagged = consistent_project(sys, [0.0, -1.0], [0.0, 1.0], 1e-6)
        assert not flagged
        assert np.max(np.abs(x0 - [0.0, 1.0])) < 1e-5

    def test_inconsistent_point_projected_onto_constraint(self):
        sys = hand_rl_pencil()
        x0, flagged = consistent_project(sys, [0.0, -1.0], [0.0, 0.0], 1e-6)
        assert flagged
        # projected point satisfies 0 = i + vout - vin exactly
        assert abs(x0[0] + x0[1] - 1.0) < 1e-12

    def test_invertible_e_never_flagged(self):
        e = np.array([[2.0, 0.0], [0.0, 1.0]])
        a = np.array([[-1.0, 0.5], [0.0, -2.0]])
        sys = DaeSystem(e, a, np.zeros((2, 0)), ("a", "b"), 0)
        b = np.array([1.0, -1.0])
        for x in ([0.0, 0.0], [3.0, -4.0], [100.0, 2.0]):
            x0, flagged = consistent_project(sys, b, x, 1e-5)
            assert not flagged
            expected = np.asarray(x) + 1e-5 * np.linalg.solve(
                e - 1e-5 * a, a @ np.asarray(x) + b
            )
            assert np.max(np.abs(x0 - expected)) < 1e-12

    def test_h_tiny_validation(self):
        with pytest.raises(ValueError):
            consistent_project(hand_rl_pencil(), [0.0, 0.0], [0.0, 0.0], 1e-3)


class TestBackwardEulerMap:
    def test_rl_map_matches_symbolic_form(self):
        # F_h(i, vout) = ((vin-i)/(1+h), (vin-i-(1+h) vout)/(h(1+h)))
        h, vin = 0.037, 1.0
        ode = backward_euler_map(hand_rl_pencil(), [0.0, -vin], h)
        for point in ([0.0, 0.0], [0.3, -0.2], [1.0, 1.0]):
            i, vout = point
            got = ode.Ahat @ point + ode.bhat
            want = [
                (vin - i) / (1 + h),
                (vin - i - (1 + h) * vout) / (h * (1 + h)),
            ]
            assert np.max(np.abs(got - np.array(want))) < 1e-9

    def test_evaluation_at_origin_h001(self):
        ode = backward_euler_map(hand_rl_pencil(), [0.0, -1.0], 0.01)
        got = ode.Ahat @ [0.0, 0.0] + ode.bhat
        assert got[0] == pytest.approx(0.99009900990099009, abs=1e-15)
        assert got[1] == pytest.approx(99.009900990099013, abs=1e-12)

    def test_trivial_zero_map(self):
        sys = DaeSystem(np.eye(2), np.zeros((2, 2)), np.zeros((2, 0)), ("a", "b"), 0)
        for h in (0.5, 0.01):
            ode = backward_euler_map(sys, [0.0, 0.0], h)
            assert np.all(ode.Ahat == 0.0) and np.all(ode.bhat == 0.0)

    def test_singular_shift_raises(self):
        sys = DaeSystem(
            np.zeros((2, 2)), np.ones((2, 2)), np.zeros((2, 0)), ("a", "b"), 0
        )
        with pytest.raises(SingularMatrix):
            backward_euler_map(sys, [0.0, 0.0], 0.1)


class TestComposeInput:
    def test_constant_input_reduces_to_euler_map(self):
        sys = hand_rl_pencil()
        inp = hand_rl_input_dc(1.0)
        ode, rails0 = compose_input(sys, inp, 0.01)
        assert ode.n == 2 + 2 * 1
        bem = backward_euler_map(sys, sys.B @ inp.u0, 0.01)
        assert np.max(np.abs(ode.Ahat[:2, :2] - bem.Ahat)) <= 1e-12
        # u<1> starts at zero and the u<0> coupling reproduces bhat
        assert rails0[1] == 0.0
        eff_b = ode.Ahat[:2, 2] * inp.u0[0]
        assert np.max(np.abs(eff_b - bem.bhat)) <= 1e-12

    def test_sine_rail_converges_to_sin(self):
        sys = hand_rl_pencil()
        inp = sine_input_2state()
        errors = {}
        for h in (1e-2, 1e-3):
            ode, rails0 = compose_input(sys, inp, h)
            x0 = np.concatenate([[0.0, 0.0], rails0])
            traj = integrate(ode.field(), x0, 10.0, 1e-3, names=ode.state_names)
            errors[h] = float(np.max(np.abs(traj.column("u") - np.sin(traj.times))))
        assert errors[1e-3] <= 0.02
        assert errors[1e-3] < errors[1e-2]

    def test_rl_sine_composition_is_six_states(self, rl_sine):
        # with the minimal 2-state rotation input: n + 2(m+k) = 2 + 4
        ode, rails0 = compose_input(hand_rl_pencil(), sine_input_2state(), 0.01)
        assert ode.n == 6
        assert rails0.shape == (4,)
        # the netlist FOURIER path uses the (u, z, zbar) oscillator: 2 + 2*3
        _, sys, inp = rl_sine
        ode2, _ = compose_input(sys, inp, 0.01)
        assert ode2.n == 8

    def test_initial_rail_values_match_mandate(self):
        sys = hand_rl_pencil()
        inp = sine_input_2state()
        h = 0.02
        _, rails0 = compose_input(sys, inp, h)
        inv = np.linalg.inv(np.eye(2) - h * inp.D)
        assert np.allclose(rails0[:2], inp.init, atol=1e-15)
        assert np.allclose(rails0[2:], inv @ inp.D @ inp.init, atol=1e-14)

    def test_compose_direct_exact_blocks(self, rc_lowpass):
        _, sys, inp = rc_lowpass
        ode, rails0 = compose_direct(sys, inp)
        assert ode.n == sys.n + inp.m + inp.k
        assert np.allclose(ode.Ahat[: sys.n, : sys.n], np.linalg.inv(sys.E) @ sys.A)
        assert np.array_equal(rails0, inp.init)


class TestFourierInput:
    def test_pure_sine_embedding(self):
        inp = fourier_input(0.0, [(1.0, 1.0, 0.0)])
        assert inp.m == 1 and inp.k == 2
        assert inp.u0[0] == 0.0
        assert np.array_equal(inp.z0, [0.0, 1.0])
        traj = integrate(
            AffineOde(inp.D, inp.d, inp.names, 0).field(), inp.init, 10.0, 1e-3,
            names=inp.names,
        )
        assert np.max(np.abs(traj.column("u") - np.sin(traj.times))) < 1e-6

    def test_constant_input(self):
        inp = fourier_input(2.0, [])
        assert inp.m == 1 and inp.k == 0
        assert inp.u0[0] == 2.0
        assert np.all(inp.D == 0.0) and np.all(inp.d == 0.0)

    def test_phase_and_offset(self):
        inp = fourier_input(1.5, [(2.0, 3.0, 0.7)])
        assert inp.z0[0] == pytest.approx(np.sin(0.7))
        assert inp.z0[1] == pytest.approx(np.cos(0.7))
        assert inp.u0[0] == pytest.approx(1.5 + 2.0 * np.sin(0.7))

    def test_square_wave_sum_matches_trig_oracle(self):
        w0 = 1.0
        terms = [(4.0 / (j * np.pi), j * w0, 0.0) for j in (1, 3, 5, 7)]
        inp = fourier_input(0.0, terms)
        traj = integrate(
            AffineOde(inp.D, inp.d, inp.names, 0).field(), inp.init, 20.0, 1e-3,
            names=inp.names,
        )
        t = traj.times
        oracle = sum(beta * np.sin(om * t + ph) for beta, om, ph in terms)
        assert np.max(np.abs(traj.column("u") - oracle)) <= 1e-4

    def test_omega_validation(self):
        with pytest.raises(ValueError):
            fourier_input(0.0, [(1.0, -1.0, 0.0)])


class TestReferenceSolve:
    def test_rl_dc_matches_closed_form(self, rl_dc):
        # i(t) = 1 - e^-t for the projected initial state
        _, sys, inp = rl_dc
        with pytest.warns(RuntimeWarning):
            traj = reference_solve(sys, inp, np.zeros(2), 10.0, 1e-4)
        assert traj.column("i_l1")[-1] == pytest.approx(1 - np.exp(-10), abs=1e-3)
        assert abs(traj.column("v2")[-1]) < 1e-3

    def test_pure_algebraic_constant(self):
        sys = DaeSystem(np.zeros((2, 2)), -np.eye(2), np.eye(2), ("a", "b"), 0)
        inp = InputModel(
            np.zeros((2, 2)), np.zeros(2), np.array([1.0, 2.0]), np.zeros(0),
            ("u1", "u2"), (),
        )
        traj = reference_solve(sys, inp, np.array([1.0, 2.0]), 1.0, 1e-2)
        assert np.max(np.abs(traj.column("a") - 1.0)) < 1e-12
        assert np.max(np.abs(traj.column("b") - 2.0)) < 1e-12

    def test_algebraic_row_residual_stays_small(self, two_cap):
        _, sys, inp = two_cap
        traj = reference_solve(sys, inp, np.zeros(2), 10.0, 1e-3)
        # backward difference of the stored iterates satisfies both rows
        h = traj.times[1] - traj.times[0]
        v1, v2, u = traj.column("v1"), traj.column("v2"), traj.column("is")
        dv1, dv2 = np.diff(v1) / h, np.diff(v2) / h
        assert np.max(np.abs(2 * dv1 - dv2 - u[1:])) <= 1e-8
        assert np.max(np.abs(dv1 - dv2 - v2[1:])) <= 1e-8

    def test_rl_algebraic_row_consistency_preserved(self, rl_dc):
        # the Kirchhoff row 0 = i + vout - vin holds along the iterates
        _, sys, inp = rl_dc
        with pytest.warns(RuntimeWarning):
            traj = reference_solve(sys, inp, np.zeros(2), 10.0, 1e-3)
        resid = traj.column("i_l1") + traj.column("v2") - traj.column("vin")
        assert np.max(np.abs(resid[1:])) <= 1e-8

    def test_euler_map_trajectory_converges_first_order(self, rl_dc):
        # integrating the shifted ODE tracks the DAE with O(h) error
        _, sys, inp = rl_dc
        x0 = np.array([1.0, 0.0])
        ref = reference_solve(sys, inp, x0, 10.0, 1e-5, max_points=200_000)
        errs = []
        for h in (0.04, 0.02, 0.01):
            ode = backward_euler_map(sys, sys.B @ inp.u0, h)
            traj = integrate(ode.field(), x0, 10.0, h / 20, names=sys.state_names)
            errs.append(
                max(
                    float(np.max(np.abs(
                        traj.column(nm)
                        - np.interp(traj.times, ref.times, ref.column(nm))
                    )))
                    for nm in sys.state_names
                )
            )
        assert errs[0] > errs[1] > errs[2]
        assert errs[0] / errs[1] >= 1.5 and errs[1] / errs[2] >= 1.5

    def test_shifted_matrix_approaches_direct_form(self, two_cap):
        # invertible E: (E - hA)^-1 A -> E^-1 A as h shrinks
        from circ2crn.dae import coupled_euler_map, direct_map

        _, sys, _ = two_cap
        exact = direct_map(sys)[0]
        gaps = [
            float(np.max(np.abs(coupled_euler_map(sys, h)[0] - exact)))
            for h in (1e-2, 1e-3, 1e-4)
        ]
        assert gaps[0] > gaps[1] > gaps[2]

    def test_strided_output_matches_dense(self, rl_dc):
        _, sys, inp = rl_dc
        x0 = np.array([1.0, 0.0])
        dense = reference_solve(sys, inp, x0, 1.0, 1e-3)
        sparse = reference_solve(sys, inp, x0, 1.0, 1e-3, max_points=100)
        stride = (len(dense.times) - 1) // (len(sparse.times) - 1)
        assert np.allclose(dense.values[::stride], sparse.values, atol=1e-11)

    def test_blowup_raises_non_finite(self):
        sys = DaeSystem(
            np.eye(1), np.array([[1000.0]]), np.zeros((1, 0)), ("x",), 0
        )
        inp = InputModel(np.zeros((0, 0)), np.zeros(0), np.zeros(0), np.zeros(0), (), ())
        with pytest.raises(NonFiniteState):
            reference_solve(sys, inp, np.array([1.0]), 10.0, 1e-4)


class TestTrajectory:
    def test_csv_format(self):
        traj = Trajectory(np.array([0.0, 0.5]), ("a", "b"),
                          np.array([[1.0, 2.0], [3.0, 1.0 / 3.0]]))
        text = traj.to_csv()
        lines = text.splitlines()
        assert lines[0] == "t,a,b"
        assert lines[1] == "0,1,2"
        assert lines[2].startswith("0.5,3,0.333333333333333")

    def test_unknown_column(self):
        traj = Trajectory(np.array([0.0]), ("a",), np.array([[1.0]]))
        with pytest.raises(UnknownColumn):
            traj.column("missing")

    def test_monotone_times_enforced(self):
        with pytest.raises(ValueError):
            Trajectory(np.array([0.0, 0.0]), ("a",), np.zeros((2, 1)))
