import numpy as np
import pytest
from scipy.integrate import solve_ivp

from semipassive.decomposition import block_triangularize
from semipassive.dynamics import builtin_model
from semipassive.errors import BadTimeStep, DimensionMismatch
from semipassive.generators import random_block_graph, random_rooted_at
from semipassive.graph import build_graph, laplacian
from semipassive.simulator import (
    ConstantSignal,
    ExogenousInput,
    NetworkSystem,
    SinusoidSignal,
    boundedness_verdict,
    concatenate_blocks,
    lyapunov_monitor,
    permute_state,
    permute_system,
    simulate,
    simulate_cascade,
    unpermute_state,
)
from semipassive.spectral import left_null_vector

CYCLE3 = build_graph(3, [(1, 0, 1), (2, 1, 1), (0, 2, 1)])
PATH3 = build_graph(3, [(1, 0, 1), (2, 1, 1)])


def cubic_exact(x0, t):
    # separable: x(t) = x0 e^t / sqrt(1 + x0^2 (e^{2t} - 1))
    return x0 * np.exp(t) / np.sqrt(1.0 + x0**2 * (np.exp(2 * t) - 1.0))


def reference(sys, x0, t_end):
    sol = solve_ivp(lambda t, x: sys.rhs(x, t), (0.0, t_end), np.asarray(x0, float),
                    method="DOP853", rtol=1e-12, atol=1e-12, dense_output=True)
    assert sol.success
    return sol


def test_single_cubic_node():
    sys = NetworkSystem.from_graph(build_graph(1, []), "cubic")
    traj = simulate(sys, [2.0], 10.0, 1e-3)
    assert traj.final_state[0] == pytest.approx(1.0, abs=1e-3)
    np.testing.assert_allclose(traj.states[:, 0], cubic_exact(2.0, traj.times), atol=1e-11)


def test_decoupled_linear_nodes():
    n = 4
    sys = NetworkSystem.from_graph(build_graph(n, [(1, 0, 0.0), (2, 3, 0.0)]), "linear_stable")
    traj = simulate(sys, np.ones(n), 5.0, 1e-3)
    np.testing.assert_allclose(traj.states, np.exp(-traj.times)[:, None] * np.ones(n), atol=1e-6)


def test_two_coupled_cubics():
    sys = NetworkSystem.from_graph(build_graph(2, [(0, 1, 1.0), (1, 0, 1.0)]), "cubic")
    traj = simulate(sys, [2.0, -2.0], 10.0, 1e-3)
    verdict = boundedness_verdict(traj)
    assert verdict.bounded and verdict.sup <= 2.0
    ref = reference(sys, [2.0, -2.0], 10.0)
    np.testing.assert_allclose(traj.states, ref.sol(traj.times).T, atol=1e-9)


def test_time_step_validation():
    sys = NetworkSystem.from_graph(CYCLE3, "cubic")
    for dt, t_end in [(0.0, 1.0), (-1e-3, 1.0), (float("nan"), 1.0), (0.1, 0.05)]:
        with pytest.raises(BadTimeStep):
            simulate(sys, np.zeros(3), t_end, dt)
    with pytest.raises(DimensionMismatch):
        simulate(sys, np.zeros(4), 1.0, 0.1)


def test_system_validation():
    lap = laplacian(CYCLE3)
    with pytest.raises(DimensionMismatch):
        NetworkSystem(lap, ("cubic", "cubic"))
    with pytest.raises(DimensionMismatch):
        NetworkSystem(lap, ("cubic", "lorenz", "cubic"))
    with pytest.raises(ValueError):
        NetworkSystem(lap, "cubic", (ExogenousInput(-np.ones((3, 1)), ConstantSignal(np.ones(1))),))
    with pytest.raises(DimensionMismatch):
        NetworkSystem(lap, "cubic", (ExogenousInput(np.ones((3, 2)), ConstantSignal(np.ones(1))),))


def test_escape_time_matches_exponential():
    sys = NetworkSystem.from_graph(build_graph(1, []), "unstable_linear")
    for x0 in (5.0, -0.3, 100.0):
        traj = simulate(sys, [x0], 40.0, 1e-3)
        verdict = boundedness_verdict(traj)
        assert not verdict.bounded
        expected = np.log(1e6 / abs(x0))
        assert traj.divergence_time == pytest.approx(expected, abs=2e-3)
        assert traj.offender == 0


def test_zero_state_is_equilibrium():
    g = random_block_graph(np.random.default_rng(1), [2, 2, 1])
    sys = NetworkSystem.from_graph(g, "cubic")
    verdict = boundedness_verdict(simulate(sys, np.zeros(5), 5.0, 1e-2))
    assert verdict.bounded and verdict.sup == 0.0


def test_remark_permuted_vector_field_is_nodewise(rng):
    g = random_block_graph(rng, [2, 3])
    models = [builtin_model(n) for n in ("cubic", "linear_stable", "cubic", "linear_stable", "cubic")]
    sys = NetworkSystem.from_graph(g, models)
    d = block_triangularize(g)
    psys = permute_system(sys, d.permutation)
    x = rng.uniform(-3, 3, 5)
    z = permute_state(x, d.permutation)
    np.testing.assert_allclose(psys.rhs(z), permute_state(sys.rhs(x), d.permutation), atol=1e-13)
    assert [m.name for m in psys.models] == [models[k].name for k in d.permutation]


def test_permutation_equivalence(rng):
    for _ in range(5):
        g = random_block_graph(rng, [2, 2, 3])
        sys = NetworkSystem.from_graph(g, "cubic")
        d = block_triangularize(g)
        x0 = rng.uniform(-5, 5, g.node_count)
        full = simulate(sys, x0, 10.0, 1e-3)
        perm = simulate(permute_system(sys, d.permutation), permute_state(x0, d.permutation), 10.0, 1e-3)
        np.testing.assert_allclose(unpermute_state(perm.states, d.permutation), full.states,
                                   atol=1e-12, rtol=0)


def test_cascade_on_path_equals_full():
    sys = NetworkSystem.from_graph(PATH3, "cubic")
    d = block_triangularize(PATH3)
    x0 = [2.0, -1.5, 0.3]
    full = simulate(permute_system(sys, d.permutation), permute_state(x0, d.permutation), 10.0, 1e-3)
    blocks = simulate_cascade(d, sys, x0, 10.0, 1e-3)
    assert len(blocks) == 3
    np.testing.assert_allclose(concatenate_blocks(blocks), full.states, atol=1e-12, rtol=0)


def test_cascade_single_block_is_plain_simulation():
    sys = NetworkSystem.from_graph(CYCLE3, "cubic")
    d = block_triangularize(CYCLE3)
    x0 = [1.0, -2.0, 0.5]
    (block,) = simulate_cascade(d, sys, x0, 5.0, 1e-3)
    np.testing.assert_array_equal(block.states, simulate(sys, x0, 5.0, 1e-3).states)


def test_cascade_blocks_bounded_and_match_reference(rng):
    g = random_block_graph(rng, [2, 3, 2])
    sys = NetworkSystem.from_graph(g, "cubic")
    d = block_triangularize(g)
    x0 = rng.uniform(-5, 5, 7)
    blocks = simulate_cascade(d, sys, x0, 10.0, 1e-3)
    assert all(boundedness_verdict(b).bounded for b in blocks)
    ref = reference(sys, x0, 10.0)
    expected = permute_state(ref.sol(blocks[0].times).T, d.permutation)
    np.testing.assert_allclose(concatenate_blocks(blocks), expected, atol=1e-6)


def test_cascade_rejects_foreign_decomposition():
    sys = NetworkSystem.from_graph(CYCLE3, "cubic")
    with pytest.raises(DimensionMismatch):
        simulate_cascade(block_triangularize(PATH3), sys, np.zeros(3), 1.0, 0.1)


def test_rk4_step_halving_ratio():
    sys = NetworkSystem.from_graph(CYCLE3, "cubic")
    x0 = [2.0, -1.0, 0.5]
    finals = [simulate(sys, x0, 2.0, dt).final_state for dt in (0.01, 0.005, 0.0025)]
    e1 = np.linalg.norm(finals[0] - finals[1])
    e2 = np.linalg.norm(finals[1] - finals[2])
    assert 12.0 <= e1 / e2 <= 20.0


def test_record_every_keeps_sup_on_full_grid():
    sys = NetworkSystem.from_graph(build_graph(1, []), "cubic")
    dense = simulate(sys, [0.01], 10.0, 1e-3)
    sparse = simulate(sys, [0.01], 10.0, 1e-3, record_every=7)
    np.testing.assert_array_equal(sparse.states, dense.states[::7])
    assert sparse.sup[0] == dense.sup[0]
    np.testing.assert_array_equal(sparse.times, dense.times[::7])


def test_constant_input_derives_damping():
    lap = laplacian(CYCLE3)
    b = np.array([[1.0, 0.0], [0.5, 0.5], [0.0, 0.0]])
    sys = NetworkSystem(lap, "linear_stable", (ExogenousInput(b, ConstantSignal(np.array([2.0, -1.0]))),))
    np.testing.assert_array_equal(sys.damping, [1.0, 1.0, 0.0])
    x = np.array([0.3, -0.2, 1.0])
    manual = -x - lap @ x - sys.damping * x + b @ [2.0, -1.0]
    np.testing.assert_allclose(sys.rhs(x, 0.0), manual)
    traj = simulate(sys, x, 40.0, 1e-2)
    # steady state solves (I + L + D) x = B v
    steady = np.linalg.solve(np.eye(3) + lap + np.diag(sys.damping), b @ [2.0, -1.0])
    np.testing.assert_allclose(traj.final_state, steady, atol=1e-9)


def test_sinusoid_input_against_reference():
    lap = laplacian(PATH3)
    b = np.array([[1.0], [0.0], [2.0]])
    sig = SinusoidSignal(np.array([3.0]), omega=2.0, phase=0.3)
    sys = NetworkSystem(lap, "cubic", (ExogenousInput(b, sig),))
    x0 = [0.5, 1.0, -1.0]
    traj = simulate(sys, x0, 5.0, 1e-3)
    ref = reference(sys, x0, 5.0)
    np.testing.assert_allclose(traj.states, ref.sol(traj.times).T, atol=1e-9)
    assert boundedness_verdict(traj).bounded


def test_lorenz_network_bounded(rng):
    g = random_block_graph(rng, [2, 2], max_weight=2)
    sys = NetworkSystem.from_graph(g, "lorenz")
    traj = simulate(sys, rng.uniform(-10, 10, 12), 20.0, 1e-3, record_every=50)
    verdict = boundedness_verdict(traj)
    assert verdict.bounded
    assert traj.node_sup.shape == (4,)


def test_negative_control_mixed_network_escapes(rng):
    for _ in range(10):
        n = int(rng.integers(3, 9))
        g = random_rooted_at(rng, n, 0)
        models = ["unstable_linear"] + [str(rng.choice(["cubic", "linear_stable"])) for _ in range(n - 1)]
        sys = NetworkSystem.from_graph(g, models)
        x0 = rng.uniform(-10, 10, n)
        x0[0] = 5.0
        traj = simulate(sys, x0, 100.0, 1e-3, record_every=100)
        assert not boundedness_verdict(traj).bounded


def test_monitor_single_cubic():
    sys = NetworkSystem.from_graph(build_graph(1, []), "cubic")
    traj = simulate(sys, [4.0], 3.0, 1e-3)
    report = lyapunov_monitor(traj, sys.models, np.ones(1))
    x = traj.states[:, 0]
    np.testing.assert_allclose(report.storage_rate, x**2 * (1 - x**2), rtol=1e-12)
    np.testing.assert_allclose(report.storage, 0.5 * x**2)
    assert report.passed and report.region_samples > 0
    assert report.empirical_radius <= 1.0 + 1e-12


def test_monitor_cycle_of_cubics(rng):
    sys = NetworkSystem.from_graph(CYCLE3, "cubic")
    mu = left_null_vector(sys.laplacian).mu
    in_region = 0
    for _ in range(100):
        traj = simulate(sys, rng.uniform(-5, 5, 3), 5.0, 1e-3)
        report = lyapunov_monitor(traj, sys.models, mu)
        assert report.passed
        in_region += report.region_samples
    assert in_region > 0


def test_monitor_decoupled_linear():
    sys = NetworkSystem.from_graph(build_graph(3, []), "linear_stable")
    traj = simulate(sys, [1.0, -2.0, 0.5], 3.0, 1e-2)
    report = lyapunov_monitor(traj, sys.models, np.full(3, 1 / 3))
    assert np.all(report.storage_rate < 0)
    origin = simulate(sys, np.zeros(3), 1.0, 0.1)
    assert np.all(lyapunov_monitor(origin, sys.models, np.full(3, 1 / 3)).storage_rate == 0)


def test_monitor_rejects_perturbed_and_mismatched():
    lap = laplacian(CYCLE3)
    sys = NetworkSystem(lap, "cubic", (ExogenousInput(np.ones((3, 1)), ConstantSignal(np.ones(1))),))
    traj = simulate(sys, np.ones(3), 1.0, 0.1)
    with pytest.raises(ValueError):
        lyapunov_monitor(traj, sys.models, np.full(3, 1 / 3))
    plain = simulate(NetworkSystem(lap, "cubic"), np.ones(3), 1.0, 0.1)
    with pytest.raises(DimensionMismatch):
        lyapunov_monitor(plain, plain.system.models, np.ones(2))
