"""Network simulation, cascade simulation and boundedness monitoring.

The networked system is

    dx/dt = F(x) - L x - D x + sum_j B_j v_j(t)

where ``D = diag(d_k)`` with ``d_k`` the k-th row sum of ``[B_1 ... B_p]``;
``D`` is derived from the input matrices, never supplied separately. Vector
nodes couple coordinate-wise (``L kron I_n``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .decomposition import BlockDecomposition, apply_permutation
from .dynamics import KIND_LORENZ, KIND_POLY, NodeModel, builtin_model
from .errors import BadTimeStep, DimensionMismatch
from .graph import DirectedGraph, laplacian

ESCAPE_THRESHOLD = 1e6
_STAGE_C = np.array(_kernels.STAGE_WEIGHTS)


@dataclass(frozen=True)
class ConstantSignal:
    value: np.ndarray

    @property
    def width(self) -> int:
        return np.size(self.value)

    def stage_values(self, t0, dt, steps) -> np.ndarray:
        return np.broadcast_to(np.ravel(self.value), (steps, 4, self.width)).copy()

    def at(self, times) -> np.ndarray:
        return np.broadcast_to(np.ravel(self.value), (len(times), self.width)).copy()


@dataclass(frozen=True)
class SinusoidSignal:
    """``offset + amplitude * sin(omega t + phase)``, componentwise."""

    amplitude: np.ndarray
    omega: float
    phase: float = 0.0
    offset: np.ndarray | float = 0.0

    @property
    def width(self) -> int:
        return np.size(self.amplitude)

    def at(self, times) -> np.ndarray:
        t = np.asarray(times, dtype=float)[..., None]
        return np.ravel(self.offset) + np.ravel(self.amplitude) * np.sin(self.omega * t + self.phase)

    def stage_values(self, t0, dt, steps) -> np.ndarray:
        grid = t0 + dt * np.arange(steps)
        return self.at(grid[:, None] + _STAGE_C * dt)


@dataclass(frozen=True)
class RecordedSignal:
    """Stage states of an upstream run, replayed on the same time grid."""

    stages: np.ndarray
    dt: float
    t0: float = 0.0

    @property
    def width(self) -> int:
        return self.stages.shape[2]

    def stage_values(self, t0, dt, steps) -> np.ndarray:
        if dt != self.dt or t0 != self.t0:
            raise DimensionMismatch("recorded signal must be replayed on its own time grid")
        if steps > self.stages.shape[0]:
            raise DimensionMismatch(
                f"recorded signal covers {self.stages.shape[0]} steps, {steps} requested"
            )
        return self.stages[:steps]

    def at(self, times) -> np.ndarray:
        raise NotImplementedError("recorded signals only exist at RK4 stage times")


@dataclass(frozen=True)
class ExogenousInput:
    matrix: np.ndarray
    signal: object


@dataclass(frozen=True)
class NetworkSystem:
    laplacian: np.ndarray
    models: tuple[NodeModel, ...]
    inputs: tuple[ExogenousInput, ...] = ()
    graph: DirectedGraph | None = None

    def __post_init__(self):
        lap = np.asarray(self.laplacian, dtype=float)
        object.__setattr__(self, "laplacian", lap)
        N = lap.shape[0]
        if lap.shape != (N, N):
            raise DimensionMismatch(f"Laplacian must be square, got {lap.shape}")
        models = self.models
        if isinstance(models, (NodeModel, str)):
            models = (models,) * N
        models = tuple(builtin_model(m) if isinstance(m, str) else m for m in models)
        if len(models) != N:
            raise DimensionMismatch(f"{len(models)} node models for {N} nodes")
        dims = {m.state_dim for m in models}
        if len(dims) != 1:
            raise DimensionMismatch(f"all nodes must share state_dim, got {sorted(dims)}")
        n = dims.pop()
        for m in models:
            if (m.kind == KIND_LORENZ) != (n == 3) or (m.kind == KIND_POLY and n != 1):
                raise DimensionMismatch(f"model {m.name} incompatible with state_dim {n}")
        object.__setattr__(self, "models", models)
        inputs = []
        for inp in self.inputs:
            b = np.asarray(inp.matrix, dtype=float)
            if b.ndim != 2 or b.shape[0] != N:
                raise DimensionMismatch(f"input matrix {b.shape} must have {N} rows")
            if np.any(b < 0):
                raise ValueError("input matrices must have non-negative entries")
            if inp.signal.width != b.shape[1] * n:
                raise DimensionMismatch(
                    f"signal width {inp.signal.width} != {b.shape[1]} x state_dim {n}"
                )
            inputs.append(ExogenousInput(b, inp.signal))
        object.__setattr__(self, "inputs", tuple(inputs))

    @classmethod
    def from_graph(cls, g: DirectedGraph, models, inputs=()) -> "NetworkSystem":
        return cls(laplacian(g), models, tuple(inputs), g)

    @property
    def node_count(self) -> int:
        return self.laplacian.shape[0]

    @property
    def state_dim(self) -> int:
        return self.models[0].state_dim

    @property
    def size(self) -> int:
        return self.node_count * self.state_dim

    @property
    def input_matrix(self) -> np.ndarray:
        if not self.inputs:
            return np.zeros((self.node_count, 0))
        return np.hstack([inp.matrix for inp in self.inputs])

    @property
    def damping(self) -> np.ndarray:
        """``d_k = sum_j sum_l [B_j]_{kl}``."""
        return self.input_matrix.sum(axis=1)

    def kernel_arrays(self):
        kinds = np.array([m.kind for m in self.models], dtype=np.int64)
        width = max(len(m.params) for m in self.models)
        params = np.vstack([m.kernel_params(width) for m in self.models])
        return kinds, params

    def stage_inputs(self, t0, dt, steps) -> np.ndarray:
        if not self.inputs:
            return np.zeros((0, 4, 0))
        parts = [inp.signal.stage_values(t0, dt, steps) for inp in self.inputs]
        return np.ascontiguousarray(np.concatenate(parts, axis=2), dtype=float)

    def rhs(self, x, t=None, v=None) -> np.ndarray:
        """Right-hand side at states ``x`` of shape (..., N*n).

        ``v`` gives the concatenated input values (..., width); when omitted,
        inputs are evaluated at ``t`` via their signals.
        """
        x = np.asarray(x, dtype=float)
        N, n = self.node_count, self.state_dim
        X = x.reshape(x.shape[:-1] + (N, n))
        F = np.empty_like(X)
        for i, m in enumerate(self.models):
            F[..., i, :] = m.f(X[..., i, :]) if n > 1 else m.f(X[..., i, 0])[..., None]
        F -= np.einsum("ij,...jc->...ic", self.laplacian, X)
        F -= self.damping[:, None] * X
        if self.inputs:
            if v is None:
                v = np.concatenate([inp.signal.at(np.atleast_1d(t)) for inp in self.inputs], axis=-1)
                v = v.reshape(x.shape[:-1] + (-1,))
            V = np.asarray(v).reshape(x.shape[:-1] + (-1, n))
            F += np.einsum("ij,...jc->...ic", self.input_matrix, V)
        return F.reshape(x.shape)


def permute_system(sys: NetworkSystem, perm: Sequence[int]) -> NetworkSystem:
    """The same network in coordinates ``z[k] = x[perm[k]]``.

    Each permuted node keeps its own vector field, so the nonlinearity stays
    decoupled after reordering.
    """
    perm = list(perm)
    return NetworkSystem(
        sys.laplacian[np.ix_(perm, perm)],
        tuple(sys.models[k] for k in perm),
        tuple(ExogenousInput(inp.matrix[perm], inp.signal) for inp in sys.inputs),
        sys.graph.relabel(np.argsort(perm).tolist()) if sys.graph is not None else None,
    )


def permute_state(x, perm, n: int = 1) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    X = x.reshape(x.shape[:-1] + (-1, n))
    return X[..., list(perm), :].reshape(x.shape)


def unpermute_state(z, perm, n: int = 1) -> np.ndarray:
    return permute_state(z, np.argsort(perm), n)


@dataclass
class Trajectory:
    t0: float
    dt: float
    steps: int
    record_every: int
    states: np.ndarray
    sup: np.ndarray
    sup_step: np.ndarray
    final_state: np.ndarray
    threshold: float
    diverged: bool = False
    divergence_time: float | None = None
    offender: int | None = None
    stages: np.ndarray | None = None
    system: NetworkSystem | None = field(default=None, repr=False)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * self.record_every * np.arange(len(self.states))

    @property
    def t_final(self) -> float:
        return self.t0 + self.dt * self.steps

    @property
    def node_sup(self) -> np.ndarray:
        n = self.system.state_dim if self.system is not None else 1
        return self.sup.reshape(-1, n).max(axis=1)


def _check_grid(t_end, dt) -> int:
    if not (isinstance(dt, (int, float)) and math.isfinite(dt) and dt > 0):
        raise BadTimeStep(f"dt must be a positive finite number, got {dt!r}")
    if not (math.isfinite(t_end) and t_end >= dt):
        raise BadTimeStep(f"t_end must be finite and >= dt, got t_end={t_end!r}, dt={dt!r}")
    return int(round(t_end / dt))


def simulate(
    sys: NetworkSystem,
    x0,
    t_end: float,
    dt: float,
    *,
    threshold: float = ESCAPE_THRESHOLD,
    record_every: int = 1,
    keep_stages: bool = False,
    t0: float = 0.0,
    kernel=None,
) -> Trajectory:
    """Classical RK4 on a fixed grid of ``round(t_end / dt)`` steps.

    Stops early, with ``diverged`` set, the first time a component leaves
    ``[-threshold, threshold]`` or becomes non-finite.
    """
    steps = _check_grid(t_end, dt)
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.size != sys.size:
        raise DimensionMismatch(f"x0 has {x0.size} entries, system needs {sys.size}")
    if int(record_every) < 1:
        raise ValueError("record_every must be >= 1")
    record_every = int(record_every)
    kinds, params = sys.kernel_arrays()
    size = sys.size
    states = np.zeros((steps // record_every + 1, size))
    stages = np.zeros((steps if keep_stages else 0, 4, size))
    sup = np.zeros(size)
    last = np.zeros(size)
    run = kernel or _kernels.rk4
    done, offender, sup_step = run(
        x0, np.ascontiguousarray(sys.laplacian), np.ascontiguousarray(sys.damping),
        np.ascontiguousarray(sys.input_matrix), sys.stage_inputs(t0, dt, steps),
        kinds, params, sys.state_dim, float(dt), steps, float(threshold),
        record_every, states, stages, sup, last,
    )
    diverged = offender >= 0
    return Trajectory(
        t0=t0,
        dt=float(dt),
        steps=int(done),
        record_every=record_every,
        states=states[: done // record_every + 1],
        sup=sup,
        sup_step=np.asarray(sup_step),
        final_state=last,
        threshold=float(threshold),
        diverged=diverged,
        divergence_time=t0 + done * dt if diverged else None,
        offender=int(offender) if diverged else None,
        stages=stages[:done] if keep_stages else None,
        system=sys,
    )


def simulate_cascade(
    decomp: BlockDecomposition,
    sys: NetworkSystem,
    x0,
    t_end: float,
    dt: float,
    *,
    threshold: float = ESCAPE_THRESHOLD,
    record_every: int = 1,
    kernel=None,
) -> list[Trajectory]:
    """Integrate the blocks one after another in cascade order.

    ``x0`` is given in the original node order. Block ``i`` sees the
    upstream blocks only through their recorded RK4 stage states, fed in via
    ``A_ij``; its damping ``D_i`` then follows from the input matrices. Block
    states are in permuted order.
    """
    steps = _check_grid(t_end, dt)
    n = sys.state_dim
    permuted = apply_permutation(sys.laplacian, decomp)
    if np.max(np.abs(permuted - decomp.assemble()), initial=0.0) > 1e-12 * max(
        1.0, float(np.max(np.abs(permuted), initial=0.0))
    ):
        raise DimensionMismatch("decomposition does not belong to this system's Laplacian")
    z0 = permute_state(np.asarray(x0, dtype=float).ravel(), decomp.permutation, n)
    out: list[Trajectory] = []
    upstream: list[np.ndarray] = []
    available = steps
    for i in range(decomp.m):
        nodes = decomp.block_nodes(i)
        sl = decomp.block_slice(i)
        inputs = []
        if i > 0:
            coupling = np.hstack([decomp.coupling_blocks[i, j] for j in range(i)])
            recorded = np.concatenate([u[:available] for u in upstream], axis=2)
            inputs.append(ExogenousInput(coupling, RecordedSignal(recorded, dt)))
        for inp in sys.inputs:
            inputs.append(ExogenousInput(inp.matrix[list(nodes)], inp.signal))
        block = NetworkSystem(
            decomp.laplacian_parts[i], tuple(sys.models[k] for k in nodes), tuple(inputs)
        )
        traj = simulate(
            block, z0[sl.start * n: sl.stop * n], available * dt, dt,
            threshold=threshold, record_every=record_every,
            keep_stages=i < decomp.m - 1, kernel=kernel,
        ) if available > 0 else None
        if traj is None:
            break
        out.append(traj)
        upstream.append(traj.stages if traj.stages is not None else np.zeros((0, 4, 0)))
        # a diverged block leaves later blocks without input past its escape
        available = min(available, traj.steps)
    return out


def concatenate_blocks(trajs: Sequence[Trajectory]) -> np.ndarray:
    """Stack block states side by side over the common recorded horizon."""
    rows = min(len(t.states) for t in trajs)
    return np.hstack([t.states[:rows] for t in trajs])


@dataclass(frozen=True)
class BoundednessVerdict:
    bounded: bool
    sup: float
    time_of_sup: float
    threshold: float
    escape_time: float | None = None

    def to_dict(self) -> dict:
        return {
            "bounded": self.bounded,
            "sup": self.sup,
            "time_of_sup": self.time_of_sup,
            "threshold": self.threshold,
            "escape_time": self.escape_time,
        }


def boundedness_verdict(traj: Trajectory) -> BoundednessVerdict:
    """Bounded over the horizon iff no escape and ``sup |x| < threshold``.

    A finite-horizon stand-in for global boundedness.
    """
    k = int(np.argmax(traj.sup))
    sup = float(traj.sup[k])
    return BoundednessVerdict(
        bounded=(not traj.diverged) and math.isfinite(sup) and sup < traj.threshold,
        sup=sup,
        time_of_sup=traj.t0 + traj.dt * int(traj.sup_step[k]),
        threshold=traj.threshold,
        escape_time=traj.divergence_time,
    )


@dataclass(frozen=True)
class MonitorReport:
    times: np.ndarray
    storage: np.ndarray
    storage_rate: np.ndarray
    rho_bar: float
    tolerance: float
    violations: tuple[tuple[float, float], ...]
    region_samples: int
    max_rate_in_region: float | None
    empirical_radius: float

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self, include_series: bool = True) -> dict:
        out = {
            "passed": self.passed,
            "rho_bar": self.rho_bar,
            "tolerance": self.tolerance,
            "region_samples": self.region_samples,
            "max_rate_in_region": self.max_rate_in_region,
            "empirical_radius": self.empirical_radius,
            "violations": [list(v) for v in self.violations],
        }
        if include_series:
            out["series"] = {
                "t": self.times.tolist(),
                "V": self.storage.tolist(),
                "Vdot": self.storage_rate.tolist(),
            }
        return out


def lyapunov_monitor(traj: Trajectory, models, mu, *, tol: float = 1e-9) -> MonitorReport:
    """Track ``V_sum = sum_i mu_i V_i(x_i)`` and its exact time derivative.

    The derivative uses the chain rule with the network right-hand side, not
    finite differences. A violation is a sample with every ``|x_i - c_i| >=
    max_i rho_i`` and ``dV_sum/dt > tol``. ``empirical_radius`` is the
    smallest ``r`` such that every sample with all node radii ``>= r`` had a
    non-positive rate (up to ``tol``).
    """
    sys = traj.system
    if sys is None:
        raise ValueError("trajectory carries no system")
    if sys.inputs:
        raise ValueError("the monitor covers unperturbed networks (no exogenous inputs)")
    models = tuple(models) if not isinstance(models, NodeModel) else (models,) * sys.node_count
    mu = np.asarray(mu, dtype=float)
    N, n = sys.node_count, sys.state_dim
    if len(models) != N or mu.shape != (N,):
        raise DimensionMismatch(f"need {N} models and mu of length {N}")
    X = traj.states
    Xn = X.reshape(len(X), N, n)
    xdot = sys.rhs(X).reshape(len(X), N, n)

    V = np.zeros(len(X))
    Vdot = np.zeros(len(X))
    radii = np.zeros((len(X), N))
    for i, m in enumerate(models):
        xi = Xn[:, i, :] if n > 1 else Xn[:, i, 0]
        V += mu[i] * m.storage(xi)
        grad = m.storage_grad(xi)
        Vdot += mu[i] * (np.sum(grad * xdot[:, i, :], axis=-1) if n > 1 else grad * xdot[:, i, 0])
        radii[:, i] = m.radius(xi)
    rho_bar = max(m.rho for m in models)
    min_radius = radii.min(axis=1)
    region = min_radius >= rho_bar
    bad = region & (Vdot > tol)
    times = traj.times
    positive = Vdot > tol
    return MonitorReport(
        times=times,
        storage=V,
        storage_rate=Vdot,
        rho_bar=float(rho_bar),
        tolerance=tol,
        violations=tuple((float(times[k]), float(Vdot[k])) for k in np.flatnonzero(bad)),
        region_samples=int(region.sum()),
        max_rate_in_region=float(Vdot[region].max()) if region.any() else None,
        empirical_radius=float(np.nextafter(min_radius[positive].max(), np.inf)) if positive.any() else 0.0,
    )
