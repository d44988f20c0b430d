"""Fixed-step RK4 for the coupled network, compiled and pure-numpy variants.

Both integrate

    dx/dt = F(x) - (L kron I_n) x - (D kron I_n) x + (B kron I_n) v(t)

with node ``i`` occupying ``x[i*n:(i+1)*n]``. ``vs[k, s]`` holds the input
vector at stage ``s`` of step ``k`` (stage times t, t+dt/2, t+dt/2, t+dt).

Shared signature::

    rk4(x0, lap, damp, inp, vs, kinds, params, n, dt, steps, threshold,
        record_every, states, stages, sup, last) -> (done, offender, sup_step)

``states`` receives every ``record_every``-th grid state, ``stages`` (when it
has ``steps`` rows) the four stage states of every step, ``sup`` the running
max of ``|x|`` per component, ``last`` the final computed state. ``done`` is
the number of completed steps and ``offender`` the first component that left
the threshold or became non-finite (-1 if none).
"""
import numpy as np

from ._accel import HAVE_NUMBA, USE_NUMBA, njit

STAGE_WEIGHTS = (0.0, 0.5, 0.5, 1.0)


def _rhs_py(x, lap, damp, inp, v, kinds, params, n, out):
    N = lap.shape[0]
    X = x.reshape(N, n)
    F = out.reshape(N, n)
    poly = kinds == 0
    if poly.any():
        xs = X[poly, 0]
        acc = np.zeros_like(xs)
        coeffs = params[poly]
        for k in range(params.shape[1] - 1, -1, -1):
            acc = acc * xs + coeffs[:, k]
        F[poly, 0] = acc
    lor = ~poly
    if lor.any():
        p = params[lor]
        x1, x2, x3 = X[lor, 0], X[lor, 1], X[lor, 2]
        F[lor, 0] = p[:, 0] * (x2 - x1)
        F[lor, 1] = p[:, 1] * x1 - x2 - x1 * x3
        F[lor, 2] = x1 * x2 - p[:, 2] * x3
    F -= lap @ X + damp[:, None] * X
    if inp.shape[1]:
        F += inp @ v.reshape(inp.shape[1], n)


def rk4_numpy(x0, lap, damp, inp, vs, kinds, params, n, dt, steps, threshold,
              record_every, states, stages, sup, last):
    # blow-ups are reported through the non-finite check, not as warnings
    with np.errstate(over="ignore", invalid="ignore"):
        return _rk4_numpy(x0, lap, damp, inp, vs, kinds, params, n, dt, steps, threshold,
                          record_every, states, stages, sup, last)


def _rk4_numpy(x0, lap, damp, inp, vs, kinds, params, n, dt, steps, threshold,
               record_every, states, stages, sup, last):
    x = x0.astype(np.float64).copy()
    k1, k2, k3, k4 = (np.empty_like(x) for _ in range(4))
    no_input = np.zeros(0)
    with_inputs = inp.shape[1] > 0
    keep_stages = stages.shape[0] > 0
    np.abs(x, out=sup)
    sup_step = np.zeros(x.size, dtype=np.int64)
    states[0] = x
    done, offender = 0, -1
    for k in range(steps):
        v = vs[k] if with_inputs else (no_input,) * 4
        if keep_stages:
            stages[k, 0] = x
        _rhs_py(x, lap, damp, inp, v[0], kinds, params, n, k1)
        xs = x + 0.5 * dt * k1
        if keep_stages:
            stages[k, 1] = xs
        _rhs_py(xs, lap, damp, inp, v[1], kinds, params, n, k2)
        xs = x + 0.5 * dt * k2
        if keep_stages:
            stages[k, 2] = xs
        _rhs_py(xs, lap, damp, inp, v[2], kinds, params, n, k3)
        xs = x + dt * k3
        if keep_stages:
            stages[k, 3] = xs
        _rhs_py(xs, lap, damp, inp, v[3], kinds, params, n, k4)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        done = k + 1
        ax = np.abs(x)
        grew = ax > sup
        sup[grew] = ax[grew]
        sup_step[grew] = done
        if done % record_every == 0:
            states[done // record_every] = x
        bad = ~np.isfinite(x) | (ax > threshold)
        if bad.any():
            offender = int(np.argmax(bad))
            break
    last[:] = x
    return done, offender, sup_step


@njit(cache=True)
def _rhs_nb(x, lap, damp, inp, v, kinds, params, n, out):
    N = lap.shape[0]
    P = params.shape[1]
    M = inp.shape[1]
    for i in range(N):
        b = i * n
        if kinds[i] == 0:
            xi = x[b]
            acc = 0.0
            for k in range(P - 1, -1, -1):
                acc = acc * xi + params[i, k]
            out[b] = acc
        else:
            x1 = x[b]
            x2 = x[b + 1]
            x3 = x[b + 2]
            out[b] = params[i, 0] * (x2 - x1)
            out[b + 1] = params[i, 1] * x1 - x2 - x1 * x3
            out[b + 2] = x1 * x2 - params[i, 2] * x3
    for i in range(N):
        for c in range(n):
            acc = 0.0
            for j in range(N):
                a = lap[i, j]
                if a != 0.0:
                    acc += a * x[j * n + c]
            acc += damp[i] * x[i * n + c]
            ext = 0.0
            for j in range(M):
                w = inp[i, j]
                if w != 0.0:
                    ext += w * v[j * n + c]
            out[i * n + c] = out[i * n + c] - acc + ext


@njit(cache=True)
def _rk4_nb(x0, lap, damp, inp, vs, kinds, params, n, dt, steps, threshold,
            record_every, states, stages, sup, last):
    size = x0.shape[0]
    x = x0.copy()
    xs = np.empty(size)
    k1 = np.empty(size)
    k2 = np.empty(size)
    k3 = np.empty(size)
    k4 = np.empty(size)
    sup_step = np.zeros(size, dtype=np.int64)
    v0 = np.zeros(0)
    has_inp = inp.shape[1] > 0
    keep_stages = stages.shape[0] > 0
    for c in range(size):
        sup[c] = abs(x[c])
        states[0, c] = x[c]
    done = 0
    offender = -1
    h = 0.5 * dt
    for k in range(steps):
        if keep_stages:
            stages[k, 0, :] = x
        _rhs_nb(x, lap, damp, inp, vs[k, 0] if has_inp else v0, kinds, params, n, k1)
        for c in range(size):
            xs[c] = x[c] + h * k1[c]
        if keep_stages:
            stages[k, 1, :] = xs
        _rhs_nb(xs, lap, damp, inp, vs[k, 1] if has_inp else v0, kinds, params, n, k2)
        for c in range(size):
            xs[c] = x[c] + h * k2[c]
        if keep_stages:
            stages[k, 2, :] = xs
        _rhs_nb(xs, lap, damp, inp, vs[k, 2] if has_inp else v0, kinds, params, n, k3)
        for c in range(size):
            xs[c] = x[c] + dt * k3[c]
        if keep_stages:
            stages[k, 3, :] = xs
        _rhs_nb(xs, lap, damp, inp, vs[k, 3] if has_inp else v0, kinds, params, n, k4)
        done = k + 1
        for c in range(size):
            x[c] = x[c] + (dt / 6.0) * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c])
            a = abs(x[c])
            if a > sup[c]:
                sup[c] = a
                sup_step[c] = done
            if offender < 0 and (not np.isfinite(x[c]) or a > threshold):
                offender = c
        if done % record_every == 0:
            states[done // record_every, :] = x
        if offender >= 0:
            break
    last[:] = x
    return done, offender, sup_step


rk4_numba = _rk4_nb if HAVE_NUMBA else None
rk4 = _rk4_nb if USE_NUMBA else rk4_numpy
BACKEND = "numba" if USE_NUMBA else "numpy"
