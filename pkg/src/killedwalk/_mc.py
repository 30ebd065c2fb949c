"""Compiled Monte Carlo kernels.

Every path owns a splitmix64 stream keyed by ``(seed, path index)``, so results
do not depend on evaluation order and are reproducible from the seed alone.
"""

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True)
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def _path_state(seed, i):
    return _mix(_mix(np.uint64(seed)) ^ (np.uint64(i) * _GOLDEN + _GOLDEN))


@njit(cache=True)
def _draw(state, cdf):
    state = state + _GOLDEN
    u = np.float64(_mix(state) >> _S11) * _INV53
    k = 0
    last = cdf.shape[0] - 1
    while k < last and u >= cdf[k]:
        k += 1
    return state, k


@njit(cache=True)
def exit_1d(jumps, cdf, y0, n_paths, horizon, seed):
    """Run the 1-D walk from ``y0`` until it first hits ``<= 0`` or ``horizon`` steps.

    Returns (exit position, exit time); exit time is -1 for paths still alive.
    """
    pos = np.empty(n_paths, dtype=np.int64)
    times = np.empty(n_paths, dtype=np.int64)
    for i in range(n_paths):
        state = _path_state(seed, i)
        y = y0
        t = 0
        while y > 0 and t < horizon:
            state, k = _draw(state, cdf)
            y += jumps[k]
            t += 1
        pos[i] = y
        times[i] = t if y <= 0 else -1
    return pos, times


@njit(cache=True)
def visits_nd(jumps, cdf, source, target, killed, n_paths, horizon, seed):
    """Count visits to ``target`` (time 0 included) before killing or ``horizon`` steps."""
    d = source.shape[0]
    counts = np.zeros(n_paths, dtype=np.int64)
    z = np.empty(d, dtype=np.int64)
    for i in range(n_paths):
        state = _path_state(seed, i)
        for c in range(d):
            z[c] = source[c]
        n = 0
        for _t in range(horizon + 1):
            if killed and z[d - 1] <= 0:
                break
            hit = True
            for c in range(d):
                if z[c] != target[c]:
                    hit = False
                    break
            if hit:
                n += 1
            state, k = _draw(state, cdf)
            for c in range(d):
                z[c] += jumps[k, c]
        counts[i] = n
    return counts


def cdf_of(probs):
    cdf = np.cumsum(np.asarray(probs, dtype=float))
    cdf[-1] = 1.0 + 1e-12
    return cdf
