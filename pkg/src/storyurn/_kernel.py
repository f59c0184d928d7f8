"""Compiled inner loop for urn trajectories.

Mirrors ``dynamics.sharing_probs`` and ``dynamics.step``; the test-suite checks
the two paths against each other step by step.
"""

import numpy as np
from numba import njit

POLICY_OPTIMAL = 0
POLICY_FIXED = 1
POLICY_HYBRID = 2

# region codes, same order as model.REGIONS
N, I, M, S = 0, 1, 2, 3

# outcome codes recorded per step
OUT_NONE, OUT_TRUE, OUT_FALSE, OUT_HYB_TRUE, OUT_HYB_FALSE = 0, 1, 2, 3, 4


@njit(cache=True, nogil=True)
def _probs(region, y, prm):
    theta = prm[2]
    mu = prm[3]
    beta = prm[4]
    delta = prm[5]
    lam = prm[6]
    if region == N:
        return 0.0, 0.0
    a_i = (1.0 - y) * delta * theta * (lam * mu - (1.0 - lam)) / (beta * (y + 2.0 * (1.0 - y) * delta))
    a_m = (1.0 - y) * (1.0 - delta) * theta * lam * mu / (beta * (y + 2.0 * (1.0 - y) * (1.0 - delta)))
    if region == S:
        return y, (1.0 - y) * theta * (1.0 - delta * a_i - (1.0 - delta) * a_m)
    if region == I:
        return 0.5 * y, (1.0 - y) * delta * theta * (1.0 - a_i)
    return 0.5 * y, (1.0 - y) * (1.0 - delta) * theta * (1.0 - a_m)


@njit(cache=True, nogil=True)
def _region(y, lower, upper, inter):
    if y < lower:
        return N
    if y < upper:
        return inter
    return S


@njit(cache=True, nogil=True)
def advance(t0, f0, counts, prm, policy, fixed_region, lower, upper, inter,
            hybrid_other, hybrid_dir, uniforms, rec_t, rec_f, rec_r, rec_offset,
            window_start, step_offset, acc):
    """Consume ``uniforms`` one step each, updating ``counts`` in place.

    counts = [steps, true shares, false shares, hybrid (1,0) moves, hybrid (0,1) moves].
    T and F are rebuilt from the counts every step so that the N-branch
    matches its closed form exactly. ``acc[0]`` accumulates y over global step
    indices >= ``window_start``; ``acc[1]`` counts those steps.
    Returns the last (T, F).
    """
    rho = prm[0]
    kappa = prm[1]
    record = rec_t.shape[0] > 0
    n_steps = counts[0]
    n_true = counts[1]
    n_false = counts[2]
    h_true = counts[3]
    h_false = counts[4]
    t = t0 + (n_steps - h_false) + rho * n_true
    f = f0 + kappa * (n_steps - h_true - h_false) + rho * n_false + h_false
    for k in range(uniforms.shape[0]):
        y = t / (t + f)
        if policy == POLICY_FIXED:
            region = fixed_region
        else:
            region = _region(y, lower, upper, inter)
        if policy == POLICY_HYBRID and region == hybrid_other:
            if hybrid_dir > 0:
                h_true += 1
            else:
                h_false += 1
        else:
            pt, pf = _probs(region, y, prm)
            u = uniforms[k]
            if u < pt:
                n_true += 1
            elif u < pt + pf:
                n_false += 1
        n_steps += 1
        t = t0 + (n_steps - h_false) + rho * n_true
        f = f0 + kappa * (n_steps - h_true - h_false) + rho * n_false + h_false
        if record:
            rec_t[rec_offset + k] = t
            rec_f[rec_offset + k] = f
            rec_r[rec_offset + k] = region
        if step_offset + k + 1 >= window_start:
            acc[0] += t / (t + f)
            acc[1] += 1.0
    counts[0] = n_steps
    counts[1] = n_true
    counts[2] = n_false
    counts[3] = h_true
    counts[4] = h_false
    return t, f


def warmup():
    """Trigger compilation (cached on disk afterwards)."""
    counts = np.zeros(5, dtype=np.int64)
    empty = np.empty(0)
    advance(1.0, 1.0, counts, np.array([1.0, 1.0, 0.5, 1.0, 1.0, 0.7, 0.75]),
            POLICY_OPTIMAL, 0, 0.3, 0.6, I, S, -1, np.full(3, 0.5), empty, empty,
            np.empty(0, dtype=np.int8), 0, 0, 0, np.zeros(2))
