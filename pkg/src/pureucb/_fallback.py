"""Pure-Python backend: same kernel API, same bits, no compiler needed.

Implements the argmax rules in their naive reference forms (full scan per
round), which doubles as the oracle the compiled backend's heap and
bucket structures are verified against.  Orders of magnitude slower than
the compiled kernel; see benchmarks/backend_bench.py.
"""

import math

import numpy as np

from . import _rng, bonus as _bonus, distributions as _dist

BACKEND_NAME = "python"


def bonus_eval_py(code, bparams, n):
    return _bonus.eval_packed(code, tuple(bparams), float(n))


def _kahan(s, comp, x):
    y = x - comp
    t = s + y
    return t, (t - s) - y


def run_decoupled(fams, p0s, p1s, shifts, ms, bonus_code, bparams,
                  budget, seed, capture):
    k = len(fams)
    bp = tuple(bparams)
    keys = [_rng.stream_key(seed, i) for i in range(k)]
    counts = np.zeros(k, dtype=np.int64)
    sums = [0.0] * k
    comps = [0.0] * k
    means = np.zeros(k)
    ucbs = np.zeros(k)
    init_obs = np.zeros(k)
    init_ucb = np.zeros(k)
    n_trace = budget - k if capture else 0
    tr_arm = np.zeros(n_trace, dtype=np.int64)
    tr_cnt = np.zeros(n_trace, dtype=np.int64)
    tr_obs = np.zeros(n_trace)
    tr_ucb = np.zeros(n_trace)

    b1 = _bonus.eval_packed(bonus_code, bp, 1.0)
    for i in range(k):
        x = _dist.draw_encoded(fams[i], p0s[i], p1s[i], ms[i], keys[i], 1) + shifts[i]
        sums[i], comps[i] = _kahan(sums[i], comps[i], x)
        counts[i] = 1
        mean = sums[i] / 1.0
        means[i] = mean
        ucbs[i] = mean + b1
        init_obs[i] = x
        init_ucb[i] = ucbs[i]
    total = k
    while total < budget:
        s = int(np.argmax(ucbs))  # first index among maxima
        j = int(counts[s]) + 1
        x = _dist.draw_encoded(fams[s], p0s[s], p1s[s], ms[s], keys[s], j) + shifts[s]
        sums[s], comps[s] = _kahan(sums[s], comps[s], x)
        counts[s] = j
        mean = sums[s] / float(j)
        u = mean + _bonus.eval_packed(bonus_code, bp, float(j))
        means[s] = mean
        ucbs[s] = u
        if capture:
            idx = total - k
            tr_arm[idx] = s
            tr_cnt[idx] = j
            tr_obs[idx] = x
            tr_ucb[idx] = u
        total += 1

    out = {"counts": counts, "means": means, "ucbs": ucbs,
           "init_obs": init_obs, "init_ucb": init_ucb}
    if capture:
        out["trace"] = (tr_arm, tr_cnt, tr_obs, tr_ucb)
    return out


def run_ucb1(fams, p0s, p1s, shifts, ms, budget, seed, capture, naive=True):
    """Naive full-scan UCB1 (the `naive` flag is accepted for API parity)."""
    k = len(fams)
    keys = [_rng.stream_key(seed, i) for i in range(k)]
    counts = np.zeros(k, dtype=np.int64)
    sums = [0.0] * k
    comps = [0.0] * k
    means = np.zeros(k)
    init_obs = np.zeros(k)
    init_ucb = np.zeros(k)
    n_trace = budget - k if capture else 0
    tr_arm = np.zeros(n_trace, dtype=np.int64)
    tr_cnt = np.zeros(n_trace, dtype=np.int64)
    tr_obs = np.zeros(n_trace)
    tr_ucb = np.zeros(n_trace)

    for i in range(k):
        x = _dist.draw_encoded(fams[i], p0s[i], p1s[i], ms[i], keys[i], 1) + shifts[i]
        sums[i], comps[i] = _kahan(sums[i], comps[i], x)
        counts[i] = 1
        means[i] = sums[i] / 1.0
        init_obs[i] = x
        init_ucb[i] = means[i] + math.sqrt(2.0 * math.log(float(k)) / 1.0)
    total = k
    while total < budget:
        lg2 = 2.0 * math.log(float(total))
        best_arm = -1
        best_val = 0.0
        for i in range(k):
            val = means[i] + math.sqrt(lg2 / float(counts[i]))
            if best_arm < 0 or val > best_val or (val == best_val and i < best_arm):
                best_val = val
                best_arm = i
        s = best_arm
        j = int(counts[s]) + 1
        x = _dist.draw_encoded(fams[s], p0s[s], p1s[s], ms[s], keys[s], j) + shifts[s]
        sums[s], comps[s] = _kahan(sums[s], comps[s], x)
        counts[s] = j
        means[s] = sums[s] / float(j)
        total += 1
        if capture:
            idx = total - k - 1
            tr_arm[idx] = s
            tr_cnt[idx] = j
            tr_obs[idx] = x
            tr_ucb[idx] = means[s] + math.sqrt(2.0 * math.log(float(total)) / float(j))

    ucbs = np.array([means[i] + math.sqrt(2.0 * math.log(float(budget)) / float(counts[i]))
                     for i in range(k)])
    out = {"counts": counts, "means": means, "ucbs": ucbs,
           "init_obs": init_obs, "init_ucb": init_ucb}
    if capture:
        out["trace"] = (tr_arm, tr_cnt, tr_obs, tr_ucb)
    return out


def sample_block(fam, p0, p1, shift, m, seed, arm, j0, n):
    names = _dist._PARAM_NAMES[_dist.FAMILIES[fam]]
    spec = _dist.DistributionSpec(
        _dist.FAMILIES[fam], {names[0]: p0, names[1]: p1}, shift
    )
    return _dist.sample_block_py(spec, seed, arm, j0, n)


def crossing_time(fam, p0, p1, shift, m, bonus_code, bparams, seed, arm,
                  boundary, start_n, horizon):
    bp = tuple(bparams)
    key = _rng.stream_key(seed, arm)
    s = 0.0
    comp = 0.0
    for j in range(1, horizon + 1):
        x = _dist.draw_encoded(fam, p0, p1, m, key, j) + shift
        s, comp = _kahan(s, comp, x)
        if j >= start_n:
            if s / float(j) + _bonus.eval_packed(bonus_code, bp, float(j)) < boundary:
                return j
    return 0


def ucb_min(fam, p0, p1, shift, m, bonus_code, bparams, seed, arm, horizon):
    bp = tuple(bparams)
    key = _rng.stream_key(seed, arm)
    s = 0.0
    comp = 0.0
    best = 0.0
    for j in range(1, horizon + 1):
        x = _dist.draw_encoded(fam, p0, p1, m, key, j) + shift
        s, comp = _kahan(s, comp, x)
        u = s / float(j) + _bonus.eval_packed(bonus_code, bp, float(j))
        if j == 1 or u < best:
            best = u
    return best


def ucb_stays_above(fam, p0, p1, shift, m, bonus_code, bparams, seed, arm,
                    boundary, horizon):
    bp = tuple(bparams)
    key = _rng.stream_key(seed, arm)
    s = 0.0
    comp = 0.0
    for j in range(1, horizon + 1):
        x = _dist.draw_encoded(fam, p0, p1, m, key, j) + shift
        s, comp = _kahan(s, comp, x)
        if s / float(j) + _bonus.eval_packed(bonus_code, bp, float(j)) < boundary:
            return 0
    return 1


def mean_tail_counts(fam, p0, p1, shift, m, n, mu, xs, paths, seed):
    out = np.zeros(len(xs), dtype=np.int64)
    for p in range(paths):
        block = sample_block(fam, p0, p1, shift, m, seed, p, 1, n)
        s = 0.0
        comp = 0.0
        for x in block:
            s, comp = _kahan(s, comp, float(x))
        mean = s / float(n)
        for i, x in enumerate(xs):
            if mean - mu >= x:
                out[i] += 1
    return out
