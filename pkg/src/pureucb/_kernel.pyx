# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernels.

Mirrors the pure-Python reference (`pureucb._fallback`) bit-for-bit: the
splitmix64 counter stream, the sampling transforms, the Kahan mean
accumulation, and the bonus formulas are the same operations in the same
order, on top of the same libm and the same scipy quantile kernels.  The
test suite asserts exact equality between the two backends.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, pow, sqrt
from libc.stdint cimport int32_t, int64_t, uint64_t
from libcpp.pair cimport pair
from libcpp.queue cimport priority_queue
from libcpp.unordered_map cimport unordered_map
from cython.operator cimport dereference as deref, preincrement as inc
from scipy.special.cython_special cimport ndtri, stdtrit

BACKEND_NAME = "compiled"

ctypedef pair[double, long] dl_pair
ctypedef priority_queue[dl_pair] bucket_heap

cdef uint64_t MASK_GAMMA = <uint64_t>0x9E3779B97F4A7C15u
cdef uint64_t MIX1 = <uint64_t>0xBF58476D1CE4E5B9u
cdef uint64_t MIX2 = <uint64_t>0x94D049BB133111EBu
cdef uint64_t SEED_SALT = <uint64_t>0x5851F42D4C957F2Du
cdef double U01_SCALE = 2.0 ** -53


# ---------------------------------------------------------------------------
# counter RNG (mirrors pureucb._rng)
# ---------------------------------------------------------------------------

cdef inline uint64_t sm_fin(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline uint64_t stream_key_c(uint64_t seed, long arm) noexcept nogil:
    cdef uint64_t h = sm_fin(seed ^ SEED_SALT)
    return sm_fin(h + (<uint64_t>(arm + 1)) * MASK_GAMMA)


cdef inline double unif(uint64_t key, uint64_t t) noexcept nogil:
    cdef uint64_t z = sm_fin(key + (t + 1) * MASK_GAMMA)
    return (<double>(z >> 11) + 0.5) * U01_SCALE


# ---------------------------------------------------------------------------
# sampling transforms (mirror distributions._base_draw)
# families: 0 normal, 1 lognormal, 2 student_t, 3 pareto
# ---------------------------------------------------------------------------

cdef double base_draw(int fam, double p0, double p1, int m, uint64_t key, long j) noexcept nogil:
    cdef uint64_t t0 = (<uint64_t>(j - 1)) * (<uint64_t>m)
    cdef double u0 = unif(key, t0)
    cdef double z, w, g
    cdef long df, p
    if fam == 0:
        return p0 + p1 * ndtri(u0)
    if fam == 1:
        return exp(p0 + p1 * ndtri(u0))
    if fam == 3:
        return p1 * pow(u0, -1.0 / p0)
    if m == 1:
        return p1 * stdtrit(p0, u0)
    df = <long>p0
    z = ndtri(u0)
    w = 0.0
    for p in range(1, df // 2 + 1):
        w = w + (-2.0 * log(unif(key, t0 + <uint64_t>p)))
    if df & 1:
        g = ndtri(unif(key, t0 + <uint64_t>(df // 2 + 1)))
        w = w + g * g
    return p1 * (z * sqrt(p0 / w))


# ---------------------------------------------------------------------------
# bonus evaluation (mirrors bonus.eval_bonus on packed params)
# codes: 0 greedy, 1 ucbe, 2 moss, 3 lil, 4 heavy_cs, 5 ucbe_plus
# ---------------------------------------------------------------------------

cdef double bonus_eval(int code, const double* p, double nd) noexcept nogil:
    cdef double lg, t, arg, rad, f1, f2
    if code == 0:
        return 0.0
    if code == 1:
        return sqrt(p[0] / nd)
    if code == 2:
        lg = log(p[0] / nd)
        if lg < 0.0:
            lg = 0.0
        return sqrt(lg / nd)
    if code == 3:
        t = log(p[2] * nd)
        arg = t / p[3]
        if arg < 1.0:
            arg = 1.0
        rad = log(arg)
        return p[0] * sqrt(p[1] * rad / nd)
    if code == 4:
        f1 = pow(p[0] / pow(nd, p[1]), p[2])
        f2 = sqrt((p[3] + p[4] * log(nd)) / (p[5] * nd))
        return f1 if f1 > f2 else f2
    if p[0] == 1.0:
        return sqrt(log(nd + 2.0) / nd)
    return pow(nd, p[1])


def bonus_eval_py(int code, double[::1] bp, long n):
    """Expose the kernel's bonus formula for bit-identity tests."""
    return bonus_eval(code, &bp[0], <double>n)


# ---------------------------------------------------------------------------
# max-heap over (ucb, lowest index) for the decoupled engine
# ---------------------------------------------------------------------------

cdef inline bint better(const double* key, long a, long b) noexcept nogil:
    return key[a] > key[b] or (key[a] == key[b] and a < b)


cdef void sift_down(long* heap, long* pos, const double* key, long k, long root) noexcept nogil:
    cdef long child, arm
    while True:
        child = 2 * root + 1
        if child >= k:
            return
        if child + 1 < k and better(key, heap[child + 1], heap[child]):
            child += 1
        if better(key, heap[child], heap[root]):
            arm = heap[root]
            heap[root] = heap[child]
            heap[child] = arm
            pos[heap[root]] = root
            pos[heap[child]] = child
            root = child
        else:
            return


cdef void heapify(long* heap, long* pos, const double* key, long k) noexcept nogil:
    cdef long i
    for i in range(k - 1, -1, -1):
        sift_down(heap, pos, key, k, i)


# ---------------------------------------------------------------------------
# engine: decoupled meta-UCB
# ---------------------------------------------------------------------------

def run_decoupled(int[::1] fams, double[::1] p0s, double[::1] p1s,
                  double[::1] shifts, int[::1] ms,
                  int bonus_code, double[::1] bparams,
                  long budget, unsigned long long seed, bint capture):
    """One fixed-budget run; returns final state (+ trace when captured)."""
    cdef long k = fams.shape[0]
    counts_arr = np.zeros(k, dtype=np.int64)
    means_arr = np.zeros(k, dtype=np.float64)
    ucbs_arr = np.zeros(k, dtype=np.float64)
    init_obs_arr = np.zeros(k, dtype=np.float64)
    init_ucb_arr = np.zeros(k, dtype=np.float64)
    cdef long n_trace = budget - k if capture else 0
    tr_arm_arr = np.zeros(n_trace, dtype=np.int64)
    tr_cnt_arr = np.zeros(n_trace, dtype=np.int64)
    tr_obs_arr = np.zeros(n_trace, dtype=np.float64)
    tr_ucb_arr = np.zeros(n_trace, dtype=np.float64)

    cdef int64_t[::1] counts = counts_arr
    cdef double[::1] means = means_arr
    cdef double[::1] ucbs = ucbs_arr
    cdef double[::1] init_obs = init_obs_arr
    cdef double[::1] init_ucb = init_ucb_arr
    cdef int64_t[::1] tr_arm = tr_arm_arr
    cdef int64_t[::1] tr_cnt = tr_cnt_arr
    cdef double[::1] tr_obs = tr_obs_arr
    cdef double[::1] tr_ucb = tr_ucb_arr

    sums_arr = np.zeros(k, dtype=np.float64)
    comps_arr = np.zeros(k, dtype=np.float64)
    keys_arr = np.zeros(k, dtype=np.uint64)
    heap_arr = np.zeros(k, dtype=np.int64)
    pos_arr = np.zeros(k, dtype=np.int64)
    cdef double[::1] sums = sums_arr
    cdef double[::1] comps = comps_arr
    cdef uint64_t[::1] skeys = keys_arr
    cdef int64_t[::1] heap64 = heap_arr
    cdef int64_t[::1] pos64 = pos_arr
    cdef const double* bp = &bparams[0]

    cdef long i, s, total, idx
    cdef long j
    cdef double x, y, t, mean, u
    cdef double b1 = bonus_eval(bonus_code, bp, 1.0)

    with nogil:
        for i in range(k):
            skeys[i] = stream_key_c(<uint64_t>seed, i)
            x = base_draw(fams[i], p0s[i], p1s[i], ms[i], skeys[i], 1) + shifts[i]
            y = x - comps[i]
            t = sums[i] + y
            comps[i] = (t - sums[i]) - y
            sums[i] = t
            counts[i] = 1
            mean = sums[i] / 1.0
            u = mean + b1
            means[i] = mean
            ucbs[i] = u
            init_obs[i] = x
            init_ucb[i] = u
            heap64[i] = i
            pos64[i] = i
        heapify(<long*>&heap64[0], <long*>&pos64[0], &ucbs[0], k)
        total = k
        while total < budget:
            s = heap64[0]
            j = counts[s] + 1
            x = base_draw(fams[s], p0s[s], p1s[s], ms[s], skeys[s], j) + shifts[s]
            y = x - comps[s]
            t = sums[s] + y
            comps[s] = (t - sums[s]) - y
            sums[s] = t
            counts[s] = j
            mean = sums[s] / <double>j
            u = mean + bonus_eval(bonus_code, bp, <double>j)
            means[s] = mean
            ucbs[s] = u
            if capture:
                idx = total - k
                tr_arm[idx] = s
                tr_cnt[idx] = j
                tr_obs[idx] = x
                tr_ucb[idx] = u
            sift_down(<long*>&heap64[0], <long*>&pos64[0], &ucbs[0], k, 0)
            total += 1

    out = {
        "counts": counts_arr, "means": means_arr, "ucbs": ucbs_arr,
        "init_obs": init_obs_arr, "init_ucb": init_ucb_arr,
    }
    if capture:
        out["trace"] = (tr_arm_arr, tr_cnt_arr, tr_obs_arr, tr_ucb_arr)
    return out


# ---------------------------------------------------------------------------
# engine: UCB1 (global-count bonus), bucketed and naive argmax
# ---------------------------------------------------------------------------

def run_ucb1(int[::1] fams, double[::1] p0s, double[::1] p1s,
             double[::1] shifts, int[::1] ms,
             long budget, unsigned long long seed, bint capture, bint naive):
    """One fixed-budget UCB1 run.

    The bucketed argmax groups arms by sample count: the bonus is shared
    within a bucket, so only each bucket's (max mean, lowest index) arm
    can win, and a round scans distinct counts instead of all k arms.
    Stale heap entries are discarded lazily.  `naive=True` scans all arms
    each round instead (the equivalence oracle).
    """
    cdef long k = fams.shape[0]
    counts_arr = np.zeros(k, dtype=np.int64)
    means_arr = np.zeros(k, dtype=np.float64)
    ucbs_arr = np.zeros(k, dtype=np.float64)
    init_obs_arr = np.zeros(k, dtype=np.float64)
    init_ucb_arr = np.zeros(k, dtype=np.float64)
    cdef long n_trace = budget - k if capture else 0
    tr_arm_arr = np.zeros(n_trace, dtype=np.int64)
    tr_cnt_arr = np.zeros(n_trace, dtype=np.int64)
    tr_obs_arr = np.zeros(n_trace, dtype=np.float64)
    tr_ucb_arr = np.zeros(n_trace, dtype=np.float64)

    cdef int64_t[::1] counts = counts_arr
    cdef double[::1] means = means_arr
    cdef double[::1] ucbs = ucbs_arr
    cdef double[::1] init_obs = init_obs_arr
    cdef double[::1] init_ucb = init_ucb_arr
    cdef int64_t[::1] tr_arm = tr_arm_arr
    cdef int64_t[::1] tr_cnt = tr_cnt_arr
    cdef double[::1] tr_obs = tr_obs_arr
    cdef double[::1] tr_ucb = tr_ucb_arr

    sums_arr = np.zeros(k, dtype=np.float64)
    comps_arr = np.zeros(k, dtype=np.float64)
    keys_arr = np.zeros(k, dtype=np.uint64)
    cdef double[::1] sums = sums_arr
    cdef double[::1] comps = comps_arr
    cdef uint64_t[::1] skeys = keys_arr

    cdef unordered_map[long, bucket_heap] heaps
    cdef unordered_map[long, long] live
    cdef unordered_map[long, bucket_heap].iterator it
    cdef bucket_heap* pq
    cdef dl_pair entry

    cdef long i, s, total, idx, c, arm, best_arm
    cdef long j
    cdef double x, y, t, mean, u, val, best_val, lg2

    with nogil:
        for i in range(k):
            skeys[i] = stream_key_c(<uint64_t>seed, i)
            x = base_draw(fams[i], p0s[i], p1s[i], ms[i], skeys[i], 1) + shifts[i]
            y = x - comps[i]
            t = sums[i] + y
            comps[i] = (t - sums[i]) - y
            sums[i] = t
            counts[i] = 1
            mean = sums[i] / 1.0
            means[i] = mean
            init_obs[i] = x
            init_ucb[i] = mean + sqrt(2.0 * log(<double>k) / 1.0)
            if not naive:
                entry.first = mean
                entry.second = -i
                heaps[1].push(entry)
        if not naive:
            live[1] = k
        total = k
        while total < budget:
            best_arm = -1
            best_val = 0.0
            lg2 = 2.0 * log(<double>total)
            if naive:
                for i in range(k):
                    val = means[i] + sqrt(lg2 / <double>counts[i])
                    if best_arm < 0 or val > best_val or (val == best_val and i < best_arm):
                        best_val = val
                        best_arm = i
            else:
                it = heaps.begin()
                while it != heaps.end():
                    c = deref(it).first
                    pq = &deref(it).second
                    while pq.size() > 0:
                        arm = -(pq.top().second)
                        if counts[arm] == c:
                            break
                        pq.pop()
                    arm = -(pq.top().second)
                    val = pq.top().first + sqrt(lg2 / <double>c)
                    if best_arm < 0 or val > best_val or (val == best_val and arm < best_arm):
                        best_val = val
                        best_arm = arm
                    inc(it)
            s = best_arm
            c = counts[s]
            j = c + 1
            x = base_draw(fams[s], p0s[s], p1s[s], ms[s], skeys[s], j) + shifts[s]
            y = x - comps[s]
            t = sums[s] + y
            comps[s] = (t - sums[s]) - y
            sums[s] = t
            counts[s] = j
            mean = sums[s] / <double>j
            means[s] = mean
            total += 1
            if not naive:
                live[c] -= 1
                if live[c] == 0:
                    heaps.erase(c)
                    live.erase(c)
                live[j] += 1
                entry.first = mean
                entry.second = -s
                heaps[j].push(entry)
            if capture:
                idx = total - k - 1
                tr_arm[idx] = s
                tr_cnt[idx] = j
                tr_obs[idx] = x
                tr_ucb[idx] = mean + sqrt(2.0 * log(<double>total) / <double>j)
        for i in range(k):
            ucbs[i] = means[i] + sqrt(2.0 * log(<double>budget) / <double>counts[i])

    out = {
        "counts": counts_arr, "means": means_arr, "ucbs": ucbs_arr,
        "init_obs": init_obs_arr, "init_ucb": init_ucb_arr,
    }
    if capture:
        out["trace"] = (tr_arm_arr, tr_cnt_arr, tr_obs_arr, tr_ucb_arr)
    return out


# ---------------------------------------------------------------------------
# replay oracles
# ---------------------------------------------------------------------------

def sample_block(int fam, double p0, double p1, double shift, int m,
                 unsigned long long seed, long arm, long j0, long n):
    """Observations j0 .. j0+n-1 of one arm's stream."""
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef uint64_t key = stream_key_c(<uint64_t>seed, arm)
    cdef long i
    with nogil:
        for i in range(n):
            out[i] = base_draw(fam, p0, p1, m, key, j0 + i) + shift
    return out_arr


def crossing_time(int fam, double p0, double p1, double shift, int m,
                  int bonus_code, double[::1] bparams,
                  unsigned long long seed, long arm, double boundary,
                  long start_n, long horizon):
    """First n in [start_n, horizon] with mean + f(n) < boundary; 0 if none."""
    cdef uint64_t key = stream_key_c(<uint64_t>seed, arm)
    cdef const double* bp = &bparams[0]
    cdef double s = 0.0, comp = 0.0, x, y, t, mean
    cdef long j, hit = 0
    with nogil:
        for j in range(1, horizon + 1):
            x = base_draw(fam, p0, p1, m, key, j) + shift
            y = x - comp
            t = s + y
            comp = (t - s) - y
            s = t
            if j >= start_n:
                mean = s / <double>j
                if mean + bonus_eval(bonus_code, bp, <double>j) < boundary:
                    hit = j
                    break
    return hit


def ucb_min(int fam, double p0, double p1, double shift, int m,
            int bonus_code, double[::1] bparams,
            unsigned long long seed, long arm, long horizon):
    """Minimum of mean + f(n) over n in [1, horizon]."""
    cdef uint64_t key = stream_key_c(<uint64_t>seed, arm)
    cdef const double* bp = &bparams[0]
    cdef double s = 0.0, comp = 0.0, x, y, t, u, best = 0.0
    cdef long j
    with nogil:
        for j in range(1, horizon + 1):
            x = base_draw(fam, p0, p1, m, key, j) + shift
            y = x - comp
            t = s + y
            comp = (t - s) - y
            s = t
            u = s / <double>j + bonus_eval(bonus_code, bp, <double>j)
            if j == 1 or u < best:
                best = u
    return best


def ucb_stays_above(int fam, double p0, double p1, double shift, int m,
                    int bonus_code, double[::1] bparams,
                    unsigned long long seed, long arm, double boundary,
                    long horizon):
    """1 if mean + f(n) >= boundary for all n <= horizon (early exit)."""
    cdef uint64_t key = stream_key_c(<uint64_t>seed, arm)
    cdef const double* bp = &bparams[0]
    cdef double s = 0.0, comp = 0.0, x, y, t
    cdef long j
    cdef int ok = 1
    with nogil:
        for j in range(1, horizon + 1):
            x = base_draw(fam, p0, p1, m, key, j) + shift
            y = x - comp
            t = s + y
            comp = (t - s) - y
            s = t
            if s / <double>j + bonus_eval(bonus_code, bp, <double>j) < boundary:
                ok = 0
                break
    return ok


def mean_tail_counts(int fam, double p0, double p1, double shift, int m,
                     long n, double mu, double[::1] xs, long paths,
                     unsigned long long seed):
    """Counts of {mean of n draws - mu >= x} over independent paths."""
    cdef long nx = xs.shape[0]
    out_arr = np.zeros(nx, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef uint64_t key
    cdef double s, comp, x, y, t, mean
    cdef long p, j, i
    with nogil:
        for p in range(paths):
            key = stream_key_c(<uint64_t>seed, p)
            s = 0.0
            comp = 0.0
            for j in range(1, n + 1):
                x = base_draw(fam, p0, p1, m, key, j) + shift
                y = x - comp
                t = s + y
                comp = (t - s) - y
                s = t
            mean = s / <double>n
            for i in range(nx):
                if mean - mu >= xs[i]:
                    out[i] += 1
    return out_arr
