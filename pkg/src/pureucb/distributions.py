"""Arm distributions: sampling streams and closed-form moments.

Four families are supported: Normal, Lognormal, Student's t, and Pareto
(Type I, support (scale, inf), density shape*scale^shape / x^(shape+1)).
Every spec can carry an additive location shift; shifting moves the mean
by exactly the shift and leaves all higher central moments alone, which
the sampler guarantees bit-exactly by adding the shift as the final
operation on the unshifted draw.

Sampling is inverse-CDF based where a fast quantile kernel exists
(Normal, Lognormal, Pareto), and uses the ratio construction
t = Z * sqrt(df / W), with W a chi-square(df) variable assembled from a
fixed number of uniforms, for integer-df Student's t.  Non-integer df
falls back to the (much slower) t quantile.  The j-th observation of a
stream therefore consumes a fixed, family-dependent number of raw
counter draws, keeping (seed, arm, j) -> observation a pure function.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.special as _sp

from . import _rng
from .errors import MomentDiverges, NoFiniteMoment

NORMAL = "normal"
LOGNORMAL = "lognormal"
STUDENT_T = "student_t"
PARETO = "pareto"

FAMILIES = (NORMAL, LOGNORMAL, STUDENT_T, PARETO)
FAMILY_CODES = {name: i for i, name in enumerate(FAMILIES)}

# Integer df up to this bound uses the exact chi-square ratio construction;
# beyond it (or for fractional df) each draw pays for a t-quantile inversion.
_MAX_FAST_DF = 100

_PARAM_NAMES = {
    NORMAL: ("mean", "std"),
    LOGNORMAL: ("mu", "sigma"),
    STUDENT_T: ("df", "scale"),
    PARETO: ("shape", "scale"),
}


@dataclass(frozen=True)
class DistributionSpec:
    """One arm's marginal law: family, two parameters, and a location shift."""

    family: str
    params: dict
    shift: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        names = _PARAM_NAMES[self.family]
        if set(self.params) != set(names):
            raise ValueError(
                f"{self.family} needs params {names}, got {tuple(self.params)}"
            )
        p0, p1 = (float(self.params[n]) for n in names)
        if self.family == NORMAL and p1 <= 0:
            raise ValueError("std must be > 0")
        if self.family == LOGNORMAL and p1 <= 0:
            raise ValueError("sigma must be > 0")
        if self.family == STUDENT_T and (p0 <= 0 or p1 <= 0):
            raise ValueError("df and scale must be > 0")
        if self.family == PARETO and (p0 <= 0 or p1 <= 0):
            raise ValueError("shape and scale must be > 0")
        object.__setattr__(self, "params", {n: float(self.params[n]) for n in names})
        object.__setattr__(self, "shift", float(self.shift))

    # -- constructors ---------------------------------------------------

    @staticmethod
    def normal(mean, std, shift=0.0):
        return DistributionSpec(NORMAL, {"mean": mean, "std": std}, shift)

    @staticmethod
    def lognormal(mu, sigma, shift=0.0):
        return DistributionSpec(LOGNORMAL, {"mu": mu, "sigma": sigma}, shift)

    @staticmethod
    def student_t(df, scale, shift=0.0):
        return DistributionSpec(STUDENT_T, {"df": df, "scale": scale}, shift)

    @staticmethod
    def pareto(shape, scale, shift=0.0):
        return DistributionSpec(PARETO, {"shape": shape, "scale": scale}, shift)

    # -- plumbing --------------------------------------------------------

    @property
    def p0(self) -> float:
        return self.params[_PARAM_NAMES[self.family][0]]

    @property
    def p1(self) -> float:
        return self.params[_PARAM_NAMES[self.family][1]]

    def shifted(self, delta: float) -> "DistributionSpec":
        """Same law translated by delta."""
        return replace(self, shift=self.shift + float(delta))

    def to_json_dict(self) -> dict:
        return {"family": self.family, "params": dict(self.params), "shift": self.shift}

    @staticmethod
    def from_json_dict(doc: dict) -> "DistributionSpec":
        return DistributionSpec(doc["family"], dict(doc["params"]), doc.get("shift", 0.0))

    # -- moments ----------------------------------------------------------

    def mean(self) -> float:
        """Closed-form mean (raises NoFiniteMoment where it diverges)."""
        f, p0, p1 = self.family, self.p0, self.p1
        if f == NORMAL:
            base = p0
        elif f == LOGNORMAL:
            base = math.exp(p0 + p1 * p1 / 2.0)
        elif f == STUDENT_T:
            if p0 <= 1:
                raise NoFiniteMoment(f"Student t mean needs df > 1, got {p0}")
            base = 0.0
        else:
            if p0 <= 1:
                raise NoFiniteMoment(f"Pareto mean needs shape > 1, got {p0}")
            base = p0 * p1 / (p0 - 1.0)
        return base + self.shift

    def variance(self) -> float:
        """Closed-form variance; shift-invariant."""
        f, p0, p1 = self.family, self.p0, self.p1
        if f == NORMAL:
            return p1 * p1
        if f == LOGNORMAL:
            s2 = p1 * p1
            return (math.exp(s2) - 1.0) * math.exp(2.0 * p0 + s2)
        if f == STUDENT_T:
            if p0 <= 2:
                raise NoFiniteMoment(f"Student t variance needs df > 2, got {p0}")
            return p1 * p1 * p0 / (p0 - 2.0)
        if p0 <= 2:
            raise NoFiniteMoment(f"Pareto variance needs shape > 2, got {p0}")
        return p1 * p1 * p0 / ((p0 - 1.0) ** 2 * (p0 - 2.0))

    def moment_order_sup(self) -> float:
        """Supremum of q with E|X|^q finite (+inf for Normal/Lognormal)."""
        if self.family in (NORMAL, LOGNORMAL):
            return math.inf
        return self.p0


@dataclass
class ArmStream:
    """Single-owner cursor over one arm's deterministic observation stream."""

    seed: int
    arm_index: int
    position: int = 1  # next observation index j
    _key: int = field(init=False, repr=False)

    def __post_init__(self):
        self._key = _rng.stream_key(self.seed, self.arm_index)


def draws_per_obs(spec: DistributionSpec) -> int:
    """Raw counter draws consumed per observation (fixed per spec)."""
    if spec.family != STUDENT_T:
        return 1
    df = spec.p0
    if df == math.floor(df) and df <= _MAX_FAST_DF:
        d = int(df)
        return 1 + d // 2 + (d & 1)
    return 1


def draw_encoded(fam: int, p0: float, p1: float, m: int, key: int, j: int) -> float:
    """Unshifted observation j (1-based) from encoded family parameters.

    The exact operation order here is load-bearing: the compiled kernel
    mirrors it verbatim so both backends produce identical doubles.
    """
    fam, m, j = int(fam), int(m), int(j)
    p0, p1 = float(p0), float(p1)
    t0 = (j - 1) * m
    u0 = _rng.uniform(key, t0)
    if fam == 0:
        return p0 + p1 * float(_sp.ndtri(u0))
    if fam == 1:
        return math.exp(p0 + p1 * float(_sp.ndtri(u0)))
    if fam == 3:
        return p1 * math.pow(u0, -1.0 / p0)
    # Student's t
    if m == 1:
        return p1 * float(_sp.stdtrit(p0, u0))
    df = int(p0)
    z = float(_sp.ndtri(u0))
    w = 0.0
    for p in range(1, df // 2 + 1):
        w = w + (-2.0 * math.log(_rng.uniform(key, t0 + p)))
    if df & 1:
        g = float(_sp.ndtri(_rng.uniform(key, t0 + df // 2 + 1)))
        w = w + g * g
    return p1 * (z * math.sqrt(p0 / w))


def _base_draw(spec: DistributionSpec, key: int, j: int) -> float:
    return draw_encoded(
        FAMILY_CODES[spec.family], spec.p0, spec.p1, draws_per_obs(spec), key, j
    )


def sample_at(spec: DistributionSpec, seed: int, arm: int, j: int) -> float:
    """Observation j (1-based) of arm `arm` under `seed`; pure function."""
    return _base_draw(spec, _rng.stream_key(seed, arm), j) + spec.shift


def sample(spec: DistributionSpec, stream: ArmStream) -> float:
    """Draw the next observation and advance the stream by one."""
    x = _base_draw(spec, stream._key, stream.position) + spec.shift
    stream.position += 1
    return x


# libm-exact elementwise transforms for the fallback block sampler; numpy's
# SIMD exp/log/pow are not bit-identical to libm on all platforms.
_libm_exp = np.frompyfunc(math.exp, 1, 1)
_libm_log = np.frompyfunc(math.log, 1, 1)
_libm_pow = np.frompyfunc(math.pow, 2, 1)


def sample_block_py(spec: DistributionSpec, seed: int, arm: int, j0: int, n: int) -> np.ndarray:
    """Observations j0 .. j0+n-1 as an array (pure-Python backend path)."""
    key = _rng.stream_key(seed, arm)
    f, p0, p1 = spec.family, spec.p0, spec.p1
    m = draws_per_obs(spec)
    u = _rng.uniform_block(key, (j0 - 1) * m, n * m)
    if m > 1:
        u = u.reshape(n, m)
    if f == NORMAL:
        out = p0 + p1 * _sp.ndtri(u)
    elif f == LOGNORMAL:
        out = _libm_exp(p0 + p1 * _sp.ndtri(u)).astype(np.float64)
    elif f == PARETO:
        out = (p1 * _libm_pow(u, -1.0 / p0)).astype(np.float64)
    elif m == 1:
        out = p1 * _sp.stdtrit(p0, u)
    else:
        df = int(p0)
        z = _sp.ndtri(u[:, 0])
        w = np.zeros(n)
        for p in range(1, df // 2 + 1):
            w = w + (-2.0 * _libm_log(u[:, p]).astype(np.float64))
        if df & 1:
            g = _sp.ndtri(u[:, df // 2 + 1])
            w = w + g * g
        out = p1 * (z * np.sqrt(p0 / w))
    return out + spec.shift


def encode(spec: DistributionSpec):
    """(family code, p0, p1, shift, draws-per-obs) tuple for the kernels."""
    return (
        FAMILY_CODES[spec.family],
        spec.p0,
        spec.p1,
        spec.shift,
        draws_per_obs(spec),
    )


def sample_block(spec: DistributionSpec, seed: int, arm: int, j0: int, n: int) -> np.ndarray:
    """Observations j0 .. j0+n-1, using the fastest available backend."""
    from . import _backend

    fam, p0, p1, shift, m = encode(spec)
    return _backend.impl.sample_block(fam, p0, p1, shift, m, seed, arm, j0, n)


def abs_moment_mc(spec: DistributionSpec, q: float, n_draws: int, seed: int):
    """Monte Carlo estimate of E|X|^q with its standard error.

    This is the designated oracle for moment bounds of shifted and mixed
    families, where no closed form exists.  Raises MomentDiverges when
    q is at or above the family's moment-order supremum.
    """
    if q >= spec.moment_order_sup():
        raise MomentDiverges(
            f"E|X|^{q} diverges: supremum is {spec.moment_order_sup()}"
        )
    if n_draws < 1:
        raise ValueError("n_draws must be >= 1")
    total = 0.0
    total_sq = 0.0
    done = 0
    chunk = 1 << 18
    while done < n_draws:
        take = min(chunk, n_draws - done)
        x = np.abs(sample_block(spec, seed, 0, done + 1, take)) ** q
        total += float(x.sum())
        total_sq += float((x * x).sum())
        done += take
    est = total / n_draws
    var = max(total_sq / n_draws - est * est, 0.0)
    stderr = math.sqrt(var / n_draws)
    return MomentEstimate(est, stderr, n_draws)


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    stderr: float
    n_draws: int
