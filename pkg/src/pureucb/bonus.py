"""Exploration-bonus functions f(n) and their threshold indices.

Each variant maps a sample size n >= 1 to a non-negative bonus that
vanishes as n grows.  `n_f(spec, b)` returns an index N such that
f(m) < b for every m >= N, which is the quantity the crossing-time and
budget bounds are built from.

The evaluation formulas are written once here, in scalar libm arithmetic,
and mirrored operation-for-operation by the compiled kernel; tests assert
bit equality between the two on wide grids.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import NoThreshold

GREEDY = "greedy"
UCBE = "ucbe"
MOSS = "moss"
LIL = "lil"
HEAVY_CS = "heavy_cs"
UCBE_PLUS = "ucbe_plus"

VARIANT_CODES = {GREEDY: 0, UCBE: 1, MOSS: 2, LIL: 3, HEAVY_CS: 4, UCBE_PLUS: 5}

_ARG_NAMES = {
    GREEDY: (),
    UCBE: ("a",),
    MOSS: ("c",),
    LIL: ("beta", "eps", "sigma", "delta"),
    HEAVY_CS: ("q", "q_prime", "M", "alpha"),
    UCBE_PLUS: ("q",),
}

_EXACT_SCAN = 10_000
_SCAN_LIMIT = 10 ** 12


@lru_cache(maxsize=None)
def zeta(x: float) -> float:
    """Riemann zeta for x > 1 by direct series with Euler-Maclaurin tail.

    Relative error well below 1e-10 over the range used here (x > 1.01);
    cross-checked against scipy.special.zeta in the test suite.
    """
    if x <= 1.0:
        raise ValueError("zeta series diverges for x <= 1")
    N = 64
    s = 0.0
    for n in range(1, N):
        s += n ** -x
    # Tail from N: integral + boundary + Bernoulli corrections (B2, B4, B6).
    s += N ** (1.0 - x) / (x - 1.0)
    s += 0.5 * N ** -x
    s += x / 12.0 * N ** (-x - 1.0)
    s -= x * (x + 1.0) * (x + 2.0) / 720.0 * N ** (-x - 3.0)
    s += x * (x + 1.0) * (x + 2.0) * (x + 3.0) * (x + 4.0) / 30240.0 * N ** (-x - 5.0)
    return s


def nagaev_a1_a2(q: float, M: float):
    """Constants of the polynomial/exponential sample-mean tail bound."""
    if q <= 2:
        raise ValueError("moment order q must exceed 2")
    if M <= 0:
        raise ValueError("moment bound M must be positive")
    a1 = (2.0 + 4.0 / q) ** q * M
    a2 = (q + 2.0) ** -2 * math.exp(-q) * M ** (-2.0 / q) / 2.0
    return a1, a2


@dataclass(frozen=True)
class BonusSpec:
    """An exploration-bonus variant with its parameters (immutable)."""

    variant: str
    args: tuple = ()

    def __post_init__(self):
        if self.variant not in VARIANT_CODES:
            raise ValueError(f"unknown bonus variant {self.variant!r}")
        names = _ARG_NAMES[self.variant]
        if len(self.args) != len(names):
            raise ValueError(f"{self.variant} takes args {names}")
        object.__setattr__(self, "args", tuple(float(a) for a in self.args))
        v, a = self.variant, self.args
        if v == UCBE and a[0] < 0:
            raise ValueError("ucbe needs a >= 0")
        if v == MOSS and a[0] < 0:
            raise ValueError("moss needs c > 0 (or unbound)")
        if v == LIL:
            beta, eps, sigma, delta = a
            if eps < 0 or sigma <= 0 or delta <= 0:
                raise ValueError("lil needs eps >= 0, sigma > 0, delta > 0")
        if v == HEAVY_CS:
            q, qp, m, alpha = a
            if not (q > 2 and 1 < qp < q - 1 and m > 0 and 0 < alpha < 1):
                raise ValueError(
                    "heavy_cs needs q > 2, q_prime in (1, q-1), M > 0, alpha in (0, 1)"
                )
        if v == UCBE_PLUS and a[0] != 0 and a[0] <= 3:
            raise ValueError("ucbe_plus needs q > 3")

    # -- constructors (0.0 marks run-start-bound parameters) -------------

    @staticmethod
    def greedy():
        return BonusSpec(GREEDY)

    @staticmethod
    def ucbe(a):
        return BonusSpec(UCBE, (a,))

    @staticmethod
    def moss(c=None):
        return BonusSpec(MOSS, (0.0 if c is None else c,))

    @staticmethod
    def lil(beta, eps, sigma, delta):
        return BonusSpec(LIL, (beta, eps, sigma, delta))

    @staticmethod
    def heavy_cs(q, q_prime, M, alpha):
        return BonusSpec(HEAVY_CS, (q, q_prime, M, alpha))

    @staticmethod
    def ucbe_plus(q=None):
        return BonusSpec(UCBE_PLUS, (0.0 if q is None else q,))

    @property
    def unbound(self) -> bool:
        """True when a parameter still needs binding at run start."""
        return (self.variant == MOSS or self.variant == UCBE_PLUS) and self.args[0] == 0.0

    def label(self) -> str:
        names = _ARG_NAMES[self.variant]
        if not names or self.unbound:
            return self.variant
        inner = ",".join(f"{n}={a:g}" for n, a in zip(names, self.args))
        return f"{self.variant}({inner})"

    def to_json_dict(self) -> dict:
        return {
            "variant": self.variant,
            "params": dict(zip(_ARG_NAMES[self.variant], self.args)),
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "BonusSpec":
        variant = doc["variant"]
        params = doc.get("params", {})
        names = _ARG_NAMES.get(variant)
        if names is None:
            raise ValueError(f"unknown bonus variant {variant!r}")
        args = tuple(params.get(n, 0.0) for n in names)
        return BonusSpec(variant, args)


@lru_cache(maxsize=None)
def pack(spec: BonusSpec):
    """(code, 8 doubles) encoding consumed by both backends' evaluators.

    Derived constants (the LiL prefactor, the confidence-sequence branch
    constants) are computed exactly once here so that every evaluation,
    Python or C, starts from the same doubles.
    """
    code = VARIANT_CODES[spec.variant]
    p = [0.0] * 8
    v, a = spec.variant, spec.args
    if v == UCBE:
        p[0] = a[0]
    elif v == MOSS:
        if spec.unbound:
            raise ValueError("moss c unbound; bind c = B/k at run start")
        p[0] = a[0]
    elif v == LIL:
        beta, eps, sigma, delta = a
        p[0] = (1.0 + beta) * (1.0 + math.sqrt(eps))
        p[1] = 2.0 * sigma * sigma * (1.0 + eps)
        p[2] = 1.0 + eps
        p[3] = delta
    elif v == HEAVY_CS:
        q, qp, m, alpha = a
        a1, a2 = nagaev_a1_a2(q, m)
        p[0] = 2.0 * a1 * zeta(qp) / alpha   # polynomial-branch numerator
        p[1] = q - 1.0 - qp                  # its n exponent
        p[2] = 1.0 / q                       # outer root
        p[3] = math.log(2.0 * zeta(qp + 1.0)) + math.log(1.0 / alpha)
        p[4] = qp + 1.0                      # log-branch slope
        p[5] = a2
    elif v == UCBE_PLUS:
        q = a[0]
        if q == 0.0:
            raise ValueError("ucbe_plus q unbound; bind from the configuration")
        p[0] = 1.0 if q >= 6 else 0.0
        p[1] = (3.0 - q) / q
    return code, tuple(p)


def eval_packed(code: int, p, nd: float) -> float:
    """f(n) from packed parameters; the compiled kernel mirrors this."""
    if code == 0:
        return 0.0
    if code == 1:
        return math.sqrt(p[0] / nd)
    if code == 2:
        lg = math.log(p[0] / nd)
        if lg < 0.0:
            lg = 0.0
        return math.sqrt(lg / nd)
    if code == 3:
        t = math.log(p[2] * nd)
        arg = t / p[3]
        if arg < 1.0:
            arg = 1.0
        rad = math.log(arg)
        return p[0] * math.sqrt(p[1] * rad / nd)
    if code == 4:
        f1 = math.pow(p[0] / math.pow(nd, p[1]), p[2])
        f2 = math.sqrt((p[3] + p[4] * math.log(nd)) / (p[5] * nd))
        return f1 if f1 > f2 else f2
    # ucbe_plus
    if p[0] == 1.0:
        return math.sqrt(math.log(nd + 2.0) / nd)
    return math.pow(nd, p[1])


def eval_bonus(spec: BonusSpec, n: int) -> float:
    """f(n) for n >= 1.  Reference implementation mirrored by the kernel."""
    if n < 1:
        raise ValueError("sample size n must be >= 1")
    code, p = pack(spec)
    return eval_packed(code, p, float(n))


def monotone_from(spec: BonusSpec) -> int:
    """Index beyond which the variant is certified non-increasing.

    UCBE, MOSS, Greedy and both UCBE+ branches are non-increasing from
    n = 1.  The iterated-logarithm bonus and the log branch of the
    confidence-sequence bonus have small humps whose ends follow from
    differentiating log(arg)/n terms; the bounds below are conservative.
    """
    v, a = spec.variant, spec.args
    if v == LIL:
        _, eps, _, delta = a
        ope = 1.0 + eps
        return int(math.ceil(max(math.e / ope, math.exp(math.e * delta) / ope))) + 1
    if v == HEAVY_CS:
        _, p = pack(spec)
        l0, slope = p[3], p[4]
        return int(math.ceil(math.exp(max(0.0, 1.0 - l0 / slope)))) + 1
    return 1


def heavy_cs_nf(b: float, q: float, q_prime: float, M: float, alpha: float) -> int:
    """Closed-form threshold for the confidence-sequence bonus.

    Max of three terms: a polynomial-branch condition and two covering
    the log branch (the n-vs-log(n) split), with the log term floored at
    zero when its argument drops below one.  Constants use zeta(q'+1).
    """
    if b <= 0:
        raise ValueError("level b must be positive")
    if not (1 < q_prime < q - 1):
        raise ValueError("q_prime must lie in (1, q-1)")
    a1, a2 = nagaev_a1_a2(q, M)
    z1 = zeta(q_prime + 1.0)
    c1 = (2.0 * a1 * z1 / alpha) ** (1.0 / (q - 1.0 - q_prime))
    c2 = 2.0 * (math.log(2.0 * z1) + math.log(1.0 / alpha)) / a2
    c3 = 2.0 * (q_prime + 1.0) / a2
    term_a = c1 * b ** (-q / (q - 1.0 - q_prime))
    term_b = c2 / (b * b)
    x = c3 / (b * b)
    term_c = 2.0 * x * math.log(x) if x > 1.0 else 0.0
    return max(1, int(math.ceil(max(term_a, term_b, term_c))))


def n_f(spec: BonusSpec, b: float) -> int:
    """Threshold index: f(m) < b for every m >= the returned value.

    Confidence-sequence bonuses use their closed form.  Other variants
    scan every integer up to 10^4, then extend on a geometric grid using
    the certified monotone tail; validity (not minimality) is the
    contract, though the scan does return the smallest index whenever the
    last violation falls inside the exact range.
    """
    if b <= 0:
        raise ValueError("level b must be positive")
    if spec.variant == HEAVY_CS:
        q, qp, m, alpha = spec.args
        return heavy_cs_nf(b, q, qp, m, alpha)
    mono = monotone_from(spec)
    last_viol = 0
    for n in range(1, _EXACT_SCAN + 1):
        if eval_bonus(spec, n) >= b:
            last_viol = n
    if last_viol < _EXACT_SCAN:
        # f(10^4) < b and f is non-increasing past max(mono, 10^4), so the
        # defining property holds from the first post-violation index.
        return last_viol + 1
    lo = _EXACT_SCAN
    n = _EXACT_SCAN
    while n < _SCAN_LIMIT:
        n = min(int(n * 1.3) + 1, _SCAN_LIMIT)
        if n >= mono and eval_bonus(spec, n) < b:
            # Monotone region: bisect the boundary in (lo, n].
            hi = n
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if eval_bonus(spec, mid) < b:
                    hi = mid
                else:
                    lo = mid
            return hi
        lo = n
    raise NoThreshold(f"{spec.label()} stays >= {b} up to {_SCAN_LIMIT}")


def standard_presets() -> dict:
    """Named bonus presets exercised by the property suites."""
    return {
        "greedy": BonusSpec.greedy(),
        "ucbe-a1": BonusSpec.ucbe(1.0),
        "ucbe-a0.2": BonusSpec.ucbe(0.2),
        "moss-c100": BonusSpec.moss(100.0),
        "lil-default": BonusSpec.lil(1.0, 0.01, 1.0, 0.005),
        "heavy-cs-example": BonusSpec.heavy_cs(5.0, 2.0, 2.0, 0.1),
        "ucbe-plus-q6": BonusSpec.ucbe_plus(6.0),
        "ucbe-plus-q5": BonusSpec.ucbe_plus(5.0),
        "ucbe-plus-q4": BonusSpec.ucbe_plus(4.0),
    }
