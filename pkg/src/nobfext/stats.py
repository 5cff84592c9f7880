"""Distributional measurement: statistical distance, linear-test bias
spectra, XOR composition of independent bits, and empirical estimates.

Conventions
-----------
The bias of a parity test S is |Pr[parity = 0] - Pr[parity = 1]|, which is
exactly twice the statistical distance of that single bit from uniform.
All conversions between the two happen here; callers should never multiply
or divide by two themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import beta as _beta_dist

from .errors import DimensionError, ValidationError, WorkCapExceeded
from .sources import Distribution

SPECTRUM_M_CAP = 20
EMPIRICAL_M_CAP = 16
EMPIRICAL_MIN_FACTOR = 100   # required samples per table cell


@dataclass(frozen=True)
class Estimate:
    """A point estimate with a two-sided interval.

    `method` records how the interval was produced ("exact" intervals are
    zero width).  `contains` is inclusive on both ends.
    """

    value: float
    lo: float
    hi: float
    samples: int = 0
    confidence: float = 1.0
    method: str = "exact"

    def __post_init__(self):
        if not (self.lo <= self.value <= self.hi):
            raise ValidationError("estimate value outside its interval")

    @classmethod
    def exact_value(cls, v: float) -> "Estimate":
        return cls(value=float(v), lo=float(v), hi=float(v))

    @property
    def is_exact(self) -> bool:
        return self.method == "exact"

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "lo": self.lo,
            "hi": self.hi,
            "samples": self.samples,
            "confidence": self.confidence,
            "method": self.method,
        }


def clopper_pearson(k: int, n: int, confidence: float = 0.99) -> tuple[float, float]:
    """Two-sided Clopper-Pearson interval for a binomial proportion."""
    if n <= 0:
        raise ValidationError("need at least one trial")
    if not 0 <= k <= n:
        raise ValidationError("successes outside 0..n")
    alpha = 1.0 - confidence
    lo = 0.0 if k == 0 else float(_beta_dist.ppf(alpha / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(_beta_dist.ppf(1 - alpha / 2, k + 1, n - k))
    return lo, hi


def binomial_estimate(k: int, n: int, confidence: float = 0.99) -> Estimate:
    lo, hi = clopper_pearson(k, n, confidence)
    return Estimate(value=k / n, lo=lo, hi=hi, samples=n,
                    confidence=confidence, method="clopper-pearson")


def statistical_distance(p: Distribution, q: Distribution) -> float:
    """Half the L1 difference of the two probability tables.

    Empirical inputs are converted to plug-in tables first, so the result
    is itself an estimate in that case; exact inputs give the exact value.
    """
    if p.m != q.m:
        raise DimensionError(f"width mismatch: {p.m} vs {q.m}")
    return 0.5 * float(np.abs(p.as_table() - q.as_table()).sum())


def sd_of_tables(pt: np.ndarray, qt: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(pt, dtype=np.float64)
                              - np.asarray(qt, dtype=np.float64)).sum())


def fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform of a length-2^m array.

    out[s] = sum_x (-1)^{<s, x>} a[x].
    """
    a = np.asarray(a, dtype=np.float64).copy()
    n = a.size
    if n & (n - 1):
        raise ValidationError("length must be a power of two")
    h = 1
    while h < n:
        a = a.reshape(-1, 2, h)
        lo = a[:, 0, :] + a[:, 1, :]
        hi = a[:, 0, :] - a[:, 1, :]
        a = np.stack([lo, hi], axis=1)
        h *= 2
    return a.reshape(n)


@dataclass(frozen=True)
class BiasSpectrum:
    """Bias of every parity test of an m-bit distribution.

    `biases[s]` is |Pr[Z_s = 0] - Pr[Z_s = 1]| for the parity over the
    subset encoded by bitmask s; entry 0 (the empty test) is always 1 and
    excluded from `max_bias`.
    """

    m: int
    biases: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.biases.size != 1 << self.m:
            raise DimensionError("spectrum table has wrong size")

    @property
    def max_bias(self) -> float:
        if self.m == 0:
            return 0.0
        return float(self.biases[1:].max())

    @property
    def argmax_subset(self) -> int:
        if self.m == 0:
            return 0
        return 1 + int(self.biases[1:].argmax())

    def bias(self, subset: int) -> float:
        if not 0 < subset < (1 << self.m):
            raise ValidationError("subset mask must be nonempty and within width")
        return float(self.biases[subset])

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "max_bias": self.max_bias,
            "argmax_subset": self.argmax_subset,
            "biases": {str(s): float(self.biases[s]) for s in range(1, 1 << self.m)},
        }


def linear_test_bias(d: Distribution) -> BiasSpectrum:
    """Exhaustive bias spectrum via one Walsh-Hadamard pass."""
    if d.m > SPECTRUM_M_CAP:
        raise WorkCapExceeded(required=1 << d.m, cap=1 << SPECTRUM_M_CAP,
                              what="bias spectrum width")
    coeffs = fwht(d.as_table())
    return BiasSpectrum(m=d.m, biases=np.abs(coeffs))


@dataclass(frozen=True)
class VaziraniReport:
    max_bias: float
    sd: float
    bound: float
    holds: bool

    def to_json(self) -> dict:
        return {"max_bias": self.max_bias, "sd": self.sd,
                "bound": self.bound, "holds": self.holds}


def vazirani_check(d: Distribution, tol: float = 1e-12) -> VaziraniReport:
    """Check SD(D, U_m) <= max parity bias * 2^{m/2}.

    This inequality is a theorem; `holds=False` on any input indicates an
    implementation bug, and tests treat it as build-breaking.
    """
    spec = linear_test_bias(d)
    sd = statistical_distance(d, Distribution.uniform(d.m))
    bound = spec.max_bias * math.sqrt(2.0 ** d.m)
    return VaziraniReport(max_bias=spec.max_bias, sd=sd, bound=bound,
                          holds=sd <= bound + tol)


def parseval_bound(d: Distribution) -> float:
    """(1/2) * sqrt(sum of squared parity biases); an upper bound on
    SD(D, U_m) that is never weaker than the max-bias bound."""
    spec = linear_test_bias(d)
    return 0.5 * float(np.sqrt(np.square(spec.biases[1:]).sum()))


@dataclass(frozen=True)
class XorBiasReport:
    """Exact distance from uniform of the XOR of independent bits.

    `distance` is the statistical distance of the XOR bit from uniform,
    computed by the product identity (1/2) * prod(2 e_i) where e_i are the
    per-bit distances.  When all inputs share a common distance e, the
    report also evaluates the literal bound e^t; that bound is strictly
    smaller than the exact value for t >= 2 and 0 < e < 1/2, so
    `literal_holds` is then False.  The discrepancy is reported, not
    enforced.
    """

    distance: float
    factors: tuple[float, ...]
    literal_bound: float | None
    literal_holds: bool | None

    def to_json(self) -> dict:
        return {
            "distance": self.distance,
            "factors": list(self.factors),
            "literal_bound": self.literal_bound,
            "literal_holds": self.literal_holds,
        }


def xor_bias_product(distances) -> XorBiasReport:
    """Distance from uniform of the XOR of independent bits.

    Each input is the statistical distance of one bit from uniform, in
    [0, 1/2].  The XOR's distance is exactly (1/2) * prod(2 e_i): writing
    each bit as Pr[1] = 1/2 +- e_i, the XOR's deviation multiplies.
    """
    ds = [float(e) for e in distances]
    if not ds:
        raise ValidationError("need at least one bit")
    for e in ds:
        if not 0.0 <= e <= 0.5:
            raise ValidationError(f"per-bit distance {e} outside [0, 1/2]")
    prod = 1.0
    for e in ds:
        prod *= 2.0 * e
    distance = 0.5 * prod
    literal = None
    literal_holds = None
    if len(set(ds)) == 1:
        literal = ds[0] ** len(ds)
        literal_holds = distance <= literal + 1e-15
    return XorBiasReport(distance=distance, factors=tuple(ds),
                         literal_bound=literal, literal_holds=literal_holds)


def xor_distance_brute(distances) -> float:
    """Independent oracle for xor_bias_product: enumerate the joint
    distribution of the bits (each with Pr[1] = 1/2 - e_i, the sign being
    irrelevant to the XOR's distance) and measure the XOR bit directly."""
    ds = [float(e) for e in distances]
    t = len(ds)
    p1 = 0.0
    for outcome in range(1 << t):
        pr = 1.0
        parity = 0
        for i, e in enumerate(ds):
            bit = (outcome >> i) & 1
            pr *= (0.5 - e) if bit else (0.5 + e)
            parity ^= bit
        if parity:
            p1 += pr
    return abs(p1 - 0.5)


def required_samples(m: int) -> int:
    return EMPIRICAL_MIN_FACTOR * (1 << m)


def sd_to_uniform_empirical(samples, m: int, confidence: float = 0.99) -> Estimate:
    """Plug-in statistical distance of an empirical table from U_m.

    The interval combines a bounded-difference deviation term
    sqrt(ln(2/alpha) / (2N)) with a plug-in bias term (1/2) sqrt(2^m / N);
    the true SD lies inside with probability at least `confidence`.
    """
    if m > EMPIRICAL_M_CAP:
        raise WorkCapExceeded(required=1 << m, cap=1 << EMPIRICAL_M_CAP,
                              what="empirical SD width")
    xs = np.asarray(samples, dtype=np.int64)
    n = xs.size
    need = required_samples(m)
    if n < need:
        raise ValidationError(
            f"undersampled: got {n} samples, need at least {need} for m={m}")
    if xs.size and (xs.min() < 0 or xs.max() >= (1 << m)):
        raise ValidationError("sample outcomes outside 0..2^m-1")
    table = np.bincount(xs, minlength=1 << m) / n
    est = 0.5 * float(np.abs(table - 1.0 / (1 << m)).sum())
    alpha = 1.0 - confidence
    dev = math.sqrt(math.log(2.0 / alpha) / (2.0 * n))
    bias_term = 0.5 * math.sqrt((1 << m) / n)
    bound = dev + bias_term
    return Estimate(value=est, lo=max(0.0, est - bound), hi=min(1.0, est + bound),
                    samples=n, confidence=confidence, method="plug-in")
