"""Non-oblivious bit-fixing sources.

A source on n bits is described by a set of "bad" coordinates, a
distribution over the remaining "good" coordinates, and an adversary that
fills the bad coordinates as an arbitrary deterministic function of the
realized good bits.  The module provides good-bit generators (uniform,
exactly t-wise independent via random low-degree polynomials over GF(2^e),
small-bias via the powering construction, explicit tables), pluggable
adversaries, seeded sampling, and exact enumeration of the full source
distribution at desk scale.

Enumeration caps: exact oracles require a good-bit seed space of at most
2^24 and n <= 24; the general work-unit budget (default 2^28) can be
overridden with the NOBF_WORK_CAP environment variable.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from . import prng
from .bitops import gather_bits_vec, scatter_bits, scatter_bits_vec
from .errors import DimensionError, ValidationError, WorkCapExceeded
from .gf2 import BitVector

ENUM_SEED_BITS_CAP = 24   # exact oracles enumerate at most 2^24 seeds
ENUM_N_CAP = 24           # and tabulate at most 2^24 outcomes
DEFAULT_WORK_CAP = 1 << 28


def work_cap() -> int:
    """Work-unit budget for exact enumerations (env NOBF_WORK_CAP overrides)."""
    raw = os.environ.get("NOBF_WORK_CAP")
    if raw is None:
        return DEFAULT_WORK_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValidationError(f"NOBF_WORK_CAP={raw!r} is not an integer") from exc
    if cap <= 0:
        raise ValidationError("NOBF_WORK_CAP must be positive")
    return cap


# ---------------------------------------------------------------------------
# GF(2^e) arithmetic for the generator constructions


def _poly_mod(a: int, b: int) -> int:
    bl = b.bit_length()
    while a.bit_length() >= bl:
        a ^= b << (a.bit_length() - bl)
    return a


@lru_cache(maxsize=None)
def irreducible_poly(e: int) -> int:
    """Smallest irreducible polynomial of degree e over GF(2), as a bitmask.

    Found by trial division rather than a hard-coded table; cached per
    degree.  Constant term must be 1 (x never divides an irreducible of
    degree >= 1 other than x itself).
    """
    if e < 1:
        raise ValidationError("field degree must be >= 1")
    if e == 1:
        return 0b11  # x + 1
    for low in range(1, 1 << e, 2):
        cand = (1 << e) | low
        if all(
            _poly_mod(cand, q) != 0
            for d in range(1, e // 2 + 1)
            for q in range(1 << d, 1 << (d + 1))
        ):
            return cand
    raise AssertionError("unreachable: irreducibles exist for every degree")


def gf2e_mul(a: int, b: int, e: int, poly: int) -> int:
    """Product in GF(2^e) with the given reduction polynomial."""
    res = 0
    top = 1 << e
    while b:
        if b & 1:
            res ^= a
        a <<= 1
        if a & top:
            a ^= poly
        b >>= 1
    return res


def gf2e_mul_vec(a: np.ndarray, b: np.ndarray, e: int, poly: int) -> np.ndarray:
    """Vectorized GF(2^e) product (shift-and-add with inline reduction)."""
    res = np.zeros(a.shape, dtype=np.uint64)
    aa = a.astype(np.uint64, copy=True)
    bb = np.broadcast_to(np.asarray(b, dtype=np.uint64), a.shape).copy()
    one = np.uint64(1)
    top = np.uint64(e)
    p = np.uint64(poly)
    for _ in range(e):
        res ^= np.where(bb & one, aa, np.uint64(0))
        aa <<= one
        aa ^= np.where((aa >> top) & one, p, np.uint64(0))
        bb >>= one
    return res


# ---------------------------------------------------------------------------
# Distributions over {0,1}^m

PROB_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Distribution:
    """Exact probability table or seeded sample batch over m-bit strings.

    Exact tables index outcomes by their packed-int value (coordinate i =
    bit i).  Empirical distributions keep the raw samples plus the seed
    that produced them; they are always flagged as estimates.
    """

    m: int
    probs: np.ndarray | None = None
    samples: np.ndarray | None = None
    seed: int | None = None

    @property
    def kind(self) -> str:
        return "exact" if self.probs is not None else "empirical"

    @property
    def is_exact(self) -> bool:
        return self.probs is not None

    @classmethod
    def exact(cls, m: int, probs) -> "Distribution":
        table = np.asarray(probs, dtype=np.float64)
        if table.shape != (1 << m,):
            raise DimensionError(f"table of length {table.size} for width {m}")
        if np.any(table < 0):
            raise ValidationError("probabilities must be nonnegative")
        total = float(table.sum())
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValidationError(f"probabilities sum to {total!r}, not 1 within {PROB_SUM_TOL}")
        return cls(m=m, probs=table)

    @classmethod
    def empirical(cls, m: int, samples, seed: int | None = None) -> "Distribution":
        arr = np.asarray(samples, dtype=np.uint64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValidationError("empirical distribution needs a nonempty 1-d sample array")
        if m < 64 and np.any(arr >> np.uint64(m)):
            raise ValidationError(f"sample outside width {m}")
        return cls(m=m, samples=arr, seed=seed)

    @classmethod
    def uniform(cls, m: int) -> "Distribution":
        return cls.exact(m, np.full(1 << m, 1.0 / (1 << m)))

    @classmethod
    def point_mass(cls, m: int, outcome: int) -> "Distribution":
        table = np.zeros(1 << m)
        table[outcome] = 1.0
        return cls.exact(m, table)

    @property
    def n_samples(self) -> int:
        return 0 if self.samples is None else int(self.samples.size)

    def as_table(self) -> np.ndarray:
        """Exact table, or the plug-in frequency table for empirical data."""
        if self.probs is not None:
            return self.probs
        counts = np.bincount(self.samples.astype(np.int64), minlength=1 << self.m)
        return counts / self.samples.size

    def marginal(self, positions: Sequence[int]) -> "Distribution":
        """Exact marginal on the given coordinates (positions[j] -> bit j)."""
        if self.probs is None:
            raise ValidationError("marginal requires an exact table")
        pos = list(positions)
        if any(p < 0 or p >= self.m for p in pos):
            raise ValidationError(f"position outside width {self.m}")
        outcomes = np.arange(1 << self.m, dtype=np.uint64)
        projected = gather_bits_vec(outcomes, pos).astype(np.int64)
        table = np.bincount(projected, weights=self.probs, minlength=1 << len(pos))
        return Distribution.exact(len(pos), table)


# ---------------------------------------------------------------------------
# Good-bit distributions


class GoodBitDistribution:
    """Distribution of the good coordinates of an NOBF source.

    Generator-backed kinds expose a finite seed space: ``outcome_for_seed``
    maps each seed to an n_good-bit outcome, and a uniformly random seed
    induces the distribution.  Explicit tables have no seed space and are
    sampled by inverse CDF.
    """

    kind: str = "abstract"
    n_good: int
    seed_bits: int | None  # log2 of the seed space; None for explicit tables

    @property
    def seed_space_size(self) -> int | None:
        return None if self.seed_bits is None else 1 << self.seed_bits

    @property
    def is_uniform(self) -> bool:
        return False

    def claimed_twise(self) -> int | None:
        """Independence parameter this generator guarantees, if derivable."""
        return None

    def outcome_for_seed(self, seed: int) -> int:
        raise NotImplementedError

    def outcomes_for_seeds(self, seeds: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check_seed(self, seed: int) -> None:
        if self.seed_bits is None:
            raise ValidationError(f"{self.kind} distribution has no seed space")
        if not 0 <= seed < (1 << self.seed_bits):
            raise ValidationError(
                f"seed {seed} outside the {2 ** self.seed_bits}-element seed space"
            )

    def exact_table(self) -> np.ndarray:
        """Exact probability table over 2^n_good outcomes (desk scale only)."""
        if self.n_good > ENUM_N_CAP:
            raise WorkCapExceeded("good-bit table too wide", 2 ** self.n_good, 2 ** ENUM_N_CAP)
        if self.seed_bits is None:
            raise NotImplementedError
        if self.seed_bits > ENUM_SEED_BITS_CAP:
            raise WorkCapExceeded(
                "seed space too large to enumerate", 2 ** self.seed_bits, 2 ** ENUM_SEED_BITS_CAP
            )
        seeds = np.arange(1 << self.seed_bits, dtype=np.uint64)
        outcomes = self.outcomes_for_seeds(seeds).astype(np.int64)
        counts = np.bincount(outcomes, minlength=1 << self.n_good)
        return counts / counts.sum()

    def sample_batch(self, seed: int, stream: int, start: int, count: int) -> np.ndarray:
        """count outcomes for counters start..start+count-1; chunking-invariant."""
        if self.seed_bits is None:
            raise NotImplementedError
        if self.seed_bits == 0:
            gen_seeds = np.zeros(count, dtype=np.uint64)
        else:
            gen_seeds = prng.low_bits(seed, stream, start, count, self.seed_bits)
        return self.outcomes_for_seeds(gen_seeds)

    def descriptor(self) -> dict:
        raise NotImplementedError


class UniformBits(GoodBitDistribution):
    """Uniform good bits; the seed simply is the outcome."""

    kind = "uniform"

    def __init__(self, n_good: int):
        if n_good < 0:
            raise ValidationError("negative bit count")
        self.n_good = n_good
        self.seed_bits = n_good

    @property
    def is_uniform(self) -> bool:
        return True

    def claimed_twise(self) -> int | None:
        return self.n_good

    def outcome_for_seed(self, seed: int) -> int:
        self._check_seed(seed)
        return seed

    def outcomes_for_seeds(self, seeds: np.ndarray) -> np.ndarray:
        return seeds.astype(np.uint64, copy=False)

    def exact_table(self) -> np.ndarray:
        if self.n_good > ENUM_N_CAP:
            raise WorkCapExceeded("good-bit table too wide", 2 ** self.n_good, 2 ** ENUM_N_CAP)
        return np.full(1 << self.n_good, 1.0 / (1 << self.n_good))

    def descriptor(self) -> dict:
        return {"kind": "uniform", "n_good": self.n_good}


class ExactTwise(GoodBitDistribution):
    """Exactly t-wise independent bits from random degree-(t-1) polynomials.

    A seed supplies t coefficients in GF(2^e); bit i is the low bit of the
    polynomial evaluated at the field element with integer value i.  Any t
    evaluation points determine a bijection between coefficient tuples and
    value tuples (Vandermonde), so every t-coordinate restriction is
    exactly uniform.  Requires 2^e >= n_good distinct points.
    """

    kind = "exact-twise"

    def __init__(self, n_good: int, t: int, field_bits: int | None = None):
        if t < 1:
            raise ValidationError("t must be >= 1")
        if n_good < 1:
            raise ValidationError("need at least one good bit")
        e_min = max(1, (n_good - 1).bit_length())
        e = e_min if field_bits is None else field_bits
        if (1 << e) < n_good:
            raise ValidationError(
                f"field of 2^{e} elements has fewer than n_good={n_good} points; "
                f"need field_bits >= {e_min}"
            )
        if e * t > 63:
            raise ValidationError(
                f"seed space of 2^{e * t} exceeds the 2^63 sampling limit; "
                f"reduce t (<= {63 // e} at field_bits={e}) or n_good"
            )
        self.n_good = n_good
        self.t = t
        self.field_bits = e
        self.seed_bits = e * t
        self._poly = irreducible_poly(e)

    def claimed_twise(self) -> int | None:
        return self.t

    def _coeffs(self, seed: int) -> list[int]:
        e, mask = self.field_bits, (1 << self.field_bits) - 1
        return [(seed >> (j * e)) & mask for j in range(self.t)]

    def outcome_for_seed(self, seed: int) -> int:
        self._check_seed(seed)
        coeffs = self._coeffs(seed)
        e, poly = self.field_bits, self._poly
        out = 0
        for i in range(self.n_good):
            acc = coeffs[-1]
            for c in reversed(coeffs[:-1]):
                acc = gf2e_mul(acc, i, e, poly) ^ c
            out |= (acc & 1) << i
        return out

    def outcomes_for_seeds(self, seeds: np.ndarray) -> np.ndarray:
        e, poly = self.field_bits, self._poly
        mask = np.uint64((1 << e) - 1)
        s = seeds.astype(np.uint64, copy=False)
        coeffs = [(s >> np.uint64(j * e)) & mask for j in range(self.t)]
        out = np.zeros(s.shape, dtype=np.uint64)
        for i in range(self.n_good):
            acc = coeffs[-1].copy()
            for c in reversed(coeffs[:-1]):
                acc = gf2e_mul_vec(acc, np.uint64(i), e, poly) ^ c
            out |= (acc & np.uint64(1)) << np.uint64(i)
        return out

    def descriptor(self) -> dict:
        return {
            "kind": "exact-twise",
            "n_good": self.n_good,
            "t": self.t,
            "field_bits": self.field_bits,
        }


class EpsBiased(GoodBitDistribution):
    """Small-bias bits via the powering construction.

    A seed supplies x, y in GF(2^e); bit i is the GF(2) inner product of
    the bit representations of x^i and y.  The parity over a nonempty
    index set S equals <p_S(x), y> for the nonzero polynomial
    p_S(X) = sum_{i in S} X^i, which is unbiased unless x is one of its
    at most n_good-1 roots, so every linear test has bias at most
    (n_good - 1) / 2^e <= epsilon.
    """

    kind = "eps-biased"

    def __init__(self, n_good: int, epsilon: float, field_bits: int | None = None):
        if n_good < 1:
            raise ValidationError("need at least one good bit")
        if not 0 < epsilon <= 1:
            raise ValidationError("epsilon must be in (0, 1]")
        if field_bits is None:
            e = 1
            while (n_good - 1) / (1 << e) > epsilon:
                e += 1
        else:
            e = field_bits
            if (n_good - 1) / (1 << e) > epsilon:
                raise ValidationError(
                    f"field_bits={e} gives bias bound {(n_good - 1) / (1 << e):g} > epsilon"
                )
        if 2 * e > 63:
            raise ValidationError(
                f"seed space of 2^{2 * e} exceeds the 2^63 sampling limit; relax epsilon"
            )
        self.n_good = n_good
        self.epsilon = float(epsilon)
        self.field_bits = e
        self.seed_bits = 2 * e
        self._poly = irreducible_poly(e)

    def outcome_for_seed(self, seed: int) -> int:
        self._check_seed(seed)
        e, poly = self.field_bits, self._poly
        x = seed & ((1 << e) - 1)
        y = seed >> e
        out = 0
        xi = 1
        for i in range(self.n_good):
            out |= ((xi & y).bit_count() & 1) << i
            xi = gf2e_mul(xi, x, e, poly)
        return out

    def outcomes_for_seeds(self, seeds: np.ndarray) -> np.ndarray:
        e, poly = self.field_bits, self._poly
        s = seeds.astype(np.uint64, copy=False)
        x = s & np.uint64((1 << e) - 1)
        y = s >> np.uint64(e)
        out = np.zeros(s.shape, dtype=np.uint64)
        xi = np.ones(s.shape, dtype=np.uint64)
        for i in range(self.n_good):
            bit = np.bitwise_count(xi & y).astype(np.uint64) & np.uint64(1)
            out |= bit << np.uint64(i)
            xi = gf2e_mul_vec(xi, x, e, poly)
        return out

    def descriptor(self) -> dict:
        return {
            "kind": "eps-biased",
            "n_good": self.n_good,
            "epsilon": self.epsilon,
            "field_bits": self.field_bits,
        }


class ExplicitTable(GoodBitDistribution):
    """Good bits drawn from an explicit probability table (no seed space)."""

    kind = "explicit-table"

    def __init__(self, probs):
        table = np.asarray(probs, dtype=np.float64)
        n_good = max(0, int(table.size).bit_length() - 1)
        if table.ndim != 1 or table.size != 1 << n_good:
            raise ValidationError("table length must be a power of two")
        if np.any(table < 0):
            raise ValidationError("probabilities must be nonnegative")
        total = float(table.sum())
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValidationError(f"probabilities sum to {total!r}, not 1 within {PROB_SUM_TOL}")
        self.n_good = n_good
        self.seed_bits = None
        self.probs = table
        self._cdf = np.cumsum(table)

    def exact_table(self) -> np.ndarray:
        return self.probs

    def sample_batch(self, seed: int, stream: int, start: int, count: int) -> np.ndarray:
        u = prng.uniform01(seed, stream, start, count)
        idx = np.searchsorted(self._cdf, u, side="right")
        return np.minimum(idx, (1 << self.n_good) - 1).astype(np.uint64)

    def outcome_for_seed(self, seed: int) -> int:
        # No generator seed space; one deterministic inverse-CDF draw keyed
        # by the given integer so sample_nobf stays total for this kind.
        return int(self.sample_batch(seed, 0, 0, 1)[0])

    def descriptor(self) -> dict:
        return {"kind": "explicit-table", "probs": [float(p) for p in self.probs]}


def good_dist_from_descriptor(d: dict) -> GoodBitDistribution:
    kind = d.get("kind")
    if kind == "uniform":
        return UniformBits(int(d["n_good"]))
    if kind == "exact-twise":
        return ExactTwise(int(d["n_good"]), int(d["t"]), d.get("field_bits"))
    if kind == "eps-biased":
        return EpsBiased(int(d["n_good"]), float(d["epsilon"]), d.get("field_bits"))
    if kind == "explicit-table":
        return ExplicitTable(d["probs"])
    raise ValidationError(f"unknown good-bit distribution kind {kind!r}")


# Operation-level wrappers matching the module surface.

def twise_sample(n: int, t: int, seed: int, field_bits: int | None = None) -> BitVector:
    """The seed -> n-bit map of the exact t-wise generator."""
    gen = ExactTwise(n, t, field_bits)
    return BitVector(n, gen.outcome_for_seed(seed))


def epsbiased_sample(n: int, epsilon: float, seed: int, field_bits: int | None = None) -> BitVector:
    """The seed -> n-bit map of the small-bias generator."""
    gen = EpsBiased(n, epsilon, field_bits)
    return BitVector(n, gen.outcome_for_seed(seed))


@dataclass(frozen=True)
class TwiseReport:
    ok: bool
    worst_subset: tuple[int, ...] | None
    worst_distance: float


def verify_twise(dist: GoodBitDistribution, n: int, t: int) -> TwiseReport:
    """Check that every t-coordinate marginal is exactly uniform.

    Exhaustive over all C(n, t) subsets; rejected when C(n, t) * 2^t
    exceeds the work cap.  The report carries the worst subset (0-based)
    and its statistical distance from uniform.
    """
    if n != dist.n_good:
        raise DimensionError(f"distribution is over {dist.n_good} bits, not {n}")
    if not 1 <= t <= n:
        raise ValidationError(f"t={t} outside 1..{n}")
    units = math.comb(n, t) * (1 << t)
    cap = work_cap()
    if units > cap:
        raise WorkCapExceeded("t-wise verification too large; shrink n or t", units, cap)

    table = dist.exact_table()
    outcomes = np.arange(table.size, dtype=np.uint64)
    worst_sd = 0.0
    worst_subset: tuple[int, ...] | None = None
    target = 1.0 / (1 << t)
    for subset in combinations(range(n), t):
        vals = gather_bits_vec(outcomes, subset).astype(np.int64)
        marg = np.bincount(vals, weights=table, minlength=1 << t)
        sd = 0.5 * float(np.abs(marg - target).sum())
        if sd > worst_sd:
            worst_sd = sd
            worst_subset = subset
    return TwiseReport(ok=worst_sd <= 1e-12, worst_subset=worst_subset, worst_distance=worst_sd)


# ---------------------------------------------------------------------------
# Adversaries


class AdversaryStrategy:
    """Deterministic map from the realized good bits to the bad bits.

    Bad-bit results are packed with bit j = value at the j-th smallest bad
    position.  Strategies see only the good bits; the brute-force-worst
    search (in the extractor module) fixes its target before searching and
    resolves to an explicit table.
    """

    kind: str = "abstract"
    description: str = ""

    def bad_bits(self, good: int, n_good: int, q: int) -> int:
        raise NotImplementedError

    def bad_bits_batch(self, goods: np.ndarray, n_good: int, q: int) -> np.ndarray:
        # Generic fallback; subclasses override with vectorized forms.
        return np.array(
            [self.bad_bits(int(g), n_good, q) for g in goods], dtype=np.uint64
        )

    def descriptor(self) -> dict:
        raise NotImplementedError


class ConstantAdversary(AdversaryStrategy):
    kind = "constant"

    def __init__(self, pattern: int = 0):
        if pattern < 0:
            raise ValidationError("pattern must be nonnegative")
        self.pattern = pattern
        self.description = f"constant bad-bit pattern 0b{pattern:b}"

    def bad_bits(self, good: int, n_good: int, q: int) -> int:
        if self.pattern >> q:
            raise ValidationError(f"constant pattern 0b{self.pattern:b} wider than q={q}")
        return self.pattern

    def bad_bits_batch(self, goods: np.ndarray, n_good: int, q: int) -> np.ndarray:
        if self.pattern >> q:
            raise ValidationError(f"constant pattern 0b{self.pattern:b} wider than q={q}")
        return np.full(goods.shape, self.pattern, dtype=np.uint64)

    def descriptor(self) -> dict:
        return {"kind": "constant", "pattern": self.pattern}


class ParityOfGood(AdversaryStrategy):
    """Every bad bit equals the parity of all good bits."""

    kind = "parity-of-good"
    description = "all bad bits = XOR of the good bits"

    def bad_bits(self, good: int, n_good: int, q: int) -> int:
        return ((1 << q) - 1) if (good.bit_count() & 1) else 0

    def bad_bits_batch(self, goods: np.ndarray, n_good: int, q: int) -> np.ndarray:
        par = np.bitwise_count(goods.astype(np.uint64)).astype(np.uint64) & np.uint64(1)
        return par * np.uint64((1 << q) - 1)

    def descriptor(self) -> dict:
        return {"kind": "parity-of-good"}


class MajorityOfGood(AdversaryStrategy):
    """Every bad bit equals the strict majority of the good bits (ties -> 0)."""

    kind = "majority-of-good"
    description = "all bad bits = strict majority of the good bits"

    def bad_bits(self, good: int, n_good: int, q: int) -> int:
        return ((1 << q) - 1) if 2 * good.bit_count() > n_good else 0

    def bad_bits_batch(self, goods: np.ndarray, n_good: int, q: int) -> np.ndarray:
        maj = (2 * np.bitwise_count(goods.astype(np.uint64)) > n_good).astype(np.uint64)
        return maj * np.uint64((1 << q) - 1)

    def descriptor(self) -> dict:
        return {"kind": "majority-of-good"}


class TableAdversary(AdversaryStrategy):
    """Explicit function table good-outcome -> bad pattern.

    Missing entries (sentinel -1) are rejected at use, not silently zeroed.
    The brute-force-worst search resolves to this class with its label and
    provenance attached.
    """

    def __init__(self, n_good: int, entries, label: str = "explicit-function-table",
                 provenance: dict | None = None):
        size = 1 << n_good
        table = np.full(size, -1, dtype=np.int64)
        if isinstance(entries, dict):
            for k, v in entries.items():
                if not 0 <= int(k) < size:
                    raise ValidationError(f"table key {k} outside 0..{size - 1}")
                table[int(k)] = int(v)
        else:
            arr = np.asarray(entries, dtype=np.int64)
            if arr.shape != (size,):
                raise ValidationError(f"table must have 2^{n_good} entries, got {arr.size}")
            table = arr.copy()
        self.kind = label
        self.n_good = n_good
        self.table = table
        self.provenance = provenance or {}
        self.description = label

    def bad_bits(self, good: int, n_good: int, q: int) -> int:
        if n_good != self.n_good:
            raise DimensionError(f"table is over {self.n_good} good bits, not {n_good}")
        v = int(self.table[good])
        if v < 0:
            raise ValidationError(f"adversary table has no entry for good outcome {good}")
        if v >> q:
            raise ValidationError(f"table entry {v} wider than q={q}")
        return v

    def bad_bits_batch(self, goods: np.ndarray, n_good: int, q: int) -> np.ndarray:
        if n_good != self.n_good:
            raise DimensionError(f"table is over {self.n_good} good bits, not {n_good}")
        vals = self.table[goods.astype(np.int64)]
        if np.any(vals < 0):
            missing = int(goods[np.argmax(vals < 0)])
            raise ValidationError(f"adversary table has no entry for good outcome {missing}")
        return vals.astype(np.uint64)

    def descriptor(self) -> dict:
        d = {
            "kind": self.kind,
            "n_good": self.n_good,
            "table": [int(v) for v in self.table],
        }
        if self.provenance:
            d["provenance"] = self.provenance
        return d


def adversary_from_descriptor(d: dict) -> AdversaryStrategy:
    kind = d.get("kind")
    if kind == "constant":
        return ConstantAdversary(int(d.get("pattern", 0)))
    if kind == "parity-of-good":
        return ParityOfGood()
    if kind == "majority-of-good":
        return MajorityOfGood()
    if kind in ("explicit-function-table", "brute-force-worst"):
        return TableAdversary(
            int(d["n_good"]), d["table"], label=kind, provenance=d.get("provenance")
        )
    raise ValidationError(f"unknown adversary kind {kind!r}")


# ---------------------------------------------------------------------------
# The source spec and its oracles


class NobfSourceSpec:
    """Full description of a (q, t, gamma) non-oblivious bit-fixing source."""

    def __init__(self, n: int, bad_positions: Iterable[int],
                 good_dist: GoodBitDistribution,
                 adversary: AdversaryStrategy | None = None,
                 t: int | None = None, gamma: float = 0.0):
        bad = tuple(sorted(set(int(p) for p in bad_positions)))
        if bad and (bad[0] < 0 or bad[-1] >= n):
            raise ValidationError(f"bad positions outside 0..{n - 1}: {bad}")
        q = len(bad)
        if good_dist.n_good != n - q:
            raise DimensionError(
                f"good distribution covers {good_dist.n_good} bits but n - q = {n - q}"
            )
        if adversary is None:
            adversary = ConstantAdversary(0)
        if t is None:
            t = good_dist.claimed_twise() or 0
        if t < 0 or t > n - q:
            raise ValidationError(f"t={t} violates 0 <= t <= n - q = {n - q}")
        claimed = good_dist.claimed_twise()
        if claimed is not None and t > claimed:
            raise ValidationError(
                f"t={t} exceeds the generator's guaranteed independence {claimed}"
            )
        if gamma < 0:
            raise ValidationError("gamma must be nonnegative")
        badset = set(bad)
        self.n = n
        self.bad_positions = bad
        self.good_positions = tuple(i for i in range(n) if i not in badset)
        self.good_dist = good_dist
        self.adversary = adversary
        self.t = t
        self.gamma = float(gamma)

    @property
    def q(self) -> int:
        return len(self.bad_positions)

    def compose(self, good: int, bad: int) -> int:
        return scatter_bits(good, self.good_positions) | scatter_bits(bad, self.bad_positions)

    def compose_batch(self, goods: np.ndarray, bads: np.ndarray) -> np.ndarray:
        return scatter_bits_vec(goods, self.good_positions) | scatter_bits_vec(
            bads, self.bad_positions
        )

    def to_descriptor(self) -> dict:
        return {
            "format": "nobf-source-spec",
            "version": 1,
            "n": self.n,
            "bad_positions": list(self.bad_positions),
            "good_dist": self.good_dist.descriptor(),
            "adversary": self.adversary.descriptor(),
            "t": self.t,
            "gamma": self.gamma,
        }

    @classmethod
    def from_descriptor(cls, d: dict) -> "NobfSourceSpec":
        if d.get("format") not in (None, "nobf-source-spec"):
            raise ValidationError(f"not a source spec: format={d.get('format')!r}")
        return cls(
            n=int(d["n"]),
            bad_positions=d["bad_positions"],
            good_dist=good_dist_from_descriptor(d["good_dist"]),
            adversary=adversary_from_descriptor(d["adversary"]) if "adversary" in d else None,
            t=int(d["t"]) if "t" in d else None,
            gamma=float(d.get("gamma", 0.0)),
        )


def sample_nobf(spec: NobfSourceSpec, seed: int) -> BitVector:
    """One n-bit sample: good bits from the generator seed, bad bits from
    the adversary applied to the realized good bits."""
    good = spec.good_dist.outcome_for_seed(seed)
    bad = spec.adversary.bad_bits(good, spec.n - spec.q, spec.q)
    return BitVector(spec.n, spec.compose(good, bad))


def sample_nobf_batch(spec: NobfSourceSpec, seed: int, count: int,
                      stream: int = 0, start: int = 0) -> np.ndarray:
    """count samples addressed by (seed, stream, start..); identical results
    for any chunking of the counter range."""
    goods = spec.good_dist.sample_batch(seed, stream, start, count)
    bads = spec.adversary.bad_bits_batch(goods, spec.n - spec.q, spec.q)
    return spec.compose_batch(goods, bads)


def good_weights(spec: NobfSourceSpec) -> np.ndarray:
    """Exact probability of each good-bit outcome (desk-scale enumeration)."""
    return spec.good_dist.exact_table()


def enumerate_nobf(spec: NobfSourceSpec) -> Distribution:
    """Exact probability table of the full n-bit source.

    This is the oracle behind every desk-scale acceptance check; capped at
    n <= 24 and a good-bit seed space of 2^24.
    """
    if spec.n > ENUM_N_CAP:
        raise WorkCapExceeded("source too wide to enumerate", 2 ** spec.n, 2 ** ENUM_N_CAP)
    weights = good_weights(spec)
    support = np.nonzero(weights)[0]
    goods = support.astype(np.uint64)
    bads = spec.adversary.bad_bits_batch(goods, spec.n - spec.q, spec.q)
    outcomes = spec.compose_batch(goods, bads).astype(np.int64)
    table = np.bincount(outcomes, weights=weights[support], minlength=1 << spec.n)
    return Distribution.exact(spec.n, table)


def zeroed_counterpart(spec: NobfSourceSpec) -> NobfSourceSpec:
    """The same source with the bad bits pinned to 0, independent of the
    good bits (the comparison source used throughout the analysis)."""
    return NobfSourceSpec(
        n=spec.n,
        bad_positions=spec.bad_positions,
        good_dist=spec.good_dist,
        adversary=ConstantAdversary(0),
        t=spec.t,
        gamma=spec.gamma,
    )


# ---------------------------------------------------------------------------
# Sample-batch files: one JSON header line, then hex strings (LSB nibble first)


def write_sample_batch(path, spec: NobfSourceSpec, samples: np.ndarray, seed: int,
                       stream: int = 0) -> None:
    header = {
        "count": int(samples.size),
        "format": "nobf-samples",
        "n": spec.n,
        "seed": int(seed),
        "stream": int(stream),
    }
    width = max(1, -(-spec.n // 4))
    with open(path, "w") as fh:
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n")
        for s in samples:
            fh.write(format(int(s), f"0{width}x")[::-1] + "\n")


def read_sample_batch(path) -> tuple[dict, np.ndarray]:
    with open(path) as fh:
        header = json.loads(fh.readline())
        n = int(header["n"])
        samples = np.array(
            [BitVector.from_hex(n, line.strip()).bits for line in fh if line.strip()],
            dtype=np.uint64,
        )
    if samples.size != header.get("count", samples.size):
        raise ValidationError("sample count does not match header")
    return header, samples
