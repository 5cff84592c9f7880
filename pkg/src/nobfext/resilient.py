"""Boolean functions with measurable bias and coalition influence.

A coalition Q is influential on a fixing of the remaining coordinates when
both output values stay attainable by varying the Q-coordinates; the
influence of Q is the probability of that event over a random fixing.
Majority, tribes, and recursive majority are provided as concrete
functions whose bias and influence are classical and small enough to
enumerate; an explicit-table function lets anything else plug in.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from . import prng
from .bitops import scatter_bits, scatter_bits_vec
from .errors import DimensionError, ValidationError, WorkCapExceeded
from .gf2 import BitVector
from .sources import Distribution, GoodBitDistribution, UniformBits, work_cap
from .stats import Estimate, binomial_estimate

TABLE_ARITY_CAP = 20
MC_COALITION_CAP = 20
SUBSET_ENUM_CAP = 10 ** 6
BATCH_ARITY_CAP = 64


class ResilientFunction:
    """Total deterministic boolean function on {0,1}^arity."""

    arity: int
    kind: str

    def eval_int(self, bits: int) -> int:
        """Value on a packed input (bit i of `bits` is coordinate i)."""
        raise NotImplementedError

    def eval(self, x: BitVector) -> int:
        if len(x) != self.arity:
            raise DimensionError(f"input has {len(x)} bits, arity is {self.arity}")
        return self.eval_int(x.bits)

    def eval_batch(self, xs: np.ndarray) -> np.ndarray:
        """Vectorized eval on packed uint64 inputs (arity <= 64)."""
        if self.arity > BATCH_ARITY_CAP:
            raise WorkCapExceeded(required=self.arity, cap=BATCH_ARITY_CAP,
                                  what="packed batch arity")
        xs = np.asarray(xs, dtype=np.uint64)
        out = np.empty(xs.shape, dtype=np.uint8)
        for i, v in enumerate(xs.ravel()):
            out.ravel()[i] = self.eval_int(int(v))
        return out

    def truth_table(self) -> np.ndarray:
        if self.arity > TABLE_ARITY_CAP:
            raise WorkCapExceeded(required=1 << self.arity,
                                  cap=1 << TABLE_ARITY_CAP,
                                  what="truth table size")
        return self.eval_batch(np.arange(1 << self.arity, dtype=np.uint64))

    def descriptor(self) -> dict:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}(arity={self.arity})"


class Majority(ResilientFunction):
    """Strict majority; even arities are rejected rather than tie-broken."""

    kind = "majority"

    def __init__(self, arity: int):
        if arity < 1 or arity % 2 == 0:
            raise ValidationError("majority needs odd arity >= 1")
        self.arity = arity

    def eval_int(self, bits: int) -> int:
        return 1 if bits.bit_count() > self.arity // 2 else 0

    def eval_batch(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.uint64)
        return (np.bitwise_count(xs) > self.arity // 2).astype(np.uint8)

    def descriptor(self) -> dict:
        return {"kind": self.kind, "arity": self.arity}


class Tribes(ResilientFunction):
    """OR of s disjoint ANDs of width w (arity = w * s)."""

    kind = "tribes"

    def __init__(self, w: int, s: int):
        if w < 1 or s < 1:
            raise ValidationError("tribes needs w >= 1 and s >= 1")
        self.w = w
        self.s = s
        self.arity = w * s
        self._masks = [((1 << w) - 1) << (i * w) for i in range(s)]

    def eval_int(self, bits: int) -> int:
        for m in self._masks:
            if bits & m == m:
                return 1
        return 0

    def eval_batch(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.uint64)
        out = np.zeros(xs.shape, dtype=np.uint8)
        for m in self._masks:
            mm = np.uint64(m)
            out |= (xs & mm) == mm
        return out

    def descriptor(self) -> dict:
        return {"kind": self.kind, "w": self.w, "s": self.s}


class RecursiveMajority3(ResilientFunction):
    """Depth-d ternary majority tree on 3^d leaves (depth 1 = majority-3)."""

    kind = "recursive-majority-3"

    def __init__(self, depth: int):
        if depth < 1:
            raise ValidationError("depth must be >= 1")
        self.depth = depth
        self.arity = 3 ** depth

    def eval_int(self, bits: int) -> int:
        vals = [(bits >> i) & 1 for i in range(self.arity)]
        while len(vals) > 1:
            vals = [1 if vals[i] + vals[i + 1] + vals[i + 2] >= 2 else 0
                    for i in range(0, len(vals), 3)]
        return vals[0]

    def eval_batch(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.uint64)
        vals = np.stack([((xs >> np.uint64(i)) & np.uint64(1)).astype(np.uint8)
                         for i in range(self.arity)])
        while vals.shape[0] > 1:
            trip = vals.reshape(-1, 3, *vals.shape[1:])
            vals = ((trip.sum(axis=1, dtype=np.uint8)) >= 2).astype(np.uint8)
        return vals[0]

    def descriptor(self) -> dict:
        return {"kind": self.kind, "depth": self.depth}


class TableFunction(ResilientFunction):
    """Explicit truth table, the escape hatch for everything else."""

    kind = "explicit-table"

    def __init__(self, arity: int, table):
        if not 0 <= arity <= TABLE_ARITY_CAP:
            raise ValidationError(f"explicit table arity capped at {TABLE_ARITY_CAP}")
        tab = np.asarray(table, dtype=np.uint8)
        if tab.size != 1 << arity:
            raise DimensionError("table length must be 2^arity")
        if tab.max(initial=0) > 1:
            raise ValidationError("table entries must be bits")
        self.arity = arity
        self._table = tab

    @classmethod
    def from_values_hex(cls, arity: int, s: str) -> "TableFunction":
        v = BitVector.from_hex(1 << arity, s)
        return cls(arity, [(v.bits >> i) & 1 for i in range(1 << arity)])

    @classmethod
    def constant(cls, arity: int, value: int) -> "TableFunction":
        return cls(arity, np.full(1 << arity, value & 1, dtype=np.uint8))

    def eval_int(self, bits: int) -> int:
        return int(self._table[bits])

    def eval_batch(self, xs: np.ndarray) -> np.ndarray:
        return self._table[np.asarray(xs, dtype=np.uint64).astype(np.int64)]

    def truth_table(self) -> np.ndarray:
        return self._table.copy()

    def descriptor(self) -> dict:
        packed = 0
        for i, b in enumerate(self._table):
            packed |= int(b) << i
        return {"kind": self.kind, "arity": self.arity,
                "table_hex": BitVector(1 << self.arity, packed).to_hex()}


def function_from_descriptor(d: dict) -> ResilientFunction:
    kind = d.get("kind")
    if kind == "majority":
        return Majority(int(d["arity"]))
    if kind == "tribes":
        return Tribes(int(d["w"]), int(d["s"]))
    if kind == "recursive-majority-3":
        return RecursiveMajority3(int(d["depth"]))
    if kind == "explicit-table":
        return TableFunction.from_values_hex(int(d["arity"]), d["table_hex"])
    raise ValidationError(f"unknown function kind {kind!r}")


def is_monotone(f: ResilientFunction) -> bool:
    """True when no single 0->1 input flip can drop the output."""
    t = f.truth_table()
    idx = np.arange(t.size, dtype=np.int64)
    for j in range(f.arity):
        clear = idx[(idx >> j) & 1 == 0]
        if np.any(t[clear | (1 << j)] < t[clear]):
            return False
    return True


def bias_under(f: ResilientFunction, d: Distribution):
    """|E_D[f] - 1/2|; exact float for table distributions, an Estimate
    with a 99% interval for empirical ones."""
    if d.m != f.arity:
        raise DimensionError(f"distribution width {d.m} != arity {f.arity}")
    if d.is_exact:
        p1 = float(np.dot(f.truth_table().astype(np.float64), d.as_table()))
        return abs(p1 - 0.5)
    samples = np.asarray(d.samples, dtype=np.uint64)
    vals = f.eval_batch(samples)
    est = binomial_estimate(int(vals.sum()), vals.size, confidence=0.99)
    lo = 0.0 if est.lo <= 0.5 <= est.hi else min(abs(est.lo - 0.5), abs(est.hi - 0.5))
    hi = max(abs(est.lo - 0.5), abs(est.hi - 0.5))
    return Estimate(value=abs(est.value - 0.5), lo=lo, hi=hi,
                    samples=est.samples, confidence=0.99, method="clopper-pearson")


def _split_positions(arity: int, q_set) -> tuple[list[int], list[int]]:
    qpos = sorted(set(int(i) for i in q_set))
    if qpos and (qpos[0] < 0 or qpos[-1] >= arity):
        raise ValidationError("coalition positions outside 0..arity-1")
    rest = [i for i in range(arity) if i not in set(qpos)]
    return qpos, rest


def _undetermined_mask(f: ResilientFunction, qpos: list[int], rest: list[int],
                       fixings: np.ndarray) -> np.ndarray:
    """Boolean mask over `fixings` (packed bits of the rest-coordinates):
    True where varying the qpos-coordinates can still produce both outputs."""
    base = scatter_bits_vec(fixings, rest)
    any0 = np.zeros(fixings.shape, dtype=bool)
    any1 = np.zeros(fixings.shape, dtype=bool)
    for comp in range(1 << len(qpos)):
        filled = base | np.uint64(scatter_bits(comp, qpos))
        vals = f.eval_batch(filled).astype(bool)
        any1 |= vals
        any0 |= ~vals
    return any0 & any1


def influence_exact(f: ResilientFunction, q_set, d_good: GoodBitDistribution) -> float:
    """Probability over d_good-fixings of the non-coalition coordinates
    that f's value still depends on the coalition."""
    qpos, rest = _split_positions(f.arity, q_set)
    if not qpos:
        return 0.0
    if d_good.n_good != len(rest):
        raise DimensionError(
            f"fixing distribution covers {d_good.n_good} coordinates, "
            f"need {len(rest)}")
    space = d_good.seed_space_size
    units = (space if space is not None else 1 << len(rest)) << len(qpos)
    cap = work_cap()
    if units > cap:
        raise WorkCapExceeded(required=units, cap=cap,
                              what="influence enumeration")
    weights = d_good.exact_table()
    support = np.nonzero(weights)[0]
    undet = _undetermined_mask(f, qpos, rest, support.astype(np.uint64))
    return float(weights[support[undet]].sum())


def influence_max_exact(f: ResilientFunction, q: int,
                        d_good_family: GoodBitDistribution) -> tuple[float, tuple[int, ...]]:
    """Maximum influence over all size-q coalitions, with a maximizing set.

    The same fixing distribution is reused for every coalition, its
    coordinates mapped onto the non-coalition positions in increasing
    order.
    """
    if not 0 <= q <= f.arity:
        raise ValidationError("coalition size outside 0..arity")
    if q == 0:
        return 0.0, ()
    n_subsets = math.comb(f.arity, q)
    if n_subsets > SUBSET_ENUM_CAP:
        raise WorkCapExceeded(required=n_subsets, cap=SUBSET_ENUM_CAP,
                              what="coalition enumeration (use influence_mc)")
    best = -1.0
    witness: tuple[int, ...] = ()
    for subset in itertools.combinations(range(f.arity), q):
        val = influence_exact(f, subset, d_good_family)
        if val > best:
            best, witness = val, subset
            if best >= 1.0:
                break
    return best, witness


def undetermined_count(f: ResilientFunction, q_set, d_good: GoodBitDistribution,
                       seed: int, start: int, count: int) -> int:
    """Number of sampled fixings (counters start..start+count-1) on which
    f stays undetermined.  Counter-addressed, so any chunking of a range
    sums to the same total; this is the building block influence_mc and
    the command-line workers share."""
    qpos, rest = _split_positions(f.arity, q_set)
    if len(qpos) > MC_COALITION_CAP:
        raise WorkCapExceeded(required=1 << len(qpos), cap=1 << MC_COALITION_CAP,
                              what="undetermination scan")
    if not qpos:
        return 0
    if d_good.n_good != len(rest):
        raise DimensionError(
            f"fixing distribution covers {d_good.n_good} coordinates, "
            f"need {len(rest)}")
    fixings = d_good.sample_batch(seed, 0, start, count)
    return int(_undetermined_mask(f, qpos, rest, fixings).sum())


def influence_mc(f: ResilientFunction, q_set, d_good: GoodBitDistribution,
                 samples: int, seed: int) -> Estimate:
    """Monte-Carlo influence with a 99% Clopper-Pearson interval."""
    if not sorted(set(int(i) for i in q_set)):
        return Estimate(value=0.0, lo=0.0, hi=0.0, samples=samples,
                        confidence=1.0, method="exact")
    if samples < 1:
        raise ValidationError("need at least one sample")
    k = undetermined_count(f, q_set, d_good, seed, 0, samples)
    return binomial_estimate(k, samples, confidence=0.99)


def default_block_function(arity: int) -> ResilientFunction:
    """Majority for odd arities, two-wide tribes for even ones."""
    if arity % 2 == 1:
        return Majority(arity)
    return Tribes(2, arity // 2)


def uniform_fixing(n_rest: int) -> UniformBits:
    return UniformBits(n_rest)
