"""Block-partition extractor and its proof-mirroring diagnostics.

Pipeline: split the n-bit input into ell blocks of block_len bits, apply
one boolean function f per block to get y, keep the first r coordinates,
and compress through an [r, m, d] generator matrix: z = G y_used.

The diagnostics quantify the two steps the analysis rests on: the
probability that every block's output is already determined by the good
bits alone (fixedness), and the statistical distance between the output
and the output of the same source with its bad bits pinned to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .bitops import gather_bits_vec, scatter_bits_vec
from .codes import LinearCode, build_good_code, preset_code
from .errors import (DimensionError, SearchBudgetExceeded, ValidationError,
                     WorkCapExceeded)
from .gf2 import BitMatrix, BitVector, gf2_matvec
from .resilient import (ResilientFunction, default_block_function,
                        function_from_descriptor)
from .sources import (ENUM_N_CAP, ENUM_SEED_BITS_CAP, Distribution,
                      NobfSourceSpec, TableAdversary, enumerate_nobf, work_cap,
                      zeroed_counterpart)
from .stats import (EMPIRICAL_M_CAP, Estimate, binomial_estimate, sd_of_tables,
                    statistical_distance)

BLOCK_BAD_CAP = 20          # per-block undetermination scan is 2^|Q inter block|
BATCH_N_CAP = 64            # packed batch paths carry one sample per uint64
ASCENT_STEP_CAP = 1 << 16   # table entries x patterns per ascent sweep
EXHAUSTIVE_TABLE_BITS = 16  # q * 2^n_good above this falls back to ascent
DEFAULT_SWEEPS = 64


def _floor_pow(base: int, expo: float) -> int:
    """floor(base**expo) with a guard against float-pow landing a hair
    under an exact integer; evaluated at 60 digits and nudged by 1e-30."""
    with mpmath.workdps(60):
        v = mpmath.power(base, expo) + mpmath.mpf("1e-30")
        return int(mpmath.floor(v))


@dataclass
class BfextParams:
    n: int
    ell: int
    block_len: int
    code: LinearCode
    f: ResilientFunction
    mode: str = "explicit"
    delta: float | None = None
    alpha: float | None = None
    beta: float | None = None
    t: int | None = None

    def __post_init__(self):
        if self.n < 1 or self.ell < 1 or self.block_len < 1:
            raise ValidationError("n, ell, block_len must all be >= 1")
        if self.ell * self.block_len > self.n:
            raise ValidationError(
                f"ell * block_len = {self.ell * self.block_len} exceeds n = {self.n}")
        if self.code.r > self.ell:
            raise ValidationError(
                f"code length r = {self.code.r} exceeds block count ell = {self.ell}")
        if self.code.verified_d < 1:
            raise ValidationError("code distance is unverified; refusing to extract")
        if self.f.arity != self.block_len:
            raise DimensionError(
                f"block function arity {self.f.arity} != block_len {self.block_len}")
        if self.mode not in ("derived", "explicit"):
            raise ValidationError("mode must be 'derived' or 'explicit'")
        if self.mode == "derived":
            if self.delta is None or not 0 < self.delta < 1:
                raise ValidationError("derived mode needs 0 < delta < 1")
            if self.alpha is None or abs(self.alpha - self.delta / 4) > 1e-15:
                raise ValidationError("derived mode fixes alpha = delta / 4")
            if self.ell != _floor_pow(self.n, self.alpha):
                raise ValidationError("derived mode fixes ell = floor(n^alpha)")

    @property
    def m(self) -> int:
        return self.code.m

    @property
    def r(self) -> int:
        return self.code.r

    def q_conditions(self, q: int) -> dict:
        """Advisory report of the two bad-bit budgets the analysis uses:
        a global one in terms of n and a per-block one in terms of
        block_len.  Both are reported; neither is enforced."""
        if self.delta is None:
            raise ValidationError("q conditions need delta")
        g_thr = float(self.n) ** (1.0 - self.delta)
        b_thr = float(self.block_len) ** (1.0 - 0.75 * self.delta)
        return {
            "q": int(q),
            "global_threshold": g_thr,
            "q_ok_global": q <= g_thr,
            "per_block_threshold": b_thr,
            "q_ok_per_block": q < b_thr,
        }

    def to_json(self) -> dict:
        return {
            "format": "bfext-params",
            "version": 1,
            "mode": self.mode,
            "n": self.n,
            "ell": self.ell,
            "block_len": self.block_len,
            "delta": self.delta,
            "alpha": self.alpha,
            "beta": self.beta,
            "t": self.t,
            "code": self.code.to_json(),
            "f": self.f.descriptor(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BfextParams":
        if obj.get("format") != "bfext-params":
            raise ValidationError("not a bfext-params object")
        return cls(n=int(obj["n"]), ell=int(obj["ell"]),
                   block_len=int(obj["block_len"]),
                   code=LinearCode.from_json(obj["code"]),
                   f=function_from_descriptor(obj["f"]),
                   mode=obj.get("mode", "explicit"),
                   delta=obj.get("delta"), alpha=obj.get("alpha"),
                   beta=obj.get("beta"), t=obj.get("t"))


def explicit_params(n: int, ell: int, block_len: int, code: LinearCode,
                    f: ResilientFunction) -> BfextParams:
    return BfextParams(n=n, ell=ell, block_len=block_len, code=code, f=f,
                       mode="explicit")


def _default_code_builder(m: int, ell: int) -> LinearCode:
    if m == 1:
        return preset_code(f"repetition-{ell}")
    for target in range(ell - m + 1, 0, -1):
        try:
            return build_good_code(m, ell, target, seed=0, attempts=256)
        except SearchBudgetExceeded:
            continue
    raise ValidationError(f"no [{ell},{m}] code found")  # unreachable: d=1 always exists


def derive_params(n: int, delta: float, t: int,
                  code_builder=None, f_builder=None,
                  beta: float = 1.0) -> BfextParams:
    """Parameters from (n, delta, t): alpha = delta/4, ell = floor(n^alpha),
    block_len = floor(n/ell), m = max(1, floor(min(n^{0.9 alpha},
    beta t^{1/21}))).

    At desk scale the m formula almost always gives 1 (the t^{1/21} term
    needs astronomically large t to exceed 2); explicit parameters exist
    for exactly that reason.  The builders receive (m, ell) and
    (block_len) and must return a code with r <= ell and a function of
    matching arity.
    """
    if not 0 < delta < 1:
        raise ValidationError("need 0 < delta < 1")
    if t < 1:
        raise ValidationError("need t >= 1")
    if n < 1:
        raise ValidationError("need n >= 1")
    if beta <= 0:
        raise ValidationError("need beta > 0")
    alpha = delta / 4.0
    ell = _floor_pow(n, alpha)
    if ell < 1:
        raise ValidationError("block count came out below 1")
    block_len = n // ell
    with mpmath.workdps(60):
        cand = min(mpmath.power(n, 0.9 * alpha),
                   mpmath.mpf(beta) * mpmath.power(t, mpmath.mpf(1) / 21))
        m = max(1, int(mpmath.floor(cand + mpmath.mpf("1e-30"))))
    f = (f_builder or default_block_function)(block_len)
    if f.arity != block_len:
        raise DimensionError("f_builder returned wrong arity")
    code = (code_builder or _default_code_builder)(m, ell)
    if code.m != m:
        raise ValidationError(f"code builder returned m = {code.m}, wanted {m}")
    if code.r > ell:
        raise ValidationError(
            f"code builder returned r = {code.r} > ell = {ell}")
    return BfextParams(n=n, ell=ell, block_len=block_len, code=code, f=f,
                       mode="derived", delta=delta, alpha=alpha, beta=beta, t=t)


@dataclass(frozen=True)
class ExtractionTrace:
    blocks: tuple[BitVector, ...]
    y: BitVector
    y_used: BitVector
    z: BitVector

    def to_json(self) -> dict:
        return {
            "format": "extraction-trace",
            "version": 1,
            "block_len": len(self.blocks[0]) if self.blocks else 0,
            "ell": len(self.y),
            "r": len(self.y_used),
            "m": len(self.z),
            "blocks": [b.to_hex() for b in self.blocks],
            "y": self.y.to_hex(),
            "y_used": self.y_used.to_hex(),
            "z": self.z.to_hex(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ExtractionTrace":
        if obj.get("format") != "extraction-trace":
            raise ValidationError("not an extraction-trace object")
        bl = int(obj["block_len"])
        return cls(blocks=tuple(BitVector.from_hex(bl, h) for h in obj["blocks"]),
                   y=BitVector.from_hex(int(obj["ell"]), obj["y"]),
                   y_used=BitVector.from_hex(int(obj["r"]), obj["y_used"]),
                   z=BitVector.from_hex(int(obj["m"]), obj["z"]))


def partition(x: BitVector, ell: int, block_len: int) -> list[BitVector]:
    """Block i holds coordinates [i*block_len, (i+1)*block_len); trailing
    coordinates beyond ell*block_len are discarded."""
    if ell * block_len > len(x):
        raise ValidationError(
            f"ell * block_len = {ell * block_len} exceeds input length {len(x)}")
    return [x.slice(i * block_len, block_len) for i in range(ell)]


def extract(x: BitVector, params: BfextParams) -> ExtractionTrace:
    """The full pipeline on one input, with every intermediate recorded."""
    if len(x) != params.n:
        raise DimensionError(f"input has {len(x)} bits, expected {params.n}")
    blocks = partition(x, params.ell, params.block_len)
    ybits = 0
    for i, b in enumerate(blocks):
        ybits |= params.f.eval(b) << i
    y = BitVector(params.ell, ybits)
    y_used = y.slice(0, params.r)
    z = gf2_matvec(params.code.g, y_used)
    return ExtractionTrace(blocks=tuple(blocks), y=y, y_used=y_used, z=z)


def extract_batch(xs: np.ndarray, params: BfextParams) -> np.ndarray:
    """Vectorized z values for packed uint64 inputs (n <= 64)."""
    if params.n > BATCH_N_CAP:
        raise WorkCapExceeded(required=params.n, cap=BATCH_N_CAP,
                              what="packed batch source length")
    xs = np.asarray(xs, dtype=np.uint64)
    bl = params.block_len
    mask = np.uint64((1 << bl) - 1)
    y = np.zeros(xs.shape, dtype=np.uint64)
    for i in range(params.ell):
        blk = (xs >> np.uint64(i * bl)) & mask
        y |= params.f.eval_batch(blk).astype(np.uint64) << np.uint64(i)
    y_used = y & np.uint64((1 << params.r) - 1)
    z = np.zeros(xs.shape, dtype=np.uint64)
    one = np.uint64(1)
    for j, row in enumerate(params.code.g.rows):
        bit = np.bitwise_count(y_used & np.uint64(row)) & one
        z |= bit << np.uint64(j)
    return z


def output_distribution(spec: NobfSourceSpec, params: BfextParams) -> Distribution:
    """Exact distribution of z under the source: enumerate the source
    table and push it through the pipeline in chunks."""
    if spec.n != params.n:
        raise DimensionError("source length does not match parameters")
    src = enumerate_nobf(spec)
    probs = src.probs
    out = np.zeros(1 << params.m, dtype=np.float64)
    chunk = 1 << 20
    for lo in range(0, probs.size, chunk):
        hi = min(lo + chunk, probs.size)
        w = probs[lo:hi]
        support = np.nonzero(w)[0]
        if support.size == 0:
            continue
        zs = extract_batch((support + lo).astype(np.uint64), params)
        out += np.bincount(zs.astype(np.int64), weights=w[support],
                           minlength=1 << params.m)
    return Distribution.exact(params.m, out)


def _block_layout(spec: NobfSourceSpec, params: BfextParams):
    """Per-block view of the bad/good coordinate split.

    Returns a list over blocks that carry at least one bad bit:
    (good_indices_into_global_good_order, local_good_offsets,
    local_bad_offsets).
    """
    badset = set(spec.bad_positions)
    good_positions = spec.good_positions
    good_index = {p: k for k, p in enumerate(good_positions)}
    layout = []
    for i in range(params.ell):
        lo = i * params.block_len
        hi = lo + params.block_len
        local_bads = [p - lo for p in spec.bad_positions if lo <= p < hi]
        if not local_bads:
            continue
        if len(local_bads) > BLOCK_BAD_CAP:
            raise WorkCapExceeded(required=1 << len(local_bads),
                                  cap=1 << BLOCK_BAD_CAP,
                                  what="per-block undetermination scan")
        goods = [p for p in range(lo, hi) if p not in badset]
        layout.append((
            [good_index[p] for p in goods],
            [p - lo for p in goods],
            local_bads,
        ))
    return layout


def _some_block_undetermined(goods: np.ndarray, layout,
                             f: ResilientFunction) -> np.ndarray:
    """Mask over packed good outcomes: True where at least one block's
    f-value still depends on that block's bad bits."""
    some = np.zeros(goods.shape, dtype=bool)
    for good_idx, good_off, bad_off in layout:
        compact = gather_bits_vec(goods, good_idx)
        base = scatter_bits_vec(compact, good_off)
        any0 = np.zeros(goods.shape, dtype=bool)
        any1 = np.zeros(goods.shape, dtype=bool)
        for comp in range(1 << len(bad_off)):
            filled = base.copy()
            for j, off in enumerate(bad_off):
                if (comp >> j) & 1:
                    filled = filled | np.uint64(1 << off)
            vals = f.eval_batch(filled).astype(bool)
            any1 |= vals
            any0 |= ~vals
        some |= any0 & any1
    return some


def _exact_good_enumeration_ok(spec: NobfSourceSpec) -> bool:
    n_good = spec.n - spec.q
    if n_good > ENUM_N_CAP:
        return False
    space = spec.good_dist.seed_space_size
    if space is not None and space > (1 << ENUM_SEED_BITS_CAP):
        return False
    return True


def fixedness_probability(spec: NobfSourceSpec, params: BfextParams,
                          seed: int | None = None,
                          samples: int | None = None,
                          force_mc: bool = False) -> Estimate:
    """Probability that every block's output is determined by the good
    bits alone, i.e. no assignment of the bad bits can change any Y_i.

    Exact via good-bit enumeration when feasible, otherwise Monte Carlo
    over good-bit samples with a 99% binomial interval.
    """
    if spec.n != params.n:
        raise DimensionError("source length does not match parameters")
    layout = _block_layout(spec, params)
    if not layout:
        return Estimate.exact_value(1.0)
    scan = sum(1 << len(b[2]) for b in layout)
    if not force_mc and _exact_good_enumeration_ok(spec):
        weights = spec.good_dist.exact_table()
        units = weights.size * scan
        if units > work_cap():
            raise WorkCapExceeded(required=units, cap=work_cap(),
                                  what="fixedness enumeration")
        support = np.nonzero(weights)[0]
        some = _some_block_undetermined(support.astype(np.uint64), layout,
                                        params.f)
        return Estimate.exact_value(1.0 - float(weights[support[some]].sum()))
    if samples is None or seed is None:
        raise ValidationError(
            "exact enumeration infeasible; provide seed and samples")
    if samples < 1:
        raise ValidationError("need at least one sample")
    k = samples - undetermined_block_count(spec, params, seed, 0, samples)
    return binomial_estimate(k, samples, confidence=0.99)


def undetermined_block_count(spec: NobfSourceSpec, params: BfextParams,
                             seed: int, start: int, count: int) -> int:
    """Sampled count of good-bit draws (counters start..start+count-1)
    leaving some block undetermined; chunking-invariant."""
    layout = _block_layout(spec, params)
    if not layout:
        return 0
    goods = spec.good_dist.sample_batch(seed, 0, start, count)
    return int(_some_block_undetermined(goods, layout, params.f).sum())


@dataclass(frozen=True)
class CompareZeroedReport:
    """Distance between the extractor output on the source and on its
    zeroed counterpart (same good bits, bad bits pinned to zero)."""

    sd: Estimate
    exact: bool
    m: int
    mismatch_rate: float | None = None

    def to_json(self) -> dict:
        return {"sd": self.sd.to_json(), "exact": self.exact, "m": self.m,
                "mismatch_rate": self.mismatch_rate}


def compare_zeroed(spec: NobfSourceSpec, params: BfextParams,
                   seed: int | None = None,
                   samples: int | None = None,
                   force_mc: bool = False) -> CompareZeroedReport:
    """SD(Z, Z') for the zeroed counterpart; exact when the source
    enumerates, else a coupled plug-in estimate."""
    if spec.n != params.n:
        raise DimensionError("source length does not match parameters")
    zspec = zeroed_counterpart(spec)
    if not force_mc and _exact_good_enumeration_ok(spec) and spec.n <= ENUM_N_CAP:
        p = output_distribution(spec, params)
        pz = output_distribution(zspec, params)
        return CompareZeroedReport(
            sd=Estimate.exact_value(statistical_distance(p, pz)),
            exact=True, m=params.m)
    if params.m > EMPIRICAL_M_CAP:
        raise WorkCapExceeded(required=1 << params.m, cap=1 << EMPIRICAL_M_CAP,
                              what="empirical output width")
    if samples is None or seed is None:
        raise ValidationError(
            "exact enumeration infeasible; provide seed and samples")
    if samples < 1:
        raise ValidationError("need at least one sample")
    ca, cb, mismatches = zeroed_pair_counts(spec, params, seed, 0, samples)
    ta = ca / samples
    tb = cb / samples
    est = sd_of_tables(ta, tb)
    dev = math.sqrt(math.log(2.0 / 0.01) / (2.0 * samples))
    bias_term = math.sqrt((1 << params.m) / samples)
    bound = 2 * dev + bias_term
    sd = Estimate(value=est, lo=max(0.0, est - bound), hi=min(1.0, est + bound),
                  samples=samples, confidence=0.99, method="plug-in")
    return CompareZeroedReport(sd=sd, exact=False, m=params.m,
                               mismatch_rate=mismatches / samples)


def zeroed_pair_counts(spec: NobfSourceSpec, params: BfextParams,
                       seed: int, start: int, count: int):
    """Coupled sampling for the zeroed comparison: identical good bits,
    bad bits set by the adversary on one side and pinned to zero on the
    other.  Returns (output counts, zeroed output counts, number of
    differing pairs); counter-addressed and chunking-invariant."""
    goods = spec.good_dist.sample_batch(seed, 0, start, count)
    n_good = spec.n - spec.q
    bads = spec.adversary.bad_bits_batch(goods, n_good, spec.q)
    zero = np.zeros(count, dtype=np.uint64)
    za = extract_batch(spec.compose_batch(goods, bads), params)
    zb = extract_batch(spec.compose_batch(goods, zero), params)
    ca = np.bincount(za.astype(np.int64), minlength=1 << params.m).astype(np.float64)
    cb = np.bincount(zb.astype(np.int64), minlength=1 << params.m).astype(np.float64)
    return ca, cb, int(np.count_nonzero(za != zb))


@dataclass(frozen=True)
class WorstAdversaryReport:
    adversary: TableAdversary
    sd: float
    method: str
    sweeps: int = 0

    def to_json(self) -> dict:
        return {"adversary": self.adversary.descriptor(), "sd": self.sd,
                "method": self.method, "sweeps": self.sweeps}


def worst_case_adversary(spec: NobfSourceSpec, params: BfextParams,
                         sweeps: int = DEFAULT_SWEEPS) -> WorstAdversaryReport:
    """Search for the bad-bit strategy maximizing SD(Z, Z').

    Exhaustive over all strategy tables when the table is at most
    EXHAUSTIVE_TABLE_BITS bits and the good-bit count is at most 4;
    otherwise deterministic coordinate ascent over table entries
    (steepest single-entry improvement, swept in order).  The returned
    adversary is labeled brute-force-worst with the search method in its
    provenance.  The incoming spec's own adversary is ignored.
    """
    if spec.n != params.n:
        raise DimensionError("source length does not match parameters")
    q = spec.q
    n_good = spec.n - q
    if q < 1:
        raise ValidationError("need at least one bad position to optimize")
    if not _exact_good_enumeration_ok(spec):
        raise WorkCapExceeded(required=1 << n_good,
                              cap=1 << ENUM_SEED_BITS_CAP,
                              what="adversary search good-bit enumeration")
    weights = spec.good_dist.exact_table()
    gcount = weights.size
    npat = 1 << q
    if gcount * npat > work_cap():
        raise WorkCapExceeded(required=gcount * npat, cap=work_cap(),
                              what="adversary search choice matrix")
    goods = np.arange(gcount, dtype=np.uint64)
    # z_choice[b, g]: output when the good bits are g and the bad bits b.
    z_choice = np.empty((npat, gcount), dtype=np.int64)
    for b in range(npat):
        bads = np.full(gcount, b, dtype=np.uint64)
        z_choice[b] = extract_batch(spec.compose_batch(goods, bads),
                                    params).astype(np.int64)
    nz = 1 << params.m
    target = np.bincount(z_choice[0], weights=weights, minlength=nz)

    table_bits = q * gcount
    if n_good <= 4 and table_bits <= EXHAUSTIVE_TABLE_BITS:
        ntables = 1 << table_bits
        codes = np.arange(ntables, dtype=np.int64)
        digits = np.empty((ntables, gcount), dtype=np.int64)
        for g in range(gcount):
            digits[:, g] = (codes >> (q * g)) & (npat - 1)
        zsel = z_choice[digits, np.arange(gcount)]
        tables = np.zeros((ntables, nz), dtype=np.float64)
        np.add.at(tables, (np.repeat(np.arange(ntables), gcount),
                           zsel.ravel()),
                  np.tile(weights, ntables))
        sds = 0.5 * np.abs(tables - target).sum(axis=1)
        best = int(sds.argmax())
        entries = [(best >> (q * g)) & (npat - 1) for g in range(gcount)]
        adv = TableAdversary(n_good, entries, label="brute-force-worst",
                             provenance={"method": "exhaustive",
                                         "objective_sd": float(sds[best])})
        return WorstAdversaryReport(adversary=adv, sd=float(sds[best]),
                                    method="exhaustive")

    if gcount * npat > ASCENT_STEP_CAP:
        raise WorkCapExceeded(required=gcount * npat, cap=ASCENT_STEP_CAP,
                              what="adversary ascent sweep")
    entries = [0] * gcount
    diff = np.zeros_like(target)  # running P_T - P', updated entry by entry
    sd = 0.0
    swept = 0
    for swept in range(1, sweeps + 1):
        changed = False
        for g in range(gcount):
            w = float(weights[g])
            if w == 0.0:
                continue
            cur = entries[g]
            zcur = z_choice[cur, g]
            best_b, best_gain = cur, 0.0
            for b in range(npat):
                if b == cur:
                    continue
                znew = z_choice[b, g]
                if znew == zcur:
                    continue
                gain = 0.5 * ((abs(diff[zcur] - w) - abs(diff[zcur]))
                              + (abs(diff[znew] + w) - abs(diff[znew])))
                if gain > best_gain + 1e-15:
                    best_b, best_gain = b, gain
            if best_b != cur:
                diff[zcur] -= w
                diff[z_choice[best_b, g]] += w
                entries[g] = best_b
                sd += best_gain
                changed = True
        if not changed:
            break
    sd = 0.5 * float(np.abs(diff).sum())
    adv = TableAdversary(n_good, entries, label="brute-force-worst",
                         provenance={"method": "ascent", "sweeps": swept,
                                     "objective_sd": sd})
    return WorstAdversaryReport(adversary=adv, sd=sd, method="ascent",
                                sweeps=swept)
