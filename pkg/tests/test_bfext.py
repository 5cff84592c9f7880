"""The block extractor pipeline and its diagnostics."""

import json

import numpy as np
import pytest

from nobfext.bfext import (BfextParams, CompareZeroedReport, ExtractionTrace,
                           _floor_pow, compare_zeroed, derive_params,
                           explicit_params, extract, extract_batch,
                           fixedness_probability, output_distribution,
                           partition, undetermined_block_count,
                           worst_case_adversary, zeroed_pair_counts)
from nobfext.codes import LinearCode, preset_code
from nobfext.errors import DimensionError, ValidationError, WorkCapExceeded
from nobfext.gf2 import BitMatrix, BitVector, row_combination
from nobfext.resilient import Majority, TableFunction, Tribes
from nobfext.sources import (ConstantAdversary, Distribution, NobfSourceSpec,
                             ParityOfGood, TableAdversary, UniformBits,
                             sample_nobf_batch)
from nobfext.stats import statistical_distance


def _maj3_params(ell=2, code=None):
    code = code or preset_code(f"identity-{ell}")
    return explicit_params(n=3 * ell, ell=ell, block_len=3, code=code,
                           f=Majority(3))


def _uniform_spec(n, bad, adversary=None):
    return NobfSourceSpec(n, bad, UniformBits(n - len(bad)), adversary)


# ---------------------------------------------------------------------------
# parameter derivation


def test_floor_pow_hits_exact_integers():
    # 0.8 / 4 stored as a double still floors (2^20)^alpha to exactly 16
    assert _floor_pow(1 << 20, 0.8 / 4) == 16
    assert _floor_pow(1 << 20, 0.25) == 32
    assert _floor_pow(7, 0.5) == 2
    assert _floor_pow(10 ** 6, 0.5) == 1000
    # the exponent is honored as the double the caller stored: double(1/3)
    # undershoots, so the cube root of 10^9 lands a hair under 1000
    assert _floor_pow(10 ** 9, 1 / 3) == 999


def test_derive_params_large_instance():
    p = derive_params(n=1 << 20, delta=0.8, t=4)
    assert p.mode == "derived"
    assert p.alpha == pytest.approx(0.2)
    assert p.ell == 16
    assert p.block_len == 65536
    assert p.m == 1
    assert p.code.verified_d == p.code.r == 16  # repetition over all blocks
    assert p.f.arity == 65536
    assert p.ell * p.block_len <= p.n


def test_derive_params_m_two_needs_huge_t():
    # t^(1/21) reaches 2 exactly at t = 2^21; the floor must not lose it
    p = derive_params(n=1 << 22, delta=0.8, t=1 << 21)
    assert p.m == 2
    assert p.ell == 21
    assert p.code.m == 2 and p.code.r <= 21
    assert p.code.verified_d >= 1
    q = derive_params(n=1 << 22, delta=0.8, t=(1 << 21) - 1)
    assert q.m == 1


def test_derive_params_beta_scales_m():
    base = derive_params(n=1 << 22, delta=0.8, t=1 << 21)
    halved = derive_params(n=1 << 22, delta=0.8, t=1 << 21, beta=0.5)
    assert base.m == 2 and halved.m == 1


def test_derive_params_validation():
    with pytest.raises(ValidationError):
        derive_params(n=100, delta=0.0, t=2)
    with pytest.raises(ValidationError):
        derive_params(n=100, delta=1.0, t=2)
    with pytest.raises(ValidationError):
        derive_params(n=100, delta=0.5, t=0)
    with pytest.raises(ValidationError):
        derive_params(n=0, delta=0.5, t=2)


def test_params_validation():
    with pytest.raises(ValidationError):
        explicit_params(5, 2, 3, preset_code("identity-2"), Majority(3))
    with pytest.raises(ValidationError):
        explicit_params(9, 2, 3, preset_code("identity-3"), Majority(3))  # r > ell
    with pytest.raises(DimensionError):
        explicit_params(6, 2, 3, preset_code("identity-2"), Majority(5))
    unverified = LinearCode(m=2, r=2, g=BitMatrix.identity(2))
    with pytest.raises(ValidationError):
        explicit_params(6, 2, 3, unverified, Majority(3))
    with pytest.raises(ValidationError):
        BfextParams(n=6, ell=2, block_len=3, code=preset_code("identity-2"),
                    f=Majority(3), mode="derived", delta=0.8, alpha=0.3)


def test_derived_mode_consistency_enforced():
    code = preset_code("repetition-16")
    f = Tribes(2, 32768)
    good = BfextParams(n=1 << 20, ell=16, block_len=65536, code=code, f=f,
                       mode="derived", delta=0.8, alpha=0.8 / 4)
    assert good.ell == 16
    with pytest.raises(ValidationError):
        BfextParams(n=1 << 20, ell=15, block_len=65536, code=preset_code("repetition-15"),
                    f=f, mode="derived", delta=0.8, alpha=0.8 / 4)


def test_q_conditions_report():
    p = derive_params(n=1 << 20, delta=0.8, t=4)
    rep = p.q_conditions(2)
    assert rep["q"] == 2
    assert rep["q_ok_global"] == (2 <= (1 << 20) ** 0.2)
    assert rep["per_block_threshold"] == pytest.approx(65536 ** 0.4)
    assert rep["q_ok_per_block"]
    big = p.q_conditions(10 ** 6)
    assert not big["q_ok_global"] and not big["q_ok_per_block"]
    with pytest.raises(ValidationError):
        _maj3_params().q_conditions(1)  # explicit mode carries no delta


def test_params_json_round_trip():
    p = _maj3_params()
    back = BfextParams.from_json(json.loads(json.dumps(p.to_json())))
    assert (back.n, back.ell, back.block_len, back.mode) == (6, 2, 3, "explicit")
    assert back.code.g == p.code.g
    assert np.array_equal(back.f.truth_table(), p.f.truth_table())
    d = derive_params(n=1 << 20, delta=0.8, t=4)
    d2 = BfextParams.from_json(json.loads(json.dumps(d.to_json())))
    assert d2.mode == "derived" and d2.delta == 0.8 and d2.ell == 16


# ---------------------------------------------------------------------------
# the pipeline itself


def test_partition_blocks_and_truncation():
    x = BitVector.from01("1101001110")
    blocks = partition(x, 3, 3)
    assert [b.to01() for b in blocks] == ["110", "100", "111"]  # bit 9 dropped
    with pytest.raises(ValidationError):
        partition(x, 4, 3)


def test_extract_hand_example():
    # blocks 110, 100, 111, 010 -> majorities 1, 0, 1, 0 -> y = 1010;
    # G = [1100; 0011] on y_used = y gives z = (1^0, 1^0) = 11
    code = LinearCode(m=2, r=4, g=BitMatrix.from01(["1100", "0011"]), verified_d=2)
    params = explicit_params(n=12, ell=4, block_len=3, code=code, f=Majority(3))
    trace = extract(BitVector.from01("110100111010"), params)
    assert [b.to01() for b in trace.blocks] == ["110", "100", "111", "010"]
    assert trace.y.to01() == "1010"
    assert trace.y_used == trace.y
    assert trace.z.to01() == "11"


def test_extract_uses_first_r_coordinates():
    code = preset_code("repetition-3")  # r = 3 < ell = 4
    params = explicit_params(n=8, ell=4, block_len=2, code=code, f=Tribes(2, 1))
    x = BitVector.from01("11000011")  # blocks 11,00,00,11 -> y = 1001
    trace = extract(x, params)
    assert trace.y.to01() == "1001"
    assert trace.y_used.to01() == "100"
    assert trace.z.to01() == "1"  # parity of y_used
    with pytest.raises(DimensionError):
        extract(BitVector.from01("110"), params)


def test_extract_batch_matches_scalar():
    code = LinearCode(m=2, r=4, g=BitMatrix.from01(["1011", "0111"]), verified_d=2)
    params = explicit_params(n=13, ell=4, block_len=3, code=code, f=Majority(3))
    rng = np.random.default_rng(10)
    xs = rng.integers(0, 1 << 13, size=200, dtype=np.uint64)
    zs = extract_batch(xs, params)
    for x, z in zip(xs, zs):
        assert int(z) == extract(BitVector(13, int(x)), params).z.bits


def test_extract_batch_width_cap():
    p = derive_params(n=1 << 20, delta=0.8, t=4)
    with pytest.raises(WorkCapExceeded):
        extract_batch(np.zeros(1, dtype=np.uint64), p)


def test_linear_test_decomposition():
    # the parity of z over any nonempty S equals the parity of y_used
    # against the XOR of the S rows of G
    code = LinearCode(m=3, r=5, g=BitMatrix.from01(["10110", "01011", "11100"]),
                      verified_d=1)
    params = explicit_params(n=10, ell=5, block_len=2, code=code, f=Tribes(2, 1))
    rng = np.random.default_rng(11)
    for x in rng.integers(0, 1 << 10, size=100, dtype=np.uint64):
        trace = extract(BitVector(10, int(x)), params)
        for s in range(1, 8):
            members = [i for i in range(3) if (s >> i) & 1]
            lhs = sum(trace.z[i] for i in members) & 1
            assert lhs == row_combination(code.g, members).dot(trace.y_used)


def test_trace_json_round_trip():
    params = _maj3_params()
    trace = extract(BitVector.from01("110100"), params)
    back = ExtractionTrace.from_json(json.loads(json.dumps(trace.to_json())))
    assert back == trace


# ---------------------------------------------------------------------------
# output distribution


def test_output_uniform_when_no_bad_bits():
    # unbiased independent block outputs through an identity code stay uniform
    params = _maj3_params(ell=2)
    dist = output_distribution(_uniform_spec(6, []), params)
    assert statistical_distance(dist, Distribution.uniform(2)) == pytest.approx(0.0)
    # and through a repetition code (XOR of unbiased bits)
    rep = explicit_params(6, 2, 3, preset_code("repetition-2"), Majority(3))
    dist = output_distribution(_uniform_spec(6, []), rep)
    assert statistical_distance(dist, Distribution.uniform(1)) == pytest.approx(0.0)


def test_output_distribution_matches_sampling():
    spec = _uniform_spec(6, [1], ParityOfGood())
    params = _maj3_params(ell=2)
    exact = output_distribution(spec, params)
    zs = extract_batch(sample_nobf_batch(spec, 21, 1 << 14), params)
    emp = Distribution.empirical(2, zs)
    assert statistical_distance(exact, emp) < 0.02


def test_output_distribution_biased_block_function():
    # AND blocks: Pr[y_i = 1] = 1/4, repetition code -> z = XOR of 2 such
    params = explicit_params(4, 2, 2, preset_code("repetition-2"), Tribes(2, 1))
    dist = output_distribution(_uniform_spec(4, []), params)
    # Pr[z = 1] = 2 * (1/4) * (3/4) = 3/8
    assert dist.as_table()[1] == pytest.approx(3 / 8)


# ---------------------------------------------------------------------------
# fixedness


def test_fixedness_no_bad_bits_is_one():
    est = fixedness_probability(_uniform_spec(6, []), _maj3_params())
    assert est.is_exact and est.value == 1.0


def test_fixedness_bad_bit_in_discarded_tail():
    params = explicit_params(7, 2, 3, preset_code("identity-2"), Majority(3))
    est = fixedness_probability(_uniform_spec(7, [6]), params)
    assert est.is_exact and est.value == 1.0


def test_fixedness_exact_values():
    params = _maj3_params()
    # one free majority voter: fixed iff the other two in its block agree
    est = fixedness_probability(_uniform_spec(6, [1]), params)
    assert est.is_exact and est.value == pytest.approx(0.5)
    # one free voter in each block: independent halves
    est = fixedness_probability(_uniform_spec(6, [1, 5]), params)
    assert est.is_exact and est.value == pytest.approx(0.25)
    # two free voters in one block always leave majority-of-3 open
    est = fixedness_probability(_uniform_spec(6, [0, 1]), params)
    assert est.is_exact and est.value == pytest.approx(0.0)


def test_fixedness_depends_only_on_positions_not_adversary():
    params = _maj3_params()
    a = fixedness_probability(_uniform_spec(6, [1], ParityOfGood()), params)
    b = fixedness_probability(_uniform_spec(6, [1], ConstantAdversary(1)), params)
    assert a.value == b.value


def test_fixedness_mc_matches_exact():
    params = _maj3_params()
    spec = _uniform_spec(6, [1, 5])
    est = fixedness_probability(spec, params, seed=5, samples=4000, force_mc=True)
    assert not est.is_exact
    assert est.contains(0.25)
    # chunk-invariant building block
    total = undetermined_block_count(spec, params, 5, 0, 4000)
    parts = sum(undetermined_block_count(spec, params, 5, s, c)
                for s, c in [(0, 999), (999, 2001), (3000, 1000)])
    assert parts == total
    with pytest.raises(ValidationError):
        fixedness_probability(spec, params, force_mc=True)  # no seed/samples


# ---------------------------------------------------------------------------
# zeroed comparison and the coupling bound


def test_compare_zeroed_constant_zero_adversary():
    params = _maj3_params()
    rep = compare_zeroed(_uniform_spec(6, [1], ConstantAdversary(0)), params)
    assert rep.exact and rep.sd.value == 0.0


def test_compare_zeroed_parity_adversary_exact_value():
    params = _maj3_params()
    spec = _uniform_spec(6, [1], ParityOfGood())
    rep = compare_zeroed(spec, params)
    assert rep.exact
    # independent recomputation from the two output tables
    a = output_distribution(spec, params)
    b = output_distribution(_uniform_spec(6, [1], ConstantAdversary(0)), params)
    assert rep.sd.value == pytest.approx(statistical_distance(a, b))
    assert rep.sd.value > 0.0


def test_compare_zeroed_mc_covers_exact():
    params = _maj3_params()
    spec = _uniform_spec(6, [1], ParityOfGood())
    exact = compare_zeroed(spec, params).sd.value
    mc = compare_zeroed(spec, params, seed=3, samples=6000, force_mc=True)
    assert not mc.exact
    assert mc.sd.contains(exact)
    assert mc.mismatch_rate is not None
    assert mc.sd.value <= mc.mismatch_rate + 1e-12


def test_zeroed_pair_counts_chunk_invariant():
    params = _maj3_params()
    spec = _uniform_spec(6, [1], ParityOfGood())
    ca, cb, mm = zeroed_pair_counts(spec, params, 7, 0, 3000)
    ca2 = np.zeros_like(ca)
    cb2 = np.zeros_like(cb)
    mm2 = 0
    for s, c in [(0, 1000), (1000, 1000), (2000, 1000)]:
        a, b, m = zeroed_pair_counts(spec, params, 7, s, c)
        ca2 += a
        cb2 += b
        mm2 += m
    assert np.array_equal(ca, ca2) and np.array_equal(cb, cb2) and mm == mm2


@pytest.mark.parametrize("bad,adv", [
    ([1], ParityOfGood()),
    ([1, 5], ParityOfGood()),
    ([0, 1], ParityOfGood()),
    ([2], ConstantAdversary(1)),
])
def test_coupling_bound(bad, adv):
    # SD(Z, Z') can never exceed the probability some block is undetermined
    params = _maj3_params()
    spec = _uniform_spec(6, bad, adv)
    sd = compare_zeroed(spec, params).sd.value
    fixed = fixedness_probability(spec, params).value
    assert sd <= (1.0 - fixed) + 1e-12


# ---------------------------------------------------------------------------
# worst-case adversary search


def test_worst_adversary_exhaustive_matches_oracle():
    # q * 2^n_good = 8 bits of strategy table: enumerate every strategy
    # independently and confirm the search finds the true maximum
    params = explicit_params(4, 2, 2, preset_code("identity-2"), Tribes(2, 1))
    spec = _uniform_spec(4, [0])
    report = worst_case_adversary(spec, params)
    assert report.method == "exhaustive"
    zero_dist = output_distribution(_uniform_spec(4, [0], ConstantAdversary(0)),
                                    params)
    best = 0.0
    for tab in range(1 << 8):
        adv = TableAdversary(3, [(tab >> g) & 1 for g in range(8)])
        d = output_distribution(_uniform_spec(4, [0], adv), params)
        best = max(best, statistical_distance(d, zero_dist))
    assert report.sd == pytest.approx(best)
    # the returned adversary really achieves the reported distance
    achieved = output_distribution(
        NobfSourceSpec(4, [0], UniformBits(3), report.adversary), params)
    assert statistical_distance(achieved, zero_dist) == pytest.approx(report.sd)
    assert report.adversary.kind == "brute-force-worst"
    assert report.adversary.provenance["method"] == "exhaustive"


def test_worst_adversary_ascent_consistent():
    params = explicit_params(8, 2, 4, preset_code("identity-2"), Tribes(2, 2))
    spec = _uniform_spec(8, [0, 5])
    report = worst_case_adversary(spec, params)
    assert report.method == "ascent"
    assert 1 <= report.sweeps <= 64
    # reported objective must match an exact recomputation
    rebuilt = NobfSourceSpec(8, [0, 5], UniformBits(6), report.adversary)
    rep = compare_zeroed(rebuilt, params)
    assert rep.exact and rep.sd.value == pytest.approx(report.sd)
    # it at least beats the fixed stock strategies
    for adv in [ParityOfGood(), ConstantAdversary(3)]:
        stock = compare_zeroed(_uniform_spec(8, [0, 5], adv), params).sd.value
        assert report.sd >= stock - 1e-12
    # and respects the coupling bound
    fixed = fixedness_probability(spec, params).value
    assert report.sd <= (1.0 - fixed) + 1e-12


def test_worst_adversary_needs_bad_positions():
    with pytest.raises(ValidationError):
        worst_case_adversary(_uniform_spec(6, []), _maj3_params())


def test_worst_adversary_saturates_single_free_block():
    # one free voter in one block: whenever the other two voters split
    # (probability 1/2) the adversary owns that output bit outright, and
    # pushing it to 1 makes the coupling bound tight
    params = _maj3_params()
    spec = _uniform_spec(6, [1])
    report = worst_case_adversary(spec, params)
    fixed = fixedness_probability(spec, params).value
    assert fixed == pytest.approx(0.5)
    assert report.sd == pytest.approx(1.0 - fixed)
