"""NOBF sources: generators, adversaries, enumeration, sample files."""

import itertools
import json

import numpy as np
import pytest

from nobfext.errors import DimensionError, ValidationError, WorkCapExceeded
from nobfext.gf2 import BitVector
from nobfext.sources import (ConstantAdversary, Distribution, EpsBiased,
                             ExactTwise, ExplicitTable, MajorityOfGood,
                             NobfSourceSpec, ParityOfGood, TableAdversary,
                             UniformBits, _poly_mod, adversary_from_descriptor,
                             enumerate_nobf, epsbiased_sample,
                             good_dist_from_descriptor, irreducible_poly,
                             read_sample_batch, sample_nobf, sample_nobf_batch,
                             twise_sample, verify_twise, write_sample_batch,
                             zeroed_counterpart)


# ---------------------------------------------------------------------------
# field arithmetic


def test_irreducible_polys_have_no_proper_factor():
    for e in range(1, 13):
        p = irreducible_poly(e)
        assert p.bit_length() == e + 1  # degree exactly e
        # irreducible iff no divisor of degree 1..e//2
        for ddeg in range(1, e // 2 + 1):
            for d in range(1 << ddeg, 1 << (ddeg + 1)):
                assert _poly_mod(p, d) != 0


def test_gf2e_mul_is_a_field():
    from nobfext.sources import gf2e_mul
    e = 4
    poly = irreducible_poly(e)
    size = 1 << e
    for a in range(size):
        assert gf2e_mul(a, 1, e, poly) == a
        assert gf2e_mul(a, 0, e, poly) == 0
    # no zero divisors and commutativity on a sample
    for a in range(1, size):
        seen = {gf2e_mul(a, b, e, poly) for b in range(1, size)}
        assert 0 not in seen
        assert len(seen) == size - 1  # a * (.) permutes the nonzero elements
    for a in range(size):
        for b in range(size):
            assert gf2e_mul(a, b, e, poly) == gf2e_mul(b, a, e, poly)


# ---------------------------------------------------------------------------
# distributions over m-bit strings


def test_distribution_exact_validation():
    with pytest.raises(ValidationError):
        Distribution.exact(2, [0.5, 0.5, 0.5, 0.5])
    with pytest.raises(ValidationError):
        Distribution.exact(1, [-0.1, 1.1])
    with pytest.raises(DimensionError):
        Distribution.exact(2, [1.0])
    d = Distribution.exact(1, [0.25, 0.75])
    assert d.is_exact and d.kind == "exact"


def test_distribution_uniform_point_mass_marginal():
    u = Distribution.uniform(3)
    assert np.allclose(u.marginal([0, 2]).as_table(), 0.25)
    p = Distribution.point_mass(3, 0b101)
    assert p.as_table()[0b101] == 1.0
    assert np.array_equal(p.marginal([2]).as_table(), [0.0, 1.0])
    assert np.array_equal(p.marginal([1]).as_table(), [1.0, 0.0])


def test_distribution_empirical_table():
    d = Distribution.empirical(2, [0, 0, 1, 3], seed=9)
    assert not d.is_exact
    assert d.n_samples == 4
    assert np.array_equal(d.as_table(), [0.5, 0.25, 0.0, 0.25])
    with pytest.raises(ValidationError):
        Distribution.empirical(1, [0, 2])


# ---------------------------------------------------------------------------
# good-bit generators


def test_uniform_bits_table_and_samples():
    g = UniformBits(4)
    assert g.claimed_twise() == 4
    assert np.allclose(g.exact_table(), 1 / 16)
    draws = g.sample_batch(5, 0, 0, 1 << 14)
    freqs = np.bincount(draws.astype(np.int64), minlength=16) / draws.size
    assert np.all(np.abs(freqs - 1 / 16) < 0.01)


@pytest.mark.parametrize("n,t", [(6, 1), (6, 2), (6, 3), (8, 2), (5, 4)])
def test_exact_twise_marginals_uniform(n, t):
    rep = verify_twise(ExactTwise(n, t), n, t)
    assert rep.ok
    assert rep.worst_distance <= 1e-12


def test_exact_twise_eventually_fails_higher_t():
    # The degree-1 construction happens to be 3-wise independent (a parity
    # over S reduces to lsb(a * xor(S)) ^ |S| * lsb(b)), but any 4 points
    # with xor 0, e.g. {0,1,2,3}, make an even-size deterministic parity.
    gen = ExactTwise(6, 2)
    assert gen.seed_bits == 6  # 2 coefficients in GF(2^3)
    assert verify_twise(gen, 6, 3).ok
    rep = verify_twise(gen, 6, 4)
    assert not rep.ok
    assert rep.worst_subset == (0, 1, 2, 3)
    assert rep.worst_distance == pytest.approx(0.5)


def test_explicit_table_twise_check():
    # perfectly correlated pair: 1-wise uniform, not 2-wise
    d = ExplicitTable([0.5, 0.0, 0.0, 0.5])
    assert verify_twise(d, 2, 1).ok
    rep = verify_twise(d, 2, 2)
    assert not rep.ok
    assert rep.worst_subset == (0, 1)
    assert rep.worst_distance == pytest.approx(0.5)


def test_twise_sample_wrapper_matches_generator():
    gen = ExactTwise(6, 2)
    for seed in [0, 1, 17, 63]:
        assert twise_sample(6, 2, seed).bits == gen.outcome_for_seed(seed)
    assert len(twise_sample(6, 2, 0)) == 6


def test_eps_biased_all_linear_tests_within_bound():
    n, eps = 6, 0.25
    gen = EpsBiased(n, eps)
    assert (n - 1) / (1 << gen.field_bits) <= eps
    seeds = np.arange(1 << gen.seed_bits, dtype=np.uint64)
    outs = gen.outcomes_for_seeds(seeds)
    worst = 0.0
    for s in range(1, 1 << n):
        par = np.bitwise_count(outs & np.uint64(s)) & np.uint64(1)
        bias = abs(1.0 - 2.0 * float(par.mean()))
        worst = max(worst, bias)
    assert worst <= eps + 1e-12
    assert worst > 0.0  # the construction is biased, just boundedly so


def test_eps_biased_scalar_vector_agree():
    gen = EpsBiased(5, 0.5)
    seeds = np.arange(1 << gen.seed_bits, dtype=np.uint64)
    outs = gen.outcomes_for_seeds(seeds)
    for seed in range(1 << gen.seed_bits):
        assert gen.outcome_for_seed(seed) == int(outs[seed])
    assert epsbiased_sample(5, 0.5, 3).bits == gen.outcome_for_seed(3)


def test_exact_twise_scalar_vector_agree():
    gen = ExactTwise(7, 3)
    seeds = np.arange(0, 1 << gen.seed_bits, 97, dtype=np.uint64)
    outs = gen.outcomes_for_seeds(seeds)
    for i, seed in enumerate(seeds):
        assert gen.outcome_for_seed(int(seed)) == int(outs[i])


def test_generator_validation():
    with pytest.raises(ValidationError):
        ExactTwise(6, 0)
    with pytest.raises(ValidationError):
        ExactTwise(6, 2, field_bits=2)  # 4 points < 6 bits
    with pytest.raises(ValidationError):
        EpsBiased(6, 0.0)
    with pytest.raises(ValidationError):
        EpsBiased(100, 0.25, field_bits=4)
    with pytest.raises(ValidationError):
        ExplicitTable([0.5, 0.5, 0.5])


def test_good_dist_descriptor_round_trip():
    for gen in [UniformBits(5), ExactTwise(6, 2), EpsBiased(6, 0.25),
                ExplicitTable([0.25, 0.25, 0.25, 0.25])]:
        back = good_dist_from_descriptor(gen.descriptor())
        assert back.kind == gen.kind
        assert back.n_good == gen.n_good
        if gen.seed_bits is not None:
            assert back.seed_bits == gen.seed_bits
            seeds = np.arange(min(64, 1 << gen.seed_bits), dtype=np.uint64)
            assert np.array_equal(back.outcomes_for_seeds(seeds),
                                  gen.outcomes_for_seeds(seeds))
        else:
            assert np.array_equal(back.exact_table(), gen.exact_table())


def test_verify_twise_work_cap(monkeypatch):
    monkeypatch.setenv("NOBF_WORK_CAP", "100")
    with pytest.raises(WorkCapExceeded):
        verify_twise(UniformBits(10), 10, 5)


# ---------------------------------------------------------------------------
# adversaries


def test_constant_adversary():
    adv = ConstantAdversary(0b101)
    assert adv.bad_bits(0, 4, 3) == 0b101
    assert np.array_equal(
        adv.bad_bits_batch(np.arange(4, dtype=np.uint64), 4, 3), [5, 5, 5, 5]
    )
    with pytest.raises(ValidationError):
        adv.bad_bits(0, 4, 2)  # pattern wider than q


def test_parity_and_majority_adversaries():
    par = ParityOfGood()
    assert par.bad_bits(0b1011, 4, 2) == 0b11
    assert par.bad_bits(0b1001, 4, 2) == 0
    maj = MajorityOfGood()
    assert maj.bad_bits(0b1011, 4, 2) == 0b11
    assert maj.bad_bits(0b0011, 4, 2) == 0  # tie -> 0
    goods = np.arange(16, dtype=np.uint64)
    for adv in (par, maj):
        batch = adv.bad_bits_batch(goods, 4, 2)
        assert [int(v) for v in batch] == [adv.bad_bits(g, 4, 2) for g in range(16)]


def test_table_adversary_and_missing_entries():
    adv = TableAdversary(2, {0: 1, 3: 0})
    assert adv.bad_bits(0, 2, 1) == 1
    with pytest.raises(ValidationError):
        adv.bad_bits(1, 2, 1)  # no entry
    with pytest.raises(DimensionError):
        adv.bad_bits(0, 3, 1)
    full = TableAdversary(2, [0, 1, 1, 0])
    assert [full.bad_bits(g, 2, 1) for g in range(4)] == [0, 1, 1, 0]


def test_adversary_descriptor_round_trip():
    for adv in [ConstantAdversary(3), ParityOfGood(), MajorityOfGood(),
                TableAdversary(2, [0, 1, 1, 0])]:
        back = adversary_from_descriptor(adv.descriptor())
        assert back.kind == adv.kind
        goods = np.arange(4, dtype=np.uint64)
        assert np.array_equal(back.bad_bits_batch(goods, 2, 2),
                              adv.bad_bits_batch(goods, 2, 2))


# ---------------------------------------------------------------------------
# the composed source


def _parity_spec(n=6, bad=(1, 4)):
    return NobfSourceSpec(n, bad, UniformBits(n - len(bad)), ParityOfGood())


def test_spec_positions_and_compose():
    spec = _parity_spec()
    assert spec.q == 2
    assert spec.bad_positions == (1, 4)
    assert spec.good_positions == (0, 2, 3, 5)
    # good bits j land at good_positions[j], bad bits at bad_positions[j]
    x = spec.compose(0b0001, 0b10)
    assert x == (1 << 0) | (1 << 4)


def test_spec_validation():
    with pytest.raises(ValidationError):
        NobfSourceSpec(4, [4], UniformBits(3))
    with pytest.raises(DimensionError):
        NobfSourceSpec(4, [0], UniformBits(4))
    with pytest.raises(ValidationError):
        NobfSourceSpec(4, [0], UniformBits(3), t=4)  # t > n - q
    with pytest.raises(ValidationError):
        NobfSourceSpec(6, [0], ExactTwise(5, 2), t=3)  # beyond the guarantee
    spec = NobfSourceSpec(6, [0], ExactTwise(5, 2))
    assert spec.t == 2  # defaulted from the generator


def test_sampling_chunk_invariance_and_determinism():
    spec = _parity_spec()
    whole = sample_nobf_batch(spec, 7, 100)
    again = sample_nobf_batch(spec, 7, 100)
    assert np.array_equal(whole, again)
    parts = np.concatenate([
        sample_nobf_batch(spec, 7, 30, start=0),
        sample_nobf_batch(spec, 7, 45, start=30),
        sample_nobf_batch(spec, 7, 25, start=75),
    ])
    assert np.array_equal(parts, whole)
    assert not np.array_equal(whole, sample_nobf_batch(spec, 8, 100))


def test_adversary_constraint_holds_on_samples():
    spec = _parity_spec()
    xs = sample_nobf_batch(spec, 3, 500)
    for x in xs:
        v = BitVector(6, int(x))
        good = [v[p] for p in spec.good_positions]
        expect = sum(good) & 1
        assert v[1] == expect and v[4] == expect


def test_enumerate_matches_empirical():
    spec = _parity_spec()
    exact = enumerate_nobf(spec)
    assert exact.as_table().sum() == pytest.approx(1.0)
    xs = sample_nobf_batch(spec, 11, 1 << 15)
    emp = Distribution.empirical(6, xs).as_table()
    assert 0.5 * np.abs(emp - exact.as_table()).sum() < 0.02


def test_enumerate_support_respects_adversary():
    spec = _parity_spec()
    table = enumerate_nobf(spec).as_table()
    for x in np.nonzero(table)[0]:
        v = BitVector(6, int(x))
        expect = sum(v[p] for p in spec.good_positions) & 1
        assert v[1] == expect and v[4] == expect


def test_zeroed_counterpart_good_marginal_unchanged():
    spec = _parity_spec()
    zero = zeroed_counterpart(spec)
    a = enumerate_nobf(spec).marginal(spec.good_positions).as_table()
    b = enumerate_nobf(zero).marginal(spec.good_positions).as_table()
    assert np.allclose(a, b)
    # and the zeroed source really pins the bad coordinates
    zt = enumerate_nobf(zero).as_table()
    for x in np.nonzero(zt)[0]:
        v = BitVector(6, int(x))
        assert v[1] == 0 and v[4] == 0


def test_spec_descriptor_round_trip():
    spec = NobfSourceSpec(8, [2, 5], ExactTwise(6, 2), MajorityOfGood(), gamma=0.0)
    d = spec.to_descriptor()
    assert d["format"] == "nobf-source-spec"
    back = NobfSourceSpec.from_descriptor(json.loads(json.dumps(d)))
    assert back.n == spec.n
    assert back.bad_positions == spec.bad_positions
    assert back.t == spec.t
    assert np.array_equal(sample_nobf_batch(back, 5, 64),
                          sample_nobf_batch(spec, 5, 64))


def test_sample_nobf_scalar():
    spec = _parity_spec()
    x = sample_nobf(spec, 9)
    assert len(x) == 6
    good = [x[p] for p in spec.good_positions]
    assert x[1] == sum(good) & 1


# ---------------------------------------------------------------------------
# sample-batch files


def test_sample_batch_file_round_trip(tmp_path):
    spec = _parity_spec()
    samples = sample_nobf_batch(spec, 13, 40)
    path = tmp_path / "batch.samples"
    write_sample_batch(path, spec, samples, seed=13)
    header, back = read_sample_batch(path)
    assert header["format"] == "nobf-samples"
    assert header["n"] == 6 and header["count"] == 40 and header["seed"] == 13
    assert np.array_equal(back, samples)


def test_sample_batch_hex_lines_are_lsb_nibble_first(tmp_path):
    spec = NobfSourceSpec(6, [], UniformBits(6), ConstantAdversary(0))
    path = tmp_path / "one.samples"
    write_sample_batch(path, spec, np.array([0b001011], dtype=np.uint64), seed=0)
    lines = path.read_text().splitlines()
    assert lines[1] == "b0"
    assert BitVector.from_hex(6, lines[1]).bits == 0b001011


def test_sample_batch_count_mismatch_rejected(tmp_path):
    spec = _parity_spec()
    path = tmp_path / "bad.samples"
    write_sample_batch(path, spec, sample_nobf_batch(spec, 1, 5), seed=1)
    text = path.read_text().splitlines()
    path.write_text("\n".join(text[:-1]) + "\n")  # drop a sample line
    with pytest.raises(ValidationError):
        read_sample_batch(path)
