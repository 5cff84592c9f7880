"""Linear codes over GF(2): presets, distance, seeded search."""

import itertools
import json

import numpy as np
import pytest

from nobfext.codes import (LinearCode, build_good_code, check_row_combinations,
                           compress, encode, encode_message,
                           min_distance_exact, preset_code)
from nobfext.errors import (DimensionError, SearchBudgetExceeded,
                            ValidationError, WorkCapExceeded)
from nobfext.gf2 import BitMatrix, BitVector


def _distance_brute(code):
    """Distance oracle: encode every nonzero message and take the minimum
    weight, via the public encoder only."""
    best = code.r + 1
    for v in range(1, 1 << code.m):
        w = encode_message(code, BitVector(code.m, v)).weight()
        best = min(best, w)
    return best


# ---------------------------------------------------------------------------
# construction and presets


def test_linear_code_validation():
    with pytest.raises(ValidationError):
        LinearCode(m=2, r=3, g=BitMatrix.from01(["110", "110"]))  # rank 1
    with pytest.raises(DimensionError):
        LinearCode(m=2, r=4, g=BitMatrix.from01(["110", "011"]))
    with pytest.raises(ValidationError):
        LinearCode(m=1, r=3, g=BitMatrix.from01(["111"]), verified_d=4)


@pytest.mark.parametrize("name,m,r,d", [
    ("identity-3", 3, 3, 1),
    ("identity-1", 1, 1, 1),
    ("repetition-5", 1, 5, 5),
    ("hamming-7-4", 4, 7, 3),
    ("simplex-k3", 3, 7, 4),
    ("simplex-k2", 2, 3, 2),
])
def test_presets(name, m, r, d):
    code = preset_code(name)
    assert (code.m, code.r, code.verified_d) == (m, r, d)
    assert _distance_brute(code) == d
    assert check_row_combinations(code)


def test_preset_unknown_name():
    with pytest.raises(ValidationError):
        preset_code("golay-23")
    with pytest.raises(ValidationError):
        preset_code("identity-0")


def test_simplex_constant_weight():
    # every nonzero simplex codeword has weight 2^(k-1)
    for k in [2, 3, 4]:
        code = preset_code(f"simplex-k{k}")
        weights = {encode_message(code, BitVector(code.m, v)).weight()
                   for v in range(1, 1 << code.m)}
        assert weights == {1 << (k - 1)}


# ---------------------------------------------------------------------------
# encoding directions


def test_encode_message_examples():
    ham = preset_code("hamming-7-4")
    assert encode_message(ham, BitVector.from01("0000")).weight() == 0
    assert encode_message(ham, BitVector.from01("1000")) == BitVector.from01("1000011")
    # linearity
    a, b = BitVector(4, 0b0101), BitVector(4, 0b0011)
    assert encode_message(ham, a ^ b) == \
        encode_message(ham, a) ^ encode_message(ham, b)


def test_compress_is_matvec():
    ham = preset_code("hamming-7-4")
    y = BitVector.from01("1010101")
    z = compress(ham, y)
    assert len(z) == 4
    for i in range(4):
        assert z[i] == ham.g.row(i).dot(y)


def test_encode_dispatch():
    ham = preset_code("hamming-7-4")
    assert encode(ham, BitVector(4, 0b1001)) == encode_message(ham, BitVector(4, 0b1001))
    assert encode(ham, BitVector(7, 0b1010101)) == compress(ham, BitVector(7, 0b1010101))
    with pytest.raises(DimensionError):
        encode(ham, BitVector(5, 0))
    # square code defaults to the message direction
    ident = preset_code("identity-3")
    assert encode(ident, BitVector(3, 0b101)) == encode_message(ident, BitVector(3, 0b101))


# ---------------------------------------------------------------------------
# minimum distance


def test_min_distance_matches_brute_oracle():
    rng = np.random.default_rng(4)
    checked = 0
    while checked < 25:
        m = int(rng.integers(1, 5))
        r = int(rng.integers(m, 12))
        rows = tuple(int(v) for v in rng.integers(0, 1 << r, size=m, dtype=np.uint64))
        g = BitMatrix(cols=r, rows=rows)
        from nobfext.gf2 import gf2_rank
        if gf2_rank(g) != m:
            continue
        code = LinearCode(m=m, r=r, g=g)
        assert min_distance_exact(code) == _distance_brute(code)
        checked += 1


def test_min_distance_stores_result():
    code = LinearCode(m=4, r=7, g=preset_code("hamming-7-4").g)
    assert code.verified_d == 0
    assert min_distance_exact(code) == 3
    assert code.verified_d == 3


def test_min_distance_wide_words():
    # r > 64 exercises the big-int fallback path
    rows = tuple((1 << (20 * i)) | (1 << 79) for i in range(3))
    code = LinearCode(m=3, r=80, g=BitMatrix(cols=80, rows=rows))
    # single rows have weight 2; row pairs cancel bit 79 leaving weight 2;
    # the triple sum has weight 4 (one 1 << 20i each, bit 79 survives)
    assert min_distance_exact(code) == 2
    assert _distance_brute(code) == 2


def test_min_distance_work_cap():
    g = BitMatrix.identity(25)
    with pytest.raises(WorkCapExceeded):
        min_distance_exact(LinearCode(m=25, r=25, g=g))


def test_row_combination_weights_bounded():
    for name in ["hamming-7-4", "simplex-k3", "repetition-4", "identity-4"]:
        code = preset_code(name)
        for size in range(1, code.m + 1):
            for members in itertools.combinations(range(code.m), size):
                from nobfext.gf2 import row_combination
                w = row_combination(code.g, members).weight()
                assert code.verified_d <= w <= code.r


def test_check_row_combinations_requires_verified_distance():
    code = LinearCode(m=2, r=3, g=BitMatrix.from01(["110", "011"]))
    with pytest.raises(ValidationError):
        check_row_combinations(code)


# ---------------------------------------------------------------------------
# seeded search


def test_build_good_code_finds_and_verifies():
    code = build_good_code(4, 7, 3, seed=11)
    assert code.verified_d >= 3
    assert _distance_brute(code) == code.verified_d
    assert code.construction["kind"] == "random-search"
    assert check_row_combinations(code)


def test_build_good_code_deterministic():
    a = build_good_code(3, 8, 3, seed=5)
    b = build_good_code(3, 8, 3, seed=5)
    assert a.g == b.g and a.verified_d == b.verified_d
    c = build_good_code(3, 8, 3, seed=6)
    assert c.g != a.g  # different seed, different search path


def test_build_good_code_singleton_precheck():
    with pytest.raises(ValidationError):
        build_good_code(4, 7, 5, seed=0)  # d > r - m + 1
    with pytest.raises(ValidationError):
        build_good_code(5, 4, 1, seed=0)  # r < m


def test_build_good_code_budget_failure_carries_best():
    # [7,4,4] meets Singleton but does not exist over GF(2); the search
    # must exhaust its budget and surface the best distance it saw.
    with pytest.raises(SearchBudgetExceeded) as info:
        build_good_code(4, 7, 4, seed=3, attempts=200)
    assert info.value.best_distance == 3
    assert info.value.best is not None
    assert info.value.best.verified_d == 3


def test_code_json_round_trip():
    code = build_good_code(3, 9, 4, seed=2)
    obj = json.loads(json.dumps(code.to_json()))
    back = LinearCode.from_json(obj)
    assert back.g == code.g
    assert back.verified_d == code.verified_d
    assert back.construction == code.construction
    with pytest.raises(ValidationError):
        LinearCode.from_json({"format": "something-else"})
