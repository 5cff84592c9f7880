"""Packed GF(2) vectors and matrices.

Bit-order convention used everywhere in this package: coordinate 0 is the
least significant bit of the integer payload.  Hex serialization writes
ceil(len/4) nibbles with the least significant nibble first, i.e. the most
significant hex digit comes last.

Values are immutable after construction and safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import DimensionError, ValidationError


@dataclass(frozen=True)
class BitVector:
    """A length-n vector over GF(2), packed into one int."""

    n: int
    bits: int

    def __post_init__(self):
        if self.n < 0:
            raise ValidationError(f"negative length {self.n}")
        if self.bits < 0 or self.bits >> self.n:
            raise ValidationError(
                f"payload 0x{self.bits:x} has bits set beyond length {self.n}"
            )

    @classmethod
    def zeros(cls, n: int) -> "BitVector":
        return cls(n, 0)

    @classmethod
    def ones(cls, n: int) -> "BitVector":
        return cls(n, (1 << n) - 1)

    @classmethod
    def from_int(cls, n: int, value: int) -> "BitVector":
        """Mask value to n bits explicitly (never a silent truncation path
        for operations; only for callers that hold wider integers)."""
        return cls(n, value & ((1 << n) - 1))

    @classmethod
    def from_bits(cls, coords: Iterable[int]) -> "BitVector":
        """Coordinate sequence, index 0 first: from_bits([1,1,0]) has x0=x1=1."""
        value = 0
        n = 0
        for b in coords:
            if b not in (0, 1):
                raise ValidationError(f"coordinate {b!r} is not a bit")
            value |= b << n
            n += 1
        return cls(n, value)

    @classmethod
    def from01(cls, s: str) -> "BitVector":
        """Parse a coordinate string, leftmost character = coordinate 0."""
        return cls.from_bits(int(c) if c in "01" else -1 for c in s.replace(" ", ""))

    @classmethod
    def from_hex(cls, n: int, s: str) -> "BitVector":
        width = max(1, -(-n // 4))
        if len(s) != width:
            raise ValidationError(f"expected {width} hex digits for length {n}, got {len(s)}")
        value = int(s[::-1], 16)
        if value >> n:
            raise ValidationError(f"hex payload {s!r} has bits set beyond length {n}")
        return cls(n, value)

    def to_hex(self) -> str:
        width = max(1, -(-self.n // 4))
        return format(self.bits, f"0{width}x")[::-1]

    def to01(self) -> str:
        return "".join(str((self.bits >> i) & 1) for i in range(self.n))

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def __iter__(self) -> Iterator[int]:
        return ((self.bits >> i) & 1 for i in range(self.n))

    def __xor__(self, other: "BitVector") -> "BitVector":
        if self.n != other.n:
            raise DimensionError(f"xor of lengths {self.n} and {other.n}")
        return BitVector(self.n, self.bits ^ other.bits)

    def __and__(self, other: "BitVector") -> "BitVector":
        if self.n != other.n:
            raise DimensionError(f"and of lengths {self.n} and {other.n}")
        return BitVector(self.n, self.bits & other.bits)

    def weight(self) -> int:
        return self.bits.bit_count()

    def dot(self, other: "BitVector") -> int:
        """GF(2) inner product."""
        if self.n != other.n:
            raise DimensionError(f"dot of lengths {self.n} and {other.n}")
        return (self.bits & other.bits).bit_count() & 1

    def slice(self, start: int, length: int) -> "BitVector":
        if start < 0 or length < 0 or start + length > self.n:
            raise ValidationError(f"slice [{start}, {start + length}) outside length {self.n}")
        return BitVector(length, (self.bits >> start) & ((1 << length) - 1))

    def __repr__(self) -> str:
        return f"BitVector({self.n}, 0b{format(self.bits, f'0{max(self.n, 1)}b')})"


@dataclass(frozen=True)
class BitMatrix:
    """A rows x cols matrix over GF(2); each row packed as in BitVector."""

    cols: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if self.cols < 0:
            raise ValidationError(f"negative column count {self.cols}")
        for i, r in enumerate(self.rows):
            if r < 0 or r >> self.cols:
                raise ValidationError(f"row {i} has bits set beyond {self.cols} columns")

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @classmethod
    def identity(cls, k: int) -> "BitMatrix":
        return cls(k, tuple(1 << i for i in range(k)))

    @classmethod
    def zeros(cls, nrows: int, cols: int) -> "BitMatrix":
        return cls(cols, (0,) * nrows)

    @classmethod
    def from_rows(cls, rows: Sequence[BitVector]) -> "BitMatrix":
        if not rows:
            raise ValidationError("a matrix needs at least one row")
        cols = rows[0].n
        for r in rows:
            if r.n != cols:
                raise DimensionError("rows of differing lengths")
        return cls(cols, tuple(r.bits for r in rows))

    @classmethod
    def from01(cls, rows: Sequence[str]) -> "BitMatrix":
        return cls.from_rows([BitVector.from01(s) for s in rows])

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, self.rows[i])

    def transpose(self) -> "BitMatrix":
        cols = [0] * self.cols
        for i, r in enumerate(self.rows):
            while r:
                j = (r & -r).bit_length() - 1
                cols[j] |= 1 << i
                r &= r - 1
        return BitMatrix(self.nrows, tuple(cols))

    def to_hex_rows(self) -> list[str]:
        return [self.row(i).to_hex() for i in range(self.nrows)]

    @classmethod
    def from_hex_rows(cls, cols: int, hex_rows: Sequence[str]) -> "BitMatrix":
        return cls.from_rows([BitVector.from_hex(cols, s) for s in hex_rows])

    def __repr__(self) -> str:
        return f"BitMatrix({self.nrows}x{self.cols})"


def gf2_matvec(g: BitMatrix, y: BitVector) -> BitVector:
    """G y over GF(2): output bit i is <row i, y>."""
    if y.n != g.cols:
        raise DimensionError(f"matvec: vector length {y.n} != {g.cols} columns")
    out = 0
    for i, r in enumerate(g.rows):
        out |= ((r & y.bits).bit_count() & 1) << i
    return BitVector(g.nrows, out)


def row_combination(g: BitMatrix, s: Iterable[int]) -> BitVector:
    """GF(2) sum of the rows indexed by s (0-based); s must be nonempty.

    The result is a codeword of the code generated by g.
    """
    idx = sorted(set(s))
    if not idx:
        raise ValidationError("row combination over an empty index set")
    if idx[0] < 0 or idx[-1] >= g.nrows:
        raise ValidationError(f"row index out of range 0..{g.nrows - 1}: {idx}")
    acc = 0
    for i in idx:
        acc ^= g.rows[i]
    return BitVector(g.cols, acc)


def hamming_weight(v: BitVector) -> int:
    return v.bits.bit_count()


def gf2_rank(g: BitMatrix) -> int:
    """Rank over GF(2) by Gaussian elimination on packed rows."""
    work = [r for r in g.rows if r]
    rank = 0
    for col in range(g.cols):
        mask = 1 << col
        pivot = next((k for k in range(rank, len(work)) if work[k] & mask), None)
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        for k in range(len(work)):
            if k != rank and work[k] & mask:
                work[k] ^= work[rank]
        rank += 1
        if rank == len(work):
            break
    return rank
