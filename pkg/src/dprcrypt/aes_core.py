"""The AES block cipher for 128, 192 and 256-bit keys.

A state is 16 bytes in column-major order: byte ``i`` sits at row ``i % 4``,
column ``i // 4``. Every transformation takes and returns ``bytes`` so states
and round keys are immutable and can be shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from dprcrypt.errors import BlockLengthError, KeyLengthError
from dprcrypt.gf256 import gf_inv, gf_mul, mul_table, xtime

BLOCK_SIZE = 16

State = bytes
Observer = Callable[[str, int], None]


@dataclass(frozen=True)
class CipherVariant:
    key_bits: int
    nk: int
    nr: int

    def __post_init__(self):
        if (self.key_bits, self.nk, self.nr) not in _VALID_SHAPES:
            raise ValueError(
                f"not an AES variant: key_bits={self.key_bits} nk={self.nk} nr={self.nr}"
            )

    @property
    def key_bytes(self) -> int:
        return self.key_bits // 8

    @property
    def name(self) -> str:
        return f"AES-{self.key_bits}"

    @classmethod
    def from_bits(cls, key_bits: int) -> "CipherVariant":
        try:
            return VARIANTS[int(key_bits)]
        except (KeyError, ValueError):
            raise ValueError(f"unsupported key size: {key_bits!r} (use 128, 192 or 256)") from None

    def __str__(self):
        return self.name


_VALID_SHAPES = {(128, 4, 10), (192, 6, 12), (256, 8, 14)}

AES128 = CipherVariant(128, 4, 10)
AES192 = CipherVariant(192, 6, 12)
AES256 = CipherVariant(256, 8, 14)
VARIANTS = {v.key_bits: v for v in (AES128, AES192, AES256)}


# -- S-box ------------------------------------------------------------------

# Row i lists the input bits feeding output bit i (bit 0 = least significant).
AFFINE_MATRIX = (
    (1, 0, 0, 0, 1, 1, 1, 1),
    (1, 1, 0, 0, 0, 1, 1, 1),
    (1, 1, 1, 0, 0, 0, 1, 1),
    (1, 1, 1, 1, 0, 0, 0, 1),
    (1, 1, 1, 1, 1, 0, 0, 0),
    (0, 1, 1, 1, 1, 1, 0, 0),
    (0, 0, 1, 1, 1, 1, 1, 0),
    (0, 0, 0, 1, 1, 1, 1, 1),
)
AFFINE_CONSTANT = 0x63


def _gf2_matvec(matrix: Sequence[Sequence[int]], b: int) -> int:
    out = 0
    for i, row in enumerate(matrix):
        bit = 0
        for j, m in enumerate(row):
            bit ^= m & (b >> j)
        out |= (bit & 1) << i
    return out


def _gf2_invert(matrix: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    """Gauss-Jordan inversion of a square bit matrix."""
    n = len(matrix)
    rows = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col]), None)
        if pivot is None:
            raise ValueError("matrix is singular over GF(2)")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        for r in range(n):
            if r != col and rows[r][col]:
                rows[r] = [x ^ y for x, y in zip(rows[r], rows[col])]
    return tuple(tuple(r[n:]) for r in rows)


INV_AFFINE_MATRIX = _gf2_invert(AFFINE_MATRIX)


def affine_transform(b: int) -> int:
    return _gf2_matvec(AFFINE_MATRIX, b) ^ AFFINE_CONSTANT


def inverse_affine_transform(b: int) -> int:
    return _gf2_matvec(INV_AFFINE_MATRIX, b ^ AFFINE_CONSTANT)


@dataclass(frozen=True)
class SBoxTables:
    forward: bytes
    inverse: bytes


def build_sbox() -> SBoxTables:
    forward = bytes(affine_transform(gf_inv(b)) for b in range(256))
    inverse = bytearray(256)
    for b, s in enumerate(forward):
        inverse[s] = b
    if sorted(forward) != list(range(256)):
        raise AssertionError("S-box is not a permutation")
    return SBoxTables(forward, bytes(inverse))


SBOX = build_sbox()


# -- round transformations --------------------------------------------------

def state_from_rows(rows: Sequence[Sequence[int]]) -> State:
    return bytes(rows[i % 4][i // 4] for i in range(16))


def state_rows(s: State) -> list[list[int]]:
    return [[s[r + 4 * c] for c in range(4)] for r in range(4)]


def sub_bytes(s: State, t: SBoxTables = SBOX) -> State:
    return s.translate(t.forward)


def inv_sub_bytes(s: State, t: SBoxTables = SBOX) -> State:
    return s.translate(t.inverse)


# output index -> input index; row r of column c comes from column c + r
_SHIFT = tuple((i % 4) + 4 * ((i // 4 + i % 4) % 4) for i in range(16))
_INV_SHIFT = tuple((i % 4) + 4 * ((i // 4 - i % 4) % 4) for i in range(16))


def shift_rows(s: State) -> State:
    return bytes(s[j] for j in _SHIFT)


def inv_shift_rows(s: State) -> State:
    return bytes(s[j] for j in _INV_SHIFT)


MIX_MATRIX = (
    (0x02, 0x03, 0x01, 0x01),
    (0x01, 0x02, 0x03, 0x01),
    (0x01, 0x01, 0x02, 0x03),
    (0x03, 0x01, 0x01, 0x02),
)
INV_MIX_MATRIX = (
    (0x0E, 0x0B, 0x0D, 0x09),
    (0x09, 0x0E, 0x0B, 0x0D),
    (0x0D, 0x09, 0x0E, 0x0B),
    (0x0B, 0x0D, 0x09, 0x0E),
)
# a(x) = {03}x^3 + {01}x^2 + {01}x + {02}, coefficients low degree first
MIX_POLY = (0x02, 0x01, 0x01, 0x03)
INV_MIX_POLY = (0x0E, 0x09, 0x0D, 0x0B)

_MUL = {c: mul_table(c) for c in (0x01, 0x02, 0x03, 0x09, 0x0B, 0x0D, 0x0E)}


def _matrix_column(matrix, col: Sequence[int]) -> list[int]:
    out = []
    for row in matrix:
        acc = 0
        for coeff, x in zip(row, col):
            acc ^= _MUL[coeff][x]
        out.append(acc)
    return out


def mix_column(col: Sequence[int]) -> list[int]:
    return _matrix_column(MIX_MATRIX, col)


def inv_mix_column(col: Sequence[int]) -> list[int]:
    return _matrix_column(INV_MIX_MATRIX, col)


def poly_mulmod(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Product of two 4-term polynomials over GF(2^8) modulo x^4 + 1.

    Coefficients are listed from degree 0 upward. Since x^4 = 1 in this ring
    the exponents of each partial product simply wrap modulo 4.
    """
    out = [0, 0, 0, 0]
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[(i + j) % 4] ^= gf_mul(ai, bj)
    return out


def mix_column_poly(col: Sequence[int]) -> list[int]:
    return poly_mulmod(MIX_POLY, col)


def _map_columns(s: State, fn) -> State:
    out = bytearray(16)
    for c in range(4):
        out[4 * c:4 * c + 4] = bytes(fn(s[4 * c:4 * c + 4]))
    return bytes(out)


def mix_columns(s: State) -> State:
    return _map_columns(s, mix_column)


def inv_mix_columns(s: State) -> State:
    return _map_columns(s, inv_mix_column)


def add_round_key(s: State, rk: bytes) -> State:
    if len(rk) != BLOCK_SIZE:
        raise ValueError(f"round key must be 16 bytes, got {len(rk)}")
    return bytes(x ^ y for x, y in zip(s, rk))


# -- key schedule -----------------------------------------------------------

@dataclass(frozen=True)
class KeySchedule:
    variant: CipherVariant
    round_keys: tuple[bytes, ...]

    def __post_init__(self):
        if len(self.round_keys) != self.variant.nr + 1:
            raise ValueError(
                f"{self.variant} needs {self.variant.nr + 1} round keys, got {len(self.round_keys)}"
            )


def _sub_word(w: bytes) -> bytes:
    return w.translate(SBOX.forward)


def key_expansion(key: bytes, v: Optional[CipherVariant] = None) -> KeySchedule:
    """Expand a raw key into ``nr + 1`` round keys.

    When ``v`` is omitted the variant is inferred from the key length.
    """
    key = bytes(key)
    if v is None:
        if len(key) * 8 not in VARIANTS:
            raise KeyLengthError(f"key must be 16, 24 or 32 bytes, got {len(key)}")
        v = VARIANTS[len(key) * 8]
    if len(key) != v.key_bytes:
        raise KeyLengthError(f"{v} needs a {v.key_bytes}-byte key, got {len(key)} bytes")

    words = [key[4 * i:4 * i + 4] for i in range(v.nk)]
    rcon = 0x01
    for i in range(v.nk, 4 * (v.nr + 1)):
        t = words[i - 1]
        if i % v.nk == 0:
            t = _sub_word(t[1:] + t[:1])
            t = bytes([t[0] ^ rcon]) + t[1:]
            rcon = xtime(rcon)
        elif v.nk > 6 and i % v.nk == 4:
            t = _sub_word(t)
        words.append(bytes(a ^ b for a, b in zip(words[i - v.nk], t)))

    round_keys = tuple(b"".join(words[4 * r:4 * r + 4]) for r in range(v.nr + 1))
    return KeySchedule(v, round_keys)


# -- block cipher -----------------------------------------------------------

def _check_block(block: bytes) -> bytes:
    block = bytes(block)
    if len(block) != BLOCK_SIZE:
        raise ValueError(f"block must be 16 bytes, got {len(block)}")
    return block


def encrypt_block(block: bytes, ks: KeySchedule, observer: Optional[Observer] = None) -> bytes:
    """Encrypt one block.

    ``observer``, if given, is called with ``("add_round_key", r)`` for every
    key addition and ``("round", r)`` at the start of every round ``r >= 1``.
    """
    s = _check_block(block)
    nr = ks.variant.nr
    s = add_round_key(s, ks.round_keys[0])
    if observer:
        observer("add_round_key", 0)
    for rnd in range(1, nr + 1):
        if observer:
            observer("round", rnd)
        s = shift_rows(sub_bytes(s))
        if rnd != nr:
            s = mix_columns(s)
        s = add_round_key(s, ks.round_keys[rnd])
        if observer:
            observer("add_round_key", rnd)
    return s


def decrypt_block(block: bytes, ks: KeySchedule, observer: Optional[Observer] = None) -> bytes:
    s = _check_block(block)
    nr = ks.variant.nr
    s = add_round_key(s, ks.round_keys[nr])
    if observer:
        observer("add_round_key", nr)
    for rnd in range(nr - 1, -1, -1):
        if observer:
            observer("round", nr - rnd)
        s = inv_sub_bytes(inv_shift_rows(s))
        s = add_round_key(s, ks.round_keys[rnd])
        if observer:
            observer("add_round_key", rnd)
        if rnd != 0:
            s = inv_mix_columns(s)
    return s


def encrypt(data: bytes, ks: KeySchedule) -> bytes:
    """Block-by-block (ECB) encryption of whole blocks; no padding."""
    return _ecb(data, ks, encrypt_block)


def decrypt(data: bytes, ks: KeySchedule) -> bytes:
    return _ecb(data, ks, decrypt_block)


def _ecb(data: bytes, ks: KeySchedule, fn) -> bytes:
    if len(data) % BLOCK_SIZE:
        raise BlockLengthError(f"data length {len(data)} is not a multiple of 16 bytes")
    return b"".join(fn(data[i:i + BLOCK_SIZE], ks) for i in range(0, len(data), BLOCK_SIZE))
