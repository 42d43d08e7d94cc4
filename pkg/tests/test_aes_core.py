import os
import random

import pytest
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes
from hypothesis import given, settings
from hypothesis import strategies as st

from dprcrypt import aes_core as A
from dprcrypt.errors import BlockLengthError, KeyLengthError
from dprcrypt.gf256 import gf_mul
from oracles import reference_aes as ref

FIPS_PLAINTEXT = bytes.fromhex("00112233445566778899aabbccddeeff")
FIPS_VECTORS = {
    128: ("000102030405060708090a0b0c0d0e0f", "69c4e0d86a7b0430d8cdb78070b4c55a"),
    192: ("000102030405060708090a0b0c0d0e0f1011121314151617", "dda97ca4864cdfe06eaf70a0ec0d7191"),
    256: ("000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f",
          "8ea2b7ca516745bfeafc49904b496089"),
}

state16 = st.binary(min_size=16, max_size=16)


def library_encrypt(key, block):
    enc = Cipher(algorithms.AES(key), modes.ECB()).encryptor()
    return enc.update(block) + enc.finalize()


# -- variants ----------------------------------------------------------------

def test_variant_table():
    assert [(v.key_bits, v.nk, v.nr) for v in A.VARIANTS.values()] == [
        (128, 4, 10), (192, 6, 12), (256, 8, 14)]


def test_variant_rejects_other_shapes():
    with pytest.raises(ValueError):
        A.CipherVariant(128, 6, 10)
    with pytest.raises(ValueError):
        A.CipherVariant.from_bits(160)


# -- affine map and S-box ----------------------------------------------------

def test_affine_examples():
    assert A.affine_transform(0x00) == 0x63
    assert A.affine_transform(0x01) == 0x7C


def test_affine_round_trip_all_bytes():
    assert all(A.inverse_affine_transform(A.affine_transform(b)) == b for b in range(256))


def test_inverse_affine_matrix_is_published_rotation_form():
    # b -> rotl(b,1) ^ rotl(b,3) ^ rotl(b,6) ^ 0x05 applied to b ^ 0x63
    def rotl(x, n):
        return ((x << n) | (x >> (8 - n))) & 0xFF

    for b in range(256):
        expected = rotl(b, 1) ^ rotl(b, 3) ^ rotl(b, 6) ^ 0x05
        assert A.inverse_affine_transform(b) == expected


def test_sbox_examples():
    sbox = A.build_sbox()
    assert sbox.forward[0x00] == 0x63
    assert sbox.forward[0x01] == 0x7C


def test_sbox_matches_reference():
    assert list(A.build_sbox().forward) == ref.SBOX
    assert list(A.build_sbox().inverse) == ref.INV_SBOX


def test_sbox_is_permutation():
    sbox = A.build_sbox()
    assert sorted(sbox.forward) == list(range(256))
    assert all(sbox.inverse[sbox.forward[b]] == b for b in range(256))


# -- round transformations ---------------------------------------------------

def test_sub_bytes_zero_state():
    assert A.sub_bytes(bytes(16)) == bytes([0x63] * 16)


def test_sub_bytes_is_positionwise():
    s = bytes(range(16))
    assert A.sub_bytes(s) == bytes(A.SBOX.forward[b] for b in s)


@given(state16)
def test_sub_bytes_round_trip(s):
    assert A.inv_sub_bytes(A.sub_bytes(s)) == s


def test_shift_rows_rotations():
    rows = [[0x00, 0x01, 0x02, 0x03], [0x10, 0x11, 0x12, 0x13],
            [0x20, 0x21, 0x22, 0x23], [0x30, 0x31, 0x32, 0x33]]
    out = A.state_rows(A.shift_rows(A.state_from_rows(rows)))
    assert out[0] == rows[0]
    assert out[1] == [0x11, 0x12, 0x13, 0x10]
    assert out[2] == [0x22, 0x23, 0x20, 0x21]
    assert out[3] == [0x33, 0x30, 0x31, 0x32]


@given(state16)
def test_shift_rows_round_trip(s):
    assert A.inv_shift_rows(A.shift_rows(s)) == s
    assert A.state_rows(A.shift_rows(s))[0] == A.state_rows(s)[0]


def test_state_layout_is_column_major():
    s = bytes(range(16))
    rows = A.state_rows(s)
    assert rows[1][2] == 9  # byte i -> row i % 4, column i // 4
    assert A.state_from_rows(rows) == s


def test_mix_column_examples():
    assert A.mix_column([0, 0, 0, 0]) == [0, 0, 0, 0]
    assert A.mix_column([0xDB, 0x13, 0x53, 0x45]) == [0x8E, 0x4D, 0xA1, 0xBC]


def test_mix_columns_fips_round_one():
    # FIPS-197 appendix B, round 1: after ShiftRows -> after MixColumns
    before = bytes.fromhex("d4bf5d30e0b452aeb84111f11e2798e5")
    after = bytes.fromhex("046681e5e0cb199a48f8d37a2806264c")
    assert A.mix_columns(before) == after
    assert A.inv_mix_columns(after) == before


def test_mix_matrix_times_inverse_is_identity():
    for i in range(4):
        for j in range(4):
            acc = 0
            for k in range(4):
                acc ^= gf_mul(A.MIX_MATRIX[i][k], A.INV_MIX_MATRIX[k][j])
            assert acc == (1 if i == j else 0)


def test_mix_poly_times_inverse_poly_is_one():
    assert A.poly_mulmod(A.MIX_POLY, A.INV_MIX_POLY) == [1, 0, 0, 0]


def test_matrix_and_polynomial_paths_agree(rng):
    for _ in range(2000):
        col = [rng.randrange(256) for _ in range(4)]
        assert A.mix_column(col) == A.mix_column_poly(col)


def test_inv_mix_columns_round_trip_columns(rng):
    for col in ([0] * 4, [0xFF] * 4):
        assert A.inv_mix_column(A.mix_column(col)) == col
    for _ in range(100_000):
        col = [rng.randrange(256) for _ in range(4)]
        assert A.inv_mix_column(A.mix_column(col)) == col


def test_add_round_key_properties():
    s = os.urandom(16)
    rk = os.urandom(16)
    assert A.add_round_key(s, bytes(16)) == s
    assert A.add_round_key(A.add_round_key(s, rk), rk) == s
    assert A.add_round_key(s, s) == bytes(16)
    with pytest.raises(ValueError):
        A.add_round_key(s, bytes(15))


# -- key schedule --------------------------------------------------------------

def test_round_key_counts(variant):
    ks = A.key_expansion(bytes(variant.key_bytes), variant)
    assert len(ks.round_keys) == variant.nr + 1
    assert {128: 11, 192: 13, 256: 15}[variant.key_bits] == len(ks.round_keys)


def test_round_key_zero_is_raw_key(variant):
    key = os.urandom(variant.key_bytes)
    assert A.key_expansion(key, variant).round_keys[0] == key[:16]


def test_fips_schedules_match_reference(variant):
    key = bytes.fromhex(FIPS_VECTORS[variant.key_bits][0])
    assert list(A.key_expansion(key, variant).round_keys) == ref.round_keys(key)


def test_fips_128_last_round_key():
    # FIPS-197 appendix A.1, w[40..43]
    ks = A.key_expansion(bytes.fromhex("2b7e151628aed2a6abf7158809cf4f3c"))
    assert ks.round_keys[10].hex() == "d014f9a8c9ee2589e13f0cc8b6630ca6"


def test_key_length_mismatch():
    with pytest.raises(KeyLengthError):
        A.key_expansion(bytes(16), A.AES256)
    with pytest.raises(KeyLengthError):
        A.key_expansion(bytes(20))


# -- full cipher ---------------------------------------------------------------

def test_fips_known_answer(variant):
    key_hex, ct_hex = FIPS_VECTORS[variant.key_bits]
    key = bytes.fromhex(key_hex)
    assert ref.encrypt(key, FIPS_PLAINTEXT).hex() == ct_hex
    ks = A.key_expansion(key, variant)
    assert A.encrypt_block(FIPS_PLAINTEXT, ks).hex() == ct_hex
    assert A.decrypt_block(bytes.fromhex(ct_hex), ks) == FIPS_PLAINTEXT


def test_matches_library_on_random_inputs(variant, rng):
    for _ in range(50):
        key = rng.randbytes(variant.key_bytes)
        block = rng.randbytes(16)
        ks = A.key_expansion(key, variant)
        assert A.encrypt_block(block, ks) == library_encrypt(key, block)


@settings(max_examples=60)
@given(st.sampled_from([16, 24, 32]).flatmap(lambda n: st.binary(min_size=n, max_size=n)), state16)
def test_round_trip_property(key, block):
    ks = A.key_expansion(key)
    assert A.decrypt_block(A.encrypt_block(block, ks), ks) == block


def test_distinct_plaintexts_distinct_ciphertexts(variant, rng):
    ks = A.key_expansion(rng.randbytes(variant.key_bytes), variant)
    blocks = {rng.randbytes(16) for _ in range(500)}
    assert len({A.encrypt_block(b, ks) for b in blocks}) == len(blocks)


def test_wrong_key_does_not_decrypt(variant, rng):
    k1, k2 = rng.randbytes(variant.key_bytes), rng.randbytes(variant.key_bytes)
    p = rng.randbytes(16)
    c = A.encrypt_block(p, A.key_expansion(k1, variant))
    assert A.decrypt_block(c, A.key_expansion(k2, variant)) != p


def test_round_and_key_addition_counts(variant):
    seen = []
    ks = A.key_expansion(bytes(variant.key_bytes), variant)
    A.encrypt_block(bytes(16), ks, observer=lambda kind, r: seen.append(kind))
    assert seen.count("round") == variant.nr
    assert seen.count("add_round_key") == variant.nr + 1


def test_block_length_checked():
    ks = A.key_expansion(bytes(16))
    with pytest.raises(ValueError):
        A.encrypt_block(bytes(15), ks)
    with pytest.raises(BlockLengthError):
        A.encrypt(bytes(17), ks)


def test_ecb_helpers_round_trip(rng):
    ks = A.key_expansion(rng.randbytes(24))
    data = rng.randbytes(64)
    assert A.decrypt(A.encrypt(data, ks), ks) == data
