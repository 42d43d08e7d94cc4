"""Arithmetic in GF(2^8) with the Rijndael modulus x^8 + x^4 + x^3 + x + 1.

Elements are plain ints in 0..255; bit i is the coefficient of x^i.
"""

MODULUS = 0x11B


def gf_add(a: int, b: int) -> int:
    return a ^ b


def xtime(a: int) -> int:
    """Multiply by x (i.e. by {02})."""
    a <<= 1
    if a & 0x100:
        a ^= MODULUS
    return a


def gf_mul(a: int, b: int) -> int:
    """Shift-and-add product, reducing after every doubling."""
    result = 0
    while b:
        if b & 1:
            result ^= a
        a = xtime(a)
        b >>= 1
    return result


def gf_pow(a: int, n: int) -> int:
    result = 1
    while n:
        if n & 1:
            result = gf_mul(result, a)
        a = gf_mul(a, a)
        n >>= 1
    return result


def gf_inv(a: int) -> int:
    """Multiplicative inverse via a^254; zero maps to zero."""
    if a == 0:
        return 0
    return gf_pow(a, 254)


def mul_table(c: int) -> tuple[int, ...]:
    """Lookup table for multiplication by a fixed constant."""
    return tuple(gf_mul(c, x) for x in range(256))
