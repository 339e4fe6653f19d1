"""Arithmetic in GF(2^8) with reduction polynomial x^8 + x^4 + x^3 + x + 1 (0x11B).

Field elements are plain ints in 0..255. Addition is XOR; multiplication and
inversion go through log/antilog tables built once at import. The full 256x256
product table is exported for hot loops (polynomial evaluation over long byte
strings) that cannot afford a function call per byte.
"""

REDUCING_POLY = 0x11B
_GENERATOR = 0x03  # primitive element used to build the log/antilog tables


def _build_tables():
    exp = [0] * 512  # doubled so exp[log a + log b] needs no modulo
    log = [0] * 256
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        # multiply by the generator 0x03 = x * 2 ^ x, reducing mod 0x11B
        hi = x & 0x80
        x2 = (x << 1) & 0xFF
        if hi:
            x2 ^= REDUCING_POLY & 0xFF
        x ^= x2
    for i in range(255, 512):
        exp[i] = exp[i - 255]
    return exp, log


_EXP, _LOG = _build_tables()

# MUL[a][b] == a*b for all field elements; INV[a] == a^-1 (INV[0] unused).
MUL = [[0] * 256 for _ in range(256)]
for _a in range(1, 256):
    _row = MUL[_a]
    _la = _LOG[_a]
    for _b in range(1, 256):
        _row[_b] = _EXP[_la + _LOG[_b]]
INV = [0] * 256
for _a in range(1, 256):
    INV[_a] = _EXP[255 - _LOG[_a]]
del _a, _b, _la, _row


def gf_add(a: int, b: int) -> int:
    """Field addition (== subtraction): bytewise XOR."""
    _check(a)
    _check(b)
    return a ^ b


def gf_mul(a: int, b: int) -> int:
    """Field product of two elements."""
    _check(a)
    _check(b)
    return MUL[a][b]


def gf_inv(a: int) -> int:
    """Multiplicative inverse; zero has none."""
    _check(a)
    if a == 0:
        raise ValueError("0 has no multiplicative inverse in GF(2^8)")
    return INV[a]


def _check(v: int) -> None:
    if not isinstance(v, int) or not 0 <= v <= 255:
        raise ValueError(f"not a GF(2^8) element: {v!r}")
