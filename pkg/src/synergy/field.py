"""Prime-field arithmetic on int64 numpy arrays, plus the deterministic
generator behind every random draw in the package.

Field elements are plain ints in ``[0, modulus)``.  The default modulus
``2**31 - 1`` is prime and small enough that one product of reduced
elements fits in int64; products are therefore reduced eagerly, and the
short sums that follow cannot overflow at the matrix sizes used here.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = [
    "MODULUS",
    "SingularMatrixError",
    "SeededRng",
    "is_prime",
    "inverse",
    "matmul",
    "solve",
    "matrix_rank",
    "is_invertible",
    "cauchy_combining_matrix",
]

MODULUS = (1 << 31) - 1

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class SingularMatrixError(Exception):
    """Square system has no unique solution over the field."""


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin; exact for anything below 3.3e24."""
    if n < 2:
        return False
    for base in _MR_BASES:
        if n % base == 0:
            return n == base
    d, twos = n - 1, 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    for base in _MR_BASES:
        x = pow(base, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(twos - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def inverse(a: int, modulus: int = MODULUS) -> int:
    """Multiplicative inverse of a nonzero element."""
    a = int(a) % modulus
    if a == 0:
        raise ZeroDivisionError("zero has no multiplicative inverse")
    return pow(a, -1, modulus)


def matmul(a: np.ndarray, b: np.ndarray, modulus: int = MODULUS) -> np.ndarray:
    """Matrix (or matrix-vector) product over the field.

    Each scalar product is reduced before summation, so the inner
    dimension may grow to ~2**32 terms without overflowing int64.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    single = b.ndim == 1
    rhs = b[:, np.newaxis] if single else b
    products = (a[:, :, np.newaxis] * rhs[np.newaxis, :, :]) % modulus
    out = products.sum(axis=1) % modulus
    return out[:, 0] if single else out


def solve(a: np.ndarray, b: np.ndarray, modulus: int = MODULUS) -> np.ndarray:
    """Solve ``a @ x = b`` over the field; ``b`` may be a vector or a
    matrix of stacked right-hand-side columns.

    Gauss-Jordan with the first nonzero pivot (exact arithmetic needs no
    magnitude pivoting).  Raises SingularMatrixError when ``a`` is not
    invertible.
    """
    a = np.array(a, dtype=np.int64) % modulus
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("coefficient matrix must be square")
    n = a.shape[0]
    b = np.array(b, dtype=np.int64) % modulus
    single = b.ndim == 1
    rhs = b.reshape(n, 1) if single else b
    if rhs.shape[0] != n:
        raise ValueError("right-hand side does not match the matrix")
    for col in range(n):
        pivots = np.nonzero(a[col:, col])[0]
        if pivots.size == 0:
            raise SingularMatrixError(f"rank deficiency at column {col}")
        pivot = col + int(pivots[0])
        if pivot != col:
            a[[col, pivot]] = a[[pivot, col]]
            rhs[[col, pivot]] = rhs[[pivot, col]]
        inv = pow(int(a[col, col]), -1, modulus)
        a[col] = a[col] * inv % modulus
        rhs[col] = rhs[col] * inv % modulus
        below = a[col + 1 :, col].copy()
        a[col + 1 :] = (a[col + 1 :] - np.outer(below, a[col])) % modulus
        rhs[col + 1 :] = (rhs[col + 1 :] - np.outer(below, rhs[col])) % modulus
    for col in range(n - 1, 0, -1):
        above = a[:col, col].copy()
        a[:col] = (a[:col] - np.outer(above, a[col])) % modulus
        rhs[:col] = (rhs[:col] - np.outer(above, rhs[col])) % modulus
    return rhs[:, 0].copy() if single else rhs


def matrix_rank(a: np.ndarray, modulus: int = MODULUS) -> int:
    """Row rank by elimination over the field."""
    a = np.array(a, dtype=np.int64) % modulus
    if a.ndim != 2:
        raise ValueError("rank needs a matrix")
    rows, cols = a.shape
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        pivots = np.nonzero(a[rank:, col])[0]
        if pivots.size == 0:
            continue
        pivot = rank + int(pivots[0])
        if pivot != rank:
            a[[rank, pivot]] = a[[pivot, rank]]
        inv = pow(int(a[rank, col]), -1, modulus)
        a[rank] = a[rank] * inv % modulus
        below = a[rank + 1 :, col].copy()
        a[rank + 1 :] = (a[rank + 1 :] - np.outer(below, a[rank])) % modulus
        rank += 1
    return rank


def is_invertible(a: np.ndarray, modulus: int = MODULUS) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and matrix_rank(a, modulus) == a.shape[0]


@lru_cache(maxsize=None)
def _cauchy(size: int, modulus: int) -> np.ndarray:
    if size < 2:
        raise ValueError("combining matrices need at least two columns")
    if modulus <= 2 * size:
        raise ValueError(f"modulus {modulus} too small for {2 * size - 1} distinct points")
    row_points = range(size - 1)
    col_points = range(size - 1, 2 * size - 1)
    matrix = np.array(
        [[inverse((x - y) % modulus, modulus) for y in col_points] for x in row_points],
        dtype=np.int64,
    )
    matrix.setflags(write=False)
    return matrix


def cauchy_combining_matrix(size: int, modulus: int = MODULUS) -> np.ndarray:
    """(size-1) x size matrix whose every column-deleted square minor is
    invertible.

    Entries are 1/(x_i - y_j) over 2*size-1 distinct field points, so
    each minor is itself a Cauchy matrix and hence nonsingular.  The
    result is deterministic in (size, modulus) and read-only.
    """
    return _cauchy(int(size), int(modulus))


class SeededRng:
    """Deterministic 64-bit stream (splitmix64); identical seeds yield
    identical streams on any platform.

    The state advances by the golden-ratio increment 0x9E3779B97F4A7C15
    and each output applies the splitmix64 finalizer to the new state.
    Draws below a bound reduce one 64-bit output modulo the bound (bias
    below 2**-33 for the moduli used here); nonzero draws reject zeros.
    Child stream i is seeded with mix64(seed XOR mix64(i + 1)) from the
    *original* seed, so children do not depend on how much of the parent
    stream was consumed.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._state = self.seed

    @staticmethod
    def _mix(z: int) -> int:
        z = (z ^ (z >> 30)) * _MIX1 & _MASK64
        z = (z ^ (z >> 27)) * _MIX2 & _MASK64
        return z ^ (z >> 31)

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return self._mix(self._state)

    def uniform_int(self, bound: int) -> int:
        """Uniform draw from [0, bound)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return self.next_u64() % bound

    def field_element(self, modulus: int = MODULUS, nonzero: bool = False) -> int:
        value = self.next_u64() % modulus
        while nonzero and value == 0:
            value = self.next_u64() % modulus
        return value

    def field_matrix(
        self, rows: int, cols: int, modulus: int = MODULUS, nonzero: bool = False
    ) -> np.ndarray:
        """Matrix of field elements, drawn row-major, one output per entry."""
        data = [self.field_element(modulus, nonzero) for _ in range(rows * cols)]
        return np.array(data, dtype=np.int64).reshape(rows, cols)

    def child(self, index: int) -> "SeededRng":
        """Independent stream derived from the original seed and an index."""
        return SeededRng(self._mix(self.seed ^ self._mix((index + 1) & _MASK64)))
