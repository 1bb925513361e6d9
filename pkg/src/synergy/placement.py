"""Cache placement: split every file into equal blocks indexed by user
subsets and fill each user's cache with the blocks whose subset contains
that user.

A library is an (N, file_symbols) int64 array of field symbols.  Each
file splits into one contiguous block per replication-sized user subset,
in canonical subset order, so concatenating the blocks back in that
order reproduces the file exactly.  Block size is
``max(K - replication, 1) * granularity`` symbols: the first delivery
phase spreads a block over K - replication antennas, and the granularity
multiplier keeps every later phase's re-chunking integral.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .combinatorics import Subset, binomial, iter_subsets
from .field import MODULUS, SeededRng, is_prime

__all__ = [
    "LengthMismatchError",
    "SystemConfig",
    "SubfileIndex",
    "CacheContents",
    "random_library",
    "subpacketize",
    "fill_caches",
    "save_library",
    "load_library",
]

_HEADER_BYTES = 20  # K, N, M, granularity, modulus as little-endian uint32


class LengthMismatchError(ValueError):
    """Library shape inconsistent with the subpacketization grid."""


@dataclass(frozen=True)
class SystemConfig:
    """Problem size: K users (one transmit antenna each at the server),
    N library files, M files of cache per user, the per-block symbol
    granularity, and the field modulus.

    ``replication`` = K*M/N must be an integer: the number of users that
    cache each block.
    """

    K: int
    N: int
    M: int
    granularity: int = 1
    modulus: int = MODULUS

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ValueError("need at least one user")
        if self.N < self.K:
            raise ValueError(f"need at least as many files as users (N={self.N} < K={self.K})")
        if not 0 <= self.M <= self.N:
            raise ValueError(f"per-user cache size must lie in [0, {self.N}] files, got {self.M}")
        if (self.K * self.M) % self.N:
            raise ValueError(
                f"K*M/N must be an integer, got {self.K}*{self.M}/{self.N}"
            )
        if self.granularity < 1:
            raise ValueError("granularity must be a positive integer")
        if self.modulus <= 2 * self.K or not is_prime(self.modulus):
            raise ValueError(f"modulus must be a prime exceeding 2K, got {self.modulus}")

    @property
    def replication(self) -> int:
        """Number of users caching each block (K*M/N)."""
        return (self.K * self.M) // self.N

    @property
    def cache_fraction(self) -> Fraction:
        """Fraction of the library each user stores (M/N)."""
        return Fraction(self.M, self.N)

    @property
    def subfiles_per_file(self) -> int:
        return binomial(self.K, self.replication)

    @property
    def subfile_symbols(self) -> int:
        # With everything cached there is no delivery to split for; keep
        # one granularity-sized block per file so caches stay non-trivial.
        return max(self.K - self.replication, 1) * self.granularity

    @property
    def file_symbols(self) -> int:
        return self.subfiles_per_file * self.subfile_symbols

    @property
    def library_symbols(self) -> int:
        return self.N * self.file_symbols

    def to_json(self) -> dict:
        return {
            "K": self.K,
            "N": self.N,
            "M": self.M,
            "granularity": self.granularity,
            "modulus": self.modulus,
        }

    @classmethod
    def from_json(cls, data: dict) -> "SystemConfig":
        return cls(
            K=int(data["K"]),
            N=int(data["N"]),
            M=int(data["M"]),
            granularity=int(data["granularity"]),
            modulus=int(data["modulus"]),
        )


@dataclass(frozen=True)
class SubfileIndex:
    """One block of one file: ``file`` is 1-based, ``cached_by`` is the
    user subset holding the block."""

    file: int
    cached_by: Subset


@dataclass(eq=False)
class CacheContents:
    """Blocks stored at one user, keyed by SubfileIndex in canonical order."""

    user: int
    entries: dict[SubfileIndex, np.ndarray]

    @property
    def symbol_count(self) -> int:
        return sum(block.size for block in self.entries.values())


def random_library(config: SystemConfig, rng: SeededRng) -> np.ndarray:
    """Uniform random field symbols, shape (N, file_symbols), drawn row-major."""
    flat = [rng.field_element(config.modulus) for _ in range(config.library_symbols)]
    return np.array(flat, dtype=np.int64).reshape(config.N, config.file_symbols)


def subpacketize(config: SystemConfig, library: np.ndarray) -> dict[SubfileIndex, np.ndarray]:
    """Split every file into equal contiguous blocks, one per
    replication-sized subset in canonical order.

    Raises LengthMismatchError when the library does not match the
    (N, subfiles_per_file * subfile_symbols) grid.
    """
    library = np.asarray(library, dtype=np.int64)
    expected = (config.N, config.file_symbols)
    if library.shape != expected:
        raise LengthMismatchError(
            f"library shape {library.shape} does not split into "
            f"{config.subfiles_per_file} blocks of {config.subfile_symbols} symbols "
            f"(expected {expected})"
        )
    size = config.subfile_symbols
    blocks: dict[SubfileIndex, np.ndarray] = {}
    for file in range(1, config.N + 1):
        row = library[file - 1]
        for i, holders in enumerate(iter_subsets(config.K, config.replication)):
            blocks[SubfileIndex(file, holders)] = row[i * size : (i + 1) * size]
    return blocks


def fill_caches(config: SystemConfig, subfiles: dict[SubfileIndex, np.ndarray]) -> list[CacheContents]:
    """User k caches exactly the blocks whose subset contains k."""
    caches = [CacheContents(user, {}) for user in range(1, config.K + 1)]
    for index, block in subfiles.items():
        for user in index.cached_by:
            caches[user - 1].entries[index] = block
    return caches


def save_library(path, config: SystemConfig, library: np.ndarray) -> None:
    """Write the library in the interchange layout: a header of
    K, N, M, granularity, modulus as little-endian uint32, then all files
    concatenated as little-endian uint32 symbols."""
    library = np.asarray(library, dtype=np.int64)
    if library.shape != (config.N, config.file_symbols):
        raise LengthMismatchError(f"library shape {library.shape} does not match the config")
    header_values = (config.K, config.N, config.M, config.granularity, config.modulus)
    if any(value >= 1 << 32 for value in header_values):
        raise ValueError("header field exceeds uint32 range")
    with open(path, "wb") as fh:
        fh.write(np.array(header_values, dtype="<u4").tobytes())
        fh.write(library.astype("<u4").tobytes())


def load_library(path) -> tuple[SystemConfig, np.ndarray]:
    """Inverse of :func:`save_library`."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER_BYTES:
        raise LengthMismatchError("truncated library file")
    k, n, m, granularity, modulus = (int(v) for v in np.frombuffer(raw[:_HEADER_BYTES], dtype="<u4"))
    config = SystemConfig(K=k, N=n, M=m, granularity=granularity, modulus=modulus)
    symbols = np.frombuffer(raw[_HEADER_BYTES:], dtype="<u4").astype(np.int64)
    if symbols.size != config.library_symbols:
        raise LengthMismatchError(
            f"payload holds {symbols.size} symbols, expected {config.library_symbols}"
        )
    if symbols.size and int(symbols.max()) >= config.modulus:
        raise ValueError("library symbol exceeds the field modulus")
    return config, symbols.reshape(config.N, config.file_symbols)
