import numpy as np
import pytest

from synergy.combinatorics import binomial, enumerate_subsets
from synergy.field import MODULUS, SeededRng
from synergy.placement import (
    CacheContents,
    LengthMismatchError,
    SubfileIndex,
    SystemConfig,
    fill_caches,
    load_library,
    random_library,
    save_library,
    subpacketize,
)


def make_setup(K, N, M, granularity=1, seed=0):
    config = SystemConfig(K, N, M, granularity=granularity)
    library = random_library(config, SeededRng(seed))
    return config, library


def test_config_validation():
    with pytest.raises(ValueError):
        SystemConfig(0, 1, 0)
    with pytest.raises(ValueError):
        SystemConfig(3, 2, 1)  # fewer files than users
    with pytest.raises(ValueError):
        SystemConfig(2, 2, 3)  # cache larger than library
    with pytest.raises(ValueError):
        SystemConfig(3, 4, 1)  # K*M/N not an integer
    with pytest.raises(ValueError):
        SystemConfig(2, 2, 1, granularity=0)
    with pytest.raises(ValueError):
        SystemConfig(2, 2, 1, modulus=9)  # not prime
    with pytest.raises(ValueError):
        SystemConfig(4, 4, 1, modulus=7)  # prime but <= 2K


def test_config_derived_sizes():
    config = SystemConfig(4, 4, 2, granularity=3)
    assert config.replication == 2
    assert config.cache_fraction == 0.5
    assert config.subfiles_per_file == 6
    assert config.subfile_symbols == 2 * 3
    assert config.file_symbols == 36
    assert config.library_symbols == 144


def test_config_json_roundtrip():
    config = SystemConfig(3, 6, 2, granularity=2)
    assert SystemConfig.from_json(config.to_json()) == config


def test_subpacketize_two_users():
    config, library = make_setup(2, 2, 1)
    blocks = subpacketize(config, library)
    taus = {index.cached_by.elements for index in blocks if index.file == 1}
    assert taus == {(1,), (2,)}
    assert len(blocks) == 4


def test_subpacketize_four_users_block_sizes():
    config, library = make_setup(4, 4, 2, granularity=5)
    blocks = subpacketize(config, library)
    assert len(blocks) == 4 * 6
    assert all(block.shape == (2 * 5,) for block in blocks.values())


def test_subpacketize_no_cache_keeps_whole_file():
    config, library = make_setup(3, 3, 0)
    blocks = subpacketize(config, library)
    assert len(blocks) == 3
    index = SubfileIndex(2, next(iter(blocks)).cached_by)
    assert index.cached_by.elements == ()
    assert np.array_equal(blocks[index], library[1])


def test_subpacketize_full_cache_single_block():
    config, library = make_setup(3, 3, 3)
    blocks = subpacketize(config, library)
    assert len(blocks) == 3
    assert all(index.cached_by.elements == (1, 2, 3) for index in blocks)
    assert all(block.size == config.granularity for block in blocks.values())


def test_partition_roundtrip():
    # concatenating blocks in canonical order reproduces each file exactly
    for K, M in ((3, 1), (4, 2), (5, 4)):
        config, library = make_setup(K, K, M, granularity=2)
        blocks = subpacketize(config, library)
        for file in range(1, config.N + 1):
            ordered = [
                blocks[SubfileIndex(file, tau)]
                for tau in enumerate_subsets(config.K, config.replication)
            ]
            assert np.array_equal(np.concatenate(ordered), library[file - 1])


def test_length_mismatch_rejected():
    config, library = make_setup(3, 3, 1)
    with pytest.raises(LengthMismatchError):
        subpacketize(config, library[:, :-1])
    with pytest.raises(LengthMismatchError):
        subpacketize(config, library[:-1])


def test_fill_caches_membership_counts():
    config, library = make_setup(3, 3, 1)
    caches = fill_caches(config, subpacketize(config, library))
    assert [cache.user for cache in caches] == [1, 2, 3]
    assert all(len(cache.entries) == 3 for cache in caches)  # one block per file
    for cache in caches:
        assert all(cache.user in index.cached_by for index in cache.entries)


def test_fill_caches_counts_k4():
    config, library = make_setup(4, 4, 2)
    caches = fill_caches(config, subpacketize(config, library))
    assert all(len(cache.entries) == 4 * binomial(3, 1) for cache in caches)


def test_fill_caches_empty_when_no_cache():
    config, library = make_setup(4, 4, 0)
    caches = fill_caches(config, subpacketize(config, library))
    assert all(not cache.entries for cache in caches)


def test_each_block_held_by_exactly_replication_users():
    config, library = make_setup(5, 5, 2)
    blocks = subpacketize(config, library)
    caches = fill_caches(config, blocks)
    for index in blocks:
        holders = [cache.user for cache in caches if index in cache.entries]
        assert holders == list(index.cached_by.elements)
        assert len(holders) == config.replication


def test_cache_size_identity_sweep():
    # cached symbols per user == (M/N) * library symbols, exactly
    for K in range(1, 11):
        for M in range(0, K + 1):
            config, library = make_setup(K, K, M)
            caches = fill_caches(config, subpacketize(config, library))
            expected = config.cache_fraction * config.library_symbols
            assert expected.denominator == 1
            for cache in caches:
                assert cache.symbol_count == int(expected)


def test_library_io_roundtrip(tmp_path):
    config, library = make_setup(3, 4, 0, granularity=2)
    # non-trivial M variant as well
    for cfg, lib in ((config, library), make_setup(4, 4, 2, granularity=3, seed=9)):
        path = tmp_path / f"lib_{cfg.K}_{cfg.M}.bin"
        save_library(path, cfg, lib)
        loaded_config, loaded = load_library(path)
        assert loaded_config == cfg
        assert np.array_equal(loaded, lib)


def test_library_io_rejects_garbage(tmp_path):
    config, library = make_setup(2, 2, 1)
    path = tmp_path / "lib.bin"
    save_library(path, config, library)
    raw = path.read_bytes()
    (tmp_path / "short.bin").write_bytes(raw[:10])
    with pytest.raises(LengthMismatchError):
        load_library(tmp_path / "short.bin")
    (tmp_path / "padded.bin").write_bytes(raw + b"\x00\x00\x00\x00")
    with pytest.raises(LengthMismatchError):
        load_library(tmp_path / "padded.bin")
    bad = bytearray(raw)
    bad[20:24] = (config.modulus).to_bytes(4, "little")  # symbol == modulus
    (tmp_path / "bad.bin").write_bytes(bytes(bad))
    with pytest.raises(ValueError):
        load_library(tmp_path / "bad.bin")


def test_save_rejects_mismatched_library(tmp_path):
    config, library = make_setup(2, 2, 1)
    with pytest.raises(LengthMismatchError):
        save_library(tmp_path / "x.bin", config, library[:, :-1])


def test_random_library_deterministic_and_in_range():
    config = SystemConfig(3, 3, 1)
    a = random_library(config, SeededRng(5))
    b = random_library(config, SeededRng(5))
    assert np.array_equal(a, b)
    assert a.min() >= 0 and a.max() < MODULUS
    c = random_library(config, SeededRng(6))
    assert not np.array_equal(a, c)


def test_cache_contents_symbol_count():
    config, library = make_setup(3, 3, 1)
    caches = fill_caches(config, subpacketize(config, library))
    assert isinstance(caches[0], CacheContents)
    assert caches[0].symbol_count == 3 * config.subfile_symbols
