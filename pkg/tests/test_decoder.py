from dataclasses import replace

import numpy as np
import pytest

from synergy.combinatorics import Subset, enumerate_subsets
from synergy.decoder import (
    MissingObservationError,
    backward_decode,
    decode_user,
    verify_all,
)
from synergy.field import SeededRng
from synergy.placement import (
    SubfileIndex,
    fill_caches,
    random_library,
    subpacketize,
)
from synergy.scheduler import default_config, plan_phases
from synergy.simulator import LIBRARY_STREAM, run_delivery, simulate


def seeded_case(K, N, M, seed=0, demand=None):
    config = default_config(K, N, M)
    demand = demand or tuple(range(1, K + 1))
    library = random_library(config, SeededRng(seed).child(LIBRARY_STREAM))
    subfiles = subpacketize(config, library)
    caches = fill_caches(config, subfiles)
    plan = plan_phases(config, demand, subfiles=subfiles)
    transcript = run_delivery(plan, library, seed)
    return config, library, subfiles, caches, transcript


def test_two_user_hand_trace():
    # single phase: user 1 reads the folded message off its own scalar,
    # strips the cached block it holds for user 2, and keeps its own
    config, library, subfiles, caches, transcript = seeded_case(2, 2, 1)
    outcome = decode_user(transcript, 1, caches[0])
    ground_block = subfiles[SubfileIndex(1, Subset((2,), 2))]
    assert np.array_equal(outcome.recovered_blocks[Subset((2,), 2)], ground_block)
    expected = np.concatenate(
        [subfiles[SubfileIndex(1, Subset((1,), 2))], ground_block]
    )
    assert np.array_equal(outcome.file, expected)
    assert np.array_equal(outcome.file, library[0])


def test_three_user_end_to_end():
    config, library, subfiles, caches, transcript = seeded_case(3, 3, 1, seed=7)
    for user in range(1, 4):
        decoded = backward_decode(transcript, user, caches[user - 1])
        assert np.array_equal(decoded, library[user - 1])


def test_fully_cached_reads_from_cache_only():
    config, library, subfiles, caches, transcript = seeded_case(3, 3, 3)
    assert transcript.total_uses == 0
    for user in range(1, 4):
        assert np.array_equal(backward_decode(transcript, user, caches[user - 1]), library[user - 1])


def test_no_cache_pure_feedback_delivery():
    config, library, subfiles, caches, transcript = seeded_case(4, 4, 0, seed=3)
    for user in range(1, 5):
        assert np.array_equal(backward_decode(transcript, user, caches[user - 1]), library[user - 1])


def test_repeated_demands_decode():
    config, library, subfiles, caches, transcript = seeded_case(3, 3, 1, demand=(1, 1, 1), seed=5)
    report = verify_all(transcript, library)
    assert report.all_pass
    assert [entry.requested for entry in report.users] == [1, 1, 1]


def test_recovered_streams_match_ground_truth():
    # what a user reconstructs of others' observations equals the log
    config, library, subfiles, caches, transcript = seeded_case(4, 4, 1, seed=11)
    for user in (1, 4):
        outcome = decode_user(transcript, user, caches[user - 1])
        assert outcome.recovered  # multi-phase run recovers something
        for (order, group, observer), stream in outcome.recovered.items():
            start, count = transcript.group_slots[(order, group)]
            logged = transcript.observations[observer - 1, start : start + count]
            assert np.array_equal(stream, logged)


def test_recovered_and_cached_block_indices_partition():
    config, library, subfiles, caches, transcript = seeded_case(4, 4, 2, seed=2)
    every = set(enumerate_subsets(4, 2))
    for user in range(1, 5):
        outcome = decode_user(transcript, user, caches[user - 1])
        recovered = set(outcome.recovered_blocks)
        cached = {
            index.cached_by
            for index in caches[user - 1].entries
            if index.file == transcript.demand[user - 1]
        }
        assert recovered | cached == every
        assert not recovered & cached
        assert all(user not in holders for holders in recovered)
        assert all(user in holders for holders in cached)


def test_verify_all_report_shape():
    config, library, subfiles, caches, transcript = seeded_case(3, 3, 1)
    report = verify_all(transcript, library)
    data = report.to_json()
    assert data["all_pass"] is True
    assert [entry["user"] for entry in data["users"]] == [1, 2, 3]
    assert all(entry["error"] is None for entry in data["users"])
    assert all(entry["solves"] > 0 for entry in data["users"])
    assert max(entry["max_system_dim"] for entry in data["users"]) <= 3


def test_corrupted_observation_breaks_some_user():
    config, library, subfiles, caches, transcript = seeded_case(3, 3, 1, seed=9)
    dirty = transcript.observations.copy()
    dirty[1, 2] = (dirty[1, 2] + 1) % config.modulus
    corrupted = replace(transcript, observations=dirty)
    report = verify_all(corrupted, library)
    assert not report.all_pass


def test_tampered_combining_matrix_breaks_decoding():
    config, library, subfiles, caches, transcript = seeded_case(4, 4, 1, seed=13)
    tampered_phases = []
    for phase in transcript.plan.phases:
        if phase.combining is not None and phase.order == 3:
            tampered_phases.append(
                replace(phase, combining=(phase.combining * 2) % config.modulus)
            )
        else:
            tampered_phases.append(phase)
    tampered = replace(transcript, plan=replace(transcript.plan, phases=tuple(tampered_phases)))
    report = verify_all(tampered, library)
    assert not report.all_pass


def test_truncated_transcript_raises_and_reports():
    config, library, subfiles, caches, transcript = seeded_case(3, 3, 1, seed=1)
    truncated = replace(
        transcript,
        uses=transcript.uses[:-1],
        observations=transcript.observations[:, :-1],
    )
    with pytest.raises(MissingObservationError):
        decode_user(truncated, 1, caches[0])
    report = verify_all(truncated, library)
    assert not report.all_pass
    assert all("MissingObservation" in (entry.error or "") for entry in report.users)


def test_decode_rejects_bad_user():
    config, library, subfiles, caches, transcript = seeded_case(2, 2, 1)
    with pytest.raises(ValueError):
        decode_user(transcript, 0, caches[0])


def test_single_user_boundary():
    config, library, subfiles, caches, transcript = seeded_case(1, 1, 0)
    assert transcript.total_uses == 1
    assert verify_all(transcript, library).all_pass


def test_all_replication_levels_small_sweep():
    for K in (2, 3, 4):
        for M in range(0, K + 1):
            config, library, subfiles, caches, transcript = seeded_case(K, K, M, seed=K * 10 + M)
            report = verify_all(transcript, library)
            assert report.all_pass, (K, M, report.to_json())


def test_more_files_than_users():
    config, library, subfiles, caches, transcript = seeded_case(3, 6, 2, demand=(6, 4, 5), seed=8)
    report = verify_all(transcript, library)
    assert report.all_pass


def test_simulate_convenience_matches_manual_pipeline():
    config = default_config(3, 3, 1)
    transcript = simulate(config, (3, 1, 2), seed=17)
    library = random_library(config, SeededRng(17).child(LIBRARY_STREAM))
    report = verify_all(transcript, library)
    assert report.all_pass
