"""Analytic performance results: exact achievable delivery time, a
converse lower bound, optimality-gap certification, and per-user DoF
metrics quantifying what caching and delayed feedback deliver jointly.

Delivery time is measured in normalized slots (one slot = serving one
file to one user interference-free).  Everything that feeds an exact
comparison is a Fraction; the logarithmic-approximation metrics
(cache_fraction_for_gap, the mid-range gap envelope) use doubles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .combinatorics import epsilon, format_rational, harmonic

__all__ = [
    "EULER_MASCHERONI",
    "CertificateViolationError",
    "EnvelopeCheckError",
    "OuterBound",
    "BoundReport",
    "GapCertificate",
    "SynergyReport",
    "EnvelopeReport",
    "achievable_time",
    "outer_bound",
    "dof",
    "bound_report",
    "gap_certificate",
    "synergy_report",
    "cache_fraction_for_gap",
    "min_cache_fraction_for_gap",
    "check_midrange_gap_envelope",
]

EULER_MASCHERONI = 0.5772156649015329


class CertificateViolationError(Exception):
    """A sweep cell broke the factor-4 gap guarantee (implementation bug)."""


class EnvelopeCheckError(Exception):
    """The mid-range gap envelope failed an endpoint-dominance check."""


def achievable_time(K: int, replication: int) -> Fraction:
    """Delivery time of the scheme: harmonic(K) - harmonic(replication)."""
    if not 0 <= replication <= K:
        raise ValueError(f"replication must lie in [0, K], got {replication}")
    return harmonic(K) - harmonic(replication)


@dataclass(frozen=True)
class OuterBound:
    """Converse lower bound on delivery time.

    ``argmax_s`` is the smallest maximizer of the bound expression;
    ``clamped`` flags a raw maximum that was non-positive (reported as 0).
    """

    value: Fraction
    argmax_s: int
    clamped: bool


def outer_bound(K: int, N: int, M) -> OuterBound:
    """Lower bound on the optimal delivery time:
    max over s in {1, ..., min(floor(N/M), K)} of
    harmonic(s) - s*M / floor(N/s).

    M may be rational; all arithmetic is exact.
    """
    if K < 1 or N < K:
        raise ValueError("need 1 <= K <= N")
    M = Fraction(M)
    if not 0 <= M <= N:
        raise ValueError(f"cache size must lie in [0, {N}] files, got {M}")
    s_hi = K if M == 0 else min(math.floor(Fraction(N) / M), K)
    best: Fraction | None = None
    best_s = 1
    for s in range(1, s_hi + 1):
        value = harmonic(s) - s * M / (N // s)
        if best is None or value > best:
            best, best_s = value, s
    if best is None:  # unreachable for valid inputs; keep the contract total
        best = Fraction(0)
    clamped = best <= 0
    return OuterBound(value=max(best, Fraction(0)), argmax_s=best_s, clamped=clamped)


def dof(K: int, N: int, M) -> Fraction:
    """Per-user degrees of freedom (1 - M/N) / achievable_time.

    Excludes the local caching gain, so the value lies in [0, 1].
    Requires replication K*M/N integral and below K (an all-cached system
    has no delivery to measure).
    """
    M = Fraction(M)
    replication = K * M / N
    if replication.denominator != 1:
        raise ValueError(f"K*M/N must be an integer, got {replication}")
    replication = int(replication)
    if replication >= K:
        raise ValueError("dof is undefined when everything is cached (replication = K)")
    return (1 - Fraction(M) / N) / achievable_time(K, replication)


@dataclass(frozen=True)
class BoundReport:
    """One analytic row: achievable time, lower bound, and their ratio."""

    K: int
    N: int
    M: Fraction
    replication: int
    cache_fraction: Fraction
    achievable: Fraction
    lower_bound: Fraction
    gap: Fraction | None
    dof: Fraction
    argmax_s: int

    def csv_row(self) -> dict:
        return {
            "K": self.K,
            "replication": self.replication,
            "cache_fraction": format_rational(self.cache_fraction),
            "delivery_time": format_rational(self.achievable),
            "delivery_time_decimal": float(self.achievable),
            "lower_bound": format_rational(self.lower_bound),
            "lower_bound_decimal": float(self.lower_bound),
            "gap": float(self.gap) if self.gap is not None else "",
            "argmax_s": self.argmax_s,
        }


def bound_report(K: int, N: int, M) -> BoundReport:
    """Achievable time vs. lower bound for one configuration.

    ``gap`` is None when the raw lower bound is non-positive (nothing to
    divide by); that never happens on the certification sweep.
    """
    M = Fraction(M)
    replication = K * M / N
    if replication.denominator != 1:
        raise ValueError(f"K*M/N must be an integer, got {replication}")
    replication = int(replication)
    achievable = achievable_time(K, replication)
    lower = outer_bound(K, N, M)
    gap = None if lower.clamped else achievable / lower.value
    return BoundReport(
        K=K,
        N=N,
        M=M,
        replication=replication,
        cache_fraction=M / N,
        achievable=achievable,
        lower_bound=lower.value,
        gap=gap,
        dof=dof(K, N, M) if replication < K else Fraction(0),
        argmax_s=lower.argmax_s,
    )


@dataclass(frozen=True)
class GapCertificate:
    """Exhaustive sweep result: every cell's exact gap is below 4."""

    rows: tuple[BoundReport, ...]
    max_gap: Fraction
    argmax: tuple[int, int]  # (K, replication)

    def to_json(self) -> dict:
        return {
            "cells": len(self.rows),
            "max_gap": format_rational(self.max_gap),
            "max_gap_decimal": float(self.max_gap),
            "argmax_K": self.argmax[0],
            "argmax_replication": self.argmax[1],
        }


def gap_certificate(K_max: int) -> GapCertificate:
    """Exact gap for every K <= K_max, N = K, replication in [1, K-1].

    Raises CertificateViolationError the moment any exact ratio reaches
    4 (which would falsify the implementation, not the guarantee).
    """
    if K_max < 2:
        raise ValueError("the sweep needs K_max >= 2")
    rows: list[BoundReport] = []
    max_gap: Fraction | None = None
    argmax = (0, 0)
    for K in range(2, K_max + 1):
        for replication in range(1, K):
            row = bound_report(K, N=K, M=replication)
            if row.gap is None or row.gap >= 4:
                raise CertificateViolationError(
                    f"gap {row.gap} at K={K}, replication={replication}"
                )
            rows.append(row)
            if max_gap is None or row.gap > max_gap:
                max_gap, argmax = row.gap, (K, replication)
    return GapCertificate(rows=tuple(rows), max_gap=max_gap, argmax=argmax)


@dataclass(frozen=True)
class SynergyReport:
    """Joint DoF against the two single-ingredient baselines.

    ``dof_cache_only`` is the single-stream coded-delivery baseline (no
    feedback), with exact time ``single_stream_time`` =
    K(1-gamma)/(1+K*gamma); ``dof_feedback_only`` is the cache-free
    delayed-feedback baseline 1/harmonic(K).  ``margin`` is how far the
    joint scheme exceeds their sum (not sign-guaranteed at small K).
    """

    K: int
    replication: int
    cache_fraction: Fraction
    dof: float
    dof_cache_only: float
    dof_feedback_only: float
    margin: float
    single_stream_time: Fraction

    def csv_row(self) -> dict:
        return {
            "K": self.K,
            "replication": self.replication,
            "cache_fraction": format_rational(self.cache_fraction),
            "dof": self.dof,
            "dof_cache_only": self.dof_cache_only,
            "dof_feedback_only": self.dof_feedback_only,
            "margin": self.margin,
            "single_stream_time": format_rational(self.single_stream_time),
        }


def synergy_report(K: int, replication: int) -> SynergyReport:
    """DoF of the combined scheme vs. the sum of the individual gains."""
    if not 1 <= replication <= K - 1:
        raise ValueError(f"replication must lie in [1, K-1], got {replication}")
    gamma = Fraction(replication, K)
    joint = float(dof(K, N=K, M=replication))
    single_stream_time = K * (1 - gamma) / (1 + K * gamma)
    cache_only = float((1 - gamma) / single_stream_time)
    feedback_only = 1.0 / float(harmonic(K))
    return SynergyReport(
        K=K,
        replication=replication,
        cache_fraction=gamma,
        dof=joint,
        dof_cache_only=cache_only,
        dof_feedback_only=feedback_only,
        margin=joint - (cache_only + feedback_only),
        single_stream_time=single_stream_time,
    )


def cache_fraction_for_gap(gap: float, K: int) -> float:
    """Closed-form cache fraction that puts the per-user DoF within a
    target factor ``gap`` of the interference-free optimum:
    exp(-(gap - epsilon(K) + epsilon_infinity)).

    Decays exponentially in the target, which is what makes tiny caches
    worthwhile; compare with :func:`min_cache_fraction_for_gap`.
    """
    if gap < 1:
        raise ValueError("the target factor must be at least 1")
    if K < 2:
        raise ValueError("need at least two users")
    return math.exp(-(gap - epsilon(K) + EULER_MASCHERONI))


def min_cache_fraction_for_gap(gap: float, K: int) -> Fraction | None:
    """Smallest replication/K whose DoF reaches 1/gap, by exhaustive
    search over replication (float harmonic accumulation); None when even
    replication = K-1 falls short."""
    if gap < 1:
        raise ValueError("the target factor must be at least 1")
    target = 1.0 / gap
    cumulative = [0.0]
    for i in range(1, K + 1):
        cumulative.append(cumulative[-1] + 1.0 / i)
    for replication in range(1, K):
        time = cumulative[K] - cumulative[replication]
        # float metric: leave a few ulp of slack so exact boundary hits
        # (e.g. replication = K-1 at gap 1) are not lost to rounding
        if (1.0 - replication / K) / time >= target - 1e-12:
            return Fraction(replication, K)
    return None


@dataclass(frozen=True)
class EnvelopeReport:
    """Grid scan of the mid-range gap envelope
    f(g) = (ln(1/g) + epsilon(2) - epsilon_infinity) / (1 - g)
    over cache fractions g in [1/36, 1/2]."""

    left: float
    right: float
    grid_max: float
    grid_argmax: float

    def to_json(self) -> dict:
        return {
            "left": self.left,
            "right": self.right,
            "grid_max": self.grid_max,
            "grid_argmax": self.grid_argmax,
        }


def check_midrange_gap_envelope(grid_points: int = 10_000) -> EnvelopeReport:
    """Verify that the mid-range gap envelope attains its maximum at an
    interval endpoint and that both endpoint values are below 4.

    The envelope's derivative has a positive denominator and an
    increasing numerator on the interval, so its maximum must sit at an
    endpoint; the grid scan checks that conclusion numerically.  Raises
    EnvelopeCheckError with the offending cache fraction otherwise.
    """
    if grid_points < 2:
        raise ValueError("need at least the two endpoints")
    shift = epsilon(2) - EULER_MASCHERONI

    def envelope(g: float) -> float:
        return (math.log(1.0 / g) + shift) / (1.0 - g)

    lo, hi = 1.0 / 36.0, 0.5
    left, right = envelope(lo), envelope(hi)
    grid_max, grid_argmax = -math.inf, lo
    for i in range(grid_points):
        g = lo + (hi - lo) * i / (grid_points - 1)
        value = envelope(g)
        if value > grid_max:
            grid_max, grid_argmax = value, g
    if grid_max > max(left, right) + 1e-9:
        raise EnvelopeCheckError(
            f"interior value {grid_max} at cache fraction {grid_argmax} exceeds both endpoints"
        )
    if not (left < 4 and right < 4):
        raise EnvelopeCheckError(f"endpoint value reaches 4: left={left}, right={right}")
    return EnvelopeReport(left=left, right=right, grid_max=grid_max, grid_argmax=grid_argmax)
