"""Descriptor-voting data association and pedestrian tracing.

Objects only need ``slice_number``, ``slice_object_number``, ``x``, ``y``
and ``features`` (a tuple of descriptor values, ``-1`` meaning missing);
:class:`~pedtrack.detection.FeatureRow` provides all of them.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, replace
from typing import Optional

from .detection import MISSING

DEFAULT_VOTING_THRESHOLD = 50.0
DEFAULT_MAX_GAP = 3


@dataclass(frozen=True)
class VoteParams:
    """Matching parameters.

    ``max_gap`` is the longest run of consecutive slices an object may be
    missing and still keep its pedestrian number, so a source in slice T
    searches T+1 .. T+max_gap+1.
    """

    speed_threshold: float
    voting_threshold: float = DEFAULT_VOTING_THRESHOLD
    max_gap: int = DEFAULT_MAX_GAP

    def __post_init__(self):
        if not 0 <= self.voting_threshold <= 100:
            raise ValueError("voting threshold must lie in [0, 100]")
        if not self.speed_threshold > 0:
            raise ValueError("speed threshold must be positive")
        if self.max_gap < 1:
            raise ValueError("max_gap must be >= 1")


@dataclass(frozen=True)
class NtxyRecord:
    pedestrian_number: int
    time: int
    x: float
    y: float


@dataclass(frozen=True)
class VoteTally:
    candidate: int
    votes: int
    eligible_descriptors: int

    @property
    def percentage(self) -> float:
        if self.eligible_descriptors == 0:
            return 0.0
        return 100.0 * self.votes / self.eligible_descriptors


def cast_votes(source, candidates, gap: int, params: VoteParams) -> list[VoteTally]:
    """Plurality vote of each of the source's descriptors over the candidates.

    Candidates at or beyond ``gap * speed_threshold`` from the source are
    gated out (all their descriptors count as missing). Each remaining
    descriptor votes for the candidate with the smallest absolute
    difference; ties go to the lower slice object number.
    """
    if gap < 1:
        raise ValueError("gap must be >= 1")
    if not candidates:
        return []
    candidates = sorted(candidates, key=lambda c: c.slice_object_number)
    radius = gap * params.speed_threshold
    src = source.features
    usable = [math.hypot(c.x - source.x, c.y - source.y) < radius for c in candidates]
    votes = [0] * len(candidates)
    eligible = [0] * len(candidates)
    for k, value in enumerate(src):
        if value == MISSING:
            continue
        best, best_diff = None, math.inf
        for i, cand in enumerate(candidates):
            other = cand.features[k]
            if not usable[i] or other == MISSING:
                continue
            eligible[i] += 1
            diff = abs(value - other)
            if diff < best_diff:
                best, best_diff = i, diff
        if best is not None:
            votes[best] += 1
    return [
        VoteTally(c.slice_object_number, votes[i], eligible[i])
        for i, c in enumerate(candidates)
    ]


def select_match(tallies, already_claimed, params: VoteParams) -> Optional[int]:
    """Unclaimed candidate with the most votes among those passing the threshold.

    A candidate with no eligible descriptors (e.g. outside the speed gate)
    never passes, whatever the threshold.
    """
    passing = [
        t for t in tallies
        if t.eligible_descriptors > 0
        and t.percentage >= params.voting_threshold
        and t.candidate not in already_claimed
    ]
    if not passing:
        return None
    best = min(passing, key=lambda t: (-t.votes, t.candidate))
    return best.candidate


def _check_order(db) -> None:
    keys = [(row.slice_number, row.slice_object_number) for row in db]
    if any(a >= b for a, b in zip(keys, keys[1:])):
        raise ValueError("descriptor database must be strictly ordered by (slice, slice object number)")


def link_objects(db, params: VoteParams) -> tuple[dict, dict]:
    """Assign pedestrian numbers to every database object.

    Returns ``(numbers, successor)``: ``numbers`` maps ``(slice, object)``
    to a pedestrian number; ``successor`` maps a matched object's key to
    the key of its match in a later slice.
    """
    _check_order(db)
    by_slice = defaultdict(list)
    for row in db:
        by_slice[row.slice_number].append(row)
    if not by_slice:
        return {}, {}
    last_slice = max(by_slice)
    numbers: dict[tuple[int, int], int] = {}
    successor: dict[tuple[int, int], tuple[int, int]] = {}
    next_number = 1
    for t in sorted(by_slice):
        for row in by_slice[t]:
            key = (t, row.slice_object_number)
            if key not in numbers:
                numbers[key] = next_number
                next_number += 1
        for row in by_slice[t]:
            key = (t, row.slice_object_number)
            for gap in range(1, params.max_gap + 2):
                target = t + gap
                if target > last_slice:
                    break
                candidates = by_slice.get(target)
                if not candidates:
                    continue
                claimed = {c.slice_object_number for c in candidates if (target, c.slice_object_number) in numbers}
                tallies = cast_votes(row, candidates, gap, params)
                match = select_match(tallies, claimed, params)
                if match is not None:
                    numbers[(target, match)] = numbers[key]
                    successor[key] = (target, match)
                    break
    return numbers, successor


def label_database(db, params: VoteParams):
    """Copy of ``db`` with ``pedestrian_number`` filled in."""
    numbers, _ = link_objects(db, params)
    return [replace(row, pedestrian_number=numbers[(row.slice_number, row.slice_object_number)]) for row in db]


def trace_stack(db, params: VoteParams) -> list[NtxyRecord]:
    """Trace pedestrians through the database and emit NTXY records.

    Gaps bridged by a match are filled by linear interpolation. Records
    are sorted by pedestrian number, then time.
    """
    numbers, successor = link_objects(db, params)
    rows = {(row.slice_number, row.slice_object_number): row for row in db}
    records = []
    for key, row in rows.items():
        ped = numbers[key]
        records.append(NtxyRecord(ped, row.slice_number, row.x, row.y))
        nxt = successor.get(key)
        if nxt is None:
            continue
        target = rows[nxt]
        n = target.slice_number - row.slice_number
        for j in range(1, n):
            f = j / n
            records.append(NtxyRecord(
                ped,
                row.slice_number + j,
                row.x + f * (target.x - row.x),
                row.y + f * (target.y - row.y),
            ))
    records.sort(key=lambda r: (r.pedestrian_number, r.time))
    return records


def pedestrian_count(records) -> int:
    return len({r.pedestrian_number for r in records})
