"""Presence-questionnaire scoring: 4-factor item bank, observation and
interaction item subsets, Likert response validation, per-configuration
aggregation, and balanced Latin-square ordering for counterbalanced studies.

Items are identified by their number in the 32-item questionnaire numbering
(26..28 unused); texts are replaced by short neutral tags since the scoring
machinery, not the wording, is what the toolkit provides. Factor-4 items are
negatively framed in the source instrument; raw sums are reported (higher =
more interface discomfort) with a reverse-coded view available separately.
"""

from __future__ import annotations

import csv
import math
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

LIKERT_MIN = 1
LIKERT_MAX = 7

F1 = "f1_involvement"
F2 = "f2_sensory_fidelity"
F3 = "f3_adaptation_immersion"
F4 = "f4_interface_quality"
FACTORS = (F1, F2, F3, F4)

FACTOR_ITEMS: dict[str, frozenset[int]] = {
    F1: frozenset({1, 2, 3, 4, 6, 7, 8, 10, 14, 17, 18, 29}),
    F2: frozenset({5, 11, 12, 13, 15, 16}),
    F3: frozenset({9, 20, 21, 24, 25, 30, 31, 32}),
    F4: frozenset({19, 22, 23}),
}

ITEM_SETS: dict[str, tuple[int, ...]] = {
    "observation": (4, 7, 8, 10, 14, 15, 16, 18, 20, 22, 30),
    "interaction": (1, 2, 3, 6, 9, 19, 21, 23, 24, 31),
}

# short neutral tags standing in for the licensed item wording
ITEM_TAGS: dict[int, str] = {
    1: "control responsiveness",
    2: "environment responsiveness",
    3: "interaction naturalness",
    4: "visual involvement",
    5: "auditory involvement",
    6: "locomotion naturalness",
    7: "adjustment speed",
    8: "visual search proficiency",
    9: "task adaptation",
    10: "scene surveyability",
    11: "sound localization",
    12: "sound recognition",
    13: "haptic exploration",
    14: "object manipulation",
    15: "visual display quality",
    16: "depth perception quality",
    17: "event anticipation",
    18: "movement anticipation",
    19: "control interference",
    20: "experience involvement",
    21: "task focus",
    22: "display distraction",
    23: "control distraction",
    24: "end-of-session awareness",
    25: "skill improvement",
    29: "time perception loss",
    30: "event memorability",
    31: "control confidence",
    32: "performance attribution",
}


def _check_item_bank() -> None:
    seen: set[int] = set()
    for items in FACTOR_ITEMS.values():
        if seen & items:
            raise RuntimeError("factor lists overlap")
        seen |= items
    if seen != set(range(1, 26)) | set(range(29, 33)):
        raise RuntimeError("factor lists do not cover items 1..25, 29..32")
    for name, ids in ITEM_SETS.items():
        if len(set(ids)) != len(ids) or not set(ids) <= seen:
            raise RuntimeError(f"item set {name} malformed")
    if set(ITEM_SETS["observation"]) & set(ITEM_SETS["interaction"]):
        raise RuntimeError("item sets overlap")


_check_item_bank()


def factor_of(item_id: int) -> str:
    for factor, items in FACTOR_ITEMS.items():
        if item_id in items:
            return factor
    raise KeyError(f"unknown item {item_id}")


@dataclass(frozen=True, slots=True)
class PqResponse:
    participant_id: str
    configuration: str
    set_name: str
    ratings: Mapping[int, int]

    def __post_init__(self) -> None:
        if self.set_name not in ITEM_SETS:
            raise ValueError(f"unknown item set {self.set_name!r}")
        errs = validate_response(self.ratings, self.set_name)
        if errs:
            raise ValueError("invalid response: " + "; ".join(errs))
        object.__setattr__(self, "ratings", dict(self.ratings))


@dataclass(frozen=True, slots=True)
class FactorScores:
    set_name: str
    entries: tuple[tuple[str, int, int], ...]  # (factor, score, max)

    @property
    def overall(self) -> int:
        return sum(score for _, score, _ in self.entries)

    @property
    def factors(self) -> dict[str, tuple[int, int]]:
        return {f: (s, m) for f, s, m in self.entries}

    def __getitem__(self, factor: str) -> tuple[int, int]:
        return self.factors[factor]


def validate_response(ratings: Mapping[int, int], set_name: str) -> list[str]:
    """Returns problems as strings; an empty list means the response is valid."""
    expected = set(ITEM_SETS[set_name])
    got = set(ratings)
    errors = [f"missing: {i}" for i in sorted(expected - got)]
    errors += [f"unexpected: {i}" for i in sorted(got - expected)]
    errors += [
        f"out of range: {i}"
        for i in sorted(expected & got)
        if not (isinstance(ratings[i], int) and LIKERT_MIN <= ratings[i] <= LIKERT_MAX)
    ]
    return errors


def score(response: PqResponse) -> FactorScores:
    """Per-factor sums over the items of the response's set. A factor with no
    items in the set is omitted (its max would be 0)."""
    set_items = set(ITEM_SETS[response.set_name])
    entries = []
    for factor in FACTORS:
        items = FACTOR_ITEMS[factor] & set_items
        if not items:
            continue
        total = sum(response.ratings[i] for i in items)
        entries.append((factor, total, LIKERT_MAX * len(items)))
    return FactorScores(set_name=response.set_name, entries=tuple(entries))


def factor_maxima(set_name: str) -> dict[str, int]:
    set_items = set(ITEM_SETS[set_name])
    return {
        factor: LIKERT_MAX * len(FACTOR_ITEMS[factor] & set_items)
        for factor in FACTORS
        if FACTOR_ITEMS[factor] & set_items
    }


def reverse_coded(score_value: int, item_count: int) -> int:
    """Reverse-coded view of a factor sum: each 1..7 rating r becomes 8 - r."""
    return (LIKERT_MAX + 1) * item_count - score_value


@dataclass(frozen=True, slots=True)
class FactorStat:
    mean: float
    std: float
    n: int


def aggregate(responses: Sequence[PqResponse]) -> dict[str, dict[str, FactorStat]]:
    """Per-configuration, per-factor mean and sample standard deviation.

    All responses must share one item set. n = 1 groups report std 0 (the n
    field flags them).
    """
    if not responses:
        return {}
    sets = {r.set_name for r in responses}
    if len(sets) != 1:
        raise ValueError("mixed item sets")
    by_config: dict[str, list[FactorScores]] = {}
    for resp in responses:
        by_config.setdefault(resp.configuration, []).append(score(resp))
    out: dict[str, dict[str, FactorStat]] = {}
    for config, scored in sorted(by_config.items()):
        stats: dict[str, FactorStat] = {}
        for factor, _, _ in scored[0].entries:
            values = [s[factor][0] for s in scored]
            std = statistics.stdev(values) if len(values) > 1 else 0.0
            stats[factor] = FactorStat(mean=statistics.fmean(values), std=std, n=len(values))
        out[config] = stats
    return out


def latin_square(n: int) -> list[list[int]]:
    """Balanced n x n ordering matrix (0-based labels).

    Row i is [i, i+1, i-1, i+2, i-2, ...] mod n, so every condition appears
    once per row and per column and every ordered adjacent pair occurs exactly
    once. The construction balances only for even n.
    """
    if n < 2 or n % 2 != 0:
        raise ValueError("balanced square requires even n (or mirrored pair)")
    # zigzag first row 0, 1, n-1, 2, n-2, ...; remaining rows shift it
    first = [0] + [(k + 1) // 2 if k % 2 else n - k // 2 for k in range(1, n)]
    return [[(c + i) % n for c in first] for i in range(n)]


# ---------------------------------------------------------------------------
# CSV interchange
# ---------------------------------------------------------------------------

RESPONSES_CSV_FIELDS = ("participant", "configuration", "item_id", "rating")


def read_responses_csv(path: str | Path, set_name: str) -> list[PqResponse]:
    """Load long-format rows (participant, configuration, item_id, rating),
    one response per (participant, configuration) pair."""
    grouped: dict[tuple[str, str], dict[int, int]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(RESPONSES_CSV_FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"responses CSV missing columns: {sorted(missing)}")
        for row in reader:
            key = (row["participant"], row["configuration"])
            try:
                item, rating = int(row["item_id"]), int(row["rating"])
            except ValueError:
                raise ValueError(f"non-integer item_id/rating for {key}") from None
            grouped.setdefault(key, {})[item] = rating
    responses = []
    for (participant, config), ratings in grouped.items():
        errs = validate_response(ratings, set_name)
        if errs:
            raise ValueError(f"{participant}/{config}: " + "; ".join(errs))
        responses.append(
            PqResponse(
                participant_id=participant, configuration=config,
                set_name=set_name, ratings=ratings,
            )
        )
    return responses


def write_scores_csv(
    responses: Sequence[PqResponse], path: str | Path, reversed_f4: bool = False
) -> None:
    """One row per response with factor sums; absent factors are blank.
    reversed_f4 adds a reverse-coded interface-quality column."""
    fields = ["participant", "configuration", "set", *FACTORS, "overall"]
    if reversed_f4:
        fields.append(F4 + "_reversed")
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for resp in responses:
            scores = score(resp)
            row: dict[str, object] = {
                "participant": resp.participant_id,
                "configuration": resp.configuration,
                "set": resp.set_name,
                "overall": scores.overall,
            }
            for factor, total, _ in scores.entries:
                row[factor] = total
            if reversed_f4 and F4 in scores.factors:
                total, mx = scores[F4]
                row[F4 + "_reversed"] = reverse_coded(total, mx // LIKERT_MAX)
            writer.writerow(row)


__all__ = [
    "LIKERT_MIN",
    "LIKERT_MAX",
    "FACTORS",
    "FACTOR_ITEMS",
    "ITEM_SETS",
    "ITEM_TAGS",
    "F1",
    "F2",
    "F3",
    "F4",
    "PqResponse",
    "FactorScores",
    "FactorStat",
    "factor_of",
    "factor_maxima",
    "validate_response",
    "score",
    "aggregate",
    "reverse_coded",
    "latin_square",
    "read_responses_csv",
    "write_scores_csv",
]
