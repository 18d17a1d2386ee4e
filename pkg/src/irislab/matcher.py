"""Masked fractional Hamming distance with circular rotational-shift tolerance.

Scores are fractions of differing code bits among the bits valid in both
masks: 0.0 means identical, about 0.5 means unrelated. Rotation tolerance is
"best of M": the comparison is repeated for every circular column shift k in
[-s, +s] (M = 2s + 1) and the smallest distance wins. The shifted operand is
always the first template (the probe); masks rotate together with codes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec import IrisTemplate
from .errors import ContractViolation


@dataclass(frozen=True)
class ShiftRange:
    """Symmetric circular shift bound: shifts evaluated are -s..+s inclusive."""

    s: int

    def __post_init__(self) -> None:
        if self.s < 0:
            raise ContractViolation(f"shift bound must be non-negative, got {self.s}")

    @property
    def m(self) -> int:
        """Number of comparisons per pair (2s + 1)."""
        return 2 * self.s + 1

    def shifts(self) -> list[int]:
        return list(range(-self.s, self.s + 1))


def preference_order(s: int) -> list[int]:
    """Shift evaluation order realizing the tie-break: smallest |k| first,
    negative before positive at equal magnitude."""
    order = [0]
    for k in range(1, s + 1):
        order.extend((-k, k))
    return order


@dataclass(frozen=True)
class MatchScore:
    """Result of comparing two templates.

    ``value`` is None when the joint mask is empty (nothing to compare); such
    a score can never satisfy a threshold.
    """

    value: float | None
    best_shift: int = 0
    bits_compared: int = 0

    @property
    def incomparable(self) -> bool:
        return self.value is None

    def matches(self, threshold: float) -> bool:
        return self.value is not None and self.value <= threshold


INCOMPARABLE = MatchScore(value=None, best_shift=0, bits_compared=0)


def _require_same_geometry(a: IrisTemplate, b: IrisTemplate) -> None:
    if (a.rows, a.cols) != (b.rows, b.cols):
        raise ContractViolation(
            f"template dimensions differ: {a.rows}x{a.cols} vs {b.rows}x{b.cols}"
        )


def _hd(code_a: np.ndarray, mask_a: np.ndarray, code_b: np.ndarray, mask_b: np.ndarray) -> tuple[int, int]:
    joint = mask_a & mask_b
    total = int(joint.sum())
    if total == 0:
        return 0, 0
    diff = int(((code_a ^ code_b) & joint).sum())
    return diff, total


def fractional_hd(a: IrisTemplate, b: IrisTemplate) -> MatchScore:
    """Masked fractional Hamming distance at zero shift."""
    _require_same_geometry(a, b)
    diff, total = _hd(a.code, a.mask, b.code, b.mask)
    if total == 0:
        return INCOMPARABLE
    return MatchScore(value=diff / total, best_shift=0, bits_compared=total)


def rotate(t: IrisTemplate, k: int) -> IrisTemplate:
    """Circularly shift code and mask by ``k`` columns: column j of the result
    is column (j - k) mod cols of the input."""
    return IrisTemplate(
        rows=t.rows,
        cols=t.cols,
        code=np.roll(t.code, k, axis=1),
        mask=np.roll(t.mask, k, axis=1),
        identity=t.identity,
        sample_id=t.sample_id,
    )


def best_of_m(a: IrisTemplate, b: IrisTemplate, r: ShiftRange) -> MatchScore:
    """Minimum fractional HD of ``rotate(a, k)`` vs ``b`` over k in [-s, +s].

    Incomparable shifts are skipped; the result is incomparable only if every
    shift is. On value ties the shift with the smallest magnitude wins,
    negative before positive.
    """
    _require_same_geometry(a, b)
    if 2 * r.s >= a.cols:
        raise ContractViolation(f"shift bound {r.s} must be below cols/2 = {a.cols / 2}")
    best: MatchScore | None = None
    for k in preference_order(r.s):
        diff, total = _hd(np.roll(a.code, k, axis=1), np.roll(a.mask, k, axis=1), b.code, b.mask)
        if total == 0:
            continue
        value = diff / total
        if best is None or value < best.value:
            best = MatchScore(value=value, best_shift=k, bits_compared=total)
    return best if best is not None else INCOMPARABLE


def shift_degrees(k: int, cols: int) -> float:
    """Angular size of a ``k``-column shift for a template with ``cols`` columns."""
    if cols <= 0:
        raise ContractViolation(f"cols must be positive, got {cols}")
    return k * 360.0 / cols
