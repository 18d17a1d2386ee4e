"""Packed-word batch scoring of one probe against many enrolled templates.

Templates are flattened into 64-bit word rows (same bit layout as the file
format, zero-padded to whole words) so a probe can be XOR/AND/popcounted
against an entire gallery per shift. Integer diff/total counts are divided in
float64, which matches the per-pair matcher bit for bit.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .codec import IrisTemplate
from .errors import ContractViolation
from .matcher import MatchScore, preference_order


def _pack_words(mat: np.ndarray) -> np.ndarray:
    """Pack one 0/1 matrix into a flat uint64 vector (zero-padded)."""
    raw = np.packbits(mat, axis=-1, bitorder="little").reshape(-1)
    pad = (-raw.size) % 8
    if pad:
        raw = np.concatenate([raw, np.zeros(pad, dtype=np.uint8)])
    return raw.view(np.uint64)


class TemplateStack:
    """Immutable packed view over a sequence of same-geometry templates."""

    def __init__(self, templates: Sequence[IrisTemplate]):
        if not templates:
            raise ContractViolation("cannot build a stack from zero templates")
        first = templates[0]
        self.rows = first.rows
        self.cols = first.cols
        for t in templates:
            if (t.rows, t.cols) != (self.rows, self.cols):
                raise ContractViolation(
                    f"mixed template geometries in stack: {t.rows}x{t.cols} vs {self.rows}x{self.cols}"
                )
        self.identities = tuple(t.identity for t in templates)
        self._codes = np.stack([_pack_words(t.code) for t in templates])
        self._masks = np.stack([_pack_words(t.mask) for t in templates])

    def __len__(self) -> int:
        return len(self.identities)

    def _check_probe(self, probe: IrisTemplate, s: int) -> None:
        if (probe.rows, probe.cols) != (self.rows, self.cols):
            raise ContractViolation(
                f"probe dimensions {probe.rows}x{probe.cols} do not match gallery {self.rows}x{self.cols}"
            )
        if 2 * s >= self.cols:
            raise ContractViolation(f"shift bound {s} must be below cols/2 = {self.cols / 2}")

    def _packed_rotations(self, probe: IrisTemplate, shifts: Iterable[int]) -> dict[int, tuple[np.ndarray, np.ndarray]]:
        out = {}
        for k in shifts:
            out[k] = (
                _pack_words(np.roll(probe.code, k, axis=1)),
                _pack_words(np.roll(probe.mask, k, axis=1)),
            )
        return out

    def _shift_counts(self, code_k: np.ndarray, mask_k: np.ndarray, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
        gcodes = self._codes[start:stop]
        gmasks = self._masks[start:stop]
        joint = gmasks & mask_k
        diff = np.bitwise_count((gcodes ^ code_k) & joint).sum(axis=1, dtype=np.int64)
        total = np.bitwise_count(joint).sum(axis=1, dtype=np.int64)
        return diff, total

    def score_matrix(self, probe: IrisTemplate, s: int) -> np.ndarray:
        """Per-shift fractional HDs of the probe against every entry.

        Returns an (N, 2s+1) float64 array; column j holds shift k = -s + j.
        Incomparable cells (empty joint mask) are +inf so that minima and
        threshold tests treat them as never matching.
        """
        self._check_probe(probe, s)
        n = len(self)
        shifts = list(range(-s, s + 1))
        rots = self._packed_rotations(probe, shifts)
        out = np.empty((n, len(shifts)), dtype=np.float64)
        for j, k in enumerate(shifts):
            diff, total = self._shift_counts(*rots[k], 0, n)
            out[:, j] = np.divide(diff, total, out=np.full(n, np.inf), where=total > 0)
        return out

    def best_scores(
        self, probe: IrisTemplate, s: int, start: int = 0, stop: int | None = None
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Best-of-M reduction per entry, honouring the shift tie-break.

        Returns (values, best_shifts, bits_compared) for entries
        [start, stop); values are +inf where every shift is incomparable.
        """
        self._check_probe(probe, s)
        stop = len(self) if stop is None else stop
        n = stop - start
        rots = self._packed_rotations(probe, preference_order(s))
        values = np.full(n, np.inf)
        best_shift = np.zeros(n, dtype=np.int64)
        bits = np.zeros(n, dtype=np.int64)
        for k in preference_order(s):
            diff, total = self._shift_counts(*rots[k], start, stop)
            val = np.divide(diff, total, out=np.full(n, np.inf), where=total > 0)
            better = val < values
            if better.any():
                values[better] = val[better]
                best_shift[better] = k
                bits[better] = total[better]
        return values, best_shift, bits

    def best_match_score(self, probe: IrisTemplate, s: int, index: int) -> MatchScore:
        """Best-of-M score of the probe against a single entry."""
        values, shifts, bits = self.best_scores(probe, s, index, index + 1)
        if not np.isfinite(values[0]):
            return MatchScore(value=None, best_shift=0, bits_compared=0)
        return MatchScore(value=float(values[0]), best_shift=int(shifts[0]), bits_compared=int(bits[0]))
