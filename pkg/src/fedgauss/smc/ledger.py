"""Communication-round and byte accounting.

Every engine primitive charges its *declared* cost when invoked: sharing a
batch is 1 round, a field multiplication 1, a fixed-point multiplication or
public fixed-point scaling 2 (multiply + truncate stages), a secure sign 10
and an opening 1.  Offline preprocessing (shared random bits, masking pads)
is folded into those declared figures rather than metered separately, and a
batch of like operations issued together counts as one parallel group.

Byte accounting charges ``l + 1`` bits per transmitted element per ordered
client pair.  The secure-sign element count uses the calibrated cost formula
``153*l + 423*log10(l) + 24`` elements per call.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .field import FieldConfig

__all__ = ["RoundLedger", "sign_elements"]


def sign_elements(cfg: FieldConfig) -> int:
    """Declared transmitted elements for one secure-sign call."""
    return round(153 * cfg.l + 423 * math.log10(cfg.l) + 24)


@dataclass
class RoundLedger:
    """Sequential round count, per-pair element count, per-op breakdown."""

    cfg: FieldConfig
    rounds: int = 0
    elements: int = 0
    breakdown: dict = field(default_factory=dict)

    def charge(self, op: str, rounds: int, elements: int):
        self.rounds += rounds
        self.elements += elements
        calls, r, e = self.breakdown.get(op, (0, 0, 0))
        self.breakdown[op] = (calls + 1, r + rounds, e + elements)

    @property
    def bits_per_pair(self) -> int:
        """Total bits sent per ordered client pair at the declared element width."""
        return self.elements * self.cfg.element_bits

    def summary(self) -> dict:
        return {
            "rounds": self.rounds,
            "elements": self.elements,
            "bits_per_pair": self.bits_per_pair,
            "breakdown": {
                op: {"calls": c, "rounds": r, "elements": e}
                for op, (c, r, e) in sorted(self.breakdown.items())
            },
        }
