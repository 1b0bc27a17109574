"""Signed fixed-point codec over the prime field.

A real ``x`` with ``|x| < 2**(l - f - 1)`` is encoded as the field element
``round(x * 2**f) mod p``: non-negative encodings occupy ``[0, 2**(l-1))``
and negative ones ``[p - 2**(l-1), p)``, so addition of encodings is addition
of the underlying reals (the embedding is additively homomorphic by
construction, which is what lets clients sum encoded statistics share-wise).
Resolution is ``2**-f``.
"""
from __future__ import annotations

from ..transform import FedgaussError
from .field import FieldConfig

__all__ = ["FxpRangeError", "fxp_encode", "fxp_decode", "fxp_bound", "centered"]


class FxpRangeError(FedgaussError, OverflowError):
    """Magnitude outside the representable fixed-point range."""

    def __init__(self, x, limit, context: str = ""):
        self.x = x
        self.limit = limit
        suffix = f" ({context})" if context else ""
        super().__init__(
            f"value {x!r} outside fixed-point range (-{limit}, {limit}){suffix}"
        )


def fxp_bound(cfg: FieldConfig) -> float:
    """Exclusive magnitude bound ``2**(l - f - 1)`` of representable reals."""
    return float(1 << (cfg.l - cfg.f - 1))


def fxp_encode(x: float, cfg: FieldConfig, context: str = "") -> int:
    """Encode a real into the field; raises :class:`FxpRangeError` if out of range."""
    x = float(x)
    limit = 1 << (cfg.l - cfg.f - 1)
    if not abs(x) < limit:
        raise FxpRangeError(x, limit, context)
    v = round(x * float(1 << cfg.f))
    return v % cfg.p


def centered(v: int, cfg: FieldConfig) -> int:
    """Signed integer representative of ``v`` in ``(-p/2, p/2]``."""
    v %= cfg.p
    return v - cfg.p if v > cfg.p // 2 else v


def fxp_decode(v: int, cfg: FieldConfig) -> float:
    """Decode a field element back to the nearest binary64 real."""
    return centered(v, cfg) / float(1 << cfg.f)
