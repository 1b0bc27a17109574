"""Secure multiparty computation kernel: field, sharing, fixed point, engine."""

from .field import ConfigError, FieldConfig, is_probable_prime, mod_inverse, next_prime, sqrt_mod
from .fixedpoint import FxpRangeError, centered, fxp_bound, fxp_decode, fxp_encode
from .ledger import RoundLedger, sign_elements
from .shamir import (
    InsufficientShares,
    ShareVector,
    add,
    add_public,
    lagrange_weights_at_zero,
    reconstruct,
    scale,
    share,
    sub,
)
from .engine import MODE_DEBUG, MODE_FAITHFUL, PreprocessingExhausted, SmcEngine

__all__ = [
    "ConfigError",
    "FieldConfig",
    "is_probable_prime",
    "mod_inverse",
    "next_prime",
    "sqrt_mod",
    "FxpRangeError",
    "centered",
    "fxp_bound",
    "fxp_decode",
    "fxp_encode",
    "RoundLedger",
    "sign_elements",
    "InsufficientShares",
    "ShareVector",
    "add",
    "add_public",
    "lagrange_weights_at_zero",
    "reconstruct",
    "scale",
    "share",
    "sub",
    "MODE_DEBUG",
    "MODE_FAITHFUL",
    "PreprocessingExhausted",
    "SmcEngine",
]
