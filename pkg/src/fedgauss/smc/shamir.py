"""Shamir secret sharing over a prime field: the pure (communication-free) parts.

A secret ``s`` is the constant term of a random polynomial of degree ``t``;
party ``k`` (1-based) holds the evaluation at ``x = k``.  Any ``t`` shares are
jointly uniform, any ``t + 1`` reconstruct by Lagrange interpolation at 0.
Addition and public scaling act componentwise on shares because polynomial
evaluation is linear.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..transform import DomainError, FedgaussError
from .field import FieldConfig

__all__ = [
    "InsufficientShares",
    "ShareVector",
    "share",
    "reconstruct",
    "add",
    "sub",
    "scale",
    "add_public",
    "lagrange_weights_at_zero",
]


class InsufficientShares(FedgaussError, ValueError):
    """Fewer than ``t + 1`` shares supplied to reconstruction."""


@dataclass(frozen=True)
class ShareVector:
    """Shares of one secret: ``values[k-1]`` is party ``k``'s share."""

    values: tuple
    cfg: FieldConfig

    def __post_init__(self):
        if len(self.values) != self.cfg.K:
            raise DomainError(
                f"expected {self.cfg.K} shares, got {len(self.values)}"
            )

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)


def _check_same_cfg(a: ShareVector, b: ShareVector):
    if a.cfg is not b.cfg and a.cfg != b.cfg:
        raise DomainError("share vectors come from different configurations")


def _eval_poly(coeffs, x: int, p: int) -> int:
    """Horner evaluation of ``coeffs[0] + coeffs[1] x + ...`` mod p."""
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % p
    return acc


def share(secret: int, cfg: FieldConfig, rng) -> ShareVector:
    """Deal shares of ``secret`` using ``rng`` for the random coefficients.

    ``rng`` is any object with ``randrange`` (e.g. ``random.Random``); the
    polynomial is ``secret + c_1 x + ... + c_t x**t`` with each ``c_i``
    uniform in ``[0, p)``.
    """
    secret %= cfg.p
    coeffs = [secret] + [rng.randrange(cfg.p) for _ in range(cfg.t)]
    values = tuple(_eval_poly(coeffs, k, cfg.p) for k in range(1, cfg.K + 1))
    return ShareVector(values, cfg)


def lagrange_weights_at_zero(xs, p: int) -> list:
    """Interpolation weights ``w_j`` with ``P(0) = sum w_j P(x_j)`` mod p."""
    xs = list(xs)
    if len(set(xs)) != len(xs):
        raise DomainError("duplicate evaluation points")
    weights = []
    for j, xj in enumerate(xs):
        num = 1
        den = 1
        for m, xm in enumerate(xs):
            if m == j:
                continue
            num = num * xm % p
            den = den * (xm - xj) % p
        weights.append(num * pow(den, -1, p) % p)
    return weights


def reconstruct(vec: ShareVector, cfg: FieldConfig | None = None, indices=None) -> int:
    """Recover the secret from at least ``t + 1`` shares.

    ``indices`` optionally restricts reconstruction to a subset of 1-based
    party indices (default: all of them).
    """
    cfg = vec.cfg if cfg is None else cfg
    if cfg != vec.cfg:
        raise DomainError("share vector does not match configuration")
    if indices is None:
        indices = range(1, cfg.K + 1)
    xs = sorted(set(indices))
    if any(not 1 <= k <= cfg.K for k in xs):
        raise DomainError(f"party indices must lie in 1..{cfg.K}")
    if len(xs) < cfg.t + 1:
        raise InsufficientShares(
            f"need at least {cfg.t + 1} shares, got {len(xs)}"
        )
    weights = lagrange_weights_at_zero(xs, cfg.p)
    acc = 0
    for w, k in zip(weights, xs):
        acc = (acc + w * vec.values[k - 1]) % cfg.p
    return acc


def add(a: ShareVector, b: ShareVector) -> ShareVector:
    """Shares of ``a + b``; no communication."""
    _check_same_cfg(a, b)
    p = a.cfg.p
    return ShareVector(tuple((x + y) % p for x, y in zip(a.values, b.values)), a.cfg)


def sub(a: ShareVector, b: ShareVector) -> ShareVector:
    """Shares of ``a - b``; no communication."""
    _check_same_cfg(a, b)
    p = a.cfg.p
    return ShareVector(tuple((x - y) % p for x, y in zip(a.values, b.values)), a.cfg)


def scale(c: int, a: ShareVector) -> ShareVector:
    """Shares of ``c * a`` for public ``c``; no communication."""
    p = a.cfg.p
    c %= p
    return ShareVector(tuple(c * x % p for x in a.values), a.cfg)


def add_public(a: ShareVector, c: int) -> ShareVector:
    """Shares of ``a + c`` for public ``c``: add ``c`` to every share."""
    p = a.cfg.p
    c %= p
    return ShareVector(tuple((x + c) % p for x in a.values), a.cfg)
