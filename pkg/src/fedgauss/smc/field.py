"""Prime-field configuration and modular arithmetic helpers.

The protocol works over Z_p for a prime ``p`` chosen large enough that every
intermediate value of the fixed-point pipeline (products before truncation,
statistically masked openings) stays below ``p`` as an ordinary integer:
``p`` is the first prime congruent to 3 mod 4 above ``2**(l + f + kappa + 2)``
where ``l`` is the declared encoding width, ``f`` the fractional bits and
``kappa`` the statistical masking parameter.  The congruence makes modular
square roots one exponentiation (used when generating shared random bits).

Communication accounting deliberately charges the declared ``l + 1``-bit
element width, not ``p``'s width: the ledger models what an implementation
transmitting packed ``l``-bit encodings would send.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from ..transform import DomainError, FedgaussError

__all__ = [
    "ConfigError",
    "FieldConfig",
    "is_probable_prime",
    "next_prime",
    "mod_inverse",
    "sqrt_mod",
]

_MR_ROUNDS = 64
# Deterministic witnesses proving primality for all n < 3.3e24; the random
# rounds below extend confidence to arbitrary size.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


class ConfigError(FedgaussError, ValueError):
    """Invalid protocol/field configuration."""


def is_probable_prime(n: int, rounds: int = _MR_ROUNDS) -> bool:
    """Miller-Rabin with fixed small bases plus ``rounds`` random bases."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)
    for q in small:
        if n == q:
            return True
        if n % q == 0:
            return False
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    rng = random.Random(n)  # deterministic per candidate
    witnesses = list(_MR_BASES) + [rng.randrange(2, n - 1) for _ in range(rounds)]
    for a in witnesses:
        a %= n
        if a < 2:
            continue
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(floor: int, congruence: int | None = None, modulus: int = 4) -> int:
    """Smallest prime strictly greater than ``floor``.

    With ``congruence`` given, restrict to primes ``p = congruence (mod
    modulus)``.
    """
    n = floor + 1
    if n <= 2:
        n = 2
    if n > 2 and n % 2 == 0:
        n += 1
    while True:
        if (congruence is None or n % modulus == congruence) and is_probable_prime(n):
            return n
        n += 1 if n == 2 else 2


def mod_inverse(a: int, p: int) -> int:
    """Inverse of ``a`` modulo ``p``; raises for ``a = 0 (mod p)``."""
    a %= p
    if a == 0:
        raise DomainError("0 has no modular inverse")
    return pow(a, -1, p)


def sqrt_mod(a: int, p: int) -> int:
    """A square root of ``a`` modulo an odd prime ``p``.

    Uses the one-exponentiation rule for ``p = 3 (mod 4)`` and
    Tonelli-Shanks otherwise.  Raises :class:`DomainError` when ``a`` is a
    non-residue.
    """
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        raise DomainError(f"{a} is not a quadratic residue mod {p}")
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # Tonelli-Shanks
    q = p - 1
    s = 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        t2, i = t * t % p, 1
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


_PRIME_CACHE: dict[tuple[int, int], int] = {}


@dataclass(frozen=True)
class FieldConfig:
    """Field and sharing parameters for one protocol instance.

    ``l``   declared bit-width of fixed-point encodings (cost-model width);
    ``f``   fractional bits (``0 <= f < l``);
    ``p``   prime modulus, ``p > 2**l`` (auto-sized with masking headroom by
            :meth:`create`, or supplied explicitly for small desk tests);
    ``K``   party count (>= 3);
    ``t``   sharing degree, fixed at ``(K - 1) // 2`` so one resharing round
            suffices for multiplication;
    ``kappa`` statistical masking bits.
    """

    l: int
    f: int
    K: int
    p: int
    kappa: int = 40

    def __post_init__(self):
        if self.l < 2:
            raise ConfigError(f"l must be >= 2, got {self.l}")
        if not 0 <= self.f < self.l:
            raise ConfigError(f"need 0 <= f < l, got f={self.f}, l={self.l}")
        if self.K < 3:
            raise ConfigError(f"need at least 3 parties, got K={self.K}")
        if self.kappa < 1:
            raise ConfigError(f"kappa must be >= 1, got {self.kappa}")
        if self.p <= (1 << self.l):
            raise ConfigError(f"modulus must exceed 2**l = {1 << self.l}, got {self.p}")
        if not is_probable_prime(self.p):
            raise ConfigError(f"modulus {self.p} is not prime")

    @property
    def t(self) -> int:
        return (self.K - 1) // 2

    @property
    def element_bits(self) -> int:
        """Declared wire size of one transmitted element (cost model)."""
        return self.l + 1

    @staticmethod
    def create(l: int = 100, f: int = 50, K: int = 3, kappa: int = 40) -> "FieldConfig":
        """Standard construction: auto-size the modulus with full headroom."""
        key = (l + f + kappa + 2, 3)
        p = _PRIME_CACHE.get(key)
        if p is None:
            p = next_prime(1 << (l + f + kappa + 2), congruence=3, modulus=4)
            _PRIME_CACHE[key] = p
        return FieldConfig(l=l, f=f, K=K, p=p, kappa=kappa)
