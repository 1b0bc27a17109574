"""Honest-but-curious SMC execution engine.

The engine simulates ``K`` parties exchanging synchronous message rounds.
Party randomness is isolated (one seeded generator per party), every value
that crosses the wire can be recorded into per-party views for the privacy
tests, and all communication is charged to a :class:`RoundLedger` at the
declared per-primitive costs.

Two execution modes share one code path for everything linear:

``faithful``
    Multiplication runs the degree-reduction protocol (local share products,
    resharing, interpolation), truncation and sign run their masked-opening
    protocols with preprocessed shared random bits.

``debug``
    Multiplication, truncation and sign are computed on the reconstructed
    cleartext and re-shared (exact floor truncation, exact sign).  The ledger
    charges identical declared costs, so accounting results are
    mode-independent by construction.
"""
from __future__ import annotations

import math
import random
from collections import deque

from ..transform import DomainError, FedgaussError
from .field import ConfigError, FieldConfig, mod_inverse, sqrt_mod
from .fixedpoint import FxpRangeError, centered
from .ledger import RoundLedger, sign_elements
from .shamir import ShareVector, add, add_public, scale, share, sub, reconstruct

__all__ = ["PreprocessingExhausted", "SmcEngine"]

MODE_FAITHFUL = "faithful"
MODE_DEBUG = "debug"


class PreprocessingExhausted(FedgaussError, RuntimeError):
    """The offline randomness pool ran dry; call ``refill_preprocessing``."""

    def __init__(self, needed: int, available: int):
        self.needed = needed
        self.available = available
        super().__init__(
            f"preprocessing pool exhausted: need {needed} shared bits, have {available}"
        )


class SmcEngine:
    """One protocol context: parties, ledger, preprocessing pool, views."""

    def __init__(self, cfg: FieldConfig, mode: str = MODE_FAITHFUL, seed: int = 0,
                 record_views: bool = False, auto_refill: bool = True):
        if mode not in (MODE_FAITHFUL, MODE_DEBUG):
            raise ConfigError(f"unknown mode {mode!r}")
        if cfg.K < 2 * cfg.t + 1:
            raise ConfigError("multiplication needs K >= 2t + 1 parties")
        self.cfg = cfg
        self.mode = mode
        self.ledger = RoundLedger(cfg)
        self._rngs = [random.Random(f"party{k}:{seed}") for k in range(cfg.K)]
        self._aux = random.Random(f"aux:{seed}")
        self.views = [[] for _ in range(cfg.K)] if record_views else None
        self.opening_log: list = []  # (kind, tag) for every value opened
        self.mask_openings = 0
        self._bit_pool: deque = deque()
        self.auto_refill = auto_refill

    # ---------------------------------------------------------------- views

    def _note(self, party: int, tag: str, value: int):
        if self.views is not None:
            self.views[party].append((tag, value))

    # ------------------------------------------------------ raw primitives
    # Internal helpers never touch the ledger; public operations charge
    # their declared costs exactly once.

    def _deal(self, secret: int, dealer: int, tag: str = "share") -> ShareVector:
        vec = share(secret, self.cfg, self._rngs[dealer])
        if self.views is not None:
            for j in range(self.cfg.K):
                if j != dealer:
                    self._note(j, tag, vec.values[j])
        return vec

    def _deal_aux(self, secret: int) -> ShareVector:
        return share(secret, self.cfg, self._aux)

    def _open(self, vec: ShareVector, kind: str, tag: str) -> int:
        value = reconstruct(vec)
        self.opening_log.append((kind, tag))
        if kind == "mask":
            self.mask_openings += 1
        if self.views is not None:
            for j in range(self.cfg.K):
                self._note(j, f"{kind}:{tag}", value)
        return value

    def _mul_raw(self, pairs) -> list:
        cfg = self.cfg
        if self.mode == MODE_DEBUG:
            return [
                self._deal_aux(reconstruct(a) * reconstruct(b) % cfg.p)
                for a, b in pairs
            ]
        # Degree reduction: each party reshares its local product share and
        # the degree-2t polynomial is interpolated share-wise.
        weights = _weights_all(cfg)
        out = []
        for a, b in pairs:
            subshares = []
            for k in range(cfg.K):
                d_k = a.values[k] * b.values[k] % cfg.p
                subshares.append(self._deal(d_k, k, tag="mul"))
            values = []
            for j in range(cfg.K):
                acc = 0
                for k in range(cfg.K):
                    acc = (acc + weights[k] * subshares[k].values[j]) % cfg.p
                values.append(acc)
            out.append(ShareVector(tuple(values), cfg))
        return out

    # ------------------------------------------------------- preprocessing

    def refill_preprocessing(self, count: int):
        """Generate ``count`` shared random bits into the offline pool."""
        cfg = self.cfg
        if self.mode == MODE_DEBUG:
            for _ in range(count):
                self._bit_pool.append(self._deal_aux(self._aux.getrandbits(1)))
            return
        inv2 = mod_inverse(2, cfg.p)
        made = 0
        while made < count:
            # jointly random a = sum of per-party contributions
            vec = self._deal(self._rngs[0].randrange(cfg.p), 0, tag="bitgen")
            for k in range(1, cfg.K):
                vec = add(vec, self._deal(self._rngs[k].randrange(cfg.p), k, tag="bitgen"))
            sq = self._mul_raw([(vec, vec)])[0]
            v = self._open(sq, "mask", "bitgen")
            if v == 0:
                continue
            s = sqrt_mod(v, cfg.p)
            s = min(s, cfg.p - s)  # canonical root
            half = scale(inv2, add_public(scale(mod_inverse(s, cfg.p), vec), 1))
            self._bit_pool.append(half)
            made += 1

    def _take_bits(self, count: int) -> list:
        if len(self._bit_pool) < count:
            if not self.auto_refill:
                raise PreprocessingExhausted(count, len(self._bit_pool))
            self.refill_preprocessing(count - len(self._bit_pool))
        return [self._bit_pool.popleft() for _ in range(count)]

    def _coarse_random(self, bound_bits: int, tag: str) -> ShareVector:
        """Shared masking value in [0, 2**bound_bits), unknown to every party."""
        cfg = self.cfg
        per_party = bound_bits - (cfg.K - 1).bit_length()
        if per_party < 1:
            per_party = 1
        vec = None
        for k in range(cfg.K):
            part = self._deal(self._rngs[k].getrandbits(per_party), k, tag=tag)
            vec = part if vec is None else add(vec, part)
        return vec

    def _trunc_raw(self, vecs) -> list:
        """Probabilistic truncation by 2**f (error in {0, +1} ulp)."""
        cfg = self.cfg
        if self.mode == MODE_DEBUG:
            out = []
            for vec in vecs:
                z = centered(reconstruct(vec), cfg)
                out.append(self._deal_aux((z >> cfg.f) % cfg.p))
            return out
        big_l = cfg.l + cfg.f  # intermediate products carry f extra bits
        offset = 1 << (big_l - 1)
        inv2f = mod_inverse(1 << cfg.f, cfg.p)
        out = []
        for vec in vecs:
            bits = self._take_bits(cfg.f)
            r_low = None
            for j, bit in enumerate(bits):
                term = scale(1 << j, bit)
                r_low = term if r_low is None else add(r_low, term)
            coarse = self._coarse_random(big_l + cfg.kappa - cfg.f, "trunc")
            b = add_public(vec, offset)
            masked = add(b, add(r_low, scale(1 << cfg.f, coarse)))
            c = self._open(masked, "mask", "trunc")
            c_mod = c % (1 << cfg.f)
            d = add(add_public(b, -c_mod), r_low)
            res = add_public(scale(inv2f, d), -(offset >> cfg.f))
            out.append(res)
        return out

    def _sign_raw(self, vec: ShareVector) -> ShareVector:
        """Shares of sign(v) in {-1, +1} with sign(0) = -1, via MSB extraction."""
        cfg = self.cfg
        if self.mode == MODE_DEBUG:
            s = centered(reconstruct(vec), cfg)
            return self._deal_aux((1 if s > 0 else -1) % cfg.p)
        l = cfg.l
        # Shift so the top bit of the l-bit window is exactly [v >= 1]:
        # w = v + 2**(l-1) - 1 lies in [0, 2**l) and its bit l-1 is the sign.
        w = add_public(vec, (1 << (l - 1)) - 1)
        bits = self._take_bits(l)
        r_low = None
        for j, bit in enumerate(bits):
            term = scale(1 << j, bit)
            r_low = term if r_low is None else add(r_low, term)
        coarse = self._coarse_random(cfg.kappa, "sign")
        masked = add(w, add(r_low, scale(1 << l, coarse)))
        c = self._open(masked, "mask", "sign")
        c_bits = [(c >> j) & 1 for j in range(l)]
        # u = [ low l-1 bits of r exceed low l-1 bits of c ], computed from
        # XOR bits e_j (local, c public) and suffix products of (1 - e).
        f_vecs = []
        for j in range(l - 1):
            if c_bits[j]:
                f_vecs.append(bits[j])  # 1 - e = 1 - (1 - b) = b
            else:
                f_vecs.append(add_public(scale(-1, bits[j]), 1))  # 1 - b
        suffix = list(f_vecs)
        span = 1
        n = len(suffix)
        while span < n:
            pairs = [(suffix[j], suffix[j + span]) for j in range(n - span)]
            prods = self._mul_raw(pairs)
            for j in range(n - span):
                suffix[j] = prods[j]
            span *= 2
        terms = []
        for j in range(l - 1):
            if c_bits[j]:
                continue  # b_j * (1 - c_j) term vanishes when c_j = 1
            upper = suffix[j + 1] if j + 1 <= n - 1 else None
            if upper is None:
                terms.append(bits[j])
            else:
                terms.append(self._mul_raw([(bits[j], upper)])[0])
        u = None
        for term in terms:
            u = term if u is None else add(u, term)
        if u is None:
            u = self._deal_aux(0)
        # msb = c_{l-1} XOR b_{l-1} XOR u
        b_top = bits[l - 1]
        bu = self._mul_raw([(b_top, u)])[0]
        inner = sub(add(b_top, u), scale(2, bu))  # b XOR u
        if c_bits[l - 1]:
            msb = add_public(scale(-1, inner), 1)
        else:
            msb = inner
        return add_public(scale(2, msb), -1)

    # ----------------------------------------------------- public operations

    def share_batch(self, secrets, dealers=None) -> list:
        """Deal one batch of secrets in a single parallel round.

        ``dealers[i]`` names the party whose randomness deals secret ``i``
        (default: party 0).
        """
        secrets = list(secrets)
        if dealers is None:
            dealers = [0] * len(secrets)
        if len(dealers) != len(secrets):
            raise DomainError("dealers must match secrets")
        self.ledger.charge("share", 1, len(secrets))
        return [self._deal(s, d) for s, d in zip(secrets, dealers)]

    def mul_batch(self, pairs) -> list:
        """Field multiplication; one communication round for the whole batch."""
        pairs = list(pairs)
        self.ledger.charge("mul", 1, len(pairs))
        return self._mul_raw(pairs)

    def fxp_mul_batch(self, pairs) -> list:
        """Fixed-point multiplication: multiply stage + truncation stage."""
        pairs = list(pairs)
        self.ledger.charge("fxp_mul", 2, 2 * len(pairs))
        return self._trunc_raw(self._mul_raw(pairs))

    def fxp_scale_public_batch(self, vecs, c_encoded: int) -> list:
        """Multiply by a public fixed-point constant, then truncate.

        The multiply half is local, but the stage is charged like a full
        fixed-point multiplication so per-step accounting stays uniform.
        """
        vecs = list(vecs)
        self.ledger.charge("fxp_scale", 2, len(vecs))
        return self._trunc_raw([scale(c_encoded, v) for v in vecs])

    def secure_sign(self, vec: ShareVector) -> ShareVector:
        """Shares of the sign of a fixed-point value; 10 declared rounds."""
        self.ledger.charge("sign", 10, sign_elements(self.cfg))
        return self._sign_raw(vec)

    def reveal_batch(self, vecs, tag: str = "reveal") -> list:
        """Open values to every party; one round for the whole batch."""
        vecs = list(vecs)
        self.ledger.charge("reveal", 1, len(vecs))
        return [self._open(v, "reveal", tag) for v in vecs]


def _weights_all(cfg: FieldConfig) -> list:
    from .shamir import lagrange_weights_at_zero

    return lagrange_weights_at_zero(range(1, cfg.K + 1), cfg.p)
