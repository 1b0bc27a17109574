"""Pooled fitting: exponential search on the gradient sign, plus a Brent baseline.

The exponential search (`fit_expyj`) never divides by the transformed
variance and never evaluates its logarithm — each step needs only the *sign*
of the likelihood derivative, read off the data sums.  That is what makes it
both numerically robust when the variance underflows and cheap to port into
a secure protocol, where the sign is the only value ever decrypted.

The Brent baseline (`fit_brent`) minimizes the actual negative log-likelihood
the way a generic 1-D optimizer would, and therefore inherits the classic
failure mode: on features whose transformed values collapse in binary64 the
objective has a spurious minus-infinity plateau that the parabolic steps dive
into.  The baseline reports that honestly via its ``degenerate`` flag.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .transform import (
    DegenerateVariance,
    DomainError,
    Feature,
    FedgaussError,
    SuffStats,
    YJParams,
    grad_sign,
    neg_log_likelihood,
    suff_stats,
)

__all__ = [
    "SearchState",
    "FitReport",
    "BrentConvergenceError",
    "exp_update",
    "fit_expyj",
    "fit_brent",
    "fd_sign_oracle",
    "brent_minimize",
    "METHOD_EXPYJ",
    "METHOD_BRENT",
]

METHOD_EXPYJ = "expyj"
METHOD_BRENT = "brent"

_GOLDEN = 0.381966011250105097  # 2 - golden ratio


@dataclass(frozen=True)
class SearchState:
    """Bracketed search position: current ``lmbda`` plus bounds and step index.

    ``lo``/``hi`` start at -inf/+inf; once both are finite every update halves
    the bracket.
    """

    lmbda: float
    lo: float
    hi: float
    step: int

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"bracket bounds out of order: ({self.lo}, {self.hi})")
        if math.isfinite(self.lo) and math.isfinite(self.hi):
            if not (self.lo <= self.lmbda <= self.hi):
                raise DomainError(
                    f"lmbda={self.lmbda} outside bracket ({self.lo}, {self.hi})"
                )


@dataclass(frozen=True)
class FitReport:
    """Result of one fit: parameters, search trajectory, and bookkeeping.

    ``trajectory`` holds one ``(lmbda_t, delta_t)`` pair per search step and
    is empty for the Brent baseline.  ``degenerate`` is set when the method
    ran into a zero transformed variance.
    """

    params: YJParams
    trajectory: tuple
    steps: int
    method: str
    degenerate: bool = False


class BrentConvergenceError(FedgaussError, RuntimeError):
    """Iteration cap hit; carries the best point seen so far."""

    def __init__(self, best_x: float, best_fx: float, iterations: int):
        self.best_x = best_x
        self.best_fx = best_fx
        self.iterations = iterations
        super().__init__(
            f"no convergence after {iterations} iterations; best x={best_x!r}, f={best_fx!r}"
        )


def exp_update(state: SearchState, delta: int) -> SearchState:
    """One bracket update from a derivative sign.

    ``delta = +1`` (likelihood still increasing): the current ``lmbda``
    becomes the lower bound and the next probe is the midpoint with the upper
    bound, or ``max(2*lmbda, 1)`` while unbounded above.  ``delta = -1`` is
    the mirror image with ``min(2*lmbda, -1)``.
    """
    if delta not in (-1, 1):
        raise DomainError(f"delta must be -1 or +1, got {delta!r}")
    if delta == 1:
        lo, hi = state.lmbda, state.hi
        if math.isfinite(hi):
            lam = 0.5 * (state.lmbda + hi)
        else:
            lam = max(2.0 * state.lmbda, 1.0)
    else:
        lo, hi = state.lo, state.lmbda
        if math.isfinite(lo):
            lam = 0.5 * (state.lmbda + lo)
        else:
            lam = min(2.0 * state.lmbda, -1.0)
    return SearchState(lam, lo, hi, state.step + 1)


def fit_expyj(feature, t_max: int = 40, early_stop: bool = False, width_tol: float = 0.0) -> FitReport:
    """Fit by exponential search on the likelihood-derivative sign.

    Runs exactly ``t_max`` steps from ``lmbda = 0`` (the step count, not a
    tolerance, controls precision: the bracket halves per step once bounded).
    ``early_stop`` optionally stops once the bracket is narrower than
    ``width_tol``; it is off by default so runs of equal ``t_max`` are
    bit-for-bit comparable.

    Returns a :class:`FitReport` whose params hold ``lmbda* = lmbda_{t_max}``
    and the post-transform mean/variance at that ``lmbda*``.
    """
    if t_max < 1:
        raise DomainError(f"t_max must be >= 1, got {t_max!r}")
    feat = feature if isinstance(feature, Feature) else Feature(feature)
    x = feat.values
    state = SearchState(0.0, -math.inf, math.inf, 0)
    trajectory = []
    for _ in range(t_max):
        stats = suff_stats(state.lmbda, x)
        delta = grad_sign(stats)
        state = exp_update(state, delta)
        trajectory.append((state.lmbda, delta))
        if (
            early_stop
            and math.isfinite(state.lo)
            and math.isfinite(state.hi)
            and state.hi - state.lo < width_tol
        ):
            break
    lam_star = state.lmbda
    final = suff_stats(lam_star, x)
    mu = final.s_psi / final.n
    sigma2 = final.s_psi2 / final.n - mu * mu
    if sigma2 <= 0.0:
        raise DegenerateVariance(lam_star)
    return FitReport(
        params=YJParams(lam_star, mu, sigma2),
        trajectory=tuple(trajectory),
        steps=len(trajectory),
        method=METHOD_EXPYJ,
    )


def brent_minimize(func, lower: float, upper: float, rel_tol: float = 1e-8,
                   abs_tol: float = 1e-10, max_iter: int = 500):
    """Derivative-free 1-D minimization over a bounded interval.

    Golden-section steps with opportunistic parabolic interpolation; the
    parabolic step is skipped whenever any of the three retained function
    values is non-finite (the fit objective legitimately returns -inf on
    degenerate regions, and a parabola through infinities is meaningless).

    Returns ``(x, fx, iterations)``.  Raises
    :class:`BrentConvergenceError` if the interval has not collapsed to the
    tolerance within ``max_iter`` iterations.
    """
    if not (lower < upper):
        raise DomainError(f"bracket out of order: ({lower!r}, {upper!r})")
    a, b = float(lower), float(upper)
    x = w = v = a + _GOLDEN * (b - a)
    fx = fw = fv = func(x)
    deltax = 0.0
    rat = 0.0
    for it in range(max_iter):
        xm = 0.5 * (a + b)
        tol1 = rel_tol * abs(x) + abs_tol
        tol2 = 2.0 * tol1
        if abs(x - xm) <= tol2 - 0.5 * (b - a):
            return x, fx, it
        golden_step = True
        if abs(deltax) > tol1 and all(map(math.isfinite, (fx, fw, fv))):
            # Fit a parabola through (v, w, x); accept its vertex only if it
            # lands inside the interval and moves less than half the
            # step-before-last.
            tmp1 = (x - w) * (fx - fv)
            tmp2 = (x - v) * (fx - fw)
            p = (x - v) * tmp2 - (x - w) * tmp1
            tmp2 = 2.0 * (tmp2 - tmp1)
            if tmp2 > 0.0:
                p = -p
            tmp2 = abs(tmp2)
            dx_prev = deltax
            deltax = rat
            if (
                tmp2 != 0.0
                and p > tmp2 * (a - x)
                and p < tmp2 * (b - x)
                and abs(p) < abs(0.5 * tmp2 * dx_prev)
            ):
                rat = p / tmp2
                u = x + rat
                if (u - a) < tol2 or (b - u) < tol2:
                    rat = tol1 if xm - x >= 0.0 else -tol1
                golden_step = False
        if golden_step:
            deltax = (a if x >= xm else b) - x
            rat = _GOLDEN * deltax
        u = x + (rat if abs(rat) >= tol1 else (tol1 if rat >= 0.0 else -tol1))
        fu = func(u)
        if fu <= fx:
            if u >= x:
                a = x
            else:
                b = x
            v, w, x = w, x, u
            fv, fw, fx = fw, fx, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, w = w, u
                fv, fw = fw, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    raise BrentConvergenceError(x, fx, max_iter)


def fit_brent(feature, bracket=(-50.0, 50.0), tol: float = 1e-8, max_iter: int = 500) -> FitReport:
    """Baseline fit: Brent minimization of the negative log-likelihood.

    On well-behaved features this lands on the same optimum as the
    exponential search.  When the objective hits a zero transformed variance
    the probe value is treated as -inf — exactly what a naive implementation
    taking ``log(var)`` would produce — so the minimizer is free to run off
    into the degenerate plateau; the returned report then has
    ``degenerate=True`` and params whose ``mu``/``sigma2`` are NaN.
    """
    feat = feature if isinstance(feature, Feature) else Feature(feature)
    x = feat.values
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise DomainError(f"bracket out of order: {bracket!r}")
    saw_degenerate = False

    def objective(lam: float) -> float:
        nonlocal saw_degenerate
        try:
            return neg_log_likelihood(lam, x)
        except DegenerateVariance:
            saw_degenerate = True
            return -math.inf

    lam_b, _, iters = brent_minimize(objective, lo, hi, rel_tol=tol, max_iter=max_iter)

    stats = suff_stats(lam_b, x)
    mu = stats.s_psi / stats.n
    sigma2 = stats.s_psi2 / stats.n - mu * mu
    degenerate = saw_degenerate or sigma2 <= 0.0
    if sigma2 <= 0.0:
        params = YJParams(lam_b, math.nan, math.nan)
    else:
        params = YJParams(lam_b, mu, sigma2)
    return FitReport(
        params=params,
        trajectory=(),
        steps=iters,
        method=METHOD_BRENT,
        degenerate=degenerate,
    )


def fd_sign_oracle(lmbda, feature, h: float = 1e-6) -> int:
    """Sign of the log-likelihood slope by central finite difference.

    Independent of :func:`~fedgauss.transform.grad_sign` — it probes the
    actual objective at ``lmbda +- h`` — and used to cross-validate it.
    Propagates :class:`DegenerateVariance` if either probe is degenerate.
    """
    if not h > 0.0:
        raise DomainError(f"h must be positive, got {h!r}")
    lam = float(lmbda)
    left = neg_log_likelihood(lam - h, feature)
    right = neg_log_likelihood(lam + h, feature)
    # log-likelihood slope sign = sign(nll(lam-h) - nll(lam+h))
    return 1 if left - right > 0.0 else -1
