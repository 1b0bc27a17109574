"""Yeo-Johnson transform, its lambda-derivatives, and the profile likelihood.

The transform ``psi(lmbda, x)`` maps real samples through a monotone power
family indexed by a single shape parameter.  Fitting picks the ``lmbda`` that
makes the transformed sample look most Gaussian, by minimizing the profile
negative log-likelihood; the derivative *sign* of that objective can be
written division-free in terms of five data sums, which is what makes the
whole fit expressible inside a secure aggregation protocol.

Everything in this module is a pure function of its inputs and safe to call
concurrently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BRANCH_TOL",
    "FedgaussError",
    "DomainError",
    "InvalidFeature",
    "DegenerateVariance",
    "NumericOverflow",
    "YJParams",
    "SuffStats",
    "Feature",
    "yj_transform",
    "yj_lambda_derivative",
    "phi",
    "suff_stats",
    "merge_stats",
    "neg_log_likelihood",
    "nll_from_stats",
    "grad_sign",
    "gaussianize",
]

# Below this distance from the removable singularities at lmbda = 0 and
# lmbda = 2 the logarithmic limit branches are used instead of the power form.
BRANCH_TOL = 1e-10

_LOG_2PI = math.log(2.0 * math.pi)

# The lambda-derivatives switch to a power series in c*log1p(|x|) once that
# product is small enough that the closed recursion cancels catastrophically.
_SERIES_CUTOFF = 0.25
_SERIES_TERMS = 26


class FedgaussError(Exception):
    """Base class for all library errors."""


class DomainError(FedgaussError, ValueError):
    """Raised for non-finite inputs or parameters outside their domain."""


class InvalidFeature(DomainError):
    """Raised when a feature fails validation (non-finite, < 2 distinct)."""


class DegenerateVariance(FedgaussError, ArithmeticError):
    """The transformed sample has zero empirical variance at this ``lmbda``.

    The likelihood is unbounded there (the log-variance term diverges), so
    callers treat this as a +inf objective value rather than a number.  The
    offending ``lmbda`` is carried on the exception.
    """

    def __init__(self, lmbda: float):
        self.lmbda = float(lmbda)
        super().__init__(f"transformed variance underflowed to 0 at lmbda={lmbda!r}")


class NumericOverflow(FedgaussError, OverflowError):
    """A data sum overflowed binary64 at this ``lmbda``."""

    def __init__(self, lmbda: float):
        self.lmbda = float(lmbda)
        super().__init__(f"non-finite sum while accumulating statistics at lmbda={lmbda!r}")


@dataclass(frozen=True)
class YJParams:
    """Fitted triplet: shape ``lmbda``, post-transform mean and variance."""

    lmbda: float
    mu: float
    sigma2: float


@dataclass(frozen=True)
class SuffStats:
    """The five data sums driving the fit, plus the sample count.

    ``s_dpsi2`` is the sum of the lambda-derivative of ``psi**2``, which by the
    chain rule equals ``2 * sum(psi * dpsi)`` and is computed exactly in that
    form.  ``s_phi`` does not depend on ``lmbda``.
    """

    s_psi: float
    s_psi2: float
    s_dpsi: float
    s_dpsi2: float
    s_phi: float
    n: int


class Feature:
    """An immutable 1-D array of finite samples with >= 2 distinct values."""

    __slots__ = ("values", "name")

    def __init__(self, values, name: str | None = None):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1:
            raise InvalidFeature(f"feature must be 1-D, got shape {arr.shape}")
        if arr.size == 0:
            raise InvalidFeature("feature is empty")
        if not np.isfinite(arr).all():
            raise InvalidFeature("feature contains non-finite values")
        if arr.min() == arr.max():
            raise InvalidFeature("feature has fewer than 2 distinct values")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "name", name)

    def __setattr__(self, key, value):  # pragma: no cover - immutability guard
        raise AttributeError("Feature is immutable")

    def __len__(self) -> int:
        return int(self.values.size)

    def __repr__(self) -> str:
        label = self.name if self.name is not None else "<unnamed>"
        return f"Feature({label}, n={len(self)})"


def _as_values(data) -> np.ndarray:
    """Coerce a Feature or array-like to a validated float64 array."""
    if isinstance(data, Feature):
        return data.values
    arr = np.atleast_1d(np.asarray(data, dtype=np.float64))
    if arr.ndim != 1:
        raise DomainError(f"expected 1-D samples, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise DomainError("samples contain non-finite values")
    return arr


def _check_lambda(lmbda) -> float:
    lam = float(lmbda)
    if not math.isfinite(lam):
        raise DomainError(f"lmbda must be finite, got {lmbda!r}")
    return lam


def yj_transform(lmbda, x):
    """Evaluate the Yeo-Johnson transform ``psi(lmbda, x)`` elementwise.

    Parameters
    ----------
    lmbda : float
        Shape parameter.
    x : float or array_like
        Finite sample value(s).

    Returns
    -------
    float or ndarray
        ``((x+1)**lmbda - 1)/lmbda`` for ``x >= 0`` (log1p limit at
        ``lmbda = 0``) and ``-((1-x)**(2-lmbda) - 1)/(2-lmbda)`` for ``x < 0``
        (-log1p(-x) limit at ``lmbda = 2``).  ``lmbda = 1`` is the exact
        identity on both branches.
    """
    lam = _check_lambda(lmbda)
    scalar = np.isscalar(x) or (isinstance(x, np.ndarray) and x.ndim == 0)
    arr = _as_values(x)
    if lam == 1.0:
        out = arr.copy()
    else:
        out = np.empty_like(arr)
        pos = arr >= 0
        if pos.any():
            ln = np.log1p(arr[pos])
            if abs(lam) < BRANCH_TOL:
                out[pos] = ln
            else:
                out[pos] = np.expm1(lam * ln) / lam
        neg = ~pos
        if neg.any():
            ln = np.log1p(-arr[neg])
            m = 2.0 - lam
            if abs(m) < BRANCH_TOL:
                out[neg] = -ln
            else:
                out[neg] = -np.expm1(m * ln) / m
    return float(out[0]) if scalar else out


def _deriv_series(c: float, ln: np.ndarray, k: int) -> np.ndarray:
    """Series for the k-th lambda-derivative near the log branches.

    With ``u = c * ln`` small, ``psi = (exp(u) - 1)/c`` expands as
    ``sum_j c**(j-1) ln**j / j!`` and differentiating k times in ``c`` gives
    ``sum_{j>=k+1} (j-1)...(j-k) c**(j-1-k) ln**j / j!``.  Terms decay like
    ``(c*ln)**j / j!`` so a short fixed-length sum is exact to binary64 for
    ``|c*ln| < 0.25``.
    """
    out = np.zeros_like(ln)
    cl = c * ln
    term_pow = ln ** (k + 1)  # ln**j with the c-power factored in below
    fact = math.factorial(k + 1)
    for j in range(k + 1, k + 1 + _SERIES_TERMS):
        if k == 1:
            coef = j - 1
        else:
            coef = (j - 1) * (j - 2)
        out += (coef / fact) * term_pow
        term_pow = term_pow * cl
        fact *= j + 1
    return out


def yj_lambda_derivative(lmbda, x, k: int = 1):
    """k-th derivative of ``yj_transform`` with respect to ``lmbda``.

    Only orders 1 and 2 are supported: the first drives the fit, the second
    exists for curvature checks.  On each branch the closed recursion

    ``d_k = ((x+1)**lmbda * ln(x+1)**k - k * d_{k-1}) / lmbda``        (x >= 0)
    ``d_k = ((-1)**(k+1) * (1-x)**(2-lmbda) * ln(1-x)**k + k * d_{k-1}) / (2-lmbda)``  (x < 0)

    is used away from the log branches, and a power series in
    ``lmbda * ln(x+1)`` (resp. ``(2-lmbda) * ln(1-x)``) near them, where the
    recursion cancels catastrophically.
    """
    if k not in (1, 2):
        raise DomainError(f"derivative order must be 1 or 2, got {k!r}")
    lam = _check_lambda(lmbda)
    scalar = np.isscalar(x) or (isinstance(x, np.ndarray) and x.ndim == 0)
    arr = _as_values(x)
    out = np.empty_like(arr)

    pos = arr >= 0
    if pos.any():
        ln = np.log1p(arr[pos])
        res = np.empty_like(ln)
        small = np.abs(lam * ln) < _SERIES_CUTOFF
        if small.any():
            res[small] = _deriv_series(lam, ln[small], k)
        big = ~small
        if big.any():
            lb = ln[big]
            p = np.exp(lam * lb)  # (x+1)**lmbda
            psi = np.expm1(lam * lb) / lam
            d1 = (p * lb - psi) / lam
            res[big] = d1 if k == 1 else (p * lb * lb - 2.0 * d1) / lam
        out[pos] = res

    neg = ~pos
    if neg.any():
        ln = np.log1p(-arr[neg])
        m = 2.0 - lam
        res = np.empty_like(ln)
        small = np.abs(m * ln) < _SERIES_CUTOFF
        if small.any():
            s = _deriv_series(m, ln[small], k)
            res[small] = s if k == 1 else -s
        big = ~small
        if big.any():
            lb = ln[big]
            q = np.exp(m * lb)  # (1-x)**(2-lmbda)
            psi = -np.expm1(m * lb) / m
            d1 = (q * lb + psi) / m
            res[big] = d1 if k == 1 else (-q * lb * lb + 2.0 * d1) / m
        out[neg] = res

    return float(out[0]) if scalar else out


def phi(x):
    """Odd log-compression ``sign(x) * ln(|x| + 1)``; ``phi(0) = 0``."""
    scalar = np.isscalar(x) or (isinstance(x, np.ndarray) and x.ndim == 0)
    arr = _as_values(x)
    out = np.sign(arr) * np.log1p(np.abs(arr))
    return float(out[0]) if scalar else out


def suff_stats(lmbda, feature) -> SuffStats:
    """The five sums (and count) that fully determine the fit at ``lmbda``.

    Sums are accumulated in binary64 with numpy's pairwise reduction, which is
    deterministic for a fixed sample order.  A sum that leaves binary64 raises
    :class:`NumericOverflow` carrying the offending ``lmbda``.
    """
    lam = _check_lambda(lmbda)
    x = _as_values(feature)
    psi = yj_transform(lam, x)
    dpsi = yj_lambda_derivative(lam, x, 1)
    s_psi = float(np.add.reduce(psi))
    s_psi2 = float(np.add.reduce(psi * psi))
    s_dpsi = float(np.add.reduce(dpsi))
    s_dpsi2 = 2.0 * float(np.add.reduce(psi * dpsi))
    s_phi = float(np.add.reduce(np.sign(x) * np.log1p(np.abs(x))))
    if not all(map(math.isfinite, (s_psi, s_psi2, s_dpsi, s_dpsi2, s_phi))):
        raise NumericOverflow(lam)
    return SuffStats(s_psi, s_psi2, s_dpsi, s_dpsi2, s_phi, int(x.size))


def merge_stats(a: SuffStats, b: SuffStats) -> SuffStats:
    """Combine the sums of two disjoint samples (the federation identity)."""
    return SuffStats(
        a.s_psi + b.s_psi,
        a.s_psi2 + b.s_psi2,
        a.s_dpsi + b.s_dpsi,
        a.s_dpsi2 + b.s_dpsi2,
        a.s_phi + b.s_phi,
        a.n + b.n,
    )


def nll_from_stats(stats: SuffStats, lmbda) -> float:
    """Profile negative log-likelihood from precomputed sums."""
    lam = _check_lambda(lmbda)
    n = stats.n
    sigma2 = stats.s_psi2 / n - (stats.s_psi / n) ** 2
    if sigma2 <= 0.0:
        raise DegenerateVariance(lam)
    return 0.5 * n * (_LOG_2PI + math.log(sigma2)) - (lam - 1.0) * stats.s_phi


def neg_log_likelihood(lmbda, feature) -> float:
    """Profile negative log-likelihood of the transformed sample.

    ``(n/2) * (ln(2*pi) + ln var(psi)) - (lmbda - 1) * s_phi``.  When the
    transformed values collapse onto one point in binary64 the variance is 0,
    the objective is unbounded below there, and :class:`DegenerateVariance`
    is raised instead of returning a number — callers that want a sentinel
    catch it and substitute the infinity of their choice.
    """
    return nll_from_stats(suff_stats(lmbda, feature), lmbda)


def grad_sign(stats: SuffStats) -> int:
    """Sign of the derivative of the *log-likelihood* at the stats' lambda.

    Division-free: the returned value is the sign of

    ``2*s_psi*s_dpsi - n*s_dpsi2 + 2*s_phi*(s_psi2 - s_psi**2/n)``

    which shares its sign with ``d/dlmbda log L`` because the (positive)
    variance denominator is cleared.  A zero maps to -1, so a probe landing
    exactly on the optimum steps left; the transcript auditor relies on this
    tie-break.
    """
    n = stats.n
    g = (
        2.0 * stats.s_psi * stats.s_dpsi
        - n * stats.s_dpsi2
        + 2.0 * stats.s_phi * (stats.s_psi2 - stats.s_psi * stats.s_psi / n)
    )
    return 1 if g > 0.0 else -1


def gaussianize(params: YJParams, feature):
    """Apply a fitted transform: ``(psi(lmbda, x) - mu) / sqrt(sigma2)``.

    When ``params`` were fitted on this same feature the output has empirical
    mean 0 and variance 1 (to rounding).  Returns a :class:`Feature` when
    given one, else a plain array.
    """
    if not (params.sigma2 > 0.0) or not math.isfinite(params.sigma2):
        raise DomainError(f"sigma2 must be positive, got {params.sigma2!r}")
    if not (math.isfinite(params.lmbda) and math.isfinite(params.mu)):
        raise DomainError("params must be finite")
    x = _as_values(feature)
    out = (yj_transform(params.lmbda, x) - params.mu) / math.sqrt(params.sigma2)
    if isinstance(feature, Feature):
        return Feature(out, name=feature.name)
    return out
