"""Leakage audit: replay every revealed value from the final lambda alone.

The federated fit opens one sign per step plus the final moments.  Because
the bracket update is deterministic, all of those signs are a function of
lambda* -- so an auditor who knows only the output can reconstruct the whole
revealed trajectory.  A transcript that matches its reconstruction therefore
leaked nothing beyond what the output itself implies; a mismatch pinpoints
the first step where extra information escaped.
"""

from __future__ import annotations

from dataclasses import dataclass

from .solver import SearchState, exp_update
from .transform import DomainError

__all__ = [
    "AuditVerdict",
    "RecoveredStep",
    "RecoveredTrace",
    "recover_trace",
    "revealed_surface_ok",
    "verify_leakage",
]


@dataclass(frozen=True)
class RecoveredStep:
    """Bracket state after one replayed step."""

    lmbda: float
    lo: float
    hi: float
    delta: int


@dataclass(frozen=True)
class RecoveredTrace:
    """The full trajectory implied by a final lambda."""

    lambda_star: float
    steps: tuple

    @property
    def deltas(self) -> tuple:
        return tuple(s.delta for s in self.steps)

    @property
    def lambdas(self) -> tuple:
        return tuple(s.lmbda for s in self.steps)

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class AuditVerdict:
    """match, or mismatch at the first diverging step (1-based)."""

    matched: bool
    step: int = 0
    detail: str = ""

    def __str__(self) -> str:
        if self.matched:
            return "match"
        return f"mismatch(step={self.step}): {self.detail}"

    def __bool__(self) -> bool:
        return self.matched


def recover_trace(lambda_star: float, t_max: int) -> RecoveredTrace:
    """Replay the search from lambda_0 = 0 using only the final value.

    At each step the sign is +1 exactly when the current lambda is strictly
    below lambda*; this pairs with the protocol's sign(0) -> -1 tie-break,
    so a step landing exactly on lambda* replays correctly too.
    """
    lambda_star = float(lambda_star)
    t_max = int(t_max)
    if t_max < 0:
        raise DomainError("t_max must be >= 0")
    state = SearchState(0.0, float("-inf"), float("inf"), 0)
    steps = []
    lam = 0.0
    for _ in range(t_max):
        delta = 1 if lam < lambda_star else -1
        state = exp_update(state, delta)
        lam = state.lmbda
        steps.append(RecoveredStep(state.lmbda, state.lo, state.hi, delta))
    return RecoveredTrace(lambda_star=lambda_star, steps=tuple(steps))


def verify_leakage(transcript, t_max: int = None) -> AuditVerdict:
    """Compare a protocol transcript against its replay from lambda* alone.

    Signs must agree and every lambda_t must agree *exactly* -- both sides
    run the same binary64 bracket arithmetic, so equality is the bar.
    """
    if t_max is None:
        t_max = transcript.t_max or len(transcript.deltas)
    t_max = int(t_max)
    if len(transcript.deltas) != t_max or len(transcript.lambdas) != t_max:
        return AuditVerdict(
            False, 0,
            f"transcript has {len(transcript.deltas)} steps, expected {t_max}",
        )
    trace = recover_trace(transcript.final.lmbda, t_max)
    for i, step in enumerate(trace.steps):
        t = i + 1
        if transcript.deltas[i] != step.delta:
            return AuditVerdict(
                False, t,
                f"sign revealed {transcript.deltas[i]:+d}, "
                f"replay expects {step.delta:+d}",
            )
        if transcript.lambdas[i] != step.lmbda:
            return AuditVerdict(
                False, t,
                f"lambda {transcript.lambdas[i]!r} != replayed {step.lmbda!r}",
            )
    return AuditVerdict(True)


def revealed_surface_ok(transcript) -> bool:
    """True iff the transcript opened exactly the signs and final moments."""
    kinds = [(step, kind) for step, kind, _ in transcript.revealed]
    expect = [(t, "delta") for t in range(1, transcript.t_max + 1)]
    expect.append((transcript.t_max + 1, "mu"))
    expect.append((transcript.t_max + 1, "sigma2"))
    return kinds == expect
