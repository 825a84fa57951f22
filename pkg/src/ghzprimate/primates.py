"""Closed-form primate generation and pairwise fusion.

A primate of size ``n`` carries ``n + 1`` photons on ``2n`` modes.  Its
useful weight ``lam`` and entanglement ``s`` change under fusion according to
which outer modes of the two operands are interfered.  ``nu`` is the average
number of photons consumed per successfully produced copy.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Sequence
from dataclasses import dataclass

S_EPS = 1e-9


class InfeasibleTarget(ValueError):
    """No assignment of the free entanglement parameter reaches the target."""


@dataclass(frozen=True)
class PrimateParams:
    n: int
    lam: float
    s: float
    nu: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("primate size must be >= 1")
        if not (0.0 <= self.lam <= 1.0 + 1e-12 and 0.0 <= self.s <= 1.0):
            raise ValueError(f"invalid primate parameters lam={self.lam}, s={self.s}")
        if not self.nu > 0.0:
            raise ValueError(f"photon cost must be positive, got {self.nu}")


class PairingChoice(enum.Enum):
    """Which outer modes are fused: modes 1, 2 belong to the first operand, 3, 4 to the second."""

    P14 = "14"
    P23 = "23"
    P13 = "13"
    P24 = "24"

    @property
    def multiplicative(self) -> bool:
        """True for the pairings whose odds ratios multiply."""
        return self in (PairingChoice.P14, PairingChoice.P23)

    @property
    def fused_weights(self) -> tuple[bool, bool]:
        """Whether each operand's fused mode is its left (2-photon-with-weight-s) mode."""
        return {
            PairingChoice.P14: (True, False),
            PairingChoice.P13: (True, True),
            PairingChoice.P23: (False, True),
            PairingChoice.P24: (False, False),
        }[self]


@dataclass(frozen=True)
class FusionResult:
    merged: PrimateParams
    p_success: float


def elementary_cost(s: float) -> float:
    """Average photons per elementary primate ``sqrt(s)|20> + sqrt(1-s)|02>``.

    Includes the credit for single photons recycled from the heralding ancilla.
    """
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    s = max(s, 1.0 - s)
    if s > 1.0 - S_EPS:
        return 4.0
    r = math.sqrt(1.0 - s)
    return 4.0 * s - 2.0 * r * (math.sqrt(s) - r)


def elementary_success_prob(s: float) -> float:
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    return 1.0 / (2.0 * max(s, 1.0 - s))


def elementary_primate(s: float) -> PrimateParams:
    return PrimateParams(1, 1.0, s, elementary_cost(s))


def merge_s(s1: float, s2: float, multiplicative: bool) -> tuple[float, float]:
    """Return ``(s', K)`` where ``K`` is the useful-overlap weight of the fused pair."""
    if multiplicative:
        num, other = s1 * s2, (1.0 - s1) * (1.0 - s2)
    else:
        num, other = s1 * (1.0 - s2), (1.0 - s1) * s2
    k = num + other
    if k <= 0.0:
        raise InfeasibleTarget(f"operands s1={s1}, s2={s2} share no useful component")
    return num / k, k


def fusion_probability(a: PrimateParams, b: PrimateParams, pairing: PairingChoice, t: float) -> float:
    left_a, left_b = pairing.fused_weights
    u1 = a.s if left_a else 1.0 - a.s
    u2 = b.s if left_b else 1.0 - b.s
    return 2.0 * t * (1.0 - t) * (
        u1 * a.lam + u2 * b.lam - 2.0 * u1 * u2 * (1.0 - t * t) * a.lam * b.lam
    )


def fuse(a: PrimateParams, b: PrimateParams, pairing: PairingChoice, t: float) -> FusionResult:
    if not 0.0 < t < 1.0:
        raise ValueError(f"fusion transmittance must lie in (0, 1), got {t}")
    pairing = PairingChoice(pairing)
    p = fusion_probability(a, b, pairing, t)
    s_new, k = merge_s(a.s, b.s, pairing.multiplicative)
    lam_new = 2.0 * t * (1.0 - t) * a.lam * b.lam * k / p
    merged = PrimateParams(a.n + b.n, min(lam_new, 1.0), s_new, (a.nu + b.nu) / p)
    return FusionResult(merged, p)


def final_fusion(p: PrimateParams, t: float = 0.5) -> tuple[float, float]:
    """Fuse the two outer modes of ``p``; returns ``(p_success, s of the GHZ-like state)``."""
    if not 0.0 < t < 1.0:
        raise ValueError(f"fusion transmittance must lie in (0, 1), got {t}")
    return 2.0 * t * (1.0 - t) * p.lam, p.s


def _logit(s: float) -> float:
    return math.log(s) - math.log1p(-s)


def _expit(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def s_chain_solve(
    target_s: float, pairings: Sequence[PairingChoice], known_s: Sequence[float | None]
) -> list[float]:
    """Fill in the single unknown leaf of a left-to-right fusion sequence.

    ``known_s[0]`` is the first operand, ``known_s[k + 1]`` the operand fused in
    step ``k`` with ``pairings[k]``.  In log-odds the multiplicative pairings add
    and the ratio pairings subtract, so the unknown is solved linearly.
    """
    if len(known_s) != len(pairings) + 1:
        raise ValueError("need one more s value than pairings")
    unknown = [k for k, s in enumerate(known_s) if s is None]
    if len(unknown) != 1:
        raise ValueError("exactly one s value must be unknown")
    if not 0.0 <= target_s <= 1.0:
        raise ValueError("target s must lie in [0, 1]")
    signs = [1] + [1 if PairingChoice(p).multiplicative else -1 for p in pairings]
    known = [(s, sign) for s, sign in zip(known_s, signs) if s is not None]
    boundary = target_s in (0.0, 1.0) or any(s in (0.0, 1.0) for s, _ in known)
    if boundary:
        interior = all(0.0 < s < 1.0 for s, _ in known)
        if target_s in (0.0, 1.0) and interior:
            raise InfeasibleTarget(f"target s={target_s} needs a degenerate operand")
        raise InfeasibleTarget("degenerate operands make the chain unsolvable")
    rhs = _logit(target_s) - sum(sign * _logit(s) for s, sign in known)
    solved = _expit(rhs * signs[unknown[0]])
    out = [float(s) if s is not None else solved for s in known_s]
    return out
