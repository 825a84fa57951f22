"""The bleeding unit: repeated weak fusion on two mode pairs until one click.

``c`` is the fraction of useful amplitude left untouched after all steps
(the product of squared transmittances).  ``c = 0`` is exhaustive bleeding.
Results come in two forms: closed-form continuum-limit expressions, and exact
finite sums over an explicit transmittance schedule.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .primates import FusionResult, PrimateParams, merge_s

DEFAULT_FINAL_STEPS = 10_000


class BleedPairing(enum.Enum):
    PAIRS_14_23 = "14&23"
    PAIRS_13_24 = "13&24"

    @property
    def multiplicative(self) -> bool:
        return self is BleedPairing.PAIRS_14_23


class MixedPrimateParams(PrimateParams):
    """Primate parameters read as the diagonal weights of a mixed state."""


@dataclass(frozen=True)
class BleedSchedule:
    transmittances: tuple[float, ...]

    def __post_init__(self):
        if not self.transmittances:
            raise ValueError("a schedule needs at least one step")
        if any(not 0.0 < t <= 1.0 for t in self.transmittances):
            raise ValueError("transmittances must lie in (0, 1]")

    @property
    def steps(self) -> int:
        return len(self.transmittances)

    @property
    def retention(self) -> float:
        return float(np.prod(np.square(self.transmittances)))


def schedule_uniform(c: float, steps: int) -> BleedSchedule:
    """Constant transmittance ``c**(1/(2 steps))``; ``c = 0`` uses ``1/steps`` instead."""
    if steps < 1:
        raise ValueError("need at least one step")
    if not 0.0 <= c <= 1.0:
        raise ValueError("retention must lie in [0, 1]")
    base = c if c > 0.0 else 1.0 / steps
    return BleedSchedule((base ** (1.0 / (2 * steps)),) * steps)


def schedule_harmonic(steps: int) -> BleedSchedule:
    """``t_x = sqrt((N+1-x)/(N+2-x))``, which telescopes to ``c = 1/(N+1)``."""
    if steps < 1:
        raise ValueError("need at least one step")
    return BleedSchedule(
        tuple(math.sqrt((steps + 1 - x) / (steps + 2 - x)) for x in range(1, steps + 1))
    )


def lambda_progress(lam0: float, retention: float) -> float:
    """Useful weight after every step so far has seen no click."""
    denom = 1.0 - (1.0 - retention) * lam0
    if denom == 0.0:
        return 0.0
    return lam0 * retention / denom


def _mixed(n: int, lam: float, s: float, nu: float) -> MixedPrimateParams:
    return MixedPrimateParams(n, min(lam, 1.0), s, nu)


def _merge(a: PrimateParams, b: PrimateParams, p: float, lam_new: float, s_new: float) -> FusionResult:
    nu = (a.nu + b.nu) / p if p > 0.0 else math.inf
    if not math.isfinite(nu):
        raise ValueError("bleeding never succeeds; photon cost is undefined")
    return FusionResult(_mixed(a.n + b.n, lam_new, s_new, nu), p)


def continuum_probability(lam1: float, lam2: float, c: float) -> float:
    return (1.0 - c) * (lam1 + lam2 - (1.0 - c) * lam1 * lam2)


def bleed_fuse_continuum(
    a: PrimateParams, b: PrimateParams, pairing: BleedPairing, c: float
) -> FusionResult:
    if not 0.0 <= c <= 1.0:
        raise ValueError("retention must lie in [0, 1]")
    pairing = BleedPairing(pairing)
    s_new, k = merge_s(a.s, b.s, pairing.multiplicative)
    p = continuum_probability(a.lam, b.lam, c)
    lam_new = k * a.lam * b.lam * (1.0 + c) / (a.lam + b.lam - (1.0 - c) * a.lam * b.lam)
    return _merge(a, b, p, lam_new, s_new)


def discrete_sums(lam1: float, lam2: float, schedule: BleedSchedule) -> tuple[float, float]:
    """Exact ``(p_success, sum_x t^3 (1 - t) R_{x-1}^2)`` for a finite schedule.

    ``R_x`` is the running product of squared transmittances.  Only single
    clicks count as success; two or more photons in one step end the attempt.
    """
    t = np.asarray(schedule.transmittances, dtype=float)
    r = np.cumprod(t * t)
    r_prev = np.concatenate(([1.0], r[:-1]))
    p = float(np.sum(2.0 * t * (1.0 - t) * (lam1 + lam2 - 2.0 * (1.0 - r) * lam1 * lam2) * r_prev))
    useful = float(np.sum(t**3 * (1.0 - t) * r_prev**2))
    return p, useful


def bleed_fuse_discrete(
    a: PrimateParams, b: PrimateParams, pairing: BleedPairing, schedule: BleedSchedule
) -> FusionResult:
    pairing = BleedPairing(pairing)
    s_new, k = merge_s(a.s, b.s, pairing.multiplicative)
    p, useful = discrete_sums(a.lam, b.lam, schedule)
    if p == 0.0:
        # nothing ever leaks out; the cost of a success is unbounded
        return FusionResult(_mixed(a.n + b.n, 0.0, s_new, math.inf), 0.0)
    lam_new = 4.0 * a.lam * b.lam * k * useful / p
    return _merge(a, b, p, lam_new, s_new)


def final_discrete_probability(lam: float, schedule: BleedSchedule) -> float:
    """Single-pair bleeding on the two outer modes; only the useful part can click."""
    t = np.asarray(schedule.transmittances, dtype=float)
    r_prev = np.concatenate(([1.0], np.cumprod(t * t)[:-1]))
    return float(lam * np.sum(2.0 * t * (1.0 - t) * r_prev))


def bleed_final(p: PrimateParams, c: float = 0.0, steps: int = DEFAULT_FINAL_STEPS) -> float:
    """Success probability of the last single-pair unit turning a primate into a GHZ-like state."""
    if not 0.0 <= c <= 1.0:
        raise ValueError("retention must lie in [0, 1]")
    if c == 0.0:
        return p.lam
    if c == 1.0:
        return 0.0
    return final_discrete_probability(p.lam, schedule_uniform(c, steps))
