"""Randomized oracle-versus-closed-form batteries."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .bleeding import BleedPairing, BleedSchedule, bleed_fuse_discrete
from .fock import (
    FockState,
    FusionOutcome,
    backpropagated_count,
    evolve,
    fusion_measure,
    project_count,
)
from .primates import PairingChoice, PrimateParams, fuse

MAX_ORACLE_N = 3
MAX_FAILURES_KEPT = 5


@dataclass
class BatteryResult:
    name: str
    trials: int = 0
    max_error: float = 0.0
    failures: list = field(default_factory=list)
    num_failures: int = 0

    @property
    def passed(self) -> bool:
        return self.num_failures == 0

    def record(self, error: float, tol: float, detail: dict) -> None:
        self.trials += 1
        self.max_error = max(self.max_error, error)
        if not error <= tol:
            self.num_failures += 1
            if len(self.failures) < MAX_FAILURES_KEPT:
                self.failures.append({"error": error, **detail})

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "trials": self.trials,
            "max_error": self.max_error,
            "num_failures": self.num_failures,
            "failures": self.failures,
        }


def _random_primate(n: int, rng: np.random.Generator) -> tuple[float, float]:
    lam = 1.0 if n == 1 else float(rng.uniform(0.05, 1.0))
    return lam, float(rng.uniform(0.02, 0.98))


def _random_state(num_modes: int, photons: int, terms: int, rng: np.random.Generator) -> FockState:
    out = []
    for _ in range(terms):
        occ = np.bincount(rng.integers(0, num_modes, photons), minlength=num_modes)
        out.append((complex(rng.normal(), rng.normal()), tuple(int(v) for v in occ)))
    return FockState.superposition(out)


def fusion_battery(max_n: int, trials: int, tol: float, rng: np.random.Generator) -> BatteryResult:
    """Closed-form fusion against the simulated fusion unit, plus herald correction."""
    res = BatteryResult("fusion_oracle")
    pairings = list(PairingChoice)
    for _ in range(trials):
        n1, n2 = (int(v) for v in rng.integers(1, max_n + 1, 2))
        lam1, s1 = _random_primate(n1, rng)
        lam2, s2 = _random_primate(n2, rng)
        pairing = pairings[int(rng.integers(4))]
        t = float(rng.uniform(0.02, 0.98))
        sim = oracle.simulate_fusion(n1, lam1, s1, n2, lam2, s2, pairing, t)
        ana = fuse(PrimateParams(n1, lam1, s1, 1.0), PrimateParams(n2, lam2, s2, 1.0), pairing, t)
        err = max(
            abs(sim.p_success - ana.p_success),
            abs(sim.s - ana.merged.s),
            abs(sim.lam - ana.merged.lam),
            abs(1.0 - sim.correction_fidelity),
        )
        res.record(err, tol, {"n1": n1, "n2": n2, "lam1": lam1, "lam2": lam2, "s1": s1, "s2": s2,
                              "pairing": pairing.value, "t": t})
    return res


def bleeding_battery(max_n: int, trials: int, tol: float, rng: np.random.Generator) -> BatteryResult:
    """Exact finite-step bleeding sums against averaged Fock trajectories (up to 3 steps)."""
    res = BatteryResult("bleeding_oracle")
    for _ in range(trials):
        n1, n2 = (int(v) for v in rng.integers(1, min(max_n, 2) + 1, 2))
        lam1, s1 = _random_primate(n1, rng)
        lam2, s2 = _random_primate(n2, rng)
        pairing = BleedPairing.PAIRS_14_23 if rng.random() < 0.5 else BleedPairing.PAIRS_13_24
        schedule = BleedSchedule(tuple(float(v) for v in rng.uniform(0.3, 0.99, int(rng.integers(1, 4)))))
        sim = oracle.simulate_bleed(n1, lam1, s1, n2, lam2, s2, pairing.multiplicative, schedule.transmittances)
        ana = bleed_fuse_discrete(PrimateParams(n1, lam1, s1, 1.0), PrimateParams(n2, lam2, s2, 1.0), pairing, schedule)
        err = max(abs(sim.p_success - ana.p_success), abs(sim.s - ana.merged.s), abs(sim.lam - ana.merged.lam))
        res.record(err, tol, {"n1": n1, "n2": n2, "pairing": pairing.value,
                              "transmittances": list(schedule.transmittances)})
    return res


def measurement_battery(trials: int, tol: float, rng: np.random.Generator) -> BatteryResult:
    """Unitarity, measurement completeness and the backpropagation identity on random states."""
    res = BatteryResult("fock_measurement")
    for _ in range(trials):
        modes = int(rng.integers(2, 6))
        photons = int(rng.integers(1, 4))
        state = _random_state(modes, photons, 3, rng)
        u = oracle.random_unitary(modes, rng)
        evolved = evolve(state, u)
        err = abs(evolved.norm2() - 1.0)

        i, j = (int(v) for v in rng.choice(modes, 2, replace=False))
        t = float(rng.uniform(0.05, 0.95))
        total = sum(fusion_measure(state, i, j, t, o).norm2() for o in FusionOutcome)
        # two or more photons leaving modes i, j: everything the three outcomes miss
        for occ, amp in state.items():
            k = occ[i] + occ[j]
            total += abs(amp) ** 2 * (1.0 - t**k - k * t ** (k - 1) * (1.0 - t) if k else 0.0)
        err = max(err, abs(total - 1.0))

        mode = int(rng.integers(modes))
        k = int(rng.integers(0, photons + 1))
        gap = backpropagated_count(state, u, mode, k) + project_count(evolved, mode, k).scaled(-1.0)
        err = max(err, math.sqrt(gap.norm2()))
        res.record(err, tol, {"modes": modes, "photons": photons})
    return res


def pipeline_battery(max_n: int, trials: int, tol: float, rng: np.random.Generator) -> BatteryResult:
    """Whole fusion plans for N = 2 and 3: heralded, corrected output against the target GHZ state."""
    res = BatteryResult("fusion_pipeline")
    pairings = list(PairingChoice)
    for _ in range(trials):
        n = int(rng.integers(2, max(2, min(max_n, 3)) + 1))
        s = float(rng.uniform(0.02, 0.98))
        # chains 1,2 and 1,2,3 only ever add fresh elementary primates;
        # with balanced later leaves every pairing keeps the first leaf's s
        steps = [(0, pairings[int(rng.integers(4))]) for _ in range(n - 1)]
        leaves = [s] + [0.5] * (n - 1)
        ts = rng.uniform(0.1, 0.9, len(steps))
        heralds = [oracle.SUCCESS_CLICKS[int(v)] for v in rng.integers(0, 2, len(steps))]
        ghz, _, corr = oracle.fusion_pipeline(steps, leaves, ts, 0.5, heralds)
        err = max(abs(1.0 - oracle.ghz_fidelity(ghz, s)), abs(1.0 - corr))
        res.record(err, tol, {"N": n, "s": s, "heralds": [list(h) for h in heralds]})
    return res


def run_all(max_n: int = 2, trials: int = 200, tol: float = 1e-9, seed: int = 42) -> list[BatteryResult]:
    if not 1 <= max_n <= MAX_ORACLE_N:
        raise ValueError(f"max_n must lie in 1..{MAX_ORACLE_N} for the exact oracle")
    if trials < 1:
        raise ValueError("trials must be positive")
    if not tol > 0.0:
        raise ValueError("tolerance must be positive")
    rng = np.random.default_rng(seed)
    out = [
        fusion_battery(max_n, trials, tol, rng),
        bleeding_battery(max_n, max(1, trials // 4), tol, rng),
        measurement_battery(trials, tol, rng),
    ]
    if max_n >= 2:
        out.append(pipeline_battery(max_n, max(1, trials // 10), tol, rng))
    return out
