"""Generation plans, their photon cost, and the search for the cheapest plan.

A plan walks a star addition chain.  At every step the running primate is
fused (or bled) with a fresh copy of an earlier term; if that term is 1 the
copy is a new elementary primate with its own ``s``.  Costs follow the
recursion ``nu' = (nu_a + nu_b) / p`` and the last unit divides once more by
its own success probability.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .bleeding import BleedPairing, bleed_final, bleed_fuse_continuum
from .chains import AdditionChain, enumerate_star_chains, minimal_length
from .primates import (
    InfeasibleTarget,
    PairingChoice,
    PrimateParams,
    elementary_primate,
    elementary_success_prob,
    final_fusion,
    fuse,
)

SCHEMA_VERSION = 1
FUSION = "fusion"
BLEEDING = "bleeding"
METHODS = (FUSION, BLEEDING)
TIE_RTOL = 1e-9
THREADS_ENV = "GHZPRIMATE_THREADS"


@dataclass(frozen=True)
class GenerationPlan:
    method: str
    chain: AdditionChain
    pairings: tuple  # PairingChoice (fusion) or BleedPairing (bleeding), one per step
    params: tuple[float, ...]  # t (fusion) or c (bleeding), one per step
    final_param: float  # t of the final fusion, c of the final single-pair bleed
    leaf_s: tuple[float, ...]
    target_s: float

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        m = self.chain.steps
        if len(self.pairings) != m or len(self.params) != m:
            raise ValueError("one pairing and one parameter per chain step")
        if len(self.leaf_s) != num_leaves(self.chain):
            raise ValueError(f"chain needs {num_leaves(self.chain)} leaf s values")

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "chain": self.chain.to_json(),
            "pairings": [p.value for p in self.pairings],
            "params": list(self.params),
            "final_param": self.final_param,
            "leaf_s": list(self.leaf_s),
            "target_s": self.target_s,
        }

    @classmethod
    def from_json(cls, data: dict) -> GenerationPlan:
        kind = PairingChoice if data["method"] == FUSION else BleedPairing
        return cls(
            data["method"],
            AdditionChain.from_json(data["chain"]),
            tuple(kind(p) for p in data["pairings"]),
            tuple(data["params"]),
            data["final_param"],
            tuple(data["leaf_s"]),
            data["target_s"],
        )

    def serialized(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass(frozen=True)
class PlanEvaluation:
    nu: float
    single_pass_prob: float
    final: PrimateParams
    step_probs: tuple[float, ...]
    final_prob: float


def num_leaves(chain: AdditionChain) -> int:
    return 1 + sum(1 for k in range(chain.steps) if chain.operand(k) == 0)


def trace_plan(plan: GenerationPlan) -> PlanEvaluation:
    leaves = iter(plan.leaf_s)
    s0 = next(leaves)
    terms = [elementary_primate(s0)]
    # a single pass builds every reused term afresh and heralds every leaf pair
    single = [elementary_success_prob(s0)]
    probs = []
    for k in range(plan.chain.steps):
        j = plan.chain.operand(k)
        if j == 0:
            sb = next(leaves)
            b, pb = elementary_primate(sb), elementary_success_prob(sb)
        else:
            b, pb = terms[j], single[j]
        if plan.method == FUSION:
            res = fuse(terms[-1], b, plan.pairings[k], plan.params[k])
        else:
            res = bleed_fuse_continuum(terms[-1], b, plan.pairings[k], plan.params[k])
        if res.p_success <= 0.0:
            raise ValueError(f"step {k} never succeeds")
        terms.append(res.merged)
        probs.append(res.p_success)
        single.append(single[-1] * pb * res.p_success)
    last = terms[-1]
    if plan.method == FUSION:
        pf, _ = final_fusion(last, plan.final_param)
    else:
        pf = bleed_final(last, plan.final_param)
    if pf <= 0.0:
        raise ValueError("final step never succeeds")
    return PlanEvaluation(last.nu / pf, single[-1] * pf, last, tuple(probs), pf)


def evaluate_plan(plan: GenerationPlan) -> tuple[float, float]:
    """Average photon cost and single-pass success probability of a plan."""
    ev = trace_plan(plan)
    return ev.nu, ev.single_pass_prob


def single_pass_reference(num_qubits: int, method: str) -> float:
    """Best single-pass probability of the reference schemes (2N photons in one go)."""
    if num_qubits < 2:
        raise ValueError("need at least two qubits")
    if method == FUSION:
        return 0.5 ** (2 * num_qubits - 1)
    if method == BLEEDING:
        return 0.5 ** (num_qubits - 1)
    raise ValueError(f"unknown method {method!r}")


def exhaustive_bleeding_plan(num_qubits: int, s: float = 0.5) -> GenerationPlan:
    """Exhaustive bleeding (every c = 0) with balanced primates along 1, 2, ..., N."""
    chain = AdditionChain.star(range(1, num_qubits + 1))
    m = chain.steps
    return GenerationPlan(
        BLEEDING, chain, (BleedPairing.PAIRS_14_23,) * m, (0.0,) * m, 0.0, (0.5,) * num_leaves(chain), s
    )


# ---------------------------------------------------------------- search


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 32
    seed: int = 42
    max_evals: int = 4000  # per simplex run
    polish_rounds: int = 2
    fixed_primates: bool = False
    chain_slack: int = 2
    symmetry_reduction: bool = True
    xatol: float = 1e-7
    fatol: float = 1e-11
    step: float = 0.5

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("need at least one restart")
        if self.max_evals < 1:
            raise ValueError("iteration budget must be positive")
        if self.chain_slack < 0:
            raise ValueError("chain slack must be non-negative")


@dataclass
class CostReport:
    num_qubits: int
    target_s: float
    method: str
    plan: GenerationPlan
    nu: float
    single_pass_prob: float
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "N": self.num_qubits,
            "s_target": self.target_s,
            "method": self.method,
            "nu": self.nu,
            "single_pass_prob": self.single_pass_prob,
            "plan": self.plan.to_json(),
            "metadata": self.metadata,
        }

    @classmethod
    def from_json(cls, data: dict) -> CostReport:
        return cls(
            data["N"], data["s_target"], data["method"], GenerationPlan.from_json(data["plan"]),
            data["nu"], data["single_pass_prob"], data.get("metadata", {}),
        )


@dataclass(frozen=True)
class _Candidate:
    chain: AdditionChain
    pairings: tuple
    encoded: tuple
    dim: int
    kinds: tuple[str, ...]  # "t", "c" or "s" per free parameter


def _logit(s: float) -> float:
    return math.log(s) - math.log1p(-s)


def leaf_coefficients(chain: AdditionChain, pairings) -> np.ndarray:
    """Integer weights of each leaf's log-odds in the log-odds of the final primate."""
    nleaf = num_leaves(chain)
    eye = np.eye(nleaf)
    coefs = [eye[0]]
    leaf = 1
    for k in range(chain.steps):
        j = chain.operand(k)
        if j == 0:
            b = eye[leaf]
            leaf += 1
        else:
            b = coefs[j]
        sign = 1.0 if pairings[k].multiplicative else -1.0
        coefs.append(coefs[-1] + sign * b)
    return coefs[-1]


_MIRROR = {
    PairingChoice.P14: PairingChoice.P23,
    PairingChoice.P23: PairingChoice.P14,
    PairingChoice.P13: PairingChoice.P24,
    PairingChoice.P24: PairingChoice.P13,
}


def _pairing_options(chain: AdditionChain, method: str, fixed: bool, target_s: float, reduce: bool = True):
    """Pairing assignments worth searching for one chain.

    With balanced leaves every pairing gives the same plan.  With free leaves,
    a step that takes a fresh elementary primate cannot tell which of its two
    outer modes is used (flipping that leaf's s swaps them), so only the
    running primate's side is enumerated there; on the first step both
    operands are fresh and one pairing covers all four.  At s = 0.5 a plan
    and its mirror image (every s -> 1 - s, 14 <-> 23, 13 <-> 24) cost the
    same, so only the lexicographically smaller of the two is kept.
    """
    m = chain.steps
    if method == FUSION:
        full = (PairingChoice.P14, PairingChoice.P13, PairingChoice.P23, PairingChoice.P24)
        leaf_only = (PairingChoice.P14, PairingChoice.P23)
        first = PairingChoice.P14
    else:
        full = (BleedPairing.PAIRS_14_23, BleedPairing.PAIRS_13_24)
        leaf_only = (BleedPairing.PAIRS_14_23,)
        first = BleedPairing.PAIRS_14_23
    if fixed:
        return [(first,) * m]
    if not reduce:
        return list(itertools.product(full, repeat=m))
    per_step = [leaf_only if chain.operand(k) == 0 else full for k in range(m)]
    if m:
        per_step[0] = (first,)
    out = list(itertools.product(*per_step))
    if method == FUSION and target_s == 0.5:
        def key(ps):
            return tuple(p.value for p in ps)

        def mirrored(ps):
            # the first step maps back onto itself once both leaves are flipped
            return ps[:1] + tuple(_MIRROR[p] for p in ps[1:])

        out = [ps for ps in out if key(ps) <= key(mirrored(ps))]
    return out


def _encode(chain: AdditionChain, pairings, method: str, target_s: float, fixed: bool) -> _Candidate | None:
    m = chain.steps
    nleaf = num_leaves(chain)
    operand = np.array([chain.operand(k) for k in range(m)], dtype=np.int64)
    mult = np.array([p.multiplicative for p in pairings], dtype=np.int64)
    if method == FUSION:
        left = [p.fused_weights for p in pairings]
        left_a = np.array([a for a, _ in left], dtype=np.int64)
        left_b = np.array([b for _, b in left], dtype=np.int64)
    else:
        left_a = np.zeros(m, dtype=np.int64)
        left_b = np.zeros(m, dtype=np.int64)
    leaf_of_step = np.full(m, -1, dtype=np.int64)
    leaf = 1
    for k in range(m):
        if operand[k] == 0:
            leaf_of_step[k] = leaf
            leaf += 1

    kinds = []
    step_param = np.full(m, -1, dtype=np.int64)
    step_fixed = np.zeros(m)
    for k in range(m):
        if method == FUSION or 0 < k < m - 1:
            step_param[k] = len(kinds)
            kinds.append("t" if method == FUSION else "c")
    if method == FUSION:
        final_param = len(kinds)
        kinds.append("t")
    else:
        final_param = -1

    leaf_param = np.full(nleaf, -1, dtype=np.int64)
    coef = leaf_coefficients(chain, pairings)
    target_logit = 0.0
    elim = -1
    if fixed:
        if abs(target_s - 0.5) > 1e-12:
            return None
    else:
        target_logit = _logit(target_s)
        nonzero = np.flatnonzero(coef)
        if nonzero.size == 0:
            if abs(target_logit) > 1e-12:
                return None
        else:
            # solve for the most heavily weighted leaf (first on ties)
            elim = int(nonzero[np.argmax(np.abs(coef[nonzero]))])
        for i in range(nleaf):
            if i != elim:
                leaf_param[i] = len(kinds)
                kinds.append("s")
    encoded = (
        _kernels.FUSION if method == FUSION else _kernels.BLEEDING,
        operand, mult, left_a, left_b, leaf_of_step, step_param, step_fixed,
        np.int64(final_param), 0.0, leaf_param, coef.astype(float), np.int64(elim),
        float(target_logit), np.int64(1 if fixed else 0),
    )
    return _Candidate(chain, tuple(pairings), encoded, len(kinds), tuple(kinds))


def _starts(cand: _Candidate, rng: np.random.Generator, count: int) -> np.ndarray:
    cols = []
    for kind in cand.kinds:
        if kind == "t":
            cols.append(rng.normal(0.0, 0.75, count))
        elif kind == "c":
            cols.append(rng.normal(-1.5, 1.5, count))
        else:
            cols.append(rng.normal(0.0, 1.0, count))
    if not cols:
        return np.zeros((count, 0))
    return np.column_stack(cols)


def _decode(cand: _Candidate, x: np.ndarray, method: str, target_s: float) -> GenerationPlan:
    enc = cand.encoded
    step_param, step_fixed, final_param = enc[6], enc[7], int(enc[8])
    logits = _kernels.leaf_logits(x, enc)
    leaf_s = tuple(float(_kernels.expit(v)) for v in logits)
    params = []
    for k in range(cand.chain.steps):
        v = float(_kernels.expit(x[step_param[k]])) if step_param[k] >= 0 else float(step_fixed[k])
        params.append(_clip(v, method))
    final = _clip(float(_kernels.expit(x[final_param])), method) if final_param >= 0 else 0.0
    return GenerationPlan(method, cand.chain, cand.pairings, tuple(params), final, leaf_s, target_s)


def _clip(v: float, method: str) -> float:
    if method == FUSION:
        return min(max(v, _kernels.T_MIN), 1.0 - _kernels.T_MIN)
    return min(v, _kernels.C_MAX)


def _better(nu: float, plan: GenerationPlan, best_nu: float, best_plan: GenerationPlan | None) -> bool:
    if best_plan is None:
        return True
    if nu < best_nu * (1.0 - TIE_RTOL):
        return True
    if nu > best_nu * (1.0 + TIE_RTOL):
        return False
    key = (len(plan.chain.terms), plan.serialized())
    best_key = (len(best_plan.chain.terms), best_plan.serialized())
    return key < best_key


def _configure_threads() -> None:
    value = os.environ.get(THREADS_ENV)
    if value:
        import numba

        numba.set_num_threads(max(1, min(int(value), numba.config.NUMBA_NUM_THREADS)))


def candidate_plans(num_qubits: int, target_s: float, method: str, config: OptimizerConfig):
    """Every (chain, pairing assignment) the search will optimize, in search order."""
    max_len = minimal_length(num_qubits) + config.chain_slack
    out = []
    for chain in enumerate_star_chains(num_qubits, max_len):
        for pairings in _pairing_options(chain, method, config.fixed_primates, target_s, config.symmetry_reduction):
            cand = _encode(chain, pairings, method, target_s, config.fixed_primates)
            if cand is not None:
                out.append(cand)
    return out


def optimize_plan(
    num_qubits: int,
    target_s: float,
    method: str,
    config: OptimizerConfig | None = None,
    trace: list | None = None,
) -> CostReport:
    """Cheapest plan over all star chains, pairings and continuous parameters.

    If ``trace`` is a list, the best cost found for every candidate is
    appended to it as ``(chain terms, pairings, nu)``.
    """
    config = config or OptimizerConfig()
    if num_qubits < 2:
        raise ValueError("need at least two qubits")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if not 0.0 < target_s < 1.0:
        raise ValueError("target s must lie strictly between 0 and 1 (s = 0, 1 are degenerate)")
    _configure_threads()
    candidates = candidate_plans(num_qubits, target_s, method, config)
    if not candidates:
        raise InfeasibleTarget(f"no plan reaches s={target_s} (fixed primates only give s=0.5)")

    best_nu, best_plan, best_cand = math.inf, None, None
    nfev_total = 0
    converged = 0
    runs = 0
    for index, cand in enumerate(candidates):
        rng = np.random.default_rng([config.seed, index])
        starts = _starts(cand, rng, config.restarts if cand.dim else 1)
        xs, fs, nfevs, convs = _kernels.multistart(
            starts, cand.encoded, config.step, config.xatol, config.fatol,
            config.max_evals, config.polish_rounds,
        )
        nfev_total += int(nfevs.sum())
        converged += int(convs.sum())
        runs += len(fs)
        k = int(np.argmin(fs))
        nu = float(fs[k])
        if trace is not None:
            trace.append((cand.chain.terms, tuple(p.value for p in cand.pairings), nu))
        if not math.isfinite(nu) or nu >= _kernels.BAD:
            continue
        if best_plan is not None and nu > best_nu * (1.0 + TIE_RTOL):
            continue
        plan = _decode(cand, xs[k], method, target_s)
        if _better(nu, plan, best_nu, best_plan):
            best_nu, best_plan, best_cand = nu, plan, cand
    if best_plan is None:
        raise InfeasibleTarget(f"no feasible plan for N={num_qubits}, s={target_s}")

    ev = trace_plan(best_plan)
    if abs(ev.final.s - target_s) > 1e-9:
        raise RuntimeError(f"plan reaches s={ev.final.s}, not {target_s}")
    if abs(ev.nu - best_nu) > 1e-9 * best_nu:
        raise RuntimeError(f"compiled cost {best_nu} disagrees with reference {ev.nu}")
    metadata = {
        "config": asdict(config),
        "restarts": config.restarts,
        "seed": config.seed,
        "candidates": len(candidates),
        "local_searches": runs,
        "evaluations": nfev_total,
        "converged_searches": converged,
        "converged": converged == runs,
        "max_chain_len": minimal_length(num_qubits) + config.chain_slack,
    }
    return CostReport(num_qubits, target_s, method, best_plan, ev.nu, ev.single_pass_prob, metadata)


def sweep(qubits, s_grid, method: str, config: OptimizerConfig | None = None) -> list[CostReport | Exception]:
    """Optimize every (N, s) point; a failing point yields its exception instead of a report."""
    qubits, s_grid = list(qubits), list(s_grid)
    if not qubits or not s_grid:
        raise ValueError("sweep grids must be non-empty")
    out = []
    for n in qubits:
        for s in s_grid:
            try:
                out.append(optimize_plan(n, s, method, config))
            except (ValueError, RuntimeError) as exc:
                exc.point = (n, s)
                out.append(exc)
    return out
