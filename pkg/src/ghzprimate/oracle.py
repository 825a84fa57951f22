"""Brute-force Fock-space simulations that the closed forms are checked against.

Everything here builds explicit states, runs the optical circuit with
ancilla modes and detectors, post-selects on heralds and reads off the
primate parameters.  It is slow and exact.

Modes of a primate are laid out as ``[left, internal..., right]`` with the
useful component ``sqrt(s)|2,0,1,...,0,1,0> + sqrt(1-s)|0,1,0,...,1,0,2>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import (
    FockState,
    _primate_pattern,
    apply_phase,
    beamsplitter,
    build_ghz,
    build_primate,
    default_junk,
    embed,
    evolve,
    fidelity,
    project_count,
)
from .primates import PairingChoice

SUCCESS_CLICKS = ((1, 0), (0, 1))


def fusion_unit(state: FockState, i: int, j: int, t: float, clicks: tuple[int, int]) -> FockState:
    """Run the fusion unit on modes ``i``, ``j`` and post-select detector counts ``clicks``.

    Each fused mode leaks into its own ancilla through a beamsplitter of
    transmittance ``t``; the two ancillas meet on a balanced beamsplitter
    and are detected.  Modes ``i`` and ``j`` stay in the output.
    """
    m = state.num_modes
    work = state.tensor(FockState.vacuum(2))
    anc_i, anc_j = m, m + 1
    u = embed(beamsplitter(0.5), [anc_i, anc_j], m + 2)
    u = u @ embed(beamsplitter(t), [j, anc_j], m + 2) @ embed(beamsplitter(t), [i, anc_i], m + 2)
    out = evolve(work, u)
    out = project_count(out, anc_j, clicks[1])
    return project_count(out, anc_i, clicks[0])


def fused_order(n1: int, n2: int, pairing: PairingChoice) -> list[int]:
    """Mode order of the merged primate (old mode index for each new position).

    The two fused modes end up side by side as an internal dual-rail pair;
    the unfused outer modes become the new outer modes.
    """
    a = list(range(2 * n1))
    b = list(range(2 * n1, 2 * n1 + 2 * n2))
    pairing = PairingChoice(pairing)
    if pairing is PairingChoice.P23:
        return a + b
    if pairing is PairingChoice.P14:
        return b + a
    if pairing is PairingChoice.P13:
        return b[::-1] + a
    return a + b[::-1]


def fused_modes(n1: int, n2: int, pairing: PairingChoice) -> tuple[int, int]:
    """``(i, j)``: the fused mode of the first and of the second primate."""
    left_a, left_b = PairingChoice(pairing).fused_weights
    i = 0 if left_a else 2 * n1 - 1
    j = 2 * n1 if left_b else 2 * n1 + 2 * n2 - 1
    return i, j


@dataclass(frozen=True)
class OracleFusion:
    p_success: float
    s: float
    lam: float
    state: FockState  # corrected, normalized output of the (1, 0) herald
    correction_fidelity: float  # between the corrected (1, 0) and (0, 1) outputs


def primate_parameters(state: FockState, n: int) -> tuple[float, float]:
    """``(lam, s)`` read off a normalized 2n-mode primate."""
    wl = abs(state.amplitude(_primate_pattern(n, True))) ** 2
    wr = abs(state.amplitude(_primate_pattern(n, False))) ** 2
    lam = (wl + wr) / state.norm2()
    return lam, (wl / (wl + wr) if wl + wr > 0.0 else 0.5)


def simulate_fusion(
    n1: int, lam1: float, s1: float, n2: int, lam2: float, s2: float, pairing: PairingChoice, t: float
) -> OracleFusion:
    a = build_primate(n1, lam1, s1, default_junk(n1))
    b = build_primate(n2, lam2, s2, default_junk(n2))
    joint = a.tensor(b)
    i, j = fused_modes(n1, n2, pairing)
    order = fused_order(n1, n2, pairing)
    outs = []
    p = 0.0
    for clicks in SUCCESS_CLICKS:
        out = fusion_unit(joint, i, j, t, clicks)
        p += out.norm2()
        if clicks == (0, 1):
            out = apply_phase(out, j, math.pi)
        outs.append(out.permuted(order))
    lam, s = primate_parameters(outs[0].normalized(), n1 + n2)
    return OracleFusion(p, s, lam, outs[0].normalized(), fidelity(outs[0], outs[1]))


def final_unit(state: FockState, t: float, clicks: tuple[int, int]) -> FockState:
    """Fuse the two outer modes of a primate, correct the herald, return the dual-rail state."""
    m = state.num_modes
    out = fusion_unit(state, 0, m - 1, t, clicks)
    if clicks == (0, 1):
        out = apply_phase(out, m - 1, math.pi)
    return out


def fusion_pipeline(steps, leaf_s, t_steps, t_final, clicks=None):
    """Simulate a whole fusion plan on explicit states.

    ``steps`` is a list of ``(operand_index, pairing)`` as in a star chain
    (operand 0 means a fresh elementary primate).  Every fusion is
    post-selected on ``clicks`` (default: alternate the two heralds) and
    corrected.  Returns ``(ghz_state, single_pass_prob, correction_fidelity)``.
    """
    leaves = iter(leaf_s)
    terms = [build_primate(1, 1.0, next(leaves))]
    sizes = [1]
    prob = 1.0
    for k, ((operand, pairing), t) in enumerate(zip(steps, t_steps)):
        if operand == 0:
            b, nb = build_primate(1, 1.0, next(leaves)), 1
        else:
            b, nb = terms[operand], sizes[operand]
        a, na = terms[-1], sizes[-1]
        joint = a.tensor(b)
        i, j = fused_modes(na, nb, pairing)
        total = 0.0
        kept = None
        for c in SUCCESS_CLICKS:
            out = fusion_unit(joint, i, j, t, c)
            total += out.norm2()
            pick = clicks[k] if clicks else SUCCESS_CLICKS[k % 2]
            if c == pick:
                kept = apply_phase(out, j, math.pi) if c == (0, 1) else out
        prob *= total
        terms.append(kept.permuted(fused_order(na, nb, pairing)).normalized())
        sizes.append(na + nb)
    total = 0.0
    outs = []
    for c in SUCCESS_CLICKS:
        out = final_unit(terms[-1], t_final, c)
        total += out.norm2()
        outs.append(out)
    prob *= total
    # pairs (0, 1), (2, 3), ... of the output are already the dual-rail qubits
    return outs[0].normalized(), prob, fidelity(outs[0], outs[1])


def ghz_fidelity(state: FockState, s: float) -> float:
    n = state.num_modes // 2
    return fidelity(state, build_ghz(n, s))


# ---------------------------------------------------------------- bleeding


@dataclass(frozen=True)
class OracleBleed:
    p_success: float
    s: float
    lam: float


def _bleed_step(state: FockState, pairs, t: float, clicks):
    """One bleeding step on both mode pairs; ``clicks`` per pair, ``(0, 0)`` for silence."""
    out = state
    for (i, j), c in zip(pairs, clicks):
        out = fusion_unit(out, i, j, t, c)
    return out


def simulate_bleed(
    n1: int, lam1: float, s1: float, n2: int, lam2: float, s2: float,
    multiplicative: bool, transmittances,
) -> OracleBleed:
    """Trajectory-averaged bleeding of two primates on both mode pairs.

    At every step both pairs are weakly fused at once.  A single click in
    total ends the attempt successfully; more than one photon detected ends
    it as a failure.  The useful weight is averaged over stopping steps
    (mixed-state semantics), and ``s`` is read from the useful weights.
    """
    a = build_primate(n1, lam1, s1, default_junk(n1))
    b = build_primate(n2, lam2, s2, default_junk(n2))
    state = a.tensor(b)
    ra, rb = 2 * n1 - 1, 2 * n1 + 2 * n2 - 1
    la, lb = 0, 2 * n1
    if multiplicative:
        pairs = ((la, rb), (ra, lb))
        orders = {0: fused_order(n1, n2, PairingChoice.P14), 1: fused_order(n1, n2, PairingChoice.P23)}
    else:
        pairs = ((la, lb), (ra, rb))
        orders = {0: fused_order(n1, n2, PairingChoice.P13), 1: fused_order(n1, n2, PairingChoice.P24)}
    n = n1 + n2
    p = 0.0
    w_left = 0.0
    w_right = 0.0
    silent = state
    for t in transmittances:
        for which in (0, 1):
            for c in SUCCESS_CLICKS:
                clicks = [(0, 0), (0, 0)]
                clicks[which] = c
                out = _bleed_step(silent, pairs, t, clicks)
                prob = out.norm2()
                if prob == 0.0:
                    continue
                p += prob
                _, j = pairs[which]
                if c == (0, 1):
                    out = apply_phase(out, j, math.pi)
                out = out.permuted(orders[which])
                w_left += abs(out.amplitude(_primate_pattern(n, True))) ** 2
                w_right += abs(out.amplitude(_primate_pattern(n, False))) ** 2
        silent = _bleed_step(silent, pairs, t, [(0, 0), (0, 0)])
    lam = (w_left + w_right) / p if p > 0.0 else 0.0
    s = w_left / (w_left + w_right) if w_left + w_right > 0.0 else 0.5
    return OracleBleed(p, s, lam)


def simulate_bleed_final(lam: float, s: float, n: int, transmittances) -> float:
    """Success probability of single-pair bleeding on the two outer modes of a primate."""
    state = build_primate(n, lam, s, default_junk(n))
    m = state.num_modes
    p = 0.0
    silent = state
    for t in transmittances:
        for c in SUCCESS_CLICKS:
            p += fusion_unit(silent, 0, m - 1, t, c).norm2()
        silent = fusion_unit(silent, 0, m - 1, t, (0, 0))
    return p


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
