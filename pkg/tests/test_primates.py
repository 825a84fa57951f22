import math

import numpy as np
import pytest

from ghzprimate import oracle
from ghzprimate.primates import (
    InfeasibleTarget,
    PairingChoice,
    PrimateParams,
    elementary_cost,
    elementary_primate,
    elementary_success_prob,
    final_fusion,
    fuse,
    fusion_probability,
    merge_s,
    s_chain_solve,
)


def _recycling_cost(s, trials, rng):
    """Photons per elementary primate by direct simulation of repeated attempts."""
    p = elementary_success_prob(s)
    s = max(s, 1 - s)
    q = math.sqrt((1 - s) / s)
    r = q * (1 - q)
    attempts = rng.geometric(p, trials)
    recycled = rng.binomial(attempts, r)
    return float(np.mean(2 * attempts - recycled))


def test_elementary_cost_values():
    assert elementary_cost(0.5) == 2.0
    assert elementary_cost(1.0) == 4.0
    assert elementary_cost(0.0) == 4.0
    rng = np.random.default_rng(0)
    mc = _recycling_cost(0.75, 10**6, rng)
    assert mc == pytest.approx(elementary_cost(0.75), rel=0.01)


def test_elementary_cost_symmetric():
    for s in np.linspace(0, 1, 41):
        assert elementary_cost(s) == pytest.approx(elementary_cost(1 - s), abs=1e-15)


def test_elementary_cost_rejects_bad_s():
    with pytest.raises(ValueError):
        elementary_cost(1.2)


def test_elementary_success_prob():
    assert elementary_success_prob(0.5) == 1.0
    assert elementary_success_prob(1.0) == 0.5
    assert elementary_success_prob(0.25) == pytest.approx(2 / 3)


def test_fuse_balanced_example():
    a = elementary_primate(0.5)
    res = fuse(a, a, PairingChoice.P14, 0.5)
    assert res.p_success == pytest.approx(0.3125)
    assert res.merged.lam == pytest.approx(0.8)
    assert res.merged.s == pytest.approx(0.5)
    assert res.merged.nu == pytest.approx(12.8)
    assert res.merged.n == 2

    sim = oracle.simulate_fusion(1, 1.0, 0.5, 1, 1.0, 0.5, PairingChoice.P14, 0.5)
    assert sim.p_success == pytest.approx(0.3125, abs=1e-12)
    assert sim.lam == pytest.approx(0.8, abs=1e-12)


def test_fuse_vanishes_at_extreme_t():
    a = PrimateParams(2, 0.7, 0.3, 10.0)
    b = PrimateParams(1, 1.0, 0.6, 2.5)
    for pairing in PairingChoice:
        assert fusion_probability(a, b, pairing, 1e-9) < 1e-8
        assert fusion_probability(a, b, pairing, 1 - 1e-9) < 1e-8
    for t in (0.0, 1.0):
        with pytest.raises(ValueError):
            fuse(a, b, PairingChoice.P14, t)


def test_s_rule_depends_only_on_pairing_class():
    rng = np.random.default_rng(1)
    for _ in range(50):
        lam1, lam2, s1, s2, t = rng.uniform(0.05, 0.95, 5)
        a = PrimateParams(2, lam1, s1, 1.0)
        b = PrimateParams(3, lam2, s2, 1.0)
        r = {p: fuse(a, b, p, t).merged.s for p in PairingChoice}
        assert r[PairingChoice.P14] == r[PairingChoice.P23]
        assert r[PairingChoice.P13] == r[PairingChoice.P24]


def test_probability_bounds():
    rng = np.random.default_rng(2)
    for _ in range(2000):
        lam1, lam2, s1, s2, t = rng.uniform(0, 1, 5)
        t = min(max(t, 1e-6), 1 - 1e-6)
        for pairing in PairingChoice:
            a = PrimateParams(2, lam1, s1, 1.0)
            b = PrimateParams(2, lam2, s2, 1.0)
            p = fusion_probability(a, b, pairing, t)
            assert 0.0 <= p <= 1.0
            if p > 0 and 0 < s1 < 1 and 0 < s2 < 1:
                assert 0.0 <= fuse(a, b, pairing, t).merged.lam <= 1.0


def test_cost_falls_as_probability_rises():
    a = PrimateParams(2, 0.8, 0.5, 12.8)
    b = elementary_primate(0.5)
    results = sorted((fuse(a, b, PairingChoice.P14, t) for t in np.linspace(0.05, 0.5, 10)),
                     key=lambda r: r.p_success)
    nus = [r.merged.nu for r in results]
    assert all(x > y for x, y in zip(nus, nus[1:]))


def test_final_fusion():
    assert final_fusion(PrimateParams(3, 1.0, 0.4, 1.0), 0.5) == (0.5, 0.4)
    assert final_fusion(PrimateParams(3, 0.8, 0.4, 1.0), 0.5)[0] == pytest.approx(0.4)
    grid = np.linspace(0.01, 0.99, 99)
    for lam in (0.1, 0.5, 1.0):
        probs = [final_fusion(PrimateParams(2, lam, 0.5, 1.0), t)[0] for t in grid]
        assert grid[int(np.argmax(probs))] == pytest.approx(0.5)
        assert max(probs) == pytest.approx(lam / 2)


def test_merge_s():
    assert merge_s(0.5, 0.5, True) == (0.5, 0.5)
    assert merge_s(0.7, 0.7, False)[0] == pytest.approx(0.5)
    with pytest.raises(InfeasibleTarget):
        merge_s(1.0, 0.0, True)


def test_s_chain_solve():
    assert s_chain_solve(0.5, [PairingChoice.P14], [0.5, None])[1] == pytest.approx(0.5)
    assert s_chain_solve(0.5, [PairingChoice.P14], [0.8, None])[1] == pytest.approx(0.2)
    # the solved value reproduces the target through the chain
    pairings = [PairingChoice.P13, PairingChoice.P23, PairingChoice.P24]
    solved = s_chain_solve(0.37, pairings, [0.6, 0.2, None, 0.9])
    s = solved[0]
    for p, sb in zip(pairings, solved[1:]):
        s = merge_s(s, sb, p.multiplicative)[0]
    assert s == pytest.approx(0.37, abs=1e-12)


def test_s_chain_solve_errors():
    with pytest.raises(InfeasibleTarget):
        s_chain_solve(1.0, [PairingChoice.P14], [0.3, None])
    with pytest.raises(ValueError):
        s_chain_solve(0.5, [PairingChoice.P14], [None, None])


@pytest.mark.parametrize("pairing", list(PairingChoice))
def test_fuse_matches_fock_oracle(pairing):
    rng = np.random.default_rng(3)
    for _ in range(10):
        n2 = int(rng.integers(1, 3))
        lam2 = 1.0 if n2 == 1 else float(rng.uniform(0.1, 1))
        s1, s2, t = rng.uniform(0.05, 0.95, 3)
        sim = oracle.simulate_fusion(1, 1.0, s1, n2, lam2, s2, pairing, t)
        ana = fuse(PrimateParams(1, 1.0, s1, 2.0), PrimateParams(n2, lam2, s2, 2.0), pairing, t)
        assert sim.p_success == pytest.approx(ana.p_success, abs=1e-9)
        assert sim.s == pytest.approx(ana.merged.s, abs=1e-9)
        assert sim.lam == pytest.approx(ana.merged.lam, abs=1e-9)
        assert sim.correction_fidelity == pytest.approx(1.0, abs=1e-9)


def test_params_validation():
    with pytest.raises(ValueError):
        PrimateParams(0, 1.0, 0.5, 2.0)
    with pytest.raises(ValueError):
        PrimateParams(1, 1.5, 0.5, 2.0)
    with pytest.raises(ValueError):
        PrimateParams(1, 1.0, 0.5, 0.0)
