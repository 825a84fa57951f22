import math

import numpy as np
import pytest

from ghzprimate import oracle
from ghzprimate.fock import (
    FockState,
    FusionOutcome,
    apply_phase,
    backpropagated_count,
    beamsplitter,
    build_ghz,
    build_primate,
    default_junk,
    embed,
    evolve,
    fidelity,
    fusion_measure,
    phase_shifter,
    project_count,
)


def test_beamsplitter_limits():
    assert np.allclose(beamsplitter(1.0), [[1, 0], [0, -1]])
    assert np.allclose(beamsplitter(0.0), [[0, 1], [1, 0]])
    half = beamsplitter(0.5)
    r = 1 / math.sqrt(2)
    assert np.allclose(half, [[r, r], [r, -r]])


@pytest.mark.parametrize("t", [-0.1, 1.5])
def test_beamsplitter_rejects_bad_t(t):
    with pytest.raises(ValueError):
        beamsplitter(t)


def test_phase_shifter():
    assert np.allclose(phase_shifter(0.0), np.eye(2))
    assert np.allclose(phase_shifter(math.pi), np.diag([-1, 1]))
    assert np.allclose(phase_shifter(math.pi / 2), np.diag([1j, 1]))


def test_embed():
    assert np.allclose(embed(np.eye(2), [0, 1], 4), np.eye(4))
    out = evolve(FockState.basis((1, 0, 0, 0)), embed(beamsplitter(0.5), [0, 3], 4))
    r = 1 / math.sqrt(2)
    assert out.amplitude((1, 0, 0, 0)) == pytest.approx(r)
    assert out.amplitude((0, 0, 0, 1)) == pytest.approx(r)
    swapped = evolve(FockState.basis((0, 1, 0)), embed(beamsplitter(0.0), [1, 2], 3))
    assert swapped.amplitude((0, 0, 1)) == pytest.approx(1.0)


@pytest.mark.parametrize("modes", [[0, 0], [0, 4]])
def test_embed_rejects_bad_modes(modes):
    with pytest.raises(ValueError):
        embed(np.eye(2), modes, 4)


def test_hong_ou_mandel():
    out = evolve(FockState.basis((1, 1)), beamsplitter(0.5))
    assert out.amplitude((1, 1)) == pytest.approx(0.0, abs=1e-12)
    assert abs(out.amplitude((2, 0))) == pytest.approx(1 / math.sqrt(2))
    assert abs(out.amplitude((0, 2))) == pytest.approx(1 / math.sqrt(2))


def test_vacuum_is_invariant():
    u = oracle.random_unitary(3, np.random.default_rng(0))
    assert evolve(FockState.vacuum(3), u).amplitude((0, 0, 0)) == pytest.approx(1.0)


def test_two_photons_on_beamsplitter():
    t = 0.7
    out = evolve(FockState.basis((2, 0)), beamsplitter(t))
    assert out.amplitude((2, 0)) == pytest.approx(t)
    assert out.amplitude((1, 1)) == pytest.approx(math.sqrt(2 * t * (1 - t)))
    assert out.amplitude((0, 2)) == pytest.approx(1 - t)


def test_evolve_dimension_mismatch():
    with pytest.raises(ValueError):
        evolve(FockState.basis((1, 0)), np.eye(3))


def test_evolve_preserves_norm_and_photon_number():
    rng = np.random.default_rng(1)
    for _ in range(30):
        modes = int(rng.integers(2, 9))
        photons = int(rng.integers(1, 7))
        terms = []
        for _ in range(3):
            occ = np.bincount(rng.integers(0, modes, photons), minlength=modes)
            terms.append((complex(rng.normal(), rng.normal()), occ))
        state = FockState.superposition(terms)
        u = oracle.random_unitary(modes, rng) @ oracle.random_unitary(modes, rng)
        out = evolve(state, u)
        assert out.norm2() == pytest.approx(1.0, abs=1e-10)
        assert out.photon_numbers() == {photons}


def test_project_count():
    noon = FockState.superposition([(1, (2, 0)), (1, (0, 2))])
    out = project_count(noon, 1, 0)
    assert out.num_modes == 1
    assert out.norm2() == pytest.approx(0.5)
    assert abs(out.amplitude((2,))) ** 2 == pytest.approx(0.5)
    assert project_count(FockState.vacuum(2), 0, 0).norm2() == pytest.approx(1.0)
    assert project_count(FockState.basis((1,)), 0, 2).is_zero()


def test_project_count_removes_detected_photons():
    rng = np.random.default_rng(2)
    state = evolve(FockState.basis((2, 1, 1)), oracle.random_unitary(3, rng))
    for k in range(5):
        out = project_count(state, 1, k)
        if not out.is_zero():
            assert out.photon_numbers() == {4 - k}


def test_fusion_measure_examples():
    assert fusion_measure(FockState.vacuum(2), 0, 1, 0.3, "vac").norm2() == pytest.approx(1.0)
    # t^N acts after the photon is removed, so a lone photon gives (1 - t) / 2
    out = fusion_measure(FockState.basis((1, 0)), 0, 1, 0.5, FusionOutcome.ONE_10)
    assert out.norm2() == pytest.approx(0.25)
    circuit = oracle.fusion_unit(FockState.basis((1, 0)), 0, 1, 0.5, (1, 0))
    assert circuit.norm2() == pytest.approx(0.25)


def test_fusion_measure_rejects_same_mode():
    with pytest.raises(ValueError):
        fusion_measure(FockState.basis((1, 0)), 0, 0, 0.5, "vac")


def _random_two_photon_state(rng, modes=4):
    terms = []
    for _ in range(4):
        occ = np.bincount(rng.integers(0, modes, 2), minlength=modes)
        terms.append((complex(rng.normal(), rng.normal()), occ))
    return FockState.superposition(terms)


def test_fusion_operators_match_circuit():
    rng = np.random.default_rng(3)
    pairs = {FusionOutcome.VAC: (0, 0), FusionOutcome.ONE_10: (1, 0), FusionOutcome.ONE_01: (0, 1)}
    for _ in range(50):
        state = _random_two_photon_state(rng)
        t = float(rng.uniform(0.05, 0.95))
        for outcome, clicks in pairs.items():
            direct = fusion_measure(state, 0, 2, t, outcome)
            circuit = oracle.fusion_unit(state, 0, 2, t, clicks)
            gap = direct + circuit.scaled(-1.0)
            assert gap.norm2() < 1e-20


def test_measurement_completeness():
    rng = np.random.default_rng(4)
    for _ in range(20):
        state = _random_two_photon_state(rng)
        t = float(rng.uniform(0.05, 0.95))
        total = sum(oracle.fusion_unit(state, 1, 3, t, c).norm2()
                    for c in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])
        assert total == pytest.approx(1.0, abs=1e-10)


def test_backpropagation_identity():
    rng = np.random.default_rng(5)
    for _ in range(50):
        state = _random_two_photon_state(rng)
        u = oracle.random_unitary(4, rng)
        for k in range(3):
            direct = project_count(evolve(state, u), 2, k)
            back = backpropagated_count(state, u, 2, k)
            assert (direct + back.scaled(-1.0)).norm2() < 1e-20


def test_apply_phase_flips_sign():
    state = FockState.superposition([(1, (1, 0)), (1, (0, 1))])
    out = apply_phase(state, 1, math.pi)
    assert out.amplitude((0, 1)) == pytest.approx(-1 / math.sqrt(2))


def test_build_primate():
    p = build_primate(1, 1.0, 0.3)
    assert p.amplitude((2, 0)) == pytest.approx(math.sqrt(0.3))
    assert p.amplitude((0, 2)) == pytest.approx(math.sqrt(0.7))
    balanced = build_primate(1, 1.0, 0.5)
    assert fidelity(balanced, FockState.superposition([(1, (2, 0)), (1, (0, 2))])) == pytest.approx(1.0)

    two = build_primate(2, 0.5, 0.3, default_junk(2))
    assert two.norm2() == pytest.approx(1.0)
    useful = abs(two.amplitude((2, 0, 1, 0))) ** 2 + abs(two.amplitude((0, 1, 0, 2))) ** 2
    assert useful == pytest.approx(0.5)


def test_build_primate_rejects_bad_junk():
    with pytest.raises(ValueError):
        build_primate(2, 0.5, 0.3, FockState.basis((1, 1)))  # two photons, needs three
    with pytest.raises(ValueError):
        build_primate(2, 0.5, 0.3, FockState.basis((3, 0, 0)))  # wrong mode count
    with pytest.raises(ValueError):
        build_primate(1, 0.5, 0.3)


def test_build_ghz():
    assert build_ghz(1, 1.0).amplitude((1, 0)) == pytest.approx(1.0)
    bell = build_ghz(2, 0.5)
    assert bell.amplitude((1, 0, 1, 0)) == pytest.approx(1 / math.sqrt(2))
    assert bell.amplitude((0, 1, 0, 1)) == pytest.approx(1 / math.sqrt(2))
    rng = np.random.default_rng(6)
    for _ in range(10):
        assert build_ghz(int(rng.integers(1, 6)), float(rng.random())).norm2() == pytest.approx(1.0)


def test_fidelity():
    x = build_ghz(2, 0.3)
    assert fidelity(x, x) == pytest.approx(1.0)
    assert fidelity(x, x.scaled(2j)) == pytest.approx(1.0)
    assert fidelity(FockState.basis((1, 0)), FockState.basis((0, 1))) == 0.0
    with pytest.raises(ValueError):
        fidelity(FockState(2), x)


def test_states_are_immutable_and_pruned():
    state = FockState(2, {(1, 0): 1.0, (0, 1): 1e-14})
    assert len(state) == 1
    with pytest.raises(TypeError):
        state.amplitudes[(0, 1)] = 1.0
