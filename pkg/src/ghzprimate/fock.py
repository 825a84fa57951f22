"""Sparse Fock-space simulation of linear-optical circuits.

States are sparse maps from occupation vectors to complex amplitudes.  Linear
optics acts on creation operators, ``a_i^dag -> sum_j U[j, i] a_j^dag``, so a
basis state is evolved by expanding the product of the transformed creation
operators as a polynomial and converting each monomial back to a normalized
Fock vector.  Everything here is exact up to double-precision rounding and is
used as ground truth for the closed-form cost formulas elsewhere in the
package.
"""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from types import MappingProxyType

import numpy as np

PRUNE_THRESHOLD = 1e-12
UNITARY_TOL = 1e-10

OccupationVector = tuple[int, ...]


class FockState:
    """Immutable sparse pure state over ``num_modes`` bosonic modes.

    Amplitudes below :data:`PRUNE_THRESHOLD` in magnitude are dropped on
    construction.  The state need not be normalized: after a projection its
    squared norm is the probability of the measured outcome.
    """

    __slots__ = ("_num_modes", "_amps")

    def __init__(self, num_modes: int, amplitudes: Mapping[Sequence[int], complex] | None = None):
        if num_modes < 0:
            raise ValueError("num_modes must be non-negative")
        amps: dict[OccupationVector, complex] = {}
        for occ, amp in (amplitudes or {}).items():
            occ = tuple(int(k) for k in occ)
            if len(occ) != num_modes:
                raise ValueError(f"occupation {occ} does not have {num_modes} modes")
            if any(k < 0 for k in occ):
                raise ValueError(f"negative photon count in {occ}")
            amp = complex(amp)
            if abs(amp) >= PRUNE_THRESHOLD:
                amps[occ] = amps.get(occ, 0j) + amp
        self._num_modes = num_modes
        self._amps = MappingProxyType(
            {occ: a for occ, a in sorted(amps.items()) if abs(a) >= PRUNE_THRESHOLD}
        )

    @classmethod
    def basis(cls, occupation: Sequence[int]) -> FockState:
        return cls(len(occupation), {tuple(occupation): 1.0})

    @classmethod
    def vacuum(cls, num_modes: int) -> FockState:
        return cls.basis((0,) * num_modes)

    @classmethod
    def superposition(cls, terms: Iterable[tuple[complex, Sequence[int]]], normalize: bool = True) -> FockState:
        """Build ``sum_k c_k |occ_k>`` from ``(c_k, occ_k)`` pairs."""
        terms = list(terms)
        if not terms:
            raise ValueError("empty superposition")
        num_modes = len(terms[0][1])
        acc: dict[OccupationVector, complex] = defaultdict(complex)
        for c, occ in terms:
            acc[tuple(occ)] += c
        state = cls(num_modes, acc)
        return state.normalized() if normalize else state

    @property
    def num_modes(self) -> int:
        return self._num_modes

    @property
    def amplitudes(self) -> Mapping[OccupationVector, complex]:
        return self._amps

    def items(self):
        return self._amps.items()

    def amplitude(self, occupation: Sequence[int]) -> complex:
        return self._amps.get(tuple(occupation), 0j)

    def norm2(self) -> float:
        return float(sum(abs(a) ** 2 for a in self._amps.values()))

    def is_zero(self) -> bool:
        return not self._amps

    def photon_numbers(self) -> set[int]:
        return {sum(occ) for occ in self._amps}

    def normalized(self) -> FockState:
        n2 = self.norm2()
        if n2 == 0.0:
            raise ValueError("cannot normalize the zero state")
        return self.scaled(1.0 / math.sqrt(n2))

    def scaled(self, factor: complex) -> FockState:
        return FockState(self._num_modes, {occ: factor * a for occ, a in self._amps.items()})

    def permuted(self, order: Sequence[int]) -> FockState:
        """Reorder modes so that new mode ``k`` is old mode ``order[k]``."""
        if sorted(order) != list(range(self._num_modes)):
            raise ValueError("order must be a permutation of the modes")
        return FockState(
            self._num_modes, {tuple(occ[i] for i in order): a for occ, a in self._amps.items()}
        )

    def tensor(self, other: FockState) -> FockState:
        return FockState(
            self._num_modes + other._num_modes,
            {o1 + o2: a1 * a2 for o1, a1 in self._amps.items() for o2, a2 in other._amps.items()},
        )

    def inner(self, other: FockState) -> complex:
        """``<self|other>``."""
        if other._num_modes != self._num_modes:
            raise ValueError("mode count mismatch")
        return sum((a.conjugate() * other._amps.get(occ, 0j) for occ, a in self._amps.items()), 0j)

    def __add__(self, other: FockState) -> FockState:
        if other._num_modes != self._num_modes:
            raise ValueError("mode count mismatch")
        acc = dict(self._amps)
        for occ, a in other._amps.items():
            acc[occ] = acc.get(occ, 0j) + a
        return FockState(self._num_modes, acc)

    def __len__(self) -> int:
        return len(self._amps)

    def __repr__(self) -> str:
        terms = " + ".join(f"({a:.4g})|{','.join(map(str, occ))}>" for occ, a in self._amps.items())
        return f"FockState[{self._num_modes}]({terms or '0'})"


def _check_unitary(u: np.ndarray) -> None:
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("mode unitary must be square")
    if not np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=UNITARY_TOL, rtol=0.0):
        raise ValueError("matrix is not unitary")


def beamsplitter(t: float) -> np.ndarray:
    """2x2 beamsplitter with (intensity) transmittance ``t``."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"transmittance must lie in [0, 1], got {t}")
    a, b = math.sqrt(t), math.sqrt(1.0 - t)
    return np.array([[a, b], [b, -a]], dtype=complex)


def phase_shifter(phi: float) -> np.ndarray:
    """Phase ``exp(i phi)`` on the first of two modes."""
    return np.array([[np.exp(1j * phi), 0.0], [0.0, 1.0]], dtype=complex)


def embed(u: np.ndarray, modes: Sequence[int], num_modes: int) -> np.ndarray:
    """Act with ``u`` on ``modes`` (in order) and trivially on the rest."""
    u = np.asarray(u, dtype=complex)
    modes = list(modes)
    if len(set(modes)) != len(modes):
        raise ValueError(f"duplicate mode indices {modes}")
    if any(not 0 <= m < num_modes for m in modes):
        raise ValueError(f"mode indices {modes} out of range for {num_modes} modes")
    if u.shape != (len(modes), len(modes)):
        raise ValueError("unitary dimension does not match number of modes")
    full = np.eye(num_modes, dtype=complex)
    full[np.ix_(modes, modes)] = u
    return full


def evolve(state: FockState, u: np.ndarray) -> FockState:
    u = np.asarray(u, dtype=complex)
    _check_unitary(u)
    m = state.num_modes
    if u.shape[0] != m:
        raise ValueError(f"unitary acts on {u.shape[0]} modes, state has {m}")
    columns = [[(j, u[j, i]) for j in range(m) if abs(u[j, i]) > 0.0] for i in range(m)]
    out: dict[OccupationVector, complex] = defaultdict(complex)
    for occ, amp in state.items():
        norm = math.sqrt(math.prod(math.factorial(k) for k in occ))
        poly: dict[OccupationVector, complex] = {(0,) * m: amp / norm}
        for i, k in enumerate(occ):
            for _ in range(k):
                nxt: dict[OccupationVector, complex] = defaultdict(complex)
                for mono, c in poly.items():
                    for j, uji in columns[i]:
                        lifted = list(mono)
                        lifted[j] += 1
                        nxt[tuple(lifted)] += c * uji
                poly = nxt
        for mono, c in poly.items():
            out[mono] += c * math.sqrt(math.prod(math.factorial(k) for k in mono))
    return FockState(m, out)


def project_count(state: FockState, mode: int, k: int) -> FockState:
    """Destructively detect ``k`` photons in ``mode``; the mode is removed."""
    if not 0 <= mode < state.num_modes:
        raise ValueError(f"mode {mode} out of range")
    if k < 0:
        raise ValueError("photon count must be non-negative")
    return FockState(
        state.num_modes - 1,
        {occ[:mode] + occ[mode + 1 :]: a for occ, a in state.items() if occ[mode] == k},
    )


def annihilate(state: FockState, coefficients: Mapping[int, complex]) -> FockState:
    """Apply ``sum_j c_j a_j`` to ``state``."""
    acc: dict[OccupationVector, complex] = defaultdict(complex)
    for occ, amp in state.items():
        for j, c in coefficients.items():
            if occ[j] > 0:
                lowered = list(occ)
                lowered[j] -= 1
                acc[tuple(lowered)] += c * math.sqrt(occ[j]) * amp
    return FockState(state.num_modes, acc)


def backpropagated_count(state: FockState, u: np.ndarray, mode: int, k: int) -> FockState:
    """``<k|_mode U|state>`` computed by moving the detection before ``U``.

    Uses ``U^dag a_mode U = sum_j U[mode, j] a_j`` on the input side, then
    evolves and keeps the vacuum component of ``mode``.
    """
    u = np.asarray(u, dtype=complex)
    lowered = state
    coeffs = {j: u[mode, j] for j in range(state.num_modes) if abs(u[mode, j]) > 0.0}
    for _ in range(k):
        lowered = annihilate(lowered, coeffs)
    lowered = lowered.scaled(1.0 / math.sqrt(math.factorial(k)))
    return project_count(evolve(lowered, u), mode, 0)


def apply_phase(state: FockState, mode: int, phi: float) -> FockState:
    """Phase shifter ``exp(i phi)`` on a single mode."""
    return evolve(state, embed(np.array([[np.exp(1j * phi)]]), [mode], state.num_modes))


class FusionOutcome(enum.Enum):
    VAC = "vac"
    ONE_10 = "one_10"
    ONE_01 = "one_01"


def fusion_measure(state: FockState, i: int, j: int, t: float, outcome: FusionOutcome | str) -> FockState:
    """Apply the fusion-unit measurement operator on modes ``i`` and ``j``.

    The vacuum outcome attenuates every photon in ``i``/``j`` by ``sqrt(t)``.
    A single click removes one photon via ``(a_i +/- a_j) sqrt((1-t)/2)`` and
    attenuates the photons that remain.  Modes are kept; the squared norm of
    the result is the outcome probability.
    """
    if i == j:
        raise ValueError("fusion needs two distinct modes")
    outcome = FusionOutcome(outcome)
    if outcome is FusionOutcome.VAC:
        lowered = state
        prefactor = 1.0
    else:
        sign = 1.0 if outcome is FusionOutcome.ONE_10 else -1.0
        lowered = annihilate(state, {i: 1.0, j: sign})
        prefactor = math.sqrt((1.0 - t) / 2.0)
    return FockState(
        state.num_modes,
        {occ: prefactor * math.sqrt(t ** (occ[i] + occ[j])) * a for occ, a in lowered.items()},
    )


def _primate_pattern(n: int, left: bool) -> OccupationVector:
    if left:
        return (2,) + (0, 1) * (n - 1) + (0,)
    return (0,) + (1, 0) * (n - 1) + (2,)


def useful_component(n: int, s: float) -> FockState:
    """The entangled part ``sqrt(s)|2,01..,0> + sqrt(1-s)|0,10..,2>`` on 2n modes."""
    return FockState(2 * n, {_primate_pattern(n, True): math.sqrt(s), _primate_pattern(n, False): math.sqrt(1.0 - s)})


def default_junk(n: int, size: int = 3) -> FockState | None:
    """Uniform superposition of the first few (n+1)-photon states on 2n-2 modes."""
    if n == 1:
        return None
    modes = 2 * n - 2
    basis = []
    for occ in _compositions(n + 1, modes):
        basis.append(occ)
        if len(basis) == size:
            break
    return FockState.superposition((1.0, occ) for occ in basis)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def build_primate(n: int, lam: float, s: float, junk: FockState | None = None) -> FockState:
    """Pure primate ``sqrt(lam)|s^(n)> + sqrt(1-lam)|0>|junk>|0>`` on 2n modes."""
    if n < 1:
        raise ValueError("primate size must be >= 1")
    if not (0.0 <= lam <= 1.0 and 0.0 <= s <= 1.0):
        raise ValueError("lam and s must lie in [0, 1]")
    useful = useful_component(n, s).scaled(math.sqrt(lam))
    if n == 1:
        if junk is not None and not junk.is_zero():
            raise ValueError("an elementary primate has no junk component")
        if lam != 1.0:
            raise ValueError("an elementary primate must have lam = 1")
        return useful
    if junk is None:
        if lam != 1.0:
            raise ValueError(f"a junk state is required for n={n}, lam={lam}")
        return useful
    if junk.num_modes != 2 * n - 2:
        raise ValueError(f"junk must live on {2 * n - 2} modes")
    if junk.photon_numbers() != {n + 1}:
        raise ValueError(f"junk must carry exactly {n + 1} photons")
    if abs(junk.norm2() - 1.0) > 1e-12:
        raise ValueError("junk must be normalized")
    padded = FockState(2 * n, {(0,) + occ + (0,): a for occ, a in junk.items()})
    return useful + padded.scaled(math.sqrt(1.0 - lam))


def build_ghz(num_qubits: int, s: float) -> FockState:
    """Dual-rail ``sqrt(s)|10>^N + sqrt(1-s)|01>^N``."""
    if num_qubits < 1:
        raise ValueError("need at least one qubit")
    if not 0.0 <= s <= 1.0:
        raise ValueError("s must lie in [0, 1]")
    return FockState(
        2 * num_qubits,
        {(1, 0) * num_qubits: math.sqrt(s), (0, 1) * num_qubits: math.sqrt(1.0 - s)},
    )


def fidelity(a: FockState, b: FockState) -> float:
    if a.num_modes != b.num_modes:
        raise ValueError("mode count mismatch")
    na, nb = a.norm2(), b.norm2()
    if na == 0.0 or nb == 0.0:
        raise ValueError("fidelity undefined for a zero state")
    return min(1.0, abs(a.inner(b)) ** 2 / (na * nb))
