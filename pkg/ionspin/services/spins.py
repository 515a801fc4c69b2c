"""Dense state-vector simulation of Ising phase evolution and graph states.

Qubit k is bit k of the basis index (qubit 0 is the least significant bit) and
s_k = +1 for bit value 0, -1 for bit value 1.
"""

import logging
import math
from typing import Tuple, Union

import numpy as np

from ionspin.models.crystal import PhaseMatrix
from ionspin.models.state import BIT_CONVENTION, GraphSpec, QuantumState
from ionspin.utils.config import settings
from ionspin.utils.errors import CapacityError, DimensionMismatchError, FormatError, QubitIndexError

logger = logging.getLogger(__name__)

Basis = Union[str, float]
RngLike = Union[int, np.random.Generator, None]

_BASIS_ANGLES = {"X": 0.0, "Y": math.pi / 2}


def _check_capacity(n: int) -> None:
    if n < 1:
        raise ValueError("a register needs at least one qubit")
    if n > settings.max_qubits:
        raise CapacityError(f"{n} qubits exceed the simulator capacity of {settings.max_qubits}")


def _check_qubit(state: QuantumState, k: int) -> None:
    if not 0 <= k < state.n:
        raise QubitIndexError(f"qubit {k} out of range for {state.n} qubits")


def z_signs(n: int) -> np.ndarray:
    """(2^n, n) array of Z eigenvalues s_k for every basis index."""
    bits = (np.arange(2 ** n)[:, None] >> np.arange(n)) & 1
    return 1 - 2 * bits


def _new(n: int, amplitudes: np.ndarray) -> QuantumState:
    return QuantumState(n=n, amplitudes=amplitudes)


def plus_state(n: int) -> QuantumState:
    _check_capacity(n)
    return _new(n, np.full(2 ** n, 2.0 ** (-n / 2), dtype=complex))


def basis_state(n: int, index: int = 0) -> QuantumState:
    _check_capacity(n)
    amplitudes = np.zeros(2 ** n, dtype=complex)
    amplitudes[index] = 1.0
    return _new(n, amplitudes)


def apply_phase_evolution(state: QuantumState, theta: Union[PhaseMatrix, np.ndarray]) -> QuantumState:
    """Multiply |x> by exp(i sum_{i<j} Theta_ij s_i s_j)."""
    matrix = theta.theta if isinstance(theta, PhaseMatrix) else np.asarray(theta, dtype=float)
    if matrix.shape != (state.n, state.n):
        raise DimensionMismatchError(f"phase matrix {matrix.shape} for {state.n} qubits")
    s = z_signs(state.n)
    phases = np.einsum("xi,ij,xj->x", s, np.triu(matrix, k=1), s)
    return _new(state.n, state.amplitudes * np.exp(1j * phases))


def apply_pauli_x(state: QuantumState, k: int) -> QuantumState:
    _check_qubit(state, k)
    flipped = np.arange(2 ** state.n) ^ (1 << k)
    return _new(state.n, state.amplitudes[flipped])


def apply_local_z_rotation(state: QuantumState, k: int, angle: float) -> QuantumState:
    """Multiply amplitudes by exp(i angle s_k)."""
    _check_qubit(state, k)
    s = 1 - 2 * ((np.arange(2 ** state.n) >> k) & 1)
    return _new(state.n, state.amplitudes * np.exp(1j * angle * s))


def apply_hadamard(state: QuantumState, k: int) -> QuantumState:
    _check_qubit(state, k)
    view = state.amplitudes.reshape(2 ** (state.n - k - 1), 2, 2 ** k)
    out = np.empty_like(view)
    out[:, 0, :] = (view[:, 0, :] + view[:, 1, :]) / math.sqrt(2)
    out[:, 1, :] = (view[:, 0, :] - view[:, 1, :]) / math.sqrt(2)
    return _new(state.n, out.reshape(-1))


def apply_cz(state: QuantumState, a: int, b: int) -> QuantumState:
    _check_qubit(state, a)
    _check_qubit(state, b)
    index = np.arange(2 ** state.n)
    both = ((index >> a) & 1) & ((index >> b) & 1)
    return _new(state.n, state.amplitudes * (1 - 2 * both))


def apply_degree_corrections(state: QuantumState, graph: GraphSpec) -> QuantumState:
    """Local rotations turning pi/4 edge phases into controlled-Z gates."""
    for vertex, degree in enumerate(graph.degrees()):
        if degree:
            state = apply_local_z_rotation(state, vertex, -degree * math.pi / 4)
    return state


def graph_state(graph: GraphSpec) -> QuantumState:
    state = plus_state(graph.n)
    s = z_signs(graph.n)
    parity = np.zeros(2 ** graph.n, dtype=int)
    for a, b in graph.edges:
        parity ^= ((1 - s[:, a]) // 2) & ((1 - s[:, b]) // 2)
    return _new(graph.n, state.amplitudes * (1 - 2 * parity))


def stabilizer_expectations(state: QuantumState, graph: GraphSpec) -> np.ndarray:
    """<K_a> with K_a = X_a prod_{b in N(a)} Z_b for every vertex a."""
    if graph.n != state.n:
        raise DimensionMismatchError(f"graph on {graph.n} vertices for {state.n} qubits")
    s = z_signs(state.n)
    index = np.arange(2 ** state.n)
    psi = state.amplitudes
    values = np.empty(state.n)
    for a in range(state.n):
        neighbours = graph.neighbors(a)
        z = np.prod(s[:, neighbours], axis=1) if neighbours else 1
        values[a] = float(np.real(np.vdot(psi, z * psi[index ^ (1 << a)])))
    return values


def fidelity(a: QuantumState, b: QuantumState) -> float:
    if a.n != b.n:
        raise DimensionMismatchError(f"states on {a.n} and {b.n} qubits")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))


def _generator(rng: RngLike) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def _branches(state: QuantumState, k: int, basis: Basis) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Reduced amplitudes of the other qubits for outcomes +1 / -1, and the two qubit vectors."""
    view = state.amplitudes.reshape(2 ** (state.n - k - 1), 2, 2 ** k)
    c0, c1 = view[:, 0, :].reshape(-1), view[:, 1, :].reshape(-1)
    if basis == "Z":
        return c0, c1, np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
    if isinstance(basis, str):
        if basis not in _BASIS_ANGLES:
            raise ValueError(f"unknown measurement basis '{basis}'")
        basis = _BASIS_ANGLES[basis]
    phase = np.exp(1j * float(basis))
    plus = np.array([1, phase]) / math.sqrt(2)
    minus = np.array([1, -phase]) / math.sqrt(2)
    return (c0 + np.conj(phase) * c1) / math.sqrt(2), (c0 - np.conj(phase) * c1) / math.sqrt(2), plus, minus


def _sample(state: QuantumState, k: int, basis: Basis, rng: RngLike):
    _check_qubit(state, k)
    plus_branch, minus_branch, plus_vec, minus_vec = _branches(state, k, basis)
    p_plus = float(np.vdot(plus_branch, plus_branch).real)
    if _generator(rng).random() < p_plus:
        return 1, plus_branch / math.sqrt(p_plus), plus_vec
    return -1, minus_branch / math.sqrt(max(1.0 - p_plus, 1e-300)), minus_vec


def _insert_qubit(rest: np.ndarray, vector: np.ndarray, n: int, k: int) -> np.ndarray:
    rest = rest.reshape(2 ** (n - k - 1), 1, 2 ** k)
    return (rest * vector[None, :, None]).reshape(-1)


def measure_qubit(state: QuantumState, k: int, basis: Basis, rng_seed: RngLike) -> Tuple[int, QuantumState]:
    """Born-rule measurement of qubit k; basis is X, Y, Z or an angle a for (|0> +- e^{ia}|1>)/sqrt 2."""
    outcome, rest, vector = _sample(state, k, basis, rng_seed)
    return outcome, _new(state.n, _insert_qubit(rest, vector, state.n, k))


def measure_and_discard(state: QuantumState, k: int, basis: Basis, rng: RngLike) -> Tuple[int, QuantumState]:
    """Measure qubit k and return the renormalised state of the other qubits."""
    if state.n < 2:
        raise CapacityError("cannot discard the last qubit of a register")
    outcome, rest, _ = _sample(state, k, basis, rng)
    return outcome, _new(state.n - 1, rest)


def tensor(high: QuantumState, low: QuantumState) -> QuantumState:
    """Register whose low qubits are ``low`` and high qubits are ``high``."""
    _check_capacity(high.n + low.n)
    return _new(high.n + low.n, np.kron(high.amplitudes, low.amplitudes))


def state_to_dict(state: QuantumState) -> dict:
    return {
        "n": state.n,
        "bit_convention": BIT_CONVENTION,
        "amplitudes": [[float(a.real), float(a.imag)] for a in state.amplitudes],
    }


def state_from_dict(data: dict) -> QuantumState:
    if data.get("bit_convention", BIT_CONVENTION) != BIT_CONVENTION:
        raise FormatError(f"unsupported bit convention {data['bit_convention']!r}")
    try:
        amplitudes = np.array([complex(re, im) for re, im in data["amplitudes"]])
        return _new(int(data["n"]), amplitudes)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError("invalid state description", detail=str(exc))
