"""Dense statevector engine for few-qubit simulations.

Conventions (fixed and tested):
- qubit index 0 is the most significant bit of the amplitude index,
  so ``tensor(a, b)`` is a plain Kronecker product and ``|10>`` has index 2.
- rotations are real y-axis rotations ``U(t) = [[cos t, -sin t], [sin t, cos t]]``,
  which compose additively: ``U(a) @ U(b) = U(a + b)``.
- all angles are canonicalized to [0, 2*pi).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi

# Stored-invariant tolerance vs single-operation identity tolerance.
ATOL_STATE = 1e-10
ATOL_OP = 1e-12

MINUS_I_SIGMA_Y = np.array([[0.0, -1.0], [1.0, 0.0]], dtype=complex)


class InvariantError(Exception):
    """A numerical invariant that should hold by construction was violated."""


def canonical_angle(theta: float) -> float:
    """Reduce an angle to the canonical range [0, 2*pi)."""
    t = float(np.mod(theta, TWO_PI))
    return 0.0 if t == TWO_PI else t


def add_angles(a: float, b: float) -> float:
    return canonical_angle(a + b)


def rotation_operator(theta: float) -> np.ndarray:
    """Y-axis rotation by ``theta``; maps |0> to cos(theta)|0> + sin(theta)|1>."""
    c, s = np.cos(theta), np.sin(theta)
    out = np.empty((2, 2), dtype=complex)
    out[0, 0] = c
    out[0, 1] = -s
    out[1, 0] = s
    out[1, 1] = c
    return out


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class State:
    """Normalized pure state over ``num_qubits`` qubits (MSB-first indexing)."""

    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex)
        if amps.ndim != 1 or not _is_power_of_two(amps.size):
            raise ValueError(f"amplitude vector length {amps.size} is not a power of 2")
        norm_sq = float(np.vdot(amps, amps).real)
        if not np.isfinite(norm_sq):
            raise InvariantError("non-finite amplitude")
        if abs(norm_sq - 1.0) > 2 * ATOL_STATE:
            raise InvariantError(
                f"state norm {np.sqrt(norm_sq)} deviates from 1 by more than {ATOL_STATE}"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    @property
    def num_qubits(self) -> int:
        return int(self.amps.size).bit_length() - 1

    @property
    def dim(self) -> int:
        return self.amps.size

    def __eq__(self, other):
        return isinstance(other, State) and np.array_equal(self.amps, other.amps)

    def __hash__(self):
        return hash(self.amps.tobytes())


def basis_state(num_qubits: int, index: int) -> State:
    amps = np.zeros(2**num_qubits, dtype=complex)
    amps[index] = 1.0
    return State(amps)


def ket0(num_qubits: int = 1) -> State:
    return basis_state(num_qubits, 0)


def tensor(a: State, b: State) -> State:
    return State((a.amps[:, None] * b.amps[None, :]).reshape(-1))


_UNITARY_CACHE: dict[bytes, None] = {}


def check_unitary(op: np.ndarray, atol: float = ATOL_STATE) -> None:
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError(f"operator shape {op.shape} is not square")
    if op.shape == (2, 2):
        # Scalar fast path; 2x2 ops dominate the protocol hot loop.
        a, b = complex(op[0, 0]), complex(op[0, 1])
        c, d = complex(op[1, 0]), complex(op[1, 1])
        err = max(
            abs(abs(a) ** 2 + abs(c) ** 2 - 1.0),
            abs(abs(b) ** 2 + abs(d) ** 2 - 1.0),
            abs(a.conjugate() * b + c.conjugate() * d),
        )
    else:
        key = op.tobytes()
        if key in _UNITARY_CACHE:
            return
        err = np.max(np.abs(op.conj().T @ op - np.eye(op.shape[0])))
        if err <= atol:
            if len(_UNITARY_CACHE) > 256:
                _UNITARY_CACHE.clear()
            _UNITARY_CACHE[key] = None
    if err > atol:
        raise InvariantError(f"operator is not unitary (max deviation {err:.3e})")


def apply_unitary(state: State, targets: list[int], op: np.ndarray) -> State:
    """Apply ``op`` to the ordered tensor factor ``targets`` of ``state``."""
    n = state.num_qubits
    targets = list(targets)
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target in {targets}")
    if any(q < 0 or q >= n for q in targets):
        raise ValueError(f"target out of range for {n} qubits: {targets}")
    op = np.asarray(op, dtype=complex)
    k = len(targets)
    if op.shape != (2**k, 2**k):
        raise ValueError(f"operator shape {op.shape} does not match {k} target qubit(s)")
    check_unitary(op)

    if k == n and targets == list(range(n)):
        return State(op @ state.amps)
    if k == 1 and targets[0] == n - 1:
        # Hot path: the photon rides as the last (least significant) qubit.
        return State((state.amps.reshape(-1, 2) @ op.T).reshape(-1))
    rest = [q for q in range(n) if q not in targets]
    perm = targets + rest
    t = state.amps.reshape([2] * n).transpose(perm).reshape(2**k, -1)
    t = op @ t
    t = t.reshape([2] * n).transpose(np.argsort(perm)).reshape(-1)
    return State(t)


def apply_controlled(state: State, controls: list[int], target: int, op: np.ndarray) -> State:
    """Apply a 2x2 ``op`` to ``target`` on components where every control bit is 1."""
    n = state.num_qubits
    controls = list(controls)
    if not controls:
        raise ValueError("controls must be nonempty")
    indices = controls + [target]
    if len(set(indices)) != len(indices):
        raise ValueError(f"overlapping control/target indices: {indices}")
    if any(q < 0 or q >= n for q in indices):
        raise ValueError(f"qubit index out of range for {n} qubits: {indices}")
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise ValueError(f"controlled op must be 2x2, got {op.shape}")
    check_unitary(op)

    idx = np.arange(2**n)
    active = np.ones(2**n, dtype=bool)
    for c in controls:
        active &= ((idx >> (n - 1 - c)) & 1) == 1
    tbit = 1 << (n - 1 - target)
    i0 = idx[active & ((idx & tbit) == 0)]
    i1 = i0 | tbit
    amps = state.amps.copy()
    a0, a1 = amps[i0], amps[i1]
    amps[i0] = op[0, 0] * a0 + op[0, 1] * a1
    amps[i1] = op[1, 0] * a0 + op[1, 1] * a1
    return State(amps)


def projector(state: State) -> np.ndarray:
    return np.outer(state.amps, state.amps.conj())


def z_projectors(num_qubits: int, qubit: int) -> list[np.ndarray]:
    """Full-dimension projectors for a Z measurement of one qubit."""
    p0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    p1 = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
    out = []
    for p in (p0, p1):
        full = np.eye(1, dtype=complex)
        for q in range(num_qubits):
            full = np.kron(full, p if q == qubit else np.eye(2, dtype=complex))
        out.append(full)
    return out


def check_projectors(projectors: list[np.ndarray], dim: int) -> None:
    total = sum(projectors)
    if np.max(np.abs(total - np.eye(dim))) > ATOL_STATE:
        raise InvariantError("projectors do not sum to the identity")
    for i in range(len(projectors)):
        for j in range(i + 1, len(projectors)):
            if np.max(np.abs(projectors[i] @ projectors[j])) > ATOL_STATE:
                raise InvariantError(f"projectors {i} and {j} are not orthogonal")


def measure_projective(
    state: State, projectors: list[np.ndarray], rng: np.random.Generator, validate: bool = True
) -> tuple[int, State, float]:
    """Born-rule measurement against a complete orthogonal projector set.

    Returns (outcome index, collapsed state, outcome probability).
    ``validate=False`` skips the completeness/orthogonality check for callers
    that verified a fixed projector set up front.
    """
    projectors = [np.asarray(p, dtype=complex) for p in projectors]
    if validate:
        check_projectors(projectors, state.dim)

    projected = [p @ state.amps for p in projectors]
    probs = np.array([float(np.real(np.vdot(state.amps, v))) for v in projected])
    r = rng.random()
    cum = 0.0
    outcome = len(probs) - 1
    for k, p in enumerate(probs):
        cum += p
        if r < cum:
            outcome = k
            break
    p = probs[outcome]
    collapsed = State(projected[outcome] / np.sqrt(p))
    return outcome, collapsed, float(p)


def measure_qubit_z(state: State, qubit: int, rng: np.random.Generator) -> tuple[int, State, float]:
    """Z measurement of one qubit (fast path; Born-rule equivalent to
    ``measure_projective`` with the z_projectors of that qubit)."""
    n = state.num_qubits
    if qubit == n - 1:
        # Hot path: the photon rides as the last (least significant) qubit.
        m = state.amps.reshape(-1, 2)
        p0 = float(np.sum(np.abs(m[:, 0]) ** 2))
        outcome = 0 if rng.random() < p0 else 1
        prob = p0 if outcome == 0 else 1.0 - p0
        collapsed = np.zeros_like(m)
        collapsed[:, outcome] = m[:, outcome] / np.sqrt(prob)
        return outcome, State(collapsed.reshape(-1)), prob
    t = np.moveaxis(state.amps.reshape([2] * n), qubit, 0)
    p0 = float(np.sum(np.abs(t[0]) ** 2))
    outcome = 0 if rng.random() < p0 else 1
    prob = p0 if outcome == 0 else 1.0 - p0
    collapsed = np.zeros_like(t)
    collapsed[outcome] = t[outcome] / np.sqrt(prob)
    collapsed = np.moveaxis(collapsed, 0, qubit).reshape(-1)
    return outcome, State(collapsed), prob


def partial_trace(state: State, keep: list[int]) -> np.ndarray:
    """Reduced density matrix over ``keep`` (in the given order)."""
    n = state.num_qubits
    keep = list(keep)
    if not keep:
        raise ValueError("keep must be nonempty")
    if len(set(keep)) != len(keep) or any(q < 0 or q >= n for q in keep):
        raise ValueError(f"invalid keep set for {n} qubits: {keep}")
    traced = [q for q in range(n) if q not in keep]
    t = state.amps.reshape([2] * n)
    rho = np.tensordot(t, t.conj(), axes=(traced, traced))
    # Remaining axes follow the original qubit order; permute to the requested one.
    remaining = [q for q in range(n) if q in keep]
    order = [remaining.index(q) for q in keep]
    k = len(keep)
    rho = rho.transpose(order + [k + o for o in order])
    return rho.reshape(2**k, 2**k)


def check_density_matrix(rho: np.ndarray, atol: float = ATOL_STATE) -> None:
    if np.max(np.abs(rho - rho.conj().T)) > atol:
        raise InvariantError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > atol:
        raise InvariantError(f"density matrix trace {np.trace(rho)} deviates from 1")
    if np.min(np.linalg.eigvalsh(rho)) < -atol:
        raise InvariantError("density matrix has a negative eigenvalue")


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    eigs = np.linalg.eigvalsh(a - b)
    return float(0.5 * np.sum(np.abs(eigs)))


def overlap(a: State, b: State) -> complex:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amps, b.amps))


def global_phase_equal(a: State, b: State, tol: float = ATOL_STATE) -> bool:
    """True iff the states agree up to an unobservable global phase."""
    return abs(overlap(a, b)) >= 1.0 - tol
