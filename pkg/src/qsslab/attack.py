"""Generalized entangling participant attack and its controlled-gate special case.

The dishonest agent prepares an ancilla in |eps>, entangles it with each
transiting photon via a unitary E acting as

    E(|eps> (x) |chi>) = alpha |eps>|chi> + beta |eps_perp> U(theta') |chi>

for every single-qubit |chi>, adaptively announces either its committed angle
theta_c or theta_c + theta' depending on an ancilla measurement (escaping the
first detection), applies E^-1 when the photon returns, and measures the
ancilla to guess the encoded bit. The ancilla always comes back to |eps>
whatever the bit was, so every guess rule is uninformative.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quantum import (
    check_projectors,
    ATOL_STATE,
    MINUS_I_SIGMA_Y,
    InvariantError,
    State,
    add_angles,
    apply_controlled,
    apply_unitary,
    basis_state,
    canonical_angle,
    measure_projective,
    overlap,
    projector,
    rotation_operator,
    tensor,
)

# Angle by which the receiver's message-encoding rotation shifts the photon:
# encoding with -i*sigma_y sends angle theta to theta - 3*pi/2.
ENCODING_SHIFT = -3 * np.pi / 2


@dataclass(frozen=True)
class EntanglerSpec:
    """Parameters (d, |eps>, |eps_perp>, alpha, beta, theta') of the entangler."""

    epsilon: State
    epsilon_perp: State
    alpha: complex
    beta: complex
    theta_prime: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        object.__setattr__(self, "theta_prime", canonical_angle(self.theta_prime))
        if self.epsilon.dim != self.epsilon_perp.dim:
            raise InvariantError(
                f"ancilla dimension mismatch: {self.epsilon.dim} vs {self.epsilon_perp.dim}"
            )
        if self.epsilon.dim < 2:
            raise InvariantError("ancilla dimension must be >= 2")
        if abs(abs(self.alpha) ** 2 + abs(self.beta) ** 2 - 1.0) > ATOL_STATE:
            raise InvariantError("|alpha|^2 + |beta|^2 must equal 1")
        if abs(overlap(self.epsilon, self.epsilon_perp)) > ATOL_STATE:
            raise InvariantError("<eps|eps_perp> must vanish")

    @property
    def ancilla_dim(self) -> int:
        return self.epsilon.dim

    @property
    def ancilla_qubits(self) -> int:
        return self.epsilon.num_qubits


class GuessRule:
    """Maps the final ancilla outcome (eps vs eps_perp) to a bit guess."""

    def __init__(self, eps_bit: int = 0, eps_perp_bit: int = 1):
        if eps_bit not in (0, 1) or eps_perp_bit not in (0, 1):
            raise ValueError("guess rule bits must be 0 or 1")
        self.eps_bit = eps_bit
        self.eps_perp_bit = eps_perp_bit

    def __call__(self, outcome: int) -> int:
        return self.eps_bit if outcome == 0 else self.eps_perp_bit

    def __repr__(self):
        return f"GuessRule(eps_bit={self.eps_bit}, eps_perp_bit={self.eps_perp_bit})"


DEFAULT_GUESS_RULE = GuessRule(0, 1)


def _complete_basis(seeds: list[np.ndarray], dim: int, reverse: bool = False) -> np.ndarray:
    """Extend orthonormal ``seeds`` to a full basis (columns) via Gram-Schmidt."""
    basis = [v.astype(complex) for v in seeds]
    candidates = range(dim - 1, -1, -1) if reverse else range(dim)
    for i in candidates:
        if len(basis) == dim:
            break
        v = np.zeros(dim, dtype=complex)
        v[i] = 1.0
        for b in basis:
            v -= np.vdot(b, v) * b
        norm = np.linalg.norm(v)
        if norm > 1e-6:
            basis.append(v / norm)
    if len(basis) != dim:
        raise InvariantError("failed to complete orthonormal basis")
    return np.column_stack(basis)


def build_entangler(spec: EntanglerSpec, completion: str = "forward") -> np.ndarray:
    """Unitary E on ancilla (x) photon realizing the attack on |eps> (x) C^2.

    E is pinned only on the 2-dimensional subspace spanned by |eps>|0> and
    |eps>|1>; the rest is an arbitrary unitary completion. ``completion``
    selects between two distinct Gram-Schmidt completions so observational
    invariance across completions can be tested.
    """
    if completion not in ("forward", "reversed"):
        raise ValueError(f"unknown completion {completion!r}")
    dim = 2 * spec.ancilla_dim
    e0 = np.array([1.0, 0.0], dtype=complex)
    e1 = np.array([0.0, 1.0], dtype=complex)
    rot = rotation_operator(spec.theta_prime)
    sources = [np.kron(spec.epsilon.amps, e0), np.kron(spec.epsilon.amps, e1)]
    images = [
        spec.alpha * np.kron(spec.epsilon.amps, chi)
        + spec.beta * np.kron(spec.epsilon_perp.amps, rot @ chi)
        for chi in (e0, e1)
    ]
    src = _complete_basis(sources, dim, reverse=(completion == "reversed"))
    img = _complete_basis(images, dim, reverse=(completion == "reversed"))
    return img @ src.conj().T


def qgwz_spec(ancilla_state: State) -> EntanglerSpec:
    """Entangler parameters for the controlled-controlled-(-i*sigma_y) attack.

    The prepared two-qubit ancilla splits as alpha|eps> + beta|11> with |eps>
    the normalized non-|11> component; the gate rotates the photon by
    theta' = -3*pi/2 exactly on the |11> branch.
    """
    if ancilla_state.num_qubits != 2:
        raise InvariantError("qgwz ancilla must be a 2-qubit state")
    amps = ancilla_state.amps
    beta = complex(amps[3])
    rest = amps.copy()
    rest[3] = 0.0
    alpha = float(np.linalg.norm(rest))
    if alpha > ATOL_STATE:
        epsilon = State(rest / alpha)
    else:
        # Degenerate pure-|11> ancilla: any state orthogonal to |11> works.
        alpha = 0.0
        epsilon = basis_state(2, 0)
    return EntanglerSpec(
        epsilon=epsilon,
        epsilon_perp=basis_state(2, 3),
        alpha=alpha,
        beta=beta,
        theta_prime=ENCODING_SHIFT,
    )


def apply_ccy(joint: State) -> State:
    """Direct controlled-controlled-(-i*sigma_y): ancilla pair controls, photon target."""
    return apply_controlled(joint, controls=[0, 1], target=2, op=MINUS_I_SIGMA_Y)


def ancilla_projectors(spec: EntanglerSpec, with_photon: bool) -> list[np.ndarray]:
    """{P_eps, P_eps_perp, rest} on the ancilla, optionally extended over the photon."""
    p_eps = projector(spec.epsilon)
    p_perp = projector(spec.epsilon_perp)
    if with_photon:
        eye2 = np.eye(2, dtype=complex)
        p_eps = np.kron(p_eps, eye2)
        p_perp = np.kron(p_perp, eye2)
    rest = np.eye(p_eps.shape[0], dtype=complex) - p_eps - p_perp
    return [p_eps, p_perp, rest]


def split_product(joint: State, ancilla_qubits: int) -> tuple[State, State]:
    """Factor a product state into (ancilla factor, photon factor).

    Raises ``InvariantError`` if the state carries residual entanglement.
    """
    n = joint.num_qubits
    mat = joint.amps.reshape(2**ancilla_qubits, 2 ** (n - ancilla_qubits))
    u, s, vh = np.linalg.svd(mat)
    if s[0] < 1.0 - 1e-8:
        raise InvariantError(f"state is not a product (leading Schmidt weight {s[0]})")
    return State(u[:, 0]), State(s[0] * vh[0, :])


class EntanglingAdversary:
    """Adversary hook running the entangling attack inside a protocol run.

    ``adaptive=False`` gives the naive control variant that always announces
    its honest angle without measuring the ancilla (and so gets caught at the
    per-photon rate |beta|^2 sin^2(theta')).
    """

    def __init__(
        self,
        spec: EntanglerSpec,
        rng: np.random.Generator,
        rule: GuessRule = DEFAULT_GUESS_RULE,
        adaptive: bool = True,
        completion: str = "forward",
    ):
        self.spec = spec
        self.rng = rng
        self.rule = rule
        self.adaptive = adaptive
        self.entangler = build_entangler(spec, completion)
        self.check_outcomes: dict[int, int] = {}
        self.ancilla_states: dict[int, State] = {}
        self.final_outcomes: dict[int, int] = {}
        # Fixed projector sets; validated once here, reused per photon.
        self._joint_projs = ancilla_projectors(spec, with_photon=True)
        self._ancilla_projs = ancilla_projectors(spec, with_photon=False)
        check_projectors(self._joint_projs, 2 * spec.ancilla_dim)
        check_projectors(self._ancilla_projs, spec.ancilla_dim)

    def on_photon_forward(self, photon_id: int, state: State) -> State:
        if state.num_qubits != 1:
            raise InvariantError("attack expects a bare single-photon state on the channel")
        joint = tensor(self.spec.epsilon, state)
        return apply_unitary(joint, list(range(joint.num_qubits)), self.entangler)

    def on_check_announcement(
        self, photon_id: int, honest_angle: float, state: State
    ) -> tuple[float, State]:
        if not self.adaptive:
            return honest_angle, state
        outcome, collapsed, prob = measure_projective(
            state, self._joint_projs, self.rng, validate=False
        )
        if outcome == 2:
            raise InvariantError(
                f"residual outcome outside span(eps, eps_perp) with probability {prob}"
            )
        self.check_outcomes[photon_id] = outcome
        if outcome == 0:
            return honest_angle, collapsed
        return add_angles(honest_angle, self.spec.theta_prime), collapsed

    def on_photon_return(self, photon_id: int, state: State) -> State:
        separated = apply_unitary(
            state, list(range(state.num_qubits)), self.entangler.conj().T
        )
        ancilla, photon = split_product(separated, self.spec.ancilla_qubits)
        self.ancilla_states[photon_id] = ancilla
        return photon

    def on_finish(self) -> dict[int, int]:
        guesses = {}
        for photon_id, ancilla in sorted(self.ancilla_states.items()):
            outcome, _, prob = measure_projective(
                ancilla, self._ancilla_projs, self.rng, validate=False
            )
            if outcome == 2:
                raise InvariantError(
                    f"final ancilla outcome outside span(eps, eps_perp), probability {prob}"
                )
            self.final_outcomes[photon_id] = outcome
            guesses[photon_id] = self.rule(outcome)
        return guesses


def random_entangler_spec(rng: np.random.Generator, ancilla_dim: int | None = None) -> EntanglerSpec:
    """Random attack parameters: orthonormal ancilla pair, random weights and angle."""
    d = int(ancilla_dim) if ancilla_dim is not None else int(rng.choice([2, 4, 8]))
    eps = rng.normal(size=d) + 1j * rng.normal(size=d)
    eps /= np.linalg.norm(eps)
    perp = rng.normal(size=d) + 1j * rng.normal(size=d)
    perp -= np.vdot(eps, perp) * eps
    perp /= np.linalg.norm(perp)
    mix = rng.uniform(0.0, np.pi / 2)
    alpha = np.cos(mix) * np.exp(1j * rng.uniform(0.0, 2 * np.pi))
    beta = np.sin(mix) * np.exp(1j * rng.uniform(0.0, 2 * np.pi))
    return EntanglerSpec(
        epsilon=State(eps),
        epsilon_perp=State(perp),
        alpha=alpha,
        beta=beta,
        theta_prime=float(rng.uniform(0.0, 2 * np.pi)),
    )


def qgwz_fixture(theta: float) -> tuple[State, State, State, State]:
    """Mid-attack joint states for both message bits in the controlled-gate attack.

    Returns (state_bit0, state_bit1, ht_factor_0, ht_factor_1): the photon
    carries the bit, while the attacker-held qubit pair factor is the same
    for both bits and therefore carries no information.
    """
    c, s = np.cos(theta), np.sin(theta)
    s_factor_0 = State(np.array([c, -s], dtype=complex))
    s_factor_1 = State(MINUS_I_SIGMA_Y @ s_factor_0.amps)
    ht = State(0.5 * np.array([1.0, -1.0, 1.0, 1.0], dtype=complex))  # |00>-|01>+|10>+|11>
    return tensor(s_factor_0, ht), tensor(s_factor_1, ht), ht, ht
