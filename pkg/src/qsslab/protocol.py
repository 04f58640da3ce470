"""Six-phase quantum secret sharing protocol over a simulated channel.

Alice prepares single photons in |0>, routes them through a chain of agents
who each encrypt with a secret random y-rotation, checks a random sample
(first detection), encodes message bits with -i*sigma_y, sends the rest to
the last agent who undoes the accumulated rotation and reads the bits out
(recovery), and finally verifies pre-inserted check bits (second detection).

A dishonest agent is modeled by an adversary hook that may entangle ancilla
qubits with photons in transit. By convention the photon is always the LAST
(least significant) qubit of whatever joint state travels on the channel.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .quantum import (
    MINUS_I_SIGMA_Y,
    State,
    add_angles,
    apply_unitary,
    canonical_angle,
    ket0,
    measure_qubit_z,
    rotation_operator,
)

PHASES = (
    "preparation",
    "encryption",
    "first-detection",
    "encoding",
    "recovery",
    "second-detection",
)

DISCRETE_ANGLES = (0.0, np.pi / 2, np.pi, 3 * np.pi / 2)

ROLE_CHECK_FIRST = "check-first-detection"
ROLE_MESSAGE = "message"
ROLE_CHECK_SECOND = "check-second-detection"


class ConfigError(Exception):
    """Invalid protocol or scenario configuration."""


class MissingAngleError(Exception):
    """An agent withheld its rotation angles; decoding is refused."""


def agent_name(k: int, num_agents: int) -> str:
    # Bob, Charlie, ... with the final receiver called Zach.
    if k == num_agents - 1:
        return "Zach"
    names = ("Bob", "Charlie", "Dave", "Erin", "Frank", "Grace", "Heidi", "Ivan")
    return names[k] if k < len(names) else f"Agent{k}"


@dataclass(frozen=True)
class ProtocolConfig:
    num_agents: int
    message_length: int = 32
    message_bits: tuple[int, ...] | None = None
    check_fraction_first: float = 0.5
    num_second_checks: int = 4
    angle_distribution: str = "uniform"  # "uniform" or "discrete"
    adversary_position: int | None = None  # defaults to the middle agent
    seed: int = 0

    def validate(self) -> None:
        if self.num_agents < 2:
            raise ConfigError("num_agents must be >= 2 (secret sharing needs >= 2 agents)")
        if self.message_bits is not None:
            if any(b not in (0, 1) for b in self.message_bits):
                raise ConfigError("message_bits must contain only 0/1")
            if len(self.message_bits) < 1:
                raise ConfigError("message_bits must be nonempty")
        elif self.message_length < 1:
            raise ConfigError("message_length must be >= 1")
        if not 0.0 < self.check_fraction_first < 1.0:
            raise ConfigError("check_fraction_first must lie in (0, 1)")
        if self.num_second_checks < 0:
            raise ConfigError("num_second_checks must be >= 0")
        if self.angle_distribution not in ("uniform", "discrete"):
            raise ConfigError(f"unknown angle_distribution {self.angle_distribution!r}")
        pos = self.default_adversary_position()
        if not 0 <= pos < self.num_agents:
            raise ConfigError(f"adversary_position {pos} out of range")

    def default_adversary_position(self) -> int:
        if self.adversary_position is not None:
            return self.adversary_position
        return self.num_agents // 2


@dataclass(frozen=True)
class Event:
    phase: str
    kind: str
    party: str = ""
    photon: int | None = None
    data: tuple[tuple[str, object], ...] = ()


def format_event(e: Event) -> str:
    parts = [f"phase={e.phase}", f"kind={e.kind}"]
    if e.party:
        parts.append(f"party={e.party}")
    if e.photon is not None:
        parts.append(f"photon={e.photon}")
    for key, value in e.data:
        if isinstance(value, float):
            parts.append(f"{key}={value:.17g}")
        else:
            parts.append(f"{key}={value}")
    return " ".join(parts)


class Transcript:
    """Ordered event log of one protocol run."""

    def __init__(self):
        self.events: list[Event] = []

    def log(self, phase: str, kind: str, party: str = "", photon: int | None = None, **data):
        self.events.append(Event(phase, kind, party, photon, tuple(data.items())))

    def to_lines(self) -> list[str]:
        return [format_event(e) for e in self.events]

    def serialize(self) -> str:
        return "\n".join(self.to_lines()) + "\n"

    def check_phase_order(self) -> None:
        last = 0
        for e in self.events:
            idx = PHASES.index(e.phase)
            if idx < last:
                raise InvariantPhaseError(
                    f"event in phase {e.phase!r} after phase {PHASES[last]!r}"
                )
            last = idx

    def __eq__(self, other):
        return isinstance(other, Transcript) and self.events == other.events


class InvariantPhaseError(Exception):
    pass


@dataclass
class PhotonRecord:
    photon_id: int
    state: State
    role: str | None = None
    position: int | None = None  # payload slot, if any

    @property
    def photon_qubit(self) -> int:
        return self.state.num_qubits - 1


class AngleLedger:
    """Per-(agent, photon) record of committed rotation angles."""

    def __init__(self, num_agents: int):
        self.num_agents = num_agents
        self.angles: dict[tuple[int, int], float] = {}

    def record(self, agent: int, photon: int, angle: float) -> None:
        self.angles[(agent, photon)] = canonical_angle(angle)

    def get(self, agent: int, photon: int) -> float:
        try:
            return self.angles[(agent, photon)]
        except KeyError:
            raise MissingAngleError(f"agent {agent} disclosed no angle for photon {photon}")

    def total(self, photon: int) -> float:
        total = 0.0
        for agent in range(self.num_agents):
            total = add_angles(total, self.get(agent, photon))
        return total

    def without_agent(self, agent: int) -> "AngleLedger":
        out = AngleLedger(self.num_agents)
        out.angles = {k: v for k, v in self.angles.items() if k[0] != agent}
        return out


class NullAdversary:
    """Identity hook: reproduces the honest protocol exactly."""

    def on_photon_forward(self, photon_id: int, state: State) -> State:
        return state

    def on_check_announcement(
        self, photon_id: int, honest_angle: float, state: State
    ) -> tuple[float, State]:
        return honest_angle, state

    def on_photon_return(self, photon_id: int, state: State) -> State:
        return state

    def on_finish(self) -> dict[int, int]:
        return {}


@dataclass(frozen=True)
class DetectionVerdict:
    phase: str
    passed: bool
    failed_photons: tuple[int, ...]
    # (photon id, outcome, Born probability of that outcome)
    outcomes: tuple[tuple[int, int, float], ...] = ()


@dataclass(frozen=True)
class RunResult:
    config: ProtocolConfig
    transcript: Transcript
    message: tuple[int, ...]
    decoded_message: tuple[int, ...] | None
    first_detection: DetectionVerdict
    second_detection: DetectionVerdict | None
    guesses: dict[int, int]
    message_photon_ids: tuple[int, ...]
    check_positions: tuple[int, ...]
    recovery_probabilities: tuple[float, ...] = ()


def required_sequence_length(n_payload: int, check_fraction: float) -> int:
    """Smallest n with n - ceil(check_fraction * n) == n_payload."""
    n = n_payload
    while n - math.ceil(check_fraction * n) < n_payload:
        n += 1
    return n


def sample_angle(rng: np.random.Generator, distribution: str) -> float:
    if distribution == "discrete":
        return float(DISCRETE_ANGLES[rng.integers(0, len(DISCRETE_ANGLES))])
    return float(rng.uniform(0.0, 2 * np.pi))


def prepare_sequence(n: int, transcript: Transcript | None = None) -> list[PhotonRecord]:
    if n < 1:
        raise ConfigError("cannot prepare an empty photon sequence")
    photons = [PhotonRecord(j, ket0()) for j in range(n)]
    if transcript is not None:
        for p in photons:
            transcript.log("preparation", "Prepared", party="Alice", photon=p.photon_id)
    return photons


def encryption_phase(
    photons: list[PhotonRecord],
    config: ProtocolConfig,
    rng: np.random.Generator,
    adversary: NullAdversary,
    transcript: Transcript,
) -> AngleLedger:
    ledger = AngleLedger(config.num_agents)
    adv_pos = config.default_adversary_position()
    for p in photons:
        transcript.log(
            "encryption", "Sent", party="Alice", photon=p.photon_id,
            to=agent_name(0, config.num_agents),
        )
        for k in range(config.num_agents):
            angle = sample_angle(rng, config.angle_distribution)
            ledger.record(k, p.photon_id, angle)
            p.state = apply_unitary(p.state, [p.photon_qubit], rotation_operator(angle))
            # The angle is committed to the ledger but never logged in clear.
            transcript.log(
                "encryption", "Rotated",
                party=agent_name(k, config.num_agents), photon=p.photon_id,
            )
            if k == adv_pos:
                p.state = adversary.on_photon_forward(p.photon_id, p.state)
            dest = agent_name(k + 1, config.num_agents) if k + 1 < config.num_agents else "Alice"
            transcript.log(
                "encryption", "Sent",
                party=agent_name(k, config.num_agents), photon=p.photon_id, to=dest,
            )
    return ledger


def first_detection(
    photons: list[PhotonRecord],
    ledger: AngleLedger,
    config: ProtocolConfig,
    rng: np.random.Generator,
    adversary: NullAdversary,
    transcript: Transcript,
) -> DetectionVerdict:
    n = len(photons)
    n_checks = math.ceil(config.check_fraction_first * n)
    check_ids = sorted(int(j) for j in rng.choice(n, size=n_checks, replace=False))
    adv_pos = config.default_adversary_position()
    failed = []
    outcomes = []
    for j in check_ids:
        p = photons[j]
        p.role = ROLE_CHECK_FIRST
        transcript.log("first-detection", "AnnouncementRequested", party="Alice", photon=j)
        announced_sum = 0.0
        for k in range(config.num_agents):
            honest = ledger.get(k, j)
            if k == adv_pos:
                announced, p.state = adversary.on_check_announcement(j, honest, p.state)
            else:
                announced = honest
            transcript.log(
                "first-detection", "Announced",
                party=agent_name(k, config.num_agents), photon=j, angle=announced,
            )
            announced_sum = add_angles(announced_sum, announced)
        p.state = apply_unitary(p.state, [p.photon_qubit], rotation_operator(-announced_sum))
        outcome, p.state, prob = measure_qubit_z(p.state, p.photon_qubit, rng)
        transcript.log(
            "first-detection", "Measured",
            party="Alice", photon=j, basis="Z", outcome=outcome, probability=prob,
        )
        outcomes.append((j, outcome, prob))
        if outcome != 0:
            failed.append(j)
    verdict = DetectionVerdict("first-detection", not failed, tuple(failed), tuple(outcomes))
    transcript.log(
        "first-detection", "Verdict", party="Alice",
        result="pass" if verdict.passed else "fail",
        failed=",".join(str(j) for j in failed) or "-",
    )
    return verdict


def encode_message(
    photons: list[PhotonRecord], bits: tuple[int, ...], transcript: Transcript | None = None
) -> None:
    if len(photons) != len(bits):
        raise ConfigError(
            f"message length {len(bits)} does not match {len(photons)} message photons"
        )
    for p, bit in zip(photons, bits):
        if bit == 1:
            p.state = apply_unitary(p.state, [p.photon_qubit], MINUS_I_SIGMA_Y)
        if transcript is not None:
            transcript.log("encoding", "Encoded", party="Alice", photon=p.photon_id)


def recovery_phase(
    photons: list[PhotonRecord],
    ledger: AngleLedger,
    config: ProtocolConfig,
    rng: np.random.Generator,
    adversary: NullAdversary,
    transcript: Transcript,
) -> tuple[tuple[int, ...], tuple[float, ...]]:
    receiver = agent_name(config.num_agents - 1, config.num_agents)
    decoded = []
    probs = []
    # All agents must disclose before any photon is decoded.
    totals = {p.photon_id: ledger.total(p.photon_id) for p in photons}
    for p in photons:
        p.state = adversary.on_photon_return(p.photon_id, p.state)
        transcript.log("recovery", "Sent", party="Alice", photon=p.photon_id, to=receiver)
        p.state = apply_unitary(
            p.state, [p.photon_qubit], rotation_operator(-totals[p.photon_id])
        )
        outcome, p.state, prob = measure_qubit_z(p.state, p.photon_qubit, rng)
        transcript.log(
            "recovery", "Measured",
            party=receiver, photon=p.photon_id, basis="Z", outcome=outcome, probability=prob,
        )
        decoded.append(outcome)
        probs.append(prob)
    return tuple(decoded), tuple(probs)


def second_detection(
    decoded_payload: tuple[int, ...],
    check_positions: tuple[int, ...],
    expected_bits: tuple[int, ...],
    transcript: Transcript | None = None,
) -> DetectionVerdict:
    mismatched = tuple(
        pos for pos, bit in zip(check_positions, expected_bits) if decoded_payload[pos] != bit
    )
    verdict = DetectionVerdict("second-detection", not mismatched, mismatched)
    if transcript is not None:
        transcript.log(
            "second-detection", "Verdict", party="Alice",
            result="pass" if verdict.passed else "fail",
            failed=",".join(str(j) for j in mismatched) or "-",
        )
    return verdict


def run_protocol(config: ProtocolConfig, adversary_factory=None) -> RunResult:
    """Execute one full protocol run; deterministic given ``config.seed``.

    ``adversary_factory`` takes a dedicated RNG and returns an adversary hook.
    """
    config.validate()
    proto_ss, adv_ss = np.random.SeedSequence(config.seed).spawn(2)
    rng = np.random.default_rng(proto_ss)
    adversary = (
        adversary_factory(np.random.default_rng(adv_ss)) if adversary_factory else NullAdversary()
    )
    transcript = Transcript()

    if config.message_bits is not None:
        message = tuple(int(b) for b in config.message_bits)
    else:
        message = tuple(int(b) for b in rng.integers(0, 2, size=config.message_length))
    n_payload = len(message) + config.num_second_checks
    n_total = required_sequence_length(n_payload, config.check_fraction_first)

    photons = prepare_sequence(n_total, transcript)
    ledger = encryption_phase(photons, config, rng, adversary, transcript)
    first = first_detection(photons, ledger, config, rng, adversary, transcript)
    if not first.passed:
        return RunResult(
            config, transcript, message, None, first, None,
            adversary.on_finish(), (), (),
        )

    payload = [p for p in photons if p.role is None]
    assert len(payload) == n_payload
    if config.num_second_checks > 0:
        check_positions = tuple(
            sorted(int(i) for i in rng.choice(n_payload, config.num_second_checks, replace=False))
        )
        check_bits = tuple(int(b) for b in rng.integers(0, 2, size=config.num_second_checks))
    else:
        check_positions, check_bits = (), ()
    payload_bits = []
    msg_iter = iter(message)
    check_iter = iter(check_bits)
    for pos, p in enumerate(payload):
        p.position = pos
        if pos in check_positions:
            p.role = ROLE_CHECK_SECOND
            payload_bits.append(next(check_iter))
        else:
            p.role = ROLE_MESSAGE
            payload_bits.append(next(msg_iter))
    payload_bits = tuple(payload_bits)

    encode_message(payload, payload_bits, transcript)
    decoded_payload, probs = recovery_phase(payload, ledger, config, rng, adversary, transcript)
    second = second_detection(decoded_payload, check_positions, check_bits, transcript)
    decoded_message = tuple(
        bit for pos, bit in enumerate(decoded_payload) if pos not in check_positions
    )
    message_photon_ids = tuple(p.photon_id for p in payload if p.role == ROLE_MESSAGE)
    guesses = adversary.on_finish()

    return RunResult(
        config, transcript, message, decoded_message, first, second,
        guesses, message_photon_ids, check_positions, probs,
    )


def config_to_dict(config: ProtocolConfig) -> dict:
    return {
        "agents": config.num_agents,
        "message_bits": list(config.message_bits) if config.message_bits is not None else None,
        "message_length": config.message_length,
        "check_fraction_first": config.check_fraction_first,
        "second_checks": config.num_second_checks,
        "angle_distribution": config.angle_distribution,
        "adversary_position": config.adversary_position,
        "seed": config.seed,
    }


def with_seed(config: ProtocolConfig, seed: int) -> ProtocolConfig:
    return replace(config, seed=seed)


def serialize_config(config: ProtocolConfig) -> str:
    return json.dumps(config_to_dict(config), sort_keys=True)
