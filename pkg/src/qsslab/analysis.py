"""Quantitative evaluation: distinguishability metrics, sweeps, Monte Carlo campaigns."""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .attack import EntanglerSpec, EntanglingAdversary, GuessRule, build_entangler
from .protocol import ProtocolConfig, RunResult, config_to_dict, run_protocol, with_seed
from .quantum import (
    MINUS_I_SIGMA_Y,
    State,
    apply_unitary,
    basis_state,
    ket0,
    partial_trace,
    rotation_operator,
    tensor,
    trace_distance,
)

REPORT_FIELDS = (
    "trials",
    "attacker_accuracy",
    "ci_low",
    "ci_high",
    "first_detection_pass_rate",
    "recovery_accuracy",
    "max_trace_distance",
    "helstrom_bound",
    "seed",
)


def helstrom_bound(td: float) -> float:
    """Optimal success probability for distinguishing two equiprobable states."""
    return 0.5 * (1.0 + td)


def wilson_interval(successes: int, total: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if total == 0:
        return 0.0, 1.0
    p = successes / total
    denom = 1.0 + z**2 / total
    center = (p + z**2 / (2 * total)) / denom
    half = (z / denom) * np.sqrt(p * (1 - p) / total + z**2 / (4 * total**2))
    return max(0.0, center - half), min(1.0, center + half)


def _attack_pipeline_states(
    spec: EntanglerSpec, theta: float, completion: str = "forward"
) -> dict[int, State]:
    """Joint (ancilla, photon) states after entangle -> encode(m) -> disentangle."""
    entangler = build_entangler(spec, completion)
    chi = State(rotation_operator(theta) @ ket0().amps)
    joint = tensor(spec.epsilon, chi)
    all_qubits = list(range(joint.num_qubits))
    photon_qubit = joint.num_qubits - 1
    entangled = apply_unitary(joint, all_qubits, entangler)
    out = {}
    for m in (0, 1):
        st = entangled
        if m == 1:
            st = apply_unitary(st, [photon_qubit], MINUS_I_SIGMA_Y)
        out[m] = apply_unitary(st, all_qubits, entangler.conj().T)
    return out


def indistinguishability(
    spec: EntanglerSpec, theta: float, completion: str = "forward"
) -> tuple[float, float]:
    """Trace distance (and Helstrom bound) between the attacker's post-inverse
    ancilla states conditioned on message bit 0 vs 1, computed exactly."""
    states = _attack_pipeline_states(spec, theta, completion)
    ancilla = list(range(spec.ancilla_qubits))
    rho0 = partial_trace(states[0], ancilla)
    rho1 = partial_trace(states[1], ancilla)
    td = trace_distance(rho0, rho1)
    return td, helstrom_bound(td)


def counterfactual_joint_distance(spec: EntanglerSpec, theta: float) -> float:
    """Diagnostic: trace distance of the *joint* states when the attacker keeps
    the photon and skips the inverse entangler. Nonzero for generic theta,
    which shows the indistinguishability test is sensitive."""
    entangler = build_entangler(spec)
    chi = State(rotation_operator(theta) @ ket0().amps)
    joint = tensor(spec.epsilon, chi)
    all_qubits = list(range(joint.num_qubits))
    entangled = apply_unitary(joint, all_qubits, entangler)
    encoded = apply_unitary(entangled, [joint.num_qubits - 1], MINUS_I_SIGMA_Y)
    rho0 = np.outer(entangled.amps, entangled.amps.conj())
    rho1 = np.outer(encoded.amps, encoded.amps.conj())
    return trace_distance(rho0, rho1)


@dataclass(frozen=True)
class ScenarioReport:
    trials: int
    attacker_accuracy: float | None
    ci_low: float | None
    ci_high: float | None
    first_detection_pass_rate: float
    recovery_accuracy: float
    max_trace_distance: float
    helstrom_bound: float
    seed: int
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {name: getattr(self, name) for name in REPORT_FIELDS}
        out["config"] = self.config
        return out

    def to_json_line(self) -> str:
        return json.dumps(self.to_dict())

    def to_csv(self) -> str:
        header = ",".join(REPORT_FIELDS)
        row = ",".join(
            "" if getattr(self, name) is None
            else (f"{getattr(self, name):.17g}" if isinstance(getattr(self, name), float)
                  else str(getattr(self, name)))
            for name in REPORT_FIELDS
        )
        return header + "\n" + row + "\n"

    def to_text(self) -> str:
        lines = [f"trials                    {self.trials}"]
        if self.attacker_accuracy is None:
            lines.append("attacker_accuracy         n/a (no attack configured)")
        else:
            lines.append(
                f"attacker_accuracy         {self.attacker_accuracy:.6g}"
                f"  (95% CI [{self.ci_low:.6g}, {self.ci_high:.6g}])"
            )
        lines += [
            f"first_detection_pass_rate {self.first_detection_pass_rate:.6g}",
            f"recovery_accuracy         {self.recovery_accuracy:.6g}",
            f"max_trace_distance        {self.max_trace_distance:.6g}",
            f"helstrom_bound            {self.helstrom_bound:.6g}",
            f"seed                      {self.seed}",
        ]
        return "\n".join(lines) + "\n"


def derive_seed(master: int, index: int) -> int:
    """Deterministic child seed; independent of evaluation order or parallelism."""
    return int(np.random.SeedSequence([master, index]).generate_state(1)[0])


def run_trial(
    config: ProtocolConfig,
    trial_index: int,
    attack: EntanglerSpec | None,
    rule: GuessRule,
) -> RunResult:
    cfg = with_seed(config, derive_seed(config.seed, trial_index))
    factory = None
    if attack is not None:
        factory = lambda rng: EntanglingAdversary(attack, rng, rule)
    return run_protocol(cfg, factory)


def monte_carlo(
    config: ProtocolConfig,
    attack: EntanglerSpec | None = None,
    rule: GuessRule | None = None,
    trials: int = 100,
    workers: int = 1,
    theta_samples: int = 20,
    collect_transcripts: bool = False,
) -> ScenarioReport | tuple[ScenarioReport, list[str]]:
    """Aggregate ``trials`` independent protocol runs into a ScenarioReport."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rule = rule or GuessRule()

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda i: run_trial(config, i, attack, rule), range(trials)))
    else:
        results = [run_trial(config, i, attack, rule) for i in range(trials)]

    first_passes = sum(1 for r in results if r.first_detection.passed)
    decoded_bits = correct_bits = 0
    guessed_bits = guessed_correct = 0
    for r in results:
        if r.decoded_message is None:
            continue
        decoded_bits += len(r.message)
        correct_bits += sum(1 for a, b in zip(r.message, r.decoded_message) if a == b)
        if attack is not None:
            for pid, bit in zip(r.message_photon_ids, r.message):
                if pid in r.guesses:
                    guessed_bits += 1
                    guessed_correct += int(r.guesses[pid] == bit)

    if attack is not None and guessed_bits > 0:
        accuracy = guessed_correct / guessed_bits
        ci_low, ci_high = wilson_interval(guessed_correct, guessed_bits)
    else:
        accuracy = ci_low = ci_high = None

    if attack is not None:
        td_rng = np.random.default_rng(np.random.SeedSequence([config.seed, trials]))
        max_td = max(
            indistinguishability(attack, float(td_rng.uniform(0.0, 2 * np.pi)))[0]
            for _ in range(theta_samples)
        )
    else:
        max_td = 0.0

    report = ScenarioReport(
        trials=trials,
        attacker_accuracy=accuracy,
        ci_low=ci_low,
        ci_high=ci_high,
        first_detection_pass_rate=first_passes / trials,
        recovery_accuracy=(correct_bits / decoded_bits) if decoded_bits else 0.0,
        max_trace_distance=max_td,
        helstrom_bound=helstrom_bound(max_td),
        seed=config.seed,
        config=config_to_dict(config),
    )
    if collect_transcripts:
        return report, [r.transcript.serialize() for r in results]
    return report


@dataclass(frozen=True)
class SweepGrid:
    theta_prime_values: tuple[float, ...]
    alpha_sq_values: tuple[float, ...]
    theta_values: tuple[float, ...]
    ancilla_dim: int = 2

    def validate(self) -> None:
        if not (self.theta_prime_values and self.alpha_sq_values and self.theta_values):
            raise ValueError("sweep grid lists must be nonempty")
        if any(not 0.0 <= a <= 1.0 for a in self.alpha_sq_values):
            raise ValueError("alpha_sq values must lie in [0, 1]")


@dataclass(frozen=True)
class SweepRow:
    theta_prime: float
    alpha_sq: float
    theta: float
    trace_distance: float
    helstrom: float


def grid_spec(grid: SweepGrid, theta_prime: float, alpha_sq: float) -> EntanglerSpec:
    n_anc = (grid.ancilla_dim - 1).bit_length()
    return EntanglerSpec(
        epsilon=basis_state(n_anc, 0),
        epsilon_perp=basis_state(n_anc, 1),
        alpha=float(np.sqrt(alpha_sq)),
        beta=float(np.sqrt(1.0 - alpha_sq)),
        theta_prime=theta_prime,
    )


def sweep(grid: SweepGrid) -> list[SweepRow]:
    grid.validate()
    rows = []
    for tp in grid.theta_prime_values:
        for a2 in grid.alpha_sq_values:
            spec = grid_spec(grid, tp, a2)
            for theta in grid.theta_values:
                td, hb = indistinguishability(spec, theta)
                rows.append(SweepRow(tp, a2, theta, td, hb))
    return rows


def sweep_table(rows: list[SweepRow]) -> str:
    lines = ["theta_prime,alpha_sq,theta,trace_distance,helstrom"]
    for r in rows:
        lines.append(
            f"{r.theta_prime:.17g},{r.alpha_sq:.17g},{r.theta:.17g},"
            f"{r.trace_distance:.17g},{r.helstrom:.17g}"
        )
    return "\n".join(lines) + "\n"
