"""Command-line entry point: scenario execution, sweeps, fixture verification.

Scenario configs are JSON with three sections (``protocol``, ``attack``,
``run``); complex numbers are written as [re, im] pairs and unknown keys are
rejected. Exit codes: 0 success, 1 invalid config, 2 unexpected detection
failure, 3 internal invariant violation.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from .analysis import SweepGrid, indistinguishability, monte_carlo, sweep, sweep_table
from .attack import (
    ENCODING_SHIFT,
    EntanglerSpec,
    GuessRule,
    build_entangler,
    qgwz_fixture,
    qgwz_spec,
    random_entangler_spec,
)
from .protocol import ConfigError, ProtocolConfig
from .quantum import (
    MINUS_I_SIGMA_Y,
    InvariantError,
    State,
    canonical_angle,
    ket0,
    overlap,
    rotation_operator,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DETECTION = 2
EXIT_INVARIANT = 3


def _complex_from_pair(value, key: str) -> complex:
    if not (isinstance(value, (list, tuple)) and len(value) == 2):
        raise ConfigError(f"{key}: expected a [re, im] pair, got {value!r}")
    return complex(float(value[0]), float(value[1]))


def _state_from_pairs(value, key: str) -> State:
    try:
        amps = np.array([_complex_from_pair(v, key) for v in value])
        return State(amps)
    except (InvariantError, ValueError) as exc:
        raise ConfigError(f"{key}: {exc}")


def _check_keys(section: dict, allowed: set[str], name: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {name!r} section: {', '.join(sorted(unknown))}")


@dataclass
class Scenario:
    protocol: ProtocolConfig
    attack_kind: str  # none | qgwz | general
    entangler: EntanglerSpec | None
    rule: GuessRule
    trials: int
    grid: SweepGrid | None
    raw: dict


def parse_scenario(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ConfigError("top-level config must be an object")
    _check_keys(doc, {"protocol", "attack", "run"}, "top-level")

    proto = doc.get("protocol")
    if proto is None:
        raise ConfigError("missing required section 'protocol'")
    _check_keys(
        proto,
        {"agents", "message_bits", "message_length", "check_fraction_first",
         "second_checks", "angle_distribution", "adversary_position", "seed"},
        "protocol",
    )
    if "agents" not in proto:
        raise ConfigError("protocol: missing required key 'agents'")
    bits = proto.get("message_bits")
    config = ProtocolConfig(
        num_agents=int(proto["agents"]),
        message_length=int(proto.get("message_length", 32)),
        message_bits=tuple(bits) if bits is not None else None,
        check_fraction_first=float(proto.get("check_fraction_first", 0.5)),
        num_second_checks=int(proto.get("second_checks", 4)),
        angle_distribution=proto.get("angle_distribution", "uniform"),
        adversary_position=proto.get("adversary_position"),
        seed=int(proto.get("seed", 0)),
    )
    config.validate()

    attack = doc.get("attack", {"kind": "none"})
    _check_keys(
        attack,
        {"kind", "ancilla_state", "epsilon", "epsilon_perp", "alpha", "beta",
         "theta_prime", "guess_rule"},
        "attack",
    )
    kind = attack.get("kind", "none")
    if kind not in ("none", "qgwz", "general"):
        raise ConfigError(f"attack.kind must be none|qgwz|general, got {kind!r}")
    try:
        if kind == "qgwz":
            ancilla = attack.get("ancilla_state")
            if ancilla is None:
                raise ConfigError("attack: qgwz kind requires 'ancilla_state'")
            entangler = qgwz_spec(_state_from_pairs(ancilla, "attack.ancilla_state"))
        elif kind == "general":
            for key in ("epsilon", "epsilon_perp", "alpha", "beta", "theta_prime"):
                if key not in attack:
                    raise ConfigError(f"attack: general kind requires '{key}'")
            entangler = EntanglerSpec(
                epsilon=_state_from_pairs(attack["epsilon"], "attack.epsilon"),
                epsilon_perp=_state_from_pairs(attack["epsilon_perp"], "attack.epsilon_perp"),
                alpha=_complex_from_pair(attack["alpha"], "attack.alpha"),
                beta=_complex_from_pair(attack["beta"], "attack.beta"),
                theta_prime=float(attack["theta_prime"]),
            )
        else:
            entangler = None
    except InvariantError as exc:
        raise ConfigError(f"attack: {exc}")

    rule_doc = attack.get("guess_rule", [0, 1])
    if not (isinstance(rule_doc, (list, tuple)) and len(rule_doc) == 2):
        raise ConfigError("attack.guess_rule must be a [eps_bit, eps_perp_bit] pair")
    rule = GuessRule(int(rule_doc[0]), int(rule_doc[1]))

    run = doc.get("run", {})
    _check_keys(run, {"trials", "sweep"}, "run")
    trials = int(run.get("trials", 100))
    if trials < 1:
        raise ConfigError("run.trials must be >= 1")
    grid = None
    if "sweep" in run:
        sw = run["sweep"]
        _check_keys(sw, {"theta_prime", "alpha_sq", "theta", "ancilla_dim"}, "run.sweep")
        grid = SweepGrid(
            theta_prime_values=tuple(float(v) for v in sw.get("theta_prime", ())),
            alpha_sq_values=tuple(float(v) for v in sw.get("alpha_sq", ())),
            theta_values=tuple(float(v) for v in sw.get("theta", ())),
            ancilla_dim=int(sw.get("ancilla_dim", 2)),
        )
    return Scenario(config, kind, entangler, rule, trials, grid, doc)


def serialize_scenario(s: Scenario) -> dict:
    proto = {
        "agents": s.protocol.num_agents,
        "check_fraction_first": s.protocol.check_fraction_first,
        "second_checks": s.protocol.num_second_checks,
        "angle_distribution": s.protocol.angle_distribution,
        "seed": s.protocol.seed,
    }
    if s.protocol.message_bits is not None:
        proto["message_bits"] = list(s.protocol.message_bits)
    else:
        proto["message_length"] = s.protocol.message_length
    if s.protocol.adversary_position is not None:
        proto["adversary_position"] = s.protocol.adversary_position

    attack: dict = {"kind": s.attack_kind, "guess_rule": [s.rule.eps_bit, s.rule.eps_perp_bit]}
    if s.attack_kind == "qgwz":
        attack["ancilla_state"] = s.raw["attack"]["ancilla_state"]
    elif s.attack_kind == "general":
        spec = s.entangler
        attack.update(
            epsilon=[[a.real, a.imag] for a in spec.epsilon.amps],
            epsilon_perp=[[a.real, a.imag] for a in spec.epsilon_perp.amps],
            alpha=[spec.alpha.real, spec.alpha.imag],
            beta=[spec.beta.real, spec.beta.imag],
            theta_prime=spec.theta_prime,
        )
    run: dict = {"trials": s.trials}
    if s.grid is not None:
        run["sweep"] = {
            "theta_prime": list(s.grid.theta_prime_values),
            "alpha_sq": list(s.grid.alpha_sq_values),
            "theta": list(s.grid.theta_values),
            "ancilla_dim": s.grid.ancilla_dim,
        }
    return {"protocol": proto, "attack": attack, "run": run}


def load_scenario(path: str) -> Scenario:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: line {exc.lineno}: {exc.msg}")
    return parse_scenario(doc)


def _write_output(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    scenario = load_scenario(args.config)
    config = scenario.protocol
    if args.seed is not None:
        from .protocol import with_seed

        config = with_seed(config, args.seed)
    trials = args.trials if args.trials is not None else scenario.trials

    result = monte_carlo(
        config,
        attack=scenario.entangler,
        rule=scenario.rule,
        trials=trials,
        workers=args.workers,
        collect_transcripts=args.transcripts is not None,
    )
    if args.transcripts is not None:
        report, transcripts = result
        os.makedirs(args.transcripts, exist_ok=True)
        for i, text in enumerate(transcripts):
            with open(os.path.join(args.transcripts, f"trial_{i:05d}.log"), "w") as fh:
                fh.write(text)
    else:
        report = result

    if args.format == "json-lines":
        _write_output(report.to_json_line() + "\n", args.out)
    elif args.format == "csv":
        _write_output(report.to_csv(), args.out)
    else:
        _write_output(report.to_text(), args.out)

    if report.first_detection_pass_rate < 1.0:
        # Every supported attack kind escapes detection; a failure here means
        # the honest expectation was violated.
        return EXIT_DETECTION
    return EXIT_OK


DEFAULT_GRID = SweepGrid(
    theta_prime_values=tuple(float(v) for v in np.linspace(0.0, 3 * np.pi / 2, 5)),
    alpha_sq_values=(0.0, 0.25, 0.5, 0.75, 1.0),
    theta_values=tuple(float(v) for v in np.linspace(0.0, 2 * np.pi, 5, endpoint=False)),
)


def cmd_sweep(args) -> int:
    scenario = load_scenario(args.config)
    grid = scenario.grid or DEFAULT_GRID
    try:
        rows = sweep(grid)
    except ValueError as exc:
        raise ConfigError(str(exc))
    _write_output(sweep_table(rows), args.out)
    return EXIT_OK


def _verify_fixtures() -> list[tuple[str, float, float]]:
    """(name, computed value, tolerance) triples; value must be <= tolerance."""
    rng = np.random.default_rng(20260823)
    checks: list[tuple[str, float, float]] = []

    # Rotation additivity U(a)U(b) = U(a+b).
    err = 0.0
    for _ in range(100):
        a, b = rng.uniform(0.0, 2 * np.pi, size=2)
        err = max(err, float(np.max(np.abs(
            rotation_operator(a) @ rotation_operator(b) - rotation_operator(a + b)
        ))))
    checks.append(("rotation-additivity", err, 1e-12))

    # The encoding operator equals U(-3*pi/2) entrywise.
    checks.append((
        "encoding-matrix",
        float(np.max(np.abs(rotation_operator(ENCODING_SHIFT) - MINUS_I_SIGMA_Y))),
        1e-15,
    ))

    # Encoding shifts the photon angle by -3*pi/2 up to global phase.
    worst = 0.0
    for _ in range(100):
        theta = rng.uniform(0.0, 2 * np.pi)
        encoded = State(MINUS_I_SIGMA_Y @ rotation_operator(theta) @ ket0().amps)
        shifted = State(rotation_operator(theta + ENCODING_SHIFT) @ ket0().amps)
        worst = max(worst, 1.0 - abs(overlap(encoded, shifted)))
    checks.append(("encode-angle", worst, 1e-12))

    # Attacker-held qubit pair is identical for both message bits.
    _, _, ht0, ht1 = qgwz_fixture(rng.uniform(0.0, 2 * np.pi))
    checks.append(("HT-norm", abs(float(np.linalg.norm(ht0.amps)) - 1.0), 1e-12))
    checks.append(("HT-overlap", abs(abs(overlap(ht0, ht1)) - 1.0), 1e-12))

    # Entangler inverse and round-trip indistinguishability.
    inv_err = td_max = 0.0
    for _ in range(20):
        spec = random_entangler_spec(rng)
        ent = build_entangler(spec)
        inv_err = max(inv_err, float(np.max(np.abs(
            ent.conj().T @ ent - np.eye(ent.shape[0])
        ))))
        for _ in range(5):
            td, _ = indistinguishability(spec, float(rng.uniform(0.0, 2 * np.pi)))
            td_max = max(td_max, td)
    checks.append(("entangler-inverse", inv_err, 1e-10))
    checks.append(("ancilla-indistinguishability", td_max, 1e-10))

    # Canonicalized special-case angle reproduces the encoding rotation.
    qg = qgwz_spec(State(np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)))
    checks.append((
        "qgwz-theta-prime",
        abs(qg.theta_prime - canonical_angle(np.pi / 2))
        + float(np.max(np.abs(rotation_operator(qg.theta_prime) - MINUS_I_SIGMA_Y))),
        1e-12,
    ))
    return checks


def cmd_verify(args) -> int:
    failures = 0
    for name, value, tol in _verify_fixtures():
        status = "PASS" if value <= tol else "FAIL"
        if status == "FAIL":
            failures += 1
        print(f"{status} {name}: value={value:.3e} tolerance={tol:.0e}")
    if failures:
        print(f"{failures} fixture(s) failed")
        return EXIT_INVARIANT
    print("all fixtures passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsslab",
        description="Quantum secret sharing protocol and entangling-attack laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a Monte Carlo scenario")
    run.add_argument("config", help="path to a JSON scenario config")
    run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run.add_argument("--trials", type=int, default=None, help="override the trial count")
    run.add_argument("--out", default=None, help="write the report here (default stdout)")
    run.add_argument(
        "--format", choices=("json-lines", "csv", "text"), default="text",
        help="report output format",
    )
    run.add_argument("--workers", type=int, default=1, help="parallel trial workers")
    run.add_argument(
        "--transcripts", default=None, metavar="DIR",
        help="also write one transcript log per trial into DIR",
    )
    run.set_defaults(func=cmd_run)

    sw = sub.add_parser("sweep", help="sweep entangler parameters, tabulating trace distances")
    sw.add_argument("config", help="path to a JSON scenario config")
    sw.add_argument("--out", default=None, help="write the table here (default stdout)")
    sw.set_defaults(func=cmd_sweep)

    verify = sub.add_parser("verify", help="run the built-in fixture suite")
    verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
