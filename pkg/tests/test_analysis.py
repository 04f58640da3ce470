import numpy as np
import pytest

from qsslab.analysis import (
    ScenarioReport,
    SweepGrid,
    counterfactual_joint_distance,
    grid_spec,
    helstrom_bound,
    indistinguishability,
    monte_carlo,
    sweep,
    sweep_table,
    wilson_interval,
)
from qsslab.attack import EntanglerSpec, GuessRule, qgwz_spec, random_entangler_spec
from qsslab.protocol import ProtocolConfig
from qsslab.quantum import State, basis_state

BELL = State(np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2))


def test_indistinguishability_below_tolerance(rng):
    for _ in range(30):
        spec = random_entangler_spec(rng)
        theta = float(rng.uniform(0, 2 * np.pi))
        td, hb = indistinguishability(spec, theta)
        assert td <= 1e-10
        assert hb <= 0.5 + 5e-11


def test_indistinguishability_beta_zero_exact():
    spec = EntanglerSpec(basis_state(1, 0), basis_state(1, 1), 1.0, 0.0, 0.7)
    td, hb = indistinguishability(spec, 0.9)
    assert td == pytest.approx(0.0, abs=1e-14)
    assert hb == pytest.approx(0.5, abs=1e-14)


def test_counterfactual_pipeline_is_sensitive(rng):
    # Keeping the photon (no inverse entangler) the bit is visible: this
    # confirms the indistinguishability test could detect a broken pipeline.
    spec = qgwz_spec(BELL)
    assert counterfactual_joint_distance(spec, 0.7) > 0.1


def test_helstrom_relation():
    assert helstrom_bound(0.0) == 0.5
    assert helstrom_bound(1.0) == 1.0
    for td in (0.0, 0.3, 0.9):
        assert abs(helstrom_bound(td) - 0.5 * (1 + td)) <= 1e-15


def test_wilson_interval_contains_proportion():
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi
    lo, hi = wilson_interval(100, 100)
    assert hi == 1.0 and lo > 0.9
    lo, hi = wilson_interval(0, 100)
    assert lo == pytest.approx(0.0, abs=1e-12) and hi < 0.1


def honest_config(**kw):
    defaults = dict(num_agents=3, message_length=16, num_second_checks=2,
                    check_fraction_first=0.5, seed=42)
    defaults.update(kw)
    return ProtocolConfig(**defaults)


def test_monte_carlo_honest():
    report = monte_carlo(honest_config(), trials=50)
    assert report.recovery_accuracy == 1.0
    assert report.first_detection_pass_rate == 1.0
    assert report.attacker_accuracy is None
    assert report.max_trace_distance == 0.0
    assert report.helstrom_bound == 0.5


def test_monte_carlo_attack_report_fields():
    report = monte_carlo(honest_config(), attack=qgwz_spec(BELL), trials=40)
    assert report.first_detection_pass_rate == 1.0
    assert report.recovery_accuracy == 1.0
    assert 0.0 <= report.attacker_accuracy <= 1.0
    assert report.ci_low <= report.attacker_accuracy <= report.ci_high
    assert report.max_trace_distance <= 1e-10
    assert abs(report.helstrom_bound - 0.5 * (1 + report.max_trace_distance)) <= 1e-15


def test_monte_carlo_reproducible():
    a = monte_carlo(honest_config(), attack=qgwz_spec(BELL), trials=20)
    b = monte_carlo(honest_config(), attack=qgwz_spec(BELL), trials=20)
    assert a == b
    assert a.to_json_line() == b.to_json_line()


def test_monte_carlo_parallel_matches_serial():
    serial = monte_carlo(honest_config(), attack=qgwz_spec(BELL), trials=16, workers=1)
    parallel = monte_carlo(honest_config(), attack=qgwz_spec(BELL), trials=16, workers=4)
    assert serial == parallel


def test_monte_carlo_transcripts_deterministic():
    _, ta = monte_carlo(honest_config(), trials=5, collect_transcripts=True)
    _, tb = monte_carlo(honest_config(), trials=5, collect_transcripts=True)
    assert ta == tb
    assert len(ta) == 5


def test_monte_carlo_rejects_zero_trials():
    with pytest.raises(ValueError):
        monte_carlo(honest_config(), trials=0)


def test_report_serialization_roundtrip():
    report = monte_carlo(honest_config(), trials=5)
    import json

    doc = json.loads(report.to_json_line())
    assert doc["trials"] == 5
    assert doc["recovery_accuracy"] == 1.0
    csv = report.to_csv().splitlines()
    assert csv[0].split(",")[0] == "trials"
    assert "recovery_accuracy" in report.to_text()


def test_sweep_full_grid():
    grid = SweepGrid(
        theta_prime_values=tuple(np.linspace(0, 3 * np.pi / 2, 5)),
        alpha_sq_values=(0.0, 0.25, 0.5, 0.75, 1.0),
        theta_values=tuple(np.linspace(0, 2 * np.pi, 5, endpoint=False)),
    )
    rows = sweep(grid)
    assert len(rows) == 125
    assert all(r.trace_distance <= 1e-10 for r in rows)
    zero_rows = [r for r in rows if r.theta_prime == 0.0]
    assert all(r.trace_distance <= 1e-12 for r in zero_rows)


def test_sweep_single_point():
    rows = sweep(SweepGrid((0.5,), (0.5,), (1.0,)))
    assert len(rows) == 1


def test_sweep_order_independent():
    grid = SweepGrid((0.3, 1.2), (0.25, 0.75), (0.0, 2.0))
    rows = {(r.theta_prime, r.alpha_sq, r.theta): r.trace_distance for r in sweep(grid)}
    for (tp, a2, th), td in rows.items():
        spec = grid_spec(grid, tp, a2)
        assert indistinguishability(spec, th)[0] == td


def test_sweep_rejects_empty_grid():
    with pytest.raises(ValueError):
        sweep(SweepGrid((), (0.5,), (1.0,)))


def test_sweep_table_format():
    text = sweep_table(sweep(SweepGrid((0.5,), (0.5,), (1.0,))))
    lines = text.strip().splitlines()
    assert lines[0] == "theta_prime,alpha_sq,theta,trace_distance,helstrom"
    assert len(lines) == 2
