import numpy as np
import pytest

from luderscope import closed_form, linalg, qobjects
from luderscope.errors import DimensionError, DomainError, UndefinedAdvantageError
from luderscope import tester as tst
from luderscope.tester import (
    Ensemble,
    SequentialStrategy,
    diamond_distance,
    discriminate,
    instrument_advantage,
    luders_distance,
    measurement_distance,
    optimize_tester,
    sequential_success,
    uniform_tester,
    validate_tester,
)

Z, X = qobjects.z_povm(), qobjects.x_povm()
HALF = (0.5, 0.5)


def luders_zx():
    return Ensemble(HALF, (qobjects.luders_channel_choi(Z), qobjects.luders_channel_choi(X)))


def test_identical_channels_give_half():
    c = qobjects.luders_channel_choi(Z)
    _, report = optimize_tester(Ensemble(HALF, (c, c)))
    assert report.primal_value == pytest.approx(0.5, abs=1e-7)


def test_zx_measurement_value():
    _, _, report = discriminate([Z, X], HALF, "measurement")
    assert report.primal_value == pytest.approx(np.cos(np.pi / 8) ** 2, abs=1e-6)
    assert report.status == "optimal"


def test_zx_luders_value_and_certificate():
    t, report = optimize_tester(luders_zx())
    assert report.primal_value == pytest.approx(0.5 + np.sqrt(3) / 4, abs=1e-6)
    assert report.dual_bound >= report.primal_value - 1e-12
    assert report.gap <= 1e-7
    assert validate_tester(t, 4).ok
    assert tst.tester_success(t, luders_zx()) == pytest.approx(report.primal_value, abs=1e-9)


def test_symmetry_reduction_agrees():
    _, full = optimize_tester(luders_zx())
    _, reduced = optimize_tester(luders_zx(), symmetry_reduction=True)
    assert reduced.primal_value == pytest.approx(full.primal_value, abs=1e-7)


def test_uniform_tester_is_feasible_and_weak():
    e = luders_zx()
    t = uniform_tester(e)
    assert validate_tester(t, e.d_out).ok
    assert tst.tester_success(t, e) == pytest.approx(0.5)
    c = qobjects.luders_channel_choi(Z)
    assert tst.tester_success(uniform_tester(Ensemble((0.5, 0.5), (c, c))), Ensemble((0.5, 0.5), (c, c))) == pytest.approx(0.5)


def test_dual_bound_caps_random_testers(rng):
    e = luders_zx()
    _, report = optimize_tester(e)
    for _ in range(5):
        raw = [linalg.random_density_matrix(8, rng) / 2 for _ in range(2)]
        sigma = linalg.random_density_matrix(2, rng)
        total = sum(raw)
        left = linalg.psd_sqrt(np.kron(sigma, np.eye(4))) @ np.linalg.inv(linalg.psd_sqrt(total))
        t = tst.Tester(tuple(left @ r @ left.conj().T for r in raw), sigma)
        assert validate_tester(t, 4).ok
        assert tst.tester_success(t, e) <= report.dual_bound + 1e-9


def test_validate_tester_flags_unnormalized():
    t = uniform_tester(luders_zx())
    broken = tst.Tester(tuple(2 * op for op in t.operators), t.sigma)
    assert not validate_tester(broken, 4).ok


def test_ensemble_validation():
    c = qobjects.mp_channel_choi(Z)
    with pytest.raises(DomainError):
        Ensemble((0.6, 0.6), (c, c))
    with pytest.raises(DimensionError):
        Ensemble(HALF, (c, qobjects.luders_channel_choi(Z)))
    with pytest.raises(DimensionError):
        Ensemble((1.0,), (c, c))


def test_single_hypothesis_is_certain():
    _, _, report = discriminate([Z], (1.0,), "instrument")
    assert report.primal_value == pytest.approx(1.0, abs=1e-7)


def test_unequal_outcome_counts_are_padded():
    _, _, report = discriminate([Z, qobjects.trine_povm(0.0, 0.0)], HALF, "measurement")
    assert 0.5 <= report.primal_value <= 1.0 and report.status == "optimal"


def test_unknown_mode():
    with pytest.raises(DomainError):
        discriminate([Z, X], HALF, "telepathy")


def test_diamond_distance_examples():
    c = qobjects.mp_channel_choi(Z)
    value, (lo, hi) = diamond_distance(c, c)
    assert value == pytest.approx(0.0, abs=1e-7) and lo <= hi
    value, _ = diamond_distance(qobjects.luders_channel_choi(Z), qobjects.luders_channel_choi(X))
    assert value == pytest.approx(np.sqrt(3), abs=1e-6)


def test_measurement_distance_examples():
    assert measurement_distance(Z, Z) == pytest.approx(0.0, abs=1e-7)
    assert measurement_distance(Z, X) == pytest.approx(np.sqrt(2), abs=1e-6)
    assert measurement_distance(Z, qobjects.w_povm(0.25)) == pytest.approx(0.5, abs=1e-6)


def test_luders_distance_examples():
    assert luders_distance(Z, Z) == pytest.approx(0.0, abs=1e-7)
    assert luders_distance(Z, X) == pytest.approx(np.sqrt(3), abs=1e-6)
    # optimum is 1/(2 - sqrt p) = 2/3 at p = 1/4
    assert luders_distance(Z, qobjects.w_povm(0.25)) == pytest.approx(4 * (2 / 3 - 0.5), abs=1e-6)


def test_instrument_advantage_examples():
    assert instrument_advantage(Z, X) == pytest.approx(np.sqrt(1.5), abs=1e-5)
    assert instrument_advantage(Z, qobjects.w_povm(0.25)) == pytest.approx(4 / 3, abs=1e-5)
    with pytest.raises(UndefinedAdvantageError):
        instrument_advantage(Z, Z)


def test_advantage_within_projective_range(rng):
    for _ in range(3):
        a = qobjects.projective_qubit_povm(linalg.random_pure_state(2, rng))
        b = qobjects.projective_qubit_povm(linalg.random_pure_state(2, rng))
        assert 1 - 1e-5 <= instrument_advantage(a, b) <= np.sqrt(2) + 1e-5


def test_sequential_trivial_guess():
    always_0 = (np.eye(2), np.zeros((2, 2)))
    s = SequentialStrategy(np.eye(2) / 2, (always_0, always_0))
    assert sequential_success([Z, X], (0.3, 0.7), s) == pytest.approx(0.3)


def test_sequential_zx_attains_optimum():
    pair = closed_form.ProjectivePair(np.array([1, 0]), np.array([1, 1]) / np.sqrt(2))
    s = closed_form.optimal_sequential_strategy(pair)
    assert sequential_success(pair.povms(), HALF, s) == pytest.approx(0.5 + np.sqrt(3) / 4, abs=1e-9)


def test_sequential_never_beats_sdp(rng):
    pair = closed_form.ProjectivePair(linalg.random_pure_state(2, rng), linalg.random_pure_state(2, rng))
    s = closed_form.optimal_sequential_strategy(pair)
    _, _, report = discriminate(pair.povms(), HALF, "instrument")
    assert sequential_success(pair.povms(), HALF, s) <= report.dual_bound + 1e-9


def test_sdp_report_json():
    _, _, report = discriminate([Z, X], HALF, "measurement")
    d = report.to_dict()
    assert set(d) == {"primal", "dual", "gap", "status", "iterations"}
    assert d["status"] == "optimal"
