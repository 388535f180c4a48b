import math

import pytest

import stablearena as sa


def small_dataset():
    records = []
    for _ in range(3):
        records.append(("A", "B", "j1", 1.0))
    records.append(("A", "B", "j1", 0.0))
    records.append(("B", "C", "j2", 1.0))
    records.append(("C", "B", "j2", 0.5))
    records.append(("A", "C", "j1", 1.0))
    records.append(("C", "A", "j2", 1.0))
    return sa.Dataset(records)


def test_dataset_registries():
    d = small_dataset()
    assert len(d) == 8
    assert d.models == ["A", "B", "C"]
    assert d.annotators == ["j1", "j2"]
    assert sa.validate(d)["errors"] == []


def test_invalid_outcome_raises():
    with pytest.raises(sa.InvalidArgument):
        sa.Dataset([("A", "B", "j", 0.3)])


def test_two_player_closed_form():
    d = sa.Dataset([("A", "B", "j", 1.0)] * 3 + [("A", "B", "j", 0.0)])
    for fit in (sa.fit_gd(d, epochs=20000, grad_tol=1e-12), sa.fit_newton(d)):
        r = fit.ratings
        assert r["A"] - r["B"] == pytest.approx(math.log(3.0), abs=1e-6)


def test_melo_gradient_zero_at_fit():
    d = small_dataset()
    fit = sa.fit_newton(d)
    assert max(abs(g) for g in sa.gradient(fit.ratings, d)) < 1e-8
    h = sa.hessian(fit.ratings, d)
    assert h.shape == (3, 3)


def test_joint_fit_abilities_sum_to_one():
    d, truth = sa.synthetic_arena(n_models=6, n_annotators=4, records_per_annotator=80, seed=3)
    fit = sa.fit_joint(d, epochs=300)
    assert sum(fit.abilities.values()) == pytest.approx(1.0, abs=1e-9)
    assert len(fit.loss_trace) == fit.epochs_run


def test_flip_detection():
    d, _ = sa.synthetic_arena(seed=4)
    targets = sa.sample_targets(d, 0.2, seed=4)
    perturbed, truth = sa.perturb(d, targets, "flip", seed=4)
    assert sum(truth.values()) == len(targets)
    fit = sa.fit_joint(perturbed)
    assert sa.detection_f1(fit.abilities, targets, 0.0) >= 0.9


def test_metrics():
    assert sa.mse([0.5, 0.5], [1.0, 0.0]) == pytest.approx(0.25)
    assert sa.auc([0.1, 0.9], [0.0, 1.0]) == 1.0
    assert sa.ranking_consistency(["a", "b", "c"], ["a", "c", "b"]) == pytest.approx(2 / 3)
    same, rev = ["a", "b", "c"], ["c", "b", "a"]
    assert sa.multi_run_consistency([same, same, rev, rev, rev]) == pytest.approx(0.4)
    with pytest.raises(sa.UndefinedAuc):
        sa.auc([0.2, 0.3], [1.0, 1.0])


def test_arena_round_trip():
    d, _ = sa.synthetic_arena(n_models=5, n_annotators=3, records_per_annotator=60, seed=1)
    state, accepted, dropped, rejected = sa.arena_ingest(sa.ArenaState(), d.records)
    assert (accepted, dropped, rejected) == (len(d), 0, 0)
    state, board, banned = sa.arena_evaluate(state, delta=50, epochs=200)
    assert len(board) == 5
    assert banned == []
    assert sa.load_state(sa.save_state(state)) == state
    with pytest.raises(sa.ParseError):
        sa.load_state(sa.save_state(state)[:40])


def test_sha256():
    assert sa.sha256_hex(b"abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
