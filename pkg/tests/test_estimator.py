import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from gaze9.estimator import (
    EvalReport,
    GazeDirectionClassifier,
    NoEyesDetected,
    disambiguate,
    evaluate,
    write_history_csv,
)
from gaze9.synth import SynthParams, render_eye_strip


def tiny_clf(**kw):
    defaults = dict(width=64, filters=4, hidden=8, batch_size=4,
                    learning_rate=0.05, seed=3)
    defaults.update(kw)
    return GazeDirectionClassifier(**defaults)


def small_strips(states, seeds, width=64):
    params = SynthParams(width=width)
    X = np.stack([render_eye_strip(s, params, seed=sd)
                  for s, sd in zip(states, seeds)])
    y = np.array(states, dtype=np.int64)
    return X, y


class TestFit:
    def test_memorizes_a_small_batch(self):
        # 4 distinct strips, 4 distinct labels: loss must collapse
        X, y = small_strips([0, 2, 5, 8], [11, 12, 13, 14])
        clf = tiny_clf(epochs=60).fit(X, y)
        assert clf.history_[-1]["loss"] < 0.05
        assert np.array_equal(clf.predict(X), y)

    def test_history_has_one_entry_per_epoch(self):
        X, y = small_strips([1, 5, 9, 4], [1, 2, 3, 4])
        clf = tiny_clf(epochs=3).fit(X, y)
        assert [h["epoch"] for h in clf.history_] == [0, 1, 2]
        assert all("loss" in h for h in clf.history_)

    def test_validation_column_present_only_when_given(self):
        X, y = small_strips([1, 5, 9, 4], [1, 2, 3, 4])
        plain = tiny_clf(epochs=2).fit(X, y)
        assert "val_top1" not in plain.history_[0]
        held = tiny_clf(epochs=2).fit(X, y, validation=(X, y))
        assert 0.0 <= held.history_[0]["val_top1"] <= 1.0

    def test_same_seed_reproduces_history(self):
        X, y = small_strips([3, 7, 0, 5], [5, 6, 7, 8])
        a = tiny_clf(epochs=2).fit(X, y)
        b = tiny_clf(epochs=2).fit(X, y)
        assert a.history_ == b.history_

    def test_predict_before_fit_is_an_error(self):
        X, _ = small_strips([5], [1])
        with pytest.raises(NotFittedError):
            tiny_clf().predict(X)

    def test_rejects_wrong_strip_width(self):
        X, y = small_strips([5, 5], [1, 2], width=128)
        with pytest.raises(ValueError):
            tiny_clf().fit(X, y)


class TestWeightsRoundTrip:
    def test_saved_model_predicts_identically(self, tmp_path):
        X, y = small_strips([0, 2, 5, 8], [21, 22, 23, 24])
        clf = tiny_clf(epochs=2).fit(X, y)
        dest = tmp_path / "w.g9w"
        clf.save_weights(dest)
        again = GazeDirectionClassifier.from_weights(dest)
        assert np.array_equal(clf.predict_proba(X), again.predict_proba(X))
        assert again.width == 64 and again.filters == 4 and again.hidden == 8

    def test_predict_strip_matches_batch_row(self):
        X, y = small_strips([4, 6], [31, 32])
        clf = tiny_clf(epochs=1).fit(X, y)
        assert np.array_equal(clf.predict_strip(X[0]), clf.predict_proba(X)[0])


class _FixedProba:
    def __init__(self, probs):
        self.probs = np.asarray(probs, dtype=np.float64)

    def predict_proba(self, X):
        return self.probs[: len(X)]


class TestEvaluate:
    def test_perfect_predictor(self):
        y = np.arange(10)
        report = evaluate(_FixedProba(np.eye(10)), np.zeros((10, 1)), y)
        assert report.top1 == 100.0 and report.top2 == 100.0
        assert report.confusion == np.eye(10, dtype=int).tolist()
        assert report.counts == [1] * 10

    def test_always_second_guess(self):
        # truth sits at the second-highest score on every sample
        y = np.arange(10)
        probs = np.full((10, 10), 0.01)
        for i in range(10):
            probs[i, (i + 1) % 10] = 0.5
            probs[i, i] = 0.3
        report = evaluate(_FixedProba(probs), np.zeros((10, 1)), y)
        assert report.top1 == 0.0 and report.top2 == 100.0

    def test_random_predictor_monte_carlo(self):
        # scores independent of truth: top-1 near 10%, top-2 near 20%
        rng = np.random.default_rng(99)
        n = 4000
        probs = rng.random((n, 10))
        y = rng.integers(0, 10, size=n)
        report = evaluate(_FixedProba(probs), np.zeros((n, 1)), y)
        assert abs(report.top1 - 10.0) < 2.5
        assert abs(report.top2 - 20.0) < 3.0

    def test_confusion_rows_sum_to_counts(self):
        rng = np.random.default_rng(5)
        probs = rng.random((60, 10))
        y = rng.integers(0, 10, size=60)
        report = evaluate(_FixedProba(probs), np.zeros((60, 1)), y)
        assert sum(report.counts) == 60
        for row, count in zip(report.confusion, report.counts):
            assert sum(row) == count

    def test_report_json_round_trip(self):
        y = np.arange(10)
        report = evaluate(_FixedProba(np.eye(10)), np.zeros((10, 1)), y)
        again = EvalReport.from_json(report.to_json())
        assert again == report

    def test_report_rejects_top1_above_top2(self):
        with pytest.raises(ValueError):
            EvalReport(top1=90.0, top2=80.0,
                       confusion=np.eye(10, dtype=int).tolist(), counts=[1] * 10)

    def test_report_rejects_inconsistent_counts(self):
        with pytest.raises(ValueError):
            EvalReport(top1=100.0, top2=100.0,
                       confusion=np.eye(10, dtype=int).tolist(), counts=[2] * 10)

    def test_empty_split_is_an_error(self):
        with pytest.raises(ValueError):
            evaluate(_FixedProba(np.eye(10)), np.zeros((0, 1)),
                     np.zeros(0, dtype=np.int64))


class TestDisambiguate:
    def test_picks_most_confident_candidate(self):
        probs = np.array([[0.1] * 10, [0.02] * 9 + [0.82], [0.3] + [0.07] * 9])
        idx, state, score = disambiguate(_FixedProba(probs),
                                         [np.zeros((32, 64, 3))] * 3)
        assert (idx, state) == (1, 9)
        assert score == pytest.approx(0.82)

    def test_tie_goes_to_lowest_index(self):
        probs = np.array([[0.5] + [0.5 / 9] * 9, [0.5] + [0.5 / 9] * 9])
        idx, state, _ = disambiguate(_FixedProba(probs),
                                     [np.zeros((32, 64, 3))] * 2)
        assert (idx, state) == (0, 0)

    def test_empty_candidates_raise(self):
        with pytest.raises(NoEyesDetected):
            disambiguate(_FixedProba(np.eye(10)), [])


class TestHistoryCsv:
    def test_writes_header_and_rows(self, tmp_path):
        history = [{"epoch": 0, "loss": 2.3, "val_top1": 0.5},
                   {"epoch": 1, "loss": 1.1, "val_top1": 0.75}]
        dest = tmp_path / "history.csv"
        write_history_csv(history, dest)
        lines = dest.read_text().strip().splitlines()
        assert lines[0] == "epoch,loss,val_top1"
        assert lines[1].startswith("0,2.3")
        assert len(lines) == 3

    def test_validation_free_history_leaves_column_blank(self, tmp_path):
        dest = tmp_path / "history.csv"
        write_history_csv([{"epoch": 0, "loss": 2.0}], dest)
        assert dest.read_text().strip().splitlines()[1] == "0,2.000000,"
