"""CSV round-trips, normalization statistics, model serialization equivalence."""

import json

import numpy as np
import pytest

from olppmon.dataio import (Dataset, load_csv, load_model,
                            normalize_apply, normalize_fit, records_from_csv,
                            records_to_csv, save_csv, save_model)
from olppmon.datagen import NumericalConfig, gen_numerical
from olppmon.monitoring import MonitoringConfig, detect, detect_series, fit_monitoring


class TestCsv:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        ds = Dataset(rng.standard_normal((2, 2)), ["a", "b"])
        path = tmp_path / "d.csv"
        save_csv(ds, path)
        back = load_csv(path)
        np.testing.assert_array_equal(back.x, ds.x)
        assert back.variable_names == ["a", "b"]
        assert back.labels is None

    def test_labels_round_trip(self, tmp_path):
        ds = Dataset(np.ones((2, 3)), ["a", "b"], labels=np.array([0, 1, 1]))
        save_csv(ds, tmp_path / "d.csv")
        back = load_csv(tmp_path / "d.csv")
        np.testing.assert_array_equal(back.labels, [0, 1, 1])

    def test_missing_label_column_leaves_labels_absent(self, tmp_path):
        (tmp_path / "d.csv").write_text("a,b\n1,2\n3,4\n")
        assert load_csv(tmp_path / "d.csv").labels is None

    def test_te_shaped_file(self, tmp_path):
        rng = np.random.default_rng(2)
        ds = Dataset(rng.standard_normal((33, 960)),
                     [f"v{i}" for i in range(33)])
        save_csv(ds, tmp_path / "te.csv")
        back = load_csv(tmp_path / "te.csv")
        assert back.x.shape == (33, 960)

    def test_ragged_row_reports_line(self, tmp_path):
        (tmp_path / "d.csv").write_text("a,b\n1,2\n3\n")
        with pytest.raises(ValueError, match="row 3"):
            load_csv(tmp_path / "d.csv")

    def test_non_numeric_reports_line(self, tmp_path):
        (tmp_path / "d.csv").write_text("a,b\n1,2\nx,4\n")
        with pytest.raises(ValueError, match="row 3"):
            load_csv(tmp_path / "d.csv")

    def test_empty_file_rejected(self, tmp_path):
        (tmp_path / "d.csv").write_text("")
        with pytest.raises(ValueError, match="empty"):
            load_csv(tmp_path / "d.csv")


class TestNormalization:
    def test_fit_then_apply_centers_and_scales(self):
        rng = np.random.default_rng(3)
        x = 3.0 + 2.0 * rng.standard_normal((4, 500))
        z = normalize_apply(x, normalize_fit(x))
        assert np.max(np.abs(z.mean(axis=1))) <= 1e-12
        np.testing.assert_allclose(z.std(axis=1, ddof=1), 1.0, atol=1e-12)

    def test_constant_variable_becomes_zeros(self):
        x = np.vstack([np.full(100, 7.0),
                       np.random.default_rng(4).standard_normal(100)])
        with pytest.warns(UserWarning, match="zero variance"):
            stats = normalize_fit(x)
        assert stats.std[0] == 1.0
        z = normalize_apply(x, stats)
        np.testing.assert_array_equal(z[0], np.zeros(100))

    def test_shifted_copy_has_mean_shift_over_std(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((3, 400))
        stats = normalize_fit(x)
        shift = np.array([1.0, -2.0, 0.5])
        z = normalize_apply(x + shift[:, None], stats)
        expected = z.mean(axis=1)
        np.testing.assert_allclose(
            expected,
            (x.mean(axis=1) + shift - stats.mean) / stats.std, atol=1e-12)

    def test_test_data_uses_training_stats(self):
        rng = np.random.default_rng(6)
        train = rng.standard_normal((2, 300))
        test = 5.0 + rng.standard_normal((2, 300))
        stats = normalize_fit(train)
        z = normalize_apply(test, stats)
        # means reflect the shift, not re-centering
        assert np.all(z.mean(axis=1) > 3.0)

    def test_single_sample_rejected(self):
        with pytest.raises(ValueError):
            normalize_fit(np.ones((2, 1)))


def _fit_small_model(method="olpp", **kwargs):
    x, _ = gen_numerical(NumericalConfig(n_samples=300, seed=7))
    defaults = dict(method=method, k=8, k1=5, k2=10, alpha=0.99, l=2)
    defaults.update(kwargs)
    return x, fit_monitoring(x, MonitoringConfig(**defaults))


class TestModelSerialization:
    def test_round_trip_preserves_w_bit_exact(self, tmp_path):
        _, model = _fit_small_model()
        save_model(model, tmp_path / "m.json")
        back = load_model(tmp_path / "m.json")
        np.testing.assert_array_equal(back.projection.w, model.projection.w)
        np.testing.assert_array_equal(back.rotation, model.rotation)
        np.testing.assert_array_equal(back.lam, model.lam)

    def test_round_trip_preserves_thresholds_and_alpha(self, tmp_path):
        _, model = _fit_small_model()
        save_model(model, tmp_path / "m.json")
        back = load_model(tmp_path / "m.json")
        assert back.j_th_t2 == model.j_th_t2
        assert back.j_th_spe == model.j_th_spe
        assert back.alpha == model.alpha
        assert back.kappa_t2 == model.kappa_t2

    @pytest.mark.parametrize("method", ["olpp", "lpp", "pca", "dpca"])
    def test_detect_equivalence_after_round_trip(self, tmp_path, method):
        _, model = _fit_small_model(method=method)
        save_model(model, tmp_path / "m.json")
        back = load_model(tmp_path / "m.json")
        rng = np.random.default_rng(8)
        dim = model.mean.size * (model.projection.lag + 1)
        for _ in range(100):
            x = model.mean.mean() + rng.standard_normal(dim)
            a = detect(model, x)
            b = detect(back, x)
            assert (a.t2, a.spe, a.verdict) == (b.t2, b.spe, b.verdict)

    def test_spe_inactive_round_trip(self, tmp_path):
        with pytest.warns(UserWarning):
            _, model = _fit_small_model(l=3)
        save_model(model, tmp_path / "m.json")
        back = load_model(tmp_path / "m.json")
        assert back.spe_active is False
        assert back.j_th_spe is None

    def test_version_mismatch_rejected(self, tmp_path):
        _, model = _fit_small_model()
        path = tmp_path / "m.json"
        save_model(model, path)
        payload = json.loads(path.read_text())
        payload["version"] = 99
        path.write_text(json.dumps(payload))
        with pytest.raises(ValueError, match="version"):
            load_model(path)

    def test_truncated_file_rejected(self, tmp_path):
        _, model = _fit_small_model()
        path = tmp_path / "m.json"
        save_model(model, path)
        path.write_text(path.read_text()[: 200])
        with pytest.raises(ValueError, match="corrupt|truncated"):
            load_model(path)

    def test_foreign_json_rejected(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text('{"hello": 1}')
        with pytest.raises(ValueError, match="not a monitoring model"):
            load_model(path)


class TestRecordsCsv:
    def test_round_trip(self, tmp_path):
        x, model = _fit_small_model()
        records = detect_series(model, x[:, :50], np.zeros(50, dtype=int))
        path = tmp_path / "records.csv"
        records_to_csv(records, model.j_th_t2, model.j_th_spe, path)
        back, j_t2, j_spe = records_from_csv(path)
        assert j_t2 == model.j_th_t2
        assert j_spe == model.j_th_spe
        assert len(back) == 50
        for a, b in zip(records, back):
            assert a.index == b.index
            assert a.t2 == b.t2 and a.spe == b.spe
            assert a.verdict == b.verdict and a.label == b.label

    def test_unlabeled_records(self, tmp_path):
        x, model = _fit_small_model()
        records = detect_series(model, x[:, :10])
        path = tmp_path / "records.csv"
        records_to_csv(records, model.j_th_t2, model.j_th_spe, path)
        back, _, _ = records_from_csv(path)
        assert all(r.label is None for r in back)

    def test_wrong_schema_rejected(self, tmp_path):
        (tmp_path / "x.csv").write_text("a,b\n1,2\n")
        with pytest.raises(ValueError, match="not a detection-record"):
            records_from_csv(tmp_path / "x.csv")
