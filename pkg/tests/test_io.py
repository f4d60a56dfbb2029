"""File formats: CSV/JSON round trips must be bit exact."""

import json

import numpy as np
import pytest

from rodtwin.config import TrainSettings
from rodtwin.errors import ConfigurationError
from rodtwin.io import (field_from_csv, field_to_csv, history_to_csv,
                        load_checkpoint, load_dataset, mesh_from_config,
                        metrics_to_json, save_checkpoint, save_dataset,
                        sensors_from_csv, sensors_to_csv,
                        strain_report_to_json, stress_field_to_csv)
from rodtwin.khnet import PARAM_KEYS, train
from rodtwin.metrics import compute_metrics


class TestFieldCsv:
    def test_round_trip_bit_exact(self, coupled20, tmp_path):
        path = tmp_path / "field.csv"
        field_to_csv(coupled20.field, path)
        again = field_from_csv(path, coupled20.field.mesh)
        np.testing.assert_array_equal(again.T_fuel, coupled20.field.T_fuel)
        np.testing.assert_array_equal(again.T_clad, coupled20.field.T_clad)

    def test_wrong_mesh_rejected(self, coupled20, cfg_tiny, tmp_path):
        path = tmp_path / "field.csv"
        field_to_csv(coupled20.field, path)
        with pytest.raises(ConfigurationError):
            field_from_csv(path, mesh_from_config(cfg_tiny))


class TestSensorsCsv:
    def test_round_trip_bit_exact(self, coupled20, tmp_path):
        from rodtwin.pipeline import extract_sensors
        z = np.array([0.2, 0.4, 0.6, 0.8]) * coupled20.field.mesh.geom.L_fr
        s = extract_sensors(coupled20, z, eta=1.0)
        path = tmp_path / "sensors.csv"
        sensors_to_csv(s, path)
        again = sensors_from_csv(path)
        for f in ("z", "r", "T", "T_inf", "dhat", "w"):
            np.testing.assert_array_equal(getattr(again, f), getattr(s, f))
        assert again.eta == s.eta


class TestDatasetDirectory:
    def test_round_trip_values_and_manifest(self, dataset_tiny, tmp_path):
        out = tmp_path / "ds"
        save_dataset(dataset_tiny, out)
        manifest = json.loads((out / "manifest.json").read_text())
        assert set(manifest["splits"]) == {c.spec.case_id
                                           for c in dataset_tiny.cases}
        assert manifest["config_hash"] == dataset_tiny.config.config_hash()

        again = load_dataset(out)
        assert again.norm == dataset_tiny.norm
        assert again.config == dataset_tiny.config
        for ca, cb in zip(again.cases, dataset_tiny.cases):
            assert ca.spec == cb.spec
            np.testing.assert_array_equal(ca.T, cb.T)
            np.testing.assert_array_equal(ca.sensors.T, cb.sensors.T)

    def test_repeated_save_is_byte_identical(self, dataset_tiny, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        save_dataset(dataset_tiny, a)
        save_dataset(dataset_tiny, b)
        for fa in sorted(a.rglob("*")):
            if fa.is_file():
                fb = b / fa.relative_to(a)
                assert fa.read_bytes() == fb.read_bytes()


class TestCheckpoint:
    def test_round_trip_identical_predictions(self, dataset_tiny, tmp_path):
        model, _ = train(dataset_tiny, TrainSettings(epochs=2, fixed_lr=1e-3))
        path = tmp_path / "ckpt.json"
        save_checkpoint(model, path)
        again = load_checkpoint(path)
        for k in PARAM_KEYS:
            np.testing.assert_array_equal(again.G_stack[k], model.G_stack[k])
            np.testing.assert_array_equal(again.dG_stack[k], model.dG_stack[k])
        assert again.norm == model.norm
        assert again.eta == model.eta

        rng = np.random.default_rng(0)
        feats = rng.uniform(-1, 1, size=(6, 4, 5))
        u = rng.uniform(-1, 1, size=4)
        d = rng.uniform(-1, 1, size=4)
        w = rng.uniform(0.1, 1, size=4)
        np.testing.assert_array_equal(again.predict_normalized(feats, u, d, w),
                                      model.predict_normalized(feats, u, d, w))

    def test_wrong_architecture_rejected(self, dataset_tiny, tmp_path):
        model, _ = train(dataset_tiny, TrainSettings(epochs=1, fixed_lr=1e-3))
        path = tmp_path / "ckpt.json"
        save_checkpoint(model, path)
        blob = json.loads(path.read_text())
        blob["architecture"]["layer_sizes"] = [5, 64, 32, 1]
        path.write_text(json.dumps(blob))
        with pytest.raises(ConfigurationError):
            load_checkpoint(path)


class TestReports:
    def test_history_csv_columns(self, dataset_tiny, tmp_path):
        _, hist = train(dataset_tiny, TrainSettings(epochs=3, fixed_lr=1e-3))
        path = tmp_path / "history.csv"
        history_to_csv(hist, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "epoch,train_mse,val_mse,lr"
        assert len(lines) == 4

    def test_strain_report_json(self, coupled20, tmp_path):
        from rodtwin.core import MaterialParams
        from rodtwin.thermomech import hoop_strain_summary
        rep = hoop_strain_summary(coupled20.field, MaterialParams(), 3.47e7)
        path = tmp_path / "strain.json"
        strain_report_to_json(rep, path)
        blob = json.loads(path.read_text())
        assert blob["total_hoop_strain"] == rep.total
        assert blob["irradiation_growth_hoop_strain"] == 0.0

    def test_stress_field_csv(self, coupled20, tmp_path):
        from rodtwin.core import MaterialParams
        from rodtwin.thermomech import stress_field
        sf = stress_field(coupled20.field, 2e6, 15.51e6, MaterialParams())
        path = tmp_path / "stress.csv"
        stress_field_to_csv(sf, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "r,z,sigma_r,sigma_z,sigma_theta"
        assert len(lines) == coupled20.field.mesh.n_nodes + 1

    def test_metrics_json(self, tmp_path):
        rep = compute_metrics(np.array([1.0, 2.0]), np.array([1.0, 2.5]))
        path = tmp_path / "metrics.json"
        metrics_to_json(rep, path)
        blob = json.loads(path.read_text())
        assert blob["nl2"] == rep.nl2
