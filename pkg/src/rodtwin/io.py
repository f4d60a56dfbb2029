"""File formats: dataset directories, field/channel/sensor CSVs, model
checkpoints, training history, reports.

All numeric CSV/JSON output uses full round-trip decimal representation so
write-then-read is bit exact.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .channel import ChannelState
from .conduction import TemperatureField
from .config import TwinConfig, config_from_dict
from .errors import ConfigurationError
from .khnet import LAYER_SIZES, KhModel, TrainHistory
from .mesh import RodMesh, build_rod_mesh
from .pipeline import (CaseResult, CaseSpec, Dataset, NormConstants, SensorSet)


def _fmt(x) -> str:
    return repr(float(x))


def _write_csv(path, header, columns):
    rows = zip(*columns)
    with open(path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(header)
        for row in rows:
            wr.writerow([v if isinstance(v, str) else _fmt(v) for v in row])


def _read_csv(path):
    with open(path, newline="") as f:
        rd = csv.reader(f)
        header = next(rd)
        cols = {h: [] for h in header}
        for row in rd:
            for h, v in zip(header, row):
                cols[h].append(v)
    return cols


# ---------------------------------------------------------------------------
# temperature fields
# ---------------------------------------------------------------------------

def field_to_csv(field: TemperatureField, path) -> None:
    r, z, region = field.mesh.node_table()
    _write_csv(path, ["r", "z", "region", "T"], [r, z, region, field.flatten()])


def field_arrays_from_csv(path):
    cols = _read_csv(path)
    return (np.array([float(v) for v in cols["r"]]),
            np.array([float(v) for v in cols["z"]]),
            cols["region"],
            np.array([float(v) for v in cols["T"]]))


def field_from_csv(path, mesh: RodMesh) -> TemperatureField:
    r, z, region, T = field_arrays_from_csv(path)
    if T.size != mesh.n_nodes:
        raise ConfigurationError(
            f"field file has {T.size} nodes but the mesh has {mesh.n_nodes}")
    nf = mesh.n_fuel_nodes
    return TemperatureField(mesh=mesh,
                            T_fuel=T[:nf].reshape(mesh.nz_fuel, mesh.nr_fuel),
                            T_clad=T[nf:].reshape(mesh.nz, mesh.nr_clad))


def channel_to_csv(state: ChannelState, path) -> None:
    _write_csv(path, ["z", "T_cool", "h", "P", "Re"],
               [state.z, state.T_cool, state.h, state.P, state.Re])


def sensors_to_csv(sensors: SensorSet, path) -> None:
    n = sensors.z.size
    _write_csv(path, ["z", "r", "T", "T_inf", "dhat", "w", "eta"],
               [sensors.z, sensors.r, sensors.T, sensors.T_inf, sensors.dhat,
                sensors.w, np.full(n, sensors.eta)])


def sensors_from_csv(path) -> SensorSet:
    cols = _read_csv(path)
    arr = {k: np.array([float(v) for v in cols[k]])
           for k in ("z", "r", "T", "T_inf", "dhat", "w", "eta")}
    return SensorSet(z=arr["z"], r=arr["r"], T=arr["T"], T_inf=arr["T_inf"],
                     dhat=arr["dhat"], w=arr["w"], eta=float(arr["eta"][0]))


# ---------------------------------------------------------------------------
# datasets
# ---------------------------------------------------------------------------

def save_dataset(ds: Dataset, outdir) -> None:
    """Directory layout: cases/<id>/{field,channel,sensors}.csv + manifest.json."""
    outdir = Path(outdir)
    (outdir / "cases").mkdir(parents=True, exist_ok=True)
    manifest = {
        "splits": {c.spec.case_id: c.spec.split for c in ds.cases},
        "cases": {c.spec.case_id: {"q0": c.spec.q0, "burnup": c.spec.burnup}
                  for c in ds.cases},
        "normalization": ds.norm.__dict__,
        "seed": ds.seed,
        "config_hash": ds.config.config_hash(),
        "config": ds.config.to_dict(),
    }
    for c in ds.cases:
        d = outdir / "cases" / c.spec.case_id
        d.mkdir(parents=True, exist_ok=True)
        field_to_csv(c.solution.field, d / "field.csv")
        channel_to_csv(c.solution.channel, d / "channel.csv")
        sensors_to_csv(c.sensors, d / "sensors.csv")
    with open(outdir / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2)


def load_dataset(outdir) -> Dataset:
    """Rebuild a Dataset from disk (coupled solutions are not reloaded)."""
    outdir = Path(outdir)
    with open(outdir / "manifest.json") as f:
        manifest = json.load(f)
    cfg = config_from_dict(manifest["config"])
    norm = NormConstants(**manifest["normalization"])
    cases = []
    for cid in sorted(manifest["splits"]):
        d = outdir / "cases" / cid
        r, z, region, T = field_arrays_from_csv(d / "field.csv")
        sensors = sensors_from_csv(d / "sensors.csv")
        spec = CaseSpec(case_id=cid, q0=manifest["cases"][cid]["q0"],
                        burnup=manifest["cases"][cid]["burnup"],
                        split=manifest["splits"][cid])
        cases.append(CaseResult(spec=spec, solution=None, sensors=sensors,
                                r=r, z=z, region=region, T=T))
    return Dataset(cases=cases, norm=norm, config=cfg, seed=manifest["seed"])


def mesh_from_config(cfg: TwinConfig) -> RodMesh:
    return build_rod_mesh(cfg.geometry, cfg.mesh.nr_fuel, cfg.mesh.nz,
                          cfg.mesh.nr_clad)


def dataset_mesh(ds: Dataset) -> RodMesh:
    return mesh_from_config(ds.config)


# ---------------------------------------------------------------------------
# model checkpoints and training history
# ---------------------------------------------------------------------------

def save_checkpoint(model: KhModel, path) -> None:
    """Single-JSON checkpoint: architecture, normalization, eta, weights."""
    blob = {
        "architecture": {"layer_sizes": list(model.layer_sizes),
                         "activation": "tanh", "stacks": ["G", "dG"]},
        "normalization": model.norm.__dict__,
        "eta": model.eta,
        "stacks": {
            "G": {k: v.tolist() for k, v in model.G_stack.items()},
            "dG": {k: v.tolist() for k, v in model.dG_stack.items()},
        },
    }
    with open(path, "w") as f:
        json.dump(blob, f)


def load_checkpoint(path) -> KhModel:
    with open(path) as f:
        blob = json.load(f)
    sizes = tuple(blob["architecture"]["layer_sizes"])
    if sizes != LAYER_SIZES:
        raise ConfigurationError(f"unsupported layer sizes {sizes}")
    stacks = {name: {k: np.array(v) for k, v in blob["stacks"][name].items()}
              for name in ("G", "dG")}
    return KhModel(G_stack=stacks["G"], dG_stack=stacks["dG"],
                   norm=NormConstants(**blob["normalization"]),
                   eta=blob["eta"], layer_sizes=sizes)


def history_to_csv(history: TrainHistory, path) -> None:
    epochs = np.arange(len(history.train_mse))
    _write_csv(path, ["epoch", "train_mse", "val_mse", "lr"],
               [epochs, history.train_mse, history.val_mse, history.lr])


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def strain_report_to_json(report, path) -> None:
    blob = {"thermal_expansion_hoop_strain": report.thermal,
            "creep_hoop_strain": report.creep,
            "elastic_hoop_strain": report.elastic,
            "irradiation_growth_hoop_strain": report.irradiation_growth,
            "total_hoop_strain": report.total,
            "location": {"r": report.location[0], "z": report.location[1]},
            "run_time_s": report.run_time}
    with open(path, "w") as f:
        json.dump(blob, f, indent=2)


def stress_field_to_csv(sf, path) -> None:
    mesh = sf.mesh
    r, z, _ = mesh.node_table()
    sig_r = np.concatenate([sf.fuel_sigma_r.ravel(), sf.clad_sigma_r.ravel()])
    sig_z = np.concatenate([sf.fuel_sigma_z.ravel(), sf.clad_sigma_z.ravel()])
    sig_t = np.concatenate([sf.fuel_sigma_theta.ravel(),
                            sf.clad_sigma_theta.ravel()])
    _write_csv(path, ["r", "z", "sigma_r", "sigma_z", "sigma_theta"],
               [r, z, sig_r, sig_z, sig_t])


def metrics_to_json(report, path) -> None:
    with open(path, "w") as f:
        json.dump(report.to_dict(), f, indent=2)
