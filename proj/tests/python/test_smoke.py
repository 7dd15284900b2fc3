import json
import math

import numpy as np
import pytest

import perfhom


def test_sample_is_deterministic():
    a = perfhom.sample_poisson(1.0, [0, 0], [10, 10], seed=4)
    b = perfhom.sample_poisson(1.0, [0, 0], [10, 10], seed=4)
    assert a == b
    assert a.points.shape == (len(a), 2)
    assert np.all((a.points >= 0) & (a.points <= 10))


def test_cloud_json_round_trip():
    c = perfhom.PointCloud(np.array([[1.0, 2.0], [3.0, 4.0]]), [0, 0], [5, 5])
    back = perfhom.PointCloud.from_json(c.to_json())
    assert back == c
    assert back.lo == [0, 0] and back.hi == [5, 5]


def test_thin_keeps_a_subset():
    c = perfhom.sample_poisson(1.0, [0, 0], [10, 10], seed=1)
    t = perfhom.thin(c, 0.3, 5)
    kept = {tuple(p) for p in c.points}
    assert all(tuple(p) in kept for p in t.points)
    assert perfhom.thin(t, 0.3, 5) == t


def test_clusters_of_a_chain():
    c = perfhom.PointCloud(np.array([[0, 0], [0.5, 0], [5, 5]], dtype=float), [-1, -1], [6, 6])
    groups = sorted(sorted(g) for g in perfhom.clusters(c, 0.3))
    assert groups == [[0, 1], [2]]


def test_single_disk_delta():
    assert perfhom.delta_hat(np.array([[0.0, 0.0]]), 1.0) > 0


def test_channels_on_plain_fields():
    assert perfhom.count_channels(np.ones((5, 5), dtype=np.uint8)) == 5
    wall = np.ones((5, 5), dtype=np.uint8)
    wall[:, 2] = 0
    rep = perfhom.analyze_field(wall)
    assert rep["N"] == 0 and rep["L"] == 0


def test_percolate_and_conductivity():
    k = perfhom.default_k_scale(0.599, 0.3)
    assert k == 11
    c = perfhom.sample_poisson(1.0, [0, 0], [3, 3], seed=2)
    rep = perfhom.percolate(c, 0.3, 16, k)
    assert rep["N"] == rep["L"]
    assert rep["field"].shape == (16, 16)
    cond = perfhom.effective_conductivity(c, 0.3, 8, 4, 2)
    assert 0 <= cond["alpha"] <= 1


def test_bad_parameters_raise_value_error():
    with pytest.raises(ValueError):
        perfhom.thin(perfhom.sample_poisson(1.0, [0, 0], [2, 2]), 0.3, 0)
    with pytest.raises(perfhom.ParameterError):
        perfhom.sample_poisson(-1.0, [0, 0], [2, 2])


def test_stats():
    lad = perfhom.intensity_ladder(1.0, 3, 0.3, [2, 8], [0, 0], [10, 10], replicas=20)
    assert lad["subset_violations"] == 0
    assert lad["levels"][8]["estimate"] <= lad["unthinned"]["estimate"]
    vac = perfhom.vacancy(1.0, 3, 0.3, [0, 0], [10, 10], replicas=20)
    assert abs(vac["estimate"] - math.exp(-math.pi * 0.09)) < 0.05


def test_homogenized_constant_state():
    sol = perfhom.solve_homogenized(T=0.05, dt=0.01, N_g=8, u0=0.5)
    assert sol["u"].shape == (6, 8, 8)
    assert np.allclose(sol["u"], 0.5)
    src = perfhom.solve_homogenized(C1=0.5, T=0.05, dt=0.01, N_g=8, u0=("cos", [1, 0.5, 1, 1]), f=1.0)
    assert np.allclose(np.diff(src["mass"]), 0.01 * 0.5)


def test_scenario_round_trip(tmp_path):
    cfg = {
        "version": 1,
        "seed": 5,
        "output": str(tmp_path / "run"),
        "process": {"intensity": 1.0, "window": [[0, 0], [6, 6]]},
        "lattice": {"n": 16},
        "studies": ["sample", "thin", "percolate"],
    }
    manifest = perfhom.run_scenario(cfg)
    assert manifest["code_version"] == perfhom.code_version
    ids = {f["id"] for f in manifest["files"]}
    assert {"cloud", "field", "channels"} <= ids
    path = str(tmp_path / "run" / "manifest.json")
    assert perfhom.verify_manifest(path) == []
    svg = perfhom.render(path, "channels")
    assert open(svg).read().startswith("<svg")
    cfg["surprise"] = 1
    with pytest.raises(ValueError):
        perfhom.run_scenario(json.dumps(cfg))
