import csv
import json

import numpy as np
import pytest

from lrmc.experiments import (ExperimentSpec, PhaseGrid, derive_seed,
                              extract_contour, gen_ground_truth,
                              run_convergence, run_phase, run_timing,
                              write_summary)


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec(d1=10, d2=8, r=2, p_grid=(0.3, 0.2))
    with pytest.raises(ValueError):
        ExperimentSpec(d1=10, d2=8, r=2, trials=0)
    with pytest.raises(ValueError):
        ExperimentSpec(d1=10, d2=8, r=2, algorithms=("VGD", "XGD"))


def test_derive_seed_deterministic_and_spread():
    assert derive_seed(0, (1, 2), "VGD", 3) == derive_seed(0, (1, 2), "VGD", 3)
    seen = {derive_seed(ms, (c,), alg, t)
            for ms in range(3) for c in range(4)
            for alg in ("VGD", "RGD", "BGD") for t in range(5)}
    assert len(seen) == 3 * 4 * 3 * 5


def test_gen_ground_truth_well_conditioned():
    gt = gen_ground_truth(20, 15, 4, 1.0, seed=0)
    assert np.allclose(gt.sigma_star, 1.0)
    assert gt.kappa == pytest.approx(1.0)
    assert gt.mu >= 1.0
    assert np.linalg.matrix_rank(gt.m_star) == 4


def test_gen_ground_truth_spectrum_matches_svd_oracle():
    gt = gen_ground_truth(25, 18, 5, 3.0, seed=1)
    sv = np.linalg.svd(gt.m_star, compute_uv=False)[:5]
    assert np.allclose(np.sort(sv)[::-1], np.linspace(1.0, 1 / 3.0, 5),
                       atol=1e-10)
    assert gt.kappa == pytest.approx(3.0)


def test_gen_ground_truth_rank_one():
    gt = gen_ground_truth(10, 10, 1, 1.0, seed=2)
    assert gt.m_star.shape == (10, 10)
    assert np.linalg.matrix_rank(gt.m_star) == 1


def test_gen_ground_truth_validation():
    with pytest.raises(ValueError):
        gen_ground_truth(10, 10, 2, 0.5, seed=0)
    with pytest.raises(ValueError):
        gen_ground_truth(4, 3, 5, 1.0, seed=0)


SMALL = dict(d1=40, d2=30, r=3, kappa=1.0, p=0.5, step=0.5,
             lambdas=(1e-8,), trials=1, master_seed=0, max_iters=400,
             tol=1e-10)


def test_run_convergence_rows_and_csv(tmp_path):
    spec = ExperimentSpec(algorithms=("VGD", "RGD", "BGD"), **SMALL)
    path = tmp_path / "conv.csv"
    rows = run_convergence(spec, csv_path=path, compute_dist=False)
    algs = {r["algorithm"] for r in rows}
    assert algs == {"VGD", "RGD", "BGD"}
    # all algorithms start from the same spectral initialization
    starts = {r["rel_err"] for r in rows if r["k"] == 0}
    assert len(starts) == 1
    with open(path) as fh:
        reader = csv.DictReader(fh)
        assert reader.fieldnames == ["algorithm", "lambda", "k", "rel_err",
                                     "dist", "balancing", "seconds"]
        file_rows = list(reader)
    assert len(file_rows) == len(rows)


def test_run_convergence_deterministic_modulo_timing():
    spec = ExperimentSpec(algorithms=("VGD",), **SMALL)
    a = run_convergence(spec, compute_dist=False)
    b = run_convergence(spec, compute_dist=False)
    strip = lambda rows: [{k: v for k, v in r.items() if k != "seconds"}
                          for r in rows]
    assert strip(a) == strip(b)


def test_extract_contour_cases():
    grid = PhaseGrid(p_values=(0.1, 0.2, 0.3, 0.4), r_values=(2, 4, 6),
                     trials=10,
                     successes=np.array([[10, 10, 10, 10],
                                         [0, 2, 8, 10],
                                         [0, 0, 0, 0]]))
    rows = extract_contour(grid)
    assert rows[0] == (2, 0.1, True)
    r, cross, clipped = rows[1]
    # 0.2 -> 0.8 crossing between p=0.2 and p=0.3: 0.2 + 0.5*(0.1)
    assert (r, clipped) == (4, False)
    assert cross == pytest.approx(0.25)
    assert rows[2] == (6, None, False)


def test_run_phase_small_grid(tmp_path):
    spec = ExperimentSpec(d1=20, d2=16, r=2, kappa=1.0, step=0.5,
                          trials=2, master_seed=0, max_iters=600,
                          p_grid=(0.2, 1.0), r_grid=(2, 6),
                          algorithms=("VGD",))
    grid = run_phase(spec, csv_path=tmp_path / "phase.csv",
                     contour_csv_path=tmp_path / "contour.csv")
    assert grid.successes.shape == (2, 2)
    assert (grid.successes >= 0).all() and (grid.successes <= 2).all()
    # full observation, easy rank: always recovered
    assert grid.rates[0, 1] == 1.0
    with open(tmp_path / "phase.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4
    with open(tmp_path / "contour.csv") as fh:
        crows = list(csv.DictReader(fh))
    assert [r["r"] for r in crows] == ["2", "6"]


def test_run_phase_requires_grids():
    spec = ExperimentSpec(d1=10, d2=8, r=2)
    with pytest.raises(ValueError):
        run_phase(spec)


def test_run_timing_rows(tmp_path):
    spec = ExperimentSpec(d1=30, d2=24, r=2, p=0.6, step=0.5,
                          lambdas=(1e-10,), trials=2, master_seed=0,
                          max_iters=2000, algorithms=("VGD", "BGD"))
    rows = run_timing(spec, csv_path=tmp_path / "timing.csv")
    assert [r["algorithm"] for r in rows] == ["VGD", "BGD"]
    for r in rows:
        assert r["n_ok"] + r["n_fail"] == 2
        if r["n_ok"]:
            assert float(r["mean_s"]) > 0.0


def test_run_timing_empty_cell():
    # iteration cap too small to ever reach the target
    spec = ExperimentSpec(d1=30, d2=24, r=3, p=0.5, step=0.5, trials=2,
                          master_seed=0, max_iters=2, algorithms=("VGD",))
    rows = run_timing(spec)
    assert rows[0]["n_ok"] == 0
    assert rows[0]["mean_s"] == "" and rows[0]["median_s"] == ""


def test_write_summary(tmp_path):
    spec = ExperimentSpec(d1=10, d2=8, r=2)
    path = tmp_path / "summary.json"
    write_summary(path, spec, {"rows": 3})
    payload = json.loads(path.read_text())
    assert payload["aggregates"] == {"rows": 3}
    assert payload["spec"]["d1"] == 10
    assert len(payload["input_hash"]) == 64
    # hash depends only on the experiment settings, not the aggregates
    write_summary(path, spec, {"rows": 4})
    assert json.loads(path.read_text())["input_hash"] == payload["input_hash"]
