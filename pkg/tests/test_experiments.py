import hashlib
import json
import os

import numpy as np
import pytest

from glspec.experiments import (
    DEFAULT_SEEDS,
    EXPERIMENT_NAMES,
    ExperimentConfig,
    compare_d2,
    parse_config_file,
    run,
    zeroing_comparison,
)


def _load_named_csv(path):
    return np.genfromtxt(path, delimiter=",", skip_header=1, dtype=None, encoding="utf-8")


def test_experiment_names_enumeration():
    assert len(EXPERIMENT_NAMES) == 10
    assert len(set(EXPERIMENT_NAMES)) == 10
    assert "PhaseSweep" in EXPERIMENT_NAMES
    assert "D2Comparison" in EXPERIMENT_NAMES


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(name="NoSuchExperiment").validate()
    with pytest.raises(ValueError):
        ExperimentConfig(name="PhaseSweep", p=100, c_grid=(1.0,)).validate()
    with pytest.raises(ValueError):
        ExperimentConfig(name="PhaseSweep", n=1).validate()
    with pytest.raises(ValueError):
        ExperimentConfig(name="PhaseSweep", upsilon=0.0).validate()
    with pytest.raises(ValueError):
        ExperimentConfig(name="PhaseSweep", seeds=()).validate()
    with pytest.raises(ValueError):
        ExperimentConfig(name="PhaseSweep", alpha_base="q").validate()
    cfg = ExperimentConfig(name="PhaseSweep").validate()
    assert cfg.seeds == DEFAULT_SEEDS


def test_config_to_dict_is_json_ready():
    cfg = ExperimentConfig(name="OmegaSweep", c_grid=(0.5, 1.0), alpha_grid=(0.2, 3.0))
    d = cfg.to_dict()
    json.dumps(d)
    assert d["name"] == "OmegaSweep"
    assert d["c_grid"] == [0.5, 1.0]
    assert d["alpha_grid"] == [0.2, 3.0]
    assert d["seeds"] == list(DEFAULT_SEEDS)


def test_parse_config_file(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text(
        "# comment line\n"
        "name = OmegaSweep\n"
        "n = 120\n"
        "c_grid = 0.5, 1.0   # trailing comment\n"
        "alpha_grid = 0.2, 3.0\n"
        "seeds = 0, 7\n"
        "upsilon = 0.5\n"
        "output_dir = somewhere\n"
        "alpha_base = n\n"
    )
    cfg = parse_config_file(path)
    assert cfg.name == "OmegaSweep"
    assert cfg.n == 120
    assert cfg.c_grid == (0.5, 1.0)
    assert cfg.alpha_grid == (0.2, 3.0)
    assert cfg.seeds == (0, 7)
    assert cfg.output_dir == "somewhere"
    assert cfg.alpha_base == "n"


def test_parse_config_file_default_name_and_errors(tmp_path):
    bare = tmp_path / "bare.cfg"
    bare.write_text("n = 50\n")
    with pytest.raises(ValueError):
        parse_config_file(bare)
    cfg = parse_config_file(bare, default_name="PhaseSweep")
    assert cfg.name == "PhaseSweep"
    bad_key = tmp_path / "bad.cfg"
    bad_key.write_text("name = PhaseSweep\nbandwidth = 3\n")
    with pytest.raises(ValueError):
        parse_config_file(bad_key)
    bad_line = tmp_path / "line.cfg"
    bad_line.write_text("name PhaseSweep\n")
    with pytest.raises(ValueError):
        parse_config_file(bad_line)


def test_run_rejects_unknown_name(tmp_path):
    with pytest.raises(ValueError):
        run(ExperimentConfig(name="Nope", output_dir=str(tmp_path)))


def test_pool_size_env(monkeypatch):
    from glspec.experiments import _pool_size

    monkeypatch.setenv("GLSPEC_THREADS", "3")
    assert _pool_size() == 3
    monkeypatch.delenv("GLSPEC_THREADS")
    assert _pool_size() >= 1


def test_phase_sweep_manifest_and_artifacts(tmp_path):
    out = str(tmp_path / "phase")
    manifest = run(ExperimentConfig(name="PhaseSweep", output_dir=out), fast=True)
    assert manifest.experiment == "PhaseSweep"
    assert manifest.fast is True
    assert manifest.wall_clock_s >= 0.0
    assert manifest.config["name"] == "PhaseSweep"
    names = {entry["path"] for entry in manifest.files}
    assert names == {"phase_eigencurves.csv", "phase_tracked.csv", "phase_sweep.gp"}
    for entry in manifest.files:
        full = os.path.join(out, entry["path"])
        assert os.path.exists(full)
        with open(full, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
        assert digest == entry["sha256"]
    # the manifest is written last and echoes itself on disk
    with open(os.path.join(out, "manifest.json")) as fh:
        payload = json.load(fh)
    assert payload["experiment"] == "PhaseSweep"
    assert payload["files"] == manifest.files
    # gnuplot preamble
    gp = (tmp_path / "phase" / "phase_sweep.gp").read_text()
    assert gp.startswith("set datafile separator ','")


def test_rerun_reproduces_artifact_bytes(tmp_path):
    out_a = str(tmp_path / "a")
    out_b = str(tmp_path / "b")
    run(ExperimentConfig(name="PhaseSweep", output_dir=out_a), fast=True)
    run(ExperimentConfig(name="PhaseSweep", output_dir=out_b), fast=True)
    for name in ("phase_eigencurves.csv", "phase_tracked.csv", "phase_sweep.gp"):
        a = (tmp_path / "a" / name).read_bytes()
        b = (tmp_path / "b" / name).read_bytes()
        assert a == b


def test_accuracy_low_errors_small(tmp_path):
    out = str(tmp_path)
    run(ExperimentConfig(name="AccuracyLowSNR", output_dir=out), fast=True)
    summary = np.loadtxt(os.path.join(out, "accuracy_low_summary.csv"), delimiter=",", skiprows=1)
    assert np.all(summary[:, 2] <= 0.15)
    curves = np.loadtxt(os.path.join(out, "accuracy_low_curves.csv"), delimiter=",", skiprows=1)
    c1 = curves[np.abs(curves[:, 0] - 1.0) < 1e-12]
    # sample and limit curves agree through the bulk (indices 10..180)
    bulk = c1[(c1[:, 1] >= 10) & (c1[:, 1] <= 180)]
    assert np.max(np.abs(bulk[:, 2] - bulk[:, 3])) <= 0.15


def test_accuracy_moderate_errors_small(tmp_path):
    out = str(tmp_path)
    run(ExperimentConfig(name="AccuracyModerate", output_dir=out), fast=True)
    summary = np.loadtxt(
        os.path.join(out, "accuracy_moderate_summary.csv"), delimiter=",", skiprows=1
    )
    assert np.all(summary[:, 2] <= 0.05)


def test_accuracy_large_spectrum_collapses(tmp_path):
    out = str(tmp_path)
    run(ExperimentConfig(name="AccuracyLarge", output_dir=out), fast=True)
    summary = np.loadtxt(os.path.join(out, "accuracy_large_summary.csv"), delimiter=",", skiprows=1)
    # at the widest aspect the signal-coordinate spacings are far above the
    # kernel resolution and the spectrum is within 1e-3 of flat; narrower
    # aspects can draw near-duplicate signal values, so only positivity is
    # asserted there
    wide = summary[np.abs(summary[:, 0] - 0.5) < 1e-12]
    assert np.all(wide[:, 2] <= 1e-3)
    assert np.all(summary[:, 2] >= 0.0)
    curves = np.loadtxt(os.path.join(out, "accuracy_large_curves.csv"), delimiter=",", skiprows=1)
    assert np.all(curves[:, 3] == 1.0)


def test_dimension_sweep_errors_decrease(tmp_path):
    out = str(tmp_path)
    run(ExperimentConfig(name="DimensionSweep", output_dir=out), fast=True)
    mean = np.loadtxt(os.path.join(out, "dimension_sweep_mean.csv"), delimiter=",", skiprows=1)
    ns = mean[:, 0]
    assert list(ns) == [50.0, 150.0, 300.0]
    # weak-signal rigidity error shrinks with n and stays under 0.15
    assert np.all(np.diff(mean[:, 1]) < 0.0)
    assert np.all(mean[:, 1] <= 0.15)
    # moderate-signal surrogate error obeys the n^{-1/2} envelope
    assert np.all(mean[:, 2] <= 5.0 / np.sqrt(ns))
    assert np.all(mean[:, 3] >= 0.0)


def test_histogram_bulk_matches_limit_density(tmp_path):
    out = str(tmp_path)
    run(ExperimentConfig(name="HistogramBulk", c_grid=(1.0,), output_dir=out), fast=True)
    rows = np.loadtxt(os.path.join(out, "histogram_bulk.csv"), delimiter=",", skiprows=1)
    assert rows.shape == (50, 5)
    emp, theory = rows[:, 3], rows[:, 4]
    assert np.all(emp >= 0.0)
    assert np.all(theory >= 0.0)
    # the binned limit integrates to the bulk mass (c = 1: no atom)
    width = rows[0, 2] - rows[0, 1]
    assert abs(np.sum(theory) * width - 1.0) <= 1e-6
    # agreement away from the singular lower edge
    assert np.max(np.abs(emp - theory)[2:]) <= 0.1


def test_omega_sweep_fast_endpoints(tmp_path):
    out = str(tmp_path)
    manifest = run(ExperimentConfig(name="OmegaSweep", c_grid=(1.0,), output_dir=out), fast=True)
    rows = np.loadtxt(os.path.join(out, "omega_sweep.csv"), delimiter=",", skiprows=1)
    alphas = rows[:, 1]
    omega_w = rows[:, 3]
    assert omega_w[alphas == 0.2][0] >= 0.8
    assert omega_w[alphas == 3.0][0] <= 0.3
    assert np.all(rows[:, 4] > 0.0)
    # the transition-matrix scan is reported alongside
    assert np.all((rows[:, 5] >= 0.05) & (rows[:, 5] <= 0.95))
    assert manifest.resolved["alpha_base"] == "n"
    assert "1" in manifest.resolved["thresholds"]


def test_manifold_rmse_structure(tmp_path):
    out = str(tmp_path)
    manifest = run(
        ExperimentConfig(name="ManifoldRmse", n=200, reps=2, c_grid=(1.0,), output_dir=out),
        fast=True,
    )
    rows = _load_named_csv(os.path.join(out, "manifold_rmse.csv"))
    # 2 manifolds x 1 aspect x 9 indices x 4 bandwidth variants
    assert len(rows) == 72
    kinds = {r[0] for r in rows}
    variants = {r[3] for r in rows}
    assert kinds == {"m1", "kb"}
    assert variants == {"adap", "medq", "hp", "theory"}
    for r in rows:
        assert 0.0 <= r[4] <= 1.5
        assert r[5] >= 0.0
    omegas = _load_named_csv(os.path.join(out, "manifold_omegas.csv"))
    for r in omegas:
        assert 0.05 <= r[3] <= 0.95
        assert r[4] > 0.0
    assert manifest.resolved["reps"] == 2


def test_stieltjes_compare_sup_below_bound(tmp_path):
    out = str(tmp_path)
    run(ExperimentConfig(name="StieltjesCompare", output_dir=out), fast=True)
    sups = np.loadtxt(os.path.join(out, "stieltjes_sup.csv"), delimiter=",", skiprows=1, ndmin=2)
    assert np.all(sups[:, 1] <= sups[:, 2])
    grid_rows = np.loadtxt(os.path.join(out, "stieltjes_grid.csv"), delimiter=",", skiprows=1)
    assert np.all(grid_rows[:, 2] <= grid_rows[:, 3] + 1e-12)


def test_d2_comparison_printed_cases(tmp_path):
    out = str(tmp_path)
    manifest = compare_d2(ExperimentConfig(name="PhaseSweep", output_dir=out))
    assert manifest.experiment == "D2Comparison"
    summary = _load_named_csv(os.path.join(out, "d2_summary.csv"))
    sups = {}
    for case, c, sup, expected in summary:
        sups[(case, float(c))] = float(sup)
        assert expected == ("different" if case == "both_large" else "close")
    for c in (0.5, 1.0, 2.0):
        # two weak spikes blur into one bulk; two strong distinct spikes do not
        assert sups[("low_pair", c)] <= 0.05
        assert sups[("both_large", c)] >= 0.5
        # a strong plus a weak spike perturbs the top of the bulk only: the
        # whole-range sup stays below the strong-pair separation while the
        # lower half of the spectrum is unaffected
        assert sups[("large_small", c)] < sups[("both_large", c)]
    curves = _load_named_csv(os.path.join(out, "d2_curves.csv"))
    n = manifest.resolved["n"]
    for c in (0.5, 1.0, 2.0):
        tail = [
            abs(r[3] - r[4])
            for r in curves
            if r[0] == "large_small" and abs(float(r[1]) - c) < 1e-9 and r[2] >= n // 2
        ]
        assert max(tail) <= 0.05


@pytest.fixture(scope="module")
def zeroing_run(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("zeroing"))
    manifest = zeroing_comparison(ExperimentConfig(name="PhaseSweep", output_dir=out), fast=True)
    return out, manifest


def test_zeroing_comparison_strength_windows(zeroing_run):
    out, manifest = zeroing_run
    assert manifest.experiment == "ZeroingComparison"
    assert manifest.resolved["h_zero"] == 35.0
    mean = np.loadtxt(os.path.join(out, "zeroing_mean.csv"), delimiter=",", skiprows=1)
    by_alpha = {round(r[0], 3): r[1:] for r in mean}
    # below the recovery window both variants sit at the random baseline
    adap, zero, base = by_alpha[0.3]
    assert adap > 0.5 * base
    assert zero > 0.5 * base
    # in the intermediate window only the zeroed diagonal recovers
    for alpha in (0.5, 0.6):
        adap, zero, base = by_alpha[alpha]
        assert zero < adap
        assert zero < 0.5 * base
    # near alpha = 1 both recover, within a factor two of each other
    adap, zero, base = by_alpha[0.8]
    assert max(adap, zero) <= 2.0 * min(adap, zero)
    assert max(adap, zero) < 0.5 * base
    # past the window both stay far below the baseline
    for alpha in (1.0, 1.2):
        adap, zero, base = by_alpha[alpha]
        assert adap <= 0.6 * base
        assert zero <= 0.6 * base


def test_zeroing_manifest_lists_artifacts(zeroing_run):
    out, manifest = zeroing_run
    names = {entry["path"] for entry in manifest.files}
    assert names == {"zeroing.csv", "zeroing_mean.csv", "zeroing.gp"}
    rows = np.loadtxt(os.path.join(out, "zeroing.csv"), delimiter=",", skiprows=1)
    # alpha, seed, three rmse columns, selected omega
    assert rows.shape[1] == 6
    assert np.all((rows[:, 5] >= 0.05) & (rows[:, 5] <= 0.95))
