import math

import numpy as np
import pytest

import ivgan


def test_grid_samples_cover_all_modes():
    x = ivgan.sample_dataset("grid", 10000, seed=3)
    assert x.shape == (10000, 2)
    rep = ivgan.mode_coverage(x, "grid", min_count=20)
    assert rep["modes_covered"] == 25
    assert rep["kl_to_uniform"] < 0.01
    assert sum(rep["counts"]) + rep["unassigned_fraction"] * 10000 == pytest.approx(10000)


def test_point_mass_kl():
    x = np.tile([[0.0, 0.0]], (400, 1))
    rep = ivgan.mode_coverage(x, "grid", min_count=20)
    assert rep["modes_covered"] == 1
    assert rep["kl_to_uniform"] == pytest.approx(math.log(25))


def test_multi_js_extremes():
    assert ivgan.multi_js_discrete([[0.5, 0.5], [0.5, 0.5]]) == pytest.approx(0.0, abs=1e-15)
    assert ivgan.multi_js_discrete([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == pytest.approx(math.log(3))
    with pytest.raises(ValueError):
        ivgan.multi_js_discrete([[0.5, 0.6]])


def test_square_table():
    rows = ivgan.square_fitting_table([0.0, 0.5, 1.0], mc_samples=20000, seed=1)
    assert [r["a"] for r in rows] == [0.0, 0.5, 1.0]
    for r in rows:
        assert r["js_two"] == pytest.approx(math.log(2), abs=1e-12)
    assert rows[0]["l_iv_exact"] == pytest.approx(math.log(2))
    assert rows[2]["l_iv_exact"] == pytest.approx(2 * math.log(2))
    assert abs(rows[1]["l_iv_mc"] - rows[1]["l_iv_exact"]) < 4 * rows[1]["mc_stderr"]


def test_config_round_trip_and_errors():
    text = ivgan.parse_config("seed = 1\n", {"seed": "2"})
    assert "seed = 2" in text.splitlines()
    assert ivgan.parse_config(text) == text
    with pytest.raises(ivgan.ConfigError) as err:
        ivgan.parse_config("latent_dim = 9\n")
    assert err.value.key == "latent_dim"
    assert err.value.line == 1


def test_short_training_run(tmp_path):
    code, out = ivgan.train(
        "total_iters = 4\neval_every = 2\nbatch_size = 8\nhidden = 8\neval_samples = 100\n",
        {"out_dir": str(tmp_path)},
    )
    assert code == 0
    assert "modes_covered" in out
    lines = (tmp_path / "metrics.csv").read_text().splitlines()
    assert lines[0].startswith("iter,loss_d")
    assert len(lines) == 3
    tensors = ivgan.load_checkpoint_tensors(tmp_path / "final.ivgn")
    assert tensors["generator.w0"].shape == (8, 8)
    code, out = ivgan.evaluate("", {"checkpoint": str(tmp_path / "final.ivgn")})
    assert code == 0
    assert "theorem2_cdf_check" in out


def test_anneal():
    assert ivgan.anneal_noise(100, 1000, 0.1, 0.2) == pytest.approx(0.05)
