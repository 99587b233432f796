import json
import os

import numpy as np
import pytest

from udlab import cli, lab
from udlab import sequences as sq
from udlab.numerics import derive_seed


def small_config(**overrides):
    base = dict(kind="curve-product", functions=["x", "x^2"],
                sequences=["identity", "identity"], x_interval=(0.05, 0.95),
                x_samples=4, seed=7, n_grid="pow2:6..9", frequency_bound=2,
                discrepancy_method="grid", grid_m=128,
                dstar_final_max=0.2, label="probe")
    base.update(overrides)
    return lab.ExperimentConfig(**base)


class TestGridAndGeneratorSpecs:
    def test_grid_forms(self):
        assert lab.parse_grid("pow2:3..5") == [8, 16, 32]
        assert lab.parse_grid("4,2,8,8") == [2, 4, 8]
        assert lab.parse_grid("linear:10:30:3") == [10, 20, 30]
        sub = lab.parse_grid("sublacunary:0.5:100")
        assert sub[0] == 3 and sub[-1] == 100
        assert all(b > a for a, b in zip(sub, sub[1:]))

    def test_generator_spec(self):
        gen = lab.parse_generator("x=0.3; prod:identity|x; prod:identity|x^2")
        assert gen.dim == 2
        pts = gen.fracs(np.arange(1, 5))
        assert pts.shape == (4, 2)
        assert pts[0, 0] == pytest.approx(0.3)
        assert pts[0, 1] == pytest.approx(0.09)

    def test_tower_spec(self):
        gen = lab.parse_generator("x=1.5; tower:x|identity")
        pts = gen.fracs(np.arange(1, 4))
        assert pts[:, 0] == pytest.approx([0.5, 0.25, 0.375])

    def test_spec_errors(self):
        with pytest.raises(ValueError):
            lab.parse_generator("prod:identity|x")  # missing x=
        with pytest.raises(ValueError):
            lab.parse_generator("x=1; frob:identity|x")

    def test_index_family_spec(self):
        assert lab.parse_index_family("prefixes") == sq.prefixes()
        assert lab.parse_index_family("geometric:rho=2") == sq.geometric(2.0)
        assert lab.parse_index_family("strided:c=3") == sq.strided(3)


class TestConfig:
    def test_kind_validation(self):
        with pytest.raises(ValueError):
            lab.ExperimentConfig(kind="nope")
        with pytest.raises(ValueError):
            lab.ExperimentConfig(kind="curve-product", functions=["x"],
                                 sequences=[])
        with pytest.raises(ValueError):
            lab.ExperimentConfig(kind="power-tower-pair", tower_base="x",
                                 tower_sequences=["identity"])

    def test_json_round_trip(self, tmp_path):
        config = small_config()
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config.to_dict()))
        again = lab.ExperimentConfig.from_json_file(str(path))
        assert again == config


class TestSampleSeeding:
    def test_sample_positions_are_index_local(self):
        c5 = small_config(x_samples=5)
        c3 = small_config(x_samples=3)
        xs5 = [lab.sample_x(c5, i) for i in range(3)]
        xs3 = [lab.sample_x(c3, i) for i in range(3)]
        assert xs5 == xs3  # dropping samples never shifts earlier streams

    def test_seed_changes_positions(self):
        a = lab.sample_x(small_config(seed=1), 0)
        b = lab.sample_x(small_config(seed=2), 0)
        assert a != b

    def test_derive_seed_stable(self):
        assert derive_seed(5, 3) == derive_seed(5, 3)
        assert derive_seed(5, 3) != derive_seed(5, 4)


class TestRunExperiment:
    def test_curve_product_runs_and_passes(self):
        report = lab.run_experiment(small_config())
        assert report.verdict == "pass"
        assert report.pass_fraction == 1.0
        assert len(report.samples) == 4
        assert not report.partial
        assert report.grid == [64, 128, 256, 512]
        assert len(report.dstar_median) == 4

    def test_threshold_verdict_is_pure(self):
        report = lab.run_experiment(small_config())
        assert lab.evaluate_thresholds(report) == report.verdict

    def test_tight_threshold_fails(self):
        report = lab.run_experiment(small_config(dstar_final_max=1e-6))
        assert report.verdict == "fail"
        assert len(report.exceptional) > 0

    def test_diagonal_counterexample_kind(self):
        config = lab.ExperimentConfig(kind="diagonal-counterexample",
                                      x_samples=3, seed=5, n_grid="pow2:5..7",
                                      frequency_bound=2, label="diag")
        report = lab.run_experiment(config)
        for s in report.samples:
            assert all(m == 1.0 for m in s.weyl_max)

    def test_worker_counts_agree(self):
        r1 = lab.run_experiment(small_config(), workers=1)
        r2 = lab.run_experiment(small_config(), workers=3)
        for a, b in zip(r1.samples, r2.samples):
            assert a.x == b.x
            assert a.discrepancy.values == b.discrepancy.values
            assert a.weyl_max == b.weyl_max

    def test_power_tower_pair_exploratory(self):
        config = lab.ExperimentConfig(
            kind="power-tower-pair", tower_base="x",
            tower_sequences=["identity", "affine:alpha=2,beta=0"],
            x_interval=(1.1, 1.9), x_samples=2, seed=3,
            n_grid="pow2:5..8", frequency_bound=1, label="pair")
        report = lab.run_experiment(config)
        assert report.verdict is None  # no threshold configured: exploratory
        assert report.dstar_median[-1] < 0.5

    def test_sample_errors_attach_and_run_continues(self):
        # tower base g(x) = x dips below 1 for some samples on (0.5, 1.5):
        # those samples record the error, the rest still produce reports
        config = lab.ExperimentConfig(
            kind="power-tower-pair", tower_base="x",
            tower_sequences=["identity", "affine:alpha=2,beta=0"],
            x_interval=(0.5, 1.5), x_samples=8, seed=11,
            n_grid="pow2:5..7", frequency_bound=1, label="partial")
        report = lab.run_experiment(config)
        failed = [s for s in report.samples if s.error is not None]
        good = [s for s in report.samples if s.error is None]
        assert failed and good
        assert report.partial
        assert all("exceed 1" in s.error for s in failed)
        assert all(s.index in report.exceptional for s in failed)
        assert all(s.discrepancy is not None for s in good)


class TestEmission:
    def test_csv_byte_stability(self, tmp_path):
        config = small_config()
        paths = []
        for tag in ("a", "b"):
            report = lab.run_experiment(config)
            p = tmp_path / f"{tag}.csv"
            lab.emit_csv(report, str(p))
            paths.append(p.read_bytes())
        assert paths[0] == paths[1]

    def test_empty_report_header_only(self, tmp_path):
        config = small_config(dstar_final_max=None)
        report = lab.run_experiment(config)
        report.samples = []
        p = tmp_path / "empty.csv"
        lab.emit_csv(report, str(p))
        assert p.read_text() == "sample,x,N,dstar,err_bound,method\n"

    def test_svg_structure(self, tmp_path):
        report = lab.run_experiment(small_config())
        p = tmp_path / "plot.svg"
        lab.emit_svg(report, str(p))
        text = p.read_text()
        assert text.count('class="sample"') == 4
        assert text.count('class="median"') == 1
        assert ">N</text>" in text and ">D*</text>" in text

    def test_svg_byte_stability(self, tmp_path):
        blobs = []
        for tag in ("a", "b"):
            report = lab.run_experiment(small_config())
            p = tmp_path / f"{tag}.svg"
            lab.emit_svg(report, str(p))
            blobs.append(p.read_bytes())
        assert blobs[0] == blobs[1]

    def test_io_error_carries_path(self):
        report = lab.run_experiment(small_config())
        with pytest.raises(OSError) as info:
            lab.emit_csv(report, "/nonexistent-dir/x.csv")
        assert "/nonexistent-dir/x.csv" in str(info.value)

    def test_golden_one_dimensional_csv(self, tmp_path):
        # frozen fixture; every dstar entry re-derived here from the exact
        # sorted formula on independently generated points
        from udlab.discrepancy import star_discrepancy_1d

        config = lab.ExperimentConfig(
            kind="custom", coordinates=["prod:identity|x"],
            x_interval=(0.05, 0.95), x_samples=2, seed=613,
            n_grid="pow2:7..10", frequency_bound=2,
            discrepancy_method="auto", label="golden-1d")
        report = lab.run_experiment(config)
        p = tmp_path / "golden.csv"
        lab.emit_csv(report, str(p))
        fixture = os.path.join(os.path.dirname(__file__), "fixtures",
                               "golden_1d_dstar.csv")
        assert p.read_bytes() == open(fixture, "rb").read()
        from udlab.numerics import frac_product
        for line in p.read_text().splitlines()[1:]:
            _, x, N, dstar = line.split(",")[:4]
            # frac(n*x) to full double precision (a plain (n*x) % 1 is off
            # by a few ulps), then the independent sorted formula
            pts = frac_product(np.arange(1, int(N) + 1, dtype=float), float(x))
            assert float(dstar) == star_discrepancy_1d(pts)


class TestCli:
    def test_selftest_passes(self, capsys):
        assert cli.main(["selftest"]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out

    def test_growth_exit_codes(self, capsys):
        assert cli.main(["growth", "--seq", "identity", "--eps", "1",
                         "--g", "0.5", "--N", "100"]) == 0
        assert cli.main(["growth", "--seq", "sqrtres", "--eps", "0.1",
                         "--g", "0.5", "--N", "100"]) == 1

    def test_usage_error_exit_code(self, capsys):
        with pytest.raises(SystemExit) as info:
            cli.main(["scatter", "--delta", "1"])  # missing required args
        assert info.value.code == 2
        assert cli.main(["scatter", "--seq", "wat", "--delta", "1",
                         "--grid", "pow2:3..6"]) == 2

    def test_scatter_csv_output(self, tmp_path, capsys):
        path = tmp_path / "s.csv"
        code = cli.main(["scatter", "--seq", "identity", "--delta", "1",
                         "--grid", "8,16,32,64", "--csv", str(path)])
        assert code == 0
        lines = path.read_text().splitlines()
        assert lines[0] == "N,S,eps_pointwise,method,err_bound"
        assert len(lines) == 5

    def test_experiment_cli_outputs(self, tmp_path, capsys):
        config = small_config().to_dict()
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(config))
        out_dir = tmp_path / "out"
        code = cli.main(["experiment", "--config", str(cfg_path),
                         "--out", str(out_dir)])
        assert code == 0
        names = sorted(os.listdir(out_dir))
        assert names == ["probe_dstar.csv", "probe_dstar.svg",
                         "probe_provenance.json", "probe_quantiles.csv",
                         "probe_weyl.csv"]
        prov = json.loads((out_dir / "probe_provenance.json").read_text())
        assert prov["config"]["kind"] == "curve-product"
        assert prov["constants"]["tower_guard_bits"] == 96

    def test_experiment_threshold_failure_exit(self, tmp_path, capsys):
        config = small_config(dstar_final_max=1e-6).to_dict()
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(config))
        code = cli.main(["experiment", "--config", str(cfg_path),
                         "--out", str(tmp_path / "out")])
        assert code == 1

    def test_oscdecay_runs(self, capsys):
        code = cli.main(["oscdecay", "--f", "x", "--interval", "0,1",
                         "--radii", "halfpow2:2..8", "--dirs", "1"])
        assert code == 0
        out = capsys.readouterr().out
        assert "delta_hat=1.0" in out

    def test_weylsum_runs(self, capsys):
        code = cli.main(["weylsum", "--gen", "x=0.5; prod:identity|x",
                         "--v", "1", "--grid", "2,4,8",
                         "--sets", "strided:c=2"])
        assert code == 0
        assert "1.0" in capsys.readouterr().out

    def test_discrepancy_runs(self, capsys):
        code = cli.main(["discrepancy", "--gen", "x=0.618; prod:identity|x",
                         "--grid", "100,1000", "--method", "auto"])
        assert code == 0
