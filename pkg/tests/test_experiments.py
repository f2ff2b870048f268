import numpy as np
import pytest

from mixdenoise import (ExperimentConfig, ExperimentKind, ImpulseType, Method,
                        ResultTable, TableFormat, emit_table, run_experiment)
from mixdenoise.experiments import (ResultRow, _cell_noise, cell_seed)


def small_config(**overrides):
    base = dict(images=("shapes",), experiment=ExperimentKind.SINGLE,
                methods=(Method.NOISY, Method.AMF), grid=(0.0,),
                seed=0, peak=20.0, crop_size=32)
    base.update(overrides)
    return ExperimentConfig(**base)


class TestConfig:
    def test_json_round_trip(self):
        cfg = small_config(impulse_type=ImpulseType.RANDOM_VALUED,
                           lambda1=1.3, rho=4.0)
        back = ExperimentConfig.from_json(cfg.to_json())
        assert back == cfg

    def test_config_hash_stable(self):
        assert small_config().config_hash() == small_config().config_hash()

    def test_config_hash_sensitive(self):
        assert small_config().config_hash() != \
            small_config(seed=1).config_hash()

    def test_rejects_unsupported_schema_version(self):
        d = small_config().to_dict()
        d["version"] = 99
        with pytest.raises(ValueError):
            ExperimentConfig.from_dict(d)

    def test_validation(self):
        with pytest.raises(ValueError):
            small_config(grid=())
        with pytest.raises(ValueError):
            small_config(methods=())
        with pytest.raises(ValueError):
            small_config(experiment=ExperimentKind.IMPULSE_SWEEP, grid=(1.5,))
        with pytest.raises(ValueError):
            small_config(experiment=ExperimentKind.PEAK_SWEEP, grid=(0.0,))


class TestCellSeed:
    def test_deterministic(self):
        a = cell_seed(0, "shapes", Method.NOISY, "peak", 20.0)
        b = cell_seed(0, "shapes", Method.NOISY, "peak", 20.0)
        assert a == b

    def test_distinct_across_coordinates(self):
        seeds = {
            cell_seed(0, "shapes", Method.NOISY, "peak", 20.0),
            cell_seed(1, "shapes", Method.NOISY, "peak", 20.0),
            cell_seed(0, "ramp", Method.NOISY, "peak", 20.0),
            cell_seed(0, "shapes", Method.AMF, "peak", 20.0),
            cell_seed(0, "shapes", Method.NOISY, "peak", 40.0),
        }
        assert len(seeds) == 5


class TestCellNoise:
    def test_peak_sweep_ties_sigma_to_peak(self):
        cfg = small_config(experiment=ExperimentKind.PEAK_SWEEP, grid=(40.0,))
        spec = _cell_noise(cfg, 40.0, 7)
        assert spec.peak == 40.0 and spec.sigma == pytest.approx(4.0)

    def test_gauss_ratio_zero_means_no_gaussian(self):
        cfg = small_config(experiment=ExperimentKind.GAUSS_RATIO_SWEEP,
                           grid=(0.0,))
        spec = _cell_noise(cfg, 0.0, 7)
        assert spec.sigma == 0.0

    def test_gauss_ratio_scales_with_sqrt_peak(self):
        cfg = small_config(experiment=ExperimentKind.GAUSS_RATIO_SWEEP,
                           grid=(0.5,), peak=16.0)
        spec = _cell_noise(cfg, 0.5, 7)
        assert spec.sigma == pytest.approx(2.0)

    def test_impulse_sweep_sets_ratio(self):
        cfg = small_config(experiment=ExperimentKind.IMPULSE_SWEEP,
                           grid=(0.3,))
        spec = _cell_noise(cfg, 0.3, 7)
        assert spec.impulse_ratio == 0.3

    def test_single_uses_config_sigma(self):
        cfg = small_config(sigma=1.25)
        spec = _cell_noise(cfg, 0.0, 7)
        assert spec.sigma == 1.25


class TestEmitTable:
    def test_header_and_one_row(self):
        t = ResultTable(rows=[ResultRow("shapes", Method.NOISY, "none",
                                        0.0, 7.1234)])
        out = emit_table(t, TableFormat.CSV).decode()
        assert out == ("image,method,grid_param,grid_value,psnr_db\n"
                       "shapes,noisy,none,0,7.12\n")

    def test_fail_and_inf_rows(self):
        t = ResultTable(rows=[
            ResultRow("a", Method.NOISY, "none", 0.0, None),
            ResultRow("a", Method.AMF, "none", 0.0, float("inf"))])
        out = emit_table(t, TableFormat.CSV).decode()
        assert "a,noisy,none,0,FAIL" in out
        assert "a,amf,none,0,inf" in out

    def test_rows_sorted_deterministically(self):
        rows = [ResultRow("b", Method.NOISY, "peak", 20.0, 1.0),
                ResultRow("a", Method.NOISY, "peak", 40.0, 2.0),
                ResultRow("a", Method.NOISY, "peak", 20.0, 3.0)]
        out = emit_table(ResultTable(rows=rows), TableFormat.CSV)
        lines = out.decode().splitlines()[1:]
        assert lines == ["a,noisy,peak,20,3.00", "a,noisy,peak,40,2.00",
                         "b,noisy,peak,20,1.00"]

    def test_empty_table_is_header_only(self):
        out = emit_table(ResultTable(), TableFormat.CSV).decode()
        assert out == "image,method,grid_param,grid_value,psnr_db\n"

    def test_markdown_format(self):
        t = ResultTable(rows=[ResultRow("shapes", Method.AMF, "none",
                                        0.0, 12.5)])
        out = emit_table(t, TableFormat.MARKDOWN).decode()
        assert out.startswith("| image | method |")
        assert "| shapes | amf | none | 0 | 12.50 |" in out


class TestRunExperiment:
    def test_small_run_produces_all_cells(self):
        cfg = small_config(experiment=ExperimentKind.IMPULSE_SWEEP,
                           grid=(0.2, 0.5))
        table = run_experiment(cfg)
        assert len(table.rows) == 4  # 1 image x 2 grid x 2 methods
        assert all(r.psnr_db is not None for r in table.rows)
        assert table.metadata["config_hash"] == cfg.config_hash()

    def test_rerun_is_byte_identical(self):
        cfg = small_config(experiment=ExperimentKind.IMPULSE_SWEEP,
                           grid=(0.3,), seed=5)
        a = emit_table(run_experiment(cfg), TableFormat.CSV)
        b = emit_table(run_experiment(cfg), TableFormat.CSV)
        assert a == b

    def test_bad_image_becomes_fail_row(self):
        cfg = small_config(images=("shapes", "no-such-file.pgm"))
        table = run_experiment(cfg)
        bad = [r for r in table.rows if r.image == "no-such-file.pgm"]
        assert bad and all(r.psnr_db is None for r in bad)
        good = [r for r in table.rows if r.image == "shapes"]
        assert good and all(r.psnr_db is not None for r in good)
        assert "FAIL" in emit_table(table, TableFormat.CSV).decode()

    def test_lookup(self):
        cfg = small_config()
        table = run_experiment(cfg)
        assert table.lookup("shapes", Method.NOISY, 0.0) is not None
        with pytest.raises(KeyError):
            table.lookup("shapes", Method.TV, 0.0)

    def test_solver_method_cell(self, tmp_path):
        cfg = small_config(methods=(Method.NOISY, Method.TV), crop_size=24,
                           lambda1=1.2, rho=5.0, inner_iters=40,
                           lut_cache=str(tmp_path))
        table = run_experiment(cfg)
        noisy_db = table.lookup("shapes", Method.NOISY, 0.0)
        tv_db = table.lookup("shapes", Method.TV, 0.0)
        assert tv_db is not None and tv_db > noisy_db
