"""Config parsing, CSV/VTK serialization, compare merge, exit codes."""

import shutil
import subprocess

import numpy as np
import pytest

from curllab import cli
from curllab.cli import (
    CSV_HEADER,
    ConfigError,
    RunConfig,
    compare_experiments,
    main,
    parse_config,
    parse_formulation_list,
    run_experiment,
)
from curllab.core import Formulation, PositivityError


class TestParseConfig:
    def test_empty_text_gives_defaults(self):
        cfg = parse_config("")
        assert cfg.formulation is Formulation.ORIGINAL
        assert (cfg.nx, cfg.ny) == (64, 64)
        assert cfg.t_end == 0.2
        assert cfg.ic == "vortex"
        assert cfg.record_every == 10
        assert cfg.reconstruction == "muscl"

    def test_comments_blanks_and_values(self):
        cfg = parse_config(
            "# full line comment\n"
            "\n"
            "formulation = GLM   # trailing comment\n"
            "nx = 32\n"
            "ny=48\n"
            "a_c = 5\n"
            "snapshots = 0.0, 0.1\n")
        assert cfg.formulation is Formulation.GLM
        assert (cfg.nx, cfg.ny) == (32, 48)
        assert cfg.snapshots == (0.0, 0.1)
        # derived damping rate follows the 0.1 a_c rule
        assert cfg.model_params().eps_c == pytest.approx(0.5)

    @pytest.mark.parametrize("text,fragment", [
        ("nx 32\n", "line 1"),
        ("= 3\n", "line 1"),
        ("\nwhat = 1\n", "line 2: unknown key 'what'"),
        ("nx = 16\nnx = 32\n", "line 2: duplicate key 'nx'"),
        ("nx = banana\n", "line 1: invalid value for 'nx'"),
        ("formulation = Maxwell\n", "one of Original, GodunovPowell, GLM, CurlFree"),
        ("a_c = -1\n", "a_c"),
        ("ic = tornado\n", "ic must be one of"),
        ("reconstruction = weno\n", "reconstruction must be one of"),
        ("cfl = 1.5\n", "cfl"),
        ("nx = 2\n", "nx"),
        ("record_every = 0\n", "record_every"),
        ("snapshots = 0.5\n", "snapshots"),   # default t_end = 0.2
        ("gamma = 0.5\n", "gamma"),
    ])
    def test_rejections(self, text, fragment):
        with pytest.raises(ConfigError) as err:
            parse_config(text)
        assert fragment in str(err.value)

    def test_formulation_list(self):
        forms = parse_formulation_list("Original, CurlFree")
        assert forms == [Formulation.ORIGINAL, Formulation.CURL_FREE]
        with pytest.raises(ConfigError, match="duplicate"):
            parse_formulation_list("GLM,GLM")
        with pytest.raises(ConfigError, match="one of"):
            parse_formulation_list("Original,Euler")
        with pytest.raises(ConfigError, match="empty"):
            parse_formulation_list(" , ")


SMALL = "nx = 16\nny = 16\nt_end = 0.02\nrecord_every = 2\n"


class TestRunExperiment:
    def test_series_csv_contract(self, tmp_path):
        cfg = parse_config(SMALL)
        out = run_experiment(cfg, tmp_path / "a")
        text = (out / "series.csv").read_text()
        lines = text.splitlines()
        assert lines[0] == CSV_HEADER
        rows = [line.split(",") for line in lines[1:]]
        ts = [float(r[0]) for r in rows]
        assert ts[0] == 0.0
        assert all(b > a for a, b in zip(ts, ts[1:]))
        assert ts[-1] == 0.02            # exact landing survives %.17g
        assert all(r[4] == "" for r in rows)     # divpsi blank for Original
        assert all(len(r) == 10 for r in rows)
        # 17 significant digits round-trip binary64
        assert float("%.17g" % np.pi) == np.pi

    def test_glm_fills_divpsi(self, tmp_path):
        cfg = parse_config(SMALL + "formulation = GLM\n")
        out = run_experiment(cfg, tmp_path)
        rows = (out / "series.csv").read_text().splitlines()[1:]
        assert all(r.split(",")[4] != "" for r in rows)

    def test_curlfree_runs_and_stays_clean(self, tmp_path):
        cfg = parse_config(SMALL + "formulation = CurlFree\n")
        out = run_experiment(cfg, tmp_path)
        rows = (out / "series.csv").read_text().splitlines()[1:]
        assert all(float(r.split(",")[3]) < 1e-11 for r in rows)
        assert all(r.split(",")[4] == "" for r in rows)

    def test_determinism_byte_identical(self, tmp_path):
        cfg = parse_config(SMALL + "formulation = GLM\nsnapshots = 0.01\n")
        a = run_experiment(cfg, tmp_path / "a")
        b = run_experiment(cfg, tmp_path / "b")
        assert (a / "series.csv").read_bytes() == (b / "series.csv").read_bytes()
        assert (a / "snap_0000.vtk").read_bytes() == (b / "snap_0000.vtk").read_bytes()

    def test_vtk_snapshot_layout(self, tmp_path):
        cfg = parse_config(SMALL + "snapshots = 0, 0.01, 0.02\n")
        out = run_experiment(cfg, tmp_path)
        names = sorted(p.name for p in out.glob("snap_*.vtk"))
        assert names == ["snap_0000.vtk", "snap_0001.vtk", "snap_0002.vtk"]
        lines = (out / "snap_0000.vtk").read_text().splitlines()
        assert lines[0] == "# vtk DataFile Version 2.0"
        assert lines[2] == "ASCII"
        assert lines[3] == "DATASET STRUCTURED_POINTS"
        assert lines[4] == "DIMENSIONS 17 17 1"
        assert lines[7] == "CELL_DATA 256"
        assert lines[8] == "SCALARS density double 1"
        assert lines[9] == "LOOKUP_TABLE default"
        density = [float(v) for v in lines[10:10 + 256]]
        # t = 0 snapshot of the vortex: compare against the IC directly,
        # x varying fastest
        from curllab.core import Grid2D, ModelParams, interior
        from curllab.diagnostics import standard_vortex_ic
        grid = Grid2D.unit_square(16, 16)
        rho = interior(standard_vortex_ic(grid, ModelParams(),
                                          Formulation.ORIGINAL), grid)[..., 0]
        assert density[0] == rho[0, 0]
        assert density[1] == rho[1, 0]
        assert density[16] == rho[0, 1]
        assert lines[10 + 256] == "VECTORS velocity double"
        vel = lines[11 + 256].split()
        assert len(vel) == 3
        assert "VECTORS J double" in lines

    def test_glm_snapshot_has_cleaning_fields(self, tmp_path):
        cfg = parse_config(SMALL + "formulation = GLM\nsnapshots = 0.02\n")
        out = run_experiment(cfg, tmp_path)
        text = (out / "snap_0000.vtk").read_text()
        assert "VECTORS psi double" in text
        assert "SCALARS phi_glm double 1" in text

    def test_staggered_snapshot(self, tmp_path):
        cfg = parse_config(SMALL + "formulation = CurlFree\nsnapshots = 0\n")
        out = run_experiment(cfg, tmp_path)
        text = (out / "snap_0000.vtk").read_text()
        assert "SCALARS density double 1" in text
        assert "VECTORS J double" in text
        assert "psi" not in text


class TestCompare:
    def test_merge_pads_and_copies_verbatim(self, tmp_path):
        # GLM runs at a_c-dominated dt, so it records more rows than
        # Original on the same horizon: exercises the padding path
        cfg = parse_config("nx = 16\nny = 16\nt_end = 0.05\nrecord_every = 1\n")
        forms = [Formulation.ORIGINAL, Formulation.GLM]
        out = compare_experiments(cfg, forms, tmp_path)
        lines = (out / "compare.csv").read_text().splitlines()
        assert lines[0] == "t_Original,curl_L2_Original,t_GLM,curl_L2_GLM"
        rows = [line.split(",") for line in lines[1:]]
        orig = (out / "Original" / "series.csv").read_text().splitlines()[1:]
        glm = (out / "GLM" / "series.csv").read_text().splitlines()[1:]
        assert len(glm) > len(orig)
        assert len(rows) == len(glm)
        for i, row in enumerate(rows):
            if i < len(orig):
                t, c = orig[i].split(",")[0], orig[i].split(",")[2]
                assert row[0] == t and row[1] == c
            else:
                assert row[0] == "" and row[1] == ""
            t, c = glm[i].split(",")[0], glm[i].split(",")[2]
            assert row[2] == t and row[3] == c


class TestMain:
    def write(self, tmp_path, text=SMALL):
        p = tmp_path / "run.cfg"
        p.write_text(text)
        return p

    def test_run_ok(self, tmp_path):
        cfg = self.write(tmp_path)
        assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 0
        assert (tmp_path / "o" / "series.csv").exists()

    def test_compare_ok(self, tmp_path):
        cfg = self.write(tmp_path)
        code = main(["compare", str(cfg), "--formulations",
                     "Original,CurlFree", "--out", str(tmp_path / "c")])
        assert code == 0
        assert (tmp_path / "c" / "compare.csv").exists()

    def test_config_error_exit_1(self, tmp_path, capsys):
        cfg = self.write(tmp_path, "a_c = -1\n")
        assert main(["run", str(cfg)]) == 1
        assert "a_c" in capsys.readouterr().err

    def test_missing_config_is_io_error(self, tmp_path):
        assert main(["run", str(tmp_path / "nope.cfg")]) == 3

    def test_uncreatable_out_dir_exit_3(self, tmp_path):
        cfg = self.write(tmp_path)
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert main(["run", str(cfg), "--out", str(blocker / "sub")]) == 3

    def test_solver_abort_exit_2(self, tmp_path, monkeypatch, capsys):
        cfg = self.write(tmp_path)

        def boom(config, out_dir=None):
            raise PositivityError("rho dropped to -0.1")

        monkeypatch.setattr(cli, "run_experiment", boom)
        assert main(["run", str(cfg)]) == 2
        assert "solver abort" in capsys.readouterr().err

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        from curllab import __version__
        assert capsys.readouterr().out.strip() == f"curllab {__version__}"

    def test_usage_error_exit_1(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 1

    def test_console_script_installed(self):
        exe = shutil.which("curllab")
        assert exe is not None
        proc = subprocess.run([exe, "--version"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert proc.stdout.startswith("curllab ")
