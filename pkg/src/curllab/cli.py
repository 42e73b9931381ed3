"""Experiment driver.

Parses a flat key = value config, runs one formulation (or all four for
a side-by-side comparison), and serializes the diagnostics time series
as CSV plus optional legacy-VTK field snapshots.

Exit codes: 0 success, 1 config or usage error, 2 solver abort
(positivity or constraint violation), 3 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .core import (
    ConstraintError,
    Formulation,
    Grid2D,
    ModelParams,
    PositivityError,
    interior,
    split_state,
)
from .curlfree import StaggeredJ, run_curlfree, vertex_to_center
from .diagnostics import INITIAL_CONDITIONS, Recorder
from .fv_solver import RECONSTRUCTIONS, SolverConfig, run
from .models import glm_system, godunov_powell_system, original_system

__all__ = [
    "ConfigError",
    "RunConfig",
    "parse_config",
    "run_experiment",
    "compare_experiments",
    "merge_curl_csv",
    "write_series_csv",
    "main",
]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_IO = 3

CSV_HEADER = "t,curl_L1,curl_L2,curl_Linf,divpsi_L2,mass,mom1,mom2,mom3,energy"

_SYSTEMS = {
    Formulation.ORIGINAL: original_system,
    Formulation.GODUNOV_POWELL: godunov_powell_system,
    Formulation.GLM: glm_system,
}


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""


def _fmt(x: float) -> str:
    return "%.17g" % x


def _parse_formulation(text: str) -> Formulation:
    try:
        return Formulation(text)
    except ValueError:
        valid = ", ".join(f.value for f in Formulation)
        raise ValueError(f"must be one of {valid}") from None


def _parse_floats(text: str):
    items = [p.strip() for p in text.split(",") if p.strip()]
    return tuple(float(p) for p in items)


# key -> converter from the raw config string
_PARSERS = {
    "formulation": _parse_formulation,
    "nx": int,
    "ny": int,
    "t_end": float,
    "record_every": int,
    "ic": str,
    "out_dir": str,
    "snapshots": _parse_floats,
    "reconstruction": str,
    "cfl": float,
    "c0": float,
    "k0": float,
    "gamma": float,
    "a_c": float,
    "a_d": float,
    "eps_c": float,
    "eps_d": float,
}


@dataclass(frozen=True)
class RunConfig:
    """One experiment: formulation, grid, physics, outputs."""

    formulation: Formulation = Formulation.ORIGINAL
    nx: int = 64
    ny: int = 64
    t_end: float = 0.2
    record_every: int = 10
    ic: str = "vortex"
    out_dir: str = "out"
    snapshots: tuple = ()
    reconstruction: str = "muscl"
    cfl: float = 0.45
    c0: float = 1.0
    k0: float = 1.0
    gamma: float = 2.0
    a_c: float = 5.0
    a_d: float | None = None
    eps_c: float | None = None
    eps_d: float | None = None

    def __post_init__(self):
        if self.nx < 4:
            raise ConfigError("nx must be an integer >= 4")
        if self.ny < 4:
            raise ConfigError("ny must be an integer >= 4")
        if not self.t_end >= 0.0:
            raise ConfigError("t_end must be >= 0")
        if self.record_every < 1:
            raise ConfigError("record_every must be an integer >= 1")
        if self.ic not in INITIAL_CONDITIONS:
            known = ", ".join(sorted(INITIAL_CONDITIONS))
            raise ConfigError(f"ic must be one of {known}")
        if not self.out_dir:
            raise ConfigError("out_dir must be a non-empty path")
        if self.reconstruction not in RECONSTRUCTIONS:
            raise ConfigError(
                "reconstruction must be one of " + ", ".join(RECONSTRUCTIONS))
        if not 0.0 < self.cfl < 1.0:
            raise ConfigError("cfl must lie in (0, 1)")
        for s in self.snapshots:
            if not 0.0 <= s <= self.t_end:
                raise ConfigError("snapshots must lie within [0, t_end]")
        try:
            self.model_params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def model_params(self) -> ModelParams:
        return ModelParams(c0=self.c0, k0=self.k0, gamma=self.gamma,
                           a_c=self.a_c, a_d=self.a_d,
                           eps_c=self.eps_c, eps_d=self.eps_d, cfl=self.cfl)

    def grid(self) -> Grid2D:
        return Grid2D.unit_square(self.nx, self.ny)

    def solver_config(self) -> SolverConfig:
        return SolverConfig(t_end=self.t_end, cfl=self.cfl,
                            reconstruction=self.reconstruction,
                            record_every=self.record_every)


def parse_config(text: str) -> RunConfig:
    """Parse flat `key = value` lines; `#` starts a comment.

    Unknown and duplicate keys are rejected with the line number; an
    empty file yields the all-defaults configuration.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(
                f"line {lineno}: invalid value for {key!r}: {exc}") from None
    return RunConfig(**values)


def write_series_csv(path: Path, records) -> None:
    """Serialize DiagnosticsRecords; floats carry 17 significant digits."""
    lines = [CSV_HEADER]
    for r in records:
        divpsi = "" if r.divpsi_l2 is None else _fmt(r.divpsi_l2)
        lines.append(",".join((
            _fmt(r.t), _fmt(r.curl_l1), _fmt(r.curl_l2), _fmt(r.curl_linf),
            divpsi, _fmt(r.mass), _fmt(r.momentum[0]), _fmt(r.momentum[1]),
            _fmt(r.momentum[2]), _fmt(r.energy))))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def _write_vtk(path: Path, grid: Grid2D, t: float, fields) -> None:
    # legacy ASCII structured-points file; cell data, x varies fastest
    lines = [
        "# vtk DataFile Version 2.0",
        f"curllab snapshot t={_fmt(t)}",
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {grid.nx + 1} {grid.ny + 1} 1",
        f"ORIGIN {_fmt(grid.x0)} {_fmt(grid.y0)} 0",
        f"SPACING {_fmt(grid.dx)} {_fmt(grid.dy)} 1",
        f"CELL_DATA {grid.nx * grid.ny}",
    ]
    for kind, name, data in fields:
        if kind == "scalars":
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(_fmt(v) for v in data.T.ravel())
        else:
            a1, a2, a3 = (np.asarray(c).T.ravel() for c in data)
            lines.append(f"VECTORS {name} double")
            lines.extend(f"{_fmt(x)} {_fmt(y)} {_fmt(z)}"
                         for x, y, z in zip(a1, a2, a3))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def _collocated_snapshot(path, grid, t, q, formulation):
    view = split_state(interior(q, grid), formulation)
    rho = view.rho
    v = [view.m[..., k] / rho for k in range(3)]
    fields = [
        ("scalars", "density", rho),
        ("vectors", "velocity", v),
        ("vectors", "J", [view.J[..., k] for k in range(3)]),
    ]
    if formulation is Formulation.GLM:
        fields.append(("vectors", "psi", [view.psi[..., k] for k in range(3)]))
        fields.append(("scalars", "phi_glm", view.phi))
    _write_vtk(path, grid, t, fields)


def _staggered_snapshot(path, grid, t, q4, J: StaggeredJ):
    qi = interior(q4, grid)
    rho = qi[..., 0]
    v = [qi[..., 1 + k] / rho for k in range(3)]
    Jc = vertex_to_center(J)
    fields = [
        ("scalars", "density", rho),
        ("vectors", "velocity", v),
        ("vectors", "J", [Jc[..., 0], Jc[..., 1], np.zeros_like(rho)]),
    ]
    _write_vtk(path, grid, t, fields)


def run_experiment(config: RunConfig, out_dir=None) -> Path:
    """Run one formulation; write series.csv and snapshot .vtk files.

    Returns the output directory.  Deterministic: identical configs
    produce byte-identical files.
    """
    out = Path(out_dir) if out_dir is not None else Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    params = config.model_params()
    grid = config.grid()
    solver = config.solver_config()
    recorder = Recorder(grid, params, config.formulation)
    snaps = sorted(set(config.snapshots))
    snap_index = {s: i for i, s in enumerate(snaps)}
    mid_times = [s for s in snaps if 0.0 < s < config.t_end]
    ic = INITIAL_CONDITIONS[config.ic]

    def snap_path(t):
        return out / f"snap_{snap_index[t]:04d}.vtk"

    if config.formulation is Formulation.CURL_FREE:
        q4, J = ic(grid, params, config.formulation)
        if 0.0 in snap_index:
            _staggered_snapshot(snap_path(0.0), grid, 0.0, q4, J)

        def on_stop(t, q, Jv):
            _staggered_snapshot(snap_path(t), grid, t, q, Jv)

        qf, Jf, tf, _ = run_curlfree(
            q4, J, grid, params, solver,
            on_record=recorder.record_staggered,
            stop_times=mid_times, on_stop=on_stop)
        if config.t_end in snap_index and config.t_end > 0.0:
            _staggered_snapshot(snap_path(config.t_end), grid, tf, qf, Jf)
    else:
        system = _SYSTEMS[config.formulation](params)
        q0 = ic(grid, params, config.formulation)
        if 0.0 in snap_index:
            _collocated_snapshot(snap_path(0.0), grid, 0.0, q0,
                                 config.formulation)

        def on_stop(t, q):
            _collocated_snapshot(snap_path(t), grid, t, q, config.formulation)

        qf, tf, _ = run(q0, system, grid, solver,
                        on_record=recorder.record_collocated,
                        stop_times=mid_times, on_stop=on_stop)
        if config.t_end in snap_index and config.t_end > 0.0:
            _collocated_snapshot(snap_path(config.t_end), grid, tf, qf,
                                 config.formulation)

    write_series_csv(out / "series.csv", recorder.records)
    return out


def parse_formulation_list(text: str):
    tags = [p.strip() for p in text.split(",") if p.strip()]
    if not tags:
        raise ConfigError("formulation list is empty")
    if len(set(tags)) != len(tags):
        raise ConfigError("duplicate formulation in list")
    try:
        return [_parse_formulation(t) for t in tags]
    except ValueError as exc:
        raise ConfigError(f"formulations: {exc}") from None


def merge_curl_csv(tagged_series) -> str:
    """Merge (tag, series-csv-text) pairs into the comparison layout.

    One (t_<tag>, curl_L2_<tag>) column pair per series; cells are
    copied verbatim and columns are tail-padded with empty cells when
    series lengths differ (formulations step at different dt).
    """
    columns = []
    for tag, text in tagged_series:
        cells = [row.split(",") for row in text.splitlines()[1:]]
        columns.append((tag, [c[0] for c in cells], [c[2] for c in cells]))
    nrows = max(len(ts) for _, ts, _ in columns)
    header = ",".join(f"t_{tag},curl_L2_{tag}" for tag, _, _ in columns)
    lines = [header]
    for i in range(nrows):
        row = []
        for _, ts, curls in columns:
            row.append(ts[i] if i < len(ts) else "")
            row.append(curls[i] if i < len(curls) else "")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def compare_experiments(config: RunConfig, formulations, out_dir=None) -> Path:
    """Run each formulation into its own subdirectory, then merge."""
    out = Path(out_dir) if out_dir is not None else Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tagged = []
    for form in formulations:
        sub = dataclasses.replace(config, formulation=form)
        run_dir = run_experiment(sub, out / form.value)
        tagged.append(
            (form.value, (run_dir / "series.csv").read_text(encoding="ascii")))
    (out / "compare.csv").write_text(merge_curl_csv(tagged), encoding="ascii")
    return out


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; keep 2 reserved for solver aborts
    def error(self, message):
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="curllab",
        description="Curl-involution solver laboratory: run experiments "
                    "defined by a flat key = value config file.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a single experiment")
    p_run.add_argument("config", help="path to the config file")
    p_run.add_argument("--out", default=None, metavar="DIR",
                       help="output directory (overrides out_dir)")
    p_cmp = sub.add_parser(
        "compare", help="run several formulations and merge their curl series")
    p_cmp.add_argument("config", help="path to the config file")
    p_cmp.add_argument("--formulations", required=True, metavar="A,B,...",
                       help="comma-separated formulation tags")
    p_cmp.add_argument("--out", default=None, metavar="DIR",
                       help="output directory (overrides out_dir)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8")
        config = parse_config(text)
        if args.command == "run":
            run_experiment(config, args.out)
        else:
            compare_experiments(config, parse_formulation_list(args.formulations),
                                args.out)
    except ConfigError as exc:
        print(f"curllab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PositivityError, ConstraintError) as exc:
        print(f"curllab: solver abort: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"curllab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
