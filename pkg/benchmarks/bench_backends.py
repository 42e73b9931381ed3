"""Wall-time comparison of the sweep backends.

Steps the standard vortex with each available backend and reports
seconds per step plus the speedup of the compiled kernel over the numpy
reference.  The state is advanced with a fixed time step so both
backends do identical work.

    python3 benchmarks/bench_backends.py --n 128 --steps 25
"""

import argparse
import time

import numpy as np

from curllab import _kernels
from curllab.core import Grid2D, ModelParams
from curllab.diagnostics import standard_vortex_ic
from curllab.fv_solver import SolverConfig, compute_dt, step
from curllab.models import glm_system, godunov_powell_system, original_system

BUILDERS = {
    "Original": original_system,
    "GodunovPowell": godunov_powell_system,
    "GLM": glm_system,
}


def time_backend(name, system, q0, grid, config, dt, steps):
    _kernels.use_backend(name)
    q = q0.copy()
    q, _ = step(q, system, grid, config, dt=dt)   # warm up / JIT caches
    q = q0.copy()
    t0 = time.perf_counter()
    for _ in range(steps):
        q, _ = step(q, system, grid, config, dt=dt)
    elapsed = time.perf_counter() - t0
    return elapsed / steps, q


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=128, help="grid cells per side")
    ap.add_argument("--steps", type=int, default=25, help="timed steps")
    ap.add_argument("--reconstruction", default="muscl",
                    choices=("first_order", "muscl"))
    args = ap.parse_args(argv)

    grid = Grid2D.unit_square(args.n, args.n)
    params = ModelParams()
    config = SolverConfig(t_end=1.0, reconstruction=args.reconstruction)
    backends = _kernels.available_backends()
    saved = _kernels.active_backend()

    print(f"grid {args.n}x{args.n}, {args.reconstruction}, "
          f"{args.steps} steps, backends: {', '.join(backends)}")
    header = f"{'formulation':14s}" + "".join(f"{b:>14s}" for b in backends)
    print(header + ("       speedup" if len(backends) > 1 else ""))
    try:
        for label, builder in BUILDERS.items():
            system = builder(params)
            q0 = standard_vortex_ic(grid, params, system.formulation)
            dt = 0.5 * compute_dt(q0, system, grid, config.cfl)
            row = f"{label:14s}"
            per_step = {}
            final = {}
            for name in backends:
                per_step[name], final[name] = time_backend(
                    name, system, q0, grid, config, dt, args.steps)
                row += f"{per_step[name] * 1e3:11.2f} ms"
            if len(backends) > 1:
                row += f"{per_step['reference'] / per_step['accel']:13.1f}x"
                drift = np.max(np.abs(final["accel"] - final["reference"]))
                if drift > 1e-12:
                    row += f"  (backends disagree by {drift:.2e}!)"
            print(row)
    finally:
        _kernels.use_backend(saved)


if __name__ == "__main__":
    main()
