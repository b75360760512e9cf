"""Trajectory ensemble versus master equation as the step size shrinks.

The noise is held constant over each step, so the ensemble average carries a
bias that should fall with dt until it is hidden by the Monte Carlo error.

    python scripts/dt_convergence.py [N_TRAJ]
"""

import sys

import numpy as np

from gravdec.diagnostics import compare_ensemble
from gravdec.dynamics import EMFieldConfig, MasterEquation, evolve_stochastic
from gravdec.grid import Grid
from gravdec.noise import Kernel, NoiseSpec


def main(argv):
    n_traj = int(argv[0]) if argv else 4096
    grid = Grid(1, 16)
    k = Kernel("delta")
    spec = NoiseSpec(alpha=0.3, kernels={"00": k, "0i": k, "ij": k}, active=("00", "01", "11"))
    em = EMFieldConfig.off(grid)
    x = grid.coords[:, 0]
    psi = np.exp(-((x - 8) ** 2) / 8 + 0.5j * x)[:, None] * np.array([1.0, 0.0])[None, :]
    psi /= np.linalg.norm(psi)
    flat = psi.ravel()
    ref = MasterEquation(grid, spec, em).evolve(np.outer(flat, flat.conj()), 1.0, 0.001, n_samples=1).final
    print("dt       rms_error   max_z  outside")
    for dt in (0.1, 0.05, 0.02, 0.01):
        res = evolve_stochastic(psi, spec, em, 1.0, dt, seed=5, n_traj=n_traj, n_samples=1)
        c = compare_ensemble(res.final, res.stderr_re[-1], res.stderr_im[-1], ref)
        print(f"{dt:<8} {c.rms_error:.3e}  {c.max_z:6.2f}  {c.n_outside}/{c.n_elements}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
