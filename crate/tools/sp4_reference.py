"""Generate the standard problem #4 (field 1) reference trajectory with magnum.np.

Runs the same staged protocol as the `sp4` built-in problem:
  - 166 x 42 x 1 cells of 3 nm, Ms = 800 kA/m, A = 1.3e-11 J/m, no anisotropy
  - alpha = 0.5, field (100, 100, 100) kA/m until step 4000
  - linear ramp (6000 - step) / 20 kA/m per component until step 6000
  - zero field until step 50000
  - alpha = 0.02, field (-19.576, 3.422, 0) kA/m afterwards
with one step = 5e-6 ns. magnum.np integrates with adaptive RKF45 and uses the
cell-averaged Newell demag kernel, so it is independent of the Rust pipeline.

Output: headerless TSV `step  mx  my  mz` every 1000 steps, the same layout
as the simulator's trajectory file.

Usage: python3 tools/sp4_reference.py [output.tsv] [total_steps]
"""

import sys

import torch
from magnumnp import (DemagField, ExchangeField, ExternalField, LLGSolver,
                      Mesh, State, constants)

DT = 5e-15  # s (5e-6 ns), one step of the explicit driver
CADENCE = 1000
STEPS = 150000

# gamma * mu0 = 0.221 (kA/m)^-1 ns^-1 as in the Rust unit system
constants.gamma = 2.21e5

torch.set_default_dtype(torch.float64)


def applied(step, reversed_):
    """Field in A/m at fractional step `step`; the ramp is continuous in time."""
    if reversed_:
        h = (-19.576, 3.422, 0.0)
    elif step <= 4000:
        h = (100.0, 100.0, 100.0)
    elif step <= 6000:
        v = (6000.0 - step) / 20.0
        h = (v, v, v)
    else:
        h = (0.0, 0.0, 0.0)
    return [1e3 * c for c in h]


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "sp4_reference.tsv"
    steps = int(sys.argv[2]) if len(sys.argv) > 2 else STEPS

    mesh = Mesh((166, 42, 1), (3e-9, 3e-9, 3e-9))
    state = State(mesh)
    state.material = {"Ms": 8e5, "A": 1.3e-11, "alpha": 0.5}
    state.m = state.Constant([1.0, 0.0, 0.0])

    phase = {"reversed": False}

    def field(state):
        return applied(float(state.t) / DT, phase["reversed"])

    llg = LLGSolver([DemagField(), ExchangeField(), ExternalField(field)])

    with open(out, "w") as f:
        for block in range(1, steps // CADENCE + 1):
            end = block * CADENCE
            start = end - CADENCE
            # integrate piecewise so that field discontinuities fall on step edges
            s = start
            for edge in (4000, 6000, 50000):
                if s < edge < end:
                    llg.step(state, (edge - s) * DT)
                    s = edge
            if s >= 50000 and not phase["reversed"]:
                phase["reversed"] = True
                state.material["alpha"] = 0.02
            llg.step(state, (end - s) * DT)
            m = state.m.mean(dim=(0, 1, 2))
            f.write("%d\t%f\t%f\t%f\n" % (end, m[0], m[1], m[2]))
            f.flush()


if __name__ == "__main__":
    main()
