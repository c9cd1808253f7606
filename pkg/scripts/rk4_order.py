"""Step-halving study of the RK4 integrator on uniform-B gyration.

The orbit with |p| = 1 in B = (0, 0, 1) closes after 2 pi sqrt(2); the
end-state error should drop by about 16 per halving.

    python3 scripts/rk4_order.py --steps 250 500 1000 2000 4000
"""
import argparse
import math
from dataclasses import dataclass, field

import numpy as np

from lorentz_orbits import catalog
from lorentz_orbits.dynamics import PhaseState, integrate


@dataclass
class Experiment:
    steps: list = field(default_factory=lambda: [250, 500, 1000, 2000, 4000, 8000])
    momentum: float = 1.0
    B0: float = 1.0


def run(exp):
    period = 2 * math.pi * math.sqrt(1 + exp.momentum**2) / exp.B0
    pair = catalog.make("uniform_field", period, B=(0, 0, exp.B0))
    s0 = PhaseState(np.zeros(3), np.array([exp.momentum, 0.0, 0.0]), 0.0)
    prev = None
    for n in exp.steps:
        end = integrate(pair, s0, period, n)[-1]
        err = float(np.linalg.norm(end.position) + np.linalg.norm(end.momentum - s0.momentum))
        order = "" if prev is None else f"{math.log2(prev / err):.3f}"
        print(f"{n:6d}  {err:.3e}  {order}")
        prev = err


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, nargs="+", default=None)
    a = ap.parse_args()
    exp = Experiment()
    if a.steps:
        exp.steps = a.steps
    run(exp)
