"""Witness actions along an approach to the 1/|x| singularity of the
oscillating pair. The ratio ||g'||_2^2 / sup|g'| grows like T / (2|b|).

    python3 scripts/divergence_probe.py --levels 10
"""
import argparse
from dataclasses import dataclass
from pathlib import Path

from lorentz_orbits import catalog
from lorentz_orbits.serialization import rows_to_csv
from lorentz_orbits.witness import divergence_probe


@dataclass
class Experiment:
    levels: int = 8
    N: int = 1024
    out: str = "runs/divergence"


def run(exp):
    pair = catalog.make("singular_oscillation")
    pts = [(0.0, 2.0**-k, 0.0) for k in range(1, exp.levels + 1)]
    rows, monotone = divergence_probe(pair, pts, N=exp.N)
    table = [[r.radius, r.ratio, pair.period / (2 * r.radius), r.epsilon, r.action_value] for r in rows]
    for row in table:
        print("  ".join(f"{v:12.6g}" for v in row))
    print(f"strictly decreasing: {monotone}")
    out = Path(exp.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "divergence.csv").write_text(
        rows_to_csv(["radius", "ratio", "closed_form", "epsilon", "action"], table), encoding="utf-8")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", type=int, default=Experiment.levels)
    ap.add_argument("--N", type=int, default=Experiment.N)
    ap.add_argument("--out", default=Experiment.out)
    a = ap.parse_args()
    run(Experiment(levels=a.levels, N=a.N, out=a.out))
