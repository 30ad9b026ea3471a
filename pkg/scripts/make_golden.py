"""Regenerate the fringe-scan golden file from the analytic coherent-state fringe.

A pole coherent state of N atoms gives <Jz>(phi) = (N/2) cos(phi) at the
interferometer output.
"""
import csv
import math
from pathlib import Path

N_ATOMS = 100
POINTS = 32
PATH = Path(__file__).resolve().parents[1] / "tests" / "data" / "golden_fringe_css100.csv"


def main():
    with open(PATH, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["phi", "mean_signal"])
        for k in range(POINTS):
            phi = 2 * math.pi * k / (POINTS - 1)
            w.writerow([f"{phi:.17g}", f"{N_ATOMS / 2 * math.cos(phi):.17g}"])
    print(f"wrote {PATH}")


if __name__ == "__main__":
    main()
