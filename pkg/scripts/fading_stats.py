#!/usr/bin/env python3
"""Check the fading generator's statistics and export autocorrelation CSVs.

Prints the Rayleigh KS p-value and mean gain power over independent
seeds, then writes empirical-vs-Bessel autocorrelation columns per
fading strength.

Example:
    python scripts/fading_stats.py --out fading.csv
"""

import argparse
import csv

import numpy as np
from scipy import special, stats

from rfsynth.channel import jakes_gain


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="fading_autocorr.csv")
    parser.add_argument("--seeds", type=int, default=20_000)
    parser.add_argument("--frames", type=int, default=1000)
    parser.add_argument("--scatterers", type=int, default=64)
    args = parser.parse_args()

    gains = np.array(
        [jakes_gain(1, 0.5, args.scatterers, seed=k).gain[0] for k in range(args.seeds)]
    )
    power = np.mean(np.abs(gains) ** 2)
    ks = stats.kstest(np.abs(gains), "rayleigh", args=(0, 1 / np.sqrt(2)))
    print(f"mean |gain|^2 = {power:.4f} over {args.seeds} seeds")
    print(f"Rayleigh KS p-value = {ks.pvalue:.4f}")

    n = 128
    etas = (0.1, 0.5, 1.0)
    columns = {}
    for eta in etas:
        acc = np.zeros(n)
        for k in range(args.frames):
            x = jakes_gain(n, eta, args.scatterers, seed=500_000 + k).x
            acc += np.correlate(x, x, mode="full")[n - 1 :]
        est = acc / (np.arange(n, 0, -1, dtype=float) * args.frames)
        ref = 0.5 * special.j0(2 * np.pi * eta * np.arange(n) / n)
        columns[eta] = (est, ref)
        print(f"eta {eta}: max |empirical - bessel| = {np.max(np.abs(est - ref)):.4f}")

    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["dtau"]
        for eta in etas:
            header += [f"empirical_eta{eta}", f"bessel_eta{eta}"]
        writer.writerow(header)
        for lag in range(n):
            row = [lag / n]
            for eta in etas:
                est, ref = columns[eta]
                row += [f"{est[lag]:.6f}", f"{ref[lag]:.6f}"]
            writer.writerow(row)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
