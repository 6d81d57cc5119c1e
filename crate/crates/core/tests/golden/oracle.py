"""Brute-force reference values for the scan and density golden files.

Independent of the Rust sieve: distinct-prime counts come from an additive
Eratosthenes pass, square factors from marking multiples of p^2, and
interval lengths from Python's math.log / float pow.

    python3 oracle.py  # rewrites the *.json files next to this script
"""

import json
import math
import os

import numpy as np


def e2_indicator(n_max):
    nu = np.zeros(n_max + 1, dtype=np.int8)
    square = np.zeros(n_max + 1, dtype=bool)
    is_comp = np.zeros(n_max + 1, dtype=bool)
    for p in range(2, n_max + 1):
        if is_comp[p]:
            continue
        if p * p <= n_max:
            is_comp[p * p :: p] = True
            square[p * p :: p * p] = True
        nu[p::p] += 1
    return (nu == 2) & ~square


def scan(x_max, c):
    last = 2 * x_max - 1
    n_max = last + math.ceil(math.log(last) ** c)
    prefix = np.concatenate(([0], np.cumsum(e2_indicator(n_max), dtype=np.int64)))

    def stats(lo, hi):
        hist = {}
        for x in range(lo, hi + 1):
            h = math.ceil(math.log(x) ** c)
            k = int(prefix[x + h + 1] - prefix[x])
            hist[k] = hist.get(k, 0) + 1
        exc = hist.get(0, 0)
        total = hi - lo + 1
        return {
            "x_lo": lo,
            "x_hi": hi,
            "x_sampled": total,
            "exceptional": exc,
            "exceptional_fraction": exc / total,
            "histogram": sorted(hist.items()),
        }

    return {"X": x_max, "c": c, "k": 2, "convention_1_to_X": stats(1, x_max), "dyadic": stats(x_max, 2 * x_max - 1)}


def density(x_max):
    ind = e2_indicator(2 * x_max - 1)
    count = int(ind[x_max : 2 * x_max].sum())
    return {"X": x_max, "k": 2, "count": count, "density": count / x_max}


if __name__ == "__main__":
    here = os.path.dirname(os.path.abspath(__file__))
    outputs = {
        "scan_X1e7_c3.51_k2.json": scan(10_000_000, 3.51),
        "scan_X1e4_c0.1_k2.json": scan(10_000, 0.1),
        "scan_X1e5_c3.51_k2.json": scan(100_000, 3.51),
        "density_X1e3_k2.json": density(1000),
    }
    for name, value in outputs.items():
        with open(os.path.join(here, name), "w", newline="\n") as f:
            json.dump(value, f, indent=2)
            f.write("\n")
