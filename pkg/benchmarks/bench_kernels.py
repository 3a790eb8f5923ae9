"""Benchmark the numba kernel lane against the pure-numpy fallback.

Runs the full lattice protocol pipeline (global C-phase rounds, the
electron measurement sweep, graph extraction) at a few lattice sizes on
each lane and prints a comparison table.  The numpy lane is the
correctness fallback selected by SICLUSTER_KERNELS=numpy; this script
quantifies what the JIT buys.

Usage: python benchmarks/bench_kernels.py [--sizes 20,40] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import sicluster._kernels as kern
from sicluster.lattice import DonorLattice, run_protocol, standard_protocol
from sicluster.rng import substream


def time_protocol(lane: str, size: int, repeat: int) -> float:
    kern.use(lane)
    lat = DonorLattice(size, size)
    best = float("inf")
    for r in range(repeat):
        t0 = time.perf_counter()
        run_protocol(lat, standard_protocol(), rng=substream(r, "bench"))
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="10,20,40",
                    help="comma list of square lattice sizes")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    lanes = kern.available_lanes()
    if "numba" in lanes:
        # Warm the JIT outside the timed region.
        kern.use("numba")
        run_protocol(DonorLattice(2, 2), standard_protocol(), rng=substream(0, "warm"))

    print(f"{'lattice':>9} {'qubits':>7} " +
          " ".join(f"{lane + ' (s)':>12}" for lane in lanes) +
          ("   speedup" if len(lanes) == 2 else ""))
    for size in sizes:
        times = {lane: time_protocol(lane, size, args.repeat) for lane in lanes}
        row = f"{size}x{size:<5} {2 * size * size:>7} " + \
            " ".join(f"{times[lane]:>12.3f}" for lane in lanes)
        if "numba" in times and "numpy" in times:
            row += f"   {times['numpy'] / times['numba']:>6.1f}x"
        print(row)
    kern.use(kern._default_lane().name)


if __name__ == "__main__":
    main()
