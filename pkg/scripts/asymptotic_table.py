"""N, value, N*value and deviation for the spherical models sigma^N,
log-spaced in N, as CSV (plot-ready)."""
import argparse
import csv
import sys

import numpy as np

from mm_rigidity.models import spherical_asymptotic_check, variance_upper_bound


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--lo", type=float, default=1.5)
    p.add_argument("--hi", type=float, default=1e4)
    p.add_argument("--count", type=int, default=40)
    p.add_argument("--out")
    args = p.parse_args(argv)
    Ns = np.geomspace(args.lo, args.hi, args.count)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["N", "value", "N_value", "deviation", "bound"])
    for r in spherical_asymptotic_check(Ns):
        w.writerow([repr(r.N), repr(r.value), repr(r.n_times_value), repr(r.deviation),
                    repr(variance_upper_bound(r.N - 1))])
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
