"""Resolution sweep for the path discretizations of sigma^2 and the truncated
Gaussian: diameter, ObsVar, Var(nu) and the gap per n, written as CSV."""
import argparse
import csv
import sys

from mm_rigidity.acceptance import sweep_table


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, nargs="+", default=[17, 33, 65, 129, 257])
    p.add_argument("--out", help="CSV path (stdout if omitted)")
    args = p.parse_args(argv)
    rows = sweep_table(tuple(args.n))
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["model", "n", "pitch", "diam", "obsvar", "var_nu", "gap", "pass"])
    for r in rows:
        w.writerow([r[0], r[1]] + [repr(float(x)) for x in r[2:7]] + [r[7]])
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
