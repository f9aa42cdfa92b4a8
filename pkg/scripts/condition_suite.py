"""Condition table for Gevrey sequences p!^sigma over a range of sigma."""
import argparse

import numpy as np

from ultraconv.weights import check_conditions, gevrey


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sigmas", default="0.5,0.75,1,1.5,2,3")
    ap.add_argument("--pmax", type=int, default=256)
    args = ap.parse_args()
    print("sigma,M1,M2_H,M5_q,M6,quasianalyticity,fit_exponent")
    for s in (float(v) for v in args.sigmas.split(",")):
        r = check_conditions(gevrey(s, args.pmax))
        print(f"{s},{r.m1},{r.m2.H:.6g},{r.m5.q if r.m5.holds else 'none'},{r.m6.holds},"
              f"{r.quasianalytic.verdict},{r.quasianalytic.fit_exponent:.4f}")


if __name__ == "__main__":
    np.seterr(all="ignore")
    main()
