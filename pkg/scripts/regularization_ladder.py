"""Seminorm distance sigma_h(Q_n psi - psi) along n = 1, 2, ..., 16 for several cut-off widths."""
import argparse

from ultraconv.functions import Gaussian
from ultraconv.gs_spaces import normalized_gaussian, regularization_report
from ultraconv.weights import factorial


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scales", default="1,0.5,0.2")
    ap.add_argument("--h", type=float, default=0.25)
    args = ap.parse_args()
    M = factorial()
    print("chi_scale,n,distance,point_error")
    for s in (float(v) for v in args.scales.split(",")):
        rep = regularization_report(Gaussian(), normalized_gaussian(s), Gaussian(), M, M, h=args.h)
        for n, d, e in zip(rep.ladder, rep.distances, rep.point_errors):
            print(f"{s},{n},{d:.6e},{e:.6e}")


if __name__ == "__main__":
    main()
