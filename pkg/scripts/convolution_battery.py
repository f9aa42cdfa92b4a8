"""Convolvability verdicts and pairings for a battery of descriptor pairs."""
import argparse

from ultraconv.convolution import criterion_iv, pair_value
from ultraconv.errors import DomainError
from ultraconv.expr import function

PAIRS = [
    ("gaussian(0,1)", "gaussian(0,1)"),
    ("const(1)", "gaussian(0,1)"),
    ("const(1)", "const(1)"),
    ("expdecay(1)", "expgrow(0.5)"),
    ("expdecay(1)", "expgrow(1)"),
    ("delta(0.5,1)", "cos(2)"),
    ("hermite(2,1)", "expdecay(0.5)"),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--phi", default="gaussian(0,1)")
    args = ap.parse_args()
    phi = function(args.phi)
    print("f1,f2,verdict,pair_value")
    for a, b in PAIRS:
        f1, f2 = function(a), function(b)
        rep = criterion_iv(f1, f2)
        try:
            v = f"{pair_value(f1, f2, phi, report=rep):.12g}"
        except DomainError as e:
            v = e.code
        print(f'"{a}","{b}",{rep.verdict},{v}')


if __name__ == "__main__":
    main()
