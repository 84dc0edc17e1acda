#!/usr/bin/env python3
"""Tabulate the p-adically weighted approximation minima for a tuple: the
running records of (k |k|_p)^(1/n) |<k alpha>|_inf and the scaled minima
over targets ell = p^m, exhibiting the bounded-constant scaling."""

import argparse

from diophlat.cli import main as cli_main


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--coeffs", default="-1,-3,0,1", help="constant term first")
    ap.add_argument("--p", default="2")
    ap.add_argument("--K", default="1000000")
    ap.add_argument("--m-range", default="0,1,2,3,4,5,6")
    ap.add_argument("--out", default="out_littlewood")
    ns = ap.parse_args()
    rc = cli_main(
        [
            "littlewood",
            f"--coeffs={ns.coeffs}",
            "--p",
            ns.p,
            "--K",
            ns.K,
            "--m-range",
            ns.m_range,
            "--out",
            ns.out,
        ]
    )
    raise SystemExit(rc)
