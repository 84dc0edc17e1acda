#!/usr/bin/env python3
"""Compare the time-averaged direction measure of the approximation records
against the box-sampled compact-orbit pushforward, for the golden ratio and
the cyclic cubic tuple, writing CSVs and a text report per tuple."""

import argparse

from diophlat.cli import main as cli_main


def run(out_root: str, quick: bool) -> None:
    n_samples = "20000" if quick else "100000"
    jobs = [
        ("phi", ["--coeffs=-1,-1,1", "--epsilon", "0.45", "--T", "30", "--L", "30"]),
        ("cubic", ["--coeffs=-1,-3,0,1", "--epsilon", "0.4", "--T", "25", "--L", "25"]),
    ]
    for name, extra in jobs:
        args = [
            "compare",
            "--p",
            "2",
            "--k-range",
            "0,1",
            "--N",
            n_samples,
            "--seed",
            "20260809",
            "--out",
            f"{out_root}/{name}",
        ] + extra
        print(f"== {name} ==")
        rc = cli_main(args)
        if rc != 0:
            raise SystemExit(rc)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out_compare")
    ap.add_argument("--quick", action="store_true", help="smaller sample count")
    ns = ap.parse_args()
    run(ns.out, ns.quick)
