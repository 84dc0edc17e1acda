"""Command-line front end: reproducible experiments with CSV outputs.

Every run writes a manifest of flat key=value lines; re-running with
--config pointed at the manifest reproduces the CSVs byte for byte.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, fields, replace

from . import __version__
from . import approx, latgeo, orbitmeasure as om, spheremeasure as sm
from .errors import DiophlatError, PrecisionExhausted, TooManyPoints
from .numberfield import make_field, power_tuple

EXIT_DOMAIN = 2
EXIT_PRECISION = 3
EXIT_RESOURCE = 4


@dataclass(frozen=True)
class RunConfig:
    field_coeffs: tuple[int, ...] = (-1, -1, 1)
    precision_bits: int = 192
    p: int = 2
    k_range: tuple[int, ...] = (0,)
    m_range: tuple[int, ...] = (0, 1, 2)
    ell: int = 1
    epsilon: float = 0.45
    T: float = 10.0
    K: int = 1000
    L: float = 10.0
    N: int = 1000
    seed: int = 2026
    threads: int = 1
    output_dir: str = "out"

    def to_lines(self) -> list[str]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                out.append(f"{f.name}={','.join(str(x) for x in v)}")
            elif isinstance(v, float):
                out.append(f"{f.name}={v!r}")
            else:
                out.append(f"{f.name}={v}")
        return out

    def save(self, path: str, command: str | None = None) -> None:
        with open(path, "w") as fh:
            if command:
                fh.write(f"command={command}\n")
            fh.write(f"version={__version__}\n")
            for line in self.to_lines():
                fh.write(line + "\n")

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        values = {}
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#") or "=" not in line:
                    continue
                key, _, raw = line.partition("=")
                values[key.strip()] = raw.strip()
        values.pop("command", None)
        values.pop("version", None)
        kwargs = {}
        for f in fields(cls):
            if f.name not in values:
                continue
            raw = values[f.name]
            if f.name in ("field_coeffs", "k_range", "m_range"):
                kwargs[f.name] = tuple(int(x) for x in raw.split(",") if x != "")
            elif f.name in ("epsilon", "T", "L"):
                kwargs[f.name] = float(raw)
            elif f.name == "output_dir":
                kwargs[f.name] = raw
            else:
                kwargs[f.name] = int(raw)
        return cls(**kwargs)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _build_tuple(cfg: RunConfig):
    field = make_field(list(cfg.field_coeffs), cfg.precision_bits)
    return power_tuple(field)


def _ensure_out(cfg: RunConfig, command: str) -> str:
    os.makedirs(cfg.output_dir, exist_ok=True)
    cfg.save(os.path.join(cfg.output_dir, "manifest.txt"), command=command)
    return cfg.output_dir


def cmd_field(cfg: RunConfig) -> int:
    tup = _build_tuple(cfg)
    field = tup.field
    B, bnorm = latgeo.embedding_lattice(tup)
    det = B.det()
    print(f"polynomial coefficients (constant first): {list(cfg.field_coeffs)}")
    print(f"degree: {field.degree}  precision bits: {field.precision_bits}")
    print("roots: " + ", ".join(f"{r:.12g}" for r in field.root_floats()))
    print("tuple: " + ", ".join(f"{a:.12g}" for a in tup.alpha_floats()))
    print(f"|det B| = {abs(det):.12g}")
    print(f"power-basis discriminant det(B)^2 = {det * det:.12g}")
    print(f"normalized covolume = {bnorm.covolume:.12g}")
    if not field.irreducibility_checked:
        print("warning: irreducibility not verified beyond degree 4")
    if cfg.output_dir != "-":
        out = _ensure_out(cfg, "field")
        latgeo.save_matrix_csv(os.path.join(out, "embedding.csv"), B)
        latgeo.save_lattice_csv(os.path.join(out, "embedding_normalized.csv"), bnorm)
    return 0


def _scan_and_weigh(cfg: RunConfig, ell: int):
    tup = _build_tuple(cfg)
    records = approx.scan_records(tup, ell, cfg.epsilon, cfg.T)
    wal = approx.sweep_weights(records, cfg.T, cfg.epsilon)
    return tup, wal


def cmd_scan(cfg: RunConfig) -> int:
    tup, wal = _scan_and_weigh(cfg, cfg.ell)
    out = _ensure_out(cfg, "scan")
    approx.save_records_csv(os.path.join(out, "records.csv"), wal, tup.n)
    print(f"records: {len(wal.records)}")
    print(f"weight sum: {_fmt(sum(wal.weights))}  empty fraction: {_fmt(wal.empty_fraction)}")
    return 0


def cmd_weights(cfg: RunConfig) -> int:
    tup, wal = _scan_and_weigh(cfg, cfg.ell)
    out = _ensure_out(cfg, "weights")
    approx.save_records_csv(os.path.join(out, "records.csv"), wal, tup.n)
    for r, w in zip(wal.records, wal.weights):
        print(f"q={r.q} p={r.pvec} interval=({_fmt(r.t_lo)},{_fmt(r.t_hi)}) weight={_fmt(w)}")
    print(f"weight sum: {_fmt(sum(wal.weights))}")
    print(f"empty fraction: {_fmt(wal.empty_fraction)}")
    print(f"identity weight_sum + empty = {_fmt(sum(wal.weights) + wal.empty_fraction)}")
    return 0


def cmd_measure(cfg: RunConfig) -> int:
    tup = _build_tuple(cfg)
    out = _ensure_out(cfg, "measure")
    for k in cfg.k_range:
        mu = approx.direction_measure(tup, cfg.p, k, cfg.epsilon, cfg.T)
        path = os.path.join(out, f"measure_k{k}.csv")
        sm.save_measure_csv(path, mu)
        print(f"k={k}: atoms={mu.n_atoms} mass={_fmt(mu.total_mass)} -> {path}")
    return 0


def cmd_orbit(cfg: RunConfig, apply_conjugator: bool = True) -> int:
    tup = _build_tuple(cfg)
    out = _ensure_out(cfg, "orbit")
    U0 = latgeo.conjugator_data(tup).U0 if apply_conjugator else None
    for k in cfg.k_range:
        base = latgeo.hecke_scaled_lattice(tup, cfg.p, k)
        samples = om.sample_orbit(base, cfg.L, cfg.N, cfg.seed)
        mu = om.pushforward_minvec(samples, cfg.epsilon, U0, workers=cfg.threads)
        path = os.path.join(out, f"orbit_measure_k{k}.csv")
        om.save_orbit_measure_csv(path, mu, samples, cfg.epsilon, apply_conjugator)
        print(f"k={k}: mass={_fmt(mu.total_mass)} atoms={mu.n_atoms} -> {path}")
    return 0


def cmd_compare(cfg: RunConfig) -> int:
    tup = _build_tuple(cfg)
    out = _ensure_out(cfg, "compare")
    U0 = latgeo.conjugator_data(tup).U0
    report = []
    for k in cfg.k_range:
        mu = approx.direction_measure(tup, cfg.p, k, cfg.epsilon, cfg.T)
        sm.save_measure_csv(os.path.join(out, f"measure_k{k}.csv"), mu)
        base = latgeo.hecke_scaled_lattice(tup, cfg.p, k)
        samples = om.sample_orbit(base, cfg.L, cfg.N, cfg.seed)
        push = om.pushforward_minvec(samples, cfg.epsilon, U0, workers=cfg.threads)
        om.save_orbit_measure_csv(
            os.path.join(out, f"orbit_measure_k{k}.csv"), push, samples, cfg.epsilon, True
        )
        lines = [f"k={k}", f"  time-average mass:  {_fmt(mu.total_mass)}",
                 f"  orbit-average mass: {_fmt(push.total_mass)}",
                 f"  mass difference:    {_fmt(abs(mu.total_mass - push.total_mass))}"]
        if mu.total_mass > 0 and push.total_mass > 0:
            dist = sm.distance(sm.normalize(mu), sm.normalize(push))
            lines.append(f"  normalized distance: {_fmt(dist)}")
        else:
            lines.append("  normalized distance: n/a (a side is the zero measure)")
        if tup.n == 2:
            for name, m in (("time-average", mu), ("orbit-average", push)):
                if m.total_mass > 0:
                    arc = sm.min_arc_mass(sm.normalize(m), math.pi / 8)
                    lines.append(f"  min arc mass (pi/8), {name}: {_fmt(arc)}")
        report.extend(lines)
    text = "\n".join(report)
    print(text)
    with open(os.path.join(out, "compare.txt"), "w") as fh:
        fh.write(text + "\n")
    return 0


def cmd_littlewood(cfg: RunConfig) -> int:
    tup = _build_tuple(cfg)
    out = _ensure_out(cfg, "littlewood")
    minima = approx.record_minima(tup, cfg.p, cfg.K)
    approx.save_minima_csv(os.path.join(out, "minima.csv"), minima)
    print(f"running minima of (k |k|_p)^(1/n) |<k a>| for k <= {cfg.K}:")
    for k, v in minima:
        print(f"  k={k}  value={_fmt(v)}")
    rows = []
    for m in cfg.m_range:
        ell = cfg.p**m
        val, arg = approx.scaled_minima(tup, ell, cfg.K)
        scaled = ell ** (1.0 / tup.n) * val
        rows.append((m, ell, arg, val, scaled))
    with open(os.path.join(out, "scaled.csv"), "w") as fh:
        fh.write("m,ell,argmin_k,min_value,scaled_value\n")
        for m, ell, arg, val, scaled in rows:
            fh.write(f"{m},{ell},{arg},{_fmt(val)},{_fmt(scaled)}\n")
    if rows:
        print("scaled minima ell^(1/n) * min_k k^(1/n) |<k ell a>|:")
        for m, ell, arg, val, scaled in rows:
            print(f"  m={m} ell={ell}: min={_fmt(val)} at k={arg}, scaled={_fmt(scaled)}")
    return 0


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="diophlat",
        description="Diophantine approximation records and lattice dynamics at desk scale",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("field", "scan", "weights", "measure", "orbit", "compare", "littlewood"):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="key=value config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--coeffs", default=None, help="polynomial coefficients, constant first")
        p.add_argument("--bits", type=int, default=None)
        p.add_argument("--p", type=int, default=None)
        p.add_argument("--k-range", default=None, help="comma-separated k values")
        p.add_argument("--m-range", default=None, help="comma-separated m values")
        p.add_argument("--ell", type=int, default=None)
        p.add_argument("--epsilon", type=float, default=None)
        p.add_argument("--T", type=float, default=None)
        p.add_argument("--K", type=int, default=None)
        p.add_argument("--L", type=float, default=None)
        p.add_argument("--N", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        if name == "orbit":
            p.add_argument("--no-conjugator", action="store_true")
    return ap


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    updates = {}
    if args.coeffs is not None:
        updates["field_coeffs"] = tuple(int(x) for x in args.coeffs.split(",") if x)
    if args.bits is not None:
        updates["precision_bits"] = args.bits
    if args.p is not None:
        updates["p"] = args.p
    if args.k_range is not None:
        updates["k_range"] = tuple(int(x) for x in args.k_range.split(",") if x)
    if args.m_range is not None:
        updates["m_range"] = tuple(int(x) for x in args.m_range.split(",") if x)
    for name in ("ell", "epsilon", "T", "K", "L", "N", "seed", "threads"):
        v = getattr(args, name, None)
        if v is not None:
            updates[name] = v
    if args.out is not None:
        updates["output_dir"] = args.out
    return replace(cfg, **updates)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    cfg = _config_from_args(args)
    handlers = {
        "field": cmd_field,
        "scan": cmd_scan,
        "weights": cmd_weights,
        "measure": cmd_measure,
        "compare": cmd_compare,
        "littlewood": cmd_littlewood,
    }
    try:
        if args.command == "orbit":
            return cmd_orbit(cfg, apply_conjugator=not args.no_conjugator)
        return handlers[args.command](cfg)
    except PrecisionExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except TooManyPoints as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except DiophlatError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
