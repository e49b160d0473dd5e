"""Command-line entry point.

Exit codes: 0 success, 1 a verification law failed, 2 usage or I/O error,
3 numerical failure (sampler stall, non-finite values).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import asymptotics, berezin, dpp, verify
from .kernelcore import EnsembleParams, corr_diagonal, corr_kernel_fock, layout

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3
MAX_RES = 4096
COMMANDS = ("kernel", "blowup", "exterior", "sample", "verify")
KERNEL_COLUMNS = ("re", "im", "kernel_re", "kernel_im", "fock_re", "fock_im", "diagonal")
SAMPLE_COLUMNS = ("re", "im")
BLOWUP_SUMMARY_KEYS = ("m", "n", "q", "center_re", "center_im", "kind", "extent", "res", "rows", "l1_gap", "sup_gap")
EXTERIOR_KEYS = ("m", "n", "q", "z_re", "z_im", "rho", "mass_outside", "moments")
MOMENT_KEYS = ("l", "moment_re", "moment_im", "target_re", "target_im", "harmonic_re", "harmonic_im", "error")


class UsageError(Exception):
    pass


class NumericalError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    params: EnsembleParams | None
    extent: float = 4.0
    res: int = 64
    seed: int | None = None
    output: str | None = None
    fmt: str = "csv"
    center: complex = 0j

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if not self.extent > 0:
            raise UsageError("--extent must be positive")
        if not 1 <= self.res <= MAX_RES:
            raise UsageError(f"--res must lie in [1, {MAX_RES}]")
        if self.fmt not in ("csv", "json"):
            raise UsageError("--format must be csv or json")


def worker_count() -> int:
    raw = os.environ.get("POLYGINIBRE_THREADS")
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"POLYGINIBRE_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise UsageError(f"POLYGINIBRE_THREADS must be a positive integer, got {raw!r}")
    return value


def parallel_map(func, chunks, workers: int):
    """Ordered map; the reduction order never depends on ``workers``."""
    if workers <= 1 or len(chunks) <= 1:
        return [func(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, chunks))


def _chunks(arr: np.ndarray, size: int = 4096) -> list[np.ndarray]:
    return [arr[i:i + size] for i in range(0, len(arr), size)]


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def square_grid(center: complex, extent: float, res: int) -> np.ndarray:
    """``res x res`` grid on ``center + [-extent, extent]^2``, rows ordered by imaginary part then real part."""
    t = np.linspace(-extent, extent, res) if res > 1 else np.zeros(1)
    xx, yy = np.meshgrid(t, t)
    return center + (xx + 1j * yy).ravel()


def _open_output(path: str, mode: str = "w"):
    try:
        return open(path, mode, newline="")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _write_csv(path: str, header, rows) -> None:
    with _open_output(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])


def _write_json(path: str | None, obj) -> None:
    text = json.dumps(obj, indent=2, allow_nan=True)
    if path is None:
        print(text)
        return
    with _open_output(path) as fh:
        fh.write(text + "\n")


def _default_output(cfg: RunConfig, stem: str) -> str:
    return cfg.output or f"{stem}.{cfg.fmt}"


def _sidecar(path: str, suffix: str) -> str:
    return os.path.splitext(path)[0] + suffix


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_kernel(cfg: RunConfig) -> int:
    params = cfg.params
    z = square_grid(cfg.center, cfg.extent, cfg.res)
    lay = layout(params)
    f0 = lay.features(cfg.center)[0]

    def evaluate(chunk):
        k = np.conj(lay.features(chunk)) @ f0  # Zh(center, z)
        return k, corr_kernel_fock(params.m, params.q, cfg.center, chunk), corr_diagonal(params, chunk)

    parts = parallel_map(evaluate, _chunks(z), worker_count())
    kern = np.concatenate([p[0] for p in parts])
    fock = np.concatenate([p[1] for p in parts])
    diag = np.concatenate([p[2] for p in parts])
    if not (np.all(np.isfinite(kern)) and np.all(np.isfinite(diag))):
        raise NumericalError("non-finite kernel values")
    rows = [(float(a.real), float(a.imag), float(k.real), float(k.imag), float(f.real), float(f.imag), float(d))
            for a, k, f, d in zip(z, kern, fock, diag)]
    out = _default_output(cfg, "kernel")
    if cfg.fmt == "csv":
        _write_csv(out, KERNEL_COLUMNS, rows)
    else:
        _write_json(out, {"m": params.m, "n": params.n, "q": params.q,
                          "rows": [dict(zip(KERNEL_COLUMNS, r)) for r in rows]})
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def cmd_blowup(cfg: RunConfig) -> int:
    params = cfg.params
    frame = berezin.BlowupFrame(cfg.center)
    if frame.kind == berezin.EXTERIOR:
        raise UsageError("blow-up profiles need |center| <= 1; use the exterior command for |center| > 1")
    xi = square_grid(0j, cfg.extent, cfg.res)
    parts = parallel_map(lambda c: berezin.profile_samples(params, frame, c), _chunks(xi, 2048), worker_count())
    samples = [s for part in parts for s in part]
    dens = np.array([s.density for s in samples])
    if not np.all(np.isfinite(dens)):
        raise NumericalError("non-finite blow-up density")
    gap = np.array([s.gap for s in samples])
    inside = np.abs(xi) <= cfg.extent
    summary = {
        "m": params.m, "n": params.n, "q": params.q,
        "center_re": frame.center.real, "center_im": frame.center.imag,
        "kind": frame.kind, "extent": cfg.extent, "res": cfg.res, "rows": len(samples),
        "l1_gap": berezin.blowup_l1_gap(params, frame, radius=cfg.extent),
        "sup_gap": float(np.max(gap[inside])) if inside.any() else 0.0,
    }
    out = _default_output(cfg, "blowup")
    rows = [s.row() for s in samples]
    if cfg.fmt == "csv":
        _write_csv(out, berezin.PROFILE_COLUMNS, rows)
        _write_json(_sidecar(out, ".json"), summary)
    else:
        _write_json(out, {"summary": summary, "rows": [dict(zip(berezin.PROFILE_COLUMNS, r)) for r in rows]})
    print(json.dumps(summary))
    return EXIT_OK


def cmd_exterior(cfg: RunConfig, rho: float, lmax: int) -> int:
    params = cfg.params
    z = cfg.center
    if abs(z) <= 1:
        raise UsageError("the exterior command needs |center| > 1")
    if not 1 < rho < abs(z):
        raise UsageError("--rho must satisfy 1 < rho < |center|")
    moments = []
    for l in range(lmax + 1):
        mom = asymptotics.exterior_moment(params, z, l)
        har = asymptotics.harmonic_moment(z, l)
        tgt = z ** (-l)
        moments.append(dict(zip(MOMENT_KEYS, (l, mom.real, mom.imag, tgt.real, tgt.imag, har.real, har.imag,
                                               abs(mom - tgt)))))
    result = {"m": params.m, "n": params.n, "q": params.q, "z_re": z.real, "z_im": z.imag, "rho": rho,
              "mass_outside": asymptotics.exterior_mass_outside(params, z, rho), "moments": moments}
    if not all(math.isfinite(v["error"]) for v in moments) or not math.isfinite(result["mass_outside"]):
        raise NumericalError("non-finite exterior quantities")
    if cfg.fmt == "csv":
        out = _default_output(cfg, "exterior")
        _write_csv(out, MOMENT_KEYS, [tuple(v.values()) for v in moments])
        _write_json(_sidecar(out, ".json"), result)
    else:
        _write_json(cfg.output, result)
    if cfg.output or cfg.fmt == "csv":
        print(json.dumps({k: result[k] for k in EXTERIOR_KEYS if k != "moments"}))
    return EXIT_OK


def cmd_sample(cfg: RunConfig) -> int:
    seed = 0 if cfg.seed is None else cfg.seed
    try:
        config = dpp.sample_configuration(cfg.params, seed)
    except dpp.SamplerStallError as exc:
        raise NumericalError(str(exc)) from None
    out = cfg.output or f"sample_m{cfg.params.m:g}_n{cfg.params.n}_q{cfg.params.q}_s{seed}.csv"
    try:
        meta = config.write(out)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc.strerror}") from None
    print(f"wrote {len(config.points)} points to {out} (metadata {meta})")
    return EXIT_OK


def cmd_verify(suite: str, fast: bool, output: str | None) -> int:
    reports = verify.run_suite(suite, fast=fast)
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.law} [{r.grid}]: {r.observed_error:.3g} <= {r.tolerance:g}", file=sys.stderr)
    _write_json(output, [r.to_dict() for r in reports])
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyginibre", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def ensemble(p, res_default=64):
        p.add_argument("--m", type=float, required=True, help="weight scale m")
        p.add_argument("--n", type=int, required=True, help="analytic degree bound n")
        p.add_argument("--q", type=int, required=True, help="polyanalytic order q")
        p.add_argument("--output", help="output path")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("kernel", help="evaluate Zh(center, z) and Zh(z, z) on a square grid")
    ensemble(p)
    p.add_argument("--center", type=parse_complex, default=0j)
    p.add_argument("--extent", type=float, default=1.0, help="half-width of the grid")
    p.add_argument("--res", type=int, default=64, help="points per axis")

    p = sub.add_parser("blowup", help="blow-up Berezin density against its local limit")
    ensemble(p)
    p.add_argument("--center", type=parse_complex, default=0j)
    p.add_argument("--extent", type=float, default=4.0, help="half-width of the xi grid")
    p.add_argument("--res", type=int, default=64, help="points per axis")

    p = sub.add_parser("exterior", help="Berezin moments and outside mass at an exterior point")
    ensemble(p)
    p.add_argument("--center", type=parse_complex, required=True)
    p.add_argument("--rho", type=float, default=1.1)
    p.add_argument("--lmax", type=int, default=4)

    p = sub.add_parser("sample", help="draw one exact sample of the point process")
    ensemble(p)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("verify", help="run verification suites and print a JSON report")
    p.add_argument("--suite", choices=verify.SUITES + ("all",), default="all")
    p.add_argument("--fast", action="store_true", help="reduced grids (m <= 200)")
    p.add_argument("--output", help="write the JSON report here instead of stdout")
    return parser


def _run(args) -> int:
    if args.command == "verify":
        return cmd_verify(args.suite, args.fast, args.output)
    try:
        params = EnsembleParams(args.m, args.n, args.q)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cfg = RunConfig(command=args.command, params=params,
                    extent=getattr(args, "extent", 4.0), res=getattr(args, "res", 64),
                    seed=getattr(args, "seed", None), output=args.output, fmt=args.format,
                    center=getattr(args, "center", 0j))
    if args.command == "kernel":
        return cmd_kernel(cfg)
    if args.command == "blowup":
        return cmd_blowup(cfg)
    if args.command == "exterior":
        if args.lmax < 0:
            raise UsageError("--lmax must be nonnegative")
        return cmd_exterior(cfg, args.rho, args.lmax)
    return cmd_sample(cfg)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        worker_count()
        return _run(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
