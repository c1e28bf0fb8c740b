"""Command-line front end: ``twqkd {rate,sweep,chi,check}``.

Settings come from flags and, optionally, a flat ``key=value`` config file
(``--config``).  Config keys are the long flag names without the leading
dashes, with ``-`` or ``_`` accepted (``rate-hz=1e10``, ``optimize_ns=true``).
Flags given on the command line win over the file.

Exit codes: 0 success, 2 invalid configuration or input, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

from .channels import IDENTITY, amplifier, phase_conjugator, pure_loss
from .eve import BINARY_PHASE, IntrusionParams, chi_E, random_displacement
from .numopt import InfeasibleError
from .protocols import (
    DEFAULT_ALPHA,
    DEFAULT_NS_RANGE,
    MeasuredConstraints,
    InconsistentMeasurementError,
    ProtocolFamily,
    ProtocolSpec,
    RatePoint,
    extract_intrusion,
    fiber_loss,
    optimize_brightness,
    rate_point,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

CSV_HEADER = [
    "L_km",
    "kappa_S",
    "N_S",
    "I_AB_bits_per_symbol",
    "chi_E_bits_per_mode",
    "I_E_bits_per_symbol",
    "SKE_bits_per_symbol",
    "SKR_bits_per_second",
]

# flag dest -> (type, default)
_SETTINGS = {
    "protocol": (str, "fl-qkd"),
    "ns": (float, None),
    "optimize_ns": (bool, False),
    "ns_min": (float, DEFAULT_NS_RANGE[0]),
    "ns_max": (float, DEFAULT_NS_RANGE[1]),
    "ex": (float, 1e4),
    "gb": (float, 1e6),
    "me": (int, 200),
    "xi": (float, 1.0),
    "rate_hz": (float, 1e10),
    "fe": (float, None),
    "kappa_bar": (float, None),
    "alpha": (float, DEFAULT_ALPHA),
    "L": (float, None),
    "lmin": (float, 0.0),
    "lmax": (float, None),
    "lstep": (float, None),
    "out": (str, None),
    "jobs": (int, 1),
    "psi": (str, None),
    "psi_param": (float, None),
}

_PSI_CHOICES = ("identity", "pure-loss", "amplifier", "phase-conjugator")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def read_key_values(path: str) -> dict:
    """Parse a flat ``key=value`` file; blank lines and ``#`` comments are skipped.

    Raises:
        ConfigError: on a line without ``=``, naming the line number.
        OSError: if the file cannot be read.
    """
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if not key:
                raise ConfigError(f"{path}:{lineno}: empty key")
            out[key] = (value, lineno)
    return out


def _coerce(name: str, value: str, where: str):
    typ = _SETTINGS[name][0]
    try:
        if typ is bool:
            return _parse_bool(value)
        if typ is int:
            f = float(value)
            if f != int(f):
                raise ValueError
            return int(f)
        return typ(value)
    except ValueError:
        raise ConfigError(f"{where}: invalid value {value!r} for {name}") from None


def resolve_settings(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and explicit flags (flags win)."""
    settings = {k: v[1] for k, v in _SETTINGS.items()}
    if getattr(args, "config", None):
        for key, (value, lineno) in read_key_values(args.config).items():
            name = key.replace("-", "_")
            if name not in _SETTINGS:
                raise ConfigError(f"{args.config}:{lineno}: unknown key {key!r}")
            settings[name] = _coerce(name, value, f"{args.config}:{lineno}")
    for name in _SETTINGS:
        val = getattr(args, name, None)
        if val is not None:
            settings[name] = val
    return settings


def build_protocol(s: dict) -> ProtocolSpec:
    try:
        family = ProtocolFamily(s["protocol"])
    except ValueError:
        raise ConfigError(f"protocol: unknown protocol {s['protocol']!r}") from None
    fields = {
        "ns": s["ns"], "ex": s["ex"], "gb": s["gb"], "me": s["me"],
        "xi": s["xi"], "rate_hz": s["rate_hz"], "alpha": s["alpha"],
    }
    for name, val in fields.items():
        if val is not None and isinstance(val, float) and not math.isfinite(val):
            raise ConfigError(f"{name}: must be finite")
    if s["ns"] is not None and not s["ns"] > 0:
        raise ConfigError(f"ns: must be > 0, got {s['ns']}")
    if not 0 < s["xi"] <= 1:
        raise ConfigError(f"xi: must lie in (0, 1], got {s['xi']}")
    if not s["rate_hz"] > 0:
        raise ConfigError(f"rate-hz: must be > 0, got {s['rate_hz']}")
    if not s["alpha"] >= 0:
        raise ConfigError(f"alpha: must be >= 0, got {s['alpha']}")
    common = dict(N_S=s["ns"], xi=s["xi"], R=s["rate_hz"], alpha_db_per_km=s["alpha"])
    if family is ProtocolFamily.TMSV_DISPLACEMENT:
        if not s["ex"] >= 0:
            raise ConfigError(f"ex: must be >= 0, got {s['ex']}")
        return ProtocolSpec(family, E_X=s["ex"], M_E=1, **common)
    if not s["gb"] >= 1:
        raise ConfigError(f"gb: must be >= 1, got {s['gb']}")
    if not s["me"] >= 1:
        raise ConfigError(f"me: must be an integer >= 1, got {s['me']}")
    return ProtocolSpec(family, G_B=s["gb"], M_E=s["me"], **common)


def build_intrusion(s: dict, kappa_S: Optional[float]) -> Optional[IntrusionParams]:
    if s["kappa_bar"] is None and s["fe"] is None:
        return None
    kappa_bar = s["kappa_bar"] if s["kappa_bar"] is not None else kappa_S
    if kappa_bar is None:
        raise ConfigError("kappa-bar: required")
    if not kappa_bar >= 0:
        raise ConfigError(f"kappa-bar: must be >= 0, got {kappa_bar}")
    fe = s["fe"] if s["fe"] is not None else 0.0
    if not 0 <= fe <= 1:
        raise ConfigError(f"fe: must lie in [0, 1], got {fe}")
    return IntrusionParams(kappa_bar, fe)


def _ns_range(s: dict):
    if not 0 < s["ns_min"] < s["ns_max"]:
        raise ConfigError(f"ns-min/ns-max: need 0 < ns-min < ns-max, got {s['ns_min']}, {s['ns_max']}")
    return (s["ns_min"], s["ns_max"])


@dataclass(frozen=True)
class _Job:
    spec: ProtocolSpec
    L: float
    kappa_bar: Optional[float]
    fe: Optional[float]
    optimize: bool
    ns_range: tuple


def _evaluate(job: _Job) -> RatePoint:
    kappa = fiber_loss(job.L, job.spec.alpha_db_per_km)
    intrusion = build_intrusion({"kappa_bar": job.kappa_bar, "fe": job.fe}, kappa)
    if job.optimize:
        return optimize_brightness(job.spec, job.L, job.ns_range, intrusion)[1]
    return rate_point(job.spec, job.L, intrusion)


def _job(s: dict, spec: ProtocolSpec, L: float) -> _Job:
    if not s["optimize_ns"] and spec.N_S is None:
        raise ConfigError("ns: required unless --optimize-ns is given")
    if not L >= 0:
        raise ConfigError(f"L: must be >= 0, got {L}")
    build_intrusion(s, fiber_loss(L, spec.alpha_db_per_km))
    return _Job(spec, float(L), s["kappa_bar"], s["fe"], bool(s["optimize_ns"]), _ns_range(s))


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def format_rate_point(p: RatePoint) -> str:
    lines = [
        f"L_km={_fmt(p.L_km)}",
        f"kappa_S={p.kappa_S:.4f}",
        f"kappa_bar_S={_fmt(p.intrusion.kappa_bar_S)}",
        f"f_E={_fmt(p.intrusion.f_E)}",
        f"N_S={_fmt(p.N_S)}",
        f"I_AB={_fmt(p.I_AB)}",
        f"chi_E={_fmt(p.chi_E)}",
        f"I_E={_fmt(p.I_E)}",
        f"SKE={_fmt(p.SKE)}",
        f"SKR={_fmt(p.SKR)}",
    ]
    return "\n".join(lines)


def cmd_rate(s: dict, out=None) -> int:
    out = out or sys.stdout
    spec = build_protocol(s)
    if s["L"] is None:
        raise ConfigError("L: required for the rate command")
    point = _evaluate(_job(s, spec, s["L"]))
    print(format_rate_point(point), file=out)
    return EXIT_OK


def sweep_lengths(lmin: float, lmax: float, lstep: float) -> List[float]:
    if not lstep > 0:
        raise ConfigError(f"lstep: must be > 0, got {lstep}")
    if not lmin <= lmax:
        raise ConfigError(f"lmin/lmax: need lmin <= lmax, got {lmin}, {lmax}")
    if lmin < 0:
        raise ConfigError(f"lmin: must be >= 0, got {lmin}")
    count = int(math.floor((lmax - lmin) / lstep + 1e-9)) + 1
    return [lmin + i * lstep for i in range(count)]


def sweep_csv(points: Sequence[RatePoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for p in sorted(points, key=lambda q: q.L_km):
        writer.writerow(
            f"{v:.17e}"
            for v in (p.L_km, p.kappa_S, p.N_S, p.I_AB, p.chi_E, p.I_E, p.SKE, p.SKR)
        )
    return buf.getvalue()


def run_sweep(s: dict) -> List[RatePoint]:
    spec = build_protocol(s)
    if s["lmax"] is None or s["lstep"] is None:
        raise ConfigError("lmax/lstep: required for the sweep command")
    jobs = [_job(s, spec, L) for L in sweep_lengths(s["lmin"], s["lmax"], s["lstep"])]
    if s["jobs"] < 1:
        raise ConfigError(f"jobs: must be >= 1, got {s['jobs']}")
    if s["jobs"] == 1:
        return [_evaluate(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=s["jobs"]) as pool:
        return list(pool.map(_evaluate, jobs))


def cmd_sweep(s: dict) -> int:
    if not s["out"]:
        raise ConfigError("out: required for the sweep command")
    text = sweep_csv(run_sweep(s))
    try:
        with open(s["out"], "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"error: cannot write {s['out']}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _psi_and_encoding(s: dict):
    family = ProtocolFamily(s["protocol"]) if s["protocol"] in ("tmsv-disp", "fl-qkd") else None
    if family is None:
        raise ConfigError(f"protocol: unknown protocol {s['protocol']!r}")
    name = s["psi"]
    if name is None:
        name = "identity" if family is ProtocolFamily.TMSV_DISPLACEMENT else "amplifier"
    if name not in _PSI_CHOICES:
        raise ConfigError(f"psi: must be one of {', '.join(_PSI_CHOICES)}")
    param = s["psi_param"]
    try:
        if name == "identity":
            psi = IDENTITY
        elif name == "amplifier":
            psi = amplifier(s["gb"] if param is None else param)
        elif name == "pure-loss":
            if param is None:
                raise ConfigError("psi-param: required for pure-loss")
            psi = pure_loss(param)
        else:
            if param is None:
                raise ConfigError("psi-param: required for phase-conjugator")
            psi = phase_conjugator(param)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"psi-param: {exc}") from None
    if family is ProtocolFamily.TMSV_DISPLACEMENT:
        if not s["ex"] >= 0:
            raise ConfigError(f"ex: must be >= 0, got {s['ex']}")
        encoding = random_displacement(s["ex"])
    else:
        encoding = BINARY_PHASE
    return psi, encoding


def cmd_chi(s: dict, out=None) -> int:
    out = out or sys.stdout
    if s["ns"] is None or not s["ns"] >= 0:
        raise ConfigError("ns: required and must be >= 0")
    if s["kappa_bar"] is None:
        raise ConfigError("kappa-bar: required for the chi command")
    intrusion = build_intrusion(s, None)
    psi, encoding = _psi_and_encoding(s)
    try:
        res = chi_E(s["ns"], intrusion, psi, encoding)
    except InfeasibleError as exc:
        raise ConfigError(f"kappa-bar/fe: {exc}") from None
    print(f"chi_E={_fmt(res.value)}", file=out)
    print(f"c_x={_fmt(res.attack.c_x)}", file=out)
    print(f"c_p={_fmt(res.attack.c_p)}", file=out)
    return EXIT_OK


def read_measured_constraints(path: str) -> MeasuredConstraints:
    """Read the three-line ``M=``, ``total_photons=``, ``total_correlation=`` file."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (t.strip() for t in line.split("=", 1))
            if key not in ("M", "total_photons", "total_correlation"):
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            try:
                num = float(value)
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: {key} is not a number: {value!r}") from None
            if not math.isfinite(num):
                raise ConfigError(f"{path}:{lineno}: {key} must be finite")
            if key == "M" and (num != int(num) or num < 1):
                raise ConfigError(f"{path}:{lineno}: M must be an integer >= 1")
            if num < 0:
                raise ConfigError(f"{path}:{lineno}: {key} must be >= 0")
            values[key] = (num, lineno)
    for key in ("M", "total_photons", "total_correlation"):
        if key not in values:
            raise ConfigError(f"{path}: missing {key}")
    return MeasuredConstraints(
        M=int(values["M"][0]),
        total_photons=values["total_photons"][0],
        total_correlation=values["total_correlation"][0],
    )


def cmd_check(args: argparse.Namespace, s: dict, out=None) -> int:
    out = out or sys.stdout
    if s["ns"] is None or not s["ns"] > 0:
        raise ConfigError("ns: required and must be > 0")
    meas = read_measured_constraints(args.constraints)
    try:
        intrusion = extract_intrusion(meas, s["ns"])
    except InconsistentMeasurementError as exc:
        raise ConfigError(f"{args.constraints}: {exc}") from None
    print(f"kappa_bar_S={intrusion.kappa_bar_S:.6f}", file=out)
    print(f"f_E={intrusion.f_E:.6f}", file=out)
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("protocol")
    g.add_argument("--config", help="flat key=value settings file")
    g.add_argument("--protocol", choices=[f.value for f in ProtocolFamily])
    g.add_argument("--ns", type=float, help="source brightness N_S (photons per mode)")
    g.add_argument("--optimize-ns", action="store_true", default=None, help="maximize SKE over N_S")
    g.add_argument("--ns-min", type=float, help="lower end of the N_S search range")
    g.add_argument("--ns-max", type=float, help="upper end of the N_S search range")
    g.add_argument("--ex", type=float, help="displacement power E_X (tmsv-disp)")
    g.add_argument("--gb", type=float, help="Bob's amplifier gain G_B (fl-qkd)")
    g.add_argument("--me", type=int, help="modes per symbol M_E (fl-qkd)")
    g.add_argument("--xi", type=float, help="reconciliation efficiency")
    g.add_argument("--rate-hz", type=float, help="symbol rate R in symbols/s")
    g.add_argument("--alpha", type=float, help="fiber loss in dB/km")
    g.add_argument("--fe", type=float, help="intrusion override: f_E")
    g.add_argument("--kappa-bar", type=float, help="intrusion override: kappa_bar_S")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twqkd",
        description="Coherent-attack key-rate bounds for Gaussian two-way QKD.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rate", help="key rate at one fiber length")
    _add_common(p)
    p.add_argument("--L", type=float, help="fiber length in km")

    p = sub.add_parser("sweep", help="key rate versus fiber length, written as CSV")
    _add_common(p)
    p.add_argument("--lmin", type=float)
    p.add_argument("--lmax", type=float)
    p.add_argument("--lstep", type=float)
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--jobs", type=int, help="worker processes")

    p = sub.add_parser("chi", help="bound on Eve's information per mode")
    _add_common(p)
    p.add_argument("--psi", choices=_PSI_CHOICES, help="return channel (default from protocol)")
    p.add_argument("--psi-param", type=float, help="transmissivity or gain of --psi")

    p = sub.add_parser("check", help="intrusion parameters from measured constraints")
    p.add_argument("constraints", help="file with M=, total_photons=, total_correlation=")
    p.add_argument("--ns", type=float, help="source brightness N_S")
    p.add_argument("--config", help="flat key=value settings file")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        s = resolve_settings(args)
        if args.command == "rate":
            return cmd_rate(s)
        if args.command == "sweep":
            return cmd_sweep(s)
        if args.command == "chi":
            return cmd_chi(s)
        return cmd_check(args, s)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
