"""Command-line front end.

Every subcommand writes machine-readable output (JSON with ``"schema": 1``,
or CSV where tabular) to stdout or ``--output``; diagnostics go to stderr.
Exit codes: 0 success, 1 error, 2 scan-resolution warning.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import warnings
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .boundary import (ExtensionParams, SelfAdjointBC, bc_from_json, bc_to_json,
                       boundary_trace, classify_bc)
from .extensions import map_um_to_bc
from .flux import Boundary, beta_scan, energy_flux, flux_killing_beta
from .modes import Family, kg_inner_product, make_mode, mode_function
from .spectrum import (DEFAULT_POINTS, DEFAULT_TOL, DEFAULT_WINDOW, ScanResolutionWarning,
                       find_spectrum, negative_modes_robin, null_vector, omega_from_sq,
                       rayleigh_core_integral, rayleigh_quotient_unbounded)
from .symmetry import (FockTruncation, classify_representation, fock_commutator_check,
                       is_invariant_bc, lowest_eigenvalues)
from .table1 import table1_report

log = logging.getLogger("ads2")

SCHEMA = 1
EXIT_OK, EXIT_ERROR, EXIT_WARN = 0, 1, 2


class CliError(Exception):
    """Bad arguments or configuration."""


# config ------------------------------------------------------------------------

@dataclass
class RunConfig:
    """Inputs shared by the subcommands; serializes to canonical JSON."""

    lam: Optional[float] = None
    bc: Optional[Dict[str, Any]] = None
    window: Tuple[float, float] = DEFAULT_WINDOW
    points: int = DEFAULT_POINTS
    tol: float = DEFAULT_TOL
    format: str = "json"
    output: Optional[str] = None

    _KEYS = ("lambda", "bc", "window", "points", "tol", "format", "output")

    @classmethod
    def from_dict(cls, obj: Dict[str, Any]) -> "RunConfig":
        if not isinstance(obj, dict):
            raise CliError("config must be a JSON object")
        unknown = set(obj) - set(cls._KEYS)
        if unknown:
            raise CliError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls()
        if "lambda" in obj:
            cfg.lam = float(obj["lambda"])
        if "bc" in obj and obj["bc"] is not None:
            bc_from_json(obj["bc"])  # validate
            cfg.bc = obj["bc"]
        if "window" in obj:
            w = obj["window"]
            if not (isinstance(w, list) and len(w) == 2):
                raise CliError("window must be [lo, hi]")
            cfg.window = (float(w[0]), float(w[1]))
        if "points" in obj:
            cfg.points = int(obj["points"])
        if "tol" in obj:
            cfg.tol = float(obj["tol"])
        if "format" in obj:
            cfg.format = str(obj["format"])
        if "output" in obj:
            cfg.output = obj["output"]
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.format not in ("json", "csv"):
            raise CliError("format must be json or csv")
        if self.points < 3:
            raise CliError("points must be >= 3")
        if not self.tol > 0:
            raise CliError("tol must be positive")
        lo, hi = self.window
        if not lo < hi:
            raise CliError("window must satisfy lo < hi")

    def to_dict(self) -> Dict[str, Any]:
        return {"lambda": self.lam, "bc": self.bc, "window": list(self.window),
                "points": self.points, "tol": self.tol, "format": self.format,
                "output": self.output}

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CliError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(obj)


# helpers -----------------------------------------------------------------------

def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        z = complex(x)
        return {"re": z.real, "im": z.imag}
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _emit(args, cfg: RunConfig, body: Any, csv_text: Optional[str] = None) -> None:
    if cfg.format == "csv":
        if csv_text is None:
            raise CliError(f"{args.command} has no CSV output")
        text = csv_text
    else:
        if isinstance(body, dict):
            body = {"schema": SCHEMA, **body}
        text = json.dumps(_jsonable(body), indent=2) + "\n"
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        log.info("wrote %s", cfg.output)
    else:
        sys.stdout.write(text)


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return int(args.threads)
    env = os.environ.get("ADS2_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise CliError("ADS2_THREADS must be an integer") from exc
    return 1


def _parse_matrix(text: str) -> np.ndarray:
    """2x2 complex matrix from JSON: [[a, b], [c, d]] with entries numbers or [re, im]."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"matrix is not valid JSON: {exc}") from exc
    m = np.zeros((2, 2), dtype=complex)
    try:
        for i in range(2):
            for j in range(2):
                e = raw[i][j]
                m[i, j] = complex(e[0], e[1]) if isinstance(e, list) else complex(e)
    except (IndexError, TypeError, ValueError) as exc:
        raise CliError("matrix must be 2x2 with numbers or [re, im] entries") from exc
    return m


def _bc_from_args(args) -> Optional[Dict[str, Any]]:
    kind = getattr(args, "bc", None)
    if kind is None:
        return None
    kind = kind.replace("_", "-")
    if kind in ("dirichlet", "neumann", "mixed0", "mixed90"):
        return {"named": kind}
    if kind == "robin":
        return {"robin": {"alpha": args.alpha or 0.0, "beta_re": args.beta_re,
                          "beta_im": args.beta_im, "gamma": args.gamma}}
    if kind == "inverse-robin":
        return {"inverse_robin": {"a": args.a_coef, "b_re": args.b_re, "b_im": args.b_im,
                                  "c": args.c_coef}}
    if kind == "symmetric-robin":
        if args.alpha is None:
            raise CliError("symmetric-robin needs --alpha")
        return {"symmetric_robin": {"alpha": args.alpha}}
    if kind == "pauli":
        return {"pauli": {"theta": args.theta, "phi": args.phi}}
    if kind == "matrix":
        if not args.matrix:
            raise CliError("--bc matrix needs --matrix")
        m = _parse_matrix(args.matrix)
        return {"matrix": [[[z.real, z.imag] for z in row] for row in m]}
    raise CliError(f"unknown boundary condition {kind!r}")


def _config(args) -> RunConfig:
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = RunConfig.from_json(fh.read())
        except OSError as exc:
            raise CliError(f"cannot read config: {exc}") from exc
    else:
        cfg = RunConfig()
    # explicit flags override the file
    if getattr(args, "lam", None) is not None:
        cfg.lam = args.lam
    bc = _bc_from_args(args)
    if bc is not None:
        cfg.bc = bc
    if getattr(args, "window", None):
        cfg.window = tuple(args.window)
    if getattr(args, "points", None):
        cfg.points = args.points
    if getattr(args, "tol", None):
        cfg.tol = args.tol
    if getattr(args, "format", None):
        cfg.format = args.format
    if getattr(args, "output", None):
        cfg.output = args.output
    cfg.validate()
    return cfg


def _need_lambda(cfg: RunConfig) -> ExtensionParams:
    if cfg.lam is None:
        raise CliError("--lambda is required")
    return ExtensionParams(cfg.lam)


def _need_bc(cfg: RunConfig, params: ExtensionParams, required: bool = True) -> Optional[SelfAdjointBC]:
    if cfg.bc is None:
        if required and params.has_extensions:
            raise CliError("--bc is required for 1/2 <= lambda < 3/2")
        return None
    return bc_from_json(cfg.bc)


# subcommands ---------------------------------------------------------------------

def cmd_spectrum(args, cfg: RunConfig) -> int:
    params = _need_lambda(cfg)
    bc = _need_bc(cfg, params)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ScanResolutionWarning)
        sp = find_spectrum(params, bc if params.has_extensions else None, cfg.window,
                           tol=cfg.tol, n_points=cfg.points, threads=_threads(args))
    for w in caught:
        log.warning("%s", w.message)
    body = json.loads(sp.to_json())
    body.pop("schema", None)
    _emit(args, cfg, body, sp.to_csv())
    return EXIT_WARN if sp.warnings else EXIT_OK


_FAMILY_NAMES = {f.value.lower(): f for f in Family}


def _family(name: str) -> Family:
    key = name.lower()
    if key not in _FAMILY_NAMES:
        raise CliError(f"unknown family {name!r}; choose from {sorted(_FAMILY_NAMES)}")
    return _FAMILY_NAMES[key]


def cmd_modes(args, cfg: RunConfig) -> int:
    params = _need_lambda(cfg)
    fam = _family(args.family)
    start = 1 if fam is Family.LAMBDA1_DIRICHLET else 0
    modes = [make_mode(fam, params.lam, n) for n in range(start, start + args.count)]
    body: Dict[str, Any] = {
        "family": fam.value,
        "lambda": params.lam,
        "modes": [{"n": m.n, "omega": m.omega, "normalization": m.norm,
                   "zero_sector": m.zero_sector} for m in modes],
    }
    if args.gram:
        g = np.array([[kg_inner_product(a, b) for b in modes] for a in modes])
        body["kg_gram"] = g
        body["gram_defect"] = float(np.max(np.abs(g - np.eye(len(modes)))))
    # CSV carries the sampled profile of one mode at t = --time
    target = make_mode(fam, params.lam, args.n if args.n is not None else start)
    rhos = np.linspace(-0.5 * math.pi, 0.5 * math.pi, args.samples + 2)[1:-1]
    lines = ["rho,re,im"]
    for rho in rhos:
        z = mode_function(target, args.time, float(rho))
        lines.append(f"{float(rho)!r},{z.real!r},{z.imag!r}")
    _emit(args, cfg, body, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_classify(args, cfg: RunConfig) -> int:
    params = _need_lambda(cfg)
    bc = _need_bc(cfg, params)
    label = classify_representation(params, bc)
    body = {"lambda": params.lam, "bc": bc_to_json(bc) if bc else None,
            "label": label.to_json(), "symbol": label.symbol,
            "zero_mode_quotient": label.zero_mode_quotient}
    _emit(args, cfg, body)
    return EXIT_OK


def cmd_invariance(args, cfg: RunConfig) -> int:
    params = _need_lambda(cfg)
    bc = _need_bc(cfg, params)
    inv, cert = is_invariant_bc(params, bc)
    body = {"lambda": params.lam, "bc": bc_to_json(bc), "invariant": inv,
            "certificate": {"analytic": cert.analytic, "dynamic": cert.dynamic,
                            "omega_sq": list(cert.omega_sq),
                            "max_residual": max(cert.residuals)}}
    _emit(args, cfg, body)
    return EXIT_OK


def cmd_map_u(args, cfg: RunConfig) -> int:
    params = _need_lambda(cfg)
    if not args.um:
        raise CliError("--um is required")
    u_m = _parse_matrix(args.um)
    bc = map_um_to_bc(u_m, params)
    cls = classify_bc(bc)
    body = {"lambda": params.lam, "u_m": u_m, "u": bc.u,
            "form": cls.form, "form_params": cls.params, "special": cls.special}
    _emit(args, cfg, body)
    return EXIT_OK


def cmd_flux(args, cfg: RunConfig) -> int:
    params = _need_lambda(cfg)
    bc = _need_bc(cfg, params)
    if args.beta is None and not args.beta_scan:
        raise CliError("give --beta or --beta-scan")
    modes_out = []
    if params.has_extensions:
        for w2 in lowest_eigenvalues(params, bc, args.modes):
            c1, c2 = null_vector(params, bc, w2)
            omega = omega_from_sq(w2)
            entry: Dict[str, Any] = {"omega_sq": w2}
            if args.beta is not None:
                entry["reports"] = [energy_flux(params, args.beta, c1, c2, omega, b).to_json()
                                    for b in (Boundary.PLUS, Boundary.MINUS)]
            tr = boundary_trace(params, c1, c2, omega)
            entry["killing_beta"] = flux_killing_beta(params, tr).to_json()
            if args.beta_scan:
                lo, hi, step = args.beta_scan
                grid = np.arange(lo, hi + 0.5 * step, step)
                b, res = beta_scan(params, tr, grid)
                entry["scan"] = {"best_beta": b, "residual": res}
            modes_out.append(entry)
    body = {"lambda": params.lam, "bc": bc_to_json(bc) if bc else None,
            "beta": args.beta, "modes": modes_out,
            "vanishes": all(all(r["vanishes"] for r in m.get("reports", [])) for m in modes_out)}
    _emit(args, cfg, body)
    return EXIT_OK


def cmd_negative_modes(args, cfg: RunConfig) -> int:
    roots = negative_modes_robin(args.alpha)
    csv_text = "nu,omega_sq,parity\n" + "".join(
        f"{r['nu']!r},{-r['nu'] ** 2!r},{r['parity']}\n" for r in roots)
    body = {"alpha": args.alpha,
            "roots": [{**r, "omega_sq": -r["nu"] ** 2} for r in roots]}
    _emit(args, cfg, body, csv_text)
    return EXIT_OK


def cmd_fock_check(args, cfg: RunConfig) -> int:
    params = _need_lambda(cfg)
    fam = {"mixed": Family.III, "neumann": Family.II}[args.family]
    res = fock_commutator_check(params, fam, FockTruncation(args.modes, args.max_occ))
    _emit(args, cfg, {"lambda": params.lam, "family": args.family, **res})
    return EXIT_OK


def cmd_rayleigh(args, cfg: RunConfig) -> int:
    rows = []
    if args.eta is not None:
        etas = [(None, args.eta)]
    else:
        etas = [(k, 0.5 * math.pi - 2.0 ** -k) for k in range(args.k_min, args.k_max + 1)]
    for k, eta in etas:
        # the quotient needs a > 0; the core integral is defined for any a
        quotient = rayleigh_quotient_unbounded(args.a, eta) if args.a > 0 else None
        rows.append({"k": k, "eta": eta, "quotient": quotient,
                     "core_integral": rayleigh_core_integral(args.a, eta)})
    csv_text = "k,eta,quotient,core_integral\n" + "".join(
        f"{'' if r['k'] is None else r['k']},{r['eta']!r},{'' if r['quotient'] is None else repr(r['quotient'])},"
        f"{r['core_integral']!r}\n"
        for r in rows)
    values = [r["quotient"] for r in rows if r["quotient"] is not None]
    body = {"a": args.a, "rows": rows,
            "monotone_decreasing": all(b < a for a, b in zip(values, values[1:]))}
    _emit(args, cfg, body, csv_text)
    return EXIT_OK


def cmd_table1(args, cfg: RunConfig) -> int:
    report = table1_report()
    _emit(args, cfg, report)
    return EXIT_OK if report["all_checks_pass"] else EXIT_ERROR


# parser ----------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 1, not argparse's 2 (2 means scan warning)
        raise CliError(message)


def _add_common(p: argparse.ArgumentParser, bc: bool = True) -> None:
    p.add_argument("--lambda", dest="lam", type=float, help="mass parameter lambda >= 1/2")
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--output", "-o", help="write here instead of stdout")
    p.add_argument("--threads", type=int, help="worker threads (env ADS2_THREADS)")
    if not bc:
        return
    p.add_argument("--bc", help="dirichlet, neumann, mixed0, mixed90, robin, inverse-robin, "
                                "symmetric-robin, pauli or matrix")
    p.add_argument("--alpha", type=float, help="Robin alpha (also symmetric-robin)")
    p.add_argument("--beta-re", type=float, default=0.0)
    p.add_argument("--beta-im", type=float, default=0.0)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--a", dest="a_coef", type=float, default=0.0, help="inverse-Robin a")
    p.add_argument("--b-re", type=float, default=0.0)
    p.add_argument("--b-im", type=float, default=0.0)
    p.add_argument("--c", dest="c_coef", type=float, default=0.0, help="inverse-Robin c")
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--matrix", help="U as JSON [[a,b],[c,d]], entries number or [re,im]")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ads2", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("spectrum", help="eigenvalues omega^2 in a window")
    _add_common(p)
    p.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--points", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--dump-config", action="store_true",
                   help="print the canonical config and exit")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("modes", help="normalized mode families")
    _add_common(p, bc=False)
    p.add_argument("--family", required=True, help="I, II, III, IV, V, L1D or L1N")
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--gram", action="store_true", help="also compute the KG Gram matrix")
    p.add_argument("--n", type=int, help="mode sampled in CSV output (default: lowest)")
    p.add_argument("--samples", type=int, default=101, help="interior rho samples for CSV")
    p.add_argument("--time", type=float, default=0.0)
    p.set_defaults(func=cmd_modes)

    p = sub.add_parser("classify", help="representation label of (lambda, bc)")
    _add_common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("invariance", help="SL(2,R) invariance test with certificate")
    _add_common(p)
    p.set_defaults(func=cmd_invariance)

    p = sub.add_parser("map-u", help="boundary matrix from a deficiency-space unitary")
    _add_common(p, bc=False)
    p.add_argument("--um", help="U_M as JSON [[a,b],[c,d]], entries number or [re,im]")
    p.set_defaults(func=cmd_map_u)

    p = sub.add_parser("flux", help="energy flux at the boundary")
    _add_common(p)
    p.add_argument("--beta", type=float)
    p.add_argument("--beta-scan", type=float, nargs=3, metavar=("LO", "HI", "STEP"))
    p.add_argument("--modes", type=int, default=3, help="number of lowest eigenmodes")
    p.set_defaults(func=cmd_flux)

    p = sub.add_parser("negative-modes", help="negative modes at lambda = 1, Psi(+-pi/2) = +-alpha Psi'")
    _add_common(p, bc=False)
    p.add_argument("--alpha", type=float, required=True)
    p.set_defaults(func=cmd_negative_modes)

    p = sub.add_parser("fock-check", help="truncated Fock-space check of the charge algebra")
    _add_common(p, bc=False)
    p.add_argument("--family", choices=("mixed", "neumann"), required=True)
    p.add_argument("--modes", type=int, default=6)
    p.add_argument("--max-occ", type=int, default=6)
    p.set_defaults(func=cmd_fock_check)

    p = sub.add_parser("rayleigh", help="quadratic-form sweep for M^2 < -1/4")
    _add_common(p, bc=False)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--eta", type=float)
    p.add_argument("--k-min", type=int, default=3)
    p.add_argument("--k-max", type=int, default=10)
    p.set_defaults(func=cmd_rayleigh)

    p = sub.add_parser("table1", help="regenerate the mode classification table")
    _add_common(p, bc=False)
    p.set_defaults(func=cmd_table1)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s: %(message)s")
    if not getattr(args, "command", None):
        parser.print_help(sys.stderr)
        return EXIT_ERROR
    try:
        cfg = _config(args)
        if getattr(args, "dump_config", False):
            sys.stdout.write(cfg.canonical_json() + "\n")
            return EXIT_OK
        return args.func(args, cfg)
    except (CliError, ValueError, ArithmeticError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # noqa: BLE001 - last resort, keep the exit-code contract
        log.debug("unexpected failure", exc_info=True)
        print(f"error: internal failure: {exc!r}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
