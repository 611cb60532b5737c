"""Command-line interface: ``specfact {factorize,wiener,identify,simulate,verify}``.

Exit status is 0 on success, 2 on invalid input and 3 when a computed
result fails verification.  ``SPECFACT_LOG`` sets the log level
(e.g. ``DEBUG``).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as sio
from .config import tolerances
from .errors import DocumentError, SpecfactError, ValidationError, VerificationFailure
from .factorization import (PartitionedSpectralDensity, factor_from_relation, grid_residual,
                            spectral_factor, spectral_factor_from_stable_factor)
from .ident import identify_innovation_model, simulate_lowrank_process
from .rational import in_closed_region, strictly_stable
from .wiener import wiener_filter

log = logging.getLogger("specfact")

EXIT_OK, EXIT_INVALID, EXIT_VERIFY = 0, 2, 3
COMMANDS = ("factorize", "wiener", "identify", "simulate", "verify")
TIME_VARIABLE = {"discrete": "z", "continuous": "s"}


@dataclass
class RunConfig:
    """Validated settings of one invocation."""

    command: str
    input: Path
    time: str | None = None
    m: int | None = None
    grid: int = 256
    tol_residual: float = 1e-7
    tol_cancel: float = 1e-8
    P: np.ndarray | None = None
    seed: int | None = None
    output: Path | None = None
    mode: str = "density"
    N: int = 500
    burn_in: int = 200
    orders: dict = field(default_factory=lambda: dict(h_num=1, h_den=1, arma_p=1, arma_q=1))
    summary: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        if self.grid < 16:
            raise ValidationError("--grid must be at least 16")
        if not (self.tol_residual > 0 and self.tol_cancel > 0):
            raise ValidationError("tolerances must be positive")
        if self.m is not None and self.m < 1:
            raise ValidationError("--m must be positive")
        if self.N < 1 or self.burn_in < 0:
            raise ValidationError("--N must be positive and --burn-in non-negative")


def _parse_P(text):
    if text is None:
        return None
    src = Path(text)
    raw = src.read_text(encoding="utf-8") if src.is_file() else text
    try:
        P = np.atleast_2d(np.asarray(json.loads(raw), dtype=float))
    except (json.JSONDecodeError, ValueError, TypeError) as exc:
        raise ValidationError(f"--P is not a JSON matrix: {exc}") from exc
    return P


def _parse_orders(text):
    keys = ("h_num", "h_den", "arma_p", "arma_q")
    try:
        vals = [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise ValidationError(f"--orders needs four integers: {exc}") from exc
    if len(vals) != 4:
        raise ValidationError("--orders needs four integers h_num,h_den,arma_p,arma_q")
    return dict(zip(keys, vals))


def build_parser():
    ap = argparse.ArgumentParser(prog="specfact", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--input", required=True, help="input document (JSON, or CSV for identify)")
    ap.add_argument("--time", choices=sorted(TIME_VARIABLE))
    ap.add_argument("--m", type=int, help="size of the leading full-rank block")
    ap.add_argument("--grid", type=int, default=256, help="boundary points for residuals")
    ap.add_argument("--tol-residual", type=float, default=1e-7)
    ap.add_argument("--tol-cancel", type=float, default=1e-8)
    ap.add_argument("--P", help="orthogonal m x m parameter as JSON text or file")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--output", help="output path (default: stdout)")
    ap.add_argument("--mode", choices=("density", "stable-factor"), default="density")
    ap.add_argument("--N", type=int, default=500, help="samples for simulate")
    ap.add_argument("--burn-in", type=int, default=200)
    ap.add_argument("--orders", default="1,1,1,1", help="h_num,h_den,arma_p,arma_q")
    ap.add_argument("--summary", action="store_true", help="human-readable summary on stderr")
    return ap


def config_from_args(ns):
    return RunConfig(command=ns.command, input=Path(ns.input), time=ns.time, m=ns.m,
                     grid=ns.grid, tol_residual=ns.tol_residual, tol_cancel=ns.tol_cancel,
                     P=_parse_P(ns.P), seed=ns.seed,
                     output=Path(ns.output) if ns.output else None, mode=ns.mode, N=ns.N,
                     burn_in=ns.burn_in, orders=_parse_orders(ns.orders), summary=ns.summary)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _matrix(doc, key, cfg):
    if key not in doc:
        raise DocumentError(f"$.{key}", "missing field")
    M = sio.read_matrix(doc[key], f"$.{key}")
    _check_time(M, cfg, f"$.{key}")
    return M


def _check_time(M, cfg, path):
    if cfg.time is not None and M.variable != TIME_VARIABLE[cfg.time]:
        raise DocumentError(f"{path}.variable",
                            f"variable {M.variable!r} does not match --time {cfg.time}")


def _load_matrix_input(cfg, default_key):
    """Either a bare matrix document or an object holding ``default_key``."""
    doc = sio.read_json(cfg.input)
    if isinstance(doc, dict) and "entries" in doc:
        M = sio.read_matrix(doc)
        _check_time(M, cfg, "$")
        return M, {}
    if not isinstance(doc, dict):
        raise DocumentError("$", "expected an object")
    return _matrix(doc, default_key, cfg), doc


def _partition(doc, cfg, W):
    m = cfg.m if cfg.m is not None else doc.get("m") if doc else None
    if m is None:
        m = W.cols
    if not isinstance(m, int) or not 1 <= m <= W.rows:
        raise ValidationError(f"partition m={m!r} invalid for {W.rows} rows")
    return m


def factor_report(res):
    d = res.diagnostics
    keys = ("n_u", "X", "M", "sylvester_residual", "inner_residual", "relation_residual",
            "grid_residual", "poles", "zeros", "minimum_phase")
    rep = {k: d[k] for k in keys if k in d}
    rep["special_case"] = res.special_case
    rep["P"] = res.P_used
    return rep


def _emit(obj, cfg):
    text = sio.dumps(obj)
    if cfg.output is None:
        sys.stdout.write(text)
    else:
        cfg.output.write_text(text, encoding="utf-8")


def _summary(cfg, lines):
    if cfg.summary:
        for ln in lines:
            print(ln, file=sys.stderr)


def _fmt_points(v):
    return ", ".join(f"{complex(x).real:.6g}" + (f"{complex(x).imag:+.6g}i"
                                                 if abs(complex(x).imag) > 1e-12 else "")
                     for x in v)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_factorize(cfg):
    doc = sio.read_json(cfg.input)
    if not isinstance(doc, dict):
        raise DocumentError("$", "expected an object")
    if "H" in doc and "G1" in doc:
        H, G1 = _matrix(doc, "H", cfg), _matrix(doc, "G1", cfg)
        res = factor_from_relation(H, G1, cfg.P)
    else:
        key = "phi" if cfg.mode == "density" else "W_o"
        if "entries" in doc:
            M, doc = sio.read_matrix(doc), {}
            _check_time(M, cfg, "$")
        else:
            M = _matrix(doc, key, cfg)
        if cfg.mode == "density":
            m = cfg.m if cfg.m is not None else doc.get("m")
            if not isinstance(m, int):
                raise ValidationError("density mode needs the partition --m")
            G1 = _matrix(doc, "G1", cfg) if "G1" in doc else None
            res = spectral_factor(PartitionedSpectralDensity(M, m), G1=G1, P=cfg.P,
                                  grid=cfg.grid)
        else:
            res = spectral_factor_from_stable_factor(M, _partition(doc, cfg, M), cfg.P,
                                                     grid=cfg.grid)
    rep = factor_report(res)
    _summary(cfg, [f"poles: {_fmt_points(rep['poles'])}",
                   f"zeros: {_fmt_points(rep['zeros'])}",
                   f"special case: {res.special_case}, n_u = {rep.get('n_u', 0)}"])
    _emit({"W": res.W, "W1": res.W1, "W2": res.W2, "Q1": res.Q1, "H": res.H, "G1": res.G1,
           "report": rep}, cfg)
    return EXIT_OK


def cmd_wiener(cfg):
    doc = sio.read_json(cfg.input)
    if isinstance(doc, dict) and "W1" in doc and "W2" in doc:
        W1, W2 = _matrix(doc, "W1", cfg), _matrix(doc, "W2", cfg)
    else:
        W, doc = _load_matrix_input(cfg, "W")
        m = _partition(doc, cfg, W)
        W1, W2 = W[:m, :], W[m:, :]
    rep = wiener_filter(W1, W2)
    d = {k: v for k, v in rep.diagnostics.items() if k != "causal_part"}
    _summary(cfg, [f"F+ = {rep.F_plus}", f"K+ = {rep.K_plus}",
                   f"strictly causal: {d['strictly_causal']}, F stable: {d['F_stable']}"])
    _emit({"F_plus": rep.F_plus, "K_plus": rep.K_plus, "H": rep.H, "report": d}, cfg)
    if not (d["strictly_causal"] and d["reconstruction_ok"]):
        raise VerificationFailure("feedback representation fails its invariants")
    return EXIT_OK


def cmd_identify(cfg):
    ts = sio.read_csv(cfg.input, cfg.m)
    res = identify_innovation_model(ts, cfg.orders, cfg.P)
    fit = res.diagnostics["arma"]
    rep = factor_report(res)
    rep["arma"] = {"a": fit.a, "c": fit.c, "noise_variance": fit.noise_variance,
                   "converged": fit.converged, "iterations": fit.iterations}
    _summary(cfg, [f"G1 = {res.G1}", f"H = {res.H}", f"poles: {_fmt_points(rep['poles'])}"])
    _emit({"W": res.W, "H": res.H, "G1": res.G1, "Q1": res.Q1, "report": rep}, cfg)
    return EXIT_OK


def cmd_simulate(cfg):
    W, doc = _load_matrix_input(cfg, "W")
    m = _partition(doc, cfg, W) if (cfg.m is not None or doc.get("m")) else None
    ts = simulate_lowrank_process(W, cfg.N, cfg.seed, cfg.burn_in, m)
    text = sio.write_csv(ts)
    if cfg.output is None:
        sys.stdout.write(text)
    else:
        cfg.output.write_text(text, encoding="utf-8")
    return EXIT_OK


def verify_pair(phi, W, grid, tol):
    """Invariant checks for a candidate factor ``W`` of ``phi``."""
    var = W.variable
    res = grid_residual(phi, W, grid)
    poles = W.poles()
    zeros = W.zeros()
    rank = W.normal_rank
    out = {"grid_residual": res, "poles": poles, "zeros": zeros, "normal_rank": rank,
           "full_column_rank": rank == W.cols,
           "stable": bool(np.all(strictly_stable(poles, var))),
           "minimum_phase": bool(np.all(strictly_stable(poles, var))
                                 and np.all(in_closed_region(zeros, var)))}
    out["passed"] = bool(res < tol and out["minimum_phase"] and out["full_column_rank"])
    return out


def cmd_verify(cfg):
    doc = sio.read_json(cfg.input)
    if not isinstance(doc, dict):
        raise DocumentError("$", "expected an object")
    W = _matrix(doc, "W", cfg)
    if "phi" in doc:
        phi = _matrix(doc, "phi", cfg)
    elif "W_o" in doc:
        W_o = _matrix(doc, "W_o", cfg)
        phi = W_o @ W_o.para_conjugate()
    else:
        raise DocumentError("$.phi", "missing field (or give W_o)")
    if phi.shape != (W.rows, W.rows):
        raise ValidationError(f"phi {phi.shape} does not match W {W.shape}")
    out = verify_pair(phi, W, cfg.grid, cfg.tol_residual)
    _summary(cfg, [f"residual {out['grid_residual']:.3g}, minimum phase "
                   f"{out['minimum_phase']}, passed {out['passed']}"])
    _emit({"report": out}, cfg)
    if not out["passed"]:
        raise VerificationFailure("factor fails verification")
    return EXIT_OK


HANDLERS = {"factorize": cmd_factorize, "wiener": cmd_wiener, "identify": cmd_identify,
            "simulate": cmd_simulate, "verify": cmd_verify}


def run(cfg):
    """Execute a validated :class:`RunConfig`; returns the exit status."""
    with tolerances(residual=cfg.tol_residual, cancel=cfg.tol_cancel):
        return HANDLERS[cfg.command](cfg)


def _setup_logging():
    level = os.environ.get("SPECFACT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None):
    _setup_logging()
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return run(cfg)
    except VerificationFailure as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (SpecfactError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
