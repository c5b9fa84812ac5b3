"""Command-line front door: ``degenheat {spectrum,verify,kernel}``.

Configs are flat ``key = value`` text with dotted sections::

    problem.N = 3
    problem.alpha = 4
    checks = thm-small-time-intrinsic, prop-large-time

Exit codes: 0 all selected checks pass, 1 a check failed, 2 usage or
config error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from . import bounds as B
from .discretize import Grading, build_grid
from .heat import KernelAssembler, IncreaseEllMax, trace, write_kernel_csv
from .inequalities import SUITE_IDS, run_suite
from .kernels import BACKEND
from .model import M_PRESETS, ProblemParams
from .spectral import extend_modes, solve_below, solve_modes

CHECK_IDS = B.BOUND_IDS + SUITE_IDS
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    return tuple(float(x) for x in text.split(",")) if text else ()


def _strs(text: str) -> tuple[str, ...]:
    text = text.strip()
    return tuple(x.strip() for x in text.split(",")) if text else ()


def _opt_int(text: str) -> int | None:
    return None if text.strip().lower() == "none" else int(text)


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass(frozen=True)
class RunConfig:
    """All knobs of a run. Field names map to config keys via ``_KEYS``."""

    N: int = 3
    alpha: float = 4.0
    m: str = "unit"
    R: float = 256.0
    n: int = 600
    grading: str = "piecewise"
    ell_max: int = 32
    n_per_mode: int | None = None
    lam_max: float = 2000.0
    t: tuple[float, ...] = (0.1, 0.5, 1.0)
    radii: tuple[float, ...] = (0.0, 0.5, 1.0, 2.0)
    costheta: tuple[float, ...] = (1.0, 0.0, -1.0)
    t_min: float = 1e-2
    refine: bool = True
    weyl_R: float = 32.0
    weyl_n: int = 800
    checks: tuple[str, ...] = ()
    out: str = "degenheat-out"
    seed: int = 42

    def __post_init__(self):
        bad = [c for c in self.checks if c not in CHECK_IDS]
        if bad:
            raise ConfigError(f"unknown check id(s): {', '.join(bad)}")
        if self.m not in M_PRESETS:
            raise ConfigError(f"unknown m preset {self.m!r}")
        Grading.parse(self.grading)
        if any(abs(c) > 1 for c in self.costheta):
            raise ConfigError("heat.costheta values must lie in [-1, 1]")

    @property
    def params(self) -> ProblemParams:
        return ProblemParams(self.N, self.alpha, self.m, self.R)

    def to_text(self) -> str:
        lines = [f"{key} = {_fmt(getattr(self, name))}" for key, (name, _) in _KEYS.items()]
        return "\n".join(lines) + "\n"

    def snapshot(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in dataclasses.asdict(self).items()}


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1"):
        return True
    if t in ("false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_KEYS: dict[str, tuple[str, Callable[[str], object]]] = {
    "problem.N": ("N", int),
    "problem.alpha": ("alpha", float),
    "problem.m": ("m", str.strip),
    "problem.R": ("R", float),
    "grid.n": ("n", int),
    "grid.grading": ("grading", str.strip),
    "spectral.ell_max": ("ell_max", int),
    "spectral.n_per_mode": ("n_per_mode", _opt_int),
    "spectral.lam_max": ("lam_max", float),
    "heat.t": ("t", _floats),
    "heat.radii": ("radii", _floats),
    "heat.costheta": ("costheta", _floats),
    "bounds.t_min": ("t_min", float),
    "bounds.refine": ("refine", _bool),
    "weyl.R": ("weyl_R", float),
    "weyl.n": ("weyl_n", int),
    "checks": ("checks", _strs),
    "output.dir": ("out", str.strip),
    "seed": ("seed", int),
}


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse ``key = value`` lines on top of ``base``; errors carry line numbers."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        name, conv = _KEYS[key]
        try:
            values[name] = conv(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    try:
        return dataclasses.replace(base or RunConfig(), **values)
    except ConfigError as exc:
        raise ConfigError(f"{exc}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _core_checks(alpha: float) -> tuple[str, ...]:
    ids = ["thm-small-time-intrinsic", "prop-large-time", "lower-diagonal", "karamata", "trace-lower"]
    if alpha <= 4:
        ids += ["thm-weightV", "eigenfun-intrinsic", "eigenfun-weightV"]
    if alpha >= 4:
        ids.append("eigenfun-N4")
    if 2 < alpha < 4:
        ids.append("blend")
    return tuple(ids)


def preset(name: str) -> list[RunConfig]:
    if name == "paper-core":
        return [
            RunConfig(alpha=a, R=B.default_radius(a), checks=_core_checks(a), out=f"alpha-{a:g}")
            for a in (3.0, 4.0, 6.0)
        ]
    if name == "control":
        return [RunConfig(alpha=0.0, R=1.0, n=2048, ell_max=0, n_per_mode=5, out="control")]
    if name == "default":
        return [RunConfig()]
    raise ConfigError(f"unknown preset {name!r} (known: paper-core, control, default)")


PRESETS = ("paper-core", "control", "default")


# ---------------------------------------------------------------- outputs


def header_lines(cfg: RunConfig, command: str) -> list[str]:
    return [
        f"degenheat {__version__} ({BACKEND} kernels)",
        f"command: {command}",
        "params: " + json.dumps(cfg.params.snapshot(), sort_keys=True),
        "config: " + json.dumps(cfg.snapshot(), sort_keys=True),
    ]


def _write_csv(path: Path, cfg: RunConfig, command: str, body: str) -> None:
    head = "".join(f"# {line}\n" for line in header_lines(cfg, command))
    path.write_text(head + body)


def _write_json(path: Path, cfg: RunConfig, command: str, payload) -> None:
    doc = {"header": header_lines(cfg, command), "config": cfg.snapshot(), "payload": payload}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=B._jsonable) + "\n")


def _spectrum(cfg: RunConfig):
    p = cfg.params
    grid = build_grid(p, cfg.n, cfg.grading)
    return solve_modes(p, grid, cfg.ell_max, cfg.n_per_mode)


def cmd_spectrum(cfg: RunConfig, outdir: Path) -> int:
    sp = _spectrum(cfg)
    _write_csv(outdir / "spectrum.csv", cfg, "spectrum", sp.to_csv())
    lam1 = float(sp.mode(0).lams[0])
    doubled = _spectrum(dataclasses.replace(cfg, R=2 * cfg.R, n=2 * cfg.n, ell_max=0, n_per_mode=1))
    lam1_2 = float(doubled.mode(0).lams[0])
    side = {
        "lambda_1": lam1,
        "lambda_1_doubled_R": lam1_2,
        "lambda_1_delta": lam1_2 - lam1,
        "complete_below": sp.complete_below(),
        "reliable_below": sp.reliable_below(),
        "count": int(sum(len(m.lams) for m in sp.modes)),
    }
    _write_json(outdir / "spectrum_convergence.json", cfg, "spectrum", side)
    return EXIT_OK


def _kernel_samples(cfg: RunConfig):
    r = np.asarray(cfg.radii, float)
    i, j = np.triu_indices(len(r))
    ct = np.asarray(cfg.costheta, float)
    rx = np.repeat(r[i], len(ct))
    ry = np.repeat(r[j], len(ct))
    cc = np.tile(ct, len(i))
    return rx, ry, cc


def cmd_kernel(cfg: RunConfig, outdir: Path, max_ell: int = 512) -> int:
    sp = _spectrum(cfg)
    rx, ry, ct = _kernel_samples(cfg)
    evals = []
    for t in cfg.t:
        while True:
            try:
                evals.append(KernelAssembler(sp).evaluate(rx, ry, ct, t))
                break
            except IncreaseEllMax:
                if sp.ell_max >= max_ell:
                    raise
                sp = extend_modes(sp, min(max_ell, 2 * sp.ell_max + 1))
    _write_csv(outdir / "kernel.csv", cfg, "kernel", write_kernel_csv(evals))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "trace_spectral", "trace_diagonal_quadrature"])
    for t in cfg.t:
        tr = trace(sp, t)
        w.writerow([f"{t:.16e}", f"{tr.spectral_sum:.16e}", f"{tr.diagonal_quadrature:.16e}"])
    _write_csv(outdir / "trace.csv", cfg, "kernel", buf.getvalue())
    return EXIT_OK


class _Context:
    """Lazily built shared objects for the checks of one config."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self._study = None
        self._spectrum = None

    @property
    def study(self) -> B.KernelStudy:
        if self._study is None:
            c = self.cfg
            sc = B.StudyConfig(c.params, c.n, c.grading, c.ell_max, c.t_min)
            self._study = B.KernelStudy(sc, seed=c.seed)
        return self._study

    @property
    def spectrum(self):
        if self._spectrum is None:
            self._spectrum = _spectrum(self.cfg)
        return self._spectrum


def _run_check(cid: str, ctx: _Context, done: list) -> list:
    cfg = ctx.cfg
    p = cfg.params
    ref = cfg.refine
    if cid == "thm-small-time-intrinsic":
        return [B.check_intrinsic_small_time(ctx.study, refine=ref)]
    if cid == "thm-weightV":
        if p.alpha <= 2:
            study = B.PropagatorStudy(B.StudyConfig(p, cfg.n, cfg.grading, cfg.ell_max, cfg.t_min))
            return [B.check_weightV_bound(study, refine=ref)]
        return [B.check_weightV_bound(ctx.study, refine=ref)]
    if cid == "prop-large-time":
        return [B.check_large_time(ctx.study, refine=ref)]
    if cid.startswith("eigenfun-"):
        return [B.check_eigenfunction_bounds(ctx.spectrum, cid.split("-", 1)[1])]
    if cid == "lower-diagonal":
        return [B.check_lower_diagonal(ctx.study, refine=ref)]
    if cid == "karamata":
        return [B.karamata_check(ctx.spectrum, p.dim / 2.0, t_min=cfg.t_min)]
    if cid == "weyl":
        pw = p.with_(R=cfg.weyl_R)
        return [B.check_weyl(solve_below(pw, build_grid(pw, cfg.weyl_n, cfg.grading), cfg.lam_max))]
    if cid == "trace-lower":
        return [B.check_trace_lower(ctx.spectrum)]
    if cid == "blend":
        need = [r for r in done if isinstance(r, B.BoundReport)]
        have = {r.bound_id for r in need}
        if "thm-small-time-intrinsic" not in have:
            need += _run_check("thm-small-time-intrinsic", ctx, done)
        if "thm-weightV" not in have:
            need += _run_check("thm-weightV", ctx, done)
        return [B.blend_bounds(0.5, need, ctx.study, refine=ref)]
    if cid == "weighted-nash":
        return run_suite(cid, p, ctx.spectrum, seed=cfg.seed)
    if cid in SUITE_IDS:
        return run_suite(cid, p, seed=cfg.seed)
    raise ConfigError(f"unknown check id {cid!r}")


def cmd_verify(cfg: RunConfig, outdir: Path) -> int:
    ctx = _Context(cfg)
    reports: list = []
    errors: dict[str, str] = {}
    for cid in cfg.checks:
        try:
            reports += _run_check(cid, ctx, reports)
        except ConfigError:
            raise
        except (ValueError, ArithmeticError, RuntimeError) as exc:
            errors[cid] = f"{type(exc).__name__}: {exc}"
    rows = [r.to_dict() for r in reports]
    _write_json(outdir / "report.json", cfg, "verify", {"reports": rows, "errors": errors})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "value", "refined_value", "fitted_exponent", "passed"])
    for r in reports:
        if isinstance(r, B.BoundReport):
            vals = (r.bound_id, r.sup_ratio, r.refined_sup_ratio, r.fitted_exponent, r.passed)
        else:
            vals = (r.inequality_id, r.worst_ratio, r.refined_worst_ratio, None, r.passed)
        w.writerow([vals[0], *(f"{v:.16e}" if isinstance(v, float) else ("" if v is None else v) for v in vals[1:])])
    _write_csv(outdir / "report.csv", cfg, "verify", buf.getvalue())
    ok = not errors and all(r.passed for r in reports)
    for r in reports:
        rid = r.bound_id if isinstance(r, B.BoundReport) else r.inequality_id
        print(f"{'PASS' if r.passed else 'FAIL'} {rid}")
    for cid, msg in errors.items():
        print(f"ERROR {cid}: {msg}")
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"spectrum": cmd_spectrum, "verify": cmd_verify, "kernel": cmd_kernel}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="degenheat", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", type=Path, help="key = value config file")
    ap.add_argument("--preset", choices=PRESETS, help="named experiment preset")
    ap.add_argument("--out", type=Path, help="output directory (overrides output.dir)")
    ap.add_argument("--check", action="append", default=None, metavar="ID", help=f"check id, repeatable: {', '.join(CHECK_IDS)}")
    ap.add_argument("--seed", type=int, default=None, help="sampling seed (default 42)")
    return ap


def resolve_configs(args) -> list[RunConfig]:
    bases = preset(args.preset) if args.preset else [RunConfig()]
    text = args.config.read_text() if args.config else ""
    cfgs = []
    for b in bases:
        c = parse_config(text, b)
        changes = {}
        if args.check is not None:
            changes["checks"] = tuple(args.check)
        if args.seed is not None:
            changes["seed"] = args.seed
        if changes:
            try:
                c = dataclasses.replace(c, **changes)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        cfgs.append(c)
    return cfgs


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfgs = resolve_configs(args)
    except (ConfigError, OSError) as exc:
        print(f"degenheat: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    root = args.out
    status = EXIT_OK
    for cfg in cfgs:
        if root is None:
            outdir = Path(cfg.out)
        else:
            outdir = root / cfg.out if len(cfgs) > 1 else root
        outdir.mkdir(parents=True, exist_ok=True)
        try:
            code = COMMANDS[args.command](cfg, outdir)
        except ConfigError as exc:
            print(f"degenheat: config error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except ValueError as exc:
            print(f"degenheat: {exc}", file=sys.stderr)
            return EXIT_USAGE
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())
