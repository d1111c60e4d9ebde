"""Command-line front end: evolve, kernel, verify, counterexample, heat-compare.

Exit codes: 0 pass, 1 claim failed or runtime error, 2 usage or configuration
error, 3 inconclusive fit. Errors are written to stderr as one JSON record.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import FluxConfig, q_threshold, select_extension
from .errors import ConfigurationError, DiracABError, DomainError
from .estimates import (EstimateReport, bernstein_check, counterexample_scan, decay_scan,
                        kernel_agreement_check, lp_multiplier_check, lq_decay_check,
                        strichartz_check, weight_necessity_scan)
from .grids import SpectralGrid
from .kernels_closed import (KERNEL_CSV_COLUMNS, compare_with_oracle, heat_kernel_closed,
                             schrodinger_kernel_closed, write_kernel_csv)
from .modes import DEFAULT_K_MAX, SpinorField
from .propagator import evolve_field

__all__ = ["RunConfig", "load_config_file", "build_config", "main", "SUITES"]

SUITES = ("decay", "lq", "strichartz", "counterexample", "multipliers", "kernels")
NORMALIZATION = ("L2(R^2); angular modes e^{ik theta}/sqrt(2 pi); "
                 "Hankel pairing J(r rho) with measure rho drho")
EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3

DEFAULT_KERNEL_T = (0.25, 0.5, 1.0, 2.0, 4.0)
DEFAULT_KERNEL_X = ((0.3, 0.0), (0.8, 1.0), (1.2, math.pi), (1.7, 4.5), (2.2, 2.0))
DEFAULT_KERNEL_Y = ((0.5, 0.0), (0.9, 3.0), (1.4, 5.5), (2.0, 0.5), (0.6, math.pi / 2))


class UsageError(DiracABError):
    """Bad command line or config file."""


@dataclass
class RunConfig:
    alpha: float
    flux: FluxConfig
    t: tuple[float, ...] = ()
    k_max: int | None = None
    rho_max: float = 20.0
    seed: int = 0
    jobs: int = 1
    out: Path | None = None
    params: dict = field(default_factory=dict)


def _floats(text: str, name: str) -> tuple[float, ...]:
    parts = [p for p in str(text).replace(" ", "").split(",") if p]
    if not parts:
        raise UsageError(f"{name} list is empty")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise UsageError(f"cannot parse {name} list {text!r}") from exc


def _points(text: str, name: str) -> tuple[tuple[float, float], ...]:
    """'r:theta,r:theta,...' into polar pairs."""
    out = []
    for item in (p for p in str(text).replace(" ", "").split(",") if p):
        try:
            r, th = item.split(":")
            out.append((float(r), float(th)))
        except ValueError as exc:
            raise UsageError(f"{name} entries must look like r:theta, got {item!r}") from exc
    if not out:
        raise UsageError(f"{name} list is empty")
    return tuple(out)


def load_config_file(path) -> dict:
    """Flat key=value lines; '#' starts a comment; keys use underscores or dashes."""
    values = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge the config file with command-line flags (flags win) and validate."""
    merged = load_config_file(args.config) if getattr(args, "config", None) else {}
    for key, value in vars(args).items():
        if key in ("config", "command", "func") or value is None:
            continue
        merged[key] = value
    if "alpha" not in merged:
        raise UsageError("alpha is required (flag --alpha or config key alpha)")
    try:
        alpha = float(merged.pop("alpha"))
    except ValueError as exc:
        raise UsageError("alpha must be a number") from exc
    try:
        flux = select_extension(alpha)
    except DomainError as exc:
        raise ConfigurationError(str(exc)) from exc
    t = _floats(merged.pop("t"), "t") if "t" in merged else ()
    jobs = merged.pop("jobs", None) or os.environ.get("DIRAC_AB_JOBS") or 1
    k_max = merged.pop("k_max", None)
    out = merged.pop("out", None)
    try:
        cfg = RunConfig(
            alpha=alpha, flux=flux, t=t,
            k_max=None if k_max is None else int(k_max),
            rho_max=float(merged.pop("rho_max", 20.0)),
            seed=int(merged.pop("seed", 0)),
            jobs=max(1, int(jobs)),
            out=None if out is None else Path(out),
            params=merged,
        )
    except ValueError as exc:
        raise UsageError(f"bad numeric setting: {exc}") from exc
    return cfg


def _header(cfg: RunConfig, **extra) -> dict:
    meta = {"alpha": cfg.alpha, "convention": cfg.flux.convention.value,
            "normalization": NORMALIZATION, "seed": cfg.seed}
    meta.update(extra)
    return meta


def _report_dict(cfg: RunConfig, report: EstimateReport) -> dict:
    d = report.to_dict()
    d["convention"] = cfg.flux.convention.value
    d["normalization"] = NORMALIZATION
    return d


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _exit_for(verdicts) -> int:
    verdicts = list(verdicts)
    if any(v == "fail" for v in verdicts):
        return EXIT_FAIL
    if any(v == "inconclusive" for v in verdicts):
        return EXIT_INCONCLUSIVE
    return EXIT_PASS


def _emit_reports(cfg: RunConfig, reports: dict[str, EstimateReport]) -> int:
    """Write one JSON file per report (or one JSON object to stdout) in name order."""
    docs = {name: _report_dict(cfg, reports[name]) for name in sorted(reports)}
    if cfg.out is not None:
        cfg.out.mkdir(parents=True, exist_ok=True)
        for name, doc in docs.items():
            (cfg.out / f"{name}.json").write_text(_dump(doc))
            csv = reports[name].samples_csv()
            if csv:
                (cfg.out / f"{name}_samples.csv").write_text(csv)
        summary = {name: doc["verdict"] for name, doc in docs.items()}
        (cfg.out / "summary.json").write_text(_dump(summary))
        sys.stdout.write(_dump(summary))
    else:
        sys.stdout.write(_dump(docs))
    return _exit_for(doc["verdict"] for doc in docs.values())


def _run_parallel(cfg: RunConfig, tasks: dict) -> dict:
    """Evaluate named zero-argument callables; results keep their names, order-free."""
    names = sorted(tasks)
    if cfg.jobs > 1 and len(names) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(lambda n: tasks[n](), names))
    else:
        results = [tasks[n]() for n in names]
    return dict(zip(names, results))


# ---------------------------------------------------------------------------
# suites


def _suite_decay(cfg: RunConfig) -> dict:
    j = int(cfg.params.get("j", 0))
    return {
        "decay_E": lambda: decay_scan(cfg.flux, j, "E"),
        "decay_F_weighted": lambda: decay_scan(cfg.flux, j, "F"),
        "weight_necessity": lambda: weight_necessity_scan(cfg.flux, j),
    }


def _default_q(cfg: RunConfig) -> float:
    return 0.5 * (2.0 + min(q_threshold(cfg.alpha), 8.0))


def _suite_lq(cfg: RunConfig) -> dict:
    q = float(cfg.params.get("q", _default_q(cfg)))
    t_grid = np.asarray(cfg.t) if cfg.t else None
    return {"lq_decay": lambda: lq_decay_check(cfg.flux, q, t_grid, seed=cfg.seed)}


def _suite_strichartz(cfg: RunConfig) -> dict:
    q = cfg.params.get("q")
    seeds = (cfg.seed, cfg.seed + 1, cfg.seed + 2)
    return {"strichartz": lambda: strichartz_check(cfg.flux, None if q is None else float(q),
                                                   seeds)}


def _suite_counterexample(cfg: RunConfig) -> dict:
    q = float(cfg.params.get("q", 8.0))
    return {"counterexample": lambda: counterexample_scan(cfg.flux, q)}


def _suite_multipliers(cfg: RunConfig) -> dict:
    qa = q_threshold(cfg.alpha)
    p_inside = float(cfg.params.get("p", 0.5 * (qa / (qa - 1) + qa)))
    return {
        "multiplier_p2": lambda: lp_multiplier_check(cfg.flux, 2.0, seed=cfg.seed),
        "multiplier_inside": lambda: lp_multiplier_check(cfg.flux, p_inside, seed=cfg.seed),
        "bernstein": lambda: bernstein_check(cfg.flux, max(p_inside, 2.0), 2.0, seed=cfg.seed),
    }


def _kernel_grid(cfg: RunConfig):
    times = cfg.t or DEFAULT_KERNEL_T
    xs = _points(cfg.params["x"], "x") if "x" in cfg.params else DEFAULT_KERNEL_X
    ys = _points(cfg.params["y"], "y") if "y" in cfg.params else DEFAULT_KERNEL_Y
    return times, xs, ys


def _suite_kernels(cfg: RunConfig) -> dict:
    times, xs, ys = _kernel_grid(cfg)
    kinds = [cfg.params["kind"]] if "kind" in cfg.params else ["heat", "schrodinger"]
    return {f"kernel_{kind}": (lambda kind=kind: kernel_agreement_check(
        cfg.alpha, kind, times, xs, ys, jobs=1)) for kind in kinds}


_SUITE_BUILDERS = {
    "decay": _suite_decay, "lq": _suite_lq, "strichartz": _suite_strichartz,
    "counterexample": _suite_counterexample, "multipliers": _suite_multipliers,
    "kernels": _suite_kernels,
}


# ---------------------------------------------------------------------------
# commands


def cmd_evolve(cfg: RunConfig) -> int:
    if not cfg.t:
        raise UsageError("evolve needs a non-empty --t list")
    if "input" not in cfg.params:
        raise UsageError("evolve needs --input")
    path = Path(cfg.params["input"])
    if not path.exists():
        raise UsageError(f"input field {path} does not exist")
    f0 = SpinorField.from_csv(path)
    k_max = cfg.k_max if cfg.k_max is not None else min(DEFAULT_K_MAX, f0.n_theta // 4)
    spectral = SpectralGrid.for_radial(f0.grid, cfg.rho_max)
    out = cfg.out or Path(".")
    out.mkdir(parents=True, exist_ok=True)

    def one(t):
        return evolve_field(cfg.flux, t, f0, k_max, spectral)

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            snaps = list(pool.map(one, cfg.t))
    else:
        snaps = [one(t) for t in cfg.t]
    n0 = f0.norm()
    norms = []
    for i, (t, u) in enumerate(zip(cfg.t, snaps)):
        u.to_csv(out / f"snapshot_{i:03d}.csv",
                 extra=_header(cfg, t=t, k_max=k_max, rho_max=cfg.rho_max))
        norms.append(u.norm())
    log = _header(cfg, t=list(cfg.t), k_max=k_max, rho_max=cfg.rho_max, initial_norm=n0,
                  norms=norms, max_relative_drift=max(abs(n - n0) / n0 for n in norms))
    (out / "norms.json").write_text(_dump(log))
    return EXIT_PASS


def cmd_kernel(cfg: RunConfig) -> int:
    kind = cfg.params.get("kind", "heat")
    if kind not in ("heat", "schrodinger"):
        raise UsageError("--kind must be heat or schrodinger")
    times, xs, ys = _kernel_grid(cfg)
    fn = heat_kernel_closed if kind == "heat" else schrodinger_kernel_closed
    cols = ("t", "r1", "th1", "r2", "th2", "re", "im", "G_re", "G_im", "D_re", "D_im", "err")
    buf = io.StringIO()
    buf.write("# " + json.dumps(_header(cfg, kind=kind, points="polar (r, theta)"),
                                sort_keys=True) + "\n")
    buf.write(",".join(cols) + "\n")
    for t in times:
        for x in xs:
            for y in ys:
                v = fn(cfg.alpha, t, x, y)
                row = (t, x[0], x[1], y[0], y[1], v.total.real, v.total.imag, v.G_term.real,
                       v.G_term.imag, v.D_term.real, v.D_term.imag, v.err)
                buf.write(",".join(repr(float(c)) for c in row) + "\n")
    _write_or_print(cfg, f"kernel_{kind}.csv", buf.getvalue())
    return EXIT_PASS


def _write_or_print(cfg: RunConfig, name: str, text: str) -> None:
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        cfg.out.mkdir(parents=True, exist_ok=True)
        (cfg.out / name).write_text(text)


def cmd_verify(cfg: RunConfig) -> int:
    suite = cfg.params.get("suite")
    if suite not in _SUITE_BUILDERS:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    reports = _run_parallel(cfg, _SUITE_BUILDERS[suite](cfg))
    return _emit_reports(cfg, reports)


def cmd_counterexample(cfg: RunConfig) -> int:
    return _emit_reports(cfg, _run_parallel(cfg, _suite_counterexample(cfg)))


def cmd_heat_compare(cfg: RunConfig) -> int:
    times, xs, ys = _kernel_grid(cfg)
    report = kernel_agreement_check(cfg.alpha, "heat", times, xs, ys, jobs=cfg.jobs)
    rows = compare_with_oracle(cfg.alpha, "heat", times, xs, ys, jobs=cfg.jobs)
    buf = io.StringIO()
    write_kernel_csv(rows, buf, _header(cfg, kind="heat", points="polar (r, theta)",
                                        columns=list(KERNEL_CSV_COLUMNS)))
    if cfg.out is not None:
        _write_or_print(cfg, "heat_compare.csv", buf.getvalue())
    return _emit_reports(cfg, {"heat_compare": report})


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _error_record("UsageError", message)
        raise SystemExit(EXIT_USAGE)


def _error_record(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}, sort_keys=True) + "\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value file; flags override it")
    p.add_argument("--alpha", type=str, help="flux in (0, 1)")
    p.add_argument("--t", type=str, help="comma-separated times")
    p.add_argument("--k-max", dest="k_max", type=str, help="largest |k| kept")
    p.add_argument("--rho-max", dest="rho_max", type=str, help="spectral cutoff")
    p.add_argument("--seed", type=str, help="seed for random probes")
    p.add_argument("--jobs", type=str, help="worker threads (fallback: DIRAC_AB_JOBS)")
    p.add_argument("--out", type=str, help="output directory")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dirac-ab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("evolve", help="evolve a spinor field given as CSV")
    _common(p)
    p.add_argument("--input", help="CSV written by SpinorField.to_csv")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("kernel", help="closed-form heat or Schrodinger kernel values")
    _common(p)
    p.add_argument("--kind", choices=("heat", "schrodinger"))
    p.add_argument("--x", help="points r:theta,r:theta,...")
    p.add_argument("--y", help="points r:theta,r:theta,...")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("verify", help="run a verification suite")
    _common(p)
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--q", help="Lebesgue exponent (lq, strichartz, counterexample)")
    p.add_argument("--p", help="multiplier exponent (multipliers)")
    p.add_argument("--j", help="dyadic index (decay)")
    p.add_argument("--kind", choices=("heat", "schrodinger"))
    p.add_argument("--x", help="points r:theta,... (kernels)")
    p.add_argument("--y", help="points r:theta,... (kernels)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("counterexample", help="norm growth of the singular k = 0 term")
    _common(p)
    p.add_argument("--q", help="Lebesgue exponent")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("heat-compare", help="closed heat kernel against the mode sum")
    _common(p)
    p.add_argument("--x", help="points r:theta,...")
    p.add_argument("--y", help="points r:theta,...")
    p.set_defaults(func=cmd_heat_compare)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        return args.func(cfg)
    except (UsageError, ConfigurationError, DomainError) as exc:
        _error_record(type(exc).__name__, str(exc))
        return EXIT_USAGE
    except DiracABError as exc:
        _error_record(type(exc).__name__, str(exc))
        return EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
