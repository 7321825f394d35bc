"""Command-line front end.

    ibregion curve       --source bsc:0.1 --out run/
    ibregion region      --source bsc:0.1 --n 3 --m-size 2 --out run/
    ibregion quantize    --rho 0.9 --eps 0.05 --out run/
    ibregion rectangles  --rho 0.9 --cells 6x2 --n 2 --m-size 3 --eps 0.1 --out run/
    ibregion export      --rho 0.9 --cells 200 --out run/

Settings resolve as: built-in defaults < --config JSON < $IBREGION_SEED (seed
only) < explicit flags. Exit codes: 0 ok, 1 usage, 2 numerical failure,
3 bound violation.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import IBRegionError
from .probability import JointPMF

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_BOUND = 0, 1, 2, 3
DEFAULT_SEED = 0x1B
SEED_ENV = "IBREGION_SEED"

_COMMON = {"source": None, "rho": None, "seed": DEFAULT_SEED, "unit": "nats", "out": ".", "plot": True}
_CURVE = {"beta_min": 0.05, "beta_max": 200.0, "beta_count": 60, "u_size": None, "restarts": 2,
          "tol": 1e-10, "max_iter": 100_000, "refine_gap": 0.02, "kernels": False}
DEFAULTS = {
    "curve": {**_COMMON, **_CURVE, "cells": "200x200"},
    "region": {**_COMMON, **_CURVE, "cells": "2x2", "n": 3, "m_size": 2, "slack": 5e-3},
    "quantize": {**_COMMON, "cells": "2000x2", "eps": 0.05, "delta": None, "beta": 5.0,
                 "coarse_cells": 40, "u_size": 2},
    "rectangles": {**_COMMON, "cells": "6x2", "eps": 0.1, "delta": None, "n": 2, "m_size": 3,
                   "code": None},
    "export": {**_COMMON, "cells": "200x200", "grid": False, "beta": 5.0, "coarse_cells": 40,
               "u_size": 2},
}
# not part of the experiment identity
_UNHASHED = {"out", "plot", "config", "kernels"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class ExperimentConfig:
    command: str
    source: str | None
    rho: float | None
    cells: str
    seed: int
    unit: str
    out: Path
    plot: bool
    params: dict = field(default_factory=dict)

    def identity(self) -> dict:
        d = {"command": self.command, "source": self.source, "rho": self.rho, "cells": self.cells,
             "seed": self.seed, "unit": self.unit}
        d.update({k: v for k, v in self.params.items() if k not in _UNHASHED})
        return d

    @property
    def digest(self) -> str:
        blob = json.dumps(self.identity(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @property
    def unit_scale(self) -> float:
        return 1.0 / math.log(2) if self.unit == "bits" else 1.0


def _add_common(p):
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="JSON file with default settings")
    p.add_argument("--source", default=S,
                   help="JointPMF/GridSource JSON path, 'bsc:P', or 'gaussian'")
    p.add_argument("--rho", type=float, default=S, help="Gaussian correlation (implies a Gaussian source)")
    p.add_argument("--cells", default=S, help="grid size NX or NXxNY for Gaussian sources")
    p.add_argument("--seed", type=lambda s: int(s, 0), default=S)
    p.add_argument("--unit", choices=["nats", "bits"], default=S)
    p.add_argument("--out", default=S, help="output directory")
    p.add_argument("--no-plot", dest="plot", action="store_false", default=S)


def _add_curve(p):
    S = argparse.SUPPRESS
    p.add_argument("--beta-min", type=float, default=S)
    p.add_argument("--beta-max", type=float, default=S)
    p.add_argument("--beta-count", type=int, default=S)
    p.add_argument("--u-size", type=int, default=S)
    p.add_argument("--restarts", type=int, default=S)
    p.add_argument("--tol", type=float, default=S)
    p.add_argument("--max-iter", type=int, default=S)
    p.add_argument("--refine-gap", type=float, default=S, help="nats; negative disables refinement")
    p.add_argument("--kernels", action="store_true", default=S, help="write encoder kernels JSON")


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = _Parser(prog="ibregion", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("curve", help="IB trade-off curve")
    _add_common(p)
    _add_curve(p)

    p = sub.add_parser("region", help="exhaustive block codes vs the IB curve")
    _add_common(p)
    _add_curve(p)
    p.add_argument("--n", type=int, default=S, help="largest blocklength")
    p.add_argument("--m-size", type=int, default=S)
    p.add_argument("--slack", type=float, default=S)

    p = sub.add_parser("quantize", help="quantize a grid source and check the information bounds")
    _add_common(p)
    p.add_argument("--eps", type=float, default=S)
    p.add_argument("--delta", type=float, default=S, help="override the delta derived from --eps")
    p.add_argument("--beta", type=float, default=S, help="multiplier of the coarse Gaussian encoder")
    p.add_argument("--coarse-cells", type=int, default=S)
    p.add_argument("--u-size", type=int, default=S)

    p = sub.add_parser("rectangles", help="rectangle covers of a block code and the distribution gap")
    _add_common(p)
    p.add_argument("--eps", type=float, default=S)
    p.add_argument("--delta", type=float, default=S)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--m-size", type=int, default=S)
    p.add_argument("--code", default=S, help="JSON {n, m_size, labels}; random code when absent")

    p = sub.add_parser("export", help="write a Gaussian source as JointPMF or GridSource JSON")
    _add_common(p)
    p.add_argument("--grid", action="store_true", default=S, help="GridSource with IB u_channel")
    p.add_argument("--beta", type=float, default=S)
    p.add_argument("--coarse-cells", type=int, default=S)
    p.add_argument("--u-size", type=int, default=S)
    return parser


def resolve_config(args: argparse.Namespace, environ=None) -> ExperimentConfig:
    environ = os.environ if environ is None else environ
    flags = dict(vars(args))
    command = flags.pop("command")
    merged = dict(DEFAULTS[command])
    if "config" in flags:
        try:
            with open(flags.pop("config")) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise UsageError(f"cannot read config: {err}") from None
        unknown = set(file_cfg) - set(merged)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_cfg)
    if SEED_ENV in environ:
        try:
            merged["seed"] = int(environ[SEED_ENV], 0)
        except ValueError:
            raise UsageError(f"${SEED_ENV} is not an integer") from None
    merged.update(flags)
    common = {k: merged.pop(k) for k in ("source", "rho", "cells", "seed", "unit", "out", "plot")}
    if common["source"] is not None and common["rho"] is not None and common["source"] != "gaussian":
        raise UsageError("give exactly one source: --source or --rho")
    if common["source"] is None and common["rho"] is None:
        raise UsageError("no source given (use --source or --rho)")
    return ExperimentConfig(command=command, source=common["source"], rho=common["rho"],
                            cells=str(common["cells"]), seed=int(common["seed"]),
                            unit=common["unit"], out=Path(common["out"]), plot=bool(common["plot"]),
                            params=merged)


def _parse_cells(spec: str) -> tuple[int, int | None]:
    parts = spec.lower().split("x")
    try:
        if len(parts) == 1:
            return int(parts[0]), None
        if len(parts) == 2:
            return int(parts[0]), int(parts[1])
    except ValueError:
        pass
    raise UsageError(f"bad --cells {spec!r}; expected NX or NXxNY")


def bsc_joint(p: float) -> JointPMF:
    """Uniform binary X through a binary symmetric channel with crossover p."""
    if not (0.0 <= p <= 1.0):
        raise UsageError("crossover must lie in [0, 1]")
    return JointPMF(("Y", "X"), np.array([[0.5 * (1 - p), 0.5 * p], [0.5 * p, 0.5 * (1 - p)]]))


def _gaussian(cfg: ExperimentConfig):
    from .gaussian import GaussianPair

    rho = 0.9 if cfg.rho is None else cfg.rho
    return GaussianPair(rho)


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise UsageError(f"cannot read source {path!r}: {err}") from None


def load_joint(cfg: ExperimentConfig) -> JointPMF:
    """Finite (Y, X) source for the curve / region / rectangles commands."""
    from .gaussian import discretize
    from .quantizer import GridSource

    src = cfg.source
    if src is None or src == "gaussian":
        nx, ny = _parse_cells(cfg.cells)
        return discretize(_gaussian(cfg), nx, ny or nx)
    if src.startswith("bsc:"):
        try:
            return bsc_joint(float(src[4:]))
        except ValueError:
            raise UsageError(f"bad crossover in {src!r}") from None
    obj = _read_json(src)
    if "axes" in obj:
        j = JointPMF.from_json(obj)
        if set(j.axes) != {"Y", "X"}:
            j = j.marginal(["Y", "X"])
        return j.transpose(["Y", "X"])
    if "cells" in obj:
        return GridSource.from_json(obj).yx_joint()
    raise UsageError(f"{src!r} is neither a JointPMF nor a GridSource")


def load_grid_source(cfg: ExperimentConfig):
    from .gaussian import ib_grid_source
    from .quantizer import GridSource

    src = cfg.source
    if src is None or src == "gaussian":
        nx, ny = _parse_cells(cfg.cells)
        return ib_grid_source(_gaussian(cfg), nx, ny or 2, beta=cfg.params["beta"],
                              coarse_cells=cfg.params["coarse_cells"], u_size=cfg.params["u_size"])
    if src.startswith("bsc:"):
        raise UsageError("quantize needs a GridSource file or a Gaussian source")
    obj = _read_json(src)
    if "cells" not in obj:
        raise UsageError(f"{src!r} is not a GridSource")
    return GridSource.from_json(obj)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: Path, cfg: ExperimentConfig, header: list[str], rows) -> Path:
    buf = io.StringIO()
    buf.write(f"# ibregion {__version__} config={cfg.digest}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    path.write_text(buf.getvalue())
    return path


def write_json(path: Path, cfg: ExperimentConfig, payload: dict) -> Path:
    doc = {"ibregion_version": __version__, "config": cfg.identity(), "config_hash": cfg.digest, **payload}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o)}")


def _solve_curve(cfg: ExperimentConfig, j: JointPMF):
    from .ib_solver import default_betas, ib_curve

    p = cfg.params
    betas = default_betas(p["beta_count"], p["beta_min"], p["beta_max"])
    gap = p["refine_gap"]
    return ib_curve(j, betas, u_size=p["u_size"], restarts=p["restarts"], tol=p["tol"],
                    max_iter=p["max_iter"], seed=cfg.seed,
                    refine_gap=None if gap is None or gap < 0 else gap)


def cmd_curve(cfg: ExperimentConfig) -> int:
    j = load_joint(cfg)
    curve = _solve_curve(cfg, j)
    unit, k = cfg.unit, cfg.unit_scale
    rows = [(p.beta, p.rate * k, p.score * k, p.converged, p.iters) for p in curve.raw]
    write_csv(cfg.out / "curve.csv", cfg, ["beta", f"rate_{unit}", f"score_{unit}", "converged", "iters"], rows)
    if cfg.params["kernels"]:
        write_json(cfg.out / "curve_kernels.json", cfg,
                   {"kernels": [{"beta": p.beta, "encoder": p.encoder.rows.tolist()} for p in curve.raw]})
    if cfg.plot:
        from . import plotting

        analytic = None
        if cfg.source in (None, "gaussian"):
            from .gaussian import analytic_ib_curve

            rho = _gaussian(cfg).rho
            analytic = lambda r: analytic_ib_curve(rho, r)  # noqa: E731
        plotting.plot_curve(curve, cfg.out / "curve.png", k, unit, analytic=analytic)
    failed = sum(not p.converged for p in curve.raw)
    if failed > 0.1 * len(curve.raw):
        print(f"{failed}/{len(curve.raw)} beta points did not converge", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_region(cfg: ExperimentConfig) -> int:
    from .ib_solver import ib_value_at_rate
    from .oracle import converse_check, enumerate_frontier

    j = load_joint(cfg)
    curve = _solve_curve(cfg, j)
    p = cfg.params
    unit, k = cfg.unit, cfg.unit_scale
    points = []
    for n in range(1, p["n"] + 1):
        points.extend(enumerate_frontier(j, n, p["m_size"], keep_all=True))
    passed = [converse_check(pt, curve, p["slack"]) for pt in points]
    rows = [(pt.n, pt.m_size, pt.rgs, pt.rate * k, pt.score * k) for pt in points]
    write_csv(cfg.out / "frontier.csv", cfg,
              ["n", "m_size", "partition_rgs", f"rate_{unit}", f"score_{unit}"], rows)
    report = {
        "slack_nats": p["slack"],
        "all_pass": all(passed),
        "failures": sum(not ok for ok in passed),
        "rows": [{"n": pt.n, "partition_rgs": pt.rgs, "rate_nats": pt.rate, "score_nats": pt.score,
                  "ceiling_nats": ib_value_at_rate(curve, pt.rate), "pass": ok}
                 for pt, ok in zip(points, passed)],
    }
    write_json(cfg.out / "dominance.json", cfg, report)
    if cfg.plot:
        from . import plotting

        plotting.plot_region(points, curve, cfg.out / "region.png", passed, k, unit)
    return EXIT_OK if all(passed) else EXIT_BOUND


def cmd_quantize(cfg: ExperimentConfig) -> int:
    from .quantizer import delta_for_epsilon, partition_simplex, quantize_source, verify_quantization_bounds

    src = load_grid_source(cfg)
    p = cfg.params
    delta = p["delta"] if p["delta"] is not None else delta_for_epsilon(p["eps"], src.y_size, src.u_size)
    q = quantize_source(src, partition_simplex(src.u_size, delta))
    rep = verify_quantization_bounds(src, q, delta, strict=False)
    write_json(cfg.out / "quantization.json", cfg, {"eps": p["eps"], "report": rep.to_json(), "ok": rep.ok})
    if cfg.plot:
        from . import plotting

        plotting.plot_quantization(src, q, cfg.out / "quantize.png")
    return EXIT_OK if rep.ok else EXIT_BOUND


def cmd_rectangles(cfg: ExperimentConfig) -> int:
    from .rectangles import converse_witness

    j = load_joint(cfg)
    p = cfg.params
    nx = j.sizes["X"]
    if p["code"] is not None:
        obj = _read_json(p["code"])
        n, m_size = int(obj["n"]), int(obj["m_size"])
        labels = np.asarray(obj["labels"], dtype=np.int64).reshape((nx,) * n)
    else:
        n, m_size = p["n"], p["m_size"]
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 2]))
        labels = rng.integers(0, m_size, size=(nx,) * n)
    rep, covers, lp = converse_witness(j, labels, m_size, p["eps"], p["delta"])
    write_json(cfg.out / "gap.json", cfg, {"report": rep.to_json(), "ok": rep.ok,
                                           "labels": labels.ravel().tolist()})
    write_json(cfg.out / "covers.json", cfg, {"covers": [c.to_json() for c in covers],
                                              "block_of": lp.block_of.tolist(),
                                              "g": lp.g.ravel().tolist()})
    if cfg.plot and n == 2:
        from . import plotting

        plotting.plot_cover(labels, covers, cfg.out / "covers.png")
    return EXIT_OK if rep.ok else EXIT_BOUND


def cmd_export(cfg: ExperimentConfig) -> int:
    if cfg.params["grid"]:
        payload = load_grid_source(cfg).to_json()
    else:
        payload = load_joint(cfg).to_json()
    (cfg.out / "source.json").write_text(json.dumps(payload) + "\n")
    return EXIT_OK


COMMANDS = {"curve": cmd_curve, "region": cmd_region, "quantize": cmd_quantize,
            "rectangles": cmd_rectangles, "export": cmd_export}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        cfg.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[cfg.command](cfg)
    except UsageError as err:
        print(f"ibregion: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except IBRegionError as err:
        from .errors import BoundViolation, ConvergenceError

        print(f"ibregion: {type(err).__name__}: {err}", file=sys.stderr)
        if isinstance(err, BoundViolation):
            return EXIT_BOUND
        if isinstance(err, ConvergenceError):
            return EXIT_NUMERIC
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
