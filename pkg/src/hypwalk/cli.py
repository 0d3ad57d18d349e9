"""Command-line front end: ``hypwalk {check,sweep,simulate,ball,boundary}``.

Exit codes: 0 success (for ``check``: verdict true), 1 verdict false, 2 error.
Values come from built-in defaults, then ``--config`` (TOML, or a JSON run
manifest), then explicit flags.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from . import __version__
from . import report
from .criterion import StepMeasure, criterion_gap, fuchsian_criterion, sweep
from .errors import HypwalkError
from .groups import Family, ball_census, build_group, canonical_word, parse_word
from .walksim import DEFAULT_STOP_RADIUS, WalkConfig, sample_boundary, simulate

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


DEFAULTS = {
    "check": {"family": "reflection", "mu": "uniform", "word": None, "format": "json"},
    "sweep": {"family": "reflection", "n_range": None, "m_range": None, "format": "text",
              "out_csv": None, "out_svg": None},
    "simulate": {"family": "reflection", "mu": "uniform", "steps": 50, "trials": 1000,
                 "seed": 0, "format": "json", "out_json": None},
    "ball": {"family": "reflection", "rmax": 10.0, "step": 0.5, "format": "text", "out_csv": None},
    "boundary": {"family": "reflection", "mu": "uniform", "trials": 10000, "seed": 0,
                 "stop_radius": DEFAULT_STOP_RADIUS, "bins": None, "format": "text",
                 "out_csv": None},
}
COMMON = {"threads": 1, "manifest": None}
REQUIRED = {"check": ("n", "m"), "simulate": ("n", "m"), "ball": ("n", "m"), "boundary": ("n", "m")}


class UsageError(HypwalkError):
    pass


def _parse_range(text: str) -> range:
    parts = [int(p) for p in str(text).split(":")]
    if len(parts) == 1:
        return range(parts[0], parts[0] + 1)
    lo, hi = parts[0], parts[1]
    step = parts[2] if len(parts) > 2 else 1
    if step < 1:
        raise UsageError("range step must be positive")
    return range(lo, hi + 1, step)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypwalk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hypwalk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    def common(p, *, group=True, mu=False):
        p.add_argument("--family", choices=[f.value for f in Family], default=S)
        if group:
            p.add_argument("-n", type=int, default=S, help="number of polygon sides")
            p.add_argument("-m", type=int, default=S, help="interior angle is 2*pi/m")
        if mu:
            p.add_argument("--mu", default=S, help="'uniform' or comma-separated weights (normalized)")
        p.add_argument("--format", choices=["json", "text"], default=S)
        p.add_argument("--config", type=Path, default=S, help="TOML file or JSON run manifest")
        p.add_argument("--threads", type=int, default=S)
        p.add_argument("--manifest", type=Path, default=S,
                       help="manifest path when no output file is written")

    p = sub.add_parser("check", help="singularity criterion for one group and word")
    common(p, mu=True)
    p.add_argument("--word", default=S, help="comma-separated labels, e.g. r1,r3")

    p = sub.add_parser("sweep", help="criterion verdicts over an (n, m) grid")
    common(p, group=False)
    p.add_argument("--n-range", dest="n_range", default=S, help="lo:hi[:step], inclusive")
    p.add_argument("--m-range", dest="m_range", default=S, help="lo:hi[:step], inclusive")
    p.add_argument("--out-csv", dest="out_csv", type=Path, default=S)
    p.add_argument("--out-svg", dest="out_svg", type=Path, default=S)

    p = sub.add_parser("simulate", help="drift, entropy and fundamental-inequality gap")
    common(p, mu=True)
    p.add_argument("--steps", type=int, default=S)
    p.add_argument("--trials", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--out-json", dest="out_json", type=Path, default=S)

    p = sub.add_parser("ball", help="ball census and volume-growth slope")
    common(p)
    p.add_argument("--rmax", type=float, default=S)
    p.add_argument("--step", type=float, default=S)
    p.add_argument("--out-csv", dest="out_csv", type=Path, default=S)

    p = sub.add_parser("boundary", help="sample exit angles of the walk")
    common(p, mu=True)
    p.add_argument("--trials", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--stop-radius", dest="stop_radius", type=float, default=S)
    p.add_argument("--bins", type=int, default=S)
    p.add_argument("--out-csv", dest="out_csv", type=Path, default=S)
    return parser


def _load_config(path: Path) -> dict:
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        data = json.loads(text)
        data = data.get("parameters", data)
    else:
        data = tomllib.loads(text)
    return {k.replace("-", "_"): v for k, v in data.items()}


def _resolve(ns: argparse.Namespace) -> dict:
    explicit = {k: v for k, v in vars(ns).items() if k != "command"}
    params = {**COMMON, **DEFAULTS[ns.command]}
    if "config" in explicit:
        params.update(_load_config(explicit.pop("config")))
    params.update(explicit)
    for key in REQUIRED.get(ns.command, ()):
        if params.get(key) is None:
            raise UsageError(f"missing required parameter -{key}")
    return params


def _measure(model, text) -> StepMeasure:
    if text in (None, "uniform"):
        return StepMeasure.uniform(model)
    weights = text if isinstance(text, list) else str(text).split(",")
    return StepMeasure.from_list(model, [float(w) for w in weights], normalize=True)


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _write_outputs(command: str, params: dict, outputs: dict[str, str], seed=None) -> None:
    manifest = report.RunManifest(command, _jsonable(params), seed)
    written = []
    for key, content in outputs.items():
        path = params.get(key)
        if path is None:
            continue
        path = Path(path)
        path.write_text(content, encoding="utf-8")
        manifest.write(report.manifest_path(path))
        written.append(path)
    if params.get("manifest") is not None:
        manifest.write(Path(params["manifest"]))
    elif not written:
        sys.stderr.write("manifest: " + json.dumps(manifest.to_dict()) + "\n")


def _jsonable(params: dict) -> dict:
    skip = {"manifest"}
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in params.items() if k not in skip}


# -- commands -------------------------------------------------------------------

def cmd_check(params: dict) -> int:
    family = Family(params["family"])
    model = build_group(family, params["n"], params["m"])
    mu = _measure(model, params["mu"])
    if params.get("word"):
        rep = criterion_gap(model, mu, parse_word(params["word"]))
    elif family is Family.FUCHSIAN:
        rep = fuchsian_criterion(model.n, model.m, mu, model)
    else:
        rep = criterion_gap(model, mu, canonical_word(model))
    out = rep.to_dict()
    out = {"group": model.name, **out}
    if params["format"] == "json":
        _emit(report.dumps(out))
    else:
        flag = " (borderline)" if rep.borderline else ""
        _emit(f"{model.name} word={','.join(rep.word)} L={rep.L:.10g} cost={rep.weight_cost:.10g} "
              f"gap={rep.gap:.10g} verdict={str(rep.verdict).lower()}{flag}")
    _write_outputs("check", params, {})
    return 0 if rep.verdict else 1


def cmd_sweep(params: dict) -> int:
    family = Family(params["family"])
    default_n = range(4, 51)
    default_m = range(4, 51) if family is Family.REFLECTION else range(3, 51)
    ns = _parse_range(params["n_range"]) if params.get("n_range") else default_n
    ms = _parse_range(params["m_range"]) if params.get("m_range") else default_m
    table = sweep(family, ns, ms)
    if not table.pairs:
        warnings.warn("no valid hyperbolic pairs in the requested range")
    exc = "{" + ",".join(f"({n},{m})" for n, m in table.exceptional) + "}"
    if params["format"] == "json":
        _emit(report.dumps({"family": family.value, "pairs": len(table.pairs),
                            "exceptional": [list(p) for p in table.exceptional],
                            "rejected": [list(p) for p in table.rejected]}))
    else:
        _emit(exc)
    _write_outputs("sweep", params, {"out_csv": report.region_csv(table),
                                     "out_svg": report.region_svg(table)})
    return 0


def cmd_simulate(params: dict) -> int:
    if params["steps"] < 1:
        raise UsageError("steps must be >= 1")
    model = build_group(params["family"], params["n"], params["m"])
    cfg = WalkConfig(model, _measure(model, params["mu"]), steps=params["steps"],
                     trials=params["trials"], seed=params["seed"], workers=params["threads"])
    stats = simulate(cfg)
    out = {"group": model.name, **stats.to_dict()}
    text = report.dumps(out)
    if params["format"] == "json":
        _emit(text)
    else:
        _emit(f"{model.name} drift={stats.drift_hat:.6g}±{stats.drift_stderr:.2g} "
              f"entropy={stats.entropy_hat:.6g}±{stats.entropy_stderr:.2g} fi_gap={stats.fi_gap:.6g}")
    _write_outputs("simulate", params, {"out_json": text + "\n"}, params["seed"])
    return 0


def cmd_ball(params: dict) -> int:
    model = build_group(params["family"], params["n"], params["m"])
    census = ball_census(model, params["rmax"], params["step"])
    if params["format"] == "json":
        _emit(report.dumps({"group": model.name, "slope": census.slope_estimate,
                            "radius_grid": list(census.radius_grid), "counts": list(census.counts)}))
    else:
        _emit(f"slope={census.slope_estimate:.6f} count(R={census.radius_grid[-1]:g})={census.counts[-1]}")
    _write_outputs("ball", params, {"out_csv": report.census_csv(census)})
    return 0


def cmd_boundary(params: dict) -> int:
    model = build_group(params["family"], params["n"], params["m"])
    cfg = WalkConfig(model, _measure(model, params["mu"]), trials=params["trials"],
                     seed=params["seed"], stop_radius=params["stop_radius"],
                     bins=params.get("bins"), workers=params["threads"])
    sample = sample_boundary(cfg)
    if params["format"] == "json":
        _emit(report.dumps({"group": model.name, **sample.to_dict()}))
    else:
        _emit(f"converged={int(sample.histogram.sum())} non_converged={sample.non_converged} "
              f"bins={len(sample.histogram)}")
    _write_outputs("boundary", params, {"out_csv": report.histogram_csv(sample)}, params["seed"])
    return 0


COMMANDS = {"check": cmd_check, "sweep": cmd_sweep, "simulate": cmd_simulate,
            "ball": cmd_ball, "boundary": cmd_boundary}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    try:
        params = _resolve(ns)
        return COMMANDS[ns.command](params)
    except (HypwalkError, ValueError, OSError) as exc:
        sys.stderr.write(f"hypwalk {ns.command}: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
