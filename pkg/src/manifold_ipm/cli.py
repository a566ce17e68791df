"""Command-line front end.

Every command reads an optional JSON config (``--config``) whose keys are
the long flag names with dashes replaced by underscores; flags given on the
command line override it.  Results go to ``--out`` as CSV/JSON and the JSON
summary is printed.  Exit status: 0 pass, 1 failed comparison, 2 error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import _io
from .besov import analyze_measure, ipm_dual
from .errors import ConfigError
from .estimator import (
    count_inversions,
    minimum_ipm_estimate,
    radius_grid,
    rate_experiment,
    summarize_rates,
)
from .interpolation import (
    FAMILIES,
    ExperimentSpec,
    family_pair,
    fit_exponent,
    predicted_exponent,
    run_family,
)
from .measures import DiscreteMeasure, make_curve, sample_iid
from .oscillation import PotentialSpec, example_report
from .wavelets import (
    build_family,
    default_order,
    filter_residuals,
    gram_errors,
    partition_of_unity_error,
    two_scale_error,
)

__all__ = ["RunConfig", "parse_config", "run", "main", "COMMANDS"]


def _int_list(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [_int(v) for v in text]
    return [_int(v) for v in str(text).split(",") if v.strip()]


def _float_list(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    return [float(v) for v in str(text).split(",") if v.strip()]


def _int(v) -> int:
    f = float(v)
    if not f.is_integer():
        raise ValueError(f"{v!r} is not an integer")
    return int(f)


def _opt(kind):
    def parse(v):
        return None if v is None else kind(v)
    return parse


def _family(v) -> str:
    name = str(v).replace("-", "_")
    if name not in FAMILIES:
        raise ValueError(f"family must be one of {', '.join(FAMILIES)}")
    return name


# key -> (parser, default, help)
_GRID = {
    "eps_min": (float, -0.003, "smallest radius offset in the model grid"),
    "eps_max": (float, 0.003, "largest radius offset in the model grid"),
    "grid_size": (_int, 21, "number of grid circles"),
    "truth_eps": (float, 0.0, "radius offset of the sampled circle"),
    "gamma_loss": (float, 0.5, "smoothness of the fitting loss"),
    "J": (_int, 6, "finest wavelet level"),
    "nodes": (_int, 512, "quadrature nodes per candidate"),
    "order": (_int, 4, "Daubechies order"),
}

SCHEMAS: dict[str, dict[str, tuple[Callable, Any, str]]] = {
    "wavelet-check": {
        "order": (_int, 4, "Daubechies order"),
        "depth": (_int, 12, "cascade depth"),
        "pairs": (_int, 50, "random Gram pairs"),
        "seed": (_int, 0, "seed for the Gram pairs"),
    },
    "ipm": {
        "family": (_family, "perturbed_circle", "measure-pair family"),
        "index": (float, 8.0, "frequency n or radius offset eps"),
        "beta": (float, 0.0, "roughness of the oscillating circle"),
        "gamma": (_float_list, [1.0], "smoothness levels, comma separated"),
        "J": (_int, 8, "finest wavelet level"),
        "nodes": (_int, 512, "quadrature nodes"),
        "order": (_opt(_int), None, "Daubechies order"),
        "a": (_opt(str), None, "CSV file of the first measure"),
        "b": (_opt(str), None, "CSV file of the second measure"),
    },
    "fit-exponent": {
        "family": (_family, "perturbed_circle", "measure-pair family"),
        "beta": (float, 0.0, "roughness of the oscillating circle"),
        "gamma": (_float_list, [1.0], "low smoothness levels"),
        "eta": (_float_list, [2.0], "high smoothness levels"),
        "n": (_opt(_int_list), None, "frequencies (oscillating family)"),
        "eps": (_opt(_float_list), None, "radius offsets (radius family)"),
        "J": (_opt(_int), None, "finest wavelet level"),
        "nodes": (_int, 512, "quadrature nodes"),
        "order": (_opt(_int), None, "Daubechies order"),
        "log_weight": (float, 0.0, "log exponent for integer smoothness"),
        "tolerance": (float, 0.15, "allowed |slope - predicted|"),
        "min_r2": (float, 0.98, "required coefficient of determination"),
    },
    "example5": {
        "beta": (float, 0.0, "roughness of the oscillating circle"),
        "eta": (_int, 2, "integer smoothness of the potential"),
        "n": (_int_list, [2, 4, 8, 16, 32], "frequencies"),
        "quad_nodes": (_int, 2**14, "nodes for the cost integral"),
        "J": (_opt(_int), None, "finest wavelet level"),
        "nodes": (_int, 512, "quadrature nodes per measure"),
        "order": (_opt(_int), None, "Daubechies order"),
    },
    "estimate": {
        **_GRID,
        "samples": (_int, 400, "sample size"),
        "seed": (_int, 0, "sampling seed"),
        "sample": (_opt(str), None, "CSV file of the sample (overrides sampling)"),
    },
    "rate": {
        **_GRID,
        "n": (_int_list, [100, 400, 1600], "sample sizes"),
        "reps": (_int, 10, "repetitions per size"),
        "seed": (_int, 0, "base seed"),
        "gamma_eval": (float, 1.0, "smoothness of the evaluation distance"),
        "inversions": (_int, 1, "allowed increases of the mean error"),
    },
}
COMMANDS = tuple(SCHEMAS)


@dataclass
class RunConfig:
    """Resolved command, parameters, output directory and worker count."""

    command: str
    params: dict = field(default_factory=dict)
    out: Path = Path("out")
    workers: int = 1

    def provenance(self) -> dict:
        # excludes out and workers so artifacts do not depend on them
        return {"command": self.command, **self.params}


def _default_workers() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def _flag(key: str) -> str:
    return "--" + key.replace("_", "-") if key != "J" else "--J"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="manifold_ipm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON file with parameters")
        sp.add_argument("--out", help="output directory", default=argparse.SUPPRESS)
        sp.add_argument("--workers", type=int, default=argparse.SUPPRESS,
                        help="parallel workers (default: available CPUs)")
        for key, (_, _, helptext) in schema.items():
            sp.add_argument(_flag(key), dest=key, default=argparse.SUPPRESS, help=helptext)
    return parser


def load_json_config(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def parse_config(argv: Sequence[str], json_text: str | None = None) -> RunConfig:
    """Merge JSON config and flags into a validated :class:`RunConfig`.

    ``json_text`` takes precedence over a ``--config`` file.

    Raises
    ------
    ConfigError
        Malformed JSON, unknown keys or values violating a precondition.
    """
    args = vars(build_parser().parse_args(list(argv)))
    command = args.pop("command")
    path = args.pop("config", None)
    schema = SCHEMAS[command]
    raw: dict = {}
    if json_text is None and path is not None:
        try:
            json_text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    if json_text is not None:
        raw = load_json_config(json_text)
        raw.pop("command", None)
    allowed = set(schema) | {"out", "workers"}
    for key in raw:
        if key not in allowed:
            raise ConfigError(f"unknown config key {key!r} for command {command}")
    raw.update(args)
    out = Path(raw.pop("out", "out"))
    workers = raw.pop("workers", None)
    params = {}
    for key, (parse, default, _) in schema.items():
        if key in raw:
            try:
                params[key] = parse(raw[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"invalid value for {key!r}: {exc}") from None
        else:
            params[key] = default
    try:
        workers = _default_workers() if workers is None else int(workers)
    except (TypeError, ValueError):
        raise ConfigError("workers must be an integer") from None
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    config = RunConfig(command, params, out, workers)
    try:
        _VALIDATORS[command](params)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from None
    return config


def _experiment_spec(p: dict) -> ExperimentSpec:
    gammas, etas = p["gamma"], p["eta"]
    if len(gammas) == 1 and len(etas) > 1:
        gammas = gammas * len(etas)
    if len(etas) == 1 and len(gammas) > 1:
        etas = etas * len(gammas)
    if len(gammas) != len(etas):
        raise ConfigError("gamma and eta lists must have equal length")
    if p["family"] == "perturbed_circle":
        if p["eps"] is not None or p["n"] is None:
            raise ConfigError("the perturbed_circle family takes 'n', not 'eps'")
        indices = tuple(p["n"])
    else:
        if p["n"] is not None or p["eps"] is None:
            raise ConfigError("the circle_radius family takes 'eps', not 'n'")
        indices = tuple(p["eps"])
    return ExperimentSpec(
        p["family"], indices, tuple(zip(gammas, etas)), beta=p["beta"], J=p["J"],
        nodes=p["nodes"], order=p["order"], log_weight=p["log_weight"],
    )


def _validate_wavelet(p):
    if p["order"] < 1 or p["depth"] < 4 or p["pairs"] < 1:
        raise ConfigError("need order >= 1, depth >= 4 and pairs >= 1")


def _validate_ipm(p):
    if p["J"] < 0:
        raise ConfigError("J must be >= 0")
    if any(g <= 0 for g in p["gamma"]):
        raise ConfigError("smoothness levels must be positive")
    if (p["a"] is None) != (p["b"] is None):
        raise ConfigError("give both 'a' and 'b' or neither")
    if p["a"] is None:
        if p["family"] == "perturbed_circle":
            make_curve("perturbed_circle", p["beta"], p["index"])
        else:
            make_curve("circle_radius", eps=p["index"])


def _validate_example(p):
    PotentialSpec(p["eta"], p["n"][0] if p["n"] else 1, p["beta"])
    if len(p["n"]) < 3 or any(b <= a for a, b in zip(p["n"], p["n"][1:])):
        raise ConfigError("n must be a strictly increasing list of length >= 3")
    if p["quad_nodes"] < 32 * p["n"][-1]:
        raise ConfigError(f"quad_nodes must be >= 32 * max(n) = {32 * p['n'][-1]}")


def _validate_grid(p):
    if not p["eps_min"] <= p["eps_max"] or p["grid_size"] < 1:
        raise ConfigError("need eps_min <= eps_max and grid_size >= 1")
    if p["eps_min"] <= -1 or p["truth_eps"] <= -1:
        raise ConfigError("radius offsets must be > -1")
    if p["J"] < 0 or p["gamma_loss"] <= 0:
        raise ConfigError("need J >= 0 and gamma_loss > 0")


def _validate_estimate(p):
    _validate_grid(p)
    if p["samples"] < 1:
        raise ConfigError("samples must be >= 1")


def _validate_rate(p):
    _validate_grid(p)
    if not p["n"] or any(b <= a for a, b in zip(p["n"], p["n"][1:])) or p["n"][0] < 1:
        raise ConfigError("n must be a nonempty strictly increasing list of positive sizes")
    if p["reps"] < 3:
        raise ConfigError("reps must be >= 3")


_VALIDATORS = {
    "wavelet-check": _validate_wavelet,
    "ipm": _validate_ipm,
    "fit-exponent": _experiment_spec,
    "example5": _validate_example,
    "estimate": _validate_estimate,
    "rate": _validate_rate,
}


def _cmd_wavelet_check(cfg: RunConfig) -> tuple[dict, bool]:
    p = cfg.params
    fam = build_family(p["order"], p["depth"])
    res = filter_residuals(fam.low_pass)
    results = {
        "filter": res,
        "partition_of_unity": partition_of_unity_error(fam),
        "two_scale": two_scale_error(fam),
        "gram_max": float(gram_errors(fam, p["pairs"], p["seed"]).max()),
    }
    checks = {
        "filter": max(res.values()) <= 1e-12,
        "partition_of_unity": results["partition_of_unity"] <= 4 * 2.0 ** -p["depth"],
        "two_scale": results["two_scale"] <= 1e-10,
        "gram": results["gram_max"] <= 1e-4,
    }
    results["checks"] = checks
    return results, all(checks.values())


def _cmd_ipm(cfg: RunConfig) -> tuple[dict, bool]:
    p = cfg.params
    if p["a"] is not None:
        a = DiscreteMeasure.from_csv(Path(p["a"]).read_text(encoding="utf-8"))
        b = DiscreteMeasure.from_csv(Path(p["b"]).read_text(encoding="utf-8"))
    else:
        a, b = family_pair(p["family"], p["index"], p["beta"], p["nodes"])
    order = p["order"] or default_order(max(p["gamma"]))
    fam = build_family(order)
    A = analyze_measure(a, fam, p["J"], cfg.workers)
    B = analyze_measure(b, fam, p["J"], cfg.workers)
    rows = [(g, ipm_dual(A, B, g)) for g in p["gamma"]]
    _io.write_csv(cfg.out / "rows.csv", ["gamma", "ipm"], rows)
    return {"order": order, "ipm": [{"gamma": g, "ipm": v} for g, v in rows]}, True


def _cmd_fit(cfg: RunConfig) -> tuple[dict, bool]:
    p = cfg.params
    spec = _experiment_spec(p)
    rows = run_family(spec, cfg.workers)
    _io.write_csv(cfg.out / "rows.csv", ["index", "gamma", "eta", "d_gamma", "d_eta"], rows)
    results = []
    for g, e in spec.pairs:
        sel = [r for r in rows if (r.gamma, r.eta) == (g, e)]
        pred = predicted_exponent(spec.beta, g, e)
        try:
            fit = fit_exponent(sel)
        except ValueError as exc:
            results.append({"gamma": g, "eta": e, "predicted_delta": pred,
                            "error": str(exc), "pass": False})
            continue
        ok = abs(fit.slope - pred) <= p["tolerance"] and fit.r_squared >= p["min_r2"]
        results.append({"gamma": g, "eta": e, "slope": fit.slope, "intercept": fit.intercept,
                        "r2": fit.r_squared, "predicted_delta": pred, "pass": bool(ok)})
    resolved = {"J": spec.level, "order": spec.wavelet_order}
    return {"resolved": resolved, "fits": results}, all(r["pass"] for r in results)


def _cmd_example(cfg: RunConfig) -> tuple[dict, bool]:
    p = cfg.params
    rep = example_report(p["beta"], p["eta"], p["n"], p["quad_nodes"], p["J"],
                         p["nodes"], p["order"], cfg.workers)
    _io.write_csv(cfg.out / "rows.csv",
                  ["n", "displacement", "pairing", "cost", "d_one", "d_eta"], rep.rows)
    d = rep.to_dict()
    d.pop("pass")
    return d, rep.passed


def _grid(p: dict):
    offsets = np.linspace(p["eps_min"], p["eps_max"], p["grid_size"])
    return offsets, radius_grid(offsets, p["nodes"], p["gamma_loss"], p["order"])


def _cmd_estimate(cfg: RunConfig) -> tuple[dict, bool]:
    p = cfg.params
    offsets, fam = _grid(p)
    if p["sample"] is not None:
        sample = DiscreteMeasure.from_csv(Path(p["sample"]).read_text(encoding="utf-8"),
                                          kind="empirical")
    else:
        truth = make_curve("circle_radius", eps=p["truth_eps"])
        sample = sample_iid(truth, p["samples"], np.random.SeedSequence([p["seed"]]))
    res = minimum_ipm_estimate(sample, fam, p["J"])
    _io.write_csv(cfg.out / "rows.csv", ["index", "eps", "score"],
                  [(i, float(e), s) for i, (e, s) in enumerate(zip(offsets, res.scores))])
    return {"chosen_index": res.chosen_index, "chosen_eps": float(offsets[res.chosen_index]),
            "ipm": res.ipm}, True


def _cmd_rate(cfg: RunConfig) -> tuple[dict, bool]:
    p = cfg.params
    _, fam = _grid(p)
    truth = make_curve("circle_radius", eps=p["truth_eps"])
    rows = rate_experiment(truth, fam, p["n"], p["reps"], p["seed"], p["gamma_eval"],
                           p["J"], cfg.workers)
    _io.write_csv(cfg.out / "rows.csv", ["n", "rep", "chosen_index", "ipm_loss", "ipm_eval"],
                  rows)
    summary = summarize_rates(rows)
    means = [s.mean_error for s in summary]
    inv = count_inversions(means)
    return {"per_n": [s._asdict() for s in summary], "inversions": inv}, inv <= p["inversions"]


_RUNNERS = {
    "wavelet-check": _cmd_wavelet_check,
    "ipm": _cmd_ipm,
    "fit-exponent": _cmd_fit,
    "example5": _cmd_example,
    "estimate": _cmd_estimate,
    "rate": _cmd_rate,
}


def run(config: RunConfig, stdout=None) -> int:
    """Execute ``config``; returns the exit status (0 pass, 1 fail, 2 error)."""
    stdout = sys.stdout if stdout is None else stdout
    try:
        config.out.mkdir(parents=True, exist_ok=True)
        results, ok = _RUNNERS[config.command](config)
        summary = {"config": config.provenance(), "results": results, "pass": bool(ok)}
        name = "report.json" if config.command == "example5" else "summary.json"
        _io.write_json(config.out / name, summary)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    stdout.write(_io.json_text(summary))
    return 0 if ok else 1


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_config(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
