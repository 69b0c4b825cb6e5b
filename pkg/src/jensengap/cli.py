"""Command-line interface: analytic bounds, sweeps, sampling estimates, curves.

Five subcommands share one I/O convention: data goes to ``--output`` (or
standard output), progress notes go to standard error unless ``--quiet``,
and ``--plot`` renders a figure next to the output file.  Numbers are
serialized with 17 significant digits so files round-trip exactly;
infinities appear as the strings ``inf``/``-inf`` in CSV and as ``null``
(with an explanatory entry in the record's ``flags``) in JSON.

Flag values win over the optional TOML config file (``--config``), which
wins over built-in defaults.  The default seed can also be moved with the
``JENSENGAP_SEED`` environment variable, which sits between the config
file and the built-in constant.

Exit codes: 0 on success, 1 for computation errors, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import bounds, gallery, latent, mc, pacbayes
from .benchmark import run_benchmark
from .distributions import (
    EmpiricalProvider,
    ExponentialProvider,
    GammaProvider,
    LogNormalProvider,
    MomentProvider,
    exact_log_gap,
    load_samples,
)
from .errors import ArgumentError, JensenGapError

__all__ = ["main", "DEFAULT_SEED", "SEED_ENV_VAR"]

#: Built-in default seed; every run without an explicit seed is reproducible.
DEFAULT_SEED = 101

#: Environment variable that replaces the built-in default seed.
SEED_ENV_VAR = "JENSENGAP_SEED"

ANALYTIC_HEADER = ("case", "param1", "param2", "k", "method", "lower", "upper", "exact", "struski_upper")
SWEEP_HEADER = ("case", "param1", "param2", "k", "lower", "upper", "exact", "struski_upper", "ours_wins")


# --------------------------------------------------------------------------
# serialization helpers

def format_number(value: float | None) -> str:
    """CSV cell for a float: 17 significant digits, inf/-inf/nan literals."""
    if value is None:
        return ""
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.17g}"


def _json_fragment(value, indent: int) -> str:
    pad = " " * indent
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return f"{v:.17g}" if math.isfinite(v) else "null"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        inner = ",\n".join(pad + "  " + _json_fragment(v, indent + 2) for v in value)
        return "[\n" + inner + "\n" + pad + "]"
    if isinstance(value, dict):
        if not value:
            return "{}"
        inner = ",\n".join(
            f'{pad}  {json.dumps(str(k))}: {_json_fragment(v, indent + 2)}'
            for k, v in value.items()
        )
        return "{\n" + inner + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dump_json(record) -> str:
    """JSON text with 17-significant-digit floats and null for non-finite."""
    return _json_fragment(record, 0) + "\n"


def _write_text(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def _csv_text(header: tuple[str, ...], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _progress(quiet: bool, message: str) -> None:
    if not quiet:
        print(message, file=sys.stderr)


def _plot_path(output: str | None, fallback: str) -> Path:
    if output is not None:
        return Path(output).with_suffix(".png")
    return Path(fallback)


# --------------------------------------------------------------------------
# flag parsing helpers

def parse_k_list(text: str) -> list[int]:
    """Order spec: a single value ("2"), a list ("1,2,3"), or a range ("1..4")."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..")
            values = list(range(int(lo), int(hi) + 1))
        else:
            values = [int(part) for part in text.split(",")]
    except ValueError as exc:
        raise ArgumentError(f"cannot parse order list {text!r}: {exc}") from exc
    if not values:
        raise ArgumentError(f"empty order list {text!r}")
    return values


def parse_n(text: str) -> int | None:
    if text.strip().lower() == "auto":
        return None
    try:
        return int(text)
    except ValueError as exc:
        raise ArgumentError(f"--n expects an integer or 'auto', got {text!r}") from exc


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as handle:
            config = tomllib.load(handle)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ArgumentError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(config, dict):
        raise ArgumentError(f"config file {path} must contain a table")
    return config


def _resolve(args: argparse.Namespace, config: dict, name: str, builtin):
    """flag > config file > built-in default."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in config:
        return config[name]
    return builtin


def _resolve_seed(args: argparse.Namespace, config: dict) -> int:
    value = _resolve(args, config, "seed", None)
    if value is None:
        env = os.environ.get(SEED_ENV_VAR)
        if env is not None:
            try:
                value = int(env)
            except ValueError as exc:
                raise ArgumentError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from exc
        else:
            value = DEFAULT_SEED
    return int(value)


# --------------------------------------------------------------------------
# distribution/sampler construction

def _require(args: argparse.Namespace, flag: str, context: str) -> float:
    value = getattr(args, flag.lstrip("-").replace("-", "_"), None)
    if value is None:
        raise ArgumentError(f"{context} requires {flag}")
    return float(value)


def _provider_from_args(args: argparse.Namespace) -> MomentProvider:
    dist = args.dist
    if dist == "lognormal":
        return LogNormalProvider(
            mu=float(args.mu if args.mu is not None else 0.0),
            sigma=_require(args, "--sigma", "--dist lognormal"),
        )
    if dist == "gamma":
        return GammaProvider(
            shape=_require(args, "--shape", "--dist gamma"),
            scale=float(args.scale if args.scale is not None else 1.0),
        )
    if dist == "exponential":
        return ExponentialProvider(rate=float(args.rate if args.rate is not None else 1.0))
    raise ArgumentError(f"unknown distribution {dist!r}")


def _sampler_from_args(args: argparse.Namespace) -> tuple[mc.SampleFn, float | None, str]:
    """Build (sampler, exact log E X when known, label) from mc flags."""
    chosen = [
        flag
        for flag, present in (
            ("--dist", args.dist is not None),
            ("--samples", args.samples is not None),
            ("--model-file", args.model_file is not None),
        )
        if present
    ]
    if len(chosen) != 1:
        raise ArgumentError(
            f"exactly one of --dist / --samples / --model-file is required, got {chosen or 'none'}"
        )
    if args.dist is not None:
        provider = _provider_from_args(args)
        params = {
            "lognormal": lambda: {"mu": provider.mu, "sigma": provider.sigma},
            "gamma": lambda: {"shape": provider.shape, "scale": provider.scale},
            "exponential": lambda: {"rate": provider.rate},
        }[args.dist]()
        sampler = mc.distribution_sampler(args.dist, **params)
        return sampler, math.log(provider.mean()), args.dist
    if args.samples is not None:
        values = load_samples(args.samples)
        return mc.empirical_sampler(values), None, f"samples:{args.samples}"
    model, points = _load_model_file(args.model_file)
    index = int(args.x_index)
    if not 0 <= index < len(points):
        raise ArgumentError(
            f"--x-index {index} out of range; model file has {len(points)} data points"
        )
    if args.encoder_scale is not None:
        scale = float(args.encoder_scale)
        if scale <= 0:
            raise ArgumentError(f"--encoder-scale must be positive, got {scale}")
        model = latent.LatentGaussianModel(
            weight=model.weight,
            bias=model.bias,
            noise_variance=model.noise_variance,
            encoder_weight=model.encoder_weight,
            encoder_bias=model.encoder_bias,
            encoder_variances=scale * model.encoder_variances,
        )
    sampler = latent.importance_ratio_sampler(model, points[index])
    oracle = latent.log_marginal_oracle(model, points[index])
    return sampler, oracle, f"model:{args.model_file}[{index}]"


def _load_model_file(path: str) -> tuple[latent.LatentGaussianModel, list[np.ndarray]]:
    try:
        record = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ArgumentError(f"cannot read model file {path}: {exc}") from exc
    _validate_against_schema(record, "model_file")
    return latent.model_from_json_dict(record)


def _validate_against_schema(record, schema_name: str) -> None:
    import jsonschema
    from importlib import resources

    schema_text = (
        resources.files("jensengap").joinpath("schemas").joinpath(f"{schema_name}.schema.json").read_text()
    )
    try:
        jsonschema.validate(record, json.loads(schema_text))
    except jsonschema.ValidationError as exc:
        raise ArgumentError(f"{schema_name} record invalid: {exc.message}") from exc


# --------------------------------------------------------------------------
# subcommands

def _analytic_rows(args: argparse.Namespace, k_values: list[int]) -> list[dict]:
    rows: list[dict] = []
    if args.case is not None:
        fixed = {
            "exp-exponential": gallery.exp_exponential_bounds,
            "exp-normal": gallery.exp_normal_bounds,
        }
        if args.case not in fixed:
            raise ArgumentError(f"--case must be one of {sorted(fixed)}, got {args.case!r}")
        for k in k_values:
            rep = fixed[args.case](k)
            rows.append(
                {
                    "case": args.case,
                    "param1": None,
                    "param2": None,
                    "k": k,
                    "method": rep.method,
                    "lower": rep.lower,
                    "upper": rep.upper,
                    "exact": rep.exact,
                    "struski_upper": None,
                    "flags": list(rep.flags),
                }
            )
        return rows
    if args.dist is None and args.samples is None:
        raise ArgumentError("analytic requires one of --dist, --case, or --samples")

    if args.samples is not None:
        provider: MomentProvider = EmpiricalProvider(load_samples(args.samples))
        case = "empirical-log"
        param1, param2 = float(provider.samples.size), 0.0
    else:
        provider = _provider_from_args(args)
        case = f"{args.dist}-log"
        param1, param2 = {
            "lognormal": lambda: (provider.sigma, provider.mu),
            "gamma": lambda: (provider.shape, provider.scale),
            "exponential": lambda: (provider.rate, 0.0),
        }[args.dist]()
    baseline = gallery.struski_log_upper(provider)
    exact = exact_log_gap(provider)
    for k in k_values:
        rep = bounds.log_bounds_raw(provider, k)
        rows.append(
            {
                "case": case,
                "param1": param1,
                "param2": param2,
                "k": k,
                "method": rep.method,
                "lower": rep.lower,
                "upper": rep.upper,
                "exact": exact,
                "struski_upper": baseline.upper,
                "flags": list(rep.flags),
            }
        )
    return rows


def cmd_analytic(args: argparse.Namespace, config: dict) -> int:
    k_values = parse_k_list(_resolve(args, config, "k", "2"))
    fmt = _resolve(args, config, "format", "csv")
    rows = _analytic_rows(args, k_values)
    if fmt == "json":
        text = dump_json(rows)
    elif fmt == "csv":
        cells = [
            [
                r["case"],
                format_number(r["param1"]),
                format_number(r["param2"]),
                str(r["k"]),
                r["method"],
                format_number(r["lower"]),
                format_number(r["upper"]),
                format_number(r["exact"]),
                format_number(r["struski_upper"]),
            ]
            for r in rows
        ]
        text = _csv_text(ANALYTIC_HEADER, cells)
    else:
        raise ArgumentError(f"--format must be csv or json, got {fmt!r}")
    _write_text(text, args.output)
    if args.plot:
        from .plots import save_analytic_figure

        reports = [
            bounds.BoundReport(
                method=r["method"], k=r["k"], lower=r["lower"], upper=r["upper"], exact=r["exact"]
            )
            for r in rows
        ]
        path = save_analytic_figure(reports, _plot_path(args.output, "analytic.png"))
        _progress(args.quiet, f"figure written to {path}")
    return 0


def _sweep_grid(args: argparse.Namespace) -> list[float]:
    defaults = {
        "lognormal-log": (0.05, 1.5, 0.05),
        "gamma-log": (4.0, 100.0, 2.0),
    }[args.case]
    start = float(args.grid_start) if args.grid_start is not None else defaults[0]
    stop = float(args.grid_stop) if args.grid_stop is not None else defaults[1]
    step = float(args.grid_step) if args.grid_step is not None else defaults[2]
    if step <= 0:
        raise ArgumentError(f"--grid-step must be positive, got {step}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    if count < 1:
        raise ArgumentError(f"empty parameter grid: start {start}, stop {stop}, step {step}")
    return [start + i * step for i in range(count)]


def cmd_sweep(args: argparse.Namespace, config: dict) -> int:
    k_values = parse_k_list(_resolve(args, config, "k", "2,3"))
    grid = _sweep_grid(args)
    rows = gallery.comparison_sweep(args.case, grid, k_values)
    cells = [
        [
            r.case,
            format_number(r.param1),
            format_number(r.param2),
            str(r.k),
            format_number(r.lower),
            format_number(r.upper),
            format_number(r.exact),
            format_number(r.struski_upper),
            "true" if r.ours_wins else "false",
        ]
        for r in rows
    ]
    _write_text(_csv_text(SWEEP_HEADER, cells), args.output)
    _progress(args.quiet, f"{len(rows)} sweep rows ({args.case}, k={k_values})")
    if args.plot:
        from .plots import save_sweep_figure

        path = save_sweep_figure(rows, _plot_path(args.output, "sweep.png"))
        _progress(args.quiet, f"figure written to {path}")
    return 0


def cmd_mc(args: argparse.Namespace, config: dict) -> int:
    k_values = parse_k_list(_resolve(args, config, "k", "2"))
    if len(k_values) != 1:
        raise ArgumentError(f"mc expects a single order, got {k_values}")
    sampler, reference, label = _sampler_from_args(args)
    cfg = mc.McConfig(
        n=parse_n(str(_resolve(args, config, "n", "auto"))),
        m=int(_resolve(args, config, "m", 10_000)),
        k=k_values[0],
        seed=_resolve_seed(args, config),
        target_std=float(_resolve(args, config, "target_std", 0.3)),
        m_probe=int(_resolve(args, config, "m_probe", 200)),
    )
    estimate, found = mc.estimate_with_auto_n(sampler, cfg)
    if found is not None:
        for n, std in found.probes:
            _progress(args.quiet, f"grid probe n={n}: std(log mean) = {std:.4g}")
    record = estimate.to_json_dict()
    record["source"] = label
    if reference is not None:
        record["reference_log_mean"] = reference
    _write_text(dump_json(record), args.output)
    _progress(
        args.quiet,
        f"log-mean interval [{format_number(estimate.lower)}, {format_number(estimate.upper)}] "
        f"(n={estimate.n_used}, m={estimate.m}, k={estimate.k})",
    )
    if args.plot:
        from .plots import save_mc_figure

        path = save_mc_figure(estimate, _plot_path(args.output, "mc.png"))
        _progress(args.quiet, f"figure written to {path}")
    return 0


def cmd_modelavg(args: argparse.Namespace, config: dict) -> int:
    k_values = parse_k_list(_resolve(args, config, "k", "1,2,3"))
    grid_size = int(_resolve(args, config, "grid", 101))
    if grid_size < 2:
        raise ArgumentError(f"--grid must be at least 2, got {grid_size}")
    if args.perfect:
        instance = pacbayes.PERFECT_DEFAULT
    else:
        instance = (
            int(_resolve(args, config, "trials", pacbayes.MISSPECIFIED_DEFAULT[0])),
            float(_resolve(args, config, "true_rate", pacbayes.MISSPECIFIED_DEFAULT[1])),
            float(_resolve(args, config, "theta0", pacbayes.MISSPECIFIED_DEFAULT[2])),
            float(_resolve(args, config, "theta1", pacbayes.MISSPECIFIED_DEFAULT[3])),
        )
    family = pacbayes.binomial_family(*instance)
    grid = [i / (grid_size - 1) for i in range(grid_size)]
    points = pacbayes.model_averaging_sweep(family, grid, k_values)

    header = ("rho", "ce") + tuple(f"bound_k{k}" for k in k_values)
    cells = [
        [format_number(p.rho), format_number(p.ce)]
        + [format_number(p.bound(k)) for k in k_values]
        for p in points
    ]
    _write_text(_csv_text(header, cells), args.output)

    argmins = {"ce": pacbayes.argmin_rho([p.ce for p in points], grid)}
    for k in k_values:
        argmins[f"bound_k{k}"] = pacbayes.argmin_rho([p.bound(k) for p in points], grid)
    meta = {
        "instance": {
            "trials": instance[0],
            "true_rate": instance[1],
            "theta0": instance[2],
            "theta1": instance[3],
            "perfectly_specified": bool(args.perfect),
        },
        "grid_size": grid_size,
        "k_list": k_values,
        "argmin": argmins,
    }
    if args.output is not None:
        meta_path = Path(args.output).with_suffix(Path(args.output).suffix + ".meta.json")
        meta_path.write_text(dump_json(meta))
        _progress(args.quiet, f"sidecar written to {meta_path}")
    else:
        _progress(args.quiet, f"argmins: {argmins}")
    if args.plot:
        from .plots import save_modelavg_figure

        path = save_modelavg_figure(points, _plot_path(args.output, "modelavg.png"))
        _progress(args.quiet, f"figure written to {path}")
    return 0


def cmd_benchmark(args: argparse.Namespace, config: dict) -> int:
    k_values = parse_k_list(_resolve(args, config, "k", "2"))
    if len(k_values) != 1:
        raise ArgumentError(f"benchmark expects a single order, got {k_values}")
    count = int(_resolve(args, config, "count", 100))
    cfg = mc.McConfig(
        n=parse_n(str(_resolve(args, config, "n", "auto"))),
        m=int(_resolve(args, config, "m", 10_000)),
        k=k_values[0],
        seed=0,
        target_std=float(_resolve(args, config, "target_std", 0.3)),
        m_probe=int(_resolve(args, config, "m_probe", 200)),
    )
    seed = _resolve_seed(args, config)
    reporter = None if args.quiet else lambda done, total: print(
        f"pair {done}/{total}", file=sys.stderr
    )
    result = run_benchmark(seed=seed, count=count, cfg=cfg, progress=reporter)
    _write_text(dump_json(result.to_json_dict()), args.output)
    _progress(
        args.quiet,
        f"bracket rate {result.bracket_rate:.3f}, mean width {result.mean_width:.4g}, "
        f"baseline width {result.mean_struski_width:.4g}",
    )
    if args.plot:
        from .plots import save_benchmark_figure

        path = save_benchmark_figure(
            [p.to_json_dict() for p in result.pairs], _plot_path(args.output, "benchmark.png")
        )
        _progress(args.quiet, f"figure written to {path}")
    return 0


# --------------------------------------------------------------------------
# parser assembly

def _add_common(parser: argparse.ArgumentParser, formats: bool = False) -> None:
    parser.add_argument("--output", help="output file (default: standard output)")
    parser.add_argument("--config", help="TOML file with default flag values")
    parser.add_argument("--seed", type=int, help=f"RNG seed (default {DEFAULT_SEED}; env {SEED_ENV_VAR})")
    parser.add_argument("--quiet", action="store_true", help="suppress progress lines")
    parser.add_argument("--plot", action="store_true", help="render a figure next to the output")
    if formats:
        parser.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")


def _add_dist_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dist", choices=("lognormal", "gamma", "exponential"))
    parser.add_argument("--mu", type=float, help="lognormal location (default 0)")
    parser.add_argument("--sigma", type=float, help="lognormal scale")
    parser.add_argument("--shape", type=float, help="gamma shape")
    parser.add_argument("--scale", type=float, help="gamma scale (default 1)")
    parser.add_argument("--rate", type=float, help="exponential rate (default 1)")
    parser.add_argument("--samples", help="whitespace-delimited sample file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jensengap",
        description="Bounds on the gap in Jensen's inequality: closed forms, "
        "baseline comparisons, sample-mean interval estimates, and risk curves.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="bound rows for one distribution or fixed case")
    _add_dist_flags(p)
    p.add_argument("--case", help="fixed worked example: exp-exponential or exp-normal")
    p.add_argument("--k", help="order spec: '2', '1,2,3', or '1..4' (default 2)")
    _add_common(p, formats=True)
    p.set_defaults(handler=cmd_analytic)

    p = sub.add_parser("sweep", help="comparison sweep against the baseline upper bound")
    p.add_argument("--case", required=True, choices=("lognormal-log", "gamma-log"))
    p.add_argument("--k", help="order spec (default 2,3)")
    p.add_argument("--grid-start", type=float, help="first parameter value")
    p.add_argument("--grid-stop", type=float, help="last parameter value")
    p.add_argument("--grid-step", type=float, help="grid spacing")
    _add_common(p)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("mc", help="sample-mean interval estimate of log E X")
    _add_dist_flags(p)
    p.add_argument("--model-file", help="latent-model JSON file")
    p.add_argument("--x-index", type=int, default=0, help="data point index in the model file")
    p.add_argument("--encoder-scale", type=float, help="multiply encoder variances")
    p.add_argument("--n", help="inner sample size, or 'auto' for the grid search")
    p.add_argument("--m", type=int, help="replicate count (default 10000)")
    p.add_argument("--k", help="bound order (default 2)")
    p.add_argument("--target-std", dest="target_std", type=float, help="grid search target (default 0.3)")
    p.add_argument("--m-probe", dest="m_probe", type=int, help="grid probe replicates (default 200)")
    _add_common(p)
    p.set_defaults(handler=cmd_mc)

    p = sub.add_parser("modelavg", help="risk curve and oracle bounds for a binomial pair")
    p.add_argument("--trials", type=int, help="binomial trial count")
    p.add_argument("--true-rate", dest="true_rate", type=float, help="true success rate")
    p.add_argument("--theta0", type=float, help="first model rate")
    p.add_argument("--theta1", type=float, help="second model rate")
    p.add_argument("--perfect", action="store_true", help="use the perfectly specified instance")
    p.add_argument("--k", help="order spec (default 1,2,3)")
    p.add_argument("--grid", type=int, help="mixture grid size (default 101)")
    _add_common(p)
    p.set_defaults(handler=cmd_modelavg)

    p = sub.add_parser("benchmark", help="toy-model suite scored against the exact oracle")
    p.add_argument("--count", type=int, help="number of generated pairs (default 100)")
    p.add_argument("--k", help="bound order (default 2)")
    p.add_argument("--n", help="inner sample size, or 'auto' (default auto)")
    p.add_argument("--m", type=int, help="replicate count (default 10000)")
    p.add_argument("--target-std", dest="target_std", type=float, help="grid search target")
    p.add_argument("--m-probe", dest="m_probe", type=int, help="grid probe replicates")
    _add_common(p)
    p.set_defaults(handler=cmd_benchmark)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        return args.handler(args, config)
    except ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except JensenGapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
