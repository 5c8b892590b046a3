"""Command line front end: reproducible solves, simulations, and reports.

Every subcommand reads an optional JSON config file, applies flag overrides,
writes its artifacts (JSON/CSV/TSV) into the output directory, and drops a
`manifest.json` recording the tool version, the resolved seed, the effective
config, and a SHA-256 hash of every output file. Given the same config and
seed, outputs are byte-identical.

Exit codes: 0 success, 2 config or validation error, 3 numerical failure,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import asdict, replace

import numpy as np
import pandas as pd

from . import __version__
from .errors import NoSignChangeError, NumericalError, ValidationError
from .game import ModelParams, lambda_star, n_star, solve_regime, welfare_gap
from .network import (
    graph_from_descriptor,
    kappa_star,
    resolvent_sum,
    s_bar,
    spectral_radius,
    spectral_welfare,
    uniform_complete_family,
)
from .shocks import (
    ShockSpec,
    amplification_profile,
    effort_variance_closed_form,
    monte_carlo_variance,
)
from .synth import (
    GeneratorConfig,
    chain_table,
    county_table,
    generate,
    read_csv,
    summarize,
    write_csv,
)
from .econometrics import (
    bootstrap_supf,
    break_search,
    derive_columns,
    deterioration_regression,
    spillover_regression,
    variance_by_threshold,
)

_ENV_SEED = "NETMON_SEED"

_PARAM_DEFAULTS = {
    "phi": 1.0,
    "k_d": 1.0,
    "k_c": 2.0,
    "lambda_d": 0.0,
    "lambda_c": 0.2,
    "n": 2,
    "cost_mode": "global",
}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, float) and math.isnan(obj):
        return None
    return obj


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        try:
            config = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config file {path!r} is not valid JSON: {exc}")
    if not isinstance(config, dict):
        raise ValidationError(f"config file {path!r} must hold a JSON object")
    return config


def _resolve_seed(ns: argparse.Namespace, config: dict) -> int:
    if ns.seed is not None:
        return ns.seed
    if "seed" in config:
        return int(config["seed"])
    env = os.environ.get(_ENV_SEED)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValidationError(f"{_ENV_SEED} must be an integer, got {env!r}")
    return 0


def _model_params(config: dict, ns: argparse.Namespace) -> ModelParams:
    section = dict(_PARAM_DEFAULTS)
    supplied = config.get("params", {})
    if not isinstance(supplied, dict):
        raise ValidationError("config 'params' section must be an object")
    unknown = set(supplied) - set(_PARAM_DEFAULTS)
    if unknown:
        raise ValidationError(f"unknown params fields: {sorted(unknown)}")
    section.update(supplied)
    if getattr(ns, "cost_mode", None):
        section["cost_mode"] = ns.cost_mode
    return ModelParams(
        phi=float(section["phi"]),
        k_d=float(section["k_d"]),
        k_c=float(section["k_c"]),
        lambda_d=float(section["lambda_d"]),
        lambda_c=float(section["lambda_c"]),
        n=int(section["n"]),
        cost_mode=str(section["cost_mode"]),
    )


def _out_dir(ns: argparse.Namespace) -> str:
    os.makedirs(ns.out, exist_ok=True)
    return ns.out


def _write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_manifest(
    out: str, subcommand: str, seed: int, config: dict, outputs: list[str]
) -> None:
    manifest = {
        "subcommand": subcommand,
        "version": __version__,
        "seed": seed,
        "config": _jsonable(config),
        "outputs": {name: _sha256(os.path.join(out, name)) for name in sorted(outputs)},
    }
    _write_json(os.path.join(out, "manifest.json"), manifest)


def _emit(payload: dict) -> None:
    print(json.dumps(_jsonable(payload), indent=2, sort_keys=True))


def cmd_solve(ns: argparse.Namespace, config: dict) -> int:
    params = _model_params(config, ns)
    payload = {
        "params": asdict(params),
        "decentralized": asdict(solve_regime(params, "decentralized")),
        "centralized": asdict(solve_regime(params, "centralized")),
        "welfare_gap": welfare_gap(params),
    }
    out = _out_dir(ns)
    _write_json(os.path.join(out, "solve.json"), payload)
    _write_manifest(out, "solve", _resolve_seed(ns, config), config, ["solve.json"])
    _emit(payload)
    return 0


def cmd_threshold(ns: argparse.Namespace, config: dict) -> int:
    params = _model_params(config, ns)
    n_values = [int(v) for v in config.get("n_values", range(2, 51))]
    curve = []
    for n in n_values:
        try:
            lam = lambda_star(replace(params, n=n))
        except NoSignChangeError:
            lam = None
        curve.append({"n": n, "lambda_star": lam})
    classification = n_star(params)
    payload = {
        "params": asdict(params),
        "lambda_star_curve": curve,
        "n_star": asdict(classification),
    }
    out = _out_dir(ns)
    _write_json(os.path.join(out, "threshold.json"), payload)
    lines = ["n\tlambda_star"]
    for row in curve:
        lam = row["lambda_star"]
        lines.append(f"{row['n']}\t{'nan' if lam is None else format(lam, '.12g')}")
    _write_text(os.path.join(out, "threshold_curve.tsv"), "\n".join(lines) + "\n")
    _write_manifest(
        out,
        "threshold",
        _resolve_seed(ns, config),
        config,
        ["threshold.json", "threshold_curve.tsv"],
    )
    _emit(payload)
    return 0


def cmd_spectral(ns: argparse.Namespace, config: dict) -> int:
    descriptor = config.get("graph")
    if descriptor is None:
        raise ValidationError("config must provide a graph descriptor under 'graph'")
    graph = graph_from_descriptor(dict(descriptor))
    params = _model_params(config, ns)
    psi = spectral_radius(graph)
    dec = spectral_welfare(graph, params.lambda_d, params.k_d, params.phi)
    cen = spectral_welfare(graph, params.lambda_c, params.k_c, params.phi)
    sbar = s_bar(dec.s_value, params.phi, params.k_c, params.k_d)
    kappa = None
    if params.lambda_c > 0 and graph.n >= 2:
        hi = (1.0 - 1e-6) / (params.lambda_c * (graph.n - 1))
        try:
            k_val, k_psi = kappa_star(
                uniform_complete_family(graph.n), params, (1e-9, hi)
            )
            kappa = {"kappa": k_val, "psi": k_psi}
        except (NoSignChangeError, NumericalError):
            kappa = None
    payload = {
        "graph": _jsonable(dict(descriptor)),
        "params": asdict(params),
        "psi": psi,
        "decentralized": asdict(dec),
        "centralized": asdict(cen),
        "s_bar": sbar,
        "kappa_star": kappa,
    }
    out = _out_dir(ns)
    _write_json(os.path.join(out, "spectral.json"), payload)
    _write_manifest(
        out, "spectral", _resolve_seed(ns, config), config, ["spectral.json"]
    )
    _emit(payload)
    return 0


def cmd_simulate(ns: argparse.Namespace, config: dict) -> int:
    seed = _resolve_seed(ns, config)
    descriptor = dict(config.get("graph", {"kind": "mean_field", "n": 50}))
    graph = graph_from_descriptor(descriptor)
    section = dict(config.get("shocks", {}))
    lam = float(section.pop("lambda", section.pop("lam", 0.8)))
    unknown = set(section) - {
        "sigma2",
        "rho",
        "tau2",
        "gamma",
        "omega2",
        "theta_bar",
        "phi",
    }
    if unknown:
        raise ValidationError(f"unknown shocks fields: {sorted(unknown)}")
    spec = ShockSpec(graph=graph, lam=lam, **{k: float(v) for k, v in section.items()})
    mu = float(config.get("mu", 0.0))
    reps = int(config.get("reps", 20_000))
    sim = monte_carlo_variance(spec, mu, reps, seed, threads=ns.threads)
    grid = [float(v) for v in config.get("lambda_grid", np.arange(1, 20) * 0.05)]
    rule = config.get("rule", "decentralized_plugin")
    params = _model_params(config, ns) if "params" in config else None
    profile = amplification_profile(spec, grid, mu, rule=rule, params=params)
    closed_form = None
    if spec.rho == 0.0 and graph.n >= 2:
        mean_field = (np.ones((graph.n, graph.n)) - np.eye(graph.n)) / (graph.n - 1)
        if np.allclose(spec.interaction(), mean_field):
            closed_form = effort_variance_closed_form(graph.n, spec.lam, spec.sigma2)
    payload = {
        "graph": _jsonable(descriptor),
        "simulation": sim.to_dict(),
        "closed_form_variance": closed_form,
        "lambda_threshold": profile.threshold,
        "rule": rule,
    }
    out = _out_dir(ns)
    _write_json(os.path.join(out, "simulate.json"), payload)
    profile.to_tsv(os.path.join(out, "amplification.tsv"))
    _write_manifest(
        out, "simulate", seed, config, ["simulate.json", "amplification.tsv"]
    )
    _emit(payload)
    return 0


def cmd_gen(ns: argparse.Namespace, config: dict) -> int:
    seed = _resolve_seed(ns, config)
    section = dict(config.get("generator", {}))
    section["seed"] = seed
    if ns.county_cutoff is not None:
        section["county_cutoff"] = ns.county_cutoff
    if ns.chain_cutoff is not None:
        section["chain_cutoff"] = ns.chain_cutoff
    known = set(GeneratorConfig.__dataclass_fields__)
    unknown = set(section) - known
    if unknown:
        raise ValidationError(f"unknown generator fields: {sorted(unknown)}")
    if "ownership_probs" in section:
        section["ownership_probs"] = tuple(section["ownership_probs"])
    gen_config = GeneratorConfig(**section)
    panel, truth = generate(gen_config)
    out = _out_dir(ns)
    write_csv(panel, os.path.join(out, "panel.csv"))
    _write_json(os.path.join(out, "truth.json"), truth)
    _write_manifest(out, "gen", seed, config, ["panel.csv", "truth.json"])
    _emit({"out": out, "summary": summarize(panel)})
    return 0


def _coef_table(results: list[tuple[str, str, object]]) -> pd.DataFrame:
    rows = []
    for sample, outcome, res in results:
        for term, est in res.params.items():
            se = res.se[term]
            rows.append(
                {
                    "sample": sample,
                    "outcome": outcome,
                    "term": term,
                    "estimate": est,
                    "se": se,
                    "tstat": est / se if se > 0 else np.nan,
                    "nobs": res.nobs,
                    "n_clusters": res.n_clusters,
                }
            )
    return pd.DataFrame(rows)


def _break_payload(result, boot=None) -> dict:
    payload = {
        "c_hat": result.c_hat,
        "implied_size": result.implied_size,
        "f_max": result.f_max,
        "slope_below": result.slope_below,
        "slope_change": result.slope_change,
        "nobs": result.nobs,
        "window": list(result.window),
        "n_candidates": len(result.candidates),
    }
    if boot is not None:
        payload["p_value"] = boot.p_value
        payload["n_boot"] = boot.n_boot
    return payload


def _profile_tsv(result) -> str:
    lines = ["c\tF"]
    for c, f in zip(result.candidates, result.f_profile):
        lines.append(f"{c:.12g}\t{f:.12g}")
    return "\n".join(lines) + "\n"


def cmd_analyze(ns: argparse.Namespace, config: dict) -> int:
    panel_path = config.get("panel")
    if panel_path is None:
        raise ValidationError("config must provide the facility panel path under 'panel'")
    seed = _resolve_seed(ns, config)
    county_cutoff = ns.county_cutoff if ns.county_cutoff is not None else 7
    chain_cutoff = ns.chain_cutoff if ns.chain_cutoff is not None else 34
    section = config.get("analyze", {})
    outcomes = list(section.get("outcomes", ("def_total", "overall_rating")))
    n_boot = int(section.get("n_boot", 199))
    placebo_boot = int(section.get("placebo_n_boot", 0))
    window = tuple(section.get("window", (0.10, 0.90)))
    chain_window = tuple(section.get("chain_window", (0.05, 0.95)))

    panel = derive_columns(
        read_csv(panel_path), county_cutoff=county_cutoff, chain_cutoff=chain_cutoff
    )
    out = _out_dir(ns)
    outputs: list[str] = []

    def save_csv(name: str, frame: pd.DataFrame) -> None:
        frame.to_csv(os.path.join(out, name), index=False)
        outputs.append(name)

    def save_json(name: str, obj) -> None:
        _write_json(os.path.join(out, name), obj)
        outputs.append(name)

    def save_text(name: str, text: str) -> None:
        _write_text(os.path.join(out, name), text)
        outputs.append(name)

    below = panel["large_county"] == 0
    runs_full = [("full", o, spillover_regression(panel, o, peers=("county", "chain"))) for o in outcomes]
    runs_below = [
        ("below", o, spillover_regression(panel, o, peers=("county",), subset=below))
        for o in outcomes
    ]
    runs_above = [
        ("above", o, spillover_regression(panel, o, peers=("county",), subset=~below))
        for o in outcomes
    ]
    save_csv("spillover_full.csv", _coef_table(runs_full))
    save_csv("spillover_below.csv", _coef_table(runs_below))
    save_csv("spillover_above.csv", _coef_table(runs_above))

    counties = county_table(panel)
    county_break = break_search(
        counties["sff_count"].to_numpy(float),
        counties["log_size"].to_numpy(float),
        window=window,
    )
    county_boot = None
    if n_boot > 0:
        county_boot = bootstrap_supf(
            counties["sff_count"].to_numpy(float),
            counties["log_size"].to_numpy(float),
            n_boot=n_boot,
            seed=seed,
            window=window,
        )
    save_json("break_county.json", _break_payload(county_break, county_boot))
    save_text("fprofile_county.tsv", _profile_tsv(county_break))

    chains = chain_table(panel)
    chain_break = break_search(
        chains["sff_count"].to_numpy(float),
        chains["log_size"].to_numpy(float),
        window=chain_window,
    )
    chain_boot = None
    if n_boot > 0:
        chain_boot = bootstrap_supf(
            chains["sff_count"].to_numpy(float),
            chains["log_size"].to_numpy(float),
            n_boot=n_boot,
            seed=seed + 1,
            window=chain_window,
        )
    save_json("break_chain.json", _break_payload(chain_break, chain_boot))
    save_text("fprofile_chain.tsv", _profile_tsv(chain_break))

    variance = variance_by_threshold(
        panel,
        "nh_total",
        county_cutoff,
        outcomes=("def_total", "overall_rating", "staffing_rating"),
    )
    save_csv("variance_by_threshold.csv", variance)

    det = deterioration_regression(
        panel, county_cutoff=county_cutoff, chain_cutoff=chain_cutoff
    )
    save_csv("deterioration.csv", _coef_table([("full", "delta_def", det)]))

    placebo_outcomes = {}
    for share in ("share_non_profit", "share_government"):
        result = break_search(
            counties[share].to_numpy(float),
            counties["log_size"].to_numpy(float),
            window=window,
        )
        boot = None
        if placebo_boot > 0:
            boot = bootstrap_supf(
                counties[share].to_numpy(float),
                counties["log_size"].to_numpy(float),
                n_boot=placebo_boot,
                seed=seed,
                window=window,
            )
        placebo_outcomes[share] = _break_payload(result, boot)
        save_text(f"fprofile_placebo_{share}.tsv", _profile_tsv(result))
    save_json("placebo_wrong_outcome.json", placebo_outcomes)

    forcing = break_search(
        counties["sff_count"].to_numpy(float),
        counties["share_for_profit"].to_numpy(float),
        window=window,
    )
    save_json("placebo_wrong_forcing.json", _break_payload(forcing))
    save_text("fprofile_placebo_forcing.tsv", _profile_tsv(forcing))

    _write_manifest(out, "analyze", seed, config, outputs)
    _emit(
        {
            "out": out,
            "county_break": _break_payload(county_break, county_boot),
            "chain_break": _break_payload(chain_break, chain_boot),
            "outputs": sorted(outputs),
        }
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netmon",
        description="Monitoring equilibria on networks: solvers, simulation, and reports.",
    )
    parser.add_argument("--version", action="version", version=f"netmon {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="RNG seed (overrides config and env)")
    common.add_argument("--out", default=".", help="output directory (default: .)")
    common.add_argument("--threads", type=int, default=1, help="worker threads")
    common.add_argument(
        "--cost-mode",
        choices=("global", "per_unit"),
        help="centralized monitoring cost convention",
    )
    common.add_argument(
        "--county-cutoff", type=int, default=None, help="large-county size cutoff (default 7)"
    )
    common.add_argument(
        "--chain-cutoff", type=int, default=None, help="large-chain size cutoff (default 34)"
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, func, blurb in (
        ("solve", cmd_solve, "closed-form equilibrium per regime"),
        ("threshold", cmd_threshold, "centralization thresholds in lambda and n"),
        ("spectral", cmd_spectral, "network aggregates on an explicit graph"),
        ("simulate", cmd_simulate, "shock simulation and amplification profile"),
        ("gen", cmd_gen, "synthetic facility panel with ground truth"),
        ("analyze", cmd_analyze, "estimation report bundle from a facility panel"),
    ):
        p = sub.add_parser(name, parents=[common], help=blurb)
        p.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        config = _load_config(ns.config)
        return ns.func(ns, config)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 4


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
