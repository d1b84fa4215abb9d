"""Command-line interface.

Subcommands: single-shot, sweep, wigner, trajectories, match, oracle,
bounds.  Output is CSV (comma-separated, header row, 17 significant digits)
or JSON mirroring the same rows; ``--plot`` additionally renders a figure
next to the delimited output.  Exit codes: 0 ok, 1 runtime failure,
2 configuration error.  The CLICKQI_OUTDIR environment variable supplies a
default directory for bare output filenames.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys

import numpy as np

from . import fock, illumination, plotting, sequential
from .conditioning import TMSV, DegenerateHeraldingError, herald_click, herald_no_click, wigner_mixture
from .config import ConfigError, RunConfig, merge_config, parse_config_file, require
from .detection import DetectorModel
from .gaussian import wigner
from .illumination import Scenario, ShotLikelihoods

OUTDIR_ENV = "CLICKQI_OUTDIR"


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _resolve_output(path: str | None) -> str | None:
    if path is None:
        return None
    outdir = os.environ.get(OUTDIR_ENV)
    if outdir and not os.path.isabs(path) and os.sep not in path:
        return os.path.join(outdir, path)
    return path


def _config_dict(cfg: RunConfig) -> dict:
    return {k: v for k, v in dataclasses.asdict(cfg).items() if v is not None}


def _emit(cfg: RunConfig, columns, rows) -> str | None:
    """Write rows as CSV or JSON to the configured output (or stdout)."""
    path = _resolve_output(cfg.output)
    if cfg.format == "json":
        payload = {
            "config": _config_dict(cfg),
            "columns": list(columns),
            "rows": [list(row) for row in rows],
        }
        text = json.dumps(payload, indent=2, allow_nan=True)
    elif cfg.format == "csv":
        lines = [",".join(columns)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    else:
        raise ConfigError(f"unknown output format {cfg.format!r}")
    if path is None:
        sys.stdout.write(text)
        return None
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(f"wrote {path}")
    return path


def _figure_path(cfg: RunConfig, default_name: str) -> str:
    path = _resolve_output(cfg.output)
    if path is None:
        path = _resolve_output(default_name) or default_name
    base, _ = os.path.splitext(path)
    return base + ".png"


def _scenario(cfg: RunConfig, probe: str | None = None, need_nbar: bool = True) -> Scenario:
    require(cfg, "kappa", "nbar_b")
    if need_nbar:
        require(cfg, "nbar")
    return Scenario(
        nbar=cfg.nbar if cfg.nbar is not None else 0.0,
        kappa=cfg.kappa,
        nbar_b=cfg.nbar_b,
        signal_det=DetectorModel(cfg.eta, cfg.nbar_d),
        idler_det=DetectorModel(cfg.eta_i, cfg.nbar_d_i),
        probe_kind=probe or cfg.probe,
        intercept_eta=cfg.intercept_eta,
    )


def _nbar_grid(cfg: RunConfig) -> np.ndarray:
    nbar_min, nbar_max, points = require(cfg, "nbar_min", "nbar_max", "points")
    if points < 2:
        raise ConfigError("config field 'points': sweeps need at least 2 points")
    if nbar_max <= nbar_min:
        raise ConfigError("config field 'nbar_max': must exceed nbar_min")
    if cfg.scale == "log":
        if nbar_min <= 0:
            raise ConfigError("config field 'nbar_min': log scale needs nbar_min > 0")
        return np.geomspace(nbar_min, nbar_max, points)
    if cfg.scale == "linear":
        return np.linspace(nbar_min, nbar_max, points)
    raise ConfigError(f"config field 'scale': unknown scale {cfg.scale!r}")


# ---------------------------------------------------------------- commands


def cmd_single_shot(cfg: RunConfig) -> int:
    base = _scenario(cfg, probe="tmsv")
    p0 = illumination.p_click_h0(base)
    matched = dataclasses.replace(base, probe_kind="tmsv_matched")
    coh = dataclasses.replace(base, probe_kind="coherent")

    def _vst(sc):
        try:
            return illumination.p_click_h1_vst(sc)
        except DegenerateHeraldingError as exc:
            print(f"warning: {sc.probe_kind}: {exc}", file=sys.stderr)
            return float("nan")

    n_nc = illumination.herald_no_click_prob(base)
    p_pnst = illumination.p_click_h1_pnst(base)
    p_vst = _vst(base)
    entries = [
        ("coherent", illumination.p_click_h1_coherent(coh), float("nan")),
        ("pnst", p_pnst, n_nc),
        ("vst", p_vst, 1.0 - n_nc),
        ("vst_matched", _vst(matched),
         1.0 - illumination.herald_no_click_prob(matched)),
        ("tmsv_weighted", n_nc * p_pnst + (1 - n_nc) * p_vst, float("nan")),
    ]
    rows = []
    for label, p1, branch_prob in entries:
        if math.isnan(p1):
            rows.append([label, p0, p1, float("nan"), float("nan"),
                         float("nan"), branch_prob])
            continue
        lik = ShotLikelihoods(p0, p1, label)
        rows.append([
            label, p0, p1,
            illumination.posterior_update(0.5, lik, True),
            illumination.posterior_update(0.5, lik, False),
            0.5 * (1 - p1) + 0.5 * p0,
            branch_prob,
        ])
    columns = ["probe", "p_h0", "p_h1", "posterior_click", "posterior_no_click",
               "single_shot_error", "branch_prob"]
    _emit(cfg, columns, rows)
    return 0


_SWEEP_COLUMNS = [
    "nbar", "p_h0", "p_h1_coherent", "p_h1_pnst", "p_h1_vst", "p_h1_vst_matched",
    "posterior_click_coherent", "posterior_click_vst", "posterior_click_matched",
    "err_click_vst",
]
_BOUNDS_COLUMNS = ["helstrom_coherent", "chernoff_coherent"]


def _bounds_at(nbar: float, kappa: float, nbar_b: float, dim: int | None):
    """(helstrom, chernoff) for coherent-vs-background; NaN row on truncation failure."""
    try:
        need = max(fock.required_dim(nbar_b / (1.0 - kappa)),
                   fock.required_dim(nbar))
        use = dim if dim is not None else need
        if use < need:
            raise fock.TruncationError(
                f"dim {use} below required {need}", required=need)
        rho0 = fock.fock_thermal(nbar_b, use)
        rho1 = fock.fock_loss_channel(fock.fock_coherent(nbar, use), kappa, nbar_b)
        return fock.helstrom_error(rho0, rho1), fock.chernoff_bound(rho0, rho1)
    except fock.TruncationError as exc:
        print(f"warning: bounds at nbar={nbar:g} skipped: {exc}", file=sys.stderr)
        return float("nan"), float("nan")


def cmd_sweep(cfg: RunConfig) -> int:
    grid = _nbar_grid(cfg)
    require(cfg, "kappa", "nbar_b")
    columns = list(_SWEEP_COLUMNS) + (_BOUNDS_COLUMNS if cfg.bounds else [])
    rows = []
    for nbar in grid:
        sub = dataclasses.replace(cfg, nbar=float(nbar))
        tm = _scenario(sub, probe="tmsv")
        mt = dataclasses.replace(tm, probe_kind="tmsv_matched")
        ch = dataclasses.replace(tm, probe_kind="coherent")
        p0 = illumination.p_click_h0(tm)
        p1c = illumination.p_click_h1_coherent(ch)
        p1p = illumination.p_click_h1_pnst(tm)
        try:
            p1v = illumination.p_click_h1_vst(tm)
            p1m = illumination.p_click_h1_vst(mt)
        except DegenerateHeraldingError:
            p1v = p1m = float("nan")
        def _post(p1):
            if math.isnan(p1):
                return float("nan")
            return illumination.posterior_update(
                0.5, ShotLikelihoods(p0, p1, "x"), True)
        err_vst = 0.5 * (1 - p1v) + 0.5 * p0 if not math.isnan(p1v) else float("nan")
        row = [float(nbar), p0, p1c, p1p, p1v, p1m,
               _post(p1c), _post(p1v), _post(p1m), err_vst]
        if cfg.bounds:
            row += list(_bounds_at(float(nbar), cfg.kappa, cfg.nbar_b, cfg.dim))
        rows.append(row)
    out = _emit(cfg, columns, rows)
    if cfg.plot:
        fig = _figure_path(cfg, "sweep.csv")
        plotting.plot_sweep(rows, columns, fig)
        print(f"wrote {fig}")
    return 0


def cmd_wigner(cfg: RunConfig) -> int:
    require(cfg, "nbar")
    if cfg.x_points < 2:
        raise ConfigError("config field 'x_points': need at least 2 grid points")
    etas = [cfg.eta_i]
    if cfg.eta_i_list:
        try:
            etas = [float(tok) for tok in cfg.eta_i_list.split(",") if tok.strip()]
        except ValueError as exc:
            raise ConfigError(f"config field 'eta_i_list': {exc}") from exc
    xs = np.linspace(cfg.x_min, cfg.x_max, cfg.x_points)
    columns = ["eta_i", "x", "w_pnst", "w_vst"]
    rows = []
    for eta_i in etas:
        det = DetectorModel(eta_i, cfg.nbar_d_i)
        tmsv = TMSV(cfg.nbar)
        pnst, _ = herald_no_click(tmsv, det)
        try:
            vst, _ = herald_click(tmsv, det)
        except DegenerateHeraldingError as exc:
            print(f"warning: eta_i={eta_i:g}: {exc}", file=sys.stderr)
            vst = None
        for x in xs:
            point = np.array([x, 0.0])
            w_p = wigner(pnst, point)
            w_v = wigner_mixture(vst, point) if vst is not None else float("nan")
            rows.append([eta_i, float(x), w_p, w_v])
    _emit(cfg, columns, rows)
    if cfg.plot:
        fig = _figure_path(cfg, "wigner.csv")
        plotting.plot_wigner(rows, columns, fig)
        print(f"wrote {fig}")
    return 0


def cmd_trajectories(cfg: RunConfig) -> int:
    shots, = require(cfg, "shots")
    kinds = ["coherent", "tmsv", "tmsv_matched"] if cfg.probe == "all" else [cfg.probe]
    configs = []
    for kind in kinds:
        sc = _scenario(cfg, probe=kind)
        configs.append(sequential.TrajectoryConfig(
            scenario=sc, shots=shots, trials=cfg.trials,
            ground_truth=cfg.ground_truth, seed=cfg.seed,
            threshold=cfg.threshold, count_heralded_only=cfg.heralded_only,
        ))
    summaries = sequential.paired_comparison(configs, workers=cfg.workers)

    stride = configs[0].stride
    columns = ["shot"] + [f"mean_posterior_{k}" for k in kinds]
    n_rows = summaries[0].mean_posterior.size
    rows = []
    for i in range(n_rows):
        rows.append([i * stride] + [float(s.mean_posterior[i]) for s in summaries])
    _emit(cfg, columns, rows)

    per_trial = _resolve_output(cfg.per_trial)
    if per_trial:
        lines = [",".join(["trial"] + [f"first_passage_{k}" for k in kinds])]
        for t in range(cfg.trials):
            lines.append(",".join([str(t)] + [str(int(s.first_passage[t]))
                                              for s in summaries]))
        with open(per_trial, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"wrote {per_trial}")

    for kind, summary in zip(kinds, summaries):
        cross = sequential.crossing_shot(summary.mean_posterior, cfg.threshold,
                                         above=cfg.ground_truth == "present")
        shown = cross * stride if cross is not None else None
        print(f"{kind}: mean posterior crosses {cfg.threshold:g} at shot {shown}")
    if cfg.plot:
        fig = _figure_path(cfg, "trajectories.csv")
        plotting.plot_trajectories(
            {k: s.mean_posterior for k, s in zip(kinds, summaries)},
            cfg.threshold, fig, stride=stride)
        print(f"wrote {fig}")
    return 0


def cmd_match(cfg: RunConfig) -> int:
    nbar, = require(cfg, "nbar")
    eta = cfg.intercept_eta if cfg.intercept_eta is not None else cfg.eta
    matched = illumination.match_click_probability(nbar, eta)
    print(_fmt(matched))
    return 0


def cmd_oracle(cfg: RunConfig) -> int:
    scenario = _scenario(cfg, probe=cfg.probe if cfg.probe != "all" else "tmsv")
    report = fock.validate_scenario(scenario, dim=cfg.dim)
    payload = {"config": _config_dict(cfg), "report": report.to_dict()}
    path = _resolve_output(cfg.output)
    text = json.dumps(payload, indent=2)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {path}")
    else:
        print(text)
    if report.passed:
        print(f"PASS, max deviation {report.max_abs_deviation:.3g} < {report.tolerance:g}")
        return 0
    print(f"FAIL: {report.failure or f'max deviation {report.max_abs_deviation:.3g}'}")
    return 1


def cmd_bounds(cfg: RunConfig) -> int:
    grid = _nbar_grid(cfg)
    require(cfg, "kappa", "nbar_b")
    columns = ["nbar", "err_click_vst", "err_click_weighted",
               "helstrom_coherent", "chernoff_coherent"]
    rows = []
    for nbar in grid:
        sub = dataclasses.replace(cfg, nbar=float(nbar))
        try:
            tm = _scenario(sub, probe="tmsv")
            err_vst = illumination.single_shot_error(tm, branch="vst")
            err_w = illumination.single_shot_error(tm, branch="weighted")
        except DegenerateHeraldingError:
            err_vst = err_w = float("nan")
        hel, cher = _bounds_at(float(nbar), cfg.kappa, cfg.nbar_b, cfg.dim)
        rows.append([float(nbar), err_vst, err_w, hel, cher])
    _emit(cfg, columns, rows)
    if cfg.plot:
        fig = _figure_path(cfg, "bounds.csv")
        plotting.plot_bounds(rows, columns, fig)
        print(f"wrote {fig}")
    return 0


# ---------------------------------------------------------------- parsing

_COMMANDS = {
    "single-shot": cmd_single_shot,
    "sweep": cmd_sweep,
    "wigner": cmd_wigner,
    "trajectories": cmd_trajectories,
    "match": cmd_match,
    "oracle": cmd_oracle,
    "bounds": cmd_bounds,
}


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--output", help="output file (CSV/JSON); stdout if omitted")
    p.add_argument("--format", choices=("csv", "json"), dest="format")
    p.add_argument("--plot", action="store_const", const=True, default=None,
                   help="render a figure next to the output")
    for name in ("nbar", "kappa", "nbar-b", "eta", "nbar-d", "eta-i", "nbar-d-i",
                 "intercept-eta"):
        p.add_argument(f"--{name}", type=float, dest=name.replace("-", "_"))
    p.add_argument("--probe", choices=("coherent", "tmsv", "tmsv_matched", "all"))
    p.add_argument("--dim", type=int, help="Fock truncation override")


def _add_sweep_args(p):
    p.add_argument("--nbar-min", type=float, dest="nbar_min")
    p.add_argument("--nbar-max", type=float, dest="nbar_max")
    p.add_argument("--points", type=int)
    p.add_argument("--scale", choices=("linear", "log"))
    p.add_argument("--bounds", action="store_const", const=True, default=None,
                   help="add Helstrom/Chernoff columns")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clickqi",
        description="Quantum illumination with Geiger-mode click detection.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in [
        ("single-shot", "single-shot probabilities, posteriors and errors"),
        ("sweep", "click probabilities and posteriors over an nbar grid"),
        ("wigner", "Wigner-function slices of the heralded states"),
        ("trajectories", "Monte-Carlo sequential detection ensembles"),
        ("match", "click-probability-matched TMSV brightness"),
        ("oracle", "validate closed forms against the Fock-basis oracle"),
        ("bounds", "click error vs Helstrom/Chernoff bounds over nbar"),
    ]:
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name in ("sweep", "bounds"):
            _add_sweep_args(p)
        if name == "trajectories":
            p.add_argument("--shots", type=int)
            p.add_argument("--trials", type=int)
            p.add_argument("--seed", type=int)
            p.add_argument("--threshold", type=float)
            p.add_argument("--ground-truth", choices=("present", "absent"),
                           dest="ground_truth")
            p.add_argument("--heralded-only", action="store_const", const=True,
                           default=None, dest="heralded_only",
                           help="count only successfully heralded shots")
            p.add_argument("--workers", type=int)
            p.add_argument("--per-trial", dest="per_trial",
                           help="per-trial first-passage CSV")
        if name == "wigner":
            p.add_argument("--x-min", type=float, dest="x_min")
            p.add_argument("--x-max", type=float, dest="x_max")
            p.add_argument("--x-points", type=int, dest="x_points")
            p.add_argument("--eta-i-list", dest="eta_i_list",
                           help="comma-separated idler efficiencies")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    flag_values = {k: v for k, v in vars(args).items()
                   if k not in ("command", "config")}
    try:
        file_values = parse_config_file(args.config) if args.config else {}
        cfg = merge_config(file_values, flag_values)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
