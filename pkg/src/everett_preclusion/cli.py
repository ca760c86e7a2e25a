"""Command-line front end.

Exit codes: 0 success (a threshold that is not found is still a success),
2 invalid input, 3 computation-level failure such as a persistently
precluded Born bin.
"""

import argparse
import json
import sys

import numpy as np

from . import io
from .ensemble import FrequencyBinning, QubitPreparation, bin_weights, build_ensemble
from .errors import AllPrecludedPersistent, PreclusionError
from .learning import Lineage, predict_surprise, run_lineages, train_device
from .rules import POSITIVE, ZERO, PreclusionRule, exists, survives_mask
from .threshold import DEFAULT_WINDOW, born_bins, find_nb, survivor_report, sweep_nb
from .weights import Projector, StateVector, weight

EXIT_OK, EXIT_INVALID, EXIT_COMPUTE = 0, 2, 3

# defaults applied beneath the JSON config file and the command line
DEFAULTS = {
    "weight": {"format": "json"},
    "bins": {"format": "csv", "bins": 10, "counts": False},
    "survivors": {"format": "json", "bins": 10},
    "nb": {"format": "json", "bins": 10, "n_max": 10_000, "window": DEFAULT_WINDOW, "method": "auto", "jobs": 1},
    "sweep": {"format": "csv", "bins": 10, "n_max": 10_000, "window": DEFAULT_WINDOW, "method": "auto", "jobs": 1},
    "learn": {"format": "csv", "bins": 10, "generations": 100, "jobs": 1},
}

_STATE_KEYS = ("c1_re", "c1_im", "c2_re", "c2_im")
# parameters that cannot change results stay out of the echoed config
_NOT_ECHOED = ("jobs",)


class ConfigError(ValueError):
    pass


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of parameters; command-line flags take precedence")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--rule", choices=(ZERO, POSITIVE))
    common.add_argument("--eps", type=float, help="positive-preclusion threshold")
    common.add_argument("--log10-eps", type=float, help="threshold given as log10, for tiny values")

    prep = argparse.ArgumentParser(add_help=False)
    prep.add_argument("--p", type=float, help="Born weight |c1|^2 of outcome 1")
    for key in _STATE_KEYS:
        prep.add_argument("--" + key.replace("_", "-"), type=float)
    prep.add_argument("--bins", type=int, help="number of equal-width frequency bins")

    scan = argparse.ArgumentParser(add_help=False)
    scan.add_argument("--n-max", type=int)
    scan.add_argument("--window", type=int, help="stability window")
    scan.add_argument("--method", choices=("auto", "linear", "bisect"))
    scan.add_argument("--jobs", type=int, help="worker threads; output is identical for any value")

    ap = argparse.ArgumentParser(prog="everett-preclusion", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("weight", parents=[common], help="weight <psi|P|psi> and its existence verdict")
    p.add_argument("--input", help='JSON {"dim", "state", "projector"}')

    p = sub.add_parser("bins", parents=[common, prep], help="binned branch weights for n measurements")
    p.add_argument("--n", type=int)
    p.add_argument("--counts", action="store_const", const=True, help="per-count table instead of bins")

    p = sub.add_parser("survivors", parents=[common, prep], help="surviving bins at n measurements")
    p.add_argument("--n", type=int)

    sub.add_parser("nb", parents=[common, prep, scan], help="locate the threshold N_B")

    p = sub.add_parser("sweep", parents=[common, prep, scan], help="N_B for a list of thresholds")
    p.add_argument("--eps-list", help="comma-separated thresholds")

    p = sub.add_parser("learn", parents=[common, prep], help="trained devices, surprise, lineages")
    p.add_argument("--mode", choices=("train", "surprise", "lineages"))
    p.add_argument("--n", type=int, help="training size (train mode)")
    p.add_argument("--n-prime", type=int, help="follow-up experiment size (surprise mode)")
    p.add_argument("--p-hat", type=float, help="device expectation (surprise mode)")
    p.add_argument("--lineage", action="append", help="P_HAT:TOLERANCE:BATCH_SIZE, repeatable (lineages mode)")
    p.add_argument("--generations", type=int)
    p.add_argument("--jobs", type=int)
    return ap


def _effective_config(args):
    cfg = dict(DEFAULTS[args.command])
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg.update({k.replace("-", "_"): v for k, v in loaded.items()})
    for key, value in vars(args).items():
        if key not in ("command", "config") and value is not None:
            cfg[key] = value
    cfg.pop("out", None)
    return {"command": args.command, **dict(sorted(cfg.items()))}


def _echo(cfg):
    return {k: v for k, v in cfg.items() if k not in _NOT_ECHOED}


def _require(cfg, *keys):
    for key in keys:
        if cfg.get(key) is None:
            raise ConfigError(f"missing required parameter --{key.replace('_', '-')}")


def _positive_int(cfg, key, minimum=1):
    _require(cfg, key)
    v = cfg[key]
    if isinstance(v, bool) or int(v) != v or v < minimum:
        raise ConfigError(f"--{key.replace('_', '-')} must be an integer >= {minimum}, got {v!r}")
    return int(v)


def _rule(cfg, force_positive=False):
    eps, log10 = cfg.get("eps"), cfg.get("log10_eps")
    kind = cfg.get("rule") or (POSITIVE if (eps is not None or log10 is not None or force_positive) else ZERO)
    if force_positive and kind != POSITIVE:
        raise ConfigError("this command needs --rule positive")
    if kind == ZERO:
        if eps is not None or log10 is not None:
            raise ConfigError("--eps/--log10-eps given with --rule zero")
        return PreclusionRule.zero()
    if (eps is None) == (log10 is None):
        raise ConfigError("positive rule needs exactly one of --eps or --log10-eps")
    return PreclusionRule.positive(eps) if eps is not None else PreclusionRule.positive_log10(log10)


def _prep(cfg):
    has_amps = any(cfg.get(k) is not None for k in _STATE_KEYS)
    if has_amps and cfg.get("p") is not None:
        raise ConfigError("give either --p or the amplitudes --c1-*/--c2-*, not both")
    if has_amps:
        c1 = complex(cfg.get("c1_re") or 0.0, cfg.get("c1_im") or 0.0)
        c2 = complex(cfg.get("c2_re") or 0.0, cfg.get("c2_im") or 0.0)
        return QubitPreparation(c1, c2)
    _require(cfg, "p")
    return QubitPreparation.from_p(cfg["p"])


def _binning(cfg):
    return FrequencyBinning(_positive_int(cfg, "bins"))


def cmd_weight(cfg):
    data = dict(cfg)
    if cfg.get("input"):
        try:
            with open(cfg["input"]) as fh:
                data.update(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read input {cfg['input']}: {exc}") from exc
    _require(data, "state", "projector")
    try:
        amps = [io.parse_complex(a) for a in data["state"]]
        mat = [[io.parse_complex(a) for a in row] for row in data["projector"]]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed state/projector entries: {exc}") from exc
    state, event = StateVector(amps), Projector(mat)
    dim = data.get("dim")
    if dim is not None and (dim != state.dim or dim != event.dim):
        raise ConfigError(f"dim = {dim} does not match state ({state.dim}) and projector ({event.dim})")
    rule = _rule(cfg)
    w = weight(state, event)
    v = exists(w, rule)
    row = {"weight": w, "log_weight": v.log_weight, "exists": v.exists, "near_zero": v.near_zero}
    if cfg["format"] == "csv":
        return io.csv_text("weight", _echo(cfg), list(row), [list(row.values())])
    return io.json_text(_echo(cfg), {"rule": rule.describe(), **row})


def _bin_rows(prep, n, binning, rule):
    binned = bin_weights(build_ensemble(prep, n), binning)
    lw = np.array([v for _, v in binned])
    alive = survives_mask(lw, rule)
    mids = binning.midpoints
    return [(j, mids[j], lw[j], np.exp(lw[j]), alive[j]) for j in range(binning.m)]


def cmd_bins(cfg):
    prep, n, rule = _prep(cfg), _positive_int(cfg, "n"), _rule(cfg)
    if cfg.get("counts"):
        ens = build_ensemble(prep, n)
        alive = survives_mask(ens.log_weights, rule)
        cols = ["k", "frequency", "log_weight", "weight", "survives"]
        rows = [(k, ens.frequencies[k], ens.log_weights[k], ens.weights[k], alive[k]) for k in range(n + 1)]
    else:
        cols = ["bin_index", "midpoint", "log_weight", "weight", "survives"]
        rows = _bin_rows(prep, n, _binning(cfg), rule)
    if cfg["format"] == "csv":
        return io.csv_text("bins", _echo(cfg), cols, rows)
    return io.json_text(_echo(cfg), {"rows": [dict(zip(cols, r)) for r in rows]})


def cmd_survivors(cfg):
    prep, n, binning, rule = _prep(cfg), _positive_int(cfg, "n"), _binning(cfg), _rule(cfg)
    rep = survivor_report(prep, n, binning, rule)
    summary = {
        "n": rep.n,
        "surviving_bins": rep.surviving_bins,
        "survivor_count": len(rep.surviving_bins),
        "born_bins": rep.born_bin_indices,
        "is_theorem_state": rep.is_theorem_state,
    }
    if cfg["format"] == "csv":
        cols = ["bin_index", "midpoint", "log_weight", "weight", "survives"]
        return io.csv_text("survivors", _echo(cfg), cols, _bin_rows(prep, n, binning, rule), notes=summary)
    return io.json_text(_echo(cfg), summary)


def _scan_args(cfg):
    return (
        _positive_int(cfg, "n_max"),
        _positive_int(cfg, "window", minimum=0),
        cfg["method"],
        _positive_int(cfg, "jobs"),
    )


def _nb_summary(result):
    return {
        "status": result.status,
        "n_b": result.n_b,
        "window": result.stability_window,
        "born_bins": result.born_bins,
        "flags": list(result.flags),
        "scanned": len(result.scan_log),
    }


def cmd_nb(cfg):
    prep, binning, rule = _prep(cfg), _binning(cfg), _rule(cfg, force_positive=True)
    n_max, window, method, jobs = _scan_args(cfg)
    try:
        result = find_nb(prep, binning, rule, n_max, window, method=method, jobs=jobs)
    except AllPrecludedPersistent as exc:
        exc.payload = io.json_text(_echo(cfg), {**_nb_summary(exc.result), "status": "all_precluded_persistent"})
        raise
    summary = _nb_summary(result)
    if cfg["format"] == "json":
        return io.json_text(_echo(cfg), summary)
    mids = binning.midpoints
    rows = []
    alive = result.scan_log_weights > rule.log_eps
    for i, entry in enumerate(result.scan_log):
        for j in range(binning.m):
            rows.append((entry.n, j, mids[j], result.scan_log_weights[i, j], alive[i, j]))
    cols = ["n", "bin_index", "bin_midpoint", "log_weight", "survives"]
    return io.csv_text("nb", _echo(cfg), cols, rows, notes=summary)


def cmd_sweep(cfg):
    prep, binning = _prep(cfg), _binning(cfg)
    _require(cfg, "eps_list")
    raw = cfg["eps_list"]
    try:
        eps_list = [float(e) for e in (raw.split(",") if isinstance(raw, str) else raw)]
    except ValueError as exc:
        raise ConfigError(f"bad --eps-list: {exc}") from exc
    for e in eps_list:
        if not 0.0 < e < 1.0:
            raise ConfigError(f"every eps must satisfy 0 < eps < 1, got {e!r}")
    n_max, window, method, jobs = _scan_args(cfg)
    rows = sweep_nb(prep, binning, eps_list, n_max, window, method=method, jobs=jobs)
    cols = ["eps", "n_b", "status", "flags", "error"]
    table = [(r.eps_p, r.n_b, r.status, ";".join(r.flags), r.error) for r in rows]
    if cfg["format"] == "csv":
        return io.csv_text("sweep", _echo(cfg), cols, table, notes={"born_bins": born_bins(prep.p, binning)})
    return io.json_text(_echo(cfg), {"rows": [dict(zip(cols, r)) for r in table]})


def _parse_lineages(cfg):
    _require(cfg, "lineage")
    specs = cfg["lineage"]
    out = []
    for item in specs if isinstance(specs, list) else [specs]:
        try:
            if isinstance(item, dict):
                fields = item["p_hat"], item["tolerance"], item["batch_size"]
            else:
                fields = str(item).split(":")
            p_hat, tol, size = float(fields[0]), float(fields[1]), int(fields[2])
        except (KeyError, IndexError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad lineage {item!r}; expected P_HAT:TOLERANCE:BATCH_SIZE") from exc
        out.append(Lineage(p_hat, tol, size))
    return out


def cmd_learn(cfg):
    _require(cfg, "mode")
    mode, prep, rule = cfg["mode"], _prep(cfg), _rule(cfg)
    if mode == "train":
        binning = _binning(cfg)
        devices = train_device(prep, _positive_int(cfg, "n"), binning, rule)
        cols = ["device", "bin_index", "p_hat", "n_train"]
        rows = [(i, d.bin_index, d.p_hat, d.n_train) for i, d in enumerate(devices)]
        notes = {"surviving_copies": devices[0].surviving_copies}
    elif mode == "surprise":
        _require(cfg, "p_hat")
        dist = predict_surprise(cfg["p_hat"], prep, _positive_int(cfg, "n_prime"), rule)
        cols = ["k", "observed_frequency", "log_weight", "weight", "surprise"]
        rows = [(e.k, e.observed_frequency, e.log_weight, np.exp(e.log_weight), e.surprise) for e in dist.entries]
        notes = {"weighted_mean_surprise": dist.weighted_mean_surprise, "precluded_mass": dist.precluded_mass}
    elif mode == "lineages":
        outcomes = run_lineages(prep, _parse_lineages(cfg), _positive_int(cfg, "generations"), rule,
                                jobs=_positive_int(cfg, "jobs"))
        cols = ["lineage_id", "p_hat", "generation", "log_weight", "precluded"]
        rows = []
        for i, o in enumerate(outcomes):
            for g, lw in enumerate(o.log_weight_trace, start=1):
                dead = o.generation_precluded is not None and g >= o.generation_precluded
                rows.append((i, o.lineage.p_hat, g, lw, dead))
        notes = {
            "generation_precluded": [o.generation_precluded for o in outcomes],
            "log_mass_per_generation": [o.log_mass_per_generation for o in outcomes],
        }
    else:
        raise ConfigError(f"unknown mode {mode!r}")
    if cfg["format"] == "csv":
        return io.csv_text("learn", _echo(cfg), cols, rows, notes=notes)
    return io.json_text(_echo(cfg), {**notes, "rows": [dict(zip(cols, r)) for r in rows]})


COMMANDS = {
    "weight": cmd_weight,
    "bins": cmd_bins,
    "survivors": cmd_survivors,
    "nb": cmd_nb,
    "sweep": cmd_sweep,
    "learn": cmd_learn,
}


def _emit(text, path):
    if path:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        cfg = _effective_config(args)
        text = COMMANDS[args.command](cfg)
    except PreclusionError as exc:
        payload = getattr(exc, "payload", None)
        if payload:
            _emit(payload, args.out)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _emit(text, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
