"""Deterministic experiment runner.

Five subcommands (ensemble, gmm-select, fnn-train, rd-sim, gen-data), each
taking flags and an optional JSON --config file. Explicit flags override file
values, which override built-in defaults. Exit codes: 0 success, 2 validation
failure (nothing written), 1 runtime failure (a FAILED marker is left next to
any partial artifacts). Every successful run that writes files also writes a
run.json manifest: resolved config, toolkit version, wall time, artifact list.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .datagen import BlobSpec, RegressionSpec, gen_blobs, gen_regression
from .fileio import read_csv, write_csv, write_json, write_pgm
from .fnn import SlfnModel, SupervisedSet, loss_regularized, train_gd, train_pil
from .mixture import Dataset, EmOptions, select_cluster_number
from .rd import (
    POTENTIALS,
    Field1D,
    RdState2D,
    StepControl,
    simulate,
    stability_bound_1d,
    stability_bound_2d,
)
from .seeding import derive_rng
from .thermo import EnsembleSpec, compute_thermodynamics

_FMT = "%.17g"


class _ValidationError(ValueError):
    """Bad inputs detected before any artifact is written."""


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            cfg = json.load(handle)
    except OSError as exc:
        raise _ValidationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _ValidationError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise _ValidationError(f"config {path} must hold a JSON object")
    return cfg


def _resolve(args, file_cfg, defaults):
    """Merge flag > config file > default, keyed by the default table."""
    out = {}
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = flag
        elif key in file_cfg:
            out[key] = file_cfg[key]
        else:
            out[key] = default
    unknown = set(file_cfg) - set(defaults)
    if unknown:
        raise _ValidationError(f"unknown config keys: {sorted(unknown)}")
    return out


def _resolve_seed(value):
    if value is not None:
        return int(value)
    env = os.environ.get("SYNLEARN_SEED")
    return int(env) if env else 0


def _parse_kv(tokens, casters, what):
    out = {}
    for token in tokens:
        if "=" not in token:
            raise _ValidationError(f"{what}: expected key=value, got {token!r}")
        key, _, val = token.partition("=")
        if key not in casters:
            raise _ValidationError(
                f"{what}: unknown key {key!r}, choose from {sorted(casters)}"
            )
        try:
            out[key] = casters[key](val)
        except ValueError as exc:
            raise _ValidationError(f"{what}: bad value for {key}: {exc}") from exc
    return out


def _parse_float_list(text):
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise _ValidationError(f"bad number list {text!r}: {exc}") from exc


def _write_manifest(out_dir, subcommand, config, artifacts, t0):
    manifest = {
        "subcommand": subcommand,
        "version": __version__,
        "config": config,
        "wall_time_s": time.perf_counter() - t0,
        "artifacts": sorted(artifacts),
    }
    write_json(manifest, os.path.join(out_dir, "run.json"))


def _write_failed(out_dir, exc):
    try:
        with open(os.path.join(out_dir, "FAILED"), "w", encoding="utf-8") as handle:
            handle.write(f"{type(exc).__name__}: {exc}\n")
    except OSError:
        pass


def _rows_csv_text(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _write_text(path, text):
    from .fileio import _atomic_write_bytes

    _atomic_write_bytes(path, text.encode("utf-8"))


# ---------------------------------------------------------------- ensemble


def _cmd_ensemble(args):
    t0 = time.perf_counter()
    file_cfg = _load_config(args.config)
    defaults = {
        "energies": None,
        "degeneracies": None,
        "beta": 1.0,
        "k_b": 1.0,
        "out_dir": None,
    }
    cfg = _resolve(args, file_cfg, defaults)
    if cfg["energies"] is None:
        raise _ValidationError("ensemble needs --energies or a config file with them")
    energies = cfg["energies"]
    degeneracies = cfg["degeneracies"]
    if degeneracies is None:
        degeneracies = [1.0] * len(energies)
    spec = EnsembleSpec(
        energies=energies, degeneracies=degeneracies, beta=cfg["beta"], k_b=cfg["k_b"]
    )
    report = compute_thermodynamics(spec)
    payload = {
        "partition_z": report.partition_z,
        "free_energy": report.free_energy,
        "mean_energy": report.mean_energy,
        "entropy": report.entropy,
        "temperature": spec.temperature,
        "probabilities": list(report.probabilities),
    }
    cfg["degeneracies"] = list(map(float, degeneracies))
    cfg["energies"] = list(map(float, energies))
    if cfg["out_dir"] is None:
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
        return 0
    os.makedirs(cfg["out_dir"], exist_ok=True)
    try:
        write_json(payload, os.path.join(cfg["out_dir"], "report.json"))
        _write_manifest(cfg["out_dir"], "ensemble", cfg, ["report.json"], t0)
        return 0
    except Exception as exc:  # noqa: BLE001 - runtime failures become exit 1
        _write_failed(cfg["out_dir"], exc)
        print(f"error: {exc}", file=sys.stderr)
        return 1


# -------------------------------------------------------------- gmm-select


def _cmd_gmm_select(args):
    t0 = time.perf_counter()
    file_cfg = _load_config(args.config)
    defaults = {
        "input": None,
        "k_min": 1,
        "k_max": 6,
        "seed": None,
        "restarts": 5,
        "mc_samples": 5000,
        "out_dir": ".",
    }
    cfg = _resolve(args, file_cfg, defaults)
    if cfg["input"] is None:
        raise _ValidationError("gmm-select needs an input CSV (--input)")
    cfg["seed"] = _resolve_seed(cfg["seed"])
    try:
        data = read_csv(cfg["input"])
    except OSError as exc:
        raise _ValidationError(f"cannot read {cfg['input']}: {exc}") from exc
    except ValueError as exc:
        raise _ValidationError(str(exc)) from exc
    if isinstance(data, SupervisedSet):
        raise _ValidationError(f"{cfg['input']} holds a supervised set, expected a dataset")
    k_min, k_max = int(cfg["k_min"]), int(cfg["k_max"])
    if not (1 <= k_min <= k_max):
        raise _ValidationError(f"need 1 <= k_min <= k_max, got {k_min}..{k_max}")
    if k_max > data.n:
        raise _ValidationError(f"k_max={k_max} exceeds the number of samples N={data.n}")

    out_dir = cfg["out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    try:
        report = select_cluster_number(
            data,
            k_min,
            k_max,
            em_opts=EmOptions(seed=cfg["seed"], restarts=int(cfg["restarts"])),
            mc_samples=int(cfg["mc_samples"]),
            seed=cfg["seed"],
        )
        header = [
            "k",
            "converged_loglik",
            "h_sq",
            "kl_estimate",
            "kl_std_error",
            "em_restart_used",
            "bw_converged",
            "bw_degenerate",
        ]
        rows = [
            [
                str(c.k),
                _FMT % c.converged_loglik,
                _FMT % c.h_sq,
                _FMT % c.kl_estimate,
                _FMT % c.kl_std_error,
                str(c.em_restart_used),
                str(int(c.bw_converged)),
                str(int(c.bw_degenerate)),
            ]
            for c in report.per_k
        ]
        _write_text(os.path.join(out_dir, "selection.csv"), _rows_csv_text(header, rows))
        write_json(
            {
                "chosen_k": report.chosen_k,
                "per_k": [
                    {
                        "k": c.k,
                        "converged_loglik": c.converged_loglik,
                        "h_sq": c.h_sq,
                        "kl_estimate": c.kl_estimate,
                        "kl_std_error": c.kl_std_error,
                        "em_restart_used": c.em_restart_used,
                        "bw_converged": c.bw_converged,
                        "bw_degenerate": c.bw_degenerate,
                    }
                    for c in report.per_k
                ],
            },
            os.path.join(out_dir, "selection.json"),
        )
        _write_manifest(
            out_dir, "gmm-select", cfg, ["selection.csv", "selection.json"], t0
        )
        return 0
    except Exception as exc:  # noqa: BLE001
        _write_failed(out_dir, exc)
        print(f"error: {exc}", file=sys.stderr)
        return 1


# --------------------------------------------------------------- fnn-train


def _random_slfn(d, hidden, m, activation, seed):
    rng = derive_rng(seed, "gd-init")
    return SlfnModel(
        w_in=rng.uniform(-1.0, 1.0, (hidden, d)) / np.sqrt(d),
        b_in=rng.uniform(-1.0, 1.0, hidden) / np.sqrt(d),
        w_out=rng.uniform(-1.0, 1.0, (m, hidden)) / np.sqrt(hidden),
        b_out=np.zeros(m),
        activation=activation,
    )


def _cmd_fnn_train(args):
    t0 = time.perf_counter()
    file_cfg = _load_config(args.config)
    defaults = {
        "data": None,
        "task": None,
        "n": 200,
        "noise": 0.0,
        "lo": -5.0,
        "hi": 5.0,
        "hidden": 20,
        "activation": "tanh",
        "trainer": "gd",
        "h": "0",
        "lr": 1e-3,
        "epochs": 200,
        "seed": None,
        "out_dir": ".",
    }
    cfg = _resolve(args, file_cfg, defaults)
    cfg["seed"] = _resolve_seed(cfg["seed"])
    if (cfg["data"] is None) == (cfg["task"] is None):
        raise _ValidationError("give exactly one of --data CSV or --task name")
    h_raw = str(cfg["h"])
    if h_raw == "auto":
        h_value = "auto"
    else:
        try:
            h_value = float(h_raw)
        except ValueError as exc:
            raise _ValidationError(f"--h must be a number or 'auto', got {h_raw!r}") from exc
        if h_value < 0:
            raise _ValidationError(f"--h must be >= 0, got {h_value}")
    if cfg["trainer"] not in ("gd", "pil"):
        raise _ValidationError(f"unknown trainer {cfg['trainer']!r}, choose gd or pil")
    if cfg["trainer"] == "pil" and h_value == "auto":
        raise _ValidationError("trainer 'pil' needs a numeric --h")

    if cfg["data"] is not None:
        try:
            data = read_csv(cfg["data"])
        except OSError as exc:
            raise _ValidationError(f"cannot read {cfg['data']}: {exc}") from exc
        except ValueError as exc:
            raise _ValidationError(str(exc)) from exc
        if not isinstance(data, SupervisedSet):
            raise _ValidationError(
                f"{cfg['data']} holds no z* target columns, expected a supervised set"
            )
    else:
        spec = RegressionSpec(
            fn=cfg["task"],
            n=int(cfg["n"]),
            domain=(float(cfg["lo"]), float(cfg["hi"])),
            noise_sigma=float(cfg["noise"]),
            seed=cfg["seed"],
        )
        data = gen_regression(spec)
    hidden = int(cfg["hidden"])
    if hidden < 1:
        raise _ValidationError(f"--hidden must be >= 1, got {hidden}")
    if float(cfg["lr"]) < 0:
        raise _ValidationError(f"--lr must be >= 0, got {cfg['lr']}")
    if int(cfg["epochs"]) < 0:
        raise _ValidationError(f"--epochs must be >= 0, got {cfg['epochs']}")

    out_dir = cfg["out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    try:
        artifacts = []
        d = data.inputs.shape[1]
        m = data.targets.shape[1]
        if cfg["trainer"] == "gd":
            start = _random_slfn(d, hidden, m, cfg["activation"], cfg["seed"])
            result = train_gd(
                start,
                data,
                h=h_value,
                lr=float(cfg["lr"]),
                epochs=int(cfg["epochs"]),
            )
            model = result.model
            rows = [
                [str(i), _FMT % loss, _FMT % hv]
                for i, (loss, hv) in enumerate(zip(result.loss_trace, result.h_trace))
            ]
            _write_text(
                os.path.join(out_dir, "loss_trace.csv"),
                _rows_csv_text(["epoch", "total_loss", "h"], rows),
            )
            artifacts.append("loss_trace.csv")
            h_final = float(result.h_trace[-1])
        else:
            model = train_pil(
                data, hidden, h=h_value, seed=cfg["seed"], activation=cfg["activation"]
            )
            h_final = h_value
        write_json(
            {
                "w_in": model.w_in.tolist(),
                "b_in": model.b_in.tolist(),
                "w_out": model.w_out.tolist(),
                "b_out": model.b_out.tolist(),
                "activation": model.activation,
                "noise_sigma": model.noise_sigma,
            },
            os.path.join(out_dir, "model.json"),
        )
        artifacts.append("model.json")
        final = loss_regularized(model, data, h=h_final)
        write_json(
            {
                "trainer": cfg["trainer"],
                "h_final": h_final,
                "sse_final": final.sse_term,
                "jacobian_final": final.jacobian_term,
                "total_final": final.total,
                "n_samples": data.n,
            },
            os.path.join(out_dir, "summary.json"),
        )
        artifacts.append("summary.json")
        _write_manifest(out_dir, "fnn-train", cfg, artifacts, t0)
        return 0
    except Exception as exc:  # noqa: BLE001
        _write_failed(out_dir, exc)
        print(f"error: {exc}", file=sys.stderr)
        return 1


# ------------------------------------------------------------------ rd-sim


def _rd_build_state(cfg):
    mode = cfg["mode"]
    seed = cfg["seed"]
    init = cfg["init"] if isinstance(cfg["init"], dict) else {"kind": str(cfg["init"])}
    kind = init.get("kind", "homogeneous")
    if mode == "gray-scott":
        grid = cfg["grid"]
        if isinstance(grid, int):
            grid = [grid, grid]
        if not (isinstance(grid, (list, tuple)) and len(grid) == 2):
            raise _ValidationError(f"gray-scott grid must be [ny, nx], got {grid!r}")
        ny, nx = int(grid[0]), int(grid[1])
        u = np.ones((ny, nx))
        v = np.zeros((ny, nx))
        if kind == "homogeneous":
            u[:] = float(init.get("u", 1.0))
            v[:] = float(init.get("v", 0.0))
        elif kind == "seeded-square":
            size = int(init.get("size", 10))
            if size < 1 or size > min(ny, nx):
                raise _ValidationError(f"seed square size {size} does not fit the grid")
            r0 = (ny - size) // 2
            c0 = (nx - size) // 2
            u[r0 : r0 + size, c0 : c0 + size] = float(init.get("u", 0.5))
            v[r0 : r0 + size, c0 : c0 + size] = float(init.get("v", 0.25))
        elif kind == "random":
            amp = float(init.get("amplitude", 0.1))
            rng = derive_rng(seed, "rd-init")
            u -= amp * rng.random((ny, nx))
            v += amp * rng.random((ny, nx))
        else:
            raise _ValidationError(f"unknown init kind {kind!r} for gray-scott")
        return RdState2D(
            u=u,
            v=v,
            dx=float(cfg["dx"]),
            d_u=float(cfg["d_u"]),
            d_v=float(cfg["d_v"]),
            feed=float(cfg["feed"]),
            kill=float(cfg["kill"]),
        )
    if mode == "gradient-flow-1d":
        n = cfg["grid"]
        if isinstance(n, (list, tuple)):
            if len(n) != 1:
                raise _ValidationError(f"1-D grid must be a single length, got {n!r}")
            n = n[0]
        n = int(n)
        if kind == "homogeneous":
            values = np.full(n, float(init.get("value", 0.0)))
        elif kind == "random":
            amp = float(init.get("amplitude", 0.1))
            rng = derive_rng(seed, "rd-init")
            values = amp * (2.0 * rng.random(n) - 1.0)
        else:
            raise _ValidationError(f"unknown init kind {kind!r} for gradient-flow-1d")
        return Field1D(values=values, dx=float(cfg["dx"]), boundary=cfg["boundary"])
    raise _ValidationError(f"unknown mode {mode!r}, choose gray-scott or gradient-flow-1d")


def _cmd_rd_sim(args):
    t0 = time.perf_counter()
    file_cfg = _load_config(args.config)
    defaults = {
        "mode": "gray-scott",
        "grid": 128,
        "dx": 1.0 / 128.0,
        "dt_factor": 0.8,
        "steps": 1000,
        "snapshot_every": 100,
        "seed": None,
        "init": {"kind": "seeded-square"},
        "d_u": 2e-5,
        "d_v": 1e-5,
        "feed": 0.037,
        "kill": 0.06,
        "diffusion": 1.0,
        "potential": "allen-cahn",
        "boundary": "periodic",
        "dump_csv": False,
        "out_dir": ".",
    }
    cfg = _resolve(args, file_cfg, defaults)
    cfg["seed"] = _resolve_seed(cfg["seed"])
    dt_factor = float(cfg["dt_factor"])
    if not 0 < dt_factor <= 1:
        raise _ValidationError(f"dt_factor must be in (0, 1], got {dt_factor}")
    try:
        state = _rd_build_state(cfg)
        if isinstance(state, Field1D):
            if cfg["potential"] not in POTENTIALS:
                raise ValueError(
                    f"unknown potential {cfg['potential']!r}, choose from {tuple(POTENTIALS)}"
                )
            bound = stability_bound_1d(state, float(cfg["diffusion"]))
        else:
            bound = stability_bound_2d(state)
        control = StepControl(
            dt=dt_factor * bound,
            steps=int(cfg["steps"]),
            snapshot_every=max(1, int(cfg["snapshot_every"])),
        )
    except ValueError as exc:
        raise _ValidationError(str(exc)) from exc

    out_dir = cfg["out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    try:
        if isinstance(state, Field1D):
            result = simulate(
                state, control, diffusion=float(cfg["diffusion"]), potential=cfg["potential"]
            )
        else:
            result = simulate(state, control)
        artifacts = []
        for snap in result.snapshots:
            stem = f"snap_{snap.step:06d}"
            if isinstance(state, Field1D):
                grid = snap.state.reshape(1, -1)
                write_pgm(grid, os.path.join(out_dir, stem + ".pgm"))
                artifacts += [stem + ".pgm", stem + ".pgm.json"]
                if cfg["dump_csv"]:
                    write_csv(snap.state.reshape(1, -1), os.path.join(out_dir, stem + ".csv"))
                    artifacts.append(stem + ".csv")
            else:
                u_grid, v_grid = snap.state
                write_pgm(v_grid, os.path.join(out_dir, stem + "_v.pgm"))
                artifacts += [stem + "_v.pgm", stem + "_v.pgm.json"]
                if cfg["dump_csv"]:
                    write_csv(u_grid, os.path.join(out_dir, stem + "_u.csv"))
                    write_csv(v_grid, os.path.join(out_dir, stem + "_v.csv"))
                    artifacts += [stem + "_u.csv", stem + "_v.csv"]
        rows = [
            [str(int(step)), _FMT % (int(step) * control.dt), _FMT % value]
            for step, value in zip(result.metric_steps, result.metric_values)
        ]
        _write_text(
            os.path.join(out_dir, "metrics.csv"),
            _rows_csv_text(["step", "time", "metric"], rows),
        )
        artifacts.append("metrics.csv")
        _write_manifest(out_dir, "rd-sim", cfg, artifacts, t0)
        return 0
    except Exception as exc:  # noqa: BLE001
        _write_failed(out_dir, exc)
        print(f"error: {exc}", file=sys.stderr)
        return 1


# ---------------------------------------------------------------- gen-data


def _cmd_gen_data(args):
    t0 = time.perf_counter()
    file_cfg = _load_config(args.config)
    defaults = {"blobs": None, "regression": None, "out": None, "out_dir": None}
    cfg = _resolve(args, file_cfg, defaults)
    if (cfg["blobs"] is None) == (cfg["regression"] is None):
        raise _ValidationError("give exactly one of --blobs or --regression")

    if cfg["blobs"] is not None:
        tokens = cfg["blobs"] if isinstance(cfg["blobs"], list) else [cfg["blobs"]]
        casters = {
            "k": int,
            "n": int,
            "d": int,
            "sep": float,
            "sigma": float,
            "seed": int,
        }
        kv = _parse_kv(tokens, casters, "--blobs")
        spec = BlobSpec(
            k=kv.get("k", 3),
            per_cluster_n=kv.get("n", 100),
            dim=kv.get("d", 2),
            separation=kv.get("sep", 8.0),
            sigma=kv.get("sigma", 0.2),
            seed=kv.get("seed", _resolve_seed(None)),
        )
        data = gen_blobs(spec)
        resolved = {
            "kind": "blobs",
            "k": spec.k,
            "n": spec.per_cluster_n,
            "d": spec.dim,
            "sep": spec.separation,
            "sigma": spec.sigma,
            "seed": spec.seed,
        }
        default_name = "blobs.csv"
    else:
        tokens = cfg["regression"] if isinstance(cfg["regression"], list) else [cfg["regression"]]
        casters = {
            "fn": str,
            "n": int,
            "lo": float,
            "hi": float,
            "noise": float,
            "seed": int,
        }
        kv = _parse_kv(tokens, casters, "--regression")
        spec = RegressionSpec(
            fn=kv.get("fn", "sinc"),
            n=kv.get("n", 200),
            domain=(kv.get("lo", -5.0), kv.get("hi", 5.0)),
            noise_sigma=kv.get("noise", 0.0),
            seed=kv.get("seed", _resolve_seed(None)),
        )
        data = gen_regression(spec)
        resolved = {
            "kind": "regression",
            "fn": spec.fn,
            "n": spec.n,
            "lo": spec.domain[0],
            "hi": spec.domain[1],
            "noise": spec.noise_sigma,
            "seed": spec.seed,
        }
        default_name = "regression.csv"

    out_dir = cfg["out_dir"] if cfg["out_dir"] is not None else "."
    out_path = cfg["out"] if cfg["out"] is not None else os.path.join(out_dir, default_name)
    target_dir = os.path.dirname(os.path.abspath(out_path))
    os.makedirs(target_dir, exist_ok=True)
    try:
        write_csv(data, out_path)
        manifest_dir = os.path.dirname(os.path.abspath(out_path))
        resolved["out"] = out_path
        _write_manifest(manifest_dir, "gen-data", resolved, [os.path.basename(out_path)], t0)
        return 0
    except Exception as exc:  # noqa: BLE001
        _write_failed(target_dir, exc)
        print(f"error: {exc}", file=sys.stderr)
        return 1


# ------------------------------------------------------------------ parser


def build_parser():
    parser = argparse.ArgumentParser(
        prog="synlearn",
        description="Deterministic toolkit runner: ensembles, cluster selection, "
        "regularized networks, reaction-diffusion.",
    )
    sub = parser.add_subparsers(dest="subcommand", metavar="subcommand")

    p = sub.add_parser("ensemble", help="thermodynamic report for a discrete spectrum")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--energies", type=_parse_float_list, help="comma-separated energy levels")
    p.add_argument(
        "--degeneracies", type=_parse_float_list, help="comma-separated level counts"
    )
    p.add_argument("--beta", type=float, help="inverse temperature (> 0)")
    p.add_argument("--k-b", dest="k_b", type=float, help="Boltzmann constant (> 0)")
    p.add_argument("--out-dir", dest="out_dir", help="write report.json here (default stdout)")
    p.set_defaults(handler=_cmd_ensemble)

    p = sub.add_parser("gmm-select", help="pick a cluster count by KL free energy")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--input", help="dataset CSV (header row, numeric columns)")
    p.add_argument("--k-min", dest="k_min", type=int)
    p.add_argument("--k-max", dest="k_max", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--mc-samples", dest="mc_samples", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(handler=_cmd_gmm_select)

    p = sub.add_parser("fnn-train", help="train a single-hidden-layer network")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--data", help="supervised CSV (x* and z* columns)")
    p.add_argument("--task", choices=("sinc", "linear", "sine"), help="synthetic target")
    p.add_argument("--n", type=int, help="synthetic sample count")
    p.add_argument("--noise", type=float, help="synthetic noise level")
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--hidden", type=int)
    p.add_argument("--activation", choices=("tanh", "sigmoid", "identity"))
    p.add_argument("--trainer", choices=("gd", "pil"))
    p.add_argument("--h", help="penalty weight (number or 'auto')")
    p.add_argument("--lr", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(handler=_cmd_fnn_train)

    p = sub.add_parser("rd-sim", help="reaction-diffusion simulation")
    p.add_argument("--config", help="JSON config file (primary carrier of settings)")
    p.add_argument("--mode", choices=("gray-scott", "gradient-flow-1d"))
    p.add_argument("--steps", type=int)
    p.add_argument("--snapshot-every", dest="snapshot_every", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument(
        "--dump-csv",
        dest="dump_csv",
        action="store_const",
        const=True,
        help="also write raw grids as CSV",
    )
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(handler=_cmd_rd_sim)

    p = sub.add_parser("gen-data", help="synthetic dataset CSVs")
    p.add_argument("--config", help="JSON config file")
    p.add_argument(
        "--blobs",
        nargs="*",
        metavar="key=value",
        help="Gaussian blobs: k= n= d= sep= sigma= seed=",
    )
    p.add_argument(
        "--regression",
        nargs="*",
        metavar="key=value",
        help="noisy regression: fn= n= lo= hi= noise= seed=",
    )
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(handler=_cmd_gen_data)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    if getattr(args, "handler", None) is None:
        parser.print_usage(sys.stderr)
        print("error: a subcommand is required", file=sys.stderr)
        return 2
    try:
        return args.handler(args)
    except _ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
