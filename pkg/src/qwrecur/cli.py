"""Command-line front end: ``qwrecur walk|polya|spectral|sweep``.

Every subcommand writes plot-ready CSV/JSON into ``--out-dir`` and prints a
short summary.  Options may also come from a JSON file given with
``--config``; flags on the command line win over file values.  On failure
all files written by the run are removed and the exit code is nonzero
(2 for bad configuration, 1 for errors raised during computation).
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

import numpy as np

from . import coins as C
from .evolution import MemoryCapExceeded, evolve_auto, evolve_collect, evolve_product, ProductWalk
from .formats import (
    load_coin,
    write_band_csv,
    write_json,
    write_saddle_json,
    write_series_csv,
    write_snapshot_csv,
    write_surface_csv,
    write_text,
    fmt,
)
from .polya import (
    classical_polya,
    classify_recurrence,
    fit_decay_exponent,
    fit_fourier_surface,
    fourier_polya_surface,
    polya_at_cutoffs,
    polya_partial,
    tensor_polya_estimate,
)
from .spectral import (
    band_structure,
    find_saddles,
    flat_band_overlap,
    predicted_exponent,
    stationary_state_subspace,
)

DEFAULTS = {
    "coin": None,
    "state": None,
    "t_max": 1000,
    "engine": "auto",
    "out_dir": ".",
    "seed": 0,
    "N": 256,
    "terms": 100,
    "d": None,
    "alpha": 0.0,
    "beta": 0.0,
    "a": None,
    "phi": None,
    "snapshots": None,
    "tensor_hadamard": False,
    "classical": False,
    "surface": None,
    "a_step": 0.005,
    "phi_points": 360,
}

COIN_NAMES = ("hadamard", "hadamard1d", "unbiased1d", "random1d", "grover", "fourier",
              "tensor-hadamard", "grover-family")


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class Outputs:
    """Files written by one run, removed again if the run fails."""

    def __init__(self, out_dir):
        self.dir = Path(out_dir)
        self.paths: list[Path] = []

    def path(self, name: str) -> Path:
        p = self.dir / name
        self.paths.append(p)
        return p

    def discard(self):
        for p in self.paths:
            if p.exists():
                p.unlink()


# -- resolving coins and states ---------------------------------------------

def _sym_1d() -> C.CoinState:
    return C.CoinState(np.array([1, 1j]) / np.sqrt(2))


def resolve_coin(cfg: dict):
    """(coin, state from file or None) for the configured coin name."""
    name = cfg["coin"]
    if name is None:
        raise ConfigError("--coin is required")
    if name.endswith(".json") or Path(name).is_file():
        try:
            return load_coin(name)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read coin file {name}: {exc}") from exc
    d = cfg["d"]
    if name == "hadamard":
        return C.hadamard(), None
    if name in ("hadamard1d", "unbiased1d"):
        return C.unbiased_coin_1d(float(cfg["alpha"]), float(cfg["beta"])), None
    if name == "random1d":
        return C.random_unbiased_coin_1d(np.random.default_rng(cfg["seed"])), None
    if name == "grover":
        return C.grover_coin(), None
    if name == "fourier":
        return C.fourier_coin(), None
    if name == "tensor-hadamard":
        if d is None or d < 1:
            raise ConfigError("tensor-hadamard needs -d")
        return C.tensor_coin([C.hadamard()] * d), None
    if name == "grover-family":
        if d is None:
            raise ConfigError("grover-family needs -d")
        return C.grover_family_coin(d), None
    raise ConfigError(f"unknown coin {name!r}; choose from {', '.join(COIN_NAMES)} or a JSON file")


def resolve_state(cfg: dict, coin: C.CoinOperator, from_file: C.CoinState | None) -> C.CoinState:
    name = cfg["state"]
    if name is None:
        return from_file if from_file is not None else C.basis_state(coin.c, 0)
    if name in ("psi_S", "psi_G", "psi_F"):
        if coin.c != 4:
            raise ConfigError(f"{name} is a four-component state, coin has c={coin.c}")
        if name == "psi_F" and (cfg["a"] is None or cfg["phi"] is None):
            raise ConfigError("psi_F needs --a and --phi")
        return C.named_state(name, cfg["a"], cfg["phi"])
    if name == "sym":
        if coin.c & (coin.c - 1):
            raise ConfigError("sym state needs c a power of two")
        return C.tensor_state([_sym_1d()] * int(np.log2(coin.c)))
    if name == "random":
        return C.random_state(coin.c, np.random.default_rng(cfg["seed"]))
    if name.startswith("e") and name[1:].isdigit():
        i = int(name[1:])
        if not 1 <= i <= coin.c:
            raise ConfigError(f"basis state {name} outside e1..e{coin.c}")
        return C.basis_state(coin.c, i - 1)
    if Path(name).is_file():
        with open(name, encoding="utf-8") as fh:
            data = json.load(fh)
        rows = np.asarray(data["state"] if isinstance(data, dict) else data, dtype=float)
        state = C.CoinState(rows[:, 0] + 1j * rows[:, 1])
        if state.c != coin.c:
            raise ConfigError("state file dimension does not match the coin")
        return state
    raise ConfigError(f"unknown state {name!r}")


def _resolve(cfg):
    try:
        coin, from_file = resolve_coin(cfg)
        return coin, resolve_state(cfg, coin, from_file)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _fit_window(t_max: int) -> tuple[int, int]:
    return max(2, 2 * ((t_max // 10) // 2)), t_max


def _series_summary(series) -> dict:
    out = {"t_max": int(series.t[-1]), "norm_deviation": series.metadata.get("norm_deviation")}
    est = polya_partial(series)
    out.update(polya=est.partial_product, partial_sum=est.partial_sum, n_terms=est.n_terms)
    try:
        out["fitted_exponent"], out["exponent_stderr"] = fit_decay_exponent(series, _fit_window(out["t_max"]))
    except ValueError as exc:
        out["fitted_exponent"] = None
        out["fit_note"] = str(exc)
    try:
        cls = classify_recurrence(series)
        out["classification"] = cls.label
        out["evidence"] = cls.evidence
    except ValueError as exc:
        out["classification"] = "undetermined"
        out["classification_note"] = str(exc)
    return out


# -- subcommands -------------------------------------------------------------

def cmd_walk(cfg, out: Outputs):
    coin, state = _resolve(cfg)
    snaps = _parse_ints(cfg["snapshots"])
    t_max = int(cfg["t_max"])
    if any(s < 0 or s > t_max for s in snaps):
        raise ConfigError("snapshot times must lie in 0..t_max")
    if snaps:
        if cfg["engine"] == "product":
            raise ConfigError("snapshots need the direct engine")
        series, boxes = evolve_collect(coin, state, t_max, snaps)
    else:
        series, boxes = evolve_auto(coin, state, t_max, cfg["engine"]), {}
    write_series_csv(out.path("series.csv"), series)
    for t in sorted(boxes):
        write_snapshot_csv(out.path(f"snapshot_t{t}.csv"), boxes[t])
    summary = {"coin": coin.label, "state": series.metadata.get("state"),
               "engine": series.metadata.get("engine")}
    summary.update(_series_summary(series))
    write_json(out.path("summary.json"), summary)
    alpha = summary["fitted_exponent"]
    print(f"{coin.label}: {summary['classification']}, "
          f"alpha={'n/a' if alpha is None else f'{alpha:.4f}'}, "
          f"P_{summary['n_terms']}={summary['polya']:.6f}")


def cmd_polya(cfg, out: Outputs):
    if cfg["surface"] is not None:
        return _polya_surface(cfg, out)
    if cfg["classical"]:
        d = cfg["d"]
        if d is None or d < 1:
            raise ConfigError("--classical needs -d")
        cp = classical_polya(d, int(cfg["t_max"]))
        report = {"walk": "classical", "d": d, "t_max": int(cfg["t_max"]), "polya": cp.value,
                  "bound_width": cp.bound_width, "partial_sum": cp.partial_sum,
                  "tail_estimate": cp.tail_estimate, "divergent": cp.divergent}
        write_json(out.path("polya.json"), report)
        print(f"classical d={d}: P={cp.value:.6f}" + (" (divergent series)" if cp.divergent else ""))
        return
    if cfg["tensor_hadamard"]:
        d = cfg["d"]
        if d is None or d < 1:
            raise ConfigError("--tensor-hadamard needs -d")
        walk = ProductWalk(tuple((C.hadamard(), _sym_1d()) for _ in range(d)))
        series = evolve_product(walk, int(cfg["t_max"]))
        report = {"walk": "tensor-hadamard", "d": d}
        if d >= 2:
            report["estimate"] = tensor_polya_estimate(d)
    else:
        coin, state = _resolve(cfg)
        series = evolve_auto(coin, state, int(cfg["t_max"]), cfg["engine"])
        report = {"walk": coin.label, "d": coin.d}
    report["engine"] = series.metadata.get("engine")
    report.update(_series_summary(series))
    t_max = report["t_max"]
    cuts = sorted({c for c in (t_max - 200, t_max - 100, t_max) if c > 0})
    report["cutoff_sensitivity"] = polya_at_cutoffs(series, cuts)
    write_json(out.path("polya.json"), report)
    write_series_csv(out.path("series.csv"), series)
    line = f"{report['walk']} d={report['d']}: P={report['polya']:.6f}"
    if "estimate" in report:
        line += f", estimate={report['estimate']:.6f}"
    print(line + f", {report['classification']}")


def _polya_surface(cfg, out: Outputs):
    if cfg["surface"] != "fourier":
        raise ConfigError("only --surface fourier is available")
    terms = int(cfg["terms"])
    if terms < 1:
        raise ConfigError("--terms must be positive")
    denom = round(1.0 / float(cfg["a_step"]))
    amax = 1.0 / np.sqrt(2.0)
    a = np.arange(int(np.floor(amax * denom)) + 1) / denom
    if a[-1] < amax:
        a = np.append(a, amax)
    n_phi = int(cfg["phi_points"])
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    model = fit_fourier_surface(2 * terms)
    surface = fourier_polya_surface(model, a, phi, terms)
    write_surface_csv(out.path("surface.csv"), surface)
    write_json(out.path("surface_summary.json"), surface.summary())
    rows = "".join(f"{t},{fmt(k1)},{fmt(k2)}\n" for t, k1, k2 in zip(model.times, model.K1, model.K2))
    write_text(out.path("k_model.csv"), "t,K1,K2\n" + rows)
    lo, hi = surface.minimum, surface.maximum
    print(f"fourier surface ({terms} terms): min {lo['value']:.4f} at a={lo['a']:.3f} "
          f"phi={lo['phi'] / np.pi:.3f}pi, max {hi['value']:.4f} at a={hi['a']:.3f} "
          f"phi={hi['phi'] / np.pi:.3f}pi")


def cmd_spectral(cfg, out: Outputs):
    coin, state = _resolve(cfg)
    n = int(cfg["N"])
    grid = band_structure(coin, n)
    report = find_saddles(grid)
    extra = {"coin": coin.label, "N": n, "flat_band_spread": grid.phase_spread().tolist()}
    fb = flat_band_overlap(state, grid)
    extra["state"] = [[float(z.real), float(z.imag)] for z in np.asarray(state)]
    extra["flat_band_overlap"] = {"verdict": fb.verdict, "max_overlaps": fb.max_overlaps}
    extra["predicted_exponent"] = predicted_exponent(report, grid, state)
    basis = stationary_state_subspace(grid, report)
    extra["continuum_free_states"] = [[[float(z.real), float(z.imag)] for z in col] for col in basis.T]
    write_band_csv(out.path("bands.csv"), grid)
    write_saddle_json(out.path("saddles.json"), report, extra)
    print(f"{coin.label} N={n}: {len(report.flat_bands)} flat bands, "
          f"{len(report.points)} saddle points, {len(report.continua)} continua")
    for cont in report.continua:
        fixed = ", ".join(f"k{a + 1}={v / np.pi:+.4f}pi" for a, v in cont.fixed.items())
        print(f"  band {cont.band}: continuum {fixed}")
    for p in report.points:
        print(f"  band {p.band}: point k/pi={np.round(p.k / np.pi, 6).tolist()}")
    print(f"  verdict: {fb.verdict}, predicted alpha={extra['predicted_exponent']}")


def cmd_sweep(cfg, out: Outputs):
    axes = {}
    for key in ("alpha", "beta", "a", "phi"):
        vals = _parse_range(cfg.get(f"sweep_{key}"))
        if vals:
            axes[key] = vals
    if not axes:
        raise ConfigError("sweep needs at least one of --sweep-alpha/--sweep-beta/--sweep-a/--sweep-phi")
    keys = sorted(axes)
    points = [dict(zip(keys, combo)) for combo in itertools.product(*(axes[k] for k in keys))]
    # validate every point before running any of them
    resolved = []
    for pt in points:
        sub = dict(cfg)
        sub.update(pt)
        resolved.append(_resolve(sub))
    index = []
    for i, (pt, (coin, state)) in enumerate(zip(points, resolved)):
        series = evolve_auto(coin, state, int(cfg["t_max"]), cfg["engine"])
        name = f"series_{i:04d}.csv"
        write_series_csv(out.path(name), series)
        est = polya_partial(series)
        index.append({"file": name, "params": pt, "polya": est.partial_product})
    write_json(out.path("index.json"), {"coin": cfg["coin"], "state": cfg["state"],
                                        "t_max": int(cfg["t_max"]), "points": index})
    print(f"sweep: {len(index)} series written to {out.dir}")


# -- argument handling -------------------------------------------------------

def _parse_ints(text) -> list[int]:
    if text in (None, ""):
        return []
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    return [int(x) for x in str(text).split(",") if x.strip()]


def _parse_range(text) -> list[float]:
    """``v1,v2,...`` or ``start:stop:num`` (inclusive linspace)."""
    if text in (None, ""):
        return []
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    text = str(text)
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"bad range {text!r}, expected start:stop:num")
        return np.linspace(float(parts[0]), float(parts[1]), int(parts[2])).tolist()
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON file of option values; flags override it")
    common.add_argument("--coin", help="named coin or coin JSON file")
    common.add_argument("--state", help="psi_S, psi_G, psi_F, sym, random, e1..ec or a JSON file")
    common.add_argument("--t-max", dest="t_max", type=int)
    common.add_argument("--engine", choices=("direct", "product", "auto"))
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--seed", type=int)
    common.add_argument("-N", dest="N", type=int, help="k-grid points per axis")
    common.add_argument("--terms", type=int)
    common.add_argument("-d", dest="d", type=int, help="lattice dimension")
    common.add_argument("--alpha", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--a", type=float)
    common.add_argument("--phi", type=float)

    p = argparse.ArgumentParser(prog="qwrecur", description="Recurrence of coined quantum walks.")
    sub = p.add_subparsers(dest="command", required=True)
    kw = dict(parents=[common], argument_default=argparse.SUPPRESS)
    w = sub.add_parser("walk", help="evolve a walk and write p0(t)", **kw)
    w.add_argument("--snapshots", help="comma separated times for distribution snapshots")
    q = sub.add_parser("polya", help="Polya number estimates", **kw)
    q.add_argument("--tensor-hadamard", dest="tensor_hadamard", action="store_true")
    q.add_argument("--classical", action="store_true")
    q.add_argument("--surface", choices=("fourier",))
    q.add_argument("--a-step", dest="a_step", type=float)
    q.add_argument("--phi-points", dest="phi_points", type=int)
    sub.add_parser("spectral", help="bands, saddle points, flat-band verdict", **kw)
    s = sub.add_parser("sweep", help="Cartesian parameter sweep of walk runs", **kw)
    for key in ("alpha", "beta", "a", "phi"):
        s.add_argument(f"--sweep-{key}", dest=f"sweep_{key}", help="v1,v2,... or start:stop:num")
    return p


def load_config(argv=None) -> dict:
    args = vars(build_parser().parse_args(argv))
    cfg = dict(DEFAULTS)
    if "config" in args:
        try:
            with open(args["config"], encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args['config']}: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg.update({k.replace("-", "_"): v for k, v in file_cfg.items()})
    cfg.update(args)
    return cfg


COMMANDS = {"walk": cmd_walk, "polya": cmd_polya, "spectral": cmd_spectral, "sweep": cmd_sweep}


def main(argv=None) -> int:
    try:
        cfg = load_config(argv)
    except ConfigError as exc:
        print(f"qwrecur: error: {exc}", file=sys.stderr)
        return 2
    out = Outputs(cfg["out_dir"])
    try:
        COMMANDS[cfg["command"]](cfg, out)
    except ConfigError as exc:
        out.discard()
        print(f"qwrecur: error: {exc}", file=sys.stderr)
        return 2
    except (MemoryCapExceeded, ValueError, ArithmeticError, OSError) as exc:
        out.discard()
        print(f"qwrecur: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except BaseException:
        out.discard()
        raise
    return 0


if __name__ == "__main__":
    sys.exit(main())
