"""
Experiment runner: seeded Monte Carlo campaigns and exact sweeps written to CSV.

A run reads a flat JSON config with a ``"kind"`` discriminator, writes
``<kind>.csv`` plus ``manifest.json`` into the output directory and returns
the manifest. CSV floats use 17 significant digits, so identical configs and
seeds give byte-identical CSV files.
"""

from __future__ import annotations

import csv
import io
import json
import math
import platform
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import scipy

from . import __version__
from .channels import (
    BinaryChannel,
    ChannelClass,
    bhattacharyya,
    channel_from_dict,
    gallager_e0,
    make_bec,
    make_bsc,
    make_quantized_bawgn,
    random_channel,
    symmetric_capacity,
)
from .codec import DecodeMetric, SCDecoder, encode, glrt_decode, leaf_llrs, schedule_count, transmit_uniform
from .codes import CodeSpec, log2_exact
from .construction import (
    DEFAULT_MU,
    compound_construct,
    mc_genie_estimate,
    select_information_set,
    synthesize,
)
from .extremality import SCAN_COLUMNS, e0_extremality_scan
from .montecarlo import run_chunked, trial_rng
from .ordering import PROBE_COLUMNS, polar_order_probe
from .transform import conservation_check, e0_improvement_check, extremal_split_check, transform

__all__ = [
    "ExperimentError",
    "ConfigError",
    "UnknownExperimentError",
    "ChannelSpecError",
    "BlockLengthError",
    "block_error_rate",
    "bec_log_z",
    "scaling_probe",
    "MismatchedRate",
    "mismatched_rate_estimate",
    "run_experiment",
    "verify",
    "EXPERIMENT_KINDS",
]


class ExperimentError(Exception):
    exit_code = 1


class ConfigError(ExperimentError):
    exit_code = 3


class UnknownExperimentError(ExperimentError):
    exit_code = 4


class ChannelSpecError(ExperimentError):
    exit_code = 5


class BlockLengthError(ExperimentError):
    exit_code = 6


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


# ---------------------------------------------------------------- Monte Carlo


def block_error_rate(
    channels: Sequence[BinaryChannel],
    spec: CodeSpec,
    metric: DecodeMetric,
    trials: int,
    seed: int,
    stream: str,
    threads: Optional[int] = None,
) -> tuple:
    """Simulate ``trials`` frames with uniformly random messages.

    Returns ``(block_errors, trials)``. Trial ``t`` draws its message and its
    channel noise from its own stream, derived from ``(seed, stream, t)``.
    """
    channels = list(channels)
    N, K = spec.N, spec.K
    if len(channels) != N:
        raise ValueError("one channel per codeword position is required")

    def run(a, b):
        T = b - a
        msg = np.empty((T, K), dtype=np.uint8)
        unif = np.empty((T, N))
        for t in range(T):
            rng = trial_rng(seed, stream, a + t)
            msg[t] = rng.integers(0, 2, K, dtype=np.uint8)
            unif[t] = rng.random(N)
        u = spec.embed(msg)
        y = transmit_uniform(encode(u), channels, unif)
        if metric.kind == "glrt":
            u_hat, _, _ = glrt_decode(y, spec, metric.cls)
        else:
            dec = SCDecoder(spec)
            u_hat, _, _ = dec.decode_llr(leaf_llrs(y, metric.metric_channels(channels)))
        return int(np.any(u_hat != u, axis=1).sum())

    if trials <= 0:
        return 0, 0
    return sum(run_chunked(run, trials, threads)), trials


# ---------------------------------------------------------------- exact BEC sweeps


def bec_log_z(eps: float, n: int) -> np.ndarray:
    """Natural log of every bit-channel erasure probability of stationary BEC(eps).

    Carries both ``log z`` and ``log(1 - z)`` so neither end underflows.
    """
    with np.errstate(divide="ignore"):
        lz = np.array([math.log(eps) if eps > 0 else -np.inf])
        lc = np.array([math.log1p(-eps) if eps < 1 else -np.inf])
    for _ in range(n):
        # minus: z- = z (2 - z), 1 - z- = (1 - z)^2 ; plus: z+ = z^2, 1 - z+ = (1 - z)(1 + z)
        # minus first (lower index); product forms keep both tails exact
        lz_minus = lz + np.log1p(np.exp(lc))
        lc_minus = 2.0 * lc
        lz_plus = 2.0 * lz
        lc_plus = lc + np.log1p(np.exp(lz))
        lz = np.stack([lz_minus, lz_plus], axis=-1).ravel()
        lc = np.stack([lc_minus, lc_plus], axis=-1).ravel()
    return lz


SCALING_COLUMNS = ("n", "bound", "loglog")


def scaling_probe(eps: float, R: float, n_list: Sequence[int]) -> list:
    """Exact union bound ``sum_{i in A} Z_i`` on BEC(eps) for ``|A| = ceil(R N)``.

    Rows are ``(n, bound, log2(-log2 bound))``; an empty information set gives
    ``bound = 0`` and ``loglog = inf``.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    if not 0.0 <= R < 1.0 - eps:
        raise ValueError(f"rate {R} must be below the capacity {1.0 - eps}")
    rows = []
    for n in n_list:
        N = 1 << n
        K = math.ceil(R * N - 1e-9)
        if K == 0:
            rows.append((n, 0.0, math.inf))
            continue
        lz = np.sort(bec_log_z(eps, n))[:K]
        log_bound = float(np.logaddexp.reduce(lz))
        bound = math.exp(log_bound)
        loglog = math.log2(-log_bound / math.log(2.0)) if log_bound < 0 else math.nan
        rows.append((n, bound, loglog))
    return rows


def scaling_slope(rows, n_min: int = 14, n_max: int = 20) -> float:
    pts = [(n, ll) for n, _, ll in rows if n_min <= n <= n_max and math.isfinite(ll)]
    ns, ll = np.array(pts, dtype=np.float64).T
    return float(np.polyfit(ns, ll, 1)[0])


# ---------------------------------------------------------------- mismatched rate


@dataclass(frozen=True)
class MismatchedRate:
    n: int
    K: int
    rate: float
    rate_se: float


def _largest_k(cum: np.ndarray, target: float) -> int:
    return int(np.searchsorted(cum, target, side="right"))


def mismatched_rate_estimate(
    W: BinaryChannel,
    V: BinaryChannel,
    n: int,
    target: float,
    trials: int,
    seed: int = 0,
    threads: Optional[int] = None,
) -> MismatchedRate:
    """Largest code size whose estimated SC union bound under metric ``V`` meets ``target``.

    Genie-aided per-index error rates are sorted; ``K*`` is the largest ``K``
    whose ``K`` smallest rates sum to at most ``target``. ``rate_se`` is half
    the spread of ``K*/N`` when the cumulative sum moves by one standard error
    either way (per-index variances use add-one smoothing so that indices
    with no observed error still count).
    """
    N = 1 << n
    reports = mc_genie_estimate([W] * N, None, DecodeMetric.mismatched(V), trials, seed, threads=threads)
    err = np.array([r.mc_error for r in reports])
    z = np.array([r.z for r in reports])
    err = err[np.lexsort((np.arange(N), z, err))]
    cum = np.cumsum(err)
    smoothed = (err * trials + 1.0) / (trials + 2.0)
    sd = np.sqrt(np.cumsum(smoothed * (1.0 - smoothed) / trials))
    K = _largest_k(cum, target)
    k_lo = _largest_k(cum + sd, target)
    # cum - sd is not monotone
    below = np.flatnonzero(cum - sd <= target)
    k_hi = int(below[-1]) + 1 if below.size else 0
    return MismatchedRate(n, K, K / N, (k_hi - k_lo) / (2.0 * N))


# ---------------------------------------------------------------- experiments


def _channel(d, what="channel") -> BinaryChannel:
    if not isinstance(d, dict):
        raise ChannelSpecError(f"{what}: expected an object, got {type(d).__name__}")
    try:
        return channel_from_dict(d)
    except (KeyError, ValueError, TypeError) as exc:
        raise ChannelSpecError(f"{what}: {exc}") from None


def _n_of(cfg: dict, key_n="n", key_N="N") -> int:
    if key_N in cfg:
        try:
            return log2_exact(int(cfg[key_N]))
        except ValueError as exc:
            raise BlockLengthError(str(exc)) from None
    if key_n not in cfg:
        raise ConfigError(f"missing '{key_n}'")
    n = int(cfg[key_n])
    if n < 0:
        raise BlockLengthError(f"n must be nonnegative, got {n}")
    return n


def _channel_list(cfg: dict, N: int) -> list:
    if "pattern" in cfg:
        pattern = [_channel(d, "pattern entry") for d in cfg["pattern"]]
        if not pattern:
            raise ChannelSpecError("pattern must not be empty")
        return [pattern[k % len(pattern)] for k in range(N)]
    return [_channel(cfg.get("channel"), "channel")] * N


def _metric(cfg: dict) -> DecodeMetric:
    m = cfg.get("metric")
    if m is None or m == "matched":
        return DecodeMetric.matched()
    if isinstance(m, dict) and "class" in m:
        return DecodeMetric.glrt(ChannelClass(tuple(_channel(d, "class member") for d in m["class"])))
    return DecodeMetric.mismatched(_channel(m, "metric"))


def _exp_polarization(cfg, seed, threads):
    n_max = _n_of(cfg)
    thr = float(cfg.get("threshold", 1e-3))
    mu = int(cfg.get("mu", DEFAULT_MU))
    rows = []
    for n in range(n_max + 1):
        N = 1 << n
        s = synthesize(_channel_list(cfg, N), mu)
        good = float(np.mean(s.z < thr))
        bad = float(np.mean(s.z > 1.0 - thr))
        rows.append((n, good, bad, 1.0 - good - bad, float(np.mean(s.i))))
    return ("n", "fraction_good", "fraction_bad", "fraction_middle", "mean_capacity"), rows


def _construct_spec(cfg, chans, n, K, metric, seed, threads):
    how = cfg.get("construction", "z")
    if how == "z":
        return select_information_set(synthesize(chans, int(cfg.get("mu", DEFAULT_MU))), K)
    if how == "genie":
        reports = mc_genie_estimate(chans, None, metric, int(cfg.get("design_trials", 2000)), seed, threads=threads)
        return select_information_set(reports, K)
    raise ConfigError(f"unknown construction {how!r}")


def _exp_bler_sweep(cfg, seed, threads):
    n = _n_of(cfg)
    N = 1 << n
    chans = _channel_list(cfg, N)
    metric = _metric(cfg)
    trials = int(cfg.get("trials", 1000))
    ks = [int(k) for k in cfg.get("K", [])]
    rows = []
    if not ks:
        return ("K", "trials", "errors", "bler", "se"), rows
    design_metric = metric if metric.kind != "glrt" else DecodeMetric.matched()
    synth = None
    for K in ks:
        if cfg.get("construction", "z") == "z":
            synth = synth or synthesize(chans, int(cfg.get("mu", DEFAULT_MU)))
            spec = select_information_set(synth, K)
        else:
            spec = _construct_spec(cfg, chans, n, K, design_metric, seed, threads)
        errs, t = block_error_rate(chans, spec, metric, trials, seed, f"bler/K={K}", threads)
        p = errs / t
        rows.append((K, t, errs, p, math.sqrt(p * (1 - p) / t)))
    return ("K", "trials", "errors", "bler", "se"), rows


def _exp_scaling(cfg, seed, threads):
    eps = float(cfg.get("eps", 0.5))
    rate = float(cfg.get("rate", 0.3))
    ns = [int(v) for v in cfg.get("n_list", range(14, 21))]
    try:
        rows = scaling_probe(eps, rate, ns)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return SCALING_COLUMNS, rows


def _exp_mismatched_rate(cfg, seed, threads):
    W = _channel(cfg.get("channel"), "channel")
    V = _channel(cfg.get("metric"), "metric")
    target = float(cfg.get("target", 1e-2))
    trials = int(cfg.get("trials", 2000))
    rows = []
    for n in cfg.get("n_list", [8, 10]):
        r = mismatched_rate_estimate(W, V, int(n), target, trials, seed, threads)
        rows.append((r.n, r.K, r.rate, r.rate_se))
    return ("n", "K", "rate", "rate_se"), rows


def _exp_e0_scan(cfg, seed, threads):
    chans = [_channel(d) for d in cfg.get("channels", [cfg.get("channel")])]
    grid = [float(r) for r in cfg.get("rho_grid", [0.25, 0.5, 2, 4])]
    rows = []
    for W in chans:
        for rho0 in cfg.get("rho0", [1.0]):
            for r in e0_extremality_scan(W, float(rho0), grid):
                rows.append((r.rho0, r.rho1, r.e0_w, r.e0_bec, r.e0_bsc, r.in_interval))
    return SCAN_COLUMNS, rows


def _exp_order_probe(cfg, seed, threads):
    W1 = _channel(cfg.get("w1"), "w1")
    W2 = _channel(cfg.get("w2"), "w2")
    n = _n_of(cfg)
    K = int(cfg["K"])
    rep = polar_order_probe(W1, W2, n, K, int(cfg.get("trials", 1000)), seed, threads=threads)
    return PROBE_COLUMNS, [tuple(rep.csv_row())]


def _exp_glrt(cfg, seed, threads):
    n = _n_of(cfg)
    N = 1 << n
    members = ChannelClass(tuple(_channel(d, "class member") for d in cfg["class"]))
    truth = _channel(cfg.get("channel"), "channel")
    K = int(cfg["K"])
    trials = int(cfg.get("trials", 1000))
    spec = compound_construct(members, n, K, int(cfg.get("mu", DEFAULT_MU)))
    rows = []
    for name, metric in (("matched", DecodeMetric.matched()), ("glrt", DecodeMetric.glrt(members))):
        errs, t = block_error_rate([truth] * N, spec, metric, trials, seed, "glrt/frames", threads)
        p = errs / t
        rows.append((name, t, errs, p, math.sqrt(p * (1 - p) / t)))
    return ("decoder", "trials", "errors", "bler", "se"), rows


def _exp_construct(cfg, seed, threads):
    n = _n_of(cfg)
    N = 1 << n
    chans = _channel_list(cfg, N)
    synth = synthesize(chans, int(cfg.get("mu", DEFAULT_MU)))
    rows = [(r.index, r.z, r.i, "") for r in synth.reports]
    return ("index", "z", "i", "mc_error"), rows


EXPERIMENT_KINDS = {
    "polarization": _exp_polarization,
    "bler_sweep": _exp_bler_sweep,
    "scaling": _exp_scaling,
    "mismatched_rate": _exp_mismatched_rate,
    "e0_scan": _exp_e0_scan,
    "order_probe": _exp_order_probe,
    "glrt": _exp_glrt,
    "construct": _exp_construct,
}


def rows_to_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def load_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigError("config must be a JSON object with a 'kind' field")
    return cfg


def run_config(cfg: dict, seed: Optional[int] = None, threads: Optional[int] = None) -> tuple:
    """Run one experiment in memory; returns ``(columns, rows, seed)``."""
    kind = cfg.get("kind")
    if kind not in EXPERIMENT_KINDS:
        raise UnknownExperimentError(f"unknown experiment kind {kind!r}; known: {', '.join(sorted(EXPERIMENT_KINDS))}")
    seed = int(cfg.get("seed", 0) if seed is None else seed)
    try:
        columns, rows = EXPERIMENT_KINDS[kind](cfg, seed, threads)
    except KeyError as exc:
        raise ConfigError(f"missing config field {exc}") from None
    return columns, rows, seed


def run_experiment(config_path, out_dir=".", seed: Optional[int] = None, threads: Optional[int] = None) -> dict:
    """Run the experiment described by ``config_path``; write CSV and manifest."""
    cfg = load_config(config_path)
    t0 = time.perf_counter()
    columns, rows, seed = run_config(cfg, seed, threads)
    wall = time.perf_counter() - t0
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_name = f"{cfg['kind']}.csv"
    (out / csv_name).write_text(rows_to_csv(columns, rows), encoding="utf-8")
    manifest = {
        "config": cfg,
        "kind": cfg["kind"],
        "seed": seed,
        "threads": threads,
        "columns": list(columns),
        "rows": len(rows),
        "csv": csv_name,
        "wall_time_s": wall,
        "versions": {
            "polarlab": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8")
    return manifest


# ---------------------------------------------------------------- invariant suite


def verify(seed: int = 0) -> list:
    """Quick invariant checks; returns ``(name, passed, detail)`` tuples."""
    rng = np.random.default_rng(seed)
    chans = [random_channel(int(rng.integers(2, 9)), rng) for _ in range(50)]
    chans += [make_bec(e) for e in (0.0, 0.3, 0.5, 1.0)] + [make_bsc(p) for p in (0.0, 0.11, 0.5)]
    out = []

    worst = max(abs(l - r) for l, r in (conservation_check(W, W) for W in chans))
    out.append(("capacity conservation", worst <= 1e-10, f"max deviation {worst:.3g}"))

    bad = 0
    for W in chans:
        pair = transform(W, W)
        bad += abs(bhattacharyya(pair.plus) - bhattacharyya(W) ** 2) > 1e-12
    out.append(("Z(W+) = Z(W)^2", bad == 0, f"{bad} violations"))

    bad = 0
    for W in chans:
        d, db, ds = extremal_split_check(W)
        bad += not (ds - 1e-9 <= d <= db + 1e-9)
    out.append(("BEC/BSC extremal split", bad == 0, f"{bad} violations"))

    bad = sum(c < p - 1e-10 for W in chans for c, p in [e0_improvement_check(W, r) for r in (0.5, 1, 2)])
    out.append(("E0 improvement", bad == 0, f"{bad} violations"))

    bad = sum(abs(gallager_e0(W, 1) - (1 - math.log2(1 + bhattacharyya(W)))) > 1e-12 for W in chans)
    out.append(("E0(1) = 1 - log2(1 + Z)", bad == 0, f"{bad} violations"))

    bad = sum(not r.in_interval for W in chans for r in e0_extremality_scan(W, 1.0, [0.25, 2, 4]))
    out.append(("E0 extremality scan", bad == 0, f"{bad} out of interval"))

    n = 6
    spec = CodeSpec(n, rng.random(1 << n) < 0.5)
    u = spec.embed(rng.integers(0, 2, (20, spec.K)))
    dec = SCDecoder(spec)
    u_hat, _, _ = dec.decode_llr(np.where(encode(u) == 0, 40.0, -40.0))
    ok = bool(np.array_equal(u_hat, u)) and dec.llr_updates == schedule_count(n)
    out.append(("noiseless SC round trip", ok, f"{dec.llr_updates} LLR updates"))

    W = make_quantized_bawgn(1.0, 16)
    cap = symmetric_capacity(W)
    out.append(("BAWGN capacity in (0, 1)", 0 < cap < 1, f"I = {cap:.6f}"))
    return out
