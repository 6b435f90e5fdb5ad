"""Reproducible Monte-Carlo campaigns.

Trial t draws all of its randomness from a Philox stream keyed on
``(master_seed, t)``, so counts do not depend on how trials are split
across workers.  Trials are evaluated in fixed-size chunks; with a failure
target, the run stops exactly at the trial that produced the target-th
failure and later trials are discarded.
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from . import scldpc
from .channels import BEC, QEC, QSC, QSCE, RBC, SPBC, apply_channel, burst_span, validate
from .gfft import fft_staged
from .polar_codec import block_failed, sc_decode_erasure, sc_decode_hard, sc_decode_soft
from .polar_design import PolarDesign

MASK64 = (1 << 64) - 1


class ConfigError(ValueError):
    pass


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    key = np.array([master_seed & MASK64, trial & MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def wilson_interval(k: int, n: int, conf: float = 0.95) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    z = norm.ppf(0.5 + conf / 2)
    ph = k / n
    den = 1 + z * z / n
    mid = (ph + z * z / (2 * n)) / den
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den
    lo = 0.0 if k == 0 else max(0.0, mid - half)
    hi = 1.0 if k == n else min(1.0, mid + half)
    return float(min(lo, ph)), float(max(hi, ph))


# ---------------------------------------------------------------------------
# systems under test

@dataclass(frozen=True)
class PolarSystem:
    design: PolarDesign
    decoder: str = "auto"  # auto | erasure | hard | soft

    def resolve_decoder(self, channel) -> str:
        plan = self.design.plan
        soft_ok = plan.field.m == 1 and all(x == 2 for x in plan.factors)
        dec = self.decoder
        if dec == "auto":
            if isinstance(channel, (QEC, BEC)):
                dec = "erasure"
            else:
                dec = "soft" if soft_ok else "hard"
        if dec == "soft" and not soft_ok:
            raise ConfigError("soft decoding needs a prime field and N = 2^n")
        if dec == "erasure" and not isinstance(channel, (QEC, BEC)):
            raise ConfigError("the erasure decoder cannot handle symbol errors")
        if dec not in ("erasure", "hard", "soft"):
            raise ConfigError(f"unknown decoder '{dec}'")
        return dec

    def describe(self) -> dict:
        p = self.design.plan
        return {"system": "polar", "N": p.n_len, "q": p.field.q}


@dataclass(frozen=True)
class LdpcSystem:
    params: scldpc.EnsembleParams

    def describe(self) -> dict:
        p = self.params
        return {"system": f"scldpc-{p.flavor}", "M": p.M, "L": p.L, "w": p.w, "dv": p.dv, "dc": p.dc}


@dataclass(frozen=True)
class BernoulliSystem:
    """Synthetic system whose trials fail independently with probability p."""
    p: float

    def describe(self) -> dict:
        return {"system": f"bernoulli:{self.p:g}"}


@dataclass(frozen=True)
class CampaignConfig:
    system: object
    channel: object = None
    target_failures: int | None = None
    max_trials: int | None = None
    master_seed: int = 0
    metric: str = "block"
    workers: int = 1
    chunk: int = 128

    def __post_init__(self):
        if self.target_failures is None and self.max_trials is None:
            raise ConfigError("need target_failures or max_trials")
        if self.target_failures is not None and self.target_failures < 1:
            raise ConfigError("target_failures must be at least 1")
        if self.max_trials is not None and self.max_trials < 0:
            raise ConfigError("max_trials must be non-negative")
        if self.metric not in ("block", "bit"):
            raise ConfigError(f"unknown metric '{self.metric}'")
        if self.workers < 1 or self.chunk < 1:
            raise ConfigError("workers and chunk must be positive")
        sysm, ch = self.system, self.channel
        if isinstance(sysm, PolarSystem):
            if not isinstance(ch, (QEC, BEC, QSC, QSCE)):
                raise ConfigError(f"channel {ch} does not apply to a polar code")
            sysm.resolve_decoder(ch)
        elif isinstance(sysm, LdpcSystem):
            if not isinstance(ch, (BEC, QEC, SPBC, RBC)):
                raise ConfigError(f"channel {ch} does not apply to a binary LDPC code on erasures")
            sysm.params.require_L()
        elif not isinstance(sysm, BernoulliSystem):
            raise ConfigError(f"unknown system {sysm!r}")
        if ch is not None:
            validate(ch)


@dataclass
class TrialReport:
    trials: int
    failures: int
    bit_errors: int
    bits: int
    estimate: float
    ci_lo: float
    ci_hi: float
    seconds: float
    master_seed: int
    streams: int
    workers: int
    metric: str = "block"
    extra: dict = field(default_factory=dict)

    def counts(self) -> tuple:
        """Everything except wall time; equal across reruns of one config."""
        return (self.trials, self.failures, self.bit_errors, self.bits, self.estimate,
                self.ci_lo, self.ci_hi, self.master_seed)


# ---------------------------------------------------------------------------
# trial evaluation

def _polar_chunk(cfg: CampaignConfig, start: int, stop: int):
    sysm = cfg.system
    d = sysm.design
    plan = d.plan
    q = plan.field.q
    dec = sysm.resolve_decoder(cfg.channel)
    T = stop - start
    rngs = [trial_rng(cfg.master_seed, t) for t in range(start, stop)]
    u = np.zeros((d.n, T), dtype=np.int64)
    for i, r in enumerate(rngs):
        u[d.info_set, i] = r.integers(0, q, d.k)
    v = fft_staged(u, plan, inverse=True)
    y = np.empty_like(v)
    for i, r in enumerate(rngs):
        y[:, i] = apply_channel(cfg.channel, v[:, i], r, q=q)
    if dec == "soft":
        u_hat = np.stack([sc_decode_soft(y[:, i], d, cfg.channel) for i in range(T)], axis=1)
    elif dec == "erasure":
        u_hat = sc_decode_erasure(y, d)
    else:
        u_hat = sc_decode_hard(y, d)
    bad = (u_hat[d.info_set] != u[d.info_set])
    return bad.any(axis=0), bad.sum(axis=0), np.full(T, d.k)


def _ldpc_trial(p: scldpc.EnsembleParams, channel, rng):
    """Erased-VN count left by peeling for one freshly sampled code.

    The all-zero codeword suffices on erasure channels, and only the erased
    VNs' neighbourhoods matter, so burst channels sample just the spatial
    positions the burst covers.
    """
    L, M = p.L, p.M
    if isinstance(channel, (BEC, QEC)):
        g = scldpc.sample_graph(p, rng)
        erased = rng.random(g.n_vn) < channel.epsilon
    else:
        if isinstance(channel, SPBC):
            z = channel.position if channel.position is not None else (L + 1) // 2
            if not 1 <= z <= L:
                raise scldpc.EnsembleError(f"burst position {z} outside 1..{L}")
            start, stop = (z - 1) * M, z * M
        else:
            start, stop = burst_span(channel, (L, M), rng)
        if stop <= start:
            return 0
        z_lo, z_hi = start // M + 1, (stop - 1) // M + 1
        g = scldpc.sample_graph(p, rng, positions=(z_lo, z_hi))
        off = (z_lo - 1) * M
        erased = np.zeros(g.n_vn, dtype=bool)
        erased[start - off:stop - off] = True
    return int(scldpc.peel_decode(g, erased).size)


def _ldpc_chunk(cfg: CampaignConfig, start: int, stop: int):
    p = cfg.system.params
    res = np.array([_ldpc_trial(p, cfg.channel, trial_rng(cfg.master_seed, t))
                    for t in range(start, stop)], dtype=np.int64)
    return res > 0, res, np.full(stop - start, p.n_vn)


def _bernoulli_chunk(cfg: CampaignConfig, start: int, stop: int):
    f = np.array([trial_rng(cfg.master_seed, t).random() < cfg.system.p
                  for t in range(start, stop)], dtype=bool)
    return f, f.astype(np.int64), np.ones(stop - start, dtype=np.int64)


def run_chunk(cfg: CampaignConfig, start: int, stop: int):
    """Per-trial (failed, bit errors, bits) for trials start..stop-1."""
    if isinstance(cfg.system, PolarSystem):
        return _polar_chunk(cfg, start, stop)
    if isinstance(cfg.system, LdpcSystem):
        return _ldpc_chunk(cfg, start, stop)
    return _bernoulli_chunk(cfg, start, stop)


def _run_chunk_args(args):
    return run_chunk(*args)


def run_campaign(cfg: CampaignConfig) -> TrialReport:
    t0 = time.perf_counter()
    limit = cfg.max_trials if cfg.max_trials is not None else math.inf
    target = cfg.target_failures if cfg.target_failures is not None else math.inf
    trials = failures = bit_err = bits = 0
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        nxt = 0
        done = False
        while not done and nxt < limit:
            jobs = []
            for _ in range(cfg.workers):
                if nxt >= limit:
                    break
                stop = int(min(nxt + cfg.chunk, limit))
                jobs.append((cfg, nxt, stop))
                nxt = stop
            results = pool.map(_run_chunk_args, jobs) if pool else map(_run_chunk_args, jobs)
            for fail, be, nb in results:
                if done:
                    break
                need = target - failures
                cum = np.cumsum(fail)
                if cum.size and cum[-1] >= need:
                    cut = int(np.searchsorted(cum, need)) + 1
                    fail, be, nb = fail[:cut], be[:cut], nb[:cut]
                    done = True
                trials += fail.size
                failures += int(fail.sum())
                bit_err += int(be.sum())
                bits += int(nb.sum())
    finally:
        if pool:
            pool.shutdown()
    if cfg.metric == "block":
        k, n = failures, trials
    else:
        k, n = bit_err, bits
    est = k / n if n else 0.0
    lo, hi = wilson_interval(k, n)
    return TrialReport(trials, failures, bit_err, bits, est, lo, hi,
                       time.perf_counter() - t0, cfg.master_seed, trials, cfg.workers, cfg.metric)


# ---------------------------------------------------------------------------
# sweeps

CSV_COLUMNS = ["system", "channel", "M", "L", "w", "dv", "dc", "N", "q", "trials", "failures",
               "p_hat", "ci_lo", "ci_hi", "seed", "seconds", "error"]


def campaign_row(cfg: CampaignConfig, rep: TrialReport | None, error: str = "") -> dict:
    row = {c: "" for c in CSV_COLUMNS}
    row.update(cfg.system.describe())
    row["channel"] = str(cfg.channel) if cfg.channel is not None else ""
    row["seed"] = cfg.master_seed
    if rep is not None:
        row.update(trials=rep.trials, failures=rep.failures, p_hat=rep.estimate,
                   ci_lo=rep.ci_lo, ci_hi=rep.ci_hi, seconds=round(rep.seconds, 3))
    row["error"] = error
    return row


def sweep(cfgs) -> list[dict]:
    """One row per config, in input order; a failing config yields an error row."""
    cfgs = list(cfgs)
    if not cfgs:
        raise ConfigError("empty sweep")
    rows = []
    for cfg in cfgs:
        try:
            rows.append(campaign_row(cfg, run_campaign(cfg)))
        except Exception as exc:  # recorded per row, the sweep carries on
            rows.append(campaign_row(cfg, None, f"{type(exc).__name__}: {exc}"))
    return rows


def rows_to_csv(rows, columns=CSV_COLUMNS) -> str:
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    wr.writeheader()
    for r in rows:
        wr.writerow(r)
    return buf.getvalue()


def default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)
