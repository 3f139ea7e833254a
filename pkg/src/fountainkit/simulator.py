"""Erasure-channel experiments and Monte Carlo oracles.

Each trial transmits symbols in sequence, drops each independently with the
erasure probability, feeds the survivors to the chosen decoder, and records
how many symbols were transmitted/received when decoding completed.  Trials
are reproducible and embarrassingly parallel: trial i draws from its own
stream seeded by (seed, i), so results do not depend on scheduling or
worker count.  The decode loops run on the kernels in ``_kernels`` (decode
completion depends only on selectors, not payload bytes); the
payload-carrying decoders in ``codec`` are the reference implementation and
the test suite checks both agree on completion counts.

Overhead is reported on received (non-erased) symbols; the transmitted
count at completion is recorded alongside so either reading is available.
"""

from __future__ import annotations

import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .distributions import (
    PdsSpec,
    cprime_pds,
    erasure_transform,
    lt_pds,
)
from .fountain_matrix import fountain_matrix, gamma_profile, identity_product
from .gf2 import mask_to_bits
from .lattice import SubspaceLattice, enumerate_subspaces

CODES = ("lt", "cprime", "custom")
DECODERS = ("bp", "ge")
DEFAULT_MAX_SYMBOLS_FACTOR = 20


@dataclass(frozen=True)
class SimConfig:
    code: str
    k: int
    c: float = 0.03
    delta: float = 0.5
    eps: float = 0.0
    trials: int = 1
    seed: int = 0
    decoder: str = "bp"
    max_symbols: int | None = None
    pds: PdsSpec | None = None  # required iff code == "custom"

    def __post_init__(self):
        if self.code not in CODES:
            raise ValueError(f"unknown code {self.code!r} (choose from {CODES})")
        if self.decoder not in DECODERS:
            raise ValueError(f"unknown decoder {self.decoder!r} (choose from {DECODERS})")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 0 <= self.eps < 1:
            raise ValueError(f"erasure probability {self.eps} must be in [0, 1)")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.code == "custom":
            if self.pds is None:
                raise ValueError("custom code requires a distribution sequence")
            if self.pds.k != self.k:
                raise ValueError(f"sequence is over F_2^{self.pds.k}, config has k={self.k}")
        elif self.code == "lt" or self.code == "cprime":
            if self.c <= 0 or not 0 < self.delta < 1:
                raise ValueError(f"invalid soliton parameters c={self.c}, delta={self.delta}")
        cap = self.resolved_max_symbols
        if cap < self.k:
            raise ValueError(f"max_symbols {cap} must be >= k={self.k}")

    @property
    def resolved_max_symbols(self) -> int:
        if self.max_symbols is not None:
            return self.max_symbols
        return DEFAULT_MAX_SYMBOLS_FACTOR * self.k


@dataclass(frozen=True)
class OverheadRecord:
    """Per-trial decode cost: symbol counts when decoding completed."""

    transmitted: int
    received: int
    success: bool

    def __post_init__(self):
        if self.received > self.transmitted:
            raise ValueError("received cannot exceed transmitted")


@dataclass(frozen=True)
class OverheadStats:
    """Aggregate of one experiment; the histogram (with its -1 failure
    bucket) always totals the trial count."""

    k: int
    trials: int
    failures: int
    histogram: dict[int, int]  # received-overhead value -> count; -1 = failed trials
    mean_overhead: float | None
    mean_received: float | None
    mean_transmitted: float | None
    quantiles: dict[str, int]

    @classmethod
    def from_records(cls, k: int, records: list[OverheadRecord]) -> "OverheadStats":
        hist: Counter = Counter()
        received = []
        transmitted = []
        failures = 0
        for rec in records:
            if rec.success:
                hist[rec.received - k] += 1
                received.append(rec.received)
                transmitted.append(rec.transmitted)
            else:
                failures += 1
                hist[-1] += 1
        if received:
            recv = np.array(received, dtype=np.float64)
            trans = np.array(transmitted, dtype=np.float64)
            ov = np.array(received, dtype=np.int64) - k
            qs = np.percentile(ov, [50, 90, 99], method="nearest")
            quantiles = {"p50": int(qs[0]), "p90": int(qs[1]), "p99": int(qs[2])}
            mean_recv = float(recv.mean())
            mean_trans = float(trans.mean())
            mean_overhead = (mean_recv - k) / k
        else:
            quantiles = {}
            mean_recv = mean_trans = mean_overhead = None
        return cls(
            k=k,
            trials=len(records),
            failures=failures,
            histogram=dict(sorted(hist.items())),
            mean_overhead=mean_overhead,
            mean_received=mean_recv,
            mean_transmitted=mean_trans,
            quantiles=quantiles,
        )

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "trials": self.trials,
            "failures": self.failures,
            "histogram": {str(o): c for o, c in sorted(self.histogram.items())},
            "mean_overhead": self.mean_overhead,
            "mean_received": self.mean_received,
            "mean_transmitted": self.mean_transmitted,
            "quantiles": self.quantiles,
        }

    def histogram_rows(self) -> list[tuple[int, int]]:
        return sorted(self.histogram.items())


@lru_cache(maxsize=64)
def _builtin_pds(code: str, k: int, c: float, delta: float) -> PdsSpec:
    if code == "lt":
        return lt_pds(k, c, delta)
    if code == "cprime":
        return cprime_pds(k, c, delta)
    raise ValueError(f"no builtin sequence for code {code!r}")


def _resolve_pds(cfg: SimConfig) -> PdsSpec:
    if cfg.code == "custom":
        return cfg.pds
    return _builtin_pds(cfg.code, cfg.k, cfg.c, cfg.delta)


def _sample_chunk(pds: PdsSpec, t0: int, m: int, rng) -> list[np.ndarray]:
    """Supports for transmissions t0 .. t0+m-1, batching runs of equal
    distributions (object identity) to keep draw order well defined."""
    out: list[np.ndarray] = []
    t = t0
    end = t0 + m
    while t < end:
        dist = pds.at(t)
        run = 1
        while t + run < end and pds.at(t + run) is dist:
            run += 1
        out.extend(dist.sample_supports(rng, run))
        t += run
    return out


def _decode_count(decoder: str, supports: list[np.ndarray], k: int) -> int:
    """First 1-based survivor index at which decoding completes, or -1."""
    if decoder == "bp":
        if supports:
            indices = np.concatenate(supports).astype(np.int64)
        else:
            indices = np.zeros(0, dtype=np.int64)
        indptr = np.zeros(len(supports) + 1, dtype=np.int64)
        for i, sup in enumerate(supports):
            indptr[i + 1] = indptr[i] + len(sup)
        t_done, _ = _kernels.bp_peel_first_done(indices, indptr, k)
        return int(t_done)
    words = _kernels.pack_supports_to_words(supports, k)
    t_done, _ = _kernels.ge_first_done(words, k)
    return int(t_done)


def run_trial(cfg: SimConfig, trial_index: int) -> OverheadRecord:
    """One seeded trial: generate, erase, decode, record the completion cost.

    The trial stream is seeded by (seed, trial_index).  Within a chunk all
    selector draws happen first, then the chunk's erasure coin flips."""
    pds = _resolve_pds(cfg)
    rng = np.random.default_rng([cfg.seed, trial_index])
    cap = cfg.resolved_max_symbols
    first = min(cap, max(cfg.k + 8, int(1.3 * cfg.k / (1.0 - cfg.eps)) + 1))
    step = max(32, cfg.k // 3)

    supports: list[np.ndarray] = []
    t_of: list[int] = []
    transmitted = 0
    while transmitted < cap:
        m = min(first if transmitted == 0 else step, cap - transmitted)
        chunk = _sample_chunk(pds, transmitted + 1, m, rng)
        erased = rng.random(m) < cfg.eps
        for i in range(m):
            if not erased[i]:
                supports.append(chunk[i])
                t_of.append(transmitted + 1 + i)
        transmitted += m
        if not supports:
            continue
        done_at = _decode_count(cfg.decoder, supports, cfg.k)
        if done_at >= 0:
            return OverheadRecord(
                transmitted=t_of[done_at - 1], received=done_at, success=True
            )
    return OverheadRecord(transmitted=transmitted, received=len(supports), success=False)


def _run_trial_range(cfg: SimConfig, start: int, stop: int) -> list[OverheadRecord]:
    return [run_trial(cfg, i) for i in range(start, stop)]


def _worker_count(trials: int) -> int:
    env = os.environ.get("FOUNTAIN_THREADS", "")
    if env:
        workers = max(1, int(env))
    else:
        workers = os.cpu_count() or 1
    return min(workers, trials)


def run_experiment(cfg: SimConfig) -> OverheadStats:
    """Run all trials (fanning out to processes when FOUNTAIN_THREADS or the
    machine allows) and aggregate; the reduction is ordered by trial index,
    so the result is identical for any worker count."""
    workers = _worker_count(cfg.trials)
    if workers <= 1:
        records = _run_trial_range(cfg, 0, cfg.trials)
    else:
        per = (cfg.trials + workers - 1) // workers
        ranges = [
            (start, min(start + per, cfg.trials))
            for start in range(0, cfg.trials, per)
        ]
        records = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(
                _run_trial_range,
                [cfg] * len(ranges),
                [a for a, _ in ranges],
                [b for _, b in ranges],
            ):
                records.extend(part)
    return OverheadStats.from_records(cfg.k, records)


def mc_rank_distribution(
    pds: PdsSpec, n: int, samples: int, seed: int, eps: float = 0.0
) -> np.ndarray:
    """Empirical Pr(rank >= r) for r = 0..k after n transmissions.

    Samples generator matrices column by column from the sequence (with the
    erasure transform applied when eps > 0) and tallies ranks.  Needs
    k <= 62 (masks are packed in int64); oracle duty only ever uses small k.
    """
    k = pds.k
    if k > 62:
        raise ValueError("rank sampling packs masks into int64: k must be <= 62")
    if n < 0:
        raise ValueError("n must be >= 0")
    rng = np.random.default_rng([seed])
    cols = np.zeros((samples, n), dtype=np.int64)
    for t in range(1, n + 1):
        dist = erasure_transform(pds.at(t), eps)
        cols[:, t - 1] = dist.sample_masks(rng, samples)
    ranks = _kernels.rank_batch(cols, k)
    return np.array([(ranks >= r).mean() for r in range(k + 1)])


def verify_design_optimality(
    k: int,
    pds_prefix,
    lattice: SubspaceLattice | None = None,
    atol: float = 1e-10,
) -> dict:
    """Check a design prefix against the greedy optimality criterion.

    For every n in 1..len(prefix)-1 and every r in 1..k, the support of
    distribution n+1 must lie inside the gamma argmin set computed from the
    first n distributions.  Reports every violating (n, r) cell with the
    offending selectors; a single-distribution prefix passes vacuously.
    The first distribution must place no mass on the zero vector.
    """
    lat = lattice if lattice is not None else enumerate_subspaces(k)
    dists = [d.to_explicit() for d in pds_prefix]
    if not dists:
        raise ValueError("empty design prefix")
    report: dict = {
        "k": k,
        "prefix_len": len(dists),
        "d1_zero_mass": dists[0].mass_of(0),
        "checked_cells": 0,
        "violations": [],
    }
    f = identity_product(lat)
    for n in range(1, len(dists)):
        f = f.extend(fountain_matrix(lat, dists[n - 1]))
        support = set(dists[n].probs)
        for r in range(1, k + 1):
            report["checked_cells"] += 1
            argmin = gamma_profile(f, r - 1, atol).argmin
            bad = sorted(m for m in support if m not in argmin)
            if bad:
                report["violations"].append(
                    {"n": n, "r": r, "masks": [mask_to_bits(m, k) for m in bad]}
                )
    report["ok"] = not report["violations"] and report["d1_zero_mass"] == 0.0
    return report
