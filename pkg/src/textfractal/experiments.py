"""Chapter-order studies, permutation ensembles and surrogate tests.

Every member of an ensemble or surrogate batch gets the seed ``seed + i``,
and results are collected in member order, so outputs do not depend on the
number of worker threads.
"""
from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import EnsembleDegraded, SpectrumFoldedWarning, TextFractalError
from .ingest import ChapterizedCorpus
from .mfdfa import (FluctuationMatrix, MfdfaConfig, MfdfaResult, analyze_fluctuations,
                    compute_grid)
from .series import (Permutation, TimeSeries, as_array, concat_in_order, derive_seed,
                     fourier_phase_surrogate, longest_constant_run, polynomial_runs,
                     random_permutation, shuffle_sentences)

log = logging.getLogger(__name__)

MAX_FAILURE_FRACTION = 0.10


def corpus_run_bound(corpus: ChapterizedCorpus, degree=0) -> int:
    """Upper bound on the longest polynomial run (see ``polynomial_runs``)
    over every chapter order.

    A run in a concatenation is either inside one chapter, or a trailing run
    of one chapter, any number of whole chapters, and a leading run of
    another.  For constant runs (degree 0) the values must agree, which
    gives a tight bound; otherwise the bound adds the longest trailing and
    leading runs and the sizes of all chapters that are runs themselves.
    """
    if degree > 0:
        runs = [polynomial_runs(c, degree) for c in corpus.chapters]
        inside = max(r[0] for r in runs)
        whole = sum(c.size for c, r in zip(corpus.chapters, runs) if r[0] == c.size)
        return int(max(inside, max(r[2] for r in runs) + max(r[1] for r in runs) + whole))
    bound = max(longest_constant_run(c) for c in corpus.chapters)
    totals, prefixes, suffixes = {}, {}, {}
    for i, c in enumerate(corpus.chapters):
        _, pre, suf = polynomial_runs(c, 0)
        if pre == c.size:
            totals[int(c[0])] = totals.get(int(c[0]), 0) + c.size
        else:
            prefixes.setdefault(int(c[0]), []).append((pre, i))
            suffixes.setdefault(int(c[-1]), []).append((suf, i))
    for value in set(totals) | set(prefixes) | set(suffixes):
        pres = sorted(prefixes.get(value, []), reverse=True)[:2]
        sufs = sorted(suffixes.get(value, []), reverse=True)[:2]
        best_edges = max([p for p, _ in pres[:1]] + [s for s, _ in sufs[:1]] + [0])
        for s, i in sufs:
            for p, j in pres:
                if i != j:
                    best_edges = max(best_edges, s + p)
        bound = max(bound, totals.get(value, 0) + best_edges)
    return int(bound)


def resolve_for_corpus(cfg: MfdfaConfig, corpus: ChapterizedCorpus) -> MfdfaConfig:
    """One configuration valid for every chapter order of ``corpus``."""
    cfg = cfg or MfdfaConfig()
    if cfg.is_resolved:
        return cfg
    T = int(sum(c.size for c in corpus.chapters))
    return cfg.resolve(T=T, run_bound=corpus_run_bound(corpus, cfg.m - 1))


def _run(series, cfg, threads=1) -> MfdfaResult:
    F = compute_grid(series, cfg, threads=threads)
    return analyze_fluctuations(F, cfg)


def run_order_study(corpus: ChapterizedCorpus, orders: Sequence[Permutation],
                    cfg: MfdfaConfig = None, threads=1) -> list:
    """Full MFDFA for each chapter order, all with one shared configuration."""
    cfg = resolve_for_corpus(cfg, corpus)
    series = [concat_in_order(corpus, perm) for perm in orders]
    return [_run(s, cfg, threads) for s in series]


def _summary_stats(values):
    v = np.asarray([x for x in values if x is not None and np.isfinite(x)], dtype=float)
    if v.size == 0:
        return None
    return {"mean": float(v.mean()), "std": float(v.std()), "min": float(v.min()),
            "max": float(v.max())}


@dataclass
class EnsembleMember:
    index: int
    seed: int
    order: tuple
    summary: Optional[dict] = None
    error: Optional[str] = None
    log_F: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def ok(self):
        return self.error is None


@dataclass
class EnsembleResult:
    n_members: int
    seed: int
    config: MfdfaConfig
    members: list
    mean_F: Optional[FluctuationMatrix]
    ensemble: Optional[MfdfaResult]

    @property
    def seeds(self):
        return [m.seed for m in self.members]

    @property
    def failures(self):
        return [m for m in self.members if not m.ok]

    def member_values(self, key):
        return [m.summary[key] for m in self.members if m.ok]

    def summary(self):
        keys = ("delta_alpha", "A_alpha", "alpha_0", "H", "delta_h")
        return {
            "n_members": self.n_members,
            "n_failed": len(self.failures),
            "seed": self.seed,
            "average_then_fit": self.ensemble.summary() if self.ensemble else None,
            "fit_then_average": {k: _summary_stats(self.member_values(k)) for k in keys},
        }


def run_permutation_ensemble(corpus: ChapterizedCorpus, n_perms: int, seed,
                             cfg: MfdfaConfig = None, threads=1,
                             keep_members=True) -> EnsembleResult:
    """MFDFA over ``n_perms`` random chapter orders.

    The ensemble spectrum is fitted to the geometric mean of F_q(s) over the
    members; per-member summaries are kept as well.  A failing member is
    logged and skipped; more than 10% failures raises EnsembleDegraded with
    the partial result attached.
    """
    if n_perms < 1:
        raise ValueError("n_perms must be >= 1")
    cfg = resolve_for_corpus(cfg, corpus)
    n = corpus.chapter_count

    def job(i):
        member_seed = derive_seed(seed, i)
        perm = random_permutation(n, member_seed)
        member = EnsembleMember(i, member_seed, perm.order)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", SpectrumFoldedWarning)
                res = _run(concat_in_order(corpus, perm), cfg)
        except TextFractalError as exc:
            member.error = f"{type(exc).__name__}: {exc}"
            return member
        member.summary = res.summary()
        member.log_F = np.log(res.fluct.F)
        return member

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            members = list(pool.map(job, range(n_perms)))
    else:
        members = [job(i) for i in range(n_perms)]

    good = [m for m in members if m.ok]
    mean_F = ensemble = None
    if good:
        acc = np.zeros_like(good[0].log_F)
        for m in good:  # fixed member order keeps the sum reproducible
            acc += m.log_F
        T = int(sum(c.size for c in corpus.chapters))
        mean_F = FluctuationMatrix(q=np.asarray(cfg.q_grid, dtype=float),
                                   scales=np.asarray(cfg.scale_grid, dtype=int),
                                   F=np.exp(acc / len(good)),
                                   window_counts=np.array([T // s for s in cfg.scale_grid]),
                                   fit_range=tuple(cfg.fit_range), m=cfg.m)
        ensemble = analyze_fluctuations(mean_F, cfg)
    if not keep_members:
        for m in members:
            m.log_F = None
    result = EnsembleResult(n_perms, int(seed), cfg, members, mean_F, ensemble)
    n_failed = len(members) - len(good)
    for m in members:
        if not m.ok:
            log.warning("ensemble member %d (seed %d) failed: %s", m.index, m.seed, m.error)
    if n_failed > MAX_FAILURE_FRACTION * n_perms or not good:
        raise EnsembleDegraded(n_failed, n_perms, result)
    return result


@dataclass
class SurrogateReport:
    kind: str
    n: int
    seed: int
    config: MfdfaConfig
    original: dict
    surrogates: list          # dicts with the member seed and summary
    flags: dict

    def aggregate(self):
        keys = ("alpha_0", "delta_alpha", "A_alpha", "H", "delta_h")
        return {k: _summary_stats([s[k] for s in self.surrogates]) for k in keys}

    def to_dict(self):
        return {"kind": self.kind, "n": self.n, "seed": self.seed,
                "original": self.original, "aggregate": self.aggregate(),
                "surrogates": self.surrogates, "flags": self.flags}


SURROGATES = {"shuffle": shuffle_sentences, "fourier": fourier_phase_surrogate}


def _amplitude_deviation(u, v):
    a, b = np.abs(np.fft.rfft(u)), np.abs(np.fft.rfft(v))
    scale = max(a.max(), np.finfo(float).tiny)
    return float(np.abs(a - b).max() / scale)


def run_surrogate_test(s, kind, n, seed, cfg: MfdfaConfig = None, threads=1) -> SurrogateReport:
    """Compare the spectrum of ``s`` with ``n`` surrogates of one kind.

    Flags are descriptive checks, not hypothesis tests: the surrogate's
    defining property (histogram or amplitude spectrum), whether the
    surrogate spectra sit at alpha_0 = 1/2, and whether they are narrower
    than the original.
    """
    if kind not in SURROGATES:
        raise ValueError(f"unknown surrogate kind {kind!r}; choose from {sorted(SURROGATES)}")
    if n < 1:
        raise ValueError("n must be >= 1")
    u = as_array(s)
    cfg = (cfg or MfdfaConfig())
    if not cfg.is_resolved:
        cfg = cfg.resolve(u)
    make = SURROGATES[kind]

    def job(i):
        member_seed = derive_seed(seed, i)
        sur = make(TimeSeries(u), member_seed).values
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SpectrumFoldedWarning)
            res = _run(sur, cfg)
        out = {"seed": member_seed}
        out.update(res.summary())
        if kind == "fourier":
            out["amplitude_deviation"] = _amplitude_deviation(u, sur)
        else:
            out["histogram_preserved"] = bool(np.array_equal(np.sort(u), np.sort(sur)))
        return out

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SpectrumFoldedWarning)
        original = _run(u, cfg, threads).summary()
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            members = list(pool.map(job, range(n)))
    else:
        members = [job(i) for i in range(n)]

    a0 = np.mean([m["alpha_0"] for m in members])
    da = np.mean([m["delta_alpha"] for m in members])
    flags = {"alpha_0_near_half": bool(abs(a0 - 0.5) <= 0.05),
             "narrower_than_original": bool(da < original["delta_alpha"])}
    if kind == "fourier":
        flags["amplitude_preserved"] = bool(max(m["amplitude_deviation"] for m in members) < 1e-10)
    else:
        flags["histogram_preserved"] = all(m["histogram_preserved"] for m in members)
    return SurrogateReport(kind, int(n), int(seed), cfg, original, members, flags)
