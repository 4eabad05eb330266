"""Command-line entry point: ``textfractal ingest|analyze|experiment``."""
from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import acf as acf_mod
from . import weibull
from .config import build_config, file_digest, load_config_file
from .errors import EnsembleDegraded, SpectrumFoldedWarning, TextFractalError
from .experiments import (resolve_for_corpus, run_order_study, run_permutation_ensemble,
                          run_surrogate_test)
from .ingest import ChapterizedCorpus, corpus_stats, segment_chapters
from .mfdfa import MfdfaResult, analyze_fluctuations, compute_grid, singularity_spectrum
from .report import read_json, read_series, write_csv, write_json, write_series
from .series import Permutation, concat_in_order, derive_seed, random_permutation, read_permutation

log = logging.getLogger("textfractal")

Q_RANGES = (2.0, 4.0, 7.0)


# ---------------------------------------------------------------------------
# ingest
# ---------------------------------------------------------------------------

def _read_text(path):
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise TextFractalError(f"{path}: {exc.strerror}") from None
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise TextFractalError(f"{path}: invalid UTF-8 at byte offset {exc.start}") from None


def ingest_paths(paths, cfg):
    """Chapters of every file, in path order."""
    chapters, labels, pmdv, chars, offsets = [], [], [], [], []
    for path in paths:
        text = _read_text(path)
        try:
            corpus = segment_chapters(text, cfg, name=Path(path).stem)
        except TextFractalError as exc:
            offset = getattr(exc, "offset", None)
            where = f"{path}" + (f" (char offset {offset})" if offset is not None else "")
            raise TextFractalError(f"{where}: {type(exc).__name__}: {exc}") from exc
        prefix = f"{Path(path).stem}:" if len(paths) > 1 else ""
        chapters += corpus.chapters
        labels += [prefix + lab for lab in corpus.labels]
        pmdv += corpus.pmdv_chapters
        chars += corpus.char_chapters
        offsets += corpus.offsets
    name = Path(paths[0]).stem if len(paths) == 1 else "corpus"
    return ChapterizedCorpus(chapters, labels, name=name, pmdv_chapters=pmdv,
                             char_chapters=chars, offsets=offsets)


def corpus_to_json(corpus):
    return {"name": corpus.name, "chapter_count": corpus.chapter_count,
            "labels": corpus.labels,
            "chapters": [c.tolist() for c in corpus.chapters],
            "pmdv_chapters": [c.tolist() for c in corpus.pmdv_chapters or []],
            "char_chapters": [c.tolist() for c in corpus.char_chapters or []]}


def corpus_from_json(path):
    doc = read_json(path)
    if "chapters" not in doc:
        raise TextFractalError(f"{path}: not a chapters.json document")
    return ChapterizedCorpus([np.asarray(c, dtype=np.int64) for c in doc["chapters"]],
                             list(doc["labels"]), name=doc.get("name", ""),
                             pmdv_chapters=[np.asarray(c) for c in doc.get("pmdv_chapters", [])] or None,
                             char_chapters=[np.asarray(c) for c in doc.get("char_chapters", [])] or None)


def cmd_ingest(rc):
    if not rc.inputs:
        raise TextFractalError("ingest needs at least one input file")
    out = Path(rc.out)
    out.mkdir(parents=True, exist_ok=True)
    digests = [file_digest(p) for p in rc.inputs]
    h = rc.digest(digests)
    corpus = ingest_paths(rc.inputs, rc.ingest)
    slv = np.concatenate(corpus.chapters)
    pmdv = np.concatenate(corpus.pmdv_chapters)
    chars = np.concatenate(corpus.char_chapters)
    write_series(out / "slv.csv", slv, h, "slv_words")
    write_series(out / "pmdv.csv", pmdv, h, "pmdv_words")
    write_series(out / "slv_chars.csv", chars, h, "slv_characters")
    doc = corpus_to_json(corpus)
    if rc.ingest.count_unit == "characters":
        doc["chapters"], doc["word_chapters"] = doc["char_chapters"], doc["chapters"]
    doc["count_unit"] = rc.ingest.count_unit
    write_json(out / "chapters.json", doc, h)
    stats = corpus_stats(corpus, chars)
    write_json(out / "stats.json", {"stats": stats.to_dict(), "n_sentences": int(slv.size),
                                    "n_pmdv": int(pmdv.size),
                                    "config": rc.hashed_view(digests)}, h)
    log.info("ingested %d chapters, %d sentences -> %s", corpus.chapter_count, slv.size, out)
    return 0


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def load_series(path):
    path = Path(path)
    if path.suffix == ".json":
        return corpus_from_json(path).printed_series()
    return read_series(path)


def _is_count_series(u):
    return np.all(u >= 0) and np.all(u == np.round(u))


def write_mfdfa_bundle(out, res: MfdfaResult, h, prefix=""):
    F = res.fluct
    write_csv(out / f"{prefix}fq_matrix.csv", ["s", "q", "F", "M_s"], F.rows(), h)
    write_csv(out / f"{prefix}hurst.csv", ["q", "h", "r2"],
              zip(res.hurst.q, res.hurst.h, res.hurst.r2), h)
    sp = res.spectrum
    write_csv(out / f"{prefix}spectrum.csv", ["q", "alpha", "f", "tau"],
              zip(sp.q, sp.alpha, sp.f_alpha, sp.tau), h)


def qrange_spectra(res: MfdfaResult):
    q_max = float(res.hurst.q[-1])
    ranges = [r for r in Q_RANGES if r <= q_max + 1e-12]
    if not ranges or ranges[-1] < q_max:
        ranges.append(q_max)
    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SpectrumFoldedWarning)
        for r in ranges:
            out.append((r, singularity_spectrum(res.hurst, q_range=(-r, r))))
    return out


def cmd_analyze(rc):
    if len(rc.inputs) != 1:
        raise TextFractalError("analyze takes exactly one series file")
    series = load_series(rc.inputs[0])
    u = np.asarray(series.values, dtype=float)
    out = Path(rc.out)
    out.mkdir(parents=True, exist_ok=True)
    digests = [file_digest(rc.inputs[0])]
    h = rc.digest(digests)
    summary = {"T": int(u.size), "label": series.label, "config": rc.hashed_view(digests)}

    max_lag = rc.extra.get("max_lag") or min(1000, (u.size - 1) // 2)
    max_lag = min(max_lag, (u.size - 1) // 2)
    res_acf = acf_mod.acf(u, max_lag)
    write_csv(out / "acf.csv", ["lag", "rho", "noise_level"],
              ((k, r, res_acf.noise_level) for k, r in zip(res_acf.lags, res_acf.rho)), h)
    if rc.extra.get("loglog"):
        write_csv(out / "acf_loglog.csv", ["log10_lag", "log10_rho", "log10_noise_level"],
                  ((a, b, np.log10(res_acf.noise_level))
                   for a, b in zip(*res_acf.loglog())), h)
    summary["acf"] = {"max_lag": max_lag, "noise_level": res_acf.noise_level,
                      "fraction_below_noise": res_acf.fraction_below_noise()}

    if _is_count_series(u):
        hist = weibull.Histogram.from_series(series.values.astype(np.int64))
        write_csv(out / "histogram.csv", ["k", "count", "frequency"], hist.rows(), h)
        try:
            wf = weibull.fit(hist, include_zero=bool(rc.extra.get("include_zero", False)),
                             weighting=rc.extra.get("weighting", "linear"))
        except TextFractalError as exc:
            summary["weibull"] = {"error": str(exc)}
        else:
            write_json(out / "weibull_fit.json", wf.to_dict(), h)
            k = np.arange(int(hist.k.max()) + 1)
            write_csv(out / "weibull_curve.csv", ["k", "pmf", "log10_pmf"],
                      ((kk, pp, np.log10(pp) if pp > 0 else float("-inf"))
                       for kk, pp in zip(k, weibull.pmf(k, wf.params))), h)
            summary["weibull"] = wf.to_dict()
    else:
        summary["weibull"] = None

    cfg = rc.mfdfa.resolve(u)
    F = compute_grid(u, cfg, threads=rc.threads)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SpectrumFoldedWarning)
        res = analyze_fluctuations(F, cfg)
    write_mfdfa_bundle(out, res, h)
    rows, ranges = [], {}
    for r, sp in qrange_spectra(res):
        rows += [(f"[-{r:g},{r:g}]", q, a, f) for q, a, f in zip(sp.q, sp.alpha, sp.f_alpha)]
        ranges[f"[-{r:g},{r:g}]"] = sp.summary()
    write_csv(out / "spectra_qranges.csv", ["q_range", "q", "alpha", "f"], rows, h)
    summary.update(res.summary())
    summary["q_ranges"] = ranges
    summary["mfdfa_config"] = cfg.to_dict()
    write_json(out / "summary.json", summary, h)
    return 0


# ---------------------------------------------------------------------------
# experiment
# ---------------------------------------------------------------------------

def _run_dir(rc, mode, h):
    d = Path(rc.out) / f"{mode}-{h}"
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_experiment(rc):
    if len(rc.inputs) != 1:
        raise TextFractalError("experiment takes exactly one corpus or series file")
    mode = rc.extra.get("mode", "orders")
    digests = [file_digest(rc.inputs[0])] + [file_digest(p) for p in rc.extra.get("permutation_file", [])]
    h = rc.digest(digests)
    path = Path(rc.inputs[0])

    if mode == "surrogate":
        series = load_series(path)
        kind = rc.extra.get("kind", "fourier")
        n = rc.extra.get("n", 20)
        rep = run_surrogate_test(series, kind, n, rc.seed, rc.mfdfa, threads=rc.threads)
        d = _run_dir(rc, f"surrogate-{kind}", h)
        doc = rep.to_dict()
        doc["mfdfa_config"] = rep.config.to_dict()
        doc["config"] = rc.hashed_view(digests)
        write_json(d / "surrogate_report.json", doc, h)
        cols = ["seed", "alpha_0", "delta_alpha", "A_alpha", "H", "delta_h"]
        write_csv(d / "surrogate_members.csv", cols, ([m[c] for c in cols] for m in rep.surrogates), h)
        return 0

    if path.suffix != ".json":
        raise TextFractalError(f"mode {mode!r} needs a chapters.json corpus")
    corpus = corpus_from_json(path)
    cfg = resolve_for_corpus(rc.mfdfa, corpus)

    if mode == "orders":
        orders = [("printed", Permutation.identity(corpus.chapter_count))]
        for pf in rc.extra.get("permutation_file", []):
            perm = read_permutation(pf, n=corpus.chapter_count,
                                    allow_repeats=bool(rc.extra.get("allow_repeats", False)))
            orders.append((Path(pf).stem, perm))
        for i in range(rc.extra.get("random_orders", 0) or 0):
            seed = derive_seed(rc.seed, i)
            orders.append((f"random-{seed}", random_permutation(corpus.chapter_count, seed)))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SpectrumFoldedWarning)
            results = run_order_study(corpus, [p for _, p in orders], cfg, threads=rc.threads)
        d = _run_dir(rc, "orders", h)
        summaries = []
        for (label, perm), res in zip(orders, results):
            write_series(d / f"{label}_series.csv", concat_in_order(corpus, perm).values, h, "slv")
            write_mfdfa_bundle(d, res, h, prefix=f"{label}_")
            s = {"label": label, "order": list(perm.order)}
            s.update(res.summary())
            s["q_ranges"] = {f"[-{r:g},{r:g}]": sp.summary() for r, sp in qrange_spectra(res)}
            summaries.append(s)
        write_json(d / "orders_summary.json", {"orders": summaries, "mfdfa_config": cfg.to_dict(),
                                                 "config": rc.hashed_view(digests)}, h)
        return 0

    if mode == "ensemble":
        n = rc.extra.get("n", 1000)
        keep = bool(rc.extra.get("keep_members", False))
        status = 0
        try:
            ens = run_permutation_ensemble(corpus, n, rc.seed, cfg, threads=rc.threads,
                                           keep_members=keep)
        except EnsembleDegraded as exc:
            ens, status = exc.result, 1
            log.error("%s", exc)
        d = _run_dir(rc, "ensemble", h)
        doc = ens.summary()
        doc["mfdfa_config"] = cfg.to_dict()
        doc["config"] = rc.hashed_view(digests)
        doc["members"] = [{"index": m.index, "seed": m.seed, "error": m.error,
                           "summary": m.summary} for m in ens.members]
        write_json(d / "ensemble_summary.json", doc, h)
        if ens.ensemble is not None:
            write_mfdfa_bundle(d, ens.ensemble, h, prefix="ensemble_")
        if keep:
            md = d / "members"
            md.mkdir(exist_ok=True)
            for m in ens.members:
                if m.ok:
                    res = analyze_fluctuations(
                        type(ens.mean_F)(ens.mean_F.q, ens.mean_F.scales, np.exp(m.log_F),
                                         ens.mean_F.window_counts, ens.mean_F.fit_range, cfg.m), cfg)
                    write_mfdfa_bundle(md, res, h, prefix=f"member_{m.index:04d}_")
        return status

    raise TextFractalError(f"unknown experiment mode {mode!r}")


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _common(p):
    p.add_argument("--config", help="INI config file; flags override its values")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, help="worker threads (results do not depend on it)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--q-range", dest="q_range", metavar="QMAX[:STEP]",
                   help="symmetric q grid, e.g. 7:0.25 (or =-7:7:0.25)")
    p.add_argument("--scale-range", dest="scale_range", metavar="SMIN:SMAX[:N]")
    p.add_argument("--fit-range", dest="fit_range", metavar="SLO:SHI")
    p.add_argument("--detrend-order", dest="detrend_order", type=int)
    p.add_argument("--chapter-delimiter", dest="chapter_delimiter", metavar="REGEX",
                   help="regular expression (multiline mode) matching chapter headings")
    p.add_argument("--permutation-file", dest="permutation_file", action="append",
                   help="chapter order file, one 1-based index per line (repeatable)")


def build_parser():
    parser = argparse.ArgumentParser(prog="textfractal",
                                     description="Sentence-length series, Weibull fits and MFDFA for literary texts.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="text files -> SLV/PMDV series, chapters.json, stats.json")
    p.add_argument("inputs", nargs="+", help="UTF-8 text files (in reading order)")
    p.add_argument("--count-unit", dest="count_unit", choices=["words", "characters"])
    p.add_argument("--sentence-end-marks", dest="sentence_end_marks")
    p.add_argument("--intra-marks", dest="intra_marks")
    _common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("analyze", help="ACF, Weibull fit and MFDFA of one series")
    p.add_argument("inputs", nargs=1, help="series file (one value per line) or chapters.json")
    p.add_argument("--max-lag", dest="max_lag", type=int)
    p.add_argument("--loglog", action="store_true", default=None)
    p.add_argument("--include-zero", dest="include_zero", action="store_true", default=None)
    p.add_argument("--weighting", choices=["linear", "log"])
    _common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("experiment", help="chapter-order studies, ensembles, surrogate tests")
    p.add_argument("inputs", nargs=1, help="chapters.json (or a series file for surrogates)")
    p.add_argument("--mode", choices=["orders", "ensemble", "surrogate"])
    p.add_argument("--kind", choices=["shuffle", "fourier"])
    p.add_argument("--n", type=int, help="ensemble members / surrogates")
    p.add_argument("--random-orders", dest="random_orders", type=int)
    p.add_argument("--allow-repeats", dest="allow_repeats", action="store_true", default=None)
    p.add_argument("--keep-members", dest="keep_members", action="store_true", default=None)
    _common(p)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    func = args.func
    try:
        file_values = load_config_file(args.config) if args.config else {}
        ns = argparse.Namespace(**{k: v for k, v in vars(args).items()
                                   if k not in ("verbose", "command")})
        rc = build_config(args.command, ns, file_values)
        return func(rc)
    except TextFractalError as exc:
        print(f"textfractal {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"textfractal {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
