import numpy as np
import pytest

from textfractal.errors import EnsembleDegraded
from textfractal.experiments import (corpus_run_bound, run_order_study,
                                     run_permutation_ensemble, run_surrogate_test)
from textfractal.ingest import ChapterizedCorpus
from textfractal.mfdfa import MfdfaConfig, default_q_grid
from textfractal.series import Permutation, concat_in_order, random_permutation
from textfractal.synthetic import positive_persistent_series, volatility_noise

CFG = MfdfaConfig(q_grid=tuple(default_q_grid(5, 0.5)), n_scales=20)


def iid_corpus(n_chapters=30, size=150, seed=0):
    rng = np.random.default_rng(seed)
    chapters = [rng.geometric(1 / 12, size) for _ in range(n_chapters)]
    return ChapterizedCorpus(chapters, [str(i + 1) for i in range(n_chapters)], name="iid")


def brute_run_bound(corpus, n_orders=300):
    from textfractal.series import longest_constant_run
    return max(longest_constant_run(concat_in_order(corpus, random_permutation(corpus.chapter_count, i)).values)
               for i in range(n_orders))


def test_run_bound_covers_orders():
    corpus = ChapterizedCorpus([[5, 5, 1], [5], [5, 5, 5], [2, 5], [1, 1]], list("abcde"))
    # best case: [2,5] + [5] + [5,5,5] + [5,5,1] gives a run of 7
    assert corpus_run_bound(corpus) == 7
    assert brute_run_bound(corpus) <= 7


def test_identical_orders_are_bit_identical():
    corpus = iid_corpus()
    p = random_permutation(corpus.chapter_count, 5)
    a, b = run_order_study(corpus, [p, p], CFG)
    assert np.array_equal(a.fluct.F, b.fluct.F)
    assert a.summary() == b.summary()


def test_iid_chapters_order_invariant():
    # large chapters and s_min above the small-scale crossover keep the
    # sampling spread of delta_alpha well under the tolerance
    corpus = iid_corpus(size=2000, seed=1)
    orders = [Permutation.identity(30), Permutation.reversal(30)] + \
        [random_permutation(30, s) for s in range(3)]
    cfg = MfdfaConfig(q_grid=CFG.q_grid, n_scales=20, s_min=16)
    widths = [r.spectrum.delta_alpha for r in run_order_study(corpus, orders, cfg)]
    assert max(widths) - min(widths) <= 0.05


def test_ensemble_single_member_matches_order_study():
    corpus = iid_corpus()
    ens = run_permutation_ensemble(corpus, 1, seed=9, cfg=CFG)
    direct = run_order_study(corpus, [random_permutation(30, 9)], CFG)[0]
    assert np.allclose(ens.mean_F.F, direct.fluct.F, rtol=1e-13)
    assert ens.ensemble.summary()["delta_alpha"] == pytest.approx(direct.spectrum.delta_alpha, rel=1e-9)


def test_ensemble_envelope_and_seeds():
    corpus = iid_corpus()
    ens = run_permutation_ensemble(corpus, 40, seed=7, cfg=CFG)
    assert ens.seeds == list(range(7, 47))
    widths = ens.member_values("delta_alpha")
    assert min(widths) - 0.02 <= ens.ensemble.spectrum.delta_alpha <= max(widths) + 0.02
    again = run_permutation_ensemble(corpus, 40, seed=7, cfg=CFG, threads=3)
    assert np.array_equal(ens.mean_F.F, again.mean_F.F)
    assert ens.summary() == again.summary()


def test_ensemble_degraded():
    # every chapter is constant; with s_min pinned low each order has degenerate windows
    corpus = ChapterizedCorpus([[3] * 40, [4] * 40, [5] * 40] * 10, [str(i) for i in range(30)])
    cfg = MfdfaConfig(q_grid=CFG.q_grid, s_min=6, n_scales=10)
    with pytest.raises(EnsembleDegraded) as info:
        run_permutation_ensemble(corpus, 5, seed=0, cfg=cfg)
    assert info.value.result is not None
    assert len(info.value.result.failures) == 5


def test_fourier_surrogate_of_nonlinear_persistence():
    u = volatility_noise(2**14, seed=0)
    rep = run_surrogate_test(u, "fourier", 5, seed=3, cfg=CFG)
    assert rep.flags["amplitude_preserved"]
    assert rep.flags["narrower_than_original"]
    assert abs(rep.aggregate()["alpha_0"]["mean"] - 0.5) <= 0.05
    assert [s["seed"] for s in rep.surrogates] == [3, 4, 5, 6, 7]


def test_fourier_surrogate_keeps_linear_persistence():
    # linear correlations live in the amplitude spectrum, so H survives phase randomization
    u = positive_persistent_series(2**14, seed=1).astype(float)
    rep = run_surrogate_test(u, "fourier", 3, seed=0, cfg=CFG)
    assert abs(rep.aggregate()["H"]["mean"] - rep.original["H"]) < 0.08


def test_shuffle_surrogates():
    u = np.random.default_rng(2).geometric(1 / 12, 2**13)
    rep = run_surrogate_test(u, "shuffle", 5, seed=1, cfg=CFG)
    assert rep.flags["histogram_preserved"]
    assert abs(rep.aggregate()["alpha_0"]["mean"] - rep.original["alpha_0"]) < 0.05
    heavy = positive_persistent_series(2**14, seed=4)
    rep = run_surrogate_test(heavy, "shuffle", 3, seed=1, cfg=CFG)
    assert abs(rep.aggregate()["alpha_0"]["mean"] - 0.5) < 0.1


def test_bad_arguments():
    with pytest.raises(ValueError):
        run_surrogate_test(np.arange(100.0), "bogus", 1, 0)
    with pytest.raises(ValueError):
        run_permutation_ensemble(iid_corpus(), 0, 0)


def test_run_bound_for_progressions():
    from textfractal.series import polynomial_runs
    rng = np.random.default_rng(3)
    for trial in range(20):
        chapters = []
        for _ in range(6):
            c = rng.integers(1, 6, int(rng.integers(2, 8)))
            if rng.random() < 0.4:
                c = np.arange(1, c.size + 1) * int(rng.integers(-1, 2)) + 10
            chapters.append(c)
        corpus = ChapterizedCorpus(chapters, [str(i) for i in range(6)])
        bound = corpus_run_bound(corpus, 1)
        worst = max(polynomial_runs(concat_in_order(corpus, random_permutation(6, i)).values, 1)[0]
                    for i in range(200))
        assert worst <= bound
