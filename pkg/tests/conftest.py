import re

import numpy as np
import pytest

from textfractal.synthetic import synthetic_text


def build_chaptered_text(n_chapters, seed, sentences=(3, 40)):
    """Chaptered synthetic prose plus the generator's own per-chapter counts."""
    rng = np.random.default_rng(seed)
    blocks, slv, pmdv = [], [], []
    for c in range(n_chapters):
        n = int(rng.integers(*sentences))
        text, s, p = synthetic_text(n, seed=seed * 1000 + c)
        blocks.append(f"Chapter {c + 1}\n\n{text}\n\n")
        slv.append(s)
        pmdv.append(p)
    return "".join(blocks), slv, pmdv


def recount_words(text, end_marks=".!?"):
    """Independent oracle: split on end marks, count alnum whitespace tokens."""
    pieces = re.split(f"[{re.escape(end_marks)}]+", text)[:-1]
    counts = [sum(any(ch.isalnum() for ch in tok) for tok in piece.split()) for piece in pieces]
    return [c for c in counts if c > 0]


@pytest.fixture(scope="session")
def corpus_155():
    return build_chaptered_text(155, seed=11)
