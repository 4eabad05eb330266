"""Turn chapterized plain text into sentence-length (SLV) and inter-mark
distance (PMDV) series.

Tokenization rules:

* A word is a maximal run of non-whitespace, non-mark characters holding at
  least one letter or digit.  Symbol-only runs (a lone ``*``, ``¿``) are
  dropped.
* A run of sentence-ending characters, together with closing quotes and
  brackets glued to it (``?!``, ``..."``, ``?»``), is one sentence boundary.
* Every intra-sentence mark character is its own mark.
* There is no abbreviation handling: ``Dr.`` ends a sentence.
"""
from __future__ import annotations

import re
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import EmptyChapter, EmptyInput, InvalidConfig, NoMarks, NoSentences
from .series import TimeSeries

WORD = "word"
MARK = "mark"
END = "sentence_ending"
INTRA = "intra_sentence"

DEFAULT_END_MARKS = ".!?…‽"
DEFAULT_INTRA_MARKS = ",;:—–"
DEFAULT_CLOSERS = "\"'”’»›)]}"


@dataclass(frozen=True)
class IngestConfig:
    sentence_end_marks: str = DEFAULT_END_MARKS
    intra_marks: str = DEFAULT_INTRA_MARKS
    closers: str = DEFAULT_CLOSERS
    chapter_delimiter: Optional[str] = None
    count_unit: str = "words"

    def __post_init__(self):
        overlap = set(self.sentence_end_marks) & set(self.intra_marks)
        if overlap:
            raise InvalidConfig(f"characters configured as both end and intra marks: "
                                f"{''.join(sorted(overlap))!r}")
        if not self.sentence_end_marks:
            raise InvalidConfig("no sentence-ending marks configured")
        if any(c.isspace() or c.isalnum() for c in self.sentence_end_marks + self.intra_marks):
            raise InvalidConfig("marks must be punctuation characters")
        if self.count_unit not in ("words", "characters"):
            raise InvalidConfig(f"count_unit must be 'words' or 'characters', got {self.count_unit!r}")
        if self.chapter_delimiter is not None:
            try:
                re.compile(self.chapter_delimiter)
            except re.error as exc:
                raise InvalidConfig(f"bad chapter delimiter pattern: {exc}") from None

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class Token:
    kind: str                    # WORD or MARK
    text: str
    mark: Optional[str] = None   # END / INTRA for marks
    offset: int = field(default=-1, compare=False)

    @property
    def is_end(self):
        return self.mark == END


@dataclass
class TokenStream:
    tokens: list

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    @property
    def n_words(self):
        return sum(t.kind == WORD for t in self.tokens)

    @property
    def n_marks(self):
        return sum(t.kind == MARK for t in self.tokens)

    def kinds(self):
        """Compact form: 'W', 'E' (end mark) and 'I' (intra mark)."""
        return "".join("W" if t.kind == WORD else ("E" if t.is_end else "I") for t in self.tokens)

    def to_text(self):
        return " ".join(t.text for t in self.tokens)


def _char_class(chars):
    return "".join(re.escape(c) for c in chars)


_PATTERN_CACHE = {}


def _pattern(cfg: IngestConfig):
    key = (cfg.sentence_end_marks, cfg.intra_marks, cfg.closers)
    pat = _PATTERN_CACHE.get(key)
    if pat is None:
        marks = set(cfg.sentence_end_marks) | set(cfg.intra_marks)
        closers = "".join(c for c in cfg.closers if c not in marks)
        e = _char_class(cfg.sentence_end_marks)
        c = _char_class(closers)
        tail = f"[{e}{c}]*" if c else f"[{e}]*"
        parts = [f"(?P<end>[{e}]{tail})"]
        if cfg.intra_marks:
            parts.append(f"(?P<intra>[{_char_class(cfg.intra_marks)}])")
        parts.append(f"(?P<run>[^\\s{_char_class(''.join(marks))}]+)")
        pat = re.compile("|".join(parts))
        _PATTERN_CACHE[key] = pat
    return pat


def _is_word(run):
    return any(ch.isalnum() for ch in run)


def tokenize(text: str, cfg: IngestConfig = None) -> TokenStream:
    cfg = cfg or IngestConfig()
    if not text or not text.strip():
        raise EmptyInput("empty text")
    tokens = []
    for m in _pattern(cfg).finditer(text):
        group = m.lastgroup
        if group == "end":
            tokens.append(Token(MARK, m.group(), END, m.start()))
        elif group == "intra":
            tokens.append(Token(MARK, m.group(), INTRA, m.start()))
        elif _is_word(m.group()):
            tokens.append(Token(WORD, m.group(), None, m.start()))
    return TokenStream(tokens)


def _intervals(ts: TokenStream, boundary, unit):
    """Lengths between consecutive boundary marks; empty intervals dropped."""
    words = chars = 0
    out = []
    seen_boundary = False
    for tok in ts.tokens:
        if tok.kind == WORD:
            words += 1
            chars += len(tok.text)
        elif boundary(tok):
            seen_boundary = True
            if words > 0:
                out.append(words if unit == "words" else chars)
            words = chars = 0
        else:
            chars += len(tok.text)
    return out, seen_boundary


def extract_slv(ts: TokenStream, unit="words", label="slv") -> TimeSeries:
    """Words (or non-whitespace characters) per sentence.

    Words after the last end mark are dropped, as are empty sentences.
    """
    out, seen = _intervals(ts, lambda t: t.is_end, unit)
    if not seen:
        raise NoSentences("no sentence-ending mark in the text")
    if not out:
        raise NoSentences("no sentence contains a word")
    return TimeSeries(np.asarray(out, dtype=np.int64), label=label, meta={"unit": unit})


def extract_pmdv(ts: TokenStream, unit="words", label="pmdv") -> TimeSeries:
    """Words between consecutive punctuation marks of either kind."""
    out, seen = _intervals(ts, lambda t: t.kind == MARK, unit)
    if not seen:
        raise NoMarks("no punctuation mark in the text")
    if not out:
        raise NoMarks("no word between punctuation marks")
    return TimeSeries(np.asarray(out, dtype=np.int64), label=label, meta={"unit": unit})


@dataclass
class ChapterizedCorpus:
    chapters: list               # per-chapter SLV arrays (words)
    labels: list
    name: str = ""
    pmdv_chapters: Optional[list] = None
    char_chapters: Optional[list] = None
    offsets: Optional[list] = None

    def __post_init__(self):
        if not self.chapters:
            raise EmptyInput("a corpus needs at least one chapter")
        self.chapters = [np.asarray(c, dtype=np.int64) for c in self.chapters]
        for i, c in enumerate(self.chapters):
            if c.size == 0:
                raise EmptyChapter(i + 1, self.labels[i] if self.labels else None)
        if len(self.labels) != len(self.chapters):
            raise ValueError("one label per chapter required")

    @property
    def chapter_count(self):
        return len(self.chapters)

    def printed_series(self) -> TimeSeries:
        return TimeSeries(np.concatenate(self.chapters), label=self.name or "slv")

    def chapter_lengths(self):
        return np.array([c.size for c in self.chapters])


def split_chapters(text: str, cfg: IngestConfig = None):
    """Return ``(label, chunk, offset)`` triples, one per chapter.

    Text before the first delimiter match becomes a chapter only if it is
    not blank.  Without a delimiter (or without a match) the whole text is
    one chapter.
    """
    cfg = cfg or IngestConfig()
    if not text or not text.strip():
        raise EmptyInput("empty text")
    if cfg.chapter_delimiter is None:
        return [("1", text, 0)]
    matches = list(re.finditer(cfg.chapter_delimiter, text, flags=re.MULTILINE))
    matches = [m for m in matches if m.end() > m.start()]
    if not matches:
        return [("1", text, 0)]
    out = []
    head = text[:matches[0].start()]
    if head.strip():
        out.append(("", head, 0))
    for i, m in enumerate(matches):
        end = matches[i + 1].start() if i + 1 < len(matches) else len(text)
        out.append((m.group().strip(), text[m.end():end], m.end()))
    return [(lab or str(i + 1), chunk, off) for i, (lab, chunk, off) in enumerate(out)]


def segment_chapters(text: str, cfg: IngestConfig = None, name="") -> ChapterizedCorpus:
    """Split into chapters and compute each chapter's SLV independently."""
    cfg = cfg or IngestConfig()
    chapters, pmdv, chars, labels, offsets = [], [], [], [], []
    for i, (label, chunk, offset) in enumerate(split_chapters(text, cfg), start=1):
        try:
            ts = tokenize(chunk, cfg)
            slv = extract_slv(ts)
        except (EmptyInput, NoSentences):
            err = EmptyChapter(i, label)
            err.offset = offset
            raise err from None
        chapters.append(slv.values)
        chars.append(extract_slv(ts, unit="characters").values)
        try:
            pmdv.append(extract_pmdv(ts).values)
        except NoMarks:  # pragma: no cover - an end mark is also a mark
            pmdv.append(np.zeros(0, dtype=np.int64))
        labels.append(label)
        offsets.append(offset)
    return ChapterizedCorpus(chapters, labels, name=name, pmdv_chapters=pmdv,
                             char_chapters=chars, offsets=offsets)


@dataclass(frozen=True)
class CorpusStats:
    min_words: int
    max_words: int
    mean_words: float
    min_chars: int
    max_chars: int
    mean_chars: float
    min_chapter_sentences: int
    max_chapter_sentences: int
    mean_chapter_sentences: float

    def to_dict(self):
        return asdict(self)


def corpus_stats(corpus: ChapterizedCorpus, char_series=None) -> CorpusStats:
    """Min/max/mean sentence length in words and characters, and chapter
    length in sentences."""
    words = np.concatenate(corpus.chapters)
    if char_series is None:
        if corpus.char_chapters is None:
            raise ValueError("character series not available")
        chars = np.concatenate(corpus.char_chapters)
    else:
        chars = np.asarray(char_series.values if isinstance(char_series, TimeSeries) else char_series)
    if words.size == 0 or chars.size == 0:
        raise EmptyInput("empty corpus")
    lengths = corpus.chapter_lengths()
    return CorpusStats(
        min_words=int(words.min()), max_words=int(words.max()), mean_words=float(words.mean()),
        min_chars=int(chars.min()), max_chars=int(chars.max()), mean_chars=float(chars.mean()),
        min_chapter_sentences=int(lengths.min()), max_chapter_sentences=int(lengths.max()),
        mean_chapter_sentences=float(lengths.mean()),
    )
