"""Exception hierarchy shared by every stage of the pipeline."""


class TextFractalError(Exception):
    """Base class for all errors raised by textfractal."""


class EmptyInput(TextFractalError, ValueError):
    pass


class NoSentences(TextFractalError, ValueError):
    pass


class NoMarks(TextFractalError, ValueError):
    pass


class EmptyChapter(TextFractalError, ValueError):
    def __init__(self, index, label=None):
        self.index = index
        self.label = label
        where = f"chapter {index}" + (f" ({label!r})" if label else "")
        super().__init__(f"{where} contains no complete sentence")


class PermutationSizeMismatch(TextFractalError, ValueError):
    pass


class InvalidPermutation(TextFractalError, ValueError):
    pass


class InvalidParams(TextFractalError, ValueError):
    pass


class FitFailed(TextFractalError, RuntimeError):
    pass


class ZeroVariance(TextFractalError, ValueError):
    pass


class InvalidConfig(TextFractalError, ValueError):
    pass


class ScaleTooSmall(InvalidConfig):
    pass


class BadFitRange(InvalidConfig):
    pass


class DegenerateWindow(TextFractalError, ArithmeticError):
    """A window with zero detrended variance was hit while evaluating q <= 0."""

    def __init__(self, scale, q=None):
        self.scale = scale
        self.q = q
        msg = (f"zero detrended variance at scale s={scale}"
               + (f" for q={q}" if q is not None else "")
               + "; raise the minimum scale above the longest constant run")
        super().__init__(msg)


class EnsembleDegraded(TextFractalError, RuntimeError):
    def __init__(self, n_failed, n_total, result=None):
        self.n_failed = n_failed
        self.n_total = n_total
        self.result = result
        super().__init__(f"{n_failed} of {n_total} ensemble members failed")


class SpectrumFoldedWarning(UserWarning):
    """Singularity exponents are not monotone in q beyond tolerance."""
