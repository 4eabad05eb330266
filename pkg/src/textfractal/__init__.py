"""Sentence-length series, discrete Weibull fits and MFDFA for literary texts."""

__version__ = "0.1.0"
