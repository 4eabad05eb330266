"""Run configuration: INI file + command-line overrides.

Example file::

    [ingest]
    sentence_end_marks = .!?…
    intra_marks = ,;:—–
    chapter_delimiter = ^CAPÍTULO \\d+$

    [mfdfa]
    detrend_order = 2
    q_range = 7:0.25
    scale_range = 6:2000:50
    fit_range = 16:2000

    [run]
    seed = 7
    threads = 2
"""
from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidConfig
from .ingest import IngestConfig
from .mfdfa import MfdfaConfig, default_q_grid


def parse_q_range(text):
    """``QMAX``, ``QMAX:STEP`` or ``-QMAX:QMAX:STEP`` -> symmetric q grid."""
    parts = [p.strip() for p in str(text).split(":")]
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise InvalidConfig(f"bad q range {text!r}") from None
    if len(nums) == 1:
        q_max, step = nums[0], 0.25
    elif len(nums) == 2:
        q_max, step = nums
    elif len(nums) == 3:
        if not np.isclose(nums[0], -nums[1]):
            raise InvalidConfig(f"q range must be symmetric about 0, got {text!r}")
        q_max, step = nums[1], nums[2]
    else:
        raise InvalidConfig(f"bad q range {text!r}")
    if q_max <= 0 or step <= 0:
        raise InvalidConfig(f"bad q range {text!r}")
    return tuple(default_q_grid(q_max, step).tolist())


def parse_scale_range(text):
    """``SMIN:SMAX`` or ``SMIN:SMAX:N``."""
    parts = str(text).split(":")
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise InvalidConfig(f"bad scale range {text!r}") from None
    if len(nums) not in (2, 3):
        raise InvalidConfig(f"bad scale range {text!r}")
    return nums[0], nums[1], (nums[2] if len(nums) == 3 else 50)


def parse_fit_range(text):
    parts = str(text).split(":")
    try:
        lo, hi = (int(p) for p in parts)
    except ValueError:
        raise InvalidConfig(f"bad fit range {text!r}") from None
    return lo, hi


@dataclass
class RunConfig:
    command: str = ""
    inputs: list = field(default_factory=list)
    ingest: IngestConfig = field(default_factory=IngestConfig)
    mfdfa: MfdfaConfig = field(default_factory=MfdfaConfig)
    seed: int = 0
    threads: int = 1
    out: str = "out"
    extra: dict = field(default_factory=dict)

    def hashed_view(self, input_digests=()):
        """Everything that determines results (not ``threads`` or ``out``)."""
        return {"command": self.command, "ingest": self.ingest.to_dict(),
                "mfdfa": self.mfdfa.to_dict(), "seed": self.seed,
                "extra": self.extra, "inputs": list(input_digests)}

    def digest(self, input_digests=()):
        blob = json.dumps(self.hashed_view(input_digests), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def file_digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


def load_config_file(path) -> dict:
    """Flatten an INI file into ``{option: value}`` using CLI option names."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from None
    out = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            out[key.replace("-", "_")] = value
    return out


def _as_bool(v):
    if isinstance(v, bool):
        return v
    text = str(v).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise InvalidConfig(f"not a boolean: {v!r}")


def _as_list(v):
    if isinstance(v, (list, tuple)):
        return [str(x) for x in v]
    return [x.strip() for x in str(v).splitlines() if x.strip()]


EXTRA_TYPES = {"n": int, "kind": str, "mode": str, "max_lag": int, "random_orders": int,
               "loglog": _as_bool, "keep_members": _as_bool, "include_zero": _as_bool,
               "allow_repeats": _as_bool, "weighting": str, "permutation_file": _as_list}


def build_config(command, args, file_values=None) -> RunConfig:
    """Merge config-file values and CLI flags (flags win)."""
    vals = dict(file_values or {})
    for key, value in vars(args).items():
        if value is not None and key not in ("func", "config", "command", "verbose"):
            vals[key] = value

    ingest_kw = {}
    for key in ("sentence_end_marks", "intra_marks", "closers", "chapter_delimiter", "count_unit"):
        if key in vals:
            ingest_kw[key] = vals[key]
    ingest = IngestConfig(**ingest_kw)

    mf = {}
    if "detrend_order" in vals:
        mf["m"] = int(vals["detrend_order"])
    if "q_range" in vals:
        mf["q_grid"] = parse_q_range(vals["q_range"])
    if "scale_range" in vals:
        mf["s_min"], mf["s_max"], mf["n_scales"] = parse_scale_range(vals["scale_range"])
    if "fit_range" in vals:
        mf["fit_range"] = parse_fit_range(vals["fit_range"])
    mfdfa = MfdfaConfig(**mf)

    inputs = vals.get("inputs") or ([vals["input"]] if "input" in vals else [])
    known = {"inputs", "input", "sentence_end_marks", "intra_marks", "closers",
             "chapter_delimiter", "count_unit", "detrend_order", "q_range", "scale_range",
             "fit_range", "seed", "threads", "out"}
    extra = {}
    for k, v in vals.items():
        if k in known:
            continue
        if k not in EXTRA_TYPES:
            raise InvalidConfig(f"unknown option {k!r}")
        try:
            extra[k] = EXTRA_TYPES[k](v)
        except ValueError:
            raise InvalidConfig(f"bad value for {k}: {v!r}") from None
    return RunConfig(command=command, inputs=[str(p) for p in inputs], ingest=ingest,
                     mfdfa=mfdfa, seed=int(vals.get("seed", 0)),
                     threads=int(vals.get("threads", 1)), out=str(vals.get("out", "out")),
                     extra=dict(sorted(extra.items())))
