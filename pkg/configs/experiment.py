"""
Module Name: experiment.py
Description: ExperimentConfig and its declarative file format. A config file is a list of flat
             `key = value` lines with dotted section keys, for example

                 # heterogeneous quadratic, Top-1%
                 problem.family = heterogeneous_quadratic
                 problem.n = 4
                 algorithm.name = power_ef
                 compressor.kind = topk
                 compressor.k_fraction = 0.01
                 seeds = 0, 1, 2

             Lists are comma separated and an empty value means "unset" for optional fields. A `#` starts
             a comment only at the beginning of a line or after whitespace, so `runs/#3` is a plain value.
Date: 2026-10-19
"""

import re
from dataclasses import dataclass, field, fields, replace
from typing import Optional

from configs.config import (
    DEFAULT_ETA, DEFAULT_P, DEFAULT_R, DEFAULT_T, DEFAULT_N, DEFAULT_D, DEFAULT_SEED, DEFAULT_SIGMA,
    DEFAULT_HETEROGENEITY, DEFAULT_KAPPA, DEFAULT_ROUNDING_BASE, BOX_BOUND, FAILURE_BUDGET,
    RECORD_STRIDE, EIGEN_STRIDE, ESCAPE_DELTA, COMPARE_THRESHOLD, OUT_DIR, SUPPORTED_ALGORITHMS,
    SUPPORTED_COMPRESSORS, SUPPORTED_FAMILIES, SUPPORTED_SCHEDULES, debug
)
from configs.errors import ConfigurationError, UnknownKeyError
from configs.run_config import Kappas
from compress.compressors import CompressorSpec, ROUNDING
from problems.oracle import NoiseModel
from problems.problems import make_problem

# -------------------------
# Value codecs
# -------------------------

# "#" at the start of a line or after whitespace opens a comment
COMMENT = re.compile(r"(^|\s)#.*$")

# what a schedule may set; the rest keeps its configured value
SCHEDULE_FIELDS = ("eta", "p", "r", "T")


def _parse_bool(text):
    lowered = text.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional(parse):
    return lambda text: None if text == "" else parse(text)


def _list_of(parse):
    return lambda text: [parse(item.strip()) for item in text.split(",") if item.strip()]


def _format(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ", ".join(_format(item) for item in value)
    return str(value)


PARSERS = {
    "int": int,
    "float": float,
    "str": str,
    "bool": _parse_bool,
    "int?": _optional(int),
    "float?": _optional(float),
    "ints": _list_of(int),
    "floats": _list_of(float),
    "strs": _list_of(str),
}


def _opt(default, kind):
    if isinstance(default, list):
        return field(default_factory=lambda: list(default), metadata={"kind": kind})
    return field(default=default, metadata={"kind": kind})

# -------------------------
# Config blocks
# -------------------------

@dataclass
class ProblemBlock:
    family: str = _opt("heterogeneous_quadratic", "str")
    n: int = _opt(DEFAULT_N, "int")
    d: int = _opt(DEFAULT_D, "int")
    heterogeneity: float = _opt(DEFAULT_HETEROGENEITY, "float")
    sigma: float = _opt(DEFAULT_SIGMA, "float")
    box: float = _opt(BOX_BOUND, "float")
    # the problem instance is fixed across run seeds so runs on one config share f
    seed: int = _opt(DEFAULT_SEED, "int")


@dataclass
class AlgorithmBlock:
    name: str = _opt("power_ef", "str")
    eta: float = _opt(DEFAULT_ETA, "float")
    p: int = _opt(DEFAULT_P, "int")
    p_fcc: Optional[int] = _opt(None, "int?")
    p_batch: Optional[int] = _opt(None, "int?")
    r: float = _opt(DEFAULT_R, "float")
    T: int = _opt(DEFAULT_T, "int")
    schedule: str = _opt("none", "str")
    # with a schedule, T is capped at algorithm.T
    schedule_fields: list = _opt(list(SCHEDULE_FIELDS), "strs")
    epsilon: float = _opt(0.1, "float")
    delta: float = _opt(FAILURE_BUDGET, "float")
    kappa_T: float = _opt(DEFAULT_KAPPA, "float")
    kappa_eta: float = _opt(DEFAULT_KAPPA, "float")
    kappa_p: float = _opt(DEFAULT_KAPPA, "float")
    kappa_r: float = _opt(DEFAULT_KAPPA, "float")
    # empty means the origin
    x0: list = _opt([], "floats")

    @property
    def kappas(self):
        return Kappas(T=self.kappa_T, eta=self.kappa_eta, p=self.kappa_p, r=self.kappa_r)


@dataclass
class CompressorBlock:
    kind: str = _opt("topk", "str")
    k: Optional[int] = _opt(None, "int?")
    k_fraction: Optional[float] = _opt(0.1, "float?")
    base: float = _opt(DEFAULT_ROUNDING_BASE, "float")


@dataclass
class OutputBlock:
    out_dir: str = _opt(OUT_DIR, "str")
    record_stride: int = _opt(RECORD_STRIDE, "int")
    eigen_stride: int = _opt(EIGEN_STRIDE, "int")
    dump_messages: bool = _opt(False, "bool")
    compare_threshold: float = _opt(COMPARE_THRESHOLD, "float")
    escape_delta: float = _opt(ESCAPE_DELTA, "float")


SECTIONS = ("problem", "algorithm", "compressor", "output")


@dataclass
class ExperimentConfig:
    problem: ProblemBlock = field(default_factory=ProblemBlock)
    algorithm: AlgorithmBlock = field(default_factory=AlgorithmBlock)
    compressor: CompressorBlock = field(default_factory=CompressorBlock)
    output: OutputBlock = field(default_factory=OutputBlock)
    seeds: list = field(default_factory=lambda: [DEFAULT_SEED])

    # -------------------------
    # Flat key access
    # -------------------------

    @staticmethod
    def keys():
        """Every accepted key in file order."""
        out = []
        for section, block in zip(SECTIONS, (ProblemBlock, AlgorithmBlock, CompressorBlock, OutputBlock)):
            out.extend(f"{section}.{f.name}" for f in fields(block))
        out.append("seeds")
        return out

    def _locate(self, key):
        if key == "seeds":
            return self, "seeds", "ints"
        section, _, name = key.partition(".")
        if section not in SECTIONS:
            raise UnknownKeyError(key)
        block = getattr(self, section)
        for f in fields(block):
            if f.name == name:
                return block, name, f.metadata["kind"]
        raise UnknownKeyError(key)

    def get(self, key):
        target, name, _ = self._locate(key)
        return getattr(target, name)

    def set(self, key, text):
        """Set one key from its textual form."""
        target, name, kind = self._locate(key)
        try:
            value = PARSERS[kind](str(text).strip())
        except ValueError as exc:
            raise ConfigurationError(f"bad value for {key}: {exc}") from exc
        setattr(target, name, value)

    def with_overrides(self, overrides):
        """Copy with the given {key: value} pairs applied; None values are skipped."""
        cfg = self.copy()
        for key, value in overrides.items():
            if value is not None:
                cfg.set(key, _format(value))
        cfg.validate()
        return cfg

    def copy(self):
        return ExperimentConfig(
            problem=replace(self.problem),
            algorithm=replace(self.algorithm, x0=list(self.algorithm.x0),
                              schedule_fields=list(self.algorithm.schedule_fields)),
            compressor=replace(self.compressor),
            output=replace(self.output),
            seeds=list(self.seeds))

    # -------------------------
    # Text format
    # -------------------------

    @classmethod
    def from_text(cls, text):
        cfg = cls()
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = COMMENT.sub("", raw).strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            cfg.set(key, value)
        cfg.validate()
        return cfg

    def to_text(self):
        lines = ["# poweref experiment"]
        for key in self.keys():
            value = _format(self.get(key))
            lines.append(f"{key} = {value}".rstrip())
        return "\n".join(lines) + "\n"

    @classmethod
    def load(cls, path):
        debug(f"loading experiment config {path}")
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())

    # -------------------------
    # Validation and builders
    # -------------------------

    def validate(self):
        if self.problem.family not in SUPPORTED_FAMILIES:
            raise ConfigurationError(f"unknown problem family {self.problem.family!r}")
        if self.algorithm.name not in SUPPORTED_ALGORITHMS:
            raise ConfigurationError(f"unknown algorithm {self.algorithm.name!r}")
        if self.compressor.kind not in SUPPORTED_COMPRESSORS:
            raise ConfigurationError(f"unknown compressor {self.compressor.kind!r}")
        if self.algorithm.schedule not in SUPPORTED_SCHEDULES:
            raise ConfigurationError(f"unknown schedule {self.algorithm.schedule!r}")
        if not self.seeds:
            raise ConfigurationError("at least one seed is required")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigurationError("seeds must be distinct")
        if min(self.seeds) < 0 or self.problem.seed < 0:
            raise ConfigurationError("seeds must be nonnegative")
        if self.output.record_stride < 1 or self.output.eigen_stride < 1:
            raise ConfigurationError("strides must be positive")
        unknown = set(self.algorithm.schedule_fields) - set(SCHEDULE_FIELDS)
        if unknown:
            raise ConfigurationError(f"schedule_fields may only name {', '.join(SCHEDULE_FIELDS)}, "
                                     f"got {', '.join(sorted(unknown))}")
        for key in self.keys():
            value = self.get(key)
            if isinstance(value, str) and COMMENT.search(value):
                raise ConfigurationError(f"{key} = {value!r} would be read back as a comment")
        if self.algorithm.x0 and len(self.algorithm.x0) != self.problem.d:
            raise ConfigurationError(f"x0 has {len(self.algorithm.x0)} entries, expected {self.problem.d}")
        return self

    def build_problem(self):
        p = self.problem
        return make_problem(p.family, p.n, p.d, p.heterogeneity, seed=p.seed, sigma=p.sigma, box=p.box)

    def build_noise(self):
        return NoiseModel(sigma=self.problem.sigma)

    def build_compressor(self):
        c, d = self.compressor, self.problem.d
        if c.kind == ROUNDING:
            return CompressorSpec.rounding(c.base)
        if c.k is not None:
            k = c.k
        elif c.k_fraction is not None:
            if not 0 < c.k_fraction <= 1:
                raise ConfigurationError(f"k_fraction must lie in (0, 1], got {c.k_fraction}")
            k = max(1, int(round(c.k_fraction * d)))
        else:
            raise ConfigurationError(f"{c.kind} needs compressor.k or compressor.k_fraction")
        return CompressorSpec(c.kind, k=k)

    def problem_key(self):
        """Everything that determines the problem instance."""
        p = self.problem
        return (p.family, p.n, p.d, p.heterogeneity, p.sigma, p.box, p.seed)
