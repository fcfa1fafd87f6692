"""
Run configuration for the command line.

Values come from an optional YAML file (``--config run.yaml``) and are
overridden by flags given explicitly on the command line.
"""

import logging
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

import yaml

from .errors import OutOfRange, ParseError

logger = logging.getLogger(__name__)

THREADS_ENV = "ORDERVC_THREADS"

FAMILY_NAMES = ("partial", "total")
CONSTRUCTIONS = ("thm1", "thm2g", "thm2h")
STAR_MODES = ("exhaustive", "sampled")
STRATEGIES = ("literal", "window")
FORMATS = ("json", "table", "dot")


@dataclass
class RunConfig:
    command: Optional[str] = None
    n: Optional[int] = None
    # compat
    a: Optional[str] = None
    b: Optional[str] = None
    # enumerate
    kind: str = "partial"
    count_only: bool = False
    # vc
    ground: str = "total"
    witness: str = "partial"
    budget: Optional[float] = None
    max_candidates: Optional[int] = None
    emit_cert: Optional[str] = None
    # construct / verify-star
    which: str = "thm1"
    emit_dot: Optional[str] = None
    emit_json: Optional[str] = None
    mode: str = "exhaustive"
    count: int = 10_000
    seed: Optional[int] = None
    strategy: str = "literal"
    strict: bool = False
    # proofcheck / check-cert
    set_path: Optional[str] = None
    cert_path: Optional[str] = None
    # reproduce
    max_n: int = 6
    output_dir: str = "reproduction_results"
    # common
    threads: Optional[int] = None
    format: str = "table"
    verbose: int = 0

    @classmethod
    def from_yaml(cls, path):
        try:
            data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        except OSError as exc:
            raise ParseError(f"cannot read config {path}: {exc.strerror}") from exc
        except yaml.YAMLError as exc:
            raise ParseError(f"config {path}: invalid YAML ({exc})") from exc
        if not isinstance(data, dict):
            raise ParseError(f"config {path}: expected a mapping at top level")
        return cls.from_mapping({k.replace("-", "_"): v for k, v in data.items()})

    @classmethod
    def from_mapping(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ParseError(f"unknown configuration keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_args(cls, args):
        """Merge the YAML file named by ``args.config`` with explicit flags."""
        explicit = {k: v for k, v in vars(args).items() if v is not None and k != "config"}
        if getattr(args, "config", None):
            base = cls.from_yaml(args.config)
            merged = {f.name: getattr(base, f.name) for f in fields(cls)}
            merged.update(explicit)
            return cls.from_mapping(merged)
        return cls.from_mapping(explicit)

    def validate(self):
        if self.n is not None and (isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1):
            raise OutOfRange(f"--n must be a positive integer, got {self.n!r}")
        if self.budget is not None and self.budget < 0:
            raise OutOfRange(f"--budget must be >= 0, got {self.budget}")
        if self.max_candidates is not None and self.max_candidates < 0:
            raise OutOfRange(f"--max-candidates must be >= 0, got {self.max_candidates}")
        if self.mode == "sampled" and self.count < 1:
            raise OutOfRange(f"--count must be >= 1 in sampled mode, got {self.count}")
        for name, value, allowed in (
            ("kind", self.kind, FAMILY_NAMES),
            ("ground", self.ground, FAMILY_NAMES),
            ("witness", self.witness, FAMILY_NAMES),
            ("which", self.which, CONSTRUCTIONS),
            ("mode", self.mode, STAR_MODES),
            ("strategy", self.strategy, STRATEGIES),
            ("format", self.format, FORMATS),
        ):
            if value not in allowed:
                raise OutOfRange(f"--{name} must be one of {', '.join(allowed)}, got {value!r}")
        if self.max_n < 1:
            raise OutOfRange(f"--max-n must be >= 1, got {self.max_n}")
        resolve_threads(self.threads)
        return self


def resolve_threads(flag=None):
    """--threads, else $ORDERVC_THREADS, else the machine's CPU count."""
    source, value = "--threads", flag
    if value is None:
        source, value = THREADS_ENV, os.environ.get(THREADS_ENV)
    if value is None or value == "":
        return os.cpu_count() or 1
    try:
        threads = int(value)
    except (TypeError, ValueError):
        raise OutOfRange(f"{source} must be an integer, got {value!r}") from None
    if threads < 1:
        raise OutOfRange(f"{source} must be >= 1, got {threads}")
    return threads
