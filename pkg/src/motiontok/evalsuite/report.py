"""Evaluation reports: metric maps with a config fingerprint, JSON round-trip."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Dict, List

from ..errors import FormatError

__all__ = ["EvalReport", "config_fingerprint"]


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_fingerprint(config: dict) -> str:
    """sha256 of the canonical JSON form; changes iff the config changes."""
    return hashlib.sha256(_canonical(config).encode()).hexdigest()


@dataclass
class EvalReport:
    metrics: Dict[str, float]
    per_sequence: List[dict] = field(default_factory=list)
    fingerprint: str = ""
    seed: int = 0

    @classmethod
    def build(cls, metrics: dict, config: dict, seed: int,
              per_sequence=None) -> "EvalReport":
        return cls(metrics=dict(metrics), per_sequence=list(per_sequence or []),
                   fingerprint=config_fingerprint(config), seed=int(seed))

    def to_json(self) -> str:
        return _canonical({"metrics": self.metrics,
                           "per_sequence": self.per_sequence,
                           "fingerprint": self.fingerprint,
                           "seed": self.seed})

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise FormatError("bad_header", f"report is not valid JSON: {e}") from None
        try:
            return cls(metrics=d["metrics"], per_sequence=d["per_sequence"],
                       fingerprint=d["fingerprint"], seed=d["seed"])
        except (KeyError, TypeError) as e:
            raise FormatError("bad_header", f"report missing field: {e}") from None

    def save(self, path) -> None:
        with open(path, "w") as f:
            f.write(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "EvalReport":
        with open(path) as f:
            return cls.from_json(f.read())
