"""Report documents shared by the CLI text and JSON outputs.

Values are kept JSON-native: exact integers stay integers, rationals become
reduced "p/q" strings with the sign on the numerator, residues mod 2 are
written in [0, 2).  Floats never appear.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Any, List, Tuple

import jsonschema

from . import __version__
from .assoc import WitnessCertificate
from .discform import FiniteQuadraticForm, QMod2Z


def frac_str(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(s: str) -> Fraction:
    num, den = s.split("/")
    return Fraction(int(num), int(den))


def jsonable(value: Any) -> Any:
    """Convert package values into plain JSON types."""
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, QMod2Z):
        return frac_str(value.value)
    if isinstance(value, Fraction):
        return frac_str(value)
    if isinstance(value, FiniteQuadraticForm):
        return {
            "generators": [
                {"label": lab, "order": o, "q": frac_str(qv.value)}
                for lab, o, qv in zip(value.labels, value.orders, value.q)
            ],
            "bilinear": [[frac_str(v) for v in row] for row in value.b],
        }
    if isinstance(value, WitnessCertificate):
        return value.to_dict()
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if hasattr(value, "value") and isinstance(value.value, str):  # enums
        return value.value
    raise TypeError(f"cannot serialize {type(value).__name__}")


@dataclass
class ReportDocument:
    command: str
    inputs: dict
    results: dict
    certificates: List[WitnessCertificate] = field(default_factory=list)
    version: str = __version__

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs": jsonable(self.inputs),
            "results": jsonable(self.results),
            "certificates": [c.to_dict() for c in self.certificates],
            "version": self.version,
        }

    def to_json(self) -> str:
        data = self.to_dict()
        validate(data)
        return json.dumps(data, indent=2, ensure_ascii=False)

    @classmethod
    def from_dict(cls, data: dict) -> "ReportDocument":
        validate(data)
        certs = [WitnessCertificate.from_dict(c) for c in data["certificates"]]
        return cls(data["command"], data["inputs"], data["results"], certs, data["version"])

    @classmethod
    def from_json(cls, text: str) -> "ReportDocument":
        return cls.from_dict(json.loads(text))


def load_schema() -> dict:
    text = resources.files("twisted_k3").joinpath("data/report.schema.json").read_text()
    return json.loads(text)


def validate(data: dict) -> None:
    jsonschema.validate(data, load_schema())


def flatten(value: Any, prefix: str = "") -> List[Tuple[str, Any]]:
    """(path, leaf) pairs in document order; the text mode prints these."""
    if isinstance(value, dict):
        if not value:
            return [(prefix, "{}")]
        out = []
        for k, v in value.items():
            out.extend(flatten(v, f"{prefix}.{k}" if prefix else str(k)))
        return out
    if isinstance(value, list):
        if not value:
            return [(prefix, "[]")]
        out = []
        for i, v in enumerate(value):
            out.extend(flatten(v, f"{prefix}[{i}]"))
        return out
    return [(prefix, value)]


def render_text(doc: ReportDocument) -> str:
    rows = flatten({k: v for k, v in doc.to_dict().items() if k != "version"})
    width = max(len(p) for p, _ in rows)
    lines = [f"{p.ljust(width)}  {json.dumps(v, ensure_ascii=False) if not isinstance(v, str) else v}"
             for p, v in rows]
    lines.append(f"{'version'.ljust(width)}  {doc.version}")
    return "\n".join(lines)
