"""Reference measurement database for tooth identification.

JSON schema (version 1)::

    {
      "schema_version": 1,
      "jaw_kind": "adult_upper",
      "types": {
        "6":   {"characteristics": {"area": [...], ...}, "prior": 0.95},
        "6.0": {...},
        ...
      }
    }

Types are keyed without the quadrant (left and right teeth share reference
pools); ``prior`` is the probability that an assignment uses the type for a
given quadrant, which prices marking it missing.

A database may be *strictly* complete (every in-scope type has at least two
reference values per characteristic) - synthetic and shipped databases are.
Databases built by ``archmark train`` from a small report set may lack
types; those are loadable but the missing types are flagged unassignable
(infinite cost, zero effective prior) rather than rejected outright.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import AssignmentError
from .teeth import JAW_KINDS, database_keys

SCHEMA_VERSION = 1


@dataclass
class TypeRecord:
    characteristics: dict[str, list[float]] = field(default_factory=dict)
    prior: float = 0.0

    def references(self, name: str) -> np.ndarray:
        return np.asarray(self.characteristics.get(name, []),
                          dtype=np.float64)


@dataclass
class TrainingDatabase:
    jaw_kind: str
    types: dict[str, TypeRecord] = field(default_factory=dict)

    def record(self, key: str) -> TypeRecord | None:
        return self.types.get(key)

    def validate(self, strict: bool = True) -> list[str]:
        """Check shape constraints; returns the unusable (empty) type keys.

        Always enforced: known jaw kind, priors within [0, 1], at least two
        values in every non-empty reference pool.  With ``strict`` a fully
        covered type table is required as well.

        Raises
        ------
        AssignmentError
            On a violated constraint.
        """
        if self.jaw_kind not in JAW_KINDS:
            raise AssignmentError(
                f"database jaw kind {self.jaw_kind!r} is not one of "
                f"{JAW_KINDS}")
        expected = database_keys(self.jaw_kind)
        missing = [k for k in expected if k not in self.types
                   or not self.types[k].characteristics]
        if strict and missing:
            raise AssignmentError(
                f"database does not cover tooth types {missing} for "
                f"{self.jaw_kind}")
        for key, rec in self.types.items():
            if not 0.0 <= rec.prior <= 1.0:
                raise AssignmentError(
                    f"type {key!r} has prior {rec.prior} outside [0, 1]")
            for name, values in rec.characteristics.items():
                if len(values) < 2:
                    raise AssignmentError(
                        f"type {key!r} characteristic {name!r} has "
                        f"{len(values)} reference value(s); need >= 2")
        return missing

    def to_json(self) -> str:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "jaw_kind": self.jaw_kind,
            "types": {
                key: {"characteristics": rec.characteristics,
                      "prior": rec.prior}
                for key, rec in sorted(self.types.items())
            },
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TrainingDatabase":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise AssignmentError(f"database is not valid JSON: {exc}") \
                from None
        version = payload.get("schema_version")
        if version != SCHEMA_VERSION:
            raise AssignmentError(
                f"unsupported database schema_version {version!r} "
                f"(expected {SCHEMA_VERSION})")
        types = {}
        for key, entry in payload.get("types", {}).items():
            types[key] = TypeRecord(
                characteristics={n: [float(v) for v in vals]
                                 for n, vals in
                                 entry.get("characteristics", {}).items()},
                prior=float(entry.get("prior", 0.0)))
        return cls(jaw_kind=payload.get("jaw_kind", ""), types=types)

    def save(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "TrainingDatabase":
        with open(path, "r", encoding="ascii") as fh:
            return cls.from_json(fh.read())
