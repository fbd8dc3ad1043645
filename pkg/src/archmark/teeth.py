"""Tooth type catalogue and arch ordering.

Palmer-style codes: quadrant prefix (UR, UL, LR, LL) plus ordinal (1-8
adult, A-E deciduous).  Molars that often segment as two pieces also exist
as half types: ``X.0`` is the mesial half (towards the midline), ``X.1``
distal.  Adult molars 6, 7, 8 and the deciduous second molar E have halves.

Types are listed in arch order, the direction of increasing ``s`` (frame
x).  Chirality of the canonical frame (right = forwards x up) puts the
patient's right quadrant on frame-left for upper models and on frame-right
for lower ones, so:

* upper:  UR8.1 UR8 UR8.0 ... UR1 | UL1 ... UL8.0 UL8 UL8.1
* lower:  LL8.1 LL8 LL8.0 ... LL1 | LR1 ... LR8.0 LR8 LR8.1

Within a molar triple the half nearer the arch start comes first and the
whole sits between its halves.  Left/right types share measurement
statistics, so the database key drops the quadrant (``UL6.0`` -> ``6.0``).
"""

from __future__ import annotations

from dataclasses import dataclass

JAW_KINDS = ("adult_upper", "adult_lower", "deciduous_upper",
             "deciduous_lower")

_ADULT_ORDINALS = ("1", "2", "3", "4", "5", "6", "7", "8")
_DECIDUOUS_ORDINALS = ("A", "B", "C", "D", "E")
_ADULT_HALVED = frozenset(("6", "7", "8"))
_DECIDUOUS_HALVED = frozenset(("E",))

_CLASS = {
    "1": "incisor", "2": "incisor", "3": "canine",
    "4": "premolar", "5": "premolar", "6": "molar", "7": "molar",
    "8": "molar",
    "A": "incisor", "B": "incisor", "C": "canine", "D": "molar",
    "E": "molar",
}


@dataclass(frozen=True)
class ToothType:
    """One assignable tooth type.

    ``role`` is "plain" for ordinary teeth, or "whole" / "mesial" /
    "distal" for the members of a molar triple (``molar_id`` groups the
    triple).  ``key`` is the quadrant-less database key.
    """

    code: str           # e.g. "UR6.0"
    key: str            # e.g. "6.0"
    ordinal: str        # "1".."8" or "A".."E"
    side: str           # "L" | "R" (patient's side)
    jaw_kind: str
    role: str           # "plain" | "whole" | "mesial" | "distal"
    molar_id: str | None
    tooth_class: str    # incisor | canine | premolar | molar

    @property
    def base_code(self) -> str:
        """The whole-tooth code this type reports as (halves merge up)."""
        prefix = self.code.split(".")[0]
        return prefix

    @property
    def is_half(self) -> bool:
        return self.role in ("mesial", "distal")


def _quadrant(jaw_kind: str, side: str, towards_midline: bool
              ) -> list[ToothType]:
    """Types of one quadrant, in arch order.

    ``towards_midline`` True lists backmost-first (ordinals descending),
    as on the limb where the arch starts.
    """
    deciduous = jaw_kind.startswith("deciduous")
    ordinals = _DECIDUOUS_ORDINALS if deciduous else _ADULT_ORDINALS
    halved = _DECIDUOUS_HALVED if deciduous else _ADULT_HALVED
    prefix = ("U" if jaw_kind.endswith("upper") else "L") + side

    out: list[ToothType] = []
    seq = list(reversed(ordinals)) if towards_midline else list(ordinals)
    for o in seq:
        base = prefix + o
        common = dict(ordinal=o, side=side, jaw_kind=jaw_kind,
                      tooth_class=_CLASS[o])
        if o in halved:
            mesial = ToothType(code=base + ".0", key=o + ".0", role="mesial",
                               molar_id=base, **common)
            whole = ToothType(code=base, key=o, role="whole",
                              molar_id=base, **common)
            distal = ToothType(code=base + ".1", key=o + ".1", role="distal",
                               molar_id=base, **common)
            # Whole between its halves; the half nearer the arch start first.
            if towards_midline:
                out.extend([distal, whole, mesial])
            else:
                out.extend([mesial, whole, distal])
        else:
            out.append(ToothType(code=base, key=o, role="plain",
                                 molar_id=None, **common))
    return out


def type_table(jaw_kind: str) -> list[ToothType]:
    """All assignable types of ``jaw_kind`` in arch order."""
    if jaw_kind not in JAW_KINDS:
        raise ValueError(f"unknown jaw kind {jaw_kind!r}; "
                         f"expected one of {JAW_KINDS}")
    first = "R" if jaw_kind.endswith("upper") else "L"
    second = "L" if first == "R" else "R"
    return (_quadrant(jaw_kind, first, towards_midline=True)
            + _quadrant(jaw_kind, second, towards_midline=False))


def database_keys(jaw_kind: str) -> list[str]:
    """Distinct quadrant-less keys of ``jaw_kind`` in arch order."""
    seen: list[str] = []
    for t in type_table(jaw_kind):
        if t.key not in seen:
            seen.append(t.key)
    return seen


def tooth_class(ordinal: str) -> str:
    """incisor / canine / premolar / molar for an ordinal ("1".."8", "A".."E")."""
    try:
        return _CLASS[ordinal]
    except KeyError:
        raise ValueError(f"unknown tooth ordinal {ordinal!r}") from None


def parse_code(code: str) -> tuple[str, str, str | None]:
    """Split a Palmer code into (quadrant, ordinal, half).

    ``half`` is "0", "1" or None.  Raises ValueError on malformed codes.
    """
    quadrant, rest = code[:2], code[2:]
    if quadrant[0] not in "UL" or quadrant[1] not in "RL" or not rest:
        raise ValueError(f"malformed tooth code {code!r}")
    if "." in rest:
        ordinal, half = rest.split(".", 1)
        if half not in ("0", "1"):
            raise ValueError(f"malformed half suffix in {code!r}")
    else:
        ordinal, half = rest, None
    if ordinal not in _CLASS:
        raise ValueError(f"unknown tooth ordinal in {code!r}")
    return quadrant, ordinal, half
