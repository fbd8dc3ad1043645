"""STL reading and writing.

Both flavours of the format are supported:

* binary: 80-byte header, little-endian uint32 triangle count, then one
  50-byte record per triangle (normal, three vertices as float32 triples,
  and a 16-bit attribute word);
* ASCII: the ``solid / facet normal / outer loop / vertex`` grammar.

Parsing produces a :class:`TriangleSoup`, an unindexed pile of triangles with
whatever normals the file stored.  Stored normals are kept only for
diagnostics; downstream code recomputes normals from the winding order.
Coordinates are interpreted as millimetres.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParseError

RECORD_DTYPE = np.dtype([
    ("normal", "<3f4"),
    ("v0", "<3f4"),
    ("v1", "<3f4"),
    ("v2", "<3f4"),
    ("attr", "<u2"),
])

_HEADER_LEN = 80


@dataclass
class TriangleSoup:
    """Raw triangle list straight from an STL file.

    Attributes
    ----------
    triangles : (n, 3, 3) float64 array
        Corner coordinates in file order, millimetres.
    stored_normals : (n, 3) float64 array
        Normals as written in the file (not normalised, not trusted).
    name : str
        Solid name (ASCII) or a repr of the binary header, informational only.
    """

    triangles: np.ndarray
    stored_normals: np.ndarray
    name: str = ""

    def __len__(self) -> int:
        return self.triangles.shape[0]


def parse_stl(data: bytes, name: str = "") -> TriangleSoup:
    """Parse STL bytes, auto-detecting binary versus ASCII.

    A file is treated as binary when its length exactly matches the declared
    record count; this takes priority over the header text, because binary
    files whose header happens to begin with ``solid`` exist in the wild.

    Raises
    ------
    ParseError
        On truncation, malformed tokens, or an empty solid.  Binary errors
        carry a byte offset, ASCII errors a line number.
    """
    if len(data) >= _HEADER_LEN + 4:
        count = int(np.frombuffer(data, dtype="<u4", count=1,
                                  offset=_HEADER_LEN)[0])
        expected = _HEADER_LEN + 4 + 50 * count
        if len(data) == expected:
            return _parse_binary(data, count, name)

    if data.lstrip()[:5].lower() == b"solid":
        return _parse_ascii(data, name)

    # Neither a consistent binary length nor ASCII.  Distinguish a truncated
    # binary file (useful offset) from garbage.
    if len(data) >= _HEADER_LEN + 4 and data.lstrip()[:5].lower() != b"solid":
        count = int(np.frombuffer(data, dtype="<u4", count=1,
                                  offset=_HEADER_LEN)[0])
        have = (len(data) - _HEADER_LEN - 4) // 50
        raise ParseError(
            f"truncated binary STL: header declares {count} triangles, "
            f"only {have} complete records present",
            offset=_HEADER_LEN + 4 + 50 * have)
    raise ParseError("not a recognisable STL file", offset=0)


def _parse_binary(data: bytes, count: int, name: str) -> TriangleSoup:
    if count == 0:
        raise ParseError("empty mesh: binary STL declares 0 triangles",
                         offset=_HEADER_LEN)
    records = np.frombuffer(data, dtype=RECORD_DTYPE, count=count,
                            offset=_HEADER_LEN + 4)
    triangles = np.stack(
        [records["v0"], records["v1"], records["v2"]], axis=1
    ).astype(np.float64)
    normals = records["normal"].astype(np.float64)
    bad = ~np.isfinite(triangles).all(axis=(1, 2))
    if bad.any():
        first = int(np.flatnonzero(bad)[0])
        raise ParseError(
            f"non-finite vertex coordinate in triangle {first}",
            offset=_HEADER_LEN + 4 + 50 * first)
    header = data[:_HEADER_LEN].rstrip(b"\x00 ").decode("ascii", "replace")
    return TriangleSoup(triangles, normals, name or header)


def _parse_ascii(data: bytes, name: str) -> TriangleSoup:
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as exc:
        raise ParseError(f"ASCII STL contains non-ASCII bytes: {exc}") from None

    triangles: list[np.ndarray] = []
    normals: list[list[float]] = []
    solid_name = name
    state = "start"          # start -> body -> done
    corners: list[list[float]] = []

    def floats(parts: list[str], lineno: int, what: str) -> list[float]:
        if len(parts) != 3:
            raise ParseError(f"expected 3 coordinates after '{what}', "
                             f"got {len(parts)}", line=lineno)
        try:
            return [float(p) for p in parts]
        except ValueError:
            raise ParseError(f"non-numeric coordinate {parts!r} after "
                             f"'{what}'", line=lineno) from None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split()
        if not parts:
            continue
        key = parts[0].lower()
        if state == "start":
            if key != "solid":
                raise ParseError(f"expected 'solid', got '{parts[0]}'",
                                 line=lineno)
            solid_name = solid_name or " ".join(parts[1:])
            state = "body"
        elif key == "facet":
            if len(parts) < 2 or parts[1].lower() != "normal":
                raise ParseError("expected 'facet normal'", line=lineno)
            normals.append(floats(parts[2:], lineno, "facet normal"))
            corners = []
        elif key == "outer":
            pass
        elif key == "vertex":
            corners.append(floats(parts[1:], lineno, "vertex"))
            if len(corners) > 3:
                raise ParseError("more than 3 vertices in facet", line=lineno)
        elif key == "endloop":
            if len(corners) != 3:
                raise ParseError(f"facet has {len(corners)} vertices, "
                                 "expected 3", line=lineno)
        elif key == "endfacet":
            triangles.append(np.array(corners, dtype=np.float64))
        elif key == "endsolid":
            state = "done"
            break
        else:
            raise ParseError(f"unexpected token '{parts[0]}'", line=lineno)

    if state == "start":
        raise ParseError("empty file", line=1)
    if state != "done":
        raise ParseError("missing 'endsolid'", line=len(text.splitlines()))
    if not triangles:
        raise ParseError("empty mesh: solid contains no facets", line=1)
    return TriangleSoup(np.stack(triangles),
                        np.array(normals, dtype=np.float64), solid_name)


def read_stl(path) -> TriangleSoup:
    """Read an STL file from ``path``."""
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_stl(data, name=str(path))


def write_stl(soup: TriangleSoup, header: str = "archmark") -> bytes:
    """Serialise a soup as binary STL bytes.

    Coordinates are stored as float32, so a parse -> write -> parse round
    trip of a binary file reproduces the soup exactly.
    """
    n = len(soup)
    records = np.zeros(n, dtype=RECORD_DTYPE)
    records["normal"] = soup.stored_normals.astype(np.float32)
    records["v0"] = soup.triangles[:, 0].astype(np.float32)
    records["v1"] = soup.triangles[:, 1].astype(np.float32)
    records["v2"] = soup.triangles[:, 2].astype(np.float32)
    head = header.encode("ascii", "replace")[:_HEADER_LEN]
    head += b"\x00" * (_HEADER_LEN - len(head))
    return head + np.uint32(n).tobytes() + records.tobytes()


def write_stl_file(soup: TriangleSoup, path, header: str = "archmark") -> None:
    with open(path, "wb") as fh:
        fh.write(write_stl(soup, header))
