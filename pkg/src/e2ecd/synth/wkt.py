"""Minimal WKT POLYGON parser for building-footprint annotations.

Supports exactly the single-outer-ring POLYGON subset used by the corpus
annotation files. MULTIPOLYGONs and interior rings are rejected as
unsupported geometry; any other deviation raises a parse error carrying the
byte offset of the offending token.
"""

from __future__ import annotations

import re

import numpy as np

from ..errors import UnsupportedGeometryError, WktParseError

_NUMBER = re.compile(rb"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_KEYWORD = re.compile(rb"[A-Za-z]+")
_WS = re.compile(rb"\s*")


class _Cursor:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def skip_ws(self):
        self.pos = _WS.match(self.data, self.pos).end()

    def expect(self, char: bytes, what: str):
        self.skip_ws()
        if self.pos >= len(self.data) or self.data[self.pos : self.pos + 1] != char:
            raise WktParseError(f"expected {what}", self.pos)
        self.pos += 1

    def peek(self) -> bytes:
        self.skip_ws()
        return self.data[self.pos : self.pos + 1]

    def number(self) -> float:
        self.skip_ws()
        m = _NUMBER.match(self.data, self.pos)
        if m is None:
            raise WktParseError("expected a coordinate number", self.pos)
        self.pos = m.end()
        return float(m.group())


def parse_wkt_polygon(text: str) -> np.ndarray:
    """Parse ``POLYGON ((x y, ...))`` into an (N, 2) float64 vertex array.

    A trailing vertex equal to the first (the explicit ring closure) is
    dropped. Rings with fewer than 3 distinct vertices are rejected.
    """
    cur = _Cursor(text.encode("utf-8"))
    cur.skip_ws()
    kw_start = cur.pos
    m = _KEYWORD.match(cur.data, cur.pos)
    if m is None:
        raise WktParseError("expected geometry keyword", cur.pos)
    keyword = m.group().upper()
    cur.pos = m.end()
    if keyword == b"MULTIPOLYGON":
        raise UnsupportedGeometryError("MULTIPOLYGON geometries are not supported")
    if keyword != b"POLYGON":
        raise WktParseError(f"expected POLYGON, got {keyword.decode()!r}", kw_start)

    cur.expect(b"(", "'(' opening the polygon")
    ring_start = cur.pos
    cur.expect(b"(", "'(' opening the outer ring")
    vertices: list[tuple[float, float]] = []
    while True:
        x = cur.number()
        y = cur.number()
        vertices.append((x, y))
        nxt = cur.peek()
        if nxt == b",":
            cur.pos += 1
            continue
        if nxt == b")":
            cur.pos += 1
            break
        raise WktParseError("expected ',' or ')' after coordinate pair", cur.pos)

    if cur.peek() == b",":
        raise UnsupportedGeometryError("polygons with interior rings are not supported")
    cur.expect(b")", "')' closing the polygon")
    cur.skip_ws()
    if cur.pos != len(cur.data):
        raise WktParseError("trailing content after polygon", cur.pos)

    if len(vertices) > 1 and vertices[0] == vertices[-1]:
        vertices = vertices[:-1]
    verts = np.asarray(vertices, dtype=np.float64)
    if len(verts) < 3 or len(np.unique(verts, axis=0)) < 3:
        raise WktParseError("ring has fewer than 3 distinct vertices", ring_start)
    return verts
