"""Exception types shared across the package."""

from __future__ import annotations


class E2ECDError(Exception):
    """Base class for all package-specific failures."""


class ShapeError(E2ECDError, ValueError):
    """Array dimensions or channel counts do not satisfy an operation's contract."""


class DegenerateTransformError(E2ECDError, ValueError):
    """2D affine transform is singular (|det| of the linear part <= 1e-8)."""


class WktParseError(E2ECDError, ValueError):
    """Malformed WKT text. Carries the byte offset of the offending token."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class UnsupportedGeometryError(E2ECDError, ValueError):
    """Geometry is syntactically valid WKT but outside the supported subset."""


class MissingParameterError(E2ECDError, KeyError):
    """A required named tensor is absent from the weight store."""

    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"missing weight tensor: {self.name!r}"


class ContainerFormatError(E2ECDError, ValueError):
    """Weight container bytes are corrupt. Carries the byte offset when known."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class SchemaError(E2ECDError, ValueError):
    """Weight store contents do not match the architecture's tensor schema."""


class UndefinedMetricError(E2ECDError, ValueError):
    """Metric has an empty evaluation domain (e.g. no valid pixels)."""
