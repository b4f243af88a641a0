"""2D affine transform algebra.

An :class:`Affine2D` stores a 2x3 coefficient matrix ``[L | t]`` that maps a
point ``(x, y)`` to ``L @ (x, y) + t``. Throughout the package the transform
maps *output* (resampling) coordinates to *input* coordinates, which is the
convention needed to pull pixel values from a source raster.

All arithmetic is float64; transforms are immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateTransformError

_DET_EPS = 1e-8


@dataclass(frozen=True)
class Affine2D:
    """Invertible 2D affine transform with a 2x3 float64 coefficient matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        if m.shape != (2, 3):
            raise ValueError(f"affine matrix must be 2x3, got {m.shape}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    # -- constructors -----------------------------------------------------

    @classmethod
    def identity(cls) -> "Affine2D":
        return cls(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))

    @classmethod
    def translation(cls, tx: float, ty: float) -> "Affine2D":
        return cls(np.array([[1.0, 0.0, tx], [0.0, 1.0, ty]]))

    @classmethod
    def from_params(
        cls,
        rotation_deg: float = 0.0,
        scale: float = 1.0,
        shear_deg: float = 0.0,
        translation: tuple[float, float] = (0.0, 0.0),
        center: tuple[float, float] = (0.0, 0.0),
    ) -> "Affine2D":
        """Rotation, isotropic scale and x-shear about ``center``, then translation.

        The linear part is ``R(rotation) @ Shear(shear) @ scale*I``; the fixed
        point of the linear action is ``center`` before ``translation`` is added.
        """
        # exact values at right angles keep 90/180/270 degree warps lossless
        quarter_turns = {0.0: (1.0, 0.0), 90.0: (0.0, 1.0), 180.0: (-1.0, 0.0), 270.0: (0.0, -1.0)}
        key = rotation_deg % 360.0
        if key in quarter_turns:
            cos_th, sin_th = quarter_turns[key]
        else:
            th = math.radians(rotation_deg)
            cos_th, sin_th = math.cos(th), math.sin(th)
        sh = math.tan(math.radians(shear_deg))
        rot = np.array([[cos_th, -sin_th], [sin_th, cos_th]])
        shear = np.array([[1.0, sh], [0.0, 1.0]])
        lin = rot @ shear * scale
        cx, cy = center
        c = np.array([cx, cy], dtype=np.float64)
        t = c - lin @ c + np.asarray(translation, dtype=np.float64)
        return cls(np.concatenate([lin, t[:, None]], axis=1))

    # -- properties --------------------------------------------------------

    @property
    def linear(self) -> np.ndarray:
        return self.matrix[:, :2]

    @property
    def offset(self) -> np.ndarray:
        return self.matrix[:, 2]

    @property
    def det(self) -> float:
        l = self.matrix
        return float(l[0, 0] * l[1, 1] - l[0, 1] * l[1, 0])

    # -- algebra -----------------------------------------------------------

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Map an array of points with shape (..., 2) through the transform."""
        pts = np.asarray(points, dtype=np.float64)
        if pts.shape[-1] != 2:
            raise ValueError(f"points must have a trailing axis of size 2, got {pts.shape}")
        return pts @ self.linear.T + self.offset

    def compose(self, other: "Affine2D") -> "Affine2D":
        """Return the transform mapping x to self(other(x))."""
        lin = self.linear @ other.linear
        t = self.linear @ other.offset + self.offset
        return Affine2D(np.concatenate([lin, t[:, None]], axis=1))

    def invert(self) -> "Affine2D":
        d = self.det
        if abs(d) <= _DET_EPS:
            raise DegenerateTransformError(f"affine transform is singular (det={d:.3e})")
        l = self.linear
        inv_lin = np.array([[l[1, 1], -l[0, 1]], [-l[1, 0], l[0, 0]]]) / d
        inv_t = -inv_lin @ self.offset
        return Affine2D(np.concatenate([inv_lin, inv_t[:, None]], axis=1))

    def coefficients(self) -> list[list[float]]:
        """Nested-list form of the matrix, for JSON metadata."""
        return [[float(v) for v in row] for row in self.matrix]
