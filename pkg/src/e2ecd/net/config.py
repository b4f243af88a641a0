"""Architecture configuration and the tensor schema derived from it.

Configs can be loaded from a plain ``key = value`` text file. Recognized
keys (all optional, defaults in parentheses):

    in_channels  (3)            input image channels
    channels     (16,32,64,128) pyramid channel counts c1..c4
    radius       (4)            local correlation search radius
    temperature  (auto)         soft-argmax temperature; "auto" selects
                                1/sqrt(#source positions) at call time
    levels       (4)            pyramid level count; only 4 is supported

Lines starting with ``#`` are comments. Unknown keys are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

_CONSENSUS_CHANNELS = (16, 16)
_HEAD_HIDDEN = (64, 32)
_REFINE_HIDDEN = 32


@dataclass(frozen=True)
class ArchConfig:
    in_channels: int = 3
    channels: tuple[int, int, int, int] = (16, 32, 64, 128)
    radius: int = 4
    temperature: float | None = None
    levels: int = 4

    def __post_init__(self):
        if self.in_channels < 1:
            raise ValueError("in_channels must be >= 1")
        if len(self.channels) != 4 or any(c < 1 for c in self.channels):
            raise ValueError("channels must be four positive counts")
        if self.radius < 1:
            raise ValueError("radius must be >= 1")
        if self.temperature is not None and self.temperature <= 0:
            raise ValueError("temperature must be positive or auto")
        if self.levels != 4:
            raise ValueError("only a 4-level pyramid is supported")

    @property
    def local_corr_channels(self) -> int:
        return (2 * self.radius + 1) ** 2

    # -- tensor schema -----------------------------------------------------

    def tensor_shapes(self) -> dict[str, tuple[int, ...]]:
        """Ordered name -> shape map of every tensor the network uses."""
        c1, c2, c3, c4 = self.channels
        h1, h2 = _HEAD_HIDDEN
        shapes: dict[str, tuple[int, ...]] = {}

        def conv2(prefix: str, cout: int, cin: int, bias: bool = True):
            shapes[f"{prefix}.weight"] = (cout, cin, 3, 3)
            if bias:
                shapes[f"{prefix}.bias"] = (cout,)

        conv2("extractor.stem", c1, self.in_channels)
        for k, (cout, cin) in enumerate(
            [(c1, c1), (c2, c1), (c3, c2), (c4, c3)], start=1
        ):
            conv2(f"extractor.stage{k}", cout, cin)

        cc1, cc2 = _CONSENSUS_CHANNELS
        shapes["consensus.conv1.weight"] = (cc1, 1, 3, 3, 3, 3)
        shapes["consensus.conv2.weight"] = (cc2, cc1, 3, 3, 3, 3)
        shapes["consensus.conv3.weight"] = (1, cc2, 3, 3, 3, 3)

        conv2("head4.refine.conv1", _REFINE_HIDDEN, 3)
        conv2("head4.refine.conv2", 2, _REFINE_HIDDEN)

        flow_in = self.local_corr_channels + 2
        for lvl, c_lvl in ((1, c1), (2, c2), (3, c3)):
            conv2(f"l{lvl}.flow.conv1", h1, flow_in)
            conv2(f"l{lvl}.flow.conv2", h2, h1)
            conv2(f"l{lvl}.flow.conv3", 2, h2)
            conv2(f"l{lvl}.cd.conv1", h1, c_lvl)
            conv2(f"l{lvl}.cd.conv2", h2, h1)
            conv2(f"l{lvl}.cd.conv3", 2, h2)
        return shapes

    def zero_initialized(self) -> frozenset[str]:
        """Weights that start at zero: the final layer of every residual head."""
        names = {"head4.refine.conv2.weight"}
        names.update(f"l{lvl}.flow.conv3.weight" for lvl in (1, 2, 3))
        return frozenset(names)

    # -- file round trip ----------------------------------------------------

    @classmethod
    def from_file(cls, path: str | Path) -> "ArchConfig":
        values = parse_keyvalue_file(path)
        return cls.from_mapping(values)

    @classmethod
    def from_mapping(cls, values: dict[str, str]) -> "ArchConfig":
        cfg = cls()
        known = {"in_channels", "channels", "radius", "temperature", "levels"}
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"unknown architecture keys: {sorted(unknown)}")
        kwargs = {}
        if "in_channels" in values:
            kwargs["in_channels"] = int(values["in_channels"])
        if "channels" in values:
            parts = tuple(int(v) for v in values["channels"].split(","))
            kwargs["channels"] = parts
        if "radius" in values:
            kwargs["radius"] = int(values["radius"])
        if "temperature" in values:
            t = values["temperature"]
            kwargs["temperature"] = None if t.lower() == "auto" else float(t)
        if "levels" in values:
            kwargs["levels"] = int(values["levels"])
        return replace(cfg, **kwargs)

    def to_file(self, path: str | Path) -> None:
        lines = [
            f"in_channels = {self.in_channels}",
            "channels = " + ",".join(str(c) for c in self.channels),
            f"radius = {self.radius}",
            "temperature = " + ("auto" if self.temperature is None else repr(self.temperature)),
            f"levels = {self.levels}",
        ]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_keyvalue_file(path: str | Path) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment, blanks ignored."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values
