"""Scale configuration: which body parts and how many tokens per scale."""

import math
from dataclasses import dataclass, field

from ..errors import ConfigError
from ..fsq import LevelSpec
from ..motion.types import check_nested

_ALL = ("pelvis", "torso", "legs", "arms", "head")

# reference part sets and token lengths, defined at a 49-token base length
_PART_TABLE = {
    2: (("pelvis",), _ALL),
    4: (("pelvis", "torso"),
        ("pelvis", "torso", "legs"),
        ("pelvis", "torso", "legs", "arms"),
        _ALL),
    6: (("pelvis",),
        ("pelvis", "torso"),
        ("pelvis", "torso", "legs"),
        ("pelvis", "torso", "legs", "arms"),
        _ALL, _ALL),
}
_PART_TABLE[8] = _PART_TABLE[6] + (_ALL, _ALL)

_NS_TABLE = {
    2: (16, 49),
    4: (16, 24, 32, 49),
    6: (16, 24, 32, 40, 49, 49),
}
_NS_TABLE[8] = _NS_TABLE[6] + (49, 49)

_REF_BASE = 49


@dataclass(frozen=True)
class ScaleConfig:
    part_sets: tuple
    n_tokens: tuple
    latent_dim: int = 32
    downsample: int = 4
    level_specs: tuple = field(default=None)
    hidden: int = 64
    ste_variant: str = "bounded"

    def __post_init__(self):
        if len(self.part_sets) != len(self.n_tokens):
            raise ConfigError("part_sets and n_tokens must have one entry per scale")
        if len(self.part_sets) < 1:
            raise ConfigError("need at least one scale")
        check_nested(self.part_sets)
        ns = self.n_tokens
        if any(a > b for a, b in zip(ns, ns[1:])):
            raise ConfigError(f"token lengths must be non-decreasing: {ns}")
        if any(n < 1 for n in ns):
            raise ConfigError("token lengths must be positive")
        specs = self.level_specs
        if specs is None:
            specs = tuple(LevelSpec((8, 8, 8)) for _ in self.part_sets)
            object.__setattr__(self, "level_specs", specs)
        if len(specs) != len(self.part_sets):
            raise ConfigError("need one LevelSpec per scale")
        if self.ste_variant not in ("bounded", "literal"):
            raise ConfigError(f"unknown STE variant {self.ste_variant!r}")

    @property
    def n_scales(self) -> int:
        return len(self.part_sets)

    @property
    def base_tokens(self) -> int:
        """n: the latent length every scale is aggregated at."""
        return self.n_tokens[-1]

    @property
    def frames_required(self) -> int:
        return self.base_tokens * self.downsample

    def codebook_sizes(self):
        return tuple(spec.size for spec in self.level_specs)

    def to_dict(self) -> dict:
        return {
            "part_sets": [list(p) for p in self.part_sets],
            "n_tokens": list(self.n_tokens),
            "latent_dim": self.latent_dim,
            "downsample": self.downsample,
            "levels": [list(spec.levels) for spec in self.level_specs],
            "hidden": self.hidden,
            "ste_variant": self.ste_variant,
        }

    @classmethod
    def from_dict(cls, d: dict):
        return cls(
            part_sets=tuple(tuple(p) for p in d["part_sets"]),
            n_tokens=tuple(int(n) for n in d["n_tokens"]),
            latent_dim=int(d["latent_dim"]),
            downsample=int(d["downsample"]),
            level_specs=tuple(LevelSpec(ls) for ls in d["levels"]),
            hidden=int(d.get("hidden", 64)),
            ste_variant=d.get("ste_variant", "bounded"),
        )


def make_scale_config(n_scales: int = 6, n_frames: int = 64, downsample: int = 4,
                      latent_dim: int = 32, levels=(8, 8, 8), hidden: int = 64,
                      ste_variant: str = "bounded") -> ScaleConfig:
    """Preset configs with token lengths rescaled from the 49-token reference.

    Reference lengths are defined where the base latent length is 49; for other
    frame counts each n_s becomes ceil(ref * n / 49) with n = n_frames/downsample.
    """
    if n_scales not in _PART_TABLE:
        raise ConfigError(f"no preset for {n_scales} scales (have {sorted(_PART_TABLE)})")
    if n_frames % downsample != 0:
        raise ConfigError(f"n_frames {n_frames} not divisible by downsample {downsample}")
    n = n_frames // downsample
    ns = tuple(math.ceil(ref * n / _REF_BASE) for ref in _NS_TABLE[n_scales])
    specs = tuple(LevelSpec(levels) for _ in range(n_scales))
    return ScaleConfig(part_sets=_PART_TABLE[n_scales], n_tokens=ns,
                       latent_dim=latent_dim, downsample=downsample,
                       level_specs=specs, hidden=hidden, ste_variant=ste_variant)
