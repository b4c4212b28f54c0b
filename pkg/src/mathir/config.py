"""Flat ``key = value`` run configuration.

Lines starting with ``#`` and blank lines are ignored. Unknown keys are an
error. ``Config.loads(cfg.dumps()) == cfg`` for every config.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from mathir.errors import MathIRError
from mathir.index import ScoringParams
from mathir.mathml import MoiConfig


class ConfigError(MathIRError):
    pass


@dataclass(frozen=True)
class Config:
    include_root: bool = False
    include_numerals: bool = False
    k: float = 1.2
    b: float = 0.75
    math_boost: float = 2.0
    stage1_depth: int = 50
    moi_k: int = 1000
    knn_k: int = 10
    fuzzy_k: int = 10
    eval_p: int = 1000
    eval_k: int = 10
    empty_policy: str = "exclude"
    run_tag: str = "mathir"

    @property
    def moi_config(self) -> MoiConfig:
        return MoiConfig(self.include_root, self.include_numerals)

    @property
    def scoring(self) -> ScoringParams:
        return ScoringParams(self.k, self.b, self.math_boost, self.stage1_depth)

    def dumps(self) -> str:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            out.append(f"{f.name} = {str(v).lower() if isinstance(v, bool) else v}")
        return "\n".join(out) + "\n"

    @classmethod
    def loads(cls, text: str) -> Config:
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"config line {lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in types:
                raise ConfigError(f"config line {lineno}: unknown key {key!r}")
            values[key] = _coerce(types[key], value, lineno)
        return cls(**values)

    def override(self, **changes) -> Config:
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def _coerce(type_name: str, value: str, lineno: int):
    try:
        if type_name == "bool":
            low = value.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(value)
        if type_name == "int":
            return int(value)
        if type_name == "float":
            return float(value)
        return value
    except ValueError:
        raise ConfigError(f"config line {lineno}: bad {type_name} value {value!r}") from None
