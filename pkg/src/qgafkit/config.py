"""Pipeline configuration: JSON loading, schema validation and hashing."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .cnn.training import TrainConfig
from .errors import ValidationError
from .imaging import DEFAULT_RANGES
from .marketdata import CsvSchema
from .qgaf import QgafConfig
from .windowing import WindowConfig

ENCODERS = ("gasf", "gadf", "qgasf", "qgadf")


def load_schema() -> dict:
    text = resources.files("qgafkit").joinpath("config.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def check_config(raw: dict) -> list[str]:
    """Schema violations as human-readable strings (empty when valid)."""
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    return [f"{'/'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}" for e in errors]


@dataclass(frozen=True)
class DataSource:
    name: str
    path: str | None = None
    url: str | None = None
    date_column: str = "date"
    close_column: str = "close"

    @property
    def schema(self) -> CsvSchema:
        return CsvSchema(self.date_column, self.close_column)


@dataclass(frozen=True)
class EncoderConfig:
    kind: str = "qgasf"
    normalization: str = "sym"
    shots: int = 1024
    sign_mode: str = "analytic"
    exact: bool = False

    def __post_init__(self):
        if self.kind not in ENCODERS:
            raise ValidationError(f"encoder kind must be one of {ENCODERS}")

    @property
    def quantum(self) -> bool:
        return self.kind.startswith("q")

    def qgaf(self, seed: int) -> QgafConfig:
        return QgafConfig(self.shots, self.sign_mode, seed, self.exact)


@dataclass(frozen=True)
class ImagingConfig:
    export_pgm: bool = False
    export_png: bool = False
    ranges: dict[str, tuple[float, float]] = field(default_factory=lambda: dict(DEFAULT_RANGES))


@dataclass(frozen=True)
class PipelineConfig:
    sources: tuple[DataSource, ...] = ()
    cleaning: str = "forward_fill"
    window: WindowConfig = WindowConfig()
    encoder: EncoderConfig = EncoderConfig()
    imaging: ImagingConfig = ImagingConfig()
    train: TrainConfig = TrainConfig()
    compare_encoders: tuple[str, str] = ("gasf", "qgasf")
    out: str = "runs/default"
    seed: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "data": [asdict(s) for s in self.sources],
            "cleaning": self.cleaning,
            "window": asdict(self.window),
            "encoder": asdict(self.encoder),
            "imaging": {"export_pgm": self.imaging.export_pgm,
                        "export_png": self.imaging.export_png,
                        "ranges": {k: list(v) for k, v in sorted(self.imaging.ranges.items())}},
            "train": asdict(self.train),
            "compare": {"encoders": list(self.compare_encoders)},
            "out": self.out,
            "seed": self.seed,
        }

    def config_hash(self) -> str:
        """SHA-256 of the canonical config; the output directory is excluded."""
        d = self.to_dict()
        d.pop("out")
        for src in d["data"]:
            # where the bytes came from does not change results
            src.pop("path", None)
            src.pop("url", None)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()

    def with_encoder(self, kind: str) -> "PipelineConfig":
        return replace(self, encoder=replace(self.encoder, kind=kind))


def _pick(cls, section: dict | None):
    if not section:
        return cls()
    names = {f.name for f in fields(cls)}
    unknown = set(section) - names
    if unknown:
        raise ValidationError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    return cls(**section)


def from_dict(raw: dict, base_dir: Path | None = None) -> PipelineConfig:
    problems = check_config(raw)
    if problems:
        raise ValidationError("invalid config:\n  " + "\n  ".join(problems))
    seed = int(raw.get("seed", 0))
    data = raw.get("data", [])
    if isinstance(data, dict):
        data = [data]
    sources = []
    for k, src in enumerate(data):
        src = dict(src)
        if "path" in src and base_dir is not None and not Path(src["path"]).is_absolute():
            src["path"] = str((base_dir / src["path"]))
        if "name" not in src:
            src["name"] = Path(src.get("path") or src.get("url") or f"series{k}").stem or f"series{k}"
        sources.append(DataSource(**src))
    names = [s.name for s in sources]
    if len(set(names)) != len(names):
        raise ValidationError(f"data source names must be unique, got {names}")

    train = dict(raw.get("train", {}))
    train.setdefault("shuffle_seed", seed)
    train.setdefault("init_seed", seed)
    if "folds" in train:
        train.setdefault("train_fraction", (train["folds"] - 1) / train["folds"])
    if "loss" in train:
        train["loss"] = train["loss"].upper()
    imaging = dict(raw.get("imaging", {}))
    if "ranges" in imaging:
        imaging["ranges"] = {**DEFAULT_RANGES, **{k: tuple(v) for k, v in imaging["ranges"].items()}}
    compare = raw.get("compare", {}).get("encoders", ["gasf", "qgasf"])
    return PipelineConfig(
        sources=tuple(sources),
        cleaning=raw.get("cleaning", "forward_fill"),
        window=_pick(WindowConfig, raw.get("window")),
        encoder=_pick(EncoderConfig, raw.get("encoder")),
        imaging=_pick(ImagingConfig, imaging),
        train=_pick(TrainConfig, train),
        compare_encoders=tuple(compare),
        out=raw.get("out", "runs/default"),
        seed=seed,
    )


def load_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    return from_dict(raw, base_dir=path.parent)
