"""Experiment configuration: JSON files, presets and CLI overrides."""

from __future__ import annotations

import collections.abc as cabc
import dataclasses as dc
import enum
import hashlib
import inspect
import json
import typing as typ
from pathlib import Path

from zo_mopi.errors import ConfigInvalidError
from zo_mopi.objectives import (
    LogisticTask,
    MatrixQuadratic,
    ObjectiveKind,
    TinyMlp,
    load_dataset,
)
from zo_mopi.optimizers import CONFIG_TYPES, FoMuonConfig, OptimizerKind

if typ.TYPE_CHECKING:
    from zo_mopi.objectives import Objective
    from zo_mopi.optimizers import OptimizerConfig

OUTPUT_ROOT_ENV: typ.Final[str] = "ZO_MOPI_OUTPUT_ROOT"
LOG_LEVEL_ENV: typ.Final[str] = "ZO_MOPI_LOG_LEVEL"
DEFAULT_OUTPUT_ROOT: typ.Final[Path] = Path("runs")
CONFIG_HASH_LENGTH: typ.Final[int] = 12

PRESETS: typ.Final[dict[str, dict[OptimizerKind, dict[str, typ.Any]]]] = {
    "reference": {
        OptimizerKind.ZO_MOPI: {
            "eta": 1e-2,
            "beta": 0.9,
            "mu": 1e-3,
            "r": 64,
            "k": 32,
            "nu": 500,
            "n_queries": 4,
        },
        OptimizerKind.ZO_MUON: {
            "eta": 1e-2,
            "mu": 1e-3,
            "r": 64,
            "nu": 100,
            "n_queries": 4,
        },
        OptimizerKind.MEZO: {"eta": 1e-6, "mu": 1e-3, "n_queries": 4},
        OptimizerKind.FO_MUON: {"eta": 1e-2, "beta": 0.9},
    },
    "desk": {
        OptimizerKind.ZO_MOPI: {
            "eta": 1e-2,
            "beta": 0.9,
            "mu": 1e-3,
            "r": 16,
            "k": 8,
            "nu": 100,
            "n_queries": 4,
        },
        OptimizerKind.ZO_MUON: {
            "eta": 1e-2,
            "mu": 1e-3,
            "r": 16,
            "nu": 100,
            "n_queries": 4,
        },
        OptimizerKind.MEZO: {"eta": 1e-3, "mu": 1e-3, "n_queries": 4},
        OptimizerKind.FO_MUON: {"eta": 1e-2, "beta": 0.9},
    },
}
"""Named hyperparameter sets; ``reference`` matches the config defaults."""

_OBJECTIVE_FACTORIES: typ.Final[dict[ObjectiveKind, cabc.Callable[..., Objective]]] = {
    ObjectiveKind.QUADRATIC: MatrixQuadratic.create,
    ObjectiveKind.LOGISTIC: LogisticTask.create,
    ObjectiveKind.MLP: TinyMlp.create,
}
_DATA_PATH_KEY: typ.Final[str] = "data_path"


def _objective_keys(kind: ObjectiveKind) -> frozenset[str]:
    names = set(inspect.signature(_OBJECTIVE_FACTORIES[kind]).parameters) - {"seed"}
    if kind is ObjectiveKind.LOGISTIC:
        names.add(_DATA_PATH_KEY)
    return frozenset(names)


def _reject_unknown(
    prefix: str, data: cabc.Mapping[str, typ.Any], allowed: cabc.Set[str]
) -> None:
    for key in data:
        if key not in allowed:
            msg = f"unknown key (allowed: {sorted(allowed)})"
            raise ConfigInvalidError(f"{prefix}{key}", msg)


def _require_int(field: str, value: object) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigInvalidError(field, f"must be an integer, got {value!r}")
    return value


def _require_bool(field: str, value: object) -> bool:
    if not isinstance(value, bool):
        raise ConfigInvalidError(field, f"must be true or false, got {value!r}")
    return value


def _require_seeds(seeds: cabc.Sequence[object]) -> None:
    if not seeds:
        raise ConfigInvalidError("seeds", "must not be empty")
    for seed in seeds:
        if _require_int("seeds", seed) < 0:
            raise ConfigInvalidError("seeds", f"must be >= 0, got {seed}")


def _parse_enum[E: enum.Enum](field: str, enum_type: type[E], value: object) -> E:
    try:
        return enum_type(value)
    except ValueError:
        allowed = [member.value for member in enum_type]
        msg = f"must be one of {allowed}, got {value!r}"
        raise ConfigInvalidError(field, msg) from None


@dc.dataclass(frozen=True, slots=True)
class ObjectiveSpec:
    """Which objective to build, its construction knobs and its seed.

    The objective seed is shared by every method in a comparison, so all
    of them see the same data, batches and planted optimum.
    """

    kind: ObjectiveKind
    params: cabc.Mapping[str, typ.Any] = dc.field(default_factory=dict)
    seed: int = 0

    def __post_init__(self) -> None:
        """Reject keys the objective does not accept."""
        kind = _parse_enum("objective.kind", ObjectiveKind, self.kind)
        object.__setattr__(self, "kind", kind)
        _require_int("objective.seed", self.seed)
        _reject_unknown("objective.", self.params, _objective_keys(self.kind))

    @property
    def n_layers(self) -> int:
        """Return how many matrix parameters the objective exposes."""
        return 2 if self.kind is ObjectiveKind.MLP else 1

    def build(self) -> Objective:
        """Construct the objective."""
        params = dict(self.params)
        try:
            if self.kind is ObjectiveKind.LOGISTIC and _DATA_PATH_KEY in params:
                data = load_dataset(Path(params.pop(_DATA_PATH_KEY)))
                eval_count = params.pop("eval_count", max(1, data.count // 5))
                params.pop("train_count", None)
                params.pop("dim", None)
                params.pop("n_classes", None)
                return LogisticTask.from_dataset(
                    data, eval_count=eval_count, seed=self.seed, **params
                )
            return _OBJECTIVE_FACTORIES[self.kind](seed=self.seed, **params)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigInvalidError):
                raise
            raise ConfigInvalidError("objective", str(exc)) from exc

    def to_dict(self) -> dict[str, typ.Any]:
        """Return a JSON-serializable representation."""
        return {"kind": self.kind.value, "seed": self.seed, **self.params}

    @classmethod
    def from_dict(cls, data: cabc.Mapping[str, typ.Any]) -> ObjectiveSpec:
        """Parse ``{"kind": ..., "seed": ..., <knobs>}``."""
        if "kind" not in data:
            raise ConfigInvalidError("objective.kind", "is required")
        params = {k: v for k, v in data.items() if k not in {"kind", "seed"}}
        return cls(kind=data["kind"], params=params, seed=data.get("seed", 0))


@dc.dataclass(frozen=True, slots=True)
class OptimizerSpec:
    """Optimizer kind plus its validated hyperparameters."""

    kind: OptimizerKind
    config: OptimizerConfig

    @property
    def queries_per_layer_step(self) -> int:
        """Return the ledger cost of one step on one matrix parameter."""
        if isinstance(self.config, FoMuonConfig):
            return 1
        return self.config.rge.queries_per_estimate

    def to_dict(self) -> dict[str, typ.Any]:
        """Return a JSON-serializable representation."""
        data: dict[str, typ.Any] = {"kind": self.kind.value}
        for field in dc.fields(self.config):
            value = getattr(self.config, field.name)
            data[field.name] = str(value) if isinstance(value, str) else value
        return data

    @classmethod
    def from_dict(cls, data: cabc.Mapping[str, typ.Any]) -> OptimizerSpec:
        """Parse ``{"kind": ..., "preset": ..., <hyperparameters>}``.

        Preset values are applied first and explicit keys override them.
        """
        if "kind" not in data:
            raise ConfigInvalidError("optimizer.kind", "is required")
        kind = _parse_enum("optimizer.kind", OptimizerKind, data["kind"])
        config_type = CONFIG_TYPES[kind]
        values: dict[str, typ.Any] = {}
        preset = data.get("preset")
        if preset is not None:
            if preset not in PRESETS:
                msg = f"must be one of {sorted(PRESETS)}, got {preset!r}"
                raise ConfigInvalidError("optimizer.preset", msg)
            values.update(PRESETS[preset][kind])
        overrides = {k: v for k, v in data.items() if k not in {"kind", "preset"}}
        allowed = {f.name for f in dc.fields(config_type)}
        _reject_unknown("optimizer.", overrides, allowed)
        values.update(overrides)
        try:
            config = config_type(**values)
        except ConfigInvalidError as exc:
            raise ConfigInvalidError(f"optimizer.{exc.field}", exc.message) from exc
        return cls(kind=kind, config=config)


@dc.dataclass(frozen=True, slots=True)
class ExperimentConfig:
    """One experiment: objective, optimizer, query budget and seeds.

    Attributes
    ----------
    budget : int
        Total training queries per seed; must be a multiple of the cost
        of one step across all layers.
    seeds : tuple[int, ...]
        Optimizer seeds; each produces one trajectory.
    eval_every : int
        Steps between trajectory records.
    output : Path | None
        Output directory; ``None`` defers to the environment.
    record_timing : bool
        When false, wall times are written as zero so reruns are
        byte-identical.
    track_spi : bool
        Record the SPI tracking error (ZO-MOPI only, uses the SVD oracle).
    workers : int
        Seeds run concurrently on this many threads.
    """

    objective: ObjectiveSpec
    optimizer: OptimizerSpec
    budget: int
    seeds: tuple[int, ...] = (0,)
    eval_every: int = 10
    name: str = "experiment"
    output: Path | None = None
    record_timing: bool = True
    track_spi: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        """Validate the budget against the per-step cost and the seed list."""
        if _require_int("budget", self.budget) < 0:
            raise ConfigInvalidError("budget", "must be >= 0")
        _require_seeds(self.seeds)
        if _require_int("eval_every", self.eval_every) < 1:
            raise ConfigInvalidError("eval_every", "must be >= 1")
        if _require_int("workers", self.workers) < 1:
            raise ConfigInvalidError("workers", "must be >= 1")
        _require_bool("record_timing", self.record_timing)
        cost = self.queries_per_step
        if self.budget % cost:
            msg = f"must be a multiple of the per-step cost {cost}"
            raise ConfigInvalidError("budget", msg)
        tracked = _require_bool("track_spi", self.track_spi)
        if tracked and self.optimizer.kind is not OptimizerKind.ZO_MOPI:
            raise ConfigInvalidError("track_spi", "is only available for zo-mopi")

    @property
    def queries_per_step(self) -> int:
        """Return the training queries charged by one step over all layers."""
        return self.optimizer.queries_per_layer_step * self.objective.n_layers

    @property
    def steps(self) -> int:
        """Return the number of optimizer steps the budget pays for."""
        return self.budget // self.queries_per_step

    def result_dict(self) -> dict[str, typ.Any]:
        """Return the fields that determine results, in canonical form."""
        return {
            "name": self.name,
            "objective": self.objective.to_dict(),
            "optimizer": self.optimizer.to_dict(),
            "budget": self.budget,
            "seeds": list(self.seeds),
            "eval_every": self.eval_every,
            "record_timing": self.record_timing,
            "track_spi": self.track_spi,
        }

    def config_hash(self) -> str:
        """Return a short SHA-256 digest of :meth:`result_dict`."""
        canonical = json.dumps(
            self.result_dict(), sort_keys=True, separators=(",", ":")
        )
        digest = hashlib.sha256(canonical.encode("utf-8")).hexdigest()
        return digest[:CONFIG_HASH_LENGTH]

    def to_dict(self) -> dict[str, typ.Any]:
        """Return a JSON-serializable representation."""
        data = self.result_dict()
        data["workers"] = self.workers
        if self.output is not None:
            data["output"] = str(self.output)
        return data

    @classmethod
    def from_dict(cls, data: cabc.Mapping[str, typ.Any]) -> ExperimentConfig:
        """Parse a mapping, reporting the offending field on failure."""
        allowed = {f.name for f in dc.fields(cls)}
        _reject_unknown("", data, allowed)
        for required in ("objective", "optimizer", "budget"):
            if required not in data:
                raise ConfigInvalidError(required, "is required")
        for section in ("objective", "optimizer"):
            if not isinstance(data[section], cabc.Mapping):
                raise ConfigInvalidError(section, "must be a JSON object")
        seeds = data.get("seeds", [0])
        if not isinstance(seeds, cabc.Sequence) or isinstance(seeds, str):
            raise ConfigInvalidError("seeds", "must be a list of integers")
        output = data.get("output")
        return cls(
            objective=ObjectiveSpec.from_dict(data["objective"]),
            optimizer=OptimizerSpec.from_dict(data["optimizer"]),
            budget=data["budget"],
            seeds=tuple(seeds),
            eval_every=data.get("eval_every", 10),
            name=str(data.get("name", "experiment")),
            output=None if output is None else Path(output),
            record_timing=data.get("record_timing", True),
            track_spi=data.get("track_spi", False),
            workers=data.get("workers", 1),
        )

    def save(self, path: Path) -> None:
        """Write this config to *path* as JSON, creating directories as needed."""
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: Path) -> ExperimentConfig:
        """Load a config from the JSON file at *path*."""
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigInvalidError(str(path), f"invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigInvalidError(str(path), "top level must be a JSON object")
        return cls.from_dict(data)

    def with_overrides(self, **changes: typ.Any) -> ExperimentConfig:  # noqa: ANN401
        """Return a copy with the non-``None`` *changes* applied."""
        return dc.replace(self, **{k: v for k, v in changes.items() if v is not None})


__all__ = [
    "DEFAULT_OUTPUT_ROOT",
    "LOG_LEVEL_ENV",
    "OUTPUT_ROOT_ENV",
    "PRESETS",
    "ExperimentConfig",
    "ObjectiveSpec",
    "OptimizerSpec",
]
