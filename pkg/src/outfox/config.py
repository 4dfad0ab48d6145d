"""Deployment configuration: data paths, rounds, models, annotators, tokens.

Config files are JSON. Validation happens at load time and failures name
the offending field, so a bad deployment aborts before it serves anything.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .adversary import load_model, ModelKind, ModelSpec, untrained_spec
from .domain import (
    Annotator,
    BonusPolicy,
    Genre,
    genre_from_token,
    Role,
    RoundConfig,
)
from .errors import ConfigError, ValidationError


def round_config_to_dict(config: RoundConfig) -> dict:
    return {
        "round_number": config.round_number,
        "try_limit": config.try_limit,
        "genres": {g.value: w for g, w in sorted(config.genres.items(), key=lambda kv: kv[0].value)},
        "ensemble": list(config.ensemble),
        "dev_size": config.dev_size,
        "test_size": config.test_size,
        "exclusive_fraction": config.exclusive_fraction,
        "bonus_policy": {
            "base_pay": config.bonus_policy.base_pay,
            "bonus_per_verified": config.bonus_policy.bonus_per_verified,
        },
        "rng_seed": config.rng_seed,
        "test_fallback_nonexclusive": config.test_fallback_nonexclusive,
    }


def round_config_from_dict(data: Mapping[str, Any], where: str = "round") -> RoundConfig:
    try:
        round_number = int(data["round_number"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError(f"{where}.round_number", "required positive integer") from None
    try:
        bonus = data.get("bonus_policy", {})
        config = RoundConfig(
            round_number=round_number,
            try_limit=int(data.get("try_limit", 5 if round_number == 1 else 10)),
            genres={genre_from_token(g): float(w) for g, w in data.get("genres", {"wiki": 1.0}).items()},
            ensemble=tuple(str(m) for m in data.get("ensemble", ())),
            dev_size=int(data.get("dev_size", 0)),
            test_size=int(data.get("test_size", 0)),
            exclusive_fraction=float(data.get("exclusive_fraction", 0.1)),
            bonus_policy=BonusPolicy(
                base_pay=float(bonus.get("base_pay", 1.0)),
                bonus_per_verified=float(bonus.get("bonus_per_verified", 0.5)),
            ),
            rng_seed=int(data.get("rng_seed", 0)),
            test_fallback_nonexclusive=bool(data.get("test_fallback_nonexclusive", True)),
        )
    except ValidationError as exc:
        raise ConfigError(where, str(exc)) from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(where, f"malformed value: {exc}") from exc
    return config


@dataclass(frozen=True)
class ModelEntry:
    id: str
    kind: str  # "builtin" | "remote" | "uniform"
    path: str | None = None
    endpoint: str | None = None
    timeout: float = 10.0


@dataclass(frozen=True)
class TokenEntry:
    token: str
    annotator_id: str
    admin: bool = False


@dataclass
class DeploymentConfig:
    data_dir: Path
    host: str = "127.0.0.1"
    port: int = 8080
    rounds: list[RoundConfig] = field(default_factory=list)
    models: list[ModelEntry] = field(default_factory=list)
    annotators: list[Annotator] = field(default_factory=list)
    tokens: list[TokenEntry] = field(default_factory=list)
    word_lists: dict[str, str] = field(default_factory=dict)
    ui_dir: Path | None = None

    def annotator_map(self) -> dict[str, Annotator]:
        return {a.id: a for a in self.annotators}

    def token_map(self) -> dict[str, TokenEntry]:
        return {t.token: t for t in self.tokens}

    def build_registry(self) -> dict[str, ModelSpec]:
        """Resolve model entries into live specs; blobs load from disk here."""
        registry: dict[str, ModelSpec] = {}
        for entry in self.models:
            if entry.id in registry:
                raise ConfigError(f"models.{entry.id}", "duplicate model id")
            if entry.kind == "builtin":
                if not entry.path:
                    raise ConfigError(f"models.{entry.id}.path", "builtin models need a weights file")
                registry[entry.id] = load_model(entry.path, model_id=entry.id)
            elif entry.kind == "remote":
                if not entry.endpoint:
                    raise ConfigError(f"models.{entry.id}.endpoint", "remote models need an endpoint")
                registry[entry.id] = ModelSpec(
                    id=entry.id, kind=ModelKind.REMOTE,
                    endpoint=entry.endpoint, timeout=entry.timeout,
                )
            elif entry.kind == "uniform":
                registry[entry.id] = untrained_spec(model_id=entry.id)
            else:
                raise ConfigError(f"models.{entry.id}.kind", f"unknown kind {entry.kind!r}")
        return registry


def _require(data: Mapping[str, Any], key: str, kind: type, where: str) -> Any:
    if key not in data:
        raise ConfigError(f"{where}.{key}", "required field missing")
    value = data[key]
    if not isinstance(value, kind):
        raise ConfigError(f"{where}.{key}", f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def parse_deployment_config(data: Mapping[str, Any], base_dir: Path | None = None) -> DeploymentConfig:
    base = base_dir or Path.cwd()
    data_dir = Path(str(_require(data, "data_dir", str, "config")))
    if not data_dir.is_absolute():
        data_dir = base / data_dir

    rounds = [
        round_config_from_dict(entry, where=f"rounds[{i}]")
        for i, entry in enumerate(data.get("rounds", []))
    ]
    seen_rounds = set()
    for cfg in rounds:
        if cfg.round_number in seen_rounds:
            raise ConfigError("rounds", f"duplicate round_number {cfg.round_number}")
        seen_rounds.add(cfg.round_number)

    models = []
    for i, entry in enumerate(data.get("models", [])):
        where = f"models[{i}]"
        models.append(
            ModelEntry(
                id=str(_require(entry, "id", str, where)),
                kind=str(_require(entry, "kind", str, where)),
                path=str(base / entry["path"]) if entry.get("path") else None,
                endpoint=entry.get("endpoint"),
                timeout=float(entry.get("timeout", 10.0)),
            )
        )

    annotators = []
    for i, entry in enumerate(data.get("annotators", [])):
        where = f"annotators[{i}]"
        role_token = str(entry.get("role", "both")).lower()
        try:
            role = Role(role_token)
        except ValueError:
            raise ConfigError(f"{where}.role", f"unknown role {role_token!r}") from None
        annotators.append(
            Annotator(
                id=str(_require(entry, "id", str, where)),
                role=role,
                exclusive=bool(entry.get("exclusive", False)),
            )
        )
    ids = [a.id for a in annotators]
    if len(set(ids)) != len(ids):
        raise ConfigError("annotators", "annotator ids must be unique")

    tokens = []
    known = set(ids)
    for i, entry in enumerate(data.get("tokens", [])):
        where = f"tokens[{i}]"
        token = TokenEntry(
            token=str(_require(entry, "token", str, where)),
            annotator_id=str(_require(entry, "annotator_id", str, where)),
            admin=bool(entry.get("admin", False)),
        )
        if token.annotator_id not in known and not token.admin:
            raise ConfigError(f"{where}.annotator_id", f"unknown annotator {token.annotator_id!r}")
        tokens.append(token)

    ui_dir = data.get("ui_dir")
    return DeploymentConfig(
        data_dir=data_dir,
        host=str(data.get("host", "127.0.0.1")),
        port=int(data.get("port", 8080)),
        rounds=rounds,
        models=models,
        annotators=annotators,
        tokens=tokens,
        word_lists={str(k): str(v) for k, v in data.get("word_lists", {}).items()},
        ui_dir=(base / str(ui_dir)) if ui_dir else None,
    )


def load_deployment_config(path: str | Path) -> DeploymentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except ValueError as exc:
        raise ConfigError("config", f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a JSON object")
    return parse_deployment_config(data, base_dir=path.parent)
