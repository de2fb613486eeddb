"""Service configuration: JSON file plus environment overrides.

Environment variables win over the file; both are optional.  Overrides:
DRAFTGUIDE_DATA_DIR, DRAFTGUIDE_HOST, DRAFTGUIDE_PORT, DRAFTGUIDE_SALT,
DRAFTGUIDE_P_TREAT, DRAFTGUIDE_GUIDANCE_ARMED, DRAFTGUIDE_FRONTEND_DIR.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

_TRUTHY = {"1", "true", "yes", "on"}
_FALSY = {"0", "false", "no", "off"}


class ServiceConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: str = "./draftguide-data"
    host: str = "127.0.0.1"
    port: int = 8700
    salt: str = "draftguide-exp"
    p_treat: float = 0.5
    guidance_armed: bool = True
    frontend_dir: str | None = None
    title_limit: int = 300
    body_limit: int = 40_000
    session_gap_seconds: int = 1800
    follow_up_days: int = 28

    def validate(self) -> "ServiceConfig":
        if not 0.0 <= self.p_treat <= 1.0:
            raise ServiceConfigError("p_treat must be in [0, 1]")
        if self.port <= 0 or self.port > 65535:
            raise ServiceConfigError("port must be a valid TCP port")
        if self.title_limit <= 0 or self.body_limit <= 0:
            raise ServiceConfigError("payload limits must be positive")
        return self


def _parse_bool(raw: str, name: str) -> bool:
    value = raw.strip().lower()
    if value in _TRUTHY:
        return True
    if value in _FALSY:
        return False
    raise ServiceConfigError(f"{name} must be a boolean, got {raw!r}")


def load_service_config(
    path: str | Path | None = None, env: dict[str, str] | None = None
) -> ServiceConfig:
    env = os.environ if env is None else env
    values: dict = {}
    if path is not None:
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ServiceConfigError(f"service config is not valid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise ServiceConfigError("service config must be a JSON object")
        known = {f.name for f in fields(ServiceConfig)}
        unknown = set(obj) - known
        if unknown:
            raise ServiceConfigError(f"unknown service config fields: {sorted(unknown)}")
        values.update(obj)

    overrides = {
        "data_dir": env.get("DRAFTGUIDE_DATA_DIR"),
        "host": env.get("DRAFTGUIDE_HOST"),
        "salt": env.get("DRAFTGUIDE_SALT"),
        "frontend_dir": env.get("DRAFTGUIDE_FRONTEND_DIR"),
    }
    for key, raw in overrides.items():
        if raw is not None:
            values[key] = raw
    if (raw := env.get("DRAFTGUIDE_PORT")) is not None:
        values["port"] = int(raw)
    if (raw := env.get("DRAFTGUIDE_P_TREAT")) is not None:
        values["p_treat"] = float(raw)
    if (raw := env.get("DRAFTGUIDE_GUIDANCE_ARMED")) is not None:
        values["guidance_armed"] = _parse_bool(raw, "DRAFTGUIDE_GUIDANCE_ARMED")
    return ServiceConfig(**values).validate()
