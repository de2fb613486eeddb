"""Moderation service: ruleset CRUD, live evaluation, gated submission."""

from .app import build_app, create_app
from .config import ServiceConfig, ServiceConfigError, load_service_config
from .state import (
    NotIdentifiableError,
    PayloadTooLargeError,
    ServiceState,
    UnknownCommunityError,
)

__all__ = [
    "NotIdentifiableError",
    "PayloadTooLargeError",
    "ServiceConfig",
    "ServiceConfigError",
    "ServiceState",
    "UnknownCommunityError",
    "build_app",
    "create_app",
    "load_service_config",
]
