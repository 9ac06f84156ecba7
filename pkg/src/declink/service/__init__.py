from .engine import (
    AlreadyResolved,
    EngineConfig,
    OrderViolation,
    ServiceError,
    SessionEngine,
    StorageFailure,
    UnknownQuestion,
    UnknownSession,
)
from .http import create_app

__all__ = [
    "AlreadyResolved",
    "EngineConfig",
    "OrderViolation",
    "ServiceError",
    "SessionEngine",
    "StorageFailure",
    "UnknownQuestion",
    "UnknownSession",
    "create_app",
]
