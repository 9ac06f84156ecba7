"""Gateway error types."""

from __future__ import annotations


class GatewayError(Exception):
    pass


class UnboundPlaceholder(GatewayError):
    def __init__(self, name: str):
        super().__init__(f"unbound placeholder: {name}")
        self.name = name


class ProviderUnavailable(GatewayError):
    pass


class SchemaViolation(GatewayError):
    def __init__(self, detail: str, retries: int = 0):
        super().__init__(detail)
        self.detail = detail
        self.retries = retries
