"""Exception types shared across the package."""
from __future__ import annotations


class ValidationError(ValueError):
    """Structured invalid-input error with a machine-readable code."""

    def __init__(self, code: str, message: str, **detail):
        super().__init__(message)
        self.code = code
        self.detail = detail

    def to_json_dict(self):
        return {"error": self.code, "message": str(self), "detail": self.detail}


class FeatureSizeError(ValidationError):
    """A construction parameter exceeds the geometric feature it must respect."""

    def __init__(self, message: str, **detail):
        super().__init__("feature_size", message, **detail)


class ResourceLimitError(RuntimeError):
    """A solver would exceed its declared memory or instance-size budget."""
