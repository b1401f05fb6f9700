"""HTTP service wrapping the core package."""

from .app import create_app
from .config import ServiceConfig
from .sessions import Session, SessionManager

__all__ = ["create_app", "ServiceConfig", "Session", "SessionManager"]
