"""FastAPI service wrapping the correlated-OAM identification pipeline."""

from oamid.service.app import app, create_app

__all__ = ["app", "create_app"]
