"""HTTP face of the locator: request/response models and the FastAPI app."""

from .app import create_app

__all__ = ["create_app"]
