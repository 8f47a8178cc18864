"""HTTP sidecar serving document encoders behind the /embed wire protocol."""

from .app import create_app
from .registry import ModelRegistryEntry, Registry, default_entries, load_registry

__version__ = "0.1.0"

__all__ = ["create_app", "ModelRegistryEntry", "Registry", "default_entries", "load_registry"]
