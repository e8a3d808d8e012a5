from .base import CAPABILITIES, ModelBackend
from .mock import MockBackend
from .remote import RemoteBackend


def make_backend(backend_cfg):
    """Build the backend selected by a :class:`visual_clues.config.BackendConfig`."""
    if backend_cfg.kind == "mock":
        return MockBackend(seed=backend_cfg.seed, dim=backend_cfg.dim)
    return RemoteBackend(backend_cfg)
