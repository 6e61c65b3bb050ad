"""Multi-view collaborative feature matching."""

import json

from . import _core
from ._core import (
    Error,
    assignment,
    corner_error,
    dual_softmax,
    filter_matches,
    group_images,
    ransac_homography,
    version,
)

__version__ = _core.version()


def generate_scene(seed, **config):
    """Synthetic planar scene; keyword arguments override scene settings."""
    return _core.generate_scene(seed, json.dumps(config) if config else "")


def run(*args):
    """Runs the command line in-process and returns its exit code."""
    return _core.run([str(a) for a in args])


__all__ = [
    "Error",
    "assignment",
    "corner_error",
    "dual_softmax",
    "filter_matches",
    "generate_scene",
    "group_images",
    "ransac_homography",
    "run",
    "version",
]
