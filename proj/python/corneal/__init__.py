"""Locate a blue square relative to a red rectangle from corneal reflections."""

from ._core import (  # noqa: F401
    Config,
    CornealError,
    config_keys,
    evaluate,
    load_image,
    locate,
    locate_file,
    render,
    save_image,
    unwrap,
)
