"""Command-line front end: configuration, file formats and run manifests."""
from .config import RunConfig, parse_config, emit_config, COMMANDS, SCHEMAS
from .io import (save_field, load_field, save_profile, load_profile, load_any,
                 dumps_field, loads_field, dumps_profile, loads_profile)
from .run import RunManifest, run, validation_checks

__all__ = [n for n in dir() if not n.startswith("_")]
