"""Python front end for the homcl toolkit.

Thin wrappers over the C++ core: configs and reports cross the boundary as
JSON, so this module only translates between dicts and the serialized forms.
"""

from __future__ import annotations

import json
from typing import Any

from ._core import (  # noqa: F401
    ConfigInvalid,
    HomclError,
    IoFailure,
    constant_spectrum,
    section6_lambda0,
)
from . import _core

__all__ = [
    "ConfigInvalid",
    "HomclError",
    "IoFailure",
    "constant_spectrum",
    "default_config",
    "run_and_write",
    "run_pipeline",
    "section6_lambda0",
    "validate_config",
]


def default_config() -> dict[str, Any]:
    """The default run configuration as a plain dict."""
    return json.loads(_core.default_config())


def validate_config(config: dict[str, Any]) -> None:
    """Raises ConfigInvalid when the config violates an invariant."""
    _core.validate_config(json.dumps(config))


def run_pipeline(config: dict[str, Any], verb: str = "all", verbose: bool = False) -> dict[str, Any]:
    """Runs the pipeline prefix named by ``verb`` and returns the report.

    Stage failures are recorded inside the report (see ``report["stages"]``),
    mirroring the CLI's exit-status convention rather than raising.
    """
    return json.loads(_core.run_pipeline(json.dumps(config), verb, verbose))


def run_and_write(
    config: dict[str, Any], verb: str = "all", out: str | None = None
) -> tuple[dict[str, Any], list[str], bool]:
    """Runs the pipeline and writes report.json / CSVs.

    Returns ``(report, written_files, ok)`` where ``ok`` mirrors the CLI exit
    status (True iff every requested stage completed).
    """
    report_json, files, ok = _core.run_and_write(json.dumps(config), verb, out or "")
    return json.loads(report_json), list(files), bool(ok)
