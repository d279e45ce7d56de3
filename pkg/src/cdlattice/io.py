"""Deterministic CSV output with a one-line configuration manifest."""

from __future__ import annotations

import sys
from typing import Iterable, Mapping

import numpy as np

from . import __version__


def format_value(v) -> str:
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, (float, complex)):
        return repr(v)
    return str(v)


def manifest_line(subcommand: str, config: Mapping) -> str:
    pairs = " ".join(f"{k}={format_value(v)}" for k, v in config.items())
    return f"# cdlattice={__version__} subcommand={subcommand} {pairs}"


def write_csv(path: str, subcommand: str, config: Mapping, columns: list[str], rows: Iterable):
    """Write rows with a manifest comment header; path '-' means stdout."""
    lines = [manifest_line(subcommand, config), ",".join(columns)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)
