"""Configuration files, run manifests, CSV emission and sweep partitioning."""

from __future__ import annotations

import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import __version__


class ConfigError(ValueError):
    name = "ConfigError"

    def __init__(self, message: str):
        super().__init__(f"{self.name}: {message}")


def load_config(path) -> dict:
    """Read a flat TOML key-value file. Nested tables are flattened one level."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    flat = {}
    for key, value in raw.items():
        if isinstance(value, dict):
            flat.update(value)
        else:
            flat[key] = value
    return {k.replace("-", "_"): v for k, v in flat.items()}


def sweep_schedule(grid, workers: int) -> list[list[int]]:
    """Split the cells of ``grid`` into ``workers`` contiguous index blocks.

    ``grid`` is a cell count or a shape tuple. Cells are numbered row-major,
    and results are merged by that index, so output never depends on how many
    workers ran. Workers beyond the number of cells get an empty list.
    """
    n_cells = int(np.prod(grid)) if np.ndim(grid) else int(grid)
    if n_cells < 1:
        raise ConfigError("sweep grid is empty")
    if workers < 1:
        raise ConfigError(f"worker count must be >= 1, got {workers}")
    return [block.tolist() for block in np.array_split(np.arange(n_cells), workers)]


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "value"):  # enums
        return value.value
    return value


def make_manifest(command: str, parameters: dict, derived: dict) -> dict:
    return {
        "command": command,
        "version": __version__,
        "seed": parameters.get("seed"),
        "parameters": {k: _jsonable(v) for k, v in sorted(parameters.items())
                       if k != "output_dir"},
        "derived": {k: _jsonable(v) for k, v in sorted(derived.items())},
    }


def manifest_hash(manifest: dict) -> str:
    body = {k: v for k, v in manifest.items() if k not in ("wall_clock_s", "outputs")}
    text = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def csv_text(columns: list[str], rows, manifest: dict, notes: tuple[str, ...] = ()) -> str:
    """CSV body with '#' header lines carrying the manifest hash and parameters."""
    lines = [
        f"# relkick {manifest['version']} {manifest['command']}",
        f"# manifest_sha256: {manifest_hash(manifest)}",
        "# params: " + " ".join(f"{k}={json.dumps(v)}"
                                for k, v in manifest["parameters"].items()),
    ]
    lines += [f"# {note}" for note in notes]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


class OutputSet:
    """Stage output files and publish them together.

    Files are written under temporary names and renamed on ``commit``; if the
    run fails, ``discard`` removes whatever was staged.
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        self._staged: list[tuple[Path, Path]] = []

    def write(self, name: str, text: str) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        final = self.directory / name
        tmp = self.directory / f".{name}.partial"
        tmp.write_text(text, encoding="utf-8")
        self._staged.append((tmp, final))
        return final

    def commit(self) -> list[str]:
        for tmp, final in self._staged:
            os.replace(tmp, final)
        names = [str(final) for _, final in self._staged]
        self._staged.clear()
        return names

    def discard(self):
        for tmp, _ in self._staged:
            tmp.unlink(missing_ok=True)
        self._staged.clear()
