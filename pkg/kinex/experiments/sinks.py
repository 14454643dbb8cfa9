import hashlib
import json
import logging
import math
import os
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict

import pandas as pd

from .. import __version__
from ..errors import OutputError
from ..models import ExperimentConfig, RunManifest

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def json_safe(value: Any) -> Any:
    """Replace non-finite floats with None so the output is strict JSON."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


class IResultSink(ABC):
    """Interface for experiment outputs."""

    @abstractmethod
    def write_csv(self, name: str, frame: pd.DataFrame) -> str:
        pass

    @abstractmethod
    def write_json(self, name: str, payload: Dict[str, Any]) -> str:
        pass

    @abstractmethod
    def write_text(self, name: str, text: str) -> str:
        pass

    @abstractmethod
    def finalize(self, experiment: str, config: ExperimentConfig, duration_seconds: float) -> RunManifest:
        pass


class DirectorySink(IResultSink):
    """
    Writes every output below one root directory and remembers a sha256 per file.
    The manifest goes last, through a temporary file, so a failed run never leaves one.
    """

    def __init__(self, root: str):
        self.root = Path(root).resolve()
        self.files: Dict[str, str] = {}

    def _target(self, name: str) -> Path:
        path = (self.root / name).resolve()
        if self.root != path and self.root not in path.parents:
            raise OutputError(str(path), f"refusing to write outside {self.root}")
        return path

    def _write_bytes(self, name: str, data: bytes) -> str:
        path = self._target(name)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(data)
        except OSError as e:
            raise OutputError(str(path), e.strerror or str(e), e)
        rel = path.relative_to(self.root).as_posix()
        self.files[rel] = hashlib.sha256(data).hexdigest()
        logger.debug("Wrote %s (%d bytes)", path, len(data))
        return str(path)

    def write_csv(self, name: str, frame: pd.DataFrame) -> str:
        text = frame.to_csv(index=False, lineterminator="\n")
        return self._write_bytes(name, text.encode("utf-8"))

    def write_json(self, name: str, payload: Dict[str, Any]) -> str:
        text = json.dumps(json_safe(payload), indent=2, allow_nan=False) + "\n"
        return self._write_bytes(name, text.encode("utf-8"))

    def write_text(self, name: str, text: str) -> str:
        return self._write_bytes(name, text.encode("utf-8"))

    def finalize(self, experiment: str, config: ExperimentConfig, duration_seconds: float) -> RunManifest:
        manifest = RunManifest(
            experiment=experiment,
            config=config.echo(),
            code_version=__version__,
            files=dict(sorted(self.files.items())),
            duration_seconds=round(duration_seconds, 6),
        )
        path = self._target(MANIFEST_NAME)
        tmp = path.with_name(MANIFEST_NAME + ".tmp")
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp.write_text(json.dumps(json_safe(manifest.model_dump()), indent=2) + "\n", encoding="utf-8")
            os.replace(tmp, path)
        except OSError as e:
            raise OutputError(str(path), e.strerror or str(e), e)
        return manifest


def read_csv(path: str) -> pd.DataFrame:
    try:
        return pd.read_csv(path, float_precision="round_trip")
    except FileNotFoundError as e:
        raise OutputError(path, "file not found", e)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise OutputError(path, f"cannot read CSV: {e}", e)
