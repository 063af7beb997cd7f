"""
Run manifests - what went into a subcommand run and how to read its numbers
"""

import platform
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field

from lakeice import __version__
from lakeice.classify.metrics import M_ACC_DEFINITION, M_IOU_DEFINITION
from lakeice.core.config import PipelineConfig
from lakeice.core.files import atomic_write_text, sha256_of

TRACKED_PACKAGES = ("numpy", "scipy", "scikit-learn", "pydantic")

DECISIONS = {
    "residual_unit": "percentage points (0-100); Huber phi applies to nf_percent residuals",
    "m_acc": M_ACC_DEFINITION,
    "m_iou": M_IOU_DEFINITION,
    "afdd_sign": "positive magnitude of summed sub-zero daily means",
    "smoothing_window": "total width; neighbours within +/- window/2 days",
    "cloud_free_threshold": "inclusive",
}


class InputFile(BaseModel):
    path: str
    sha256: str


class RunManifest(BaseModel):
    """Provenance of one subcommand run"""

    command: str
    created_at: datetime
    lakeice_version: str = __version__
    python_version: str = Field(default_factory=platform.python_version)
    packages: dict[str, str] = Field(default_factory=dict)
    inputs: list[InputFile] = Field(default_factory=list)
    outputs: list[str] = Field(default_factory=list)
    settings: dict[str, Any] = Field(default_factory=dict)
    decisions: dict[str, str] = Field(default_factory=lambda: dict(DECISIONS))


def package_versions() -> dict[str, str]:
    out = {}
    for name in TRACKED_PACKAGES:
        try:
            out[name] = version(name)
        except PackageNotFoundError:
            out[name] = "not installed"
    return out


def build_manifest(
    command: str,
    config: PipelineConfig,
    inputs: list[Path],
    outputs: list[Path],
) -> RunManifest:
    return RunManifest(
        command=command,
        created_at=datetime.now(timezone.utc),
        packages=package_versions(),
        inputs=[InputFile(path=str(p), sha256=sha256_of(p)) for p in inputs if p.is_file()],
        outputs=sorted(str(p) for p in outputs),
        settings=config.settings_snapshot(),
    )


def write_manifest(
    out_dir: Path,
    command: str,
    config: PipelineConfig,
    inputs: list[Path],
    outputs: list[Path],
) -> Path:
    """Write <command>.manifest.json next to the outputs"""
    manifest = build_manifest(command, config, inputs, outputs)
    return atomic_write_text(
        out_dir / f"{command}.manifest.json", manifest.model_dump_json(indent=2) + "\n"
    )
