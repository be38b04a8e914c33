"""
Dataset manifest: one JSON record per line, keys sorted, UTF-8.

Image paths inside records are relative to the manifest's directory.
"""

import json
from pathlib import Path
from typing import Iterable, List, Union

import structlog
from pydantic import ValidationError

from gridflow.core.exceptions import DuplicateId, EmptyManifest, ManifestParseError
from gridflow.schemas import ManifestRecord

logger = structlog.get_logger(__name__)

MANIFEST_NAME = "manifest.jsonl"


def record_to_line(record: ManifestRecord) -> str:
    return json.dumps(record.model_dump(mode="json"), sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def write_manifest(records: Iterable[ManifestRecord], path: Union[str, Path]) -> None:
    records = list(records)
    if not records:
        raise EmptyManifest(str(path))

    seen = set()
    for record in records:
        if record.id in seen:
            raise DuplicateId(record.id)
        seen.add(record.id)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(record_to_line(record))
            handle.write("\n")
    tmp.replace(path)
    logger.info("manifest_written", path=str(path), records=len(records))


def read_manifest(path: Union[str, Path]) -> List[ManifestRecord]:
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME

    records = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as e:
                raise ManifestParseError(line_no, e.msg)
            try:
                records.append(ManifestRecord.model_validate(data))
            except ValidationError as e:
                raise ManifestParseError(line_no, str(e.errors()[0]["loc"]) + " " + e.errors()[0]["msg"])

    if not records:
        raise EmptyManifest(str(path))
    return records


def resolve_image(manifest_path: Union[str, Path], relative: str) -> Path:
    manifest_path = Path(manifest_path)
    root = manifest_path if manifest_path.is_dir() else manifest_path.parent
    return root / relative
