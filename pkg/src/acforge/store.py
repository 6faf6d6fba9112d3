"""Versioned file-backed persistence for a case directory.

Layout (fixed, no config file inside the case):

    elements/<kind>/<id>.json
    realizations/<id>.json
    artifacts/<realization_id>/<name>
    docs/<realization_or_element_id>/<timestamp>.<ext>

Element files are canonical JSON (sorted keys, schema field) so diffs stay
meaningful under version control. Writes are atomic (temp file + rename) and
mutations take an advisory lock on `.lock`; readers never see partial files.
"""

from __future__ import annotations

import json
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator, Optional

from filelock import FileLock

from . import model
from .errors import (
    AlreadyExistsError,
    NotFoundError,
    StillReferencedError,
    ValidationError,
)
from .model import (
    Blueprint,
    Claim,
    Conclusion,
    DocFormat,
    DocumentationRecord,
    Measure,
    Realization,
    Step,
    StoredObject,
    TechniqueRef,
)

SCHEMA_VERSION = 1

MAX_UTC_OFFSET_MINUTES = 14 * 60


def format_timestamp(epoch: int, utc_offset_minutes: int = 0) -> str:
    """Render epoch seconds as 'YYYY-MM-DD HH:MM:SS' at a fixed UTC offset."""
    if epoch < 0:
        raise ValidationError("epoch must be >= 0")
    if abs(utc_offset_minutes) > MAX_UTC_OFFSET_MINUTES:
        raise ValidationError("utc offset must be within +/-14 hours")
    shifted = datetime.fromtimestamp(epoch + utc_offset_minutes * 60, tz=timezone.utc)
    return shifted.strftime("%Y-%m-%d %H:%M:%S")


def parse_timestamp(text: str, utc_offset_minutes: int = 0) -> int:
    """Inverse of format_timestamp for the same offset."""
    naive = datetime.strptime(text, "%Y-%m-%d %H:%M:%S").replace(tzinfo=timezone.utc)
    return int(naive.timestamp()) - utc_offset_minutes * 60


def to_payload(obj: StoredObject) -> dict:
    """Canonical JSON-ready dict for any storable object."""
    payload: dict = {"schema": SCHEMA_VERSION, "kind": obj.kind}
    if isinstance(obj, Claim):
        payload.update(
            id=obj.id,
            name=obj.name,
            statement=obj.statement,
            strategy=obj.strategy,
            subclaim_ids=list(obj.subclaim_ids),
            contexts=list(obj.contexts),
            assumptions=list(obj.assumptions),
            measure_ids=list(obj.measure_ids),
            evidence_ids=list(obj.evidence_ids),
            conclusions=[_conclusion_dict(c) for c in obj.conclusions],
            risk_criterion=obj.risk_criterion,
            element_version=obj.element_version,
        )
    elif isinstance(obj, Measure):
        payload.update(
            id=obj.id,
            name=obj.name,
            description=obj.description,
            lifecycle_phase=obj.lifecycle_phase.value,
            addressed_characteristic=obj.addressed_characteristic.value,
            blueprint_ids=list(obj.blueprint_ids),
            element_version=obj.element_version,
        )
    elif isinstance(obj, Blueprint):
        payload.update(
            id=obj.id,
            name=obj.name,
            description=obj.description,
            realized_measure_id=obj.realized_measure_id,
            justification=obj.justification,
            steps=[_step_dict(s) for s in obj.steps],
            element_version=obj.element_version,
        )
    elif isinstance(obj, Realization):
        payload.update(
            id=obj.realization_id,
            blueprint_id=obj.blueprint_id,
            data_model_version=obj.data_model_version,
            parameter_bindings=dict(obj.parameter_bindings),
            artifacts=dict(obj.artifacts),
            conclusions=[_conclusion_dict(c) for c in obj.conclusions],
            documentation=[_record_dict(r) for r in obj.documentation],
        )
    else:
        raise ValidationError(f"cannot serialize object of type {type(obj).__name__}")
    return payload


def _conclusion_dict(c: Conclusion) -> dict:
    return {"text": c.text, "timestamp": c.timestamp}


def _record_dict(r: DocumentationRecord) -> dict:
    return {
        "timestamp": r.timestamp,
        "rendered_datetime": r.rendered_datetime,
        "data_model_version": r.data_model_version,
        "format": r.format.value,
        "path": r.path,
    }


def _step_dict(s: Step) -> dict:
    technique = None
    if s.technique is not None:
        technique = {"name": s.technique.name, "parameters": dict(s.technique.parameters)}
    return {
        "title": s.title,
        "description": s.description,
        "technique": technique,
        "output_refs": list(s.output_refs),
    }


_PAYLOAD_KEYS = {
    "claim": {
        "schema", "kind", "id", "name", "statement", "strategy", "subclaim_ids",
        "contexts", "assumptions", "measure_ids", "evidence_ids", "conclusions",
        "risk_criterion", "element_version",
    },
    "measure": {
        "schema", "kind", "id", "name", "description", "lifecycle_phase",
        "addressed_characteristic", "blueprint_ids", "element_version",
    },
    "blueprint": {
        "schema", "kind", "id", "name", "description", "realized_measure_id",
        "justification", "steps", "element_version",
    },
    "realization": {
        "schema", "kind", "id", "blueprint_id", "data_model_version",
        "parameter_bindings", "artifacts", "conclusions", "documentation",
    },
}


def from_payload(payload: dict) -> StoredObject:
    """Parse and validate one stored object from its JSON payload."""
    if not isinstance(payload, dict):
        raise ValidationError("stored object must be a JSON object")
    if payload.get("schema") != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema version {payload.get('schema')!r}")
    kind = payload.get("kind")
    if kind not in _PAYLOAD_KEYS:
        raise ValidationError(f"unknown stored kind {kind!r}")
    unknown = set(payload) - _PAYLOAD_KEYS[kind]
    if unknown:
        raise ValidationError(f"unknown key(s) in {kind} file: {', '.join(sorted(unknown))}")
    try:
        if kind == "claim":
            obj: StoredObject = Claim(
                id=payload["id"],
                name=payload.get("name") or payload["id"],
                statement=payload["statement"],
                strategy=payload.get("strategy"),
                subclaim_ids=list(payload.get("subclaim_ids") or ()),
                contexts=list(payload.get("contexts") or ()),
                assumptions=list(payload.get("assumptions") or ()),
                measure_ids=list(payload.get("measure_ids") or ()),
                evidence_ids=list(payload.get("evidence_ids") or ()),
                conclusions=_parse_conclusions(payload.get("conclusions")),
                risk_criterion=payload.get("risk_criterion"),
                element_version=int(payload["element_version"]),
            )
        elif kind == "measure":
            obj = Measure(
                id=payload["id"],
                name=payload["name"],
                description=payload.get("description") or "",
                lifecycle_phase=model.LifecyclePhase(payload["lifecycle_phase"]),
                addressed_characteristic=model.DataCharacteristic(
                    payload["addressed_characteristic"]
                ),
                blueprint_ids=list(payload.get("blueprint_ids") or ()),
                element_version=int(payload["element_version"]),
            )
        elif kind == "blueprint":
            obj = Blueprint(
                id=payload["id"],
                name=payload["name"],
                description=payload.get("description") or "",
                realized_measure_id=payload["realized_measure_id"],
                justification=payload.get("justification") or "",
                steps=[_parse_step(s) for s in payload.get("steps") or ()],
                element_version=int(payload["element_version"]),
            )
        else:
            obj = Realization(
                realization_id=payload["id"],
                blueprint_id=payload["blueprint_id"],
                data_model_version=payload["data_model_version"],
                parameter_bindings=dict(payload.get("parameter_bindings") or {}),
                artifacts=dict(payload.get("artifacts") or {}),
                conclusions=_parse_conclusions(payload.get("conclusions")),
                documentation=[_parse_record(r) for r in payload.get("documentation") or ()],
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed {kind} payload: {exc}") from exc
    obj.validate()
    return obj


def _parse_conclusions(raw: object) -> list[Conclusion]:
    return [
        Conclusion(text=item["text"], timestamp=int(item["timestamp"]))
        for item in (raw or ())
    ]


def _parse_record(raw: dict) -> DocumentationRecord:
    return DocumentationRecord(
        timestamp=int(raw["timestamp"]),
        rendered_datetime=raw["rendered_datetime"],
        data_model_version=raw["data_model_version"],
        format=DocFormat(raw["format"]),
        path=raw["path"],
    )


def _parse_step(raw: dict) -> Step:
    technique = None
    if raw.get("technique"):
        technique = TechniqueRef(
            name=raw["technique"]["name"],
            parameters=dict(raw["technique"].get("parameters") or {}),
        )
    return Step(
        title=raw["title"],
        description=raw.get("description") or "",
        technique=technique,
        output_refs=list(raw.get("output_refs") or ()),
    )


def canonical_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _atomic_write_text(path: Path, text: str) -> None:
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    tmp = Path(tmp_name)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


class CaseDirectory:
    """Handle on one case directory; all persistence goes through here."""

    SUBDIRS = ("elements/claim", "elements/measure", "elements/blueprint",
               "realizations", "artifacts", "docs")

    def __init__(self, root: Path | str):
        self.root = Path(root)

    @classmethod
    def init(cls, root: Path | str) -> "CaseDirectory":
        case = cls(root)
        if case.root.exists() and (case.root / "elements").exists():
            raise AlreadyExistsError(f"case directory already initialized: {case.root}")
        for sub in cls.SUBDIRS:
            (case.root / sub).mkdir(parents=True, exist_ok=True)
        return case

    @classmethod
    def open(cls, root: Path | str) -> "CaseDirectory":
        case = cls(root)
        if not (case.root / "elements").is_dir():
            raise NotFoundError(f"not a case directory (missing elements/): {case.root}")
        return case

    def lock(self) -> FileLock:
        return FileLock(self.root / ".lock")

    # -- paths -------------------------------------------------------------

    def object_path(self, kind: str, object_id: str) -> Path:
        if kind == "realization":
            return self.root / "realizations" / f"{object_id}.json"
        return self.root / "elements" / kind / f"{object_id}.json"

    def artifact_dir(self, realization_id: str) -> Path:
        return self.root / "artifacts" / realization_id

    def docs_dir(self, object_id: str) -> Path:
        return self.root / "docs" / object_id

    # -- lookups -----------------------------------------------------------

    def kind_of(self, object_id: str) -> Optional[str]:
        for kind in (*model.ELEMENT_KINDS, "realization"):
            if self.object_path(kind, object_id).is_file():
                return kind
        return None

    def exists(self, object_id: str, kind: Optional[str] = None) -> bool:
        if kind is not None:
            return self.object_path(kind, object_id).is_file()
        return self.kind_of(object_id) is not None

    def list_ids(self, kind: str) -> list[str]:
        base = self.object_path(kind, "x").parent
        if not base.is_dir():
            return []
        return sorted(p.stem for p in base.glob("*.json"))

    def iter_objects(self) -> Iterator[StoredObject]:
        for kind in (*model.ELEMENT_KINDS, "realization"):
            for object_id in self.list_ids(kind):
                yield self.load(object_id, kind)

    # -- core operations ----------------------------------------------------

    def save(
        self,
        obj: StoredObject,
        overwrite: bool = False,
        now: Optional[int] = None,
    ) -> Path:
        """Atomically persist one object; bumps the element version on overwrite."""
        obj.validate()
        object_id = obj.id
        path = self.object_path(obj.kind, object_id)
        existing_kind = self.kind_of(object_id)
        if existing_kind is not None and existing_kind != obj.kind:
            raise AlreadyExistsError(
                f"id '{object_id}' is already taken by a {existing_kind}"
            )
        if path.exists():
            if not overwrite:
                raise AlreadyExistsError(
                    f"{obj.kind} '{object_id}' already exists (use overwrite)"
                )
            if not isinstance(obj, Realization):
                old = from_payload(json.loads(path.read_text(encoding="utf-8")))
                obj.element_version = model.bumped_version(old.element_version, now)
        self._check_references(obj)
        with self.lock():
            _atomic_write_text(path, canonical_json(to_payload(obj)))
        return path

    def load(self, object_id: str, kind: Optional[str] = None) -> StoredObject:
        found_kind = self.kind_of(object_id)
        if found_kind is None:
            raise NotFoundError(f"no stored element or realization with id '{object_id}'")
        if kind is not None and kind != found_kind:
            raise ValidationError(
                f"id '{object_id}' is a {found_kind}, not a {kind}"
            )
        path = self.object_path(found_kind, object_id)
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"cannot parse {path.name}: {exc}") from exc
        obj = from_payload(payload)
        if obj.kind != found_kind:
            raise ValidationError(
                f"{path} declares kind {obj.kind!r} but lives under {found_kind}/"
            )
        stored_id = obj.id if not isinstance(obj, Realization) else obj.realization_id
        if stored_id != object_id:
            raise ValidationError(
                f"{path} contains id {stored_id!r}, which does not match its filename"
            )
        return obj

    def delete(self, object_id: str) -> None:
        """Remove one object unless anything else still references it."""
        kind = self.kind_of(object_id)
        if kind is None:
            raise NotFoundError(f"no stored element or realization with id '{object_id}'")
        referrers = sorted(
            other.id if not isinstance(other, Realization) else other.realization_id
            for other in self.iter_objects()
            if object_id in _outgoing_ids(other)
        )
        if referrers:
            raise StillReferencedError(
                f"cannot delete '{object_id}': still referenced by"
                f" {', '.join(referrers)}"
            )
        with self.lock():
            self.object_path(kind, object_id).unlink()

    def record_documentation(
        self, realization_id: str, record: DocumentationRecord
    ) -> Realization:
        """Append one documentation version to a realization's table."""
        record.validate()
        realization = self.load(realization_id, "realization")
        if not (self.root / record.path).is_file():
            raise NotFoundError(f"documentation file missing: {record.path}")
        if any(r.timestamp == record.timestamp for r in realization.documentation):
            raise ValidationError(
                f"duplicate documentation timestamp {record.timestamp}"
            )
        realization.documentation.append(record)
        realization.documentation.sort(key=lambda r: r.timestamp)
        self.save(realization, overwrite=True)
        return realization

    # -- referential integrity ----------------------------------------------

    def _check_references(self, obj: StoredObject) -> None:
        for ref_id, ref_kind in _outgoing_refs(obj):
            if not self.exists(ref_id, ref_kind):
                raise ValidationError(
                    f"{obj.kind} '{obj.id}' references {ref_kind} '{ref_id}',"
                    " which is not in the store"
                )


def _outgoing_refs(obj: StoredObject) -> list[tuple[str, str]]:
    if isinstance(obj, Claim):
        return (
            [(sub, "claim") for sub in obj.subclaim_ids]
            + [(mid, "measure") for mid in obj.measure_ids]
            + [(ev, "realization") for ev in obj.evidence_ids]
        )
    if isinstance(obj, Measure):
        return [(bid, "blueprint") for bid in obj.blueprint_ids]
    if isinstance(obj, Blueprint):
        return [(obj.realized_measure_id, "measure")]
    if isinstance(obj, Realization):
        return [(obj.blueprint_id, "blueprint")]
    return []


def _outgoing_ids(obj: StoredObject) -> set[str]:
    return {ref_id for ref_id, _ in _outgoing_refs(obj)}
