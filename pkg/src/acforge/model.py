"""In-memory assurance-case domain model.

Claims, measures, and blueprints form the argument graph; realizations carry
the evidence produced by applying a blueprint to a concrete dataset/model
version. All types are plain dataclasses with explicit `validate()` methods;
operations mutate single objects and never touch the filesystem (see
`acforge.store` for persistence).
"""

from __future__ import annotations

import copy
import re
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Sequence, Union

from .errors import ValidationError

ELEMENT_ID_RE = re.compile(r"^[a-z0-9_-]{1,64}$")

ParamValue = Union[int, float, str, bool]


def ensure_element_id(value: object, what: str = "id") -> str:
    if not isinstance(value, str) or not ELEMENT_ID_RE.fullmatch(value):
        raise ValidationError(
            f"malformed {what} {value!r}: expected 1-64 chars of [a-z0-9_-]"
        )
    return value


def current_epoch(now: Optional[int] = None) -> int:
    return int(time.time()) if now is None else int(now)


def bumped_version(old: int, now: Optional[int] = None) -> int:
    """Next element version: wall clock, but always strictly past `old`."""
    return max(current_epoch(now), old + 1)


class LifecyclePhase(str, Enum):
    SPECIFICATION = "specification"
    CONSTRUCTION = "construction"
    ANALYSIS = "analysis"
    TESTING = "testing"
    OPERATION = "operation"


class DataCharacteristic(str, Enum):
    UNSEEN = "unseen"
    REPRESENTATIVE = "representative"
    CORRECT_RELATION = "correct_relation"
    OTHER = "other"


class DocFormat(str, Enum):
    HTML = "html"
    MARKDOWN = "markdown"

    @property
    def extension(self) -> str:
        return "html" if self is DocFormat.HTML else "md"


class LinkRelation(str, Enum):
    CLAIM_MEASURE = "claim_measure"
    MEASURE_BLUEPRINT = "measure_blueprint"
    CLAIM_EVIDENCE = "claim_evidence"


@dataclass
class Conclusion:
    text: str
    timestamp: int

    def validate(self) -> None:
        if not isinstance(self.text, str) or not self.text.strip():
            raise ValidationError("conclusion text must be non-empty")
        if not isinstance(self.timestamp, int) or self.timestamp < 0:
            raise ValidationError("conclusion timestamp must be a non-negative int")


@dataclass
class DocumentationRecord:
    timestamp: int
    rendered_datetime: str
    data_model_version: str
    format: DocFormat
    path: str

    _DATETIME_RE = re.compile(r"^\d{4}-\d{2}-\d{2} \d{2}:\d{2}:\d{2}$")

    def validate(self) -> None:
        if not isinstance(self.timestamp, int) or self.timestamp < 0:
            raise ValidationError("documentation timestamp must be a non-negative int")
        if not self._DATETIME_RE.fullmatch(self.rendered_datetime):
            raise ValidationError(
                f"rendered_datetime {self.rendered_datetime!r} is not"
                " 'YYYY-MM-DD HH:MM:SS'"
            )
        if not self.data_model_version:
            raise ValidationError("documentation record needs a data/model version")
        if not isinstance(self.format, DocFormat):
            raise ValidationError(f"unknown documentation format {self.format!r}")
        if not self.path:
            raise ValidationError("documentation record needs a file path")


@dataclass
class TechniqueRef:
    """Declarative technique invocation inside a blueprint step.

    Only a registry key plus a flat parameter map; resolution against the
    technique registry happens at realization time, keeping blueprint files
    inert data.
    """

    name: str
    parameters: dict[str, ParamValue] = field(default_factory=dict)

    def validate(self) -> None:
        if not self.name or not isinstance(self.name, str):
            raise ValidationError("technique name must be a non-empty string")
        for key, value in self.parameters.items():
            if not isinstance(key, str) or not key:
                raise ValidationError("technique parameter names must be strings")
            if not isinstance(value, (int, float, str, bool)):
                raise ValidationError(
                    f"technique parameter {key!r} must be a number, text, or flag"
                )


@dataclass
class Step:
    title: str
    description: str = ""
    technique: Optional[TechniqueRef] = None
    output_refs: list[str] = field(default_factory=list)

    def validate(self) -> None:
        if not self.title or not self.title.strip():
            raise ValidationError("step titles must be non-empty")
        if self.technique is not None:
            self.technique.validate()
        for ref in self.output_refs:
            if not ref or not isinstance(ref, str):
                raise ValidationError("step output refs must be non-empty strings")


@dataclass
class Claim:
    id: str
    name: str
    statement: str
    element_version: int
    strategy: Optional[str] = None
    subclaim_ids: list[str] = field(default_factory=list)
    contexts: list[str] = field(default_factory=list)
    assumptions: list[str] = field(default_factory=list)
    measure_ids: list[str] = field(default_factory=list)
    evidence_ids: list[str] = field(default_factory=list)
    conclusions: list[Conclusion] = field(default_factory=list)
    risk_criterion: Optional[str] = None

    kind = "claim"

    def validate(self) -> None:
        ensure_element_id(self.id)
        if not self.statement or not self.statement.strip():
            raise ValidationError(f"claim '{self.id}': statement must be non-empty")
        if self.element_version <= 0:
            raise ValidationError(f"claim '{self.id}': element_version must be > 0")
        for sub in self.subclaim_ids:
            ensure_element_id(sub, "subclaim id")
        if len(set(self.subclaim_ids)) != len(self.subclaim_ids):
            raise ValidationError(f"claim '{self.id}': duplicate subclaim ids")
        if self.id in self.subclaim_ids:
            raise ValidationError(f"claim '{self.id}': refers to itself as subclaim")
        if self.subclaim_ids and not (self.strategy and self.strategy.strip()):
            raise ValidationError(
                f"claim '{self.id}': inner claims (with subclaims) need a strategy"
            )
        if self.subclaim_ids and self.evidence_ids:
            raise ValidationError(
                f"claim '{self.id}': a claim cannot hold both subclaims and evidence"
            )
        for ev in self.evidence_ids:
            ensure_element_id(ev, "evidence id")
        for mid in self.measure_ids:
            ensure_element_id(mid, "measure id")
        for conclusion in self.conclusions:
            conclusion.validate()

    @property
    def is_leaf(self) -> bool:
        return not self.subclaim_ids


@dataclass
class Measure:
    id: str
    name: str
    description: str
    lifecycle_phase: LifecyclePhase
    addressed_characteristic: DataCharacteristic
    element_version: int
    blueprint_ids: list[str] = field(default_factory=list)

    kind = "measure"

    def validate(self) -> None:
        ensure_element_id(self.id)
        if not self.name or not self.name.strip():
            raise ValidationError(f"measure '{self.id}': name must be non-empty")
        if not isinstance(self.lifecycle_phase, LifecyclePhase):
            raise ValidationError(
                f"measure '{self.id}': unknown lifecycle phase"
                f" {self.lifecycle_phase!r}"
            )
        if not isinstance(self.addressed_characteristic, DataCharacteristic):
            raise ValidationError(
                f"measure '{self.id}': unknown addressed characteristic"
                f" {self.addressed_characteristic!r}"
            )
        if self.element_version <= 0:
            raise ValidationError(f"measure '{self.id}': element_version must be > 0")
        for bid in self.blueprint_ids:
            ensure_element_id(bid, "blueprint id")
        if len(set(self.blueprint_ids)) != len(self.blueprint_ids):
            raise ValidationError(f"measure '{self.id}': duplicate blueprint ids")


@dataclass
class Blueprint:
    id: str
    name: str
    realized_measure_id: str
    element_version: int
    description: str = ""
    justification: str = ""
    steps: list[Step] = field(default_factory=list)

    kind = "blueprint"

    def validate(self) -> None:
        ensure_element_id(self.id)
        if not self.name or not self.name.strip():
            raise ValidationError(f"blueprint '{self.id}': name must be non-empty")
        ensure_element_id(self.realized_measure_id, "realized measure id")
        if self.element_version <= 0:
            raise ValidationError(
                f"blueprint '{self.id}': element_version must be > 0"
            )
        for step in self.steps:
            step.validate()


@dataclass
class Realization:
    realization_id: str
    blueprint_id: str
    data_model_version: str
    parameter_bindings: dict[str, object] = field(default_factory=dict)
    artifacts: dict[str, str] = field(default_factory=dict)
    conclusions: list[Conclusion] = field(default_factory=list)
    documentation: list[DocumentationRecord] = field(default_factory=list)

    kind = "realization"

    @property
    def id(self) -> str:
        return self.realization_id

    def validate(self) -> None:
        ensure_element_id(self.realization_id, "realization id")
        ensure_element_id(self.blueprint_id, "blueprint id")
        if not self.data_model_version or not self.data_model_version.strip():
            raise ValidationError(
                f"realization '{self.realization_id}': data/model version must be"
                " non-empty"
            )
        for conclusion in self.conclusions:
            conclusion.validate()
        previous = None
        for record in self.documentation:
            record.validate()
            if previous is not None and record.timestamp <= previous:
                raise ValidationError(
                    f"realization '{self.realization_id}': documentation records"
                    " must be strictly ascending by timestamp"
                )
            previous = record.timestamp


AcElement = Union[Claim, Measure, Blueprint]
StoredObject = Union[Claim, Measure, Blueprint, Realization]

ELEMENT_KINDS = ("claim", "measure", "blueprint")

_PHASE_VALUES = {phase.value for phase in LifecyclePhase}
_CHARACTERISTIC_VALUES = {char.value for char in DataCharacteristic}


def _required(fields: Mapping[str, object], key: str) -> object:
    if key not in fields or fields[key] in (None, ""):
        raise ValidationError(f"missing required field '{key}'")
    return fields[key]


_CLAIM_FIELDS = {
    "id", "name", "statement", "strategy", "subclaim_ids", "contexts",
    "assumptions", "measure_ids", "evidence_ids", "risk_criterion",
}
_MEASURE_FIELDS = {
    "id", "name", "description", "lifecycle_phase", "addressed_characteristic",
    "blueprint_ids",
}
_BLUEPRINT_FIELDS = {
    "id", "name", "description", "realized_measure", "realized_measure_id",
    "justification", "steps",
}


def create_element(
    kind: str, fields: Mapping[str, object], now: Optional[int] = None
) -> AcElement:
    """Build a fresh element of the given kind from a flat field map.

    The element is stamped with the current epoch as its version and is not
    persisted; id uniqueness against a store is the caller's concern.
    """
    version = current_epoch(now)
    if version <= 0:
        raise ValidationError("element_version must be > 0")
    element_id = ensure_element_id(_required(fields, "id"))
    if kind == "claim":
        _reject_unknown(fields, _CLAIM_FIELDS, kind)
        element: AcElement = Claim(
            id=element_id,
            name=str(fields.get("name") or element_id),
            statement=str(_required(fields, "statement")),
            strategy=_optional_text(fields.get("strategy")),
            subclaim_ids=_str_list(fields.get("subclaim_ids")),
            contexts=_str_list(fields.get("contexts")),
            assumptions=_str_list(fields.get("assumptions")),
            measure_ids=_str_list(fields.get("measure_ids")),
            evidence_ids=_str_list(fields.get("evidence_ids")),
            risk_criterion=_optional_text(fields.get("risk_criterion")),
            element_version=version,
        )
    elif kind == "measure":
        _reject_unknown(fields, _MEASURE_FIELDS, kind)
        phase = str(_required(fields, "lifecycle_phase"))
        characteristic = str(_required(fields, "addressed_characteristic"))
        if phase not in _PHASE_VALUES:
            raise ValidationError(f"unknown lifecycle phase {phase!r}")
        if characteristic not in _CHARACTERISTIC_VALUES:
            raise ValidationError(f"unknown addressed characteristic {characteristic!r}")
        element = Measure(
            id=element_id,
            name=str(_required(fields, "name")),
            description=str(fields.get("description") or ""),
            lifecycle_phase=LifecyclePhase(phase),
            addressed_characteristic=DataCharacteristic(characteristic),
            blueprint_ids=_str_list(fields.get("blueprint_ids")),
            element_version=version,
        )
    elif kind == "blueprint":
        _reject_unknown(fields, _BLUEPRINT_FIELDS, kind)
        measure_ref = fields.get("realized_measure_id") or fields.get("realized_measure")
        if not measure_ref:
            raise ValidationError("missing required field 'realized_measure_id'")
        element = Blueprint(
            id=element_id,
            name=str(_required(fields, "name")),
            description=str(fields.get("description") or ""),
            realized_measure_id=ensure_element_id(measure_ref, "realized measure id"),
            justification=str(fields.get("justification") or ""),
            steps=list(fields.get("steps") or ()),
            element_version=version,
        )
    else:
        raise ValidationError(f"unknown element kind {kind!r}")
    element.validate()
    return element


def _reject_unknown(fields: Mapping[str, object], allowed: set, kind: str) -> None:
    unknown = set(fields) - allowed
    if unknown:
        raise ValidationError(
            f"unknown field(s) for {kind}: {', '.join(sorted(unknown))}"
        )


def _optional_text(value: object) -> Optional[str]:
    if value in (None, ""):
        return None
    return str(value)


def _str_list(value: object) -> list[str]:
    if value is None:
        return []
    if isinstance(value, str):
        raise ValidationError(f"expected a list of strings, got {value!r}")
    return [str(item) for item in value]


def refine_claim(
    claim: Claim,
    strategy: str,
    subclaim_ids: Sequence[str],
    now: Optional[int] = None,
) -> Claim:
    """Turn a bare claim into an inner node refined by the given subclaims."""
    if claim.evidence_ids:
        raise ValidationError(
            f"claim '{claim.id}' already holds evidence and cannot be refined"
        )
    if not strategy or not strategy.strip():
        raise ValidationError("refinement strategy must be non-empty")
    ids = [ensure_element_id(sub, "subclaim id") for sub in subclaim_ids]
    if not ids:
        raise ValidationError("refinement needs at least one subclaim")
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate subclaim ids in refinement")
    if claim.id in ids:
        raise ValidationError(f"claim '{claim.id}' cannot be its own subclaim")
    claim.strategy = strategy
    claim.subclaim_ids = list(ids)
    claim.element_version = bumped_version(claim.element_version, now)
    claim.validate()
    return claim


_RELATION_RULES = {
    LinkRelation.CLAIM_MEASURE: (Claim, Measure),
    LinkRelation.MEASURE_BLUEPRINT: (Measure, Blueprint),
    LinkRelation.CLAIM_EVIDENCE: (Claim, Realization),
}


def link(source: StoredObject, relation: LinkRelation | str, target: StoredObject) -> StoredObject:
    """Append a reference from source to target; a repeat link is a no-op.

    claim_evidence additionally requires the target realization to carry at
    least one conclusion and the claim to be a leaf.
    """
    try:
        rel = LinkRelation(relation)
    except ValueError:
        raise ValidationError(f"unknown link relation {relation!r}") from None
    want_source, want_target = _RELATION_RULES[rel]
    if not isinstance(source, want_source) or not isinstance(target, want_target):
        raise ValidationError(
            f"{rel.value} links a {want_source.kind} to a {want_target.kind},"
            f" got {source.kind} -> {target.kind}"
        )
    if rel is LinkRelation.CLAIM_MEASURE:
        if target.id not in source.measure_ids:
            source.measure_ids.append(target.id)
    elif rel is LinkRelation.MEASURE_BLUEPRINT:
        if target.realized_measure_id != source.id:
            raise ValidationError(
                f"blueprint '{target.id}' realizes measure"
                f" '{target.realized_measure_id}', not '{source.id}'"
            )
        if target.id not in source.blueprint_ids:
            source.blueprint_ids.append(target.id)
    else:
        if not target.conclusions:
            raise ValidationError(
                f"realization '{target.id}' has no conclusion and cannot serve"
                " as evidence"
            )
        if source.subclaim_ids:
            raise ValidationError(
                f"claim '{source.id}' is an inner node; evidence attaches to"
                " leaf claims only"
            )
        if target.id not in source.evidence_ids:
            source.evidence_ids.append(target.id)
    source.validate()
    return source


def add_conclusion(
    target: Union[Claim, Realization], text: str, timestamp: int
) -> Union[Claim, Realization]:
    """Append a conclusion and keep the list sorted by timestamp (stable)."""
    conclusion = Conclusion(text=text, timestamp=int(timestamp))
    conclusion.validate()
    target.conclusions.append(conclusion)
    target.conclusions.sort(key=lambda c: c.timestamp)
    return target


def latest_conclusion(target: Union[Claim, Realization]) -> Optional[Conclusion]:
    if not target.conclusions:
        return None
    return max(target.conclusions, key=lambda c: c.timestamp)


@dataclass(frozen=True)
class Summary:
    id: str
    kind: str
    name: str
    description: str
    refs: dict[str, tuple[str, ...]]
    element_version: Optional[int]
    data_model_version: Optional[str]
    documentation: tuple[DocumentationRecord, ...]
    latest_conclusion: Optional[Conclusion]


def summarize(obj: StoredObject) -> Summary:
    """Pure, side-effect-free digest of one element or realization."""
    if isinstance(obj, Claim):
        return Summary(
            id=obj.id,
            kind=obj.kind,
            name=obj.name,
            description=obj.statement,
            refs={
                "subclaims": tuple(obj.subclaim_ids),
                "measures": tuple(obj.measure_ids),
                "evidence": tuple(obj.evidence_ids),
            },
            element_version=obj.element_version,
            data_model_version=None,
            documentation=(),
            latest_conclusion=copy.deepcopy(latest_conclusion(obj)),
        )
    if isinstance(obj, Measure):
        return Summary(
            id=obj.id,
            kind=obj.kind,
            name=obj.name,
            description=obj.description,
            refs={"blueprints": tuple(obj.blueprint_ids)},
            element_version=obj.element_version,
            data_model_version=None,
            documentation=(),
            latest_conclusion=None,
        )
    if isinstance(obj, Blueprint):
        return Summary(
            id=obj.id,
            kind=obj.kind,
            name=obj.name,
            description=obj.description,
            refs={
                "realized_measure": (obj.realized_measure_id,),
                "steps": tuple(step.title for step in obj.steps),
            },
            element_version=obj.element_version,
            data_model_version=None,
            documentation=(),
            latest_conclusion=None,
        )
    if isinstance(obj, Realization):
        records = tuple(sorted(copy.deepcopy(obj.documentation), key=lambda r: r.timestamp))
        return Summary(
            id=obj.realization_id,
            kind=obj.kind,
            name=obj.realization_id,
            description="",
            refs={
                "blueprint": (obj.blueprint_id,),
                "artifacts": tuple(sorted(obj.artifacts)),
            },
            element_version=None,
            data_model_version=obj.data_model_version,
            documentation=records,
            latest_conclusion=copy.deepcopy(latest_conclusion(obj)),
        )
    raise ValidationError(f"cannot summarize object of type {type(obj).__name__}")
