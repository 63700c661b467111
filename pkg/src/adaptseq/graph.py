"""The language model: a prerequisite DAG of language features.

A model document is JSON::

    {"language": "en", "threshold": 7.5,
     "features": [{"id": "a", "label": "...", "kind": "grapheme",
                   "year": 1, "prerequisites": []}, ...]}
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping

from .errors import (
    CyclicModel,
    DuplicateFeatureId,
    InvalidThreshold,
    MalformedDocument,
    UnknownFeature,
    UnknownPrerequisite,
)

DEFAULT_THRESHOLD = 7.5
MICRO_PER_POINT = 10_000


class FeatureKind(str, Enum):
    GRAPHEME = "grapheme"
    PHONEME = "phoneme"
    MORPHOLOGY = "morphology"
    SYNTAX = "syntax"
    VOCABULARY = "vocabulary"


@dataclass(frozen=True)
class Feature:
    id: str
    label: str
    kind: FeatureKind
    year: int
    prerequisites: frozenset[str] = frozenset()


@dataclass(frozen=True)
class LanguageModel:
    language: str
    features: Mapping[str, Feature]
    threshold: float = DEFAULT_THRESHOLD

    @cached_property
    def dependents(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {fid: [] for fid in self.features}
        for f in self.features.values():
            for p in f.prerequisites:
                out[p].append(f.id)
        return {k: tuple(sorted(v)) for k, v in out.items()}

    @cached_property
    def topo_order(self) -> tuple[str, ...]:
        return tuple(topological_order(self))

    @property
    def threshold_micro(self) -> int:
        return points_to_micro(self.threshold)

    def feature(self, feature_id: str) -> Feature:
        try:
            return self.features[feature_id]
        except KeyError:
            raise UnknownFeature(feature_id) from None

    def edges(self) -> list[tuple[str, str]]:
        return sorted((p, f.id) for f in self.features.values() for p in f.prerequisites)


def points_to_micro(value: float) -> int:
    """Convert a mastery value on the 0-10 scale to micro-units exactly."""
    return int((Decimal(repr(value)) * MICRO_PER_POINT).to_integral_value())


@dataclass(frozen=True, order=True)
class Violation:
    feature_id: str
    code: str
    severity: str = field(compare=False)
    members: tuple[str, ...] = ()
    message: str = field(default="", compare=False)

    def __str__(self) -> str:
        return f"{self.severity}: {self.code}: {self.message}"

    def to_dict(self) -> dict:
        return {
            "feature_id": self.feature_id,
            "code": self.code,
            "severity": self.severity,
            "members": list(self.members),
            "message": self.message,
        }


def build_model(language: str, features: Iterable[Feature], threshold: float = DEFAULT_THRESHOLD) -> LanguageModel:
    """Assemble a model, enforcing the structural invariants (not acyclicity)."""
    if isinstance(threshold, bool) or not isinstance(threshold, (int, float)) or not 0 <= threshold <= 10:
        raise InvalidThreshold(f"threshold must be a number in [0, 10], got {threshold!r}")
    table: dict[str, Feature] = {}
    for f in features:
        if not f.id:
            raise MalformedDocument("feature id must be non-empty")
        if f.id in table:
            raise DuplicateFeatureId(f.id)
        if f.id in f.prerequisites:
            raise MalformedDocument(f"feature {f.id!r} lists itself as a prerequisite")
        if f.year < 1:
            raise MalformedDocument(f"feature {f.id!r} has year {f.year} < 1")
        table[f.id] = f
    for f in table.values():
        for p in sorted(f.prerequisites):
            if p not in table:
                raise UnknownPrerequisite(f"feature {f.id!r} requires unknown feature {p!r}")
    return LanguageModel(language=language, features=table, threshold=threshold)


def _require(obj: dict, key: str, types, where: str):
    if key not in obj:
        raise MalformedDocument(f"{where}: missing {key!r}")
    value = obj[key]
    if isinstance(value, bool) and bool not in (types if isinstance(types, tuple) else (types,)):
        raise MalformedDocument(f"{where}: {key!r} has wrong type")
    if not isinstance(value, types):
        raise MalformedDocument(f"{where}: {key!r} has wrong type")
    return value


def model_from_dict(doc) -> LanguageModel:
    if not isinstance(doc, dict):
        raise MalformedDocument("model document must be a JSON object")
    language = _require(doc, "language", str, "model")
    threshold = doc.get("threshold", DEFAULT_THRESHOLD)
    raw_features = _require(doc, "features", list, "model")
    features = []
    for i, raw in enumerate(raw_features):
        where = f"features[{i}]"
        if not isinstance(raw, dict):
            raise MalformedDocument(f"{where}: expected an object")
        fid = _require(raw, "id", str, where)
        label = raw.get("label", fid)
        if not isinstance(label, str):
            raise MalformedDocument(f"{where}: 'label' has wrong type")
        try:
            kind = FeatureKind(_require(raw, "kind", str, where))
        except ValueError:
            raise MalformedDocument(f"{where}: unknown kind {raw['kind']!r}") from None
        year = _require(raw, "year", int, where)
        prereqs = raw.get("prerequisites", [])
        if not isinstance(prereqs, list) or not all(isinstance(p, str) for p in prereqs):
            raise MalformedDocument(f"{where}: 'prerequisites' must be a list of strings")
        features.append(Feature(fid, label, kind, year, frozenset(prereqs)))
    return build_model(language, features, threshold)


def parse_model(text: str) -> LanguageModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"invalid JSON: {exc}") from None
    return model_from_dict(doc)


def model_to_dict(model: LanguageModel) -> dict:
    return {
        "language": model.language,
        "threshold": model.threshold,
        "features": [
            {
                "id": f.id,
                "label": f.label,
                "kind": f.kind.value,
                "year": f.year,
                "prerequisites": sorted(f.prerequisites),
            }
            for f in model.features.values()
        ],
    }


def serialize_model(model: LanguageModel) -> str:
    return json.dumps(model_to_dict(model), indent=2, ensure_ascii=False) + "\n"


def _strongly_connected(model: LanguageModel) -> list[list[str]]:
    # Iterative Tarjan over prerequisite edges.
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    components: list[list[str]] = []
    counter = 0
    for root in sorted(model.features):
        if root in index:
            continue
        work = [(root, iter(sorted(model.features[root].prerequisites)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, children = work[-1]
            advanced = False
            for child in children:
                if child not in index:
                    index[child] = low[child] = counter
                    counter += 1
                    stack.append(child)
                    on_stack.add(child)
                    work.append((child, iter(sorted(model.features[child].prerequisites))))
                    advanced = True
                    break
                if child in on_stack:
                    low[node] = min(low[node], index[child])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    comp.append(member)
                    if member == node:
                        break
                components.append(sorted(comp))
    return components


def find_cycles(model: LanguageModel) -> list[list[str]]:
    """Groups of features that sit on a prerequisite cycle, each sorted."""
    return sorted(c for c in _strongly_connected(model) if len(c) > 1)


def validate(model: LanguageModel) -> list[Violation]:
    out: list[Violation] = []
    for members in find_cycles(model):
        out.append(
            Violation(
                feature_id=members[0],
                code="CycleDetected",
                severity="error",
                members=tuple(members),
                message="prerequisite cycle among " + ", ".join(members),
            )
        )
    for f in model.features.values():
        for p in sorted(f.prerequisites):
            prereq = model.features[p]
            if prereq.year > f.year:
                out.append(
                    Violation(
                        feature_id=f.id,
                        code="YearInversion",
                        severity="warning",
                        members=(f.id, p),
                        message=f"{f.id} (year {f.year}) requires {p} (year {prereq.year})",
                    )
                )
    return sorted(out)


def topological_order(model: LanguageModel) -> list[str]:
    """Kahn's algorithm; among ready features the smallest id goes first."""
    indegree = {fid: len(f.prerequisites) for fid, f in model.features.items()}
    ready = [fid for fid, d in indegree.items() if d == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        fid = heapq.heappop(ready)
        order.append(fid)
        for dep in model.dependents[fid]:
            indegree[dep] -= 1
            if indegree[dep] == 0:
                heapq.heappush(ready, dep)
    if len(order) != len(model.features):
        raise CyclicModel(fid for fid, d in indegree.items() if d > 0)
    return order


def depths(model: LanguageModel) -> dict[str, int]:
    result: dict[str, int] = {}
    for fid in model.topo_order:
        prereqs = model.features[fid].prerequisites
        result[fid] = 1 + max(result[p] for p in prereqs) if prereqs else 0
    return result


def depth(model: LanguageModel, feature_id: str) -> int:
    """Length of the longest prerequisite chain ending at ``feature_id``."""
    model.feature(feature_id)
    return depths(model)[feature_id]
