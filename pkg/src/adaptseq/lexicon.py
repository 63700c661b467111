from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

from .errors import MalformedDocument, UnknownFeature
from .graph import LanguageModel, Violation


class ItemKind(str, Enum):
    WORD = "word"
    SENTENCE = "sentence"


@dataclass(frozen=True)
class ContentItem:
    text: str
    kind: ItemKind
    features: frozenset[str]
    difficulty: int = 1

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "kind": self.kind.value,
            "features": sorted(self.features),
            "difficulty": self.difficulty,
        }


@dataclass(frozen=True)
class Lexicon:
    language: str
    items: tuple[ContentItem, ...]

    @cached_property
    def _by_feature(self) -> dict[str, tuple[ContentItem, ...]]:
        index: dict[str, list[ContentItem]] = {}
        for item in self.items:
            for fid in item.features:
                index.setdefault(fid, []).append(item)
        return {k: tuple(v) for k, v in index.items()}

    def matching(self, feature_id: str) -> tuple[ContentItem, ...]:
        """Items exercising ``feature_id``, in lexicon order."""
        return self._by_feature.get(feature_id, ())


def item_from_dict(raw, where: str = "item") -> ContentItem:
    if not isinstance(raw, dict):
        raise MalformedDocument(f"{where}: expected an object")
    text = raw.get("text")
    if not isinstance(text, str) or not text:
        raise MalformedDocument(f"{where}: 'text' must be a non-empty string")
    try:
        kind = ItemKind(raw.get("kind", "word"))
    except ValueError:
        raise MalformedDocument(f"{where}: unknown kind {raw.get('kind')!r}") from None
    features = raw.get("features")
    if not isinstance(features, list) or not features or not all(isinstance(f, str) for f in features):
        raise MalformedDocument(f"{where}: 'features' must be a non-empty list of strings")
    difficulty = raw.get("difficulty", 1)
    if isinstance(difficulty, bool) or not isinstance(difficulty, int) or not 1 <= difficulty <= 5:
        raise MalformedDocument(f"{where}: 'difficulty' must be an integer in 1..5")
    return ContentItem(text, kind, frozenset(features), difficulty)


def parse_lexicon(text: str, language: str = "", model: LanguageModel | None = None) -> Lexicon:
    """Parse a lexicon file (a JSON array of items).

    When ``model`` is given, items naming features outside it are rejected.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"invalid JSON: {exc}") from None
    if not isinstance(doc, list):
        raise MalformedDocument("lexicon document must be a JSON array")
    lexicon = Lexicon(language, tuple(item_from_dict(raw, f"items[{i}]") for i, raw in enumerate(doc)))
    if model is not None:
        problems = check_lexicon(lexicon, model)
        if problems:
            raise UnknownFeature(problems[0].message)
        if not language:
            lexicon = Lexicon(model.language, lexicon.items)
    return lexicon


def serialize_lexicon(lexicon: Lexicon) -> str:
    return json.dumps([item.to_dict() for item in lexicon.items], indent=2, ensure_ascii=False) + "\n"


def check_lexicon(lexicon: Lexicon, model: LanguageModel) -> list[Violation]:
    out = []
    for i, item in enumerate(lexicon.items):
        for fid in sorted(item.features - set(model.features)):
            out.append(
                Violation(
                    feature_id=fid,
                    code="UnknownLexiconFeature",
                    severity="error",
                    members=(str(i),),
                    message=f"lexicon item {i} ({item.text!r}) references unknown feature {fid!r}",
                )
            )
    return sorted(out)
