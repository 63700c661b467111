"""Exception types raised by the engine.

Every error carries a stable ``code`` string; the CLI maps codes to exit
statuses and the HTTP service maps them to response codes.
"""

from __future__ import annotations


class EngineError(Exception):
    code = "EngineError"


class ModelError(EngineError):
    code = "ModelError"


class MalformedDocument(ModelError):
    code = "MalformedDocument"


class DuplicateFeatureId(ModelError):
    code = "DuplicateFeatureId"


class UnknownPrerequisite(ModelError):
    code = "UnknownPrerequisite"


class InvalidThreshold(ModelError):
    code = "InvalidThreshold"


class CyclicModel(ModelError):
    code = "CyclicModel"

    def __init__(self, members):
        self.members = sorted(members)
        super().__init__("prerequisite cycle among: " + ", ".join(self.members))


class UnknownFeature(EngineError):
    code = "UnknownFeature"


class InvalidYear(EngineError):
    code = "InvalidYear"


class OutOfRange(EngineError):
    code = "OutOfRange"


class InvalidResult(EngineError):
    code = "InvalidResult"


class SessionIndexMismatch(EngineError):
    code = "SessionIndexMismatch"


class DemotionNotTriggered(EngineError):
    code = "DemotionNotTriggered"


class EmptyPool(EngineError):
    code = "EmptyPool"


class NoContent(EngineError):
    code = "NoContent"

    def __init__(self, feature_id: str):
        self.feature_id = feature_id
        super().__init__(f"no lexicon content exercises feature {feature_id!r}")


class PlanResultMismatch(EngineError):
    code = "PlanResultMismatch"


class NotFound(EngineError):
    code = "NotFound"


class AlreadyExists(EngineError):
    code = "AlreadyExists"


class CorruptRecord(EngineError):
    code = "CorruptRecord"

    def __init__(self, path, line: int, reason: str):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {reason}")


class LockContention(EngineError):
    code = "LockContention"


class ConfigError(EngineError):
    code = "ConfigError"
