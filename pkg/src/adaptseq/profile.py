"""Per-student state: the instantiated feature graph plus the session history."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Mapping

from .errors import InvalidResult, InvalidYear, SessionIndexMismatch, UnknownFeature
from .graph import LanguageModel
from .params import MasteryParams

MAX_MASTERY = 100_000


class Status(str, Enum):
    LOCKED = "locked"
    OPEN = "open"
    MASTERED = "mastered"


class GameType(str, Enum):
    ACCURACY = "accuracy"
    AUTOMATICITY = "automaticity"


@dataclass(frozen=True)
class FeatureState:
    mastery: int = 0
    status: Status = Status.LOCKED
    times_played: int = 0
    last_used_session: int | None = None
    last_score: float | None = None
    non_improving_streak: int = 0

    def to_dict(self) -> dict:
        return {
            "mastery": self.mastery,
            "status": self.status.value,
            "times_played": self.times_played,
            "last_used_session": self.last_used_session,
            "last_score": self.last_score,
            "non_improving_streak": self.non_improving_streak,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureState":
        return cls(
            mastery=int(d["mastery"]),
            status=Status(d["status"]),
            times_played=int(d["times_played"]),
            last_used_session=d.get("last_used_session"),
            last_score=d.get("last_score"),
            non_improving_streak=int(d.get("non_improving_streak", 0)),
        )


@dataclass(frozen=True)
class GameResult:
    session_index: int
    feature_id: str
    game_type: GameType
    item_outcomes: tuple[bool, ...]
    score: float
    seed: int

    @classmethod
    def from_outcomes(cls, session_index, feature_id, game_type, outcomes, seed) -> "GameResult":
        outcomes = tuple(bool(x) for x in outcomes)
        if not outcomes:
            raise InvalidResult("a result needs at least one item outcome")
        return cls(session_index, feature_id, GameType(game_type), outcomes, sum(outcomes) / len(outcomes), seed)

    @property
    def exact_score(self) -> Fraction:
        return Fraction(sum(self.item_outcomes), len(self.item_outcomes))

    def check(self) -> None:
        if not self.item_outcomes:
            raise InvalidResult("a result needs at least one item outcome")
        if self.session_index < 1:
            raise InvalidResult("session_index must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise InvalidResult("seed must be an unsigned 64-bit integer")
        if abs(self.score - float(self.exact_score)) > 1e-9:
            raise InvalidResult(f"score {self.score} disagrees with item outcomes ({self.exact_score})")

    def to_dict(self) -> dict:
        return {
            "session_index": self.session_index,
            "feature_id": self.feature_id,
            "game_type": self.game_type.value,
            "item_outcomes": list(self.item_outcomes),
            "score": self.score,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GameResult":
        try:
            outcomes = d["item_outcomes"]
            if not isinstance(outcomes, list) or not all(isinstance(x, bool) for x in outcomes):
                raise InvalidResult("item_outcomes must be a list of booleans")
            if not outcomes:
                raise InvalidResult("a result needs at least one item outcome")
            score = d.get("score")
            if score is None:
                score = sum(outcomes) / len(outcomes)
            for key in ("session_index", "seed"):
                if isinstance(d[key], bool) or not isinstance(d[key], int):
                    raise InvalidResult(f"{key} must be an integer")
            if not isinstance(d["feature_id"], str):
                raise InvalidResult("feature_id must be a string")
            result = cls(
                session_index=d["session_index"],
                feature_id=d["feature_id"],
                game_type=GameType(d["game_type"]),
                item_outcomes=tuple(outcomes),
                score=float(score),
                seed=d["seed"],
            )
        except KeyError as exc:
            raise InvalidResult(f"missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise InvalidResult(str(exc)) from None
        result.check()
        return result


@dataclass(frozen=True)
class StudentProfile:
    student_id: str
    year: int
    model_language: str
    states: Mapping[str, FeatureState]
    session_counter: int = 0
    history: tuple[GameResult, ...] = field(default=(), compare=True)

    def state(self, feature_id: str) -> FeatureState:
        try:
            return self.states[feature_id]
        except KeyError:
            raise UnknownFeature(feature_id) from None

    def with_states(self, changes: Mapping[str, FeatureState]) -> "StudentProfile":
        states = dict(self.states)
        states.update(changes)
        return replace(self, states=states)

    def snapshot(self) -> dict:
        """The profile document (everything except the session log)."""
        return {
            "student_id": self.student_id,
            "year": self.year,
            "model_language": self.model_language,
            "session_counter": self.session_counter,
            "states": {fid: st.to_dict() for fid, st in self.states.items()},
        }

    @classmethod
    def from_snapshot(cls, doc: dict, history=()) -> "StudentProfile":
        return cls(
            student_id=doc["student_id"],
            year=int(doc["year"]),
            model_language=doc["model_language"],
            states={fid: FeatureState.from_dict(st) for fid, st in doc["states"].items()},
            session_counter=int(doc["session_counter"]),
            history=tuple(history),
        )


def status_for(mastery: int, max_mastery: int = MAX_MASTERY) -> Status:
    return Status.MASTERED if mastery >= max_mastery else Status.OPEN


def _threshold(model: LanguageModel, params: MasteryParams | None) -> int:
    return params.unlock_threshold if params is not None else model.threshold_micro


def init_profile(model: LanguageModel, student_id: str, year: int, params: MasteryParams | None = None) -> StudentProfile:
    """Instantiate the model for a student of the given school year.

    Features taught before ``year`` start mastered; the rest open at the
    initial value when their prerequisites are already above threshold and
    stay locked otherwise.
    """
    if isinstance(year, bool) or not isinstance(year, int) or year < 1:
        raise InvalidYear(f"year must be an integer >= 1, got {year!r}")
    params = params or MasteryParams(unlock_threshold=model.threshold_micro)
    threshold = _threshold(model, params)
    mastery: dict[str, int] = {}
    states: dict[str, FeatureState] = {}
    for fid in model.topo_order:
        f = model.features[fid]
        if f.year < year:
            states[fid] = FeatureState(mastery=params.max_mastery, status=Status.MASTERED)
        elif all(mastery[p] > threshold for p in f.prerequisites):
            states[fid] = FeatureState(mastery=params.open_init, status=status_for(params.open_init, params.max_mastery))
        else:
            states[fid] = FeatureState()
        mastery[fid] = states[fid].mastery
    ordered = {fid: states[fid] for fid in model.features}
    return StudentProfile(student_id, year, model.language, ordered)


def recompute_status(
    profile: StudentProfile, model: LanguageModel, params: MasteryParams | None = None
) -> tuple[StudentProfile, list[str]]:
    """Open every locked feature whose prerequisites all surpass the threshold.

    Returns the updated profile and the ids that opened, ascending.
    """
    threshold = _threshold(model, params)
    open_init = params.open_init if params else MasteryParams().open_init
    max_mastery = params.max_mastery if params else MAX_MASTERY
    states = dict(profile.states)
    opened = []
    for fid in model.topo_order:
        st = states[fid]
        if st.status is not Status.LOCKED:
            continue
        if all(states[p].mastery > threshold for p in model.features[fid].prerequisites):
            m = st.mastery or open_init
            states[fid] = replace(st, mastery=m, status=status_for(m, max_mastery))
            opened.append(fid)
    if not opened:
        return profile, []
    return replace(profile, states=states), sorted(opened)


def record_session(profile: StudentProfile, result: GameResult) -> StudentProfile:
    """Bookkeeping for one finished session; mastery is not touched here."""
    if result.session_index != profile.session_counter + 1:
        raise SessionIndexMismatch(
            f"result for session {result.session_index}, expected {profile.session_counter + 1}"
        )
    st = profile.state(result.feature_id)
    result.check()
    st = replace(
        st,
        times_played=st.times_played + 1,
        last_used_session=result.session_index,
        last_score=result.score,
    )
    states = dict(profile.states)
    states[result.feature_id] = st
    return replace(
        profile,
        states=states,
        session_counter=profile.session_counter + 1,
        history=profile.history + (result,),
    )
