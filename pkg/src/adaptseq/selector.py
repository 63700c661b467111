"""Session planning: which feature, which game type, which words.

The pipeline runs candidate_pool -> prioritize -> choose_game_type ->
select_content. Every step is a pure function of its inputs, and each rule
that fires leaves a line in the plan's rationale. Rationale lines start with
one of the names in ``RULES``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import EmptyPool, NoContent, PlanResultMismatch, SessionIndexMismatch
from .graph import LanguageModel
from .lexicon import ContentItem, Lexicon
from .mastery import DEFAULT_PARAMS, TransitionReport, reevaluate
from .params import MasteryParams
from .profile import FeatureState, GameResult, GameType, Status, StudentProfile
from .rng import SplitMix64, default_plan_seed

RULES = ("pool", "reopen-first", "recent-failure-last", "usage-order", "select", "game-type", "content")


class PoolClass(str, Enum):
    OPEN = "open"
    REOPEN = "reopen"


@dataclass(frozen=True)
class SessionPlan:
    student_id: str
    session_index: int
    feature_id: str
    game_type: GameType
    items: tuple[ContentItem, ...]
    seed: int
    rationale: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "student_id": self.student_id,
            "session_index": self.session_index,
            "feature_id": self.feature_id,
            "game_type": self.game_type.value,
            "items": [item.to_dict() for item in self.items],
            "seed": self.seed,
            "rationale": list(self.rationale),
        }


def staleness(profile: StudentProfile, state: FeatureState) -> int:
    """Sessions since the feature was last played.

    A feature never played (e.g. assumed mastered for the student's year)
    counts from the start of the profile.
    """
    return profile.session_counter - (state.last_used_session or 0)


def _supported(profile: StudentProfile, model: LanguageModel, fid: str, params: MasteryParams) -> bool:
    return all(profile.states[p].mastery > params.unlock_threshold for p in model.features[fid].prerequisites)


def candidate_pool(
    profile: StudentProfile, model: LanguageModel, params: MasteryParams = DEFAULT_PARAMS
) -> list[tuple[str, PoolClass]]:
    pool = []
    for fid in sorted(model.features):
        st = profile.state(fid)
        if st.times_played == 0 and not _supported(profile, model, fid, params):
            # e.g. assumed mastered for the year while a later-year prerequisite is not
            continue
        if st.status is Status.OPEN and st.mastery < params.max_mastery:
            pool.append((fid, PoolClass.OPEN))
        elif st.status is Status.MASTERED and staleness(profile, st) >= params.reopen_after:
            pool.append((fid, PoolClass.REOPEN))
    if not pool:
        raise EmptyPool(f"no playable feature for student {profile.student_id!r}")
    return pool


def _usage_key(profile: StudentProfile, fid: str):
    st = profile.states[fid]
    never = st.last_used_session is None
    return (st.times_played, -st.mastery, 0 if never else 1, 0 if never else -staleness(profile, st), fid)


def _recent_failure(profile: StudentProfile, st: FeatureState, params: MasteryParams) -> bool:
    return (
        st.last_score is not None
        and st.last_score < params.poor_score
        and st.last_used_session is not None
        and staleness(profile, st) < params.recent_window
    )


def _prioritize(pool, profile, params, trace: list[str] | None = None) -> list[str]:
    reopen = sorted(fid for fid, cls in pool if cls is PoolClass.REOPEN)
    opened = [fid for fid, cls in pool if cls is PoolClass.OPEN]
    head: list[str] = []
    if reopen:
        head = [reopen[0]]
        if trace is not None:
            trace.append(f"reopen-first: {reopen[0]} (staleness {staleness(profile, profile.states[reopen[0]])})")
    avoided = [fid for fid in opened if _recent_failure(profile, profile.states[fid], params)]
    regular = [fid for fid in opened if fid not in avoided]
    regular.sort(key=lambda f: _usage_key(profile, f))
    avoided.sort(key=lambda f: _usage_key(profile, f))
    if trace is not None:
        if avoided:
            trace.append("recent-failure-last: " + ",".join(avoided))
        if regular:
            trace.append("usage-order: " + ",".join(regular))
    return head + regular + avoided + reopen[1:]


def prioritize(
    pool: list[tuple[str, PoolClass]], profile: StudentProfile, params: MasteryParams = DEFAULT_PARAMS
) -> list[str]:
    """Total order over the pool; the first entry is what gets played.

    At most one reopened feature leads. Open features recently played badly go
    to the back; the rest sort by fewest plays, then highest mastery, then
    longest since last use, then id.
    """
    return _prioritize(pool, profile, params)


def choose_game_type(state: FeatureState) -> GameType:
    return GameType.ACCURACY if state.times_played == 0 else GameType.AUTOMATICITY


def select_content(lexicon: Lexicon, feature_id: str, n: int, seed: int) -> list[ContentItem]:
    """Seeded sample without replacement of items exercising ``feature_id``.

    Partial Fisher-Yates over the matches in lexicon order: for ``i`` in
    ``0..k-1`` swap position ``i`` with ``i + below(len - i)`` drawn from
    ``SplitMix64(seed)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    matches = list(lexicon.matching(feature_id))
    if not matches:
        raise NoContent(feature_id)
    rng = SplitMix64(seed)
    k = min(n, len(matches))
    for i in range(k):
        j = i + rng.below(len(matches) - i)
        matches[i], matches[j] = matches[j], matches[i]
    return matches[:k]


def plan_session(
    profile: StudentProfile,
    model: LanguageModel,
    lexicon: Lexicon,
    params: MasteryParams = DEFAULT_PARAMS,
    seed: int | None = None,
) -> SessionPlan:
    session_index = profile.session_counter + 1
    if seed is None:
        seed = default_plan_seed(profile.student_id, session_index)
    pool = candidate_pool(profile, model, params)
    trace = [
        "pool: "
        + " ".join(f"{cls.value}={','.join(f for f, c in pool if c is cls) or '-'}" for cls in PoolClass)
    ]
    order = _prioritize(pool, profile, params, trace)
    fid = order[0]
    trace.append(f"select: {fid}")
    state = profile.states[fid]
    game_type = choose_game_type(state)
    why = "never played" if game_type is GameType.ACCURACY else f"played {state.times_played}x"
    trace.append(f"game-type: {game_type.value} ({why})")
    items = select_content(lexicon, fid, params.items_per_session, seed)
    trace.append(f"content: {len(items)} of {len(lexicon.matching(fid))} items, seed {seed}")
    return SessionPlan(profile.student_id, session_index, fid, game_type, tuple(items), seed, tuple(trace))


def check_result(profile: StudentProfile, plan: SessionPlan, result: GameResult) -> None:
    if result.session_index != profile.session_counter + 1:
        raise SessionIndexMismatch(
            f"result for session {result.session_index}, expected {profile.session_counter + 1}"
        )
    mismatched = [
        name
        for name, a, b in (
            ("session_index", plan.session_index, result.session_index),
            ("feature_id", plan.feature_id, result.feature_id),
            ("game_type", plan.game_type, result.game_type),
            ("seed", plan.seed, result.seed),
        )
        if a != b
    ]
    if mismatched:
        raise PlanResultMismatch("result does not match plan: " + ", ".join(mismatched))


def apply_result(
    profile: StudentProfile,
    model: LanguageModel,
    plan: SessionPlan,
    result: GameResult,
    params: MasteryParams = DEFAULT_PARAMS,
) -> tuple[StudentProfile, TransitionReport]:
    check_result(profile, plan, result)
    return reevaluate(profile, model, result, params)
