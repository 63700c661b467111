"""Mastery re-evaluation: a clamped, snapped exponential moving average.

Only the previous mastery value feeds the next one::

    target = score * max_mastery
    raw    = round_half_even(alpha * target + (1 - alpha) * m)
    new    = min(max(raw, m - max_drop), max_mastery), snapped to max_mastery
             once it reaches snap_threshold

Arithmetic is exact integer math with a single rounding step, so results
are bit-identical everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from numbers import Rational

from .errors import DemotionNotTriggered, OutOfRange, PlanResultMismatch
from .graph import LanguageModel
from .params import MasteryParams
from .profile import (
    GameResult,
    Status,
    StudentProfile,
    record_session,
    recompute_status,
    status_for,
)

DEFAULT_PARAMS = MasteryParams()


def as_fraction(score) -> Fraction:
    """Exact score. Floats are read as the nearest fraction with denominator <= 10_000."""
    kind = type(score)
    if kind is Fraction:
        return score
    if kind is int:
        return Fraction(score)
    if isinstance(score, bool):
        raise OutOfRange(f"score must be numeric, got {score!r}")
    if isinstance(score, Rational):
        return Fraction(score)
    if isinstance(score, float):
        return Fraction(score).limit_denominator(10_000)
    raise OutOfRange(f"score must be numeric, got {score!r}")


def _div_half_even(num: int, den: int) -> int:
    q, r = divmod(num, den)
    if 2 * r > den or (2 * r == den and q & 1):
        q += 1
    return q


def update_mastery(m: int, score, params: MasteryParams = DEFAULT_PARAMS) -> int:
    s = as_fraction(score)
    if not 0 <= m <= params.max_mastery:
        raise OutOfRange(f"mastery {m} outside [0, {params.max_mastery}]")
    if not 0 <= s <= 1:
        raise OutOfRange(f"score {score} outside [0, 1]")
    # alpha = a/b, score = p/q; one exact division with half-even rounding
    a, b = params.alpha_num, params.alpha_den
    p, q = s.numerator, s.denominator
    raw = _div_half_even(a * p * params.max_mastery + (b - a) * m * q, b * q)
    capped = min(max(raw, m - params.max_drop), params.max_mastery)
    return params.max_mastery if capped >= params.snap_threshold else capped


def update_streak(prev_mastery: int, new_mastery: int, streak: int, max_mastery: int | None = None) -> int:
    """Count consecutive plays that did not raise mastery.

    With ``max_mastery`` given, a play that leaves the feature at the maximum
    resets the count: mastery there cannot rise any further.
    """
    if max_mastery is not None and new_mastery >= max_mastery:
        return 0
    return streak + 1 if new_mastery <= prev_mastery else 0


def apply_demotion(
    profile: StudentProfile, model: LanguageModel, feature_id: str, params: MasteryParams = DEFAULT_PARAMS
) -> tuple[StudentProfile, list[str]]:
    """Lower a stalled feature and its direct prerequisites by ``demotion_amount``.

    Never-played features that lose prerequisite support fall back to locked;
    features already played keep their status.
    """
    st = profile.state(feature_id)
    if st.non_improving_streak < params.non_improving_limit:
        raise DemotionNotTriggered(
            f"{feature_id}: streak {st.non_improving_streak} < limit {params.non_improving_limit}"
        )
    targets = sorted({feature_id} | set(model.feature(feature_id).prerequisites))
    states = dict(profile.states)
    for fid in targets:
        cur = states[fid]
        m = max(0, cur.mastery - params.demotion_amount)
        status = cur.status if cur.status is Status.LOCKED else status_for(m, params.max_mastery)
        states[fid] = replace(cur, mastery=m, status=status)
    states[feature_id] = replace(states[feature_id], non_improving_streak=0)

    affected = {dep for fid in targets for dep in model.dependents[fid]}
    for fid in sorted(affected):
        cur = states[fid]
        if cur.status is Status.LOCKED or cur.times_played > 0:
            continue
        if any(states[p].mastery <= params.unlock_threshold for p in model.features[fid].prerequisites):
            states[fid] = replace(cur, status=Status.LOCKED)
    return replace(profile, states=states), targets


@dataclass(frozen=True)
class TransitionReport:
    student_id: str
    session_index: int
    feature_id: str
    game_type: str
    score: float
    mastery_before: int
    mastery_after: int
    streak: int
    status_after: str
    demoted: list[str] = field(default_factory=list)
    relocked: list[str] = field(default_factory=list)
    newly_opened: list[str] = field(default_factory=list)

    @property
    def mastery_delta(self) -> int:
        return self.mastery_after - self.mastery_before

    def to_dict(self) -> dict:
        return {
            "student_id": self.student_id,
            "session_index": self.session_index,
            "feature_id": self.feature_id,
            "game_type": self.game_type,
            "score": self.score,
            "mastery_before": self.mastery_before,
            "mastery_after": self.mastery_after,
            "mastery_delta": self.mastery_delta,
            "streak": self.streak,
            "status_after": self.status_after,
            "demoted": list(self.demoted),
            "relocked": list(self.relocked),
            "newly_opened": list(self.newly_opened),
        }


def reevaluate(
    profile: StudentProfile, model: LanguageModel, result: GameResult, params: MasteryParams = DEFAULT_PARAMS
) -> tuple[StudentProfile, TransitionReport]:
    """Fold one game result into the profile.

    Order: bookkeeping, EMA update, streak, demotion when the streak hits the
    limit, then unlocking of newly supported features. Replaying a session
    log is repeated application of this function.
    """
    before = profile.state(result.feature_id)
    if before.status is Status.LOCKED:
        raise PlanResultMismatch(f"feature {result.feature_id!r} is locked and cannot be played")
    profile = record_session(profile, result)
    st = profile.states[result.feature_id]
    new_m = update_mastery(before.mastery, result.exact_score, params)
    streak = update_streak(before.mastery, new_m, st.non_improving_streak, params.max_mastery)
    profile = profile.with_states(
        {result.feature_id: replace(st, mastery=new_m, status=status_for(new_m, params.max_mastery), non_improving_streak=streak)}
    )
    demoted: list[str] = []
    relocked: list[str] = []
    if streak >= params.non_improving_limit:
        locked_before = {fid for fid, s in profile.states.items() if s.status is Status.LOCKED}
        profile, demoted = apply_demotion(profile, model, result.feature_id, params)
        relocked = sorted(
            fid for fid, s in profile.states.items() if s.status is Status.LOCKED and fid not in locked_before
        )
    profile, opened = recompute_status(profile, model, params)
    after = profile.states[result.feature_id]
    report = TransitionReport(
        student_id=profile.student_id,
        session_index=result.session_index,
        feature_id=result.feature_id,
        game_type=result.game_type.value,
        score=result.score,
        mastery_before=before.mastery,
        mastery_after=after.mastery,
        streak=after.non_improving_streak,
        status_after=after.status.value,
        demoted=demoted,
        relocked=relocked,
        newly_opened=opened,
    )
    return profile, report
