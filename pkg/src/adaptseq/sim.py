"""Synthetic-student cohort simulator.

Each simulated student answers every item of a session independently with
probability ``skill[feature]`` and gains ``learning_rate`` skill on that
feature after the session (capped at 1).

Seeding rules, all derived from ``master_seed``:

* student ``i`` (0-based) gets ``seed_i = nth_output(master_seed, i)``;
* per-feature skills and the learning rate come from ``SplitMix64(seed_i ^ 0x5EED)``;
* item outcomes come from ``SplitMix64(mix64(seed_i))``;
* the plan seed for session ``k`` is ``nth_output(seed_i, k)``.

Students therefore do not depend on each other and may run in any order.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, CyclicModel, EmptyPool, NoContent, UnknownFeature
from .graph import LanguageModel, validate
from .lexicon import Lexicon, check_lexicon
from .mastery import DEFAULT_PARAMS
from .params import MasteryParams
from .profile import GameResult, Status, init_profile
from .rng import SplitMix64, mix64, nth_output
from .selector import SessionPlan, apply_result, plan_session


@dataclass
class SimStudent:
    student_id: str
    skill: dict[str, float]
    learning_rate: float
    seed: int
    rng: SplitMix64 = field(init=False, repr=False)

    def __post_init__(self):
        for fid, p in self.skill.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"skill for {fid!r} outside [0, 1]: {p}")
        if not 0.0 <= self.learning_rate <= 1.0:
            raise ValueError(f"learning_rate outside [0, 1]: {self.learning_rate}")
        self.rng = SplitMix64(mix64(self.seed))


def simulate_session(sim: SimStudent, plan: SessionPlan) -> GameResult:
    p = sim.skill[plan.feature_id]
    outcomes = [sim.rng.unit() < p for _ in plan.items]
    sim.skill[plan.feature_id] = min(1.0, p + sim.learning_rate)
    return GameResult.from_outcomes(plan.session_index, plan.feature_id, plan.game_type, outcomes, plan.seed)


def _range(spec, name: str) -> tuple[float, float]:
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return float(spec), float(spec)
    if isinstance(spec, dict) and "low" in spec and "high" in spec:
        lo, hi = float(spec["low"]), float(spec["high"])
        if not 0.0 <= lo <= hi <= 1.0:
            raise ConfigError(f"{name}: need 0 <= low <= high <= 1")
        return lo, hi
    raise ConfigError(f"{name}: expected a number or {{'low', 'high'}}")


@dataclass(frozen=True)
class CohortSpec:
    """Cohort shape. ``skill`` and ``learning_rate`` are fixed values or
    uniform ranges; ranges are sampled per student (and per feature for skill)."""

    size: int
    skill: tuple[float, float] = (0.5, 0.5)
    learning_rate: tuple[float, float] = (0.0, 0.0)
    year: int = 1
    n_sessions: int = 100

    @classmethod
    def from_dict(cls, doc: dict) -> "CohortSpec":
        if not isinstance(doc, dict) or "size" not in doc:
            raise ConfigError("cohort spec needs at least 'size'")
        spec = cls(
            size=int(doc["size"]),
            skill=_range(doc.get("skill", 0.5), "skill"),
            learning_rate=_range(doc.get("learning_rate", 0.0), "learning_rate"),
            year=int(doc.get("year", 1)),
            n_sessions=int(doc.get("n_sessions", 100)),
        )
        if spec.size < 0 or spec.n_sessions < 0 or spec.year < 1:
            raise ConfigError("size and n_sessions must be >= 0, year >= 1")
        return spec

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "skill": {"low": self.skill[0], "high": self.skill[1]},
            "learning_rate": {"low": self.learning_rate[0], "high": self.learning_rate[1]},
            "year": self.year,
            "n_sessions": self.n_sessions,
        }


def make_student(index: int, model: LanguageModel, spec: CohortSpec, master_seed: int) -> SimStudent:
    seed = nth_output(master_seed, index)
    draw = SplitMix64(seed ^ 0x5EED)
    lo, hi = spec.skill
    skill = {fid: lo + (hi - lo) * draw.unit() for fid in sorted(model.features)}
    lr_lo, lr_hi = spec.learning_rate
    return SimStudent(f"s{index:04d}", skill, lr_lo + (lr_hi - lr_lo) * draw.unit(), seed)


@dataclass
class StudentRun:
    student_id: str
    seed: int
    sessions_run: int = 0
    outcome: str = "ran"
    opened_at: dict[str, int] = field(default_factory=dict)
    mastered_at: dict[str, int] = field(default_factory=dict)
    plays_to_master: dict[str, int] = field(default_factory=dict)
    demotions: int = 0
    curriculum_events: list[dict] = field(default_factory=list)
    final_mastery: dict[str, int] = field(default_factory=dict)
    trajectory: list[tuple[int, ...]] = field(default_factory=list)
    log: list[GameResult] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "student_id": self.student_id,
            "seed": self.seed,
            "sessions_run": self.sessions_run,
            "outcome": self.outcome,
            "opened_at": self.opened_at,
            "mastered_at": self.mastered_at,
            "plays_to_master": self.plays_to_master,
            "demotions": self.demotions,
            "curriculum_events": self.curriculum_events,
            "final_mastery": self.final_mastery,
        }


def run_student(
    sim: SimStudent,
    model: LanguageModel,
    lexicon: Lexicon,
    n_sessions: int,
    params: MasteryParams = DEFAULT_PARAMS,
    year: int = 1,
) -> StudentRun:
    features = sorted(model.features)
    profile = init_profile(model, sim.student_id, year, params)
    run = StudentRun(sim.student_id, sim.seed)
    for fid, st in profile.states.items():
        if st.status is not Status.LOCKED:
            run.opened_at[fid] = 0
        if st.status is Status.MASTERED:
            run.mastered_at[fid] = 0
    for k in range(1, n_sessions + 1):
        try:
            plan = plan_session(profile, model, lexicon, params, nth_output(sim.seed, k))
        except EmptyPool:
            done = all(st.status is Status.MASTERED for st in profile.states.values())
            run.outcome = "completed" if done else "starved"
            break
        except NoContent:
            run.outcome = "starved"
            break
        result = simulate_session(sim, plan)
        profile, report = apply_result(profile, model, plan, result, params)
        run.log.append(result)
        run.sessions_run = k
        if report.demoted:
            run.demotions += 1
            run.curriculum_events.append({"session": k, "event": "demotion", "features": report.demoted})
        if report.relocked:
            run.curriculum_events.append({"session": k, "event": "relock", "features": report.relocked})
        for fid in report.newly_opened:
            run.opened_at.setdefault(fid, k)
        st = profile.states[plan.feature_id]
        if st.status is Status.MASTERED and plan.feature_id not in run.mastered_at:
            run.mastered_at[plan.feature_id] = k
            run.plays_to_master[plan.feature_id] = st.times_played
        run.trajectory.append(tuple(profile.states[f].mastery for f in features))
    run.final_mastery = {fid: profile.states[fid].mastery for fid in features}
    return run


def nearest_rank(values: list[float], pct: float):
    if not values:
        return None
    ordered = sorted(values)
    rank = max(1, math.ceil(pct / 100 * len(ordered)))
    return ordered[rank - 1]


@dataclass
class CohortReport:
    features: list[str]
    spec: CohortSpec
    master_seed: int
    n_sessions: int
    students: list[StudentRun]

    @property
    def starvation_count(self) -> int:
        return sum(1 for s in self.students if s.outcome == "starved")

    def aggregates(self) -> dict:
        runs = [s.sessions_run for s in self.students]
        mastered = [sum(1 for m in s.final_mastery.values() if m >= DEFAULT_PARAMS.max_mastery) for s in self.students]
        plays = [n for s in self.students for n in s.plays_to_master.values()]
        demos = [s.demotions for s in self.students]
        pct = (10, 50, 90)
        return {
            "sessions_run": {f"p{p}": nearest_rank(runs, p) for p in pct},
            "features_mastered": {f"p{p}": nearest_rank(mastered, p) for p in pct},
            "plays_to_master": {f"p{p}": nearest_rank(plays, p) for p in pct},
            "plays_to_master_histogram": {str(k): plays.count(k) for k in sorted(set(plays))},
            "demotions": {f"p{p}": nearest_rank(demos, p) for p in pct},
            "total_demotions": sum(demos),
        }

    def summary(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "n_sessions": self.n_sessions,
            "cohort": self.spec.to_dict(),
            "features": self.features,
            "starvation_count": self.starvation_count,
            "aggregates": self.aggregates(),
            "students": [s.summary() for s in self.students],
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True) + "\n"

    def trajectories_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["student_id", "session", "feature_id", "mastery"])
        for s in self.students:
            for k, row in enumerate(s.trajectory, start=1):
                for fid, m in zip(self.features, row):
                    w.writerow([s.student_id, k, fid, m])
        return buf.getvalue()

    def sessions_jsonl(self) -> str:
        out = []
        for s in self.students:
            for r in s.log:
                out.append(json.dumps({"student_id": s.student_id, **r.to_dict()}, sort_keys=True, separators=(",", ":")))
        return "\n".join(out) + ("\n" if out else "")

    def write(self, out_dir) -> dict[str, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "summary": out / "summary.json",
            "trajectories": out / "trajectories.csv",
            "sessions": out / "sessions.jsonl",
        }
        paths["summary"].write_text(self.summary_json(), encoding="utf-8")
        paths["trajectories"].write_text(self.trajectories_csv(), encoding="utf-8")
        paths["sessions"].write_text(self.sessions_jsonl(), encoding="utf-8")
        return paths


def check_inputs(model: LanguageModel, lexicon: Lexicon) -> None:
    cycles = [v for v in validate(model) if v.severity == "error"]
    if cycles:
        raise CyclicModel(cycles[0].members)
    bad = check_lexicon(lexicon, model)
    if bad:
        raise UnknownFeature(bad[0].message)


def run_cohort(
    model: LanguageModel,
    lexicon: Lexicon,
    cohort_spec: CohortSpec,
    n_sessions: int | None = None,
    params: MasteryParams = DEFAULT_PARAMS,
    master_seed: int = 0,
) -> CohortReport:
    check_inputs(model, lexicon)
    n = cohort_spec.n_sessions if n_sessions is None else n_sessions
    students = [
        run_student(make_student(i, model, cohort_spec, master_seed), model, lexicon, n, params, cohort_spec.year)
        for i in range(cohort_spec.size)
    ]
    return CohortReport(sorted(model.features), cohort_spec, master_seed, n, students)
