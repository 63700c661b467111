"""Configuration loading and the storage-backed engine shared by the CLI and
the HTTP service."""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, InvalidResult, ModelError, SessionIndexMismatch
from .graph import LanguageModel, parse_model, validate
from .lexicon import Lexicon, check_lexicon, parse_lexicon
from .mastery import TransitionReport
from .params import MasteryParams
from .profile import GameResult, StudentProfile, init_profile
from .selector import SessionPlan, apply_result, plan_session
from .storage import ProfileStore

CONFIG_ENV = "ADAPTSEQ_CONFIG"
DEFAULT_LISTEN = "127.0.0.1:8080"


@dataclass
class EngineConfig:
    data_dir: Path
    model_path: Path
    lexicon_path: Path
    params: dict = field(default_factory=dict)
    items_per_session: int | None = None
    listen: str = DEFAULT_LISTEN
    lock_timeout: float = 5.0

    @classmethod
    def from_file(cls, path) -> "EngineConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        return cls.from_dict(doc, base=path.parent)

    @classmethod
    def from_dict(cls, doc: dict, base: Path | None = None) -> "EngineConfig":
        base = base or Path.cwd()
        try:
            return cls(
                data_dir=base / doc.get("data_dir", "data"),
                model_path=base / doc["model"],
                lexicon_path=base / doc["lexicon"],
                params=dict(doc.get("params", {})),
                items_per_session=doc.get("items_per_session"),
                listen=doc.get("listen", DEFAULT_LISTEN),
                lock_timeout=float(doc.get("lock_timeout", 5.0)),
            )
        except KeyError as exc:
            raise ConfigError(f"config is missing {exc.args[0]!r}") from None


def resolve_config_path(cli_value: str | None) -> str | None:
    return cli_value or os.environ.get(CONFIG_ENV)


def read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None


def effective_params(model: LanguageModel, overrides: dict, items_per_session: int | None = None) -> MasteryParams:
    """Defaults, with the unlock threshold taken from the model unless overridden."""
    values = {"unlock_threshold": model.threshold_micro}
    values.update(overrides)
    if items_per_session is not None:
        values["items_per_session"] = items_per_session
    return MasteryParams.from_dict(values)


def human_mastery(micro: int) -> str:
    whole, frac = divmod(micro, 10_000)
    return f"{whole}.{frac:04d}/10"


class Engine:
    def __init__(self, model: LanguageModel, lexicon: Lexicon, params: MasteryParams, store: ProfileStore):
        self.model = model
        self.lexicon = lexicon
        self.params = params
        self.store = store

    @classmethod
    def from_config(cls, config: EngineConfig) -> "Engine":
        try:
            model = parse_model(read_text(config.model_path))
            errors = [v for v in validate(model) if v.severity == "error"]
            if errors:
                raise ConfigError("; ".join(v.message for v in errors))
            lexicon = parse_lexicon(read_text(config.lexicon_path), model.language)
        except ModelError as exc:
            raise ConfigError(f"{config.model_path}: {exc}") from None
        bad = check_lexicon(lexicon, model)
        if bad:
            raise ConfigError(bad[0].message)
        params = effective_params(model, config.params, config.items_per_session)
        store = ProfileStore(config.data_dir, model.language, config.lock_timeout)
        return cls(model, lexicon, params, store)

    def create_student(self, student_id: str, year: int) -> StudentProfile:
        profile = init_profile(self.model, student_id, year, self.params)
        with self.store.lock(student_id):
            self.store.create(profile)
        return profile

    def load(self, student_id: str) -> StudentProfile:
        with self.store.lock(student_id):
            return self.store.load_profile(student_id)

    def plan(self, student_id: str, seed: int | None = None) -> SessionPlan:
        return plan_session(self.load(student_id), self.model, self.lexicon, self.params, seed)

    def submit(self, student_id: str, result: GameResult | dict) -> TransitionReport:
        """Re-derive the plan from the result's seed, apply, and persist.

        The session log line is durable before this returns.
        """
        if isinstance(result, dict):
            result = GameResult.from_dict(result)
        with self.store.lock(student_id):
            profile = self.store.load_profile(student_id)
            if result.session_index != profile.session_counter + 1:
                raise SessionIndexMismatch(
                    f"result for session {result.session_index}, expected {profile.session_counter + 1}"
                )
            plan = plan_session(profile, self.model, self.lexicon, self.params, result.seed)
            profile, report = apply_result(profile, self.model, plan, result, self.params)
            self.store.save_profile(profile)
        return report

    def profile_view(self, profile: StudentProfile) -> dict:
        doc = profile.snapshot()
        for fid, st in doc["states"].items():
            st["mastery_display"] = human_mastery(st["mastery"])
        return doc


def load_result_file(path) -> GameResult:
    text = sys.stdin.read() if str(path) == "-" else read_text(path)
    try:
        return GameResult.from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise InvalidResult(f"result is not valid JSON: {exc}") from None
