"""On-disk persistence of student profiles.

Layout::

    <data_dir>/<language>/<student_id>/profile.json   snapshot, replaced atomically
    <data_dir>/<language>/<student_id>/sessions.jsonl  one GameResult per line, append-only
    <data_dir>/<language>/<student_id>/.lock          per-student mutual exclusion

The session log is the source of truth: replaying it from a fresh profile
must reproduce the snapshot.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Iterator

from filelock import FileLock, Timeout

from .errors import AlreadyExists, CorruptRecord, InvalidResult, LockContention, NotFound
from .graph import LanguageModel
from .mastery import DEFAULT_PARAMS, reevaluate
from .params import MasteryParams
from .profile import GameResult, StudentProfile, init_profile

PROFILE_FILE = "profile.json"
LOG_FILE = "sessions.jsonl"
_SAFE_ID = re.compile(r"^[A-Za-z0-9_.@-]{1,128}$")


def encode_result(result: GameResult) -> str:
    return json.dumps(result.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"


def encode_snapshot(profile: StudentProfile) -> str:
    return json.dumps(profile.snapshot(), indent=2, ensure_ascii=False) + "\n"


def read_log(path: Path) -> list[GameResult]:
    results = []
    if not path.exists():
        return results
    with open(path, "rb") as fh:
        data = fh.read()
    lines = data.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    elif lines:
        raise CorruptRecord(path, len(lines), "truncated record (missing line terminator)")
    for lineno, raw in enumerate(lines, start=1):
        try:
            results.append(GameResult.from_dict(json.loads(raw.decode("utf-8"))))
        except (UnicodeDecodeError, json.JSONDecodeError, InvalidResult, AttributeError, TypeError) as exc:
            raise CorruptRecord(path, lineno, str(exc)) from None
    return results


def replay_log(
    model: LanguageModel,
    student_id: str,
    year: int,
    results: Iterable[GameResult],
    params: MasteryParams = DEFAULT_PARAMS,
) -> StudentProfile:
    profile = init_profile(model, student_id, year, params)
    for result in results:
        profile, _ = reevaluate(profile, model, result, params)
    return profile


class ProfileStore:
    def __init__(self, data_dir, language: str, lock_timeout: float = 5.0):
        self.root = Path(data_dir) / language
        self.language = language
        self.lock_timeout = lock_timeout

    def student_dir(self, student_id: str) -> Path:
        if not _SAFE_ID.match(student_id) or student_id in (".", ".."):
            raise NotFound(f"invalid student id {student_id!r}")
        return self.root / student_id

    def exists(self, student_id: str) -> bool:
        return (self.student_dir(student_id) / PROFILE_FILE).exists()

    @contextmanager
    def lock(self, student_id: str, timeout: float | None = None) -> Iterator[None]:
        d = self.student_dir(student_id)
        d.mkdir(parents=True, exist_ok=True)
        lock = FileLock(str(d / ".lock"), timeout=self.lock_timeout if timeout is None else timeout)
        try:
            lock.acquire()
        except Timeout:
            raise LockContention(f"student {student_id!r} is busy") from None
        try:
            yield
        finally:
            lock.release()

    def create(self, profile: StudentProfile) -> None:
        if self.exists(profile.student_id):
            raise AlreadyExists(f"student {profile.student_id!r} already exists")
        d = self.student_dir(profile.student_id)
        d.mkdir(parents=True, exist_ok=True)
        (d / LOG_FILE).touch()
        self.save_profile(profile)

    def load_profile(self, student_id: str) -> StudentProfile:
        d = self.student_dir(student_id)
        path = d / PROFILE_FILE
        if not path.exists():
            raise NotFound(f"no profile for student {student_id!r}")
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
            history = read_log(d / LOG_FILE)
            profile = StudentProfile.from_snapshot(doc, history)
        except json.JSONDecodeError as exc:
            raise CorruptRecord(path, exc.lineno, exc.msg) from None
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptRecord(path, 1, f"bad snapshot: {exc}") from None
        if profile.session_counter != len(history):
            raise CorruptRecord(
                d / LOG_FILE,
                len(history),
                f"log holds {len(history)} results but snapshot counts {profile.session_counter}",
            )
        return profile

    def save_profile(self, profile: StudentProfile) -> None:
        """Append unseen results to the log, then atomically replace the snapshot."""
        d = self.student_dir(profile.student_id)
        d.mkdir(parents=True, exist_ok=True)
        log_path = d / LOG_FILE
        on_disk = read_log(log_path)
        if len(on_disk) > len(profile.history) or tuple(on_disk) != profile.history[: len(on_disk)]:
            raise CorruptRecord(log_path, len(on_disk), "stored log is not a prefix of the profile history")
        fresh = profile.history[len(on_disk):]
        if fresh:
            with open(log_path, "a", encoding="utf-8", newline="\n") as fh:
                for result in fresh:
                    fh.write(encode_result(result))
                fh.flush()
                os.fsync(fh.fileno())
        fd, tmp = tempfile.mkstemp(dir=d, prefix=".profile.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(encode_snapshot(profile))
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, d / PROFILE_FILE)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
