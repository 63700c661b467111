"""Model builders, oracles and trace drivers shared by the test modules."""

from __future__ import annotations

import random
from pathlib import Path

from adaptseq.graph import Feature, FeatureKind, build_model
from adaptseq.lexicon import ContentItem, ItemKind, Lexicon
from adaptseq.errors import EmptyPool
from adaptseq.params import MasteryParams
from adaptseq.profile import GameResult, init_profile
from adaptseq.selector import apply_result, plan_session

GOLDEN = Path(__file__).parent / "golden"


def feat(fid, year=1, prereqs=(), kind=FeatureKind.GRAPHEME):
    return Feature(fid, fid.upper(), kind, year, frozenset(prereqs))


def chain_model(length: int, year: int = 1, threshold: float = 7.5):
    ids = [f"f{i}" for i in range(length)]
    return build_model("xx", [feat(fid, year, ids[i - 1:i]) for i, fid in enumerate(ids)], threshold)


def random_dag(rng: random.Random, n: int, edge_p: float = 0.2, max_year: int = 3):
    """Random DAG whose ids are shuffled so id order is unrelated to edge order."""
    names = [f"n{i:02d}" for i in range(n)]
    rng.shuffle(names)
    features = []
    for i, name in enumerate(names):
        prereqs = [names[j] for j in range(i) if rng.random() < edge_p]
        features.append(feat(name, rng.randint(1, max_year), prereqs))
    rng.shuffle(features)
    return build_model("xx", features)


def lexicon_for(model, per_feature: int = 10) -> Lexicon:
    items = [
        ContentItem(f"{fid}-{i}", ItemKind.WORD, frozenset({fid}), 1 + i % 5)
        for fid in sorted(model.features)
        for i in range(per_feature)
    ]
    return Lexicon(model.language, tuple(items))


def all_paths_longest(model, fid) -> int:
    """Brute-force longest prerequisite chain ending at ``fid``."""
    best = 0

    def walk(node, length):
        nonlocal best
        best = max(best, length)
        for p in model.features[node].prerequisites:
            walk(p, length + 1)

    walk(fid, 0)
    return best


def half_even_div(num: int, den: int) -> int:
    q, r = divmod(num, den)
    if 2 * r > den or (2 * r == den and q % 2 == 1):
        q += 1
    return q


def ema_oracle(m: int, correct: int, total: int, p: MasteryParams = MasteryParams()) -> int:
    """Integer-only recomputation of the mastery update."""
    a, b = p.alpha_num, p.alpha_den
    raw = half_even_div(a * correct * p.max_mastery + (b - a) * m * total, b * total)
    raw = max(raw, m - p.max_drop)
    raw = min(raw, p.max_mastery)
    return p.max_mastery if raw >= p.snap_threshold else raw


def random_trace(model, lexicon, rng: random.Random, sessions: int, year: int = 1, params: MasteryParams | None = None):
    """Drive plan -> random result -> apply_result; yields (before, plan, result, after, report)."""
    params = params or MasteryParams()
    profile = init_profile(model, "t", year, params)
    for _ in range(sessions):
        try:
            plan = plan_session(profile, model, lexicon, params, rng.getrandbits(64))
        except EmptyPool:
            return
        style = rng.random()
        if style < 0.3:
            outcomes = [False] * len(plan.items)
        elif style < 0.6:
            outcomes = [True] * len(plan.items)
        else:
            outcomes = [rng.random() < 0.5 for _ in plan.items]
        result = GameResult.from_outcomes(plan.session_index, plan.feature_id, plan.game_type, outcomes, plan.seed)
        after, report = apply_result(profile, model, plan, result, params)
        yield profile, plan, result, after, report
        profile = after
