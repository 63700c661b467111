"""Adaptive sequencing of language features for learning games.

A prerequisite graph of language features is instantiated per student,
sessions are planned by a fixed rule pipeline, and mastery is re-evaluated
after every game with a clamped exponential moving average.
"""

from .graph import Feature, FeatureKind, LanguageModel, depth, parse_model, serialize_model, topological_order, validate
from .lexicon import ContentItem, Lexicon, parse_lexicon
from .mastery import TransitionReport, apply_demotion, reevaluate, update_mastery, update_streak
from .params import MasteryParams
from .profile import FeatureState, GameResult, GameType, Status, StudentProfile, init_profile, record_session, recompute_status
from .selector import SessionPlan, apply_result, candidate_pool, choose_game_type, plan_session, prioritize, select_content

__version__ = "0.1.0"
