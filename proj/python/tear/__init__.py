"""Python access to the tear core library."""

from ._tear import (
    TearError,
    corpus_bleu,
    estimate_prompt,
    kendall_tau,
    load_testset,
    mqm_score,
    pairwise_accuracy,
    parse_estimation,
    refine_prompt,
    render_report,
    run_replay,
    serialize_feedback,
    tokenize_13a,
    translate_prompt,
    win_tie_loss,
)

__all__ = [
    "TearError",
    "corpus_bleu",
    "estimate_prompt",
    "kendall_tau",
    "load_testset",
    "mqm_score",
    "pairwise_accuracy",
    "parse_estimation",
    "refine_prompt",
    "render_report",
    "run_replay",
    "serialize_feedback",
    "tokenize_13a",
    "translate_prompt",
    "win_tie_loss",
]
