"""Zero-shot visual question answering with captions and synthetic exemplars."""

from ._core import (
    ArgumentError,
    BackendError,
    BudgetError,
    DataError,
    Error,
    IoError,
    MalformedResponseError,
    ModeError,
    NetworkError,
    NumericError,
    RunConfig,
    ShapeError,
    StageError,
    answer,
    answer_hit_rate,
    answer_noise_rate,
    assemble_prompt,
    dedup,
    evaluate_desk,
    normalize_answer,
    patch_relevance,
    sample_patches,
    softmax_rows,
    token_count,
    vqa_score,
)

__all__ = [name for name in dir() if not name.startswith("_")]
