from .pooling import JudgmentTask, PooledResult, pool_results
from .service import (
    AuthError,
    Judgment,
    JudgmentError,
    LeaseError,
    StudyService,
    VerdictError,
)

__all__ = [
    "AuthError",
    "Judgment",
    "JudgmentError",
    "JudgmentTask",
    "LeaseError",
    "PooledResult",
    "StudyService",
    "VerdictError",
    "pool_results",
]
