from .api import ServiceConfig, create_app
from .jobs import (
    Job,
    JobKind,
    JobNotFound,
    JobQueue,
    JobState,
    QueueFull,
    TERMINAL_STATES,
)

__all__ = [
    "ServiceConfig",
    "create_app",
    "Job",
    "JobKind",
    "JobNotFound",
    "JobQueue",
    "JobState",
    "QueueFull",
    "TERMINAL_STATES",
]
