"""HTTP service and the operations it shares with the command line."""

from .ops import run_certify, run_check, run_oracle

__all__ = ["run_certify", "run_check", "run_oracle"]
