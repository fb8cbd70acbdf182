"""Chunked diffusion rollout laboratory: drift, correction, and test-time studies.

The heavy lifting lives in the C++ extension `_ttclab`; this package re-exports
its public surface.
"""

from ._ttclab import (
    Scenario,
    drift_report,
    oracle_suite,
    preset_names,
    rollout,
    run,
    wilcoxon_signed_rank,
)

__all__ = [
    "Scenario",
    "drift_report",
    "oracle_suite",
    "preset_names",
    "rollout",
    "run",
    "wilcoxon_signed_rank",
]
