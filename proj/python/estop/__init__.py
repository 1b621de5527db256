"""Preset emergency-stop deceleration planner.

Thin wrapper around the C++ core. The extension module lives inside the
package when installed as a wheel, or on PYTHONPATH when used from a plain
CMake build tree.
"""

try:
    from ._estop import *  # noqa: F401,F403
    from ._estop import __doc__ as _core_doc
except ImportError:  # build-tree layout
    from _estop import *  # noqa: F401,F403
    from _estop import __doc__ as _core_doc

__all__ = [
    "PenaltyField",
    "PlanParams",
    "PlanResult",
    "CandidateEvaluation",
    "generate_brownian",
    "read_field_csv",
    "write_field_csv",
    "candidate_set",
    "plan",
    "plan_direct",
    "expected_penalty",
]
