"""Performance bounds."""

from lib.bounds.pcrlb import BoundTrace, SingularInformationError, los_information, pcrlb_recursion

__all__ = [
    "BoundTrace",
    "SingularInformationError",
    "los_information",
    "pcrlb_recursion",
]
