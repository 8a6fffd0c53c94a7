"""In-memory set containment joins over prefix trees and inverted indexes."""

from setjoin.core import build_dictionary, prepare, sort_objects
from setjoin.join import JoinConfig, JoinOutput, set_containment_join, verify
from setjoin.oracle import brute_force_join

__all__ = [
    "JoinConfig",
    "JoinOutput",
    "brute_force_join",
    "build_dictionary",
    "prepare",
    "set_containment_join",
    "sort_objects",
    "verify",
]
__version__ = "0.1.0"
