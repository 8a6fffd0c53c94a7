"""Logical memory accounting.

Sizes are modelled, not measured, so that peak figures are comparable across
runs and hosts: a tree node costs ``NODE_BYTES`` plus a pointer per child
and an id per stored object, postings and candidate lists cost an id per
entry.
"""

NODE_BYTES = 48
POINTER_BYTES = 8
OID_BYTES = 4
LIST_HEADER_BYTES = 16


class MemoryGauge:
    """Running level of logical bytes with its high-water mark."""

    __slots__ = ("level", "peak")

    def __init__(self) -> None:
        self.level = 0
        self.peak = 0

    def add(self, nbytes: int) -> None:
        self.level += nbytes
        if self.level > self.peak:
            self.peak = self.level

    def sub(self, nbytes: int) -> None:
        self.level -= nbytes

    def __repr__(self) -> str:
        return f"MemoryGauge(level={self.level}, peak={self.peak})"


def list_bytes(n: int) -> int:
    return LIST_HEADER_BYTES + OID_BYTES * n
