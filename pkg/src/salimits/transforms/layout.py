"""Named variable blocks of an ambient space."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb


@dataclass(frozen=True)
class Block:
    name: str
    start: int
    size: int

    @property
    def indices(self) -> range:
        return range(self.start, self.start + self.size)


class VariableLayout:
    def __init__(self):
        self.blocks: list[Block] = []
        self.names: list[str] = []

    @property
    def total(self) -> int:
        return len(self.names)

    def add(self, name: str, size: int, labels=None) -> Block:
        if any(b.name == name for b in self.blocks):
            raise ValueError(f"duplicate block {name!r}")
        b = Block(name, self.total, size)
        self.blocks.append(b)
        labels = list(labels) if labels is not None else [f"{name}{i + 1}" for i in range(size)]
        if len(labels) != size:
            raise ValueError("label count differs from block size")
        self.names.extend(labels)
        return b

    def __getitem__(self, name: str) -> Block:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(b.name == name for b in self.blocks)

    def check(self, declared: int) -> None:
        if sum(b.size for b in self.blocks) != declared:
            raise AssertionError(f"blocks sum to {self.total}, declared {declared}")

    def to_json(self) -> dict:
        return {"total": self.total, "blocks": [[b.name, b.start, b.size] for b in self.blocks]}


def pair_list(p: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(p + 1) for j in range(i + 1, p + 1)]


def join_layout(p: int, k: int, base_names=None) -> VariableLayout:
    """X^0..X^p (k each), T (p+1), A (one per pair i<j)."""
    base = list(base_names) if base_names else [f"x{l + 1}" for l in range(k)]
    lay = VariableLayout()
    for i in range(p + 1):
        lay.add(f"X{i}", k, [f"{n}_{i}" for n in base])
    lay.add("T", p + 1, [f"t{i}" for i in range(p + 1)])
    lay.add("A", comb(p + 1, 2), [f"a{i}_{j}" for i, j in pair_list(p)])
    lay.check((p + 1) * (k + 1) + comb(p + 1, 2))
    return lay
