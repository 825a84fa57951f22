"""Star addition chains: the skeleton of a sequential fusion plan.

Each term after the first is the previous term plus some earlier term
(possibly itself).  In a plan, the previous term is the primate being grown
and the other parent is a fresh copy of an earlier primate.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

MAX_TARGET = 64


@dataclass(frozen=True, order=True)
class AdditionChain:
    terms: tuple[int, ...]
    parents: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not self.terms or self.terms[0] != 1:
            raise ValueError("a chain starts at 1")
        if len(self.parents) != len(self.terms) - 1:
            raise ValueError("one parent pair per non-initial term")
        for k, (i, j) in enumerate(self.parents, start=1):
            if not (0 <= i < k and 0 <= j < k):
                raise ValueError(f"parents of term {k} must precede it")
            if self.terms[i] + self.terms[j] != self.terms[k]:
                raise ValueError(f"term {self.terms[k]} is not {self.terms[i]} + {self.terms[j]}")
            if self.terms[k] <= self.terms[k - 1]:
                raise ValueError("terms must strictly increase")

    @property
    def target(self) -> int:
        return self.terms[-1]

    @property
    def steps(self) -> int:
        return len(self.parents)

    def is_star(self) -> bool:
        return all(k - 1 in pair for k, pair in enumerate(self.parents, start=1))

    def operand(self, step: int) -> int:
        """Index of the earlier term fused onto the running primate at ``step`` (0-based)."""
        i, j = self.parents[step]
        return j if i == step else i

    @classmethod
    def star(cls, terms) -> AdditionChain:
        """Build the star chain with the given terms."""
        terms = tuple(terms)
        parents = []
        for k in range(1, len(terms)):
            diff = terms[k] - terms[k - 1]
            if diff not in terms[:k]:
                raise ValueError(f"{terms} is not a star chain")
            parents.append((k - 1, terms.index(diff)))
        return cls(terms, tuple(parents))

    def to_json(self) -> dict:
        return {"terms": list(self.terms), "parents": [list(p) for p in self.parents]}

    @classmethod
    def from_json(cls, data: dict) -> AdditionChain:
        return cls(tuple(data["terms"]), tuple(tuple(p) for p in data["parents"]))


def _check_target(n: int) -> None:
    if n < 1:
        raise ValueError("chain target must be >= 1")
    if n > MAX_TARGET:
        raise ValueError(f"chain target capped at {MAX_TARGET}")


def _star_terms(n: int, max_len: int):
    out = []

    def grow(terms):
        if terms[-1] == n:
            out.append(tuple(terms))
            return
        if len(terms) >= max_len:
            return
        last = terms[-1]
        # fewest remaining doublings needed to reach n
        remaining = max_len - len(terms)
        if last << remaining < n:
            return
        for earlier in sorted(set(terms), reverse=True):
            nxt = last + earlier
            if nxt <= n:
                grow(terms + [nxt])

    grow([1])
    return out


@lru_cache(maxsize=None)
def minimal_length(n: int) -> int:
    """Number of terms in the shortest star chain ending at ``n``."""
    _check_target(n)
    length = 1
    while not _star_terms(n, length):
        length += 1
    return length


def enumerate_star_chains(n: int, max_len: int | None = None) -> list[AdditionChain]:
    """All star chains for ``n`` with at most ``max_len`` terms, sorted by (length, terms)."""
    _check_target(n)
    if max_len is None:
        max_len = minimal_length(n) + 2
    chains = {AdditionChain.star(terms) for terms in _star_terms(n, max_len)}
    return sorted(chains, key=lambda c: (len(c.terms), c.terms))
