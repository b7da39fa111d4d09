"""Quivers as skew-symmetric integer matrices.

Vertices are 0-based in the Python API.  The JSON and DOT formats, the CLI
and all printed output use 1-based vertex numbers.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

__all__ = [
    "Quiver",
    "Permutation",
    "FrozenVertexError",
    "mutate_quiver",
    "mutate_quiver_literal",
    "apply_permutation",
    "is_mutation_periodic",
    "quivers_equal_up_to",
    "find_isomorphism",
]


class FrozenVertexError(ValueError):
    pass


Permutation = tuple  # image tuple: nu[i] is the image of vertex i


def _freeze(matrix) -> tuple:
    return tuple(tuple(int(v) for v in row) for row in matrix)


@dataclass(frozen=True)
class Quiver:
    """Net arrow multiplicities ``lam[i][j]`` (arrows i -> j) plus frozen vertices."""

    lam: tuple
    frozen: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        lam = _freeze(self.lam)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "frozen", frozenset(int(v) for v in self.frozen))
        n = len(lam)
        for i, row in enumerate(lam):
            if len(row) != n:
                raise ValueError("arrow matrix must be square")
            if row[i] != 0:
                raise ValueError(f"loop at vertex {i + 1}")
            for j in range(i + 1, n):
                if lam[j][i] != -row[j]:
                    raise ValueError(f"matrix not skew-symmetric at ({i + 1},{j + 1})")
        if any(not 0 <= v < n for v in self.frozen):
            raise ValueError("frozen vertex out of range")

    @property
    def n(self) -> int:
        return len(self.lam)

    @classmethod
    def empty(cls, n: int, frozen: Iterable[int] = ()) -> "Quiver":
        return cls(tuple((0,) * n for _ in range(n)), frozenset(frozen))

    @classmethod
    def from_arrows(cls, n: int, arrows: Iterable[tuple[int, int, int]], frozen: Iterable[int] = ()) -> "Quiver":
        """Build from 0-based ``(i, j, mult)`` triples, summing multiplicities."""
        m = [[0] * n for _ in range(n)]
        for i, j, k in arrows:
            if i == j:
                raise ValueError(f"loop at vertex {i + 1}")
            m[i][j] += k
            m[j][i] -= k
        return cls(_freeze(m), frozenset(frozen))

    def arrows(self) -> list[tuple[int, int, int]]:
        """0-based ``(i, j, mult)`` with ``i < j`` and signed net multiplicity."""
        return [(i, j, self.lam[i][j]) for i in range(self.n) for j in range(i + 1, self.n) if self.lam[i][j]]

    def neighbors(self, k: int) -> list[int]:
        return [j for j, v in enumerate(self.lam[k]) if v]

    def with_frozen(self, frozen: Iterable[int]) -> "Quiver":
        return Quiver(self.lam, frozenset(frozen))

    # -- formats ------------------------------------------------------------
    def to_json_obj(self) -> dict:
        return {
            "n": self.n,
            "arrows": [[i + 1, j + 1, m] for i, j, m in self.arrows()],
            "frozen": sorted(v + 1 for v in self.frozen),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Quiver":
        n = int(obj["n"])
        arrows = []
        for i, j, m in obj["arrows"]:
            if not (1 <= i <= n and 1 <= j <= n):
                raise ValueError(f"arrow ({i},{j}) out of range")
            arrows.append((i - 1, j - 1, m))
        return cls.from_arrows(n, arrows, [v - 1 for v in obj.get("frozen", [])])

    @classmethod
    def from_json(cls, text: str) -> "Quiver":
        return cls.from_json_obj(json.loads(text))

    def to_dot(self, names: Sequence[str] | None = None) -> str:
        names = names or [str(i + 1) for i in range(self.n)]
        lines = ["digraph Q {"]
        for i in range(self.n):
            shape = "box" if i in self.frozen else "circle"
            lines.append(f'  v{i + 1} [label="{names[i]}", shape={shape}];')
        for i, j, m in self.arrows():
            a, b = (i, j) if m > 0 else (j, i)
            lines.append(f'  v{a + 1} -> v{b + 1} [label="{abs(m)}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def mutate_quiver(Q: Quiver, k: int) -> Quiver:
    """Matrix mutation at vertex ``k`` (0-based)."""
    n = Q.n
    if not 0 <= k < n:
        raise IndexError(f"vertex {k + 1} out of range 1..{n}")
    if k in Q.frozen:
        raise FrozenVertexError(f"vertex {k + 1} is frozen")
    lam = Q.lam
    col = [lam[i][k] for i in range(n)]
    row = lam[k]
    out = []
    for i in range(n):
        if i == k:
            out.append(tuple(-v for v in row))
            continue
        li = lam[i]
        a = col[i]
        if a == 0:
            new = list(li)
            new[k] = -a
            out.append(tuple(new))
            continue
        new = []
        for j in range(n):
            if j == k:
                new.append(-li[j])
            else:
                b = row[j]
                # i -> k -> j adds a*b, j -> k -> i removes
                new.append(li[j] + (abs(a) * b + a * abs(b)) // 2)
        out.append(tuple(new))
    return Quiver(tuple(out), Q.frozen)


def mutate_quiver_literal(Q: Quiver, k: int) -> Quiver:
    """Mutation as three operations on an explicit arrow multiset.

    Kept as an independent reference for :func:`mutate_quiver`.
    """
    if k in Q.frozen:
        raise FrozenVertexError(f"vertex {k + 1} is frozen")
    n = Q.n
    arrows: dict[tuple[int, int], int] = {}
    for i in range(n):
        for j in range(n):
            if Q.lam[i][j] > 0:
                arrows[(i, j)] = Q.lam[i][j]
    # 1. compose paths through k
    added: dict[tuple[int, int], int] = dict(arrows)
    for (i, kk), a in arrows.items():
        if kk != k:
            continue
        for (kk2, j), b in arrows.items():
            if kk2 == k and j != i:
                added[(i, j)] = added.get((i, j), 0) + a * b
    # 2. remove 2-cycles
    cancelled: dict[tuple[int, int], int] = {}
    for (i, j), a in added.items():
        b = added.get((j, i), 0)
        if a > b:
            cancelled[(i, j)] = a - b
    # 3. reverse arrows at k
    final: dict[tuple[int, int], int] = {}
    for (i, j), a in cancelled.items():
        key = (j, i) if k in (i, j) else (i, j)
        final[key] = final.get(key, 0) + a
    return Quiver.from_arrows(n, [(i, j, a) for (i, j), a in final.items()], Q.frozen)


def _check_perm(nu: Sequence[int], n: int):
    if len(nu) != n:
        raise ValueError(f"permutation of size {len(nu)} applied to quiver of size {n}")
    if sorted(nu) != list(range(n)):
        raise ValueError(f"not a permutation: {tuple(nu)}")


def apply_permutation(Q: Quiver, nu: Sequence[int]) -> Quiver:
    """Relabel vertex ``i`` as ``nu[i]``: ``lam'[nu[i]][nu[j]] = lam[i][j]``."""
    _check_perm(nu, Q.n)
    n = Q.n
    m = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            m[nu[i]][nu[j]] = Q.lam[i][j]
    return Quiver(_freeze(m), frozenset(nu[v] for v in Q.frozen))


def compose(nu: Sequence[int], mu: Sequence[int]) -> tuple:
    """``nu o mu``: first apply ``mu`` then ``nu``."""
    return tuple(nu[mu[i]] for i in range(len(mu)))


def inverse(nu: Sequence[int]) -> tuple:
    out = [0] * len(nu)
    for i, v in enumerate(nu):
        out[v] = i
    return tuple(out)


def perm_from_one_based(images: Sequence[int]) -> tuple:
    """``(2,3,4,1)`` meaning 1->2, 2->3, ... as a 0-based image tuple."""
    nu = tuple(int(v) - 1 for v in images)
    _check_perm(nu, len(nu))
    return nu


def mutate_sequence(Q: Quiver, seq: Iterable[int]) -> Quiver:
    for k in seq:
        Q = mutate_quiver(Q, k)
    return Q


def is_mutation_periodic(Q: Quiver, seq: Sequence[int], nu: Sequence[int]) -> bool:
    """True iff mutating along ``seq`` (in order) gives ``nu(Q)``."""
    return mutate_sequence(Q, seq).lam == apply_permutation(Q, nu).lam


def quivers_equal_up_to(Q1: Quiver, Q2: Quiver, nu: Sequence[int]) -> bool:
    if Q1.n != Q2.n:
        raise ValueError("quivers of different sizes")
    return apply_permutation(Q1, nu).lam == Q2.lam


def find_isomorphism(Q1: Quiver, Q2: Quiver) -> tuple | None:
    """Brute-force backtracking search for ``nu`` with ``nu(Q1) == Q2`` (small n only)."""
    n = Q1.n
    if Q2.n != n:
        return None
    if n > 10:
        raise ValueError("isomorphism search limited to 10 vertices")

    def profile(Q, i):
        return tuple(sorted(Q.lam[i]))

    p1 = [profile(Q1, i) for i in range(n)]
    p2 = [profile(Q2, i) for i in range(n)]
    if sorted(p1) != sorted(p2):
        return None
    image = [-1] * n
    used = [False] * n

    def extend(i):
        if i == n:
            return True
        for c in range(n):
            if used[c] or p1[i] != p2[c]:
                continue
            if any(Q1.lam[i][j] != Q2.lam[c][image[j]] for j in range(i)):
                continue
            image[i], used[c] = c, True
            if extend(i + 1):
                return True
            used[c] = False
        image[i] = -1
        return False

    return tuple(image) if extend(0) else None


def random_quiver(rng, n: int, max_mult: int = 2, density: float = 0.6) -> Quiver:
    m = [[0] * n for _ in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < density:
            v = rng.randint(-max_mult, max_mult)
            m[i][j], m[j][i] = v, -v
    return Quiver(_freeze(m))
