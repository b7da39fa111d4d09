"""Periodic lattice quivers, finite windows and (a,b,c)-reductions.

A cluster variable is named by a *label* ``(letter, coords)``, e.g.
``("x", (n, m))`` for x_n^m or ``("x", (n, m, l))`` for x_{n,l}^m.  An
infinite quiver lives on a set of labels (the initial Cauchy surface)
described by a motif of labels repeated along period vectors, with a
translation-invariant arrow stencil.

Quivers can be derived from exchange relations: if every vertex is mutated
at some point, its row at that moment is fixed by the relation it has to
realize, and undoing the earlier mutations recovers the initial row.  See
:func:`derive_rows`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from itertools import product
from typing import Callable, Iterable, Sequence

from .quiver import Quiver

Label = tuple  # (letter, coords tuple)

__all__ = [
    "Label",
    "ExchangeRule",
    "RULES",
    "LatticeSpec",
    "LatticeError",
    "build_lattice_quiver",
    "reduce",
    "label_schedule",
    "derive_rows",
    "derive_stencil",
    "load_spec",
]


class LatticeError(ValueError):
    pass


def lab(letter: str, *coords: int) -> Label:
    return (letter, tuple(coords))


def shift(label: Label, delta: Sequence[int], letter: str | None = None) -> Label:
    return (letter or label[0], tuple(a + b for a, b in zip(label[1], delta)))


def label_str(label: Label) -> str:
    letter, c = label
    if len(c) == 1:
        return f"{letter}_{c[0]}"
    if len(c) == 2:
        return f"{letter}_{c[0]}^{c[1]}"
    return f"{letter}_{{{c[0]},{c[2]}}}^{c[1]}"


# ---------------------------------------------------------------------------
# exchange rules


@dataclass(frozen=True)
class ExchangeRule:
    """Relabeling and exchange relation for one family of models.

    ``step(label)`` names the variable produced by mutating at ``label``;
    ``template(label)`` returns ``(out, in_)``: the monomials (label -> power)
    that multiply 1 and y_k respectively in the exchange relation, or None
    when the rule prescribes no relation.
    """

    name: str
    step: Callable[[Label], Label]
    template: Callable[[Label], tuple[dict, dict]]


def _mono(*pairs) -> dict:
    out: dict = {}
    for p in pairs:
        out[p] = out.get(p, 0) + 1
    return out


def _hm_step(L):
    return shift(L, (1, 1, -1))


def _hm_template(L):
    x, (n, m, l) = L
    return (_mono(lab(x, n, m + 1, l), lab(x, n + 1, m, l - 1)),
            _mono(lab(x, n, m + 1, l - 1), lab(x, n + 1, m, l)))


def _kdv_step(L):
    return shift(L, (2, 1))


def _kdv_template(L):
    x, (n, m) = L
    return (_mono(lab(x, n, m + 1), lab(x, n + 2, m)),
            _mono(lab(x, n + 1, m + 1), lab(x, n + 1, m)))


_SWAP = {"w": "x", "x": "w"}


def _mkdv_step(L):
    return shift(L, (1, 1), _SWAP[L[0]])


def _mkdv_template(L):
    s, (n, m) = L
    t = _SWAP[s]
    return (_mono(lab(s, n, m + 1), lab(t, n + 1, m)),
            _mono(lab(t, n, m + 1), lab(s, n + 1, m)))


def _toda_step(L):
    return shift(L, (2, 0))


def _toda_template(L):
    x, (n, m) = L
    return (_mono(lab(x, n, m + 1), lab(x, n + 2, m - 1)),
            _mono(lab(x, n + 1, m), lab(x, n + 1, m)))


def _pi_template(L):
    x, (n,) = L
    return _mono(lab(x, n + 2), lab(x, n + 2)), _mono(lab(x, n + 1), lab(x, n + 3))


def _pii_template(L):
    x, (n,) = L
    return _mono(lab(x, n + 2), lab(x, n + 3)), _mono(lab(x, n + 1), lab(x, n + 4))


def _piii_step(L):
    return (_SWAP[L[0]], (L[1][0] + 3,))


def _piii_template(L):
    s, (n,) = L
    t = _SWAP[s]
    return _mono(lab(t, n + 1), lab(s, n + 2)), _mono(lab(s, n + 1), lab(t, n + 2))


# w -> X, x -> W, W -> x, X -> w ; partners in the out-monomial
_PVI_NEXT = {"w": "X", "x": "W", "W": "x", "X": "w"}
_PVI_OUT = {"w": ("x", "W"), "x": ("w", "X"), "W": ("w", "X"), "X": ("x", "W")}


def _pvi_step(L):
    return (_PVI_NEXT[L[0]], (L[1][0] + 2,))


def _pvi_template(L):
    s, (n,) = L
    a, b = _PVI_OUT[s]
    rest = [c for c in "wxWX" if c not in (a, b)]
    return _mono(lab(a, n + 1), lab(b, n + 1)), _mono(lab(rest[0], n + 1), lab(rest[1], n + 1))


RULES: dict[str, ExchangeRule] = {
    "HM": ExchangeRule("HM", _hm_step, _hm_template),
    "dKdV": ExchangeRule("dKdV", _kdv_step, _kdv_template),
    "dmKdV": ExchangeRule("dmKdV", _mkdv_step, _mkdv_template),
    "dToda": ExchangeRule("dToda", _toda_step, _toda_template),
    "qPI": ExchangeRule("qPI", lambda L: shift(L, (4,)), _pi_template),
    "qPII": ExchangeRule("qPII", lambda L: shift(L, (5,)), _pii_template),
    "qPIII": ExchangeRule("qPIII", _piii_step, _piii_template),
    "qPVI": ExchangeRule("qPVI", _pvi_step, _pvi_template),
    # arbitrary quivers: no prescribed exchange relation
    "generic": ExchangeRule("generic", lambda L: (L[0], (L[1][0], L[1][1] + 1)), lambda L: None),
}


# ---------------------------------------------------------------------------
# label dynamics and quiver derivation


def label_schedule(labels: Sequence[Label], rule: ExchangeRule, steps: int,
                   frozen: Iterable[int] = ()) -> list[list[int]]:
    """Batches obtained by repeatedly mutating every vertex whose exchange
    partners are all present.  Stops early when nothing is mutable."""
    labels = list(labels)
    frozen = set(frozen)
    batches = []
    for _ in range(steps):
        held = set(labels)
        batch = []
        for v, L in enumerate(labels):
            if v in frozen:
                continue
            out, in_ = rule.template(L)
            if all(p in held for p in out) and all(p in held for p in in_):
                batch.append(v)
        if not batch:
            break
        batches.append(batch)
        for v in batch:
            labels[v] = rule.step(labels[v])
    return batches


def _template_row(L, rule, where: dict) -> dict:
    out, in_ = rule.template(L)
    row: dict = {}
    for p, e in out.items():
        row[where[p]] = row.get(where[p], 0) + e
    for p, e in in_.items():
        row[where[p]] = row.get(where[p], 0) - e
    return {k: v for k, v in row.items() if v}


def derive_rows(labels: Sequence[Label], rule: ExchangeRule, steps: int,
                frozen: Iterable[int] = ()) -> tuple[dict[int, dict], list[list[int]]]:
    """Initial quiver rows forced by the exchange relations.

    Returns ``(rows, batches)`` where ``rows[u]`` maps neighbours to
    multiplicities for every vertex mutated within ``steps`` batches.
    Rows are only trustworthy for vertices whose past light-cone stays in
    the given label set.
    """
    labels = list(labels)
    batches = label_schedule(labels, rule, steps, frozen)
    # template rows at mutation time, per batch
    snapshots: list[dict[int, dict]] = []
    cur = list(labels)
    first: dict[int, int] = {}
    for t, batch in enumerate(batches):
        where = {L: v for v, L in enumerate(cur)}
        snap = {}
        for k in batch:
            snap[k] = _template_row(cur[k], rule, where)
            first.setdefault(k, t)
        snapshots.append(snap)
        for k in batch:
            cur[k] = rule.step(cur[k])
    rows: dict[int, dict] = {}
    for u, tu in first.items():
        row = dict(snapshots[tu][u])
        for t in range(tu - 1, -1, -1):
            # undo the batch at time t: mutate row u of lambda^(t+1) at each k
            for k, tmpl in snapshots[t].items():
                rk = {j: -v for j, v in tmpl.items()}  # row k at time t+1
                a = row.get(k, 0)
                if a:
                    for j, b in rk.items():
                        if j == u:
                            continue
                        d = (abs(a) * b + a * abs(b)) // 2
                        if d:
                            row[j] = row.get(j, 0) + d
                            if row[j] == 0:
                                del row[j]
                    row[k] = -a
        rows[u] = {k: v for k, v in row.items() if v}
    return rows, batches


def rows_to_quiver(n: int, rows: dict[int, dict], frozen: Iterable[int] = ()) -> tuple[Quiver, list]:
    """Assemble a quiver from derived rows; report skew-symmetry conflicts."""
    m = [[0] * n for _ in range(n)]
    conflicts = []
    for u, row in rows.items():
        for v, val in row.items():
            if v in rows and rows[v].get(u, 0) != -val:
                conflicts.append((u, v, val, rows[v].get(u, 0)))
            m[u][v] = val
            m[v][u] = -val
    for u in rows:
        for v in rows:
            if u != v and rows[u].get(v, 0) == 0 and rows[v].get(u, 0) != 0:
                conflicts.append((u, v, 0, rows[v][u]))
    return Quiver(tuple(tuple(r) for r in m), frozenset(frozen)), conflicts


# ---------------------------------------------------------------------------
# periodic lattice specs


def _solve_int(periods: Sequence[Sequence[int]], delta: Sequence[int]) -> tuple | None:
    """Integer k with sum k_j periods[j] == delta, or None."""
    r = len(periods)
    if r == 0:
        return () if all(d == 0 for d in delta) else None
    dim = len(delta)
    # Gaussian elimination over Q on the dim x r system
    A = [[Fraction(periods[j][i]) for j in range(r)] + [Fraction(delta[i])] for i in range(dim)]
    row = 0
    pivots = []
    for col in range(r):
        piv = next((i for i in range(row, dim) if A[i][col] != 0), None)
        if piv is None:
            continue
        A[row], A[piv] = A[piv], A[row]
        pv = A[row][col]
        A[row] = [x / pv for x in A[row]]
        for i in range(dim):
            if i != row and A[i][col] != 0:
                f = A[i][col]
                A[i] = [x - f * y for x, y in zip(A[i], A[row])]
        pivots.append(col)
        row += 1
    if len(pivots) < r:
        raise LatticeError("period vectors are linearly dependent")
    if any(A[i][r] != 0 for i in range(row, dim)):
        return None
    k = [Fraction(0)] * r
    for i, col in enumerate(pivots):
        k[col] = A[i][r]
    if any(x.denominator != 1 for x in k):
        return None
    return tuple(int(x) for x in k)


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (abs(a), (1 if a >= 0 else -1), 0)
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


@dataclass(frozen=True)
class LatticeSpec:
    """Translation-invariant quiver on ``motif + Z-span(periods)``.

    ``stencil`` holds ``(i, j, dk, mult)``: an arrow of net multiplicity
    ``mult`` from motif site ``i`` translated by ``k`` to motif site ``j``
    translated by ``k + dk`` (``dk`` in period coordinates).
    """

    name: str
    rule: str
    motif: tuple
    periods: tuple
    stencil: tuple
    meta: dict = field(default_factory=dict, compare=False, hash=False)
    quotient: tuple = ()

    def __post_init__(self):
        motif = tuple((L[0], tuple(L[1])) for L in self.motif)
        periods = tuple(tuple(p) for p in self.periods)
        stencil = tuple((int(i), int(j), tuple(dk), int(m)) for i, j, dk, m in self.stencil if m)
        object.__setattr__(self, "motif", motif)
        object.__setattr__(self, "periods", periods)
        object.__setattr__(self, "stencil", stencil)
        object.__setattr__(self, "quotient", tuple(tuple(v) for v in self.quotient))
        if len(set(motif)) != len(motif):
            raise LatticeError("duplicate motif labels")
        table: dict = {}
        for i, j, dk, m in stencil:
            if i == j and not any(dk):
                raise LatticeError("stencil contains a loop")
            key = (i, j, dk)
            table[key] = table.get(key, 0) + m
        for (i, j, dk), m in table.items():
            back = table.get((j, i, tuple(-x for x in dk)), 0)
            if back != -m:
                raise LatticeError(f"stencil not skew-symmetric at motif ({i},{j}) offset {dk}")
        object.__setattr__(self, "_table", table)
        by_src: dict = {}
        for (i, j, dk), m in table.items():
            if m:
                by_src.setdefault(i, []).append((j, dk, m))
        object.__setattr__(self, "_by_src", by_src)

    @property
    def dimension(self) -> int:
        return len(self.motif[0][1]) if self.motif else 0

    @property
    def rank(self) -> int:
        return len(self.periods)

    def site(self, i: int, k: Sequence[int]) -> Label:
        letter, c = self.motif[i]
        coords = list(c)
        for kj, p in zip(k, self.periods):
            for a in range(len(coords)):
                coords[a] += kj * p[a]
        return (letter, tuple(coords))

    def locate(self, label: Label) -> tuple[int, tuple]:
        """``(motif index, k)`` of a label on the surface."""
        letter, c = label
        gens = self.periods + self.quotient
        for i, (ml, mc) in enumerate(self.motif):
            if ml != letter:
                continue
            k = _solve_int(gens, [a - b for a, b in zip(c, mc)])
            if k is not None:
                return i, k[:self.rank]
        raise LatticeError(f"label {label_str(label)} is not on the surface of {self.name}")

    def arrow(self, s: Label, t: Label) -> int:
        i, ks = self.locate(s)
        j, kt = self.locate(t)
        dk = tuple(b - a for a, b in zip(ks, kt))
        return self._table.get((i, j, dk), 0)

    def arrows_from(self, s: Label) -> list[tuple[Label, int]]:
        i, k = self.locate(s)
        return [(self.site(j, tuple(a + b for a, b in zip(k, dk))), m) for j, dk, m in self._by_src.get(i, [])]

    def window_sites(self, window: Sequence[int]) -> list[Label]:
        """Sites with period coordinates ``0 <= k_j < window[j]``."""
        if self.rank == 0:
            return list(self.motif)
        if len(window) != self.rank:
            raise LatticeError(f"{self.name} needs a window with {self.rank} extent(s), got {tuple(window)}")
        if any(w < 1 for w in window):
            raise LatticeError("window must be nonempty")
        sites = []
        for k in product(*(range(w) for w in window)):
            for i in range(len(self.motif)):
                sites.append(self.site(i, k))
        return sites

    def finite_quiver(self) -> Quiver:
        """The quiver of a rank-0 spec, vertices in motif order."""
        if self.rank:
            raise LatticeError(f"{self.name} is infinite (rank {self.rank})")
        n = len(self.motif)
        return Quiver.from_arrows(n, [(i, j, m) for (i, j, dk), m in self._table.items() if i < j])

    # -- serialization ------------------------------------------------------
    def to_json_obj(self) -> dict:
        return {
            "name": self.name,
            "rule": self.rule,
            "motif": [[L[0], list(L[1])] for L in self.motif],
            "periods": [list(p) for p in self.periods],
            "stencil": [[i, j, list(dk), m] for (i, j, dk), m in sorted(self._table.items()) if m],
            "meta": self.meta,
            "quotient": [list(v) for v in self.quotient],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "LatticeSpec":
        return cls(obj["name"], obj["rule"], tuple((a, tuple(b)) for a, b in obj["motif"]),
                   tuple(tuple(p) for p in obj["periods"]),
                   tuple((i, j, tuple(dk), m) for i, j, dk, m in obj["stencil"]), obj.get("meta", {}),
                   tuple(tuple(v) for v in obj.get("quotient", [])))


def load_spec(name: str) -> LatticeSpec:
    """Load a shipped stencil file from the package data directory."""
    text = resources.files("qcluster").joinpath("data", f"{name}.json").read_text()
    return LatticeSpec.from_json_obj(json.loads(text))


def build_lattice_quiver(spec: LatticeSpec, window: Sequence[int] = (),
                         sites: Sequence[Label] | None = None) -> tuple[Quiver, list[Label]]:
    """Restrict the infinite quiver to a window (or an explicit site list).

    Vertices with a stencil neighbour outside the window are frozen.
    Returns the quiver and the vertex -> label list.
    """
    sites = list(sites) if sites is not None else spec.window_sites(window)
    if not sites:
        raise LatticeError("window is empty")
    index = {L: v for v, L in enumerate(sites)}
    if len(index) != len(sites):
        raise LatticeError("window lists a site twice")
    n = len(sites)
    m = [[0] * n for _ in range(n)]
    frozen = set()
    for u, s in enumerate(sites):
        for t, mult in spec.arrows_from(s):
            v = index.get(t)
            if v is None:
                frozen.add(u)
            else:
                m[u][v] = mult
    try:
        Q = Quiver(tuple(tuple(r) for r in m), frozenset(frozen))
    except ValueError as exc:
        raise LatticeError(f"stencil of {spec.name} is not skew-symmetric: {exc}") from exc
    return Q, sites


def reduce(spec: LatticeSpec, v: Sequence[int], name: str | None = None) -> LatticeSpec:
    """Quotient by the translation ``v``: drop arrows between distinct
    translates, superimpose translated vertices, sum net multiplicities.

    The result's motif labels are representatives in the parent's labels.
    """
    v = tuple(v)
    if not any(v):
        raise LatticeError("reduction vector must be nonzero")
    c = _solve_int(spec.periods, v) if spec.rank else None
    if c is None:
        raise LatticeError(f"{v} is not a translation symmetry of {spec.name}")
    r = spec.rank
    g = 0
    for x in c:
        g = math.gcd(g, x)
    u = tuple(x // g for x in c)
    # unimodular basis (u, w...) of Z^r
    if r == 1:
        basis_rest: list[tuple] = []
    elif r == 2:
        gg, x, y = _ext_gcd(u[0], u[1])
        assert gg == 1
        basis_rest = [(-y, x)]
    else:
        raise LatticeError("reduction implemented for rank <= 2")

    def vec(kcoords):
        return tuple(sum(kc * p[a] for kc, p in zip(kcoords, spec.periods)) for a in range(spec.dimension))

    def to_new(k):
        # k = a*u + b*w
        if r == 1:
            return (Fraction(k[0], u[0]),), ()
        det = u[0] * basis_rest[0][1] - u[1] * basis_rest[0][0]
        a = Fraction(k[0] * basis_rest[0][1] - k[1] * basis_rest[0][0], det)
        b = Fraction(u[0] * k[1] - u[1] * k[0], det)
        return (a,), (b,)

    motif = []
    new_index = {}
    for t in range(g):
        for i in range(len(spec.motif)):
            kk = tuple(t * x for x in u)
            motif.append(spec.site(i, kk))
            new_index[(i, t)] = len(motif) - 1
    new_periods = [vec(w) for w in basis_rest]

    def classify(i, k):
        (a,), b = to_new(k)
        a = int(a)
        return new_index[(i, a % g)], tuple(int(x) for x in b)

    table: dict = {}
    for (i, t), src in new_index.items():
        k0 = tuple(t * x for x in u)
        for j, dk, mult in spec._by_src.get(i, []):
            k1 = tuple(a + b for a, b in zip(k0, dk))
            dst, bk = classify(j, k1)
            key = (src, dst, bk)
            if src == dst and not any(bk):
                raise LatticeError(f"reduction by {v} produces a loop")
            table[key] = table.get(key, 0) + mult
    stencil = tuple((i, j, dk, m) for (i, j, dk), m in table.items() if m)
    return LatticeSpec(name or f"{spec.name}/{v}", spec.rule, tuple(motif), tuple(new_periods), stencil,
                       {"parent": spec.name, "vector": list(v)}, spec.quotient + (v,))


def match_reduction(child: LatticeSpec, reduced: LatticeSpec, to_parent: Callable[[Label], Label]) -> list[str]:
    """Compare a child lattice with a reduced parent through a label map.

    ``to_parent`` sends each child label to a parent label.  Returns a list of
    mismatch descriptions (empty when the two quivers agree).
    """
    problems = []
    if len(child.motif) != len(reduced.motif):
        return [f"motif sizes differ: {len(child.motif)} vs {len(reduced.motif)}"]
    hit = set()
    for s in child.motif:
        i, k0 = reduced.locate(to_parent(s))
        hit.add(i)

        def key(t):
            j, k = reduced.locate(t)
            return j, tuple(a - b for a, b in zip(k, k0))

        mine: dict = {}
        for t, m in child.arrows_from(s):
            kk = key(to_parent(t))
            mine[kk] = mine.get(kk, 0) + m
        theirs: dict = {}
        for t, m in reduced.arrows_from(to_parent(s)):
            kk = key(t)
            theirs[kk] = theirs.get(kk, 0) + m
        mine = {a: b for a, b in mine.items() if b}
        theirs = {a: b for a, b in theirs.items() if b}
        if mine != theirs:
            problems.append(f"arrows at {label_str(s)} differ: {sorted(mine.items())} vs {sorted(theirs.items())}")
    if len(hit) != len(reduced.motif):
        problems.append("label map is not a bijection on vertex classes")
    return problems


def derive_stencil(name: str, rule_name: str, motif: Sequence[Label], periods: Sequence[Sequence[int]],
                   margin: int = 6, steps: int | None = None) -> LatticeSpec:
    """Derive the translation-invariant stencil of a lattice model from its
    exchange relation, by back-propagating on a large window and reading off
    the rows of central sites."""
    rule = RULES[rule_name]
    proto = LatticeSpec(name, rule_name, tuple(motif), tuple(tuple(p) for p in periods), ())
    r = proto.rank
    w = 2 * margin + 1
    sites = proto.window_sites([w] * r)
    index = {L: v for v, L in enumerate(sites)}
    rows, batches = derive_rows(sites, rule, steps or 3 * len(motif) + 2)
    centre = tuple([margin] * r)
    stencil = []
    for i in range(len(motif)):
        u = index[proto.site(i, centre)]
        if u not in rows:
            raise LatticeError(f"motif site {i} of {name} is never mutated")
        for v, m in rows[u].items():
            j, k = proto.locate(sites[v])
            stencil.append((i, j, tuple(a - b for a, b in zip(k, centre)), m))
    return LatticeSpec(name, rule_name, tuple(motif), tuple(tuple(p) for p in periods), tuple(stencil),
                       {"derived_from": rule_name})


# ---------------------------------------------------------------------------
# initial surfaces of the lattice families


def hm_surface(N: int):
    """Staircase surface of the Hirota-Miwa lattice with N+1 batch labels.

    Motif ``x_{a,0}^0`` for ``a = 0..N``; coordinates are ``(n, m, l)``.
    """
    if N < 1:
        raise LatticeError("HM needs N >= 1")
    motif = tuple(lab("x", a, 0, 0) for a in range(N + 1))
    return motif, ((N, -1, 1), (N - 1, 0, 1))


def hm_site(N: int, a: int, b: int) -> Label:
    """Surface site over class coordinates ``a = n - m``, ``b = l + m``."""
    T = -((a + (1 - N) * b) // (N + 1))
    return lab("x", a + T, T, b - T)


def dkdv_surface(N: int, M: int):
    if M < 1 or N < M:
        raise LatticeError("dKdV(N,M) needs 1 <= M <= N")
    P = N + 2 * M
    motif = []
    for j in range(P):
        T = -((M * j) // P)
        motif.append(lab("x", j + 2 * T, T))
    return tuple(motif), ((N, -M),)


def dmkdv_surface(N: int, M: int):
    if M < 1 or N < M:
        raise LatticeError("dmKdV(N,M) needs 1 <= M <= N")
    P = N + M
    motif = []
    for a in range(P):
        T = -((M * a) // P)
        motif += [lab("w", a + T, T), lab("x", a + T, T)]
    return tuple(motif), ((N, -M),)


def dtoda_surface():
    return (lab("x", 0, 0), lab("x", 1, 0)), ((-1, 1),)


SURFACES = {"HM": hm_surface, "dKdV": dkdv_surface, "dmKdV": dmkdv_surface, "dToda": dtoda_surface}


def batch_phases(spec: LatticeSpec, margin: int = 10) -> tuple[tuple, int]:
    """Mutation phases of every motif class and the common cycle length ``L``.

    In the infinite dynamics a site of class ``i`` is mutated exactly at the
    times congruent mod ``L`` to an element of ``phases[i]``.  Read off a
    large window and checked for consistency.
    """
    rule = RULES[spec.rule]
    if spec.rank == 0:
        raise LatticeError("phases are defined for infinite lattices")
    w = 2 * margin + 1
    sites = spec.window_sites([w] * spec.rank)
    index = {L: v for v, L in enumerate(sites)}
    batches = label_schedule(sites, rule, 6 * len(spec.motif) + 8)
    centre = tuple([margin] * spec.rank)
    times = []
    for i in range(len(spec.motif)):
        u = index[spec.site(i, centre)]
        times.append({t for t, b in enumerate(batches) if u in b})
    end = min(max(ts, default=-1) for ts in times)
    for L in range(1, end + 1):
        phases = [sorted(t for t in ts if t < L) for ts in times]
        # every class must be seen again one cycle later
        if all(ph and ph[0] + L in ts for ph, ts in zip(phases, times)) and all(
                (t in ts) == (t % L in ph) for ts, ph in zip(times, phases) for t in range(end + 1)):
            return tuple(tuple(ph) for ph in phases), L
    raise LatticeError(f"{spec.name}: mutation times are not periodic within the probe window")
