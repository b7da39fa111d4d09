"""Model catalog: quiver + schedule + labeling for each lattice and q-Painleve model.

Lattice models (dKdV, HM, dmKdV, dToda) run on finite windows of their
infinite quivers with frozen boundaries.  The q-Painleve models are finite
mutation-periodic quivers.  Coefficient formulas for the Painleve models
(conserved quantities, proof monitors, Painleve right-hand sides) live here
too; :mod:`qcluster.verify` turns them into reports.
"""

from __future__ import annotations

import functools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .arith import QSurd, as_surd
from .lattice import (RULES, SURFACES, Label, LatticeError, LatticeSpec, batch_phases, build_lattice_quiver,
                      derive_stencil, load_spec)
from .quiver import Quiver, mutate_quiver
from .seed import MutationSchedule, Seed

__all__ = [
    "Model",
    "Pedigree",
    "ModelError",
    "MissingLabel",
    "make_model",
    "catalog",
    "custom_model",
    "lattice_spec",
    "PAINLEVE",
    "plain_to_initial_coefficients",
    "random_positive_rationals",
    "coefficient_sequences",
    "ConservedQuantitySet",
    "conserved_quantities",
    "proof_monitors",
    "painleve_rhs",
    "bilinear_to_painleve",
    "even_odd_split",
]


class ModelError(ValueError):
    pass


class MissingLabel(KeyError):
    pass


@dataclass(frozen=True)
class Pedigree:
    """``child = parent / vector``; ``to_parent`` maps child labels to parent labels."""

    parent: str
    parent_params: tuple
    vector: tuple
    to_parent: Callable[[Label], Label] = field(compare=False)

    @property
    def parent_name(self) -> str:
        return model_name(self.parent, self.parent_params)

    def describe(self) -> str:
        return f"{self.parent_name} / ({','.join(map(str, self.vector))})"


@dataclass(frozen=True)
class Model:
    name: str
    family: str
    params: tuple
    quiver: Quiver
    labels: tuple
    schedule: MutationSchedule
    spec: LatticeSpec | None = None
    window: tuple | None = None
    period: tuple | None = None  # (i, nu), 0-based, for mutation-periodic quivers
    pedigree: Pedigree | None = None

    @property
    def finite(self) -> bool:
        return self.spec is None

    @property
    def n(self) -> int:
        return self.quiver.n

    def symbol_names(self) -> list[str]:
        if self.finite:
            return [f"{L[0]}{L[1][0]}" for L in self.labels]
        return [f"v{i + 1}" for i in range(self.n)]

    def seed(self, x=None, y=None, plain=None, symbolic: bool = False) -> Seed:
        """Initial seed.  ``plain`` gives Painleve coefficients as the values
        each vertex carries when it is first mutated (see
        :func:`plain_to_initial_coefficients`)."""
        if symbolic:
            if y is not None or plain is not None:
                raise ModelError("symbolic mode is coefficient-free")
            return Seed.symbolic_initial(self.quiver, self.symbol_names())
        x = tuple(x) if x is not None else (1,) * self.n
        if plain is not None:
            if y is not None:
                raise ModelError("give either raw or plain coefficients")
            y = plain_to_initial_coefficients(self, plain)
        return Seed(self.quiver, x, None if y is None else tuple(y))

    def catalog_line(self) -> str:
        parts = [f"{self.n} vertices"]
        if self.period is not None:
            parts.append("batch (" + ",".join(str(v + 1) for v in self.period[0]) + ")")
        else:
            parts.append(f"{len(self.schedule.batches)} batches per sweep")
        if self.pedigree is not None:
            parts.append(f"pedigree: {self.pedigree.describe()}")
        return f"{self.name} ({', '.join(parts)})"

    def to_json_obj(self) -> dict:
        obj = {
            "name": self.name,
            "family": self.family,
            "params": list(self.params),
            "quiver": self.quiver.to_json_obj(),
            "schedule": self.schedule.to_json_obj(),
            "pedigree": None if self.pedigree is None else {
                "parent": self.pedigree.parent_name, "vector": list(self.pedigree.vector)},
        }
        if self.period is not None:
            obj["period"] = {"i": [v + 1 for v in self.period[0]], "nu": [v + 1 for v in self.period[1]]}
        if self.window is not None:
            obj["window"] = list(self.window)
        return obj


def model_name(family: str, params: Sequence[int]) -> str:
    if family in PAINLEVE or not params:
        return family
    return f"{family}({','.join(map(str, params))})"


# ---------------------------------------------------------------------------
# q-Painleve models

_LETTER_TO_COEF = {"w": "y", "x": "z", "W": "Y", "X": "Z"}


def _coef_label_pair(label: Label) -> Label:
    return (_LETTER_TO_COEF[label[0]], (label[1][0] - 1,))


def _coef_label_single(label: Label) -> Label:
    return ("y", (label[1][0] - 1,))


def _seq(letters: str, idx: Sequence[int]) -> tuple:
    return tuple((c, (i,)) for i in idx for c in letters)


PAINLEVE = {
    "qPI": dict(
        matrix=((0, -1, 2, -1), (1, 0, -3, 2), (-2, 3, 0, -1), (1, -2, 1, 0)),
        labels=_seq("x", range(1, 5)),
        batches=((0,), (1,), (2,), (3,)),
        nu=(1, 2, 3, 0),
        coef_label=_coef_label_single,
        pedigree=("dKdV", (2, 1), (2, -1), lambda L: ("x", (L[1][0] - 1, 0))),
    ),
    "qPII": dict(
        matrix=((0, -1, 1, 1, -1), (1, 0, -2, 0, 1), (-1, 2, 0, -2, 1), (-1, 0, 2, 0, -1), (1, -1, -1, 1, 0)),
        labels=_seq("x", range(1, 6)),
        batches=((0,), (1,), (2,), (3,), (4,)),
        nu=(1, 2, 3, 4, 0),
        coef_label=_coef_label_single,
        pedigree=("dKdV", (3, 1), (3, -1), lambda L: ("x", (L[1][0] - 1, 0))),
    ),
    "qPIII": dict(
        matrix=((0, 0, -1, 1, 1, -1), (0, 0, 1, -1, -1, 1), (1, -1, 0, 0, -1, 1),
                (-1, 1, 0, 0, 1, -1), (-1, 1, 1, -1, 0, 0), (1, -1, -1, 1, 0, 0)),
        labels=_seq("wx", range(1, 4)),
        batches=((0, 1), (2, 3), (4, 5)),
        nu=(2, 3, 4, 5, 1, 0),
        coef_label=_coef_label_pair,
        pedigree=("dmKdV", (2, 1), (2, -1), lambda L: (L[0], (L[1][0] - 1, 0))),
    ),
    "qPVI": dict(
        matrix=((0, 0, 0, 0, -1, 1, 1, -1), (0, 0, 0, 0, 1, -1, -1, 1), (0, 0, 0, 0, 1, -1, -1, 1),
                (0, 0, 0, 0, -1, 1, 1, -1), (1, -1, -1, 1, 0, 0, 0, 0), (-1, 1, 1, -1, 0, 0, 0, 0),
                (-1, 1, 1, -1, 0, 0, 0, 0), (1, -1, -1, 1, 0, 0, 0, 0)),
        labels=_seq("wxWX", range(1, 3)),
        batches=((0, 1, 2, 3), (4, 5, 6, 7)),
        nu=(4, 5, 6, 7, 3, 2, 1, 0),
        coef_label=_coef_label_pair,
        # W_n is w_{n-1}^1 on the dmKdV lattice
        pedigree=("dmKdV", (1, 1), (2, -2),
                  lambda L: (L[0], (L[1][0] - 1, 0)) if L[0].islower() else (L[0].lower(), (L[1][0] - 2, 1))),
    ),
}


def _painleve(name: str) -> Model:
    d = PAINLEVE[name]
    Q = Quiver(d["matrix"])
    sched = MutationSchedule(d["batches"], d["labels"], RULES[name], 1, d["coef_label"])
    fam, params, v, f = d["pedigree"]
    return Model(name, name, (), Q, d["labels"], sched, period=(d["batches"][0], d["nu"]),
                 pedigree=Pedigree(fam, params, v, f))


# ---------------------------------------------------------------------------
# lattice models

@functools.lru_cache(maxsize=None)
def lattice_spec(family: str, params: tuple = ()) -> LatticeSpec:
    """Stencil for a lattice family: shipped data when available, otherwise
    derived from the exchange relation."""
    if family not in SURFACES:
        raise ModelError(f"unknown lattice family {family!r}")
    fname = "_".join([family, *map(str, params)])
    try:
        return load_spec(fname)
    except FileNotFoundError:
        pass
    try:
        motif, periods = SURFACES[family](*params)
    except TypeError as exc:
        raise ModelError(f"bad parameters {params} for {family}") from exc
    return derive_stencil(fname, family, motif, periods)


@functools.lru_cache(maxsize=None)
def _phases(family: str, params: tuple):
    return batch_phases(lattice_spec(family, params))


def _window_sites(spec: LatticeSpec, window: tuple) -> list:
    """Chain lattices take a site count (a product ``AxB`` is multiplied
    out); plane lattices take cell counts along both periods."""
    if any(w < 1 for w in window):
        raise ModelError(f"window must be positive, got {window}")
    if spec.rank == 1:
        count = math.prod(window)
        cells = -(-count // len(spec.motif))
        return spec.window_sites([cells])[:count]
    if len(window) != spec.rank:
        raise ModelError(f"{spec.name} needs a window of {spec.rank} extents, e.g. 4x4")
    return spec.window_sites(window)


_LATTICE_PEDIGREES = {
    ("dKdV", (1, 1)): ("HM", (2,), (1, 0, 1), lambda L: ("x", L[1] + (0,))),
    ("dmKdV", (1, 1)): ("HM", (1,), (0, 0, 2), lambda L: ("x", L[1] + ((0 if L[0] == "w" else 1),))),
    ("dToda", ()): ("HM", (1,), (1, -1, 1), lambda L: ("x", L[1] + (0,))),
}


def _lattice(family: str, params: tuple, window: tuple) -> Model:
    spec = lattice_spec(family, params)
    Q, sites = build_lattice_quiver(spec, sites=_window_sites(spec, window))
    frozen = Q.frozen
    phases, L = _phases(family, params)
    batches = [[] for _ in range(L)]
    for v, s in enumerate(sites):
        if v in frozen:
            continue
        i, _ = spec.locate(s)
        for p in phases[i]:
            batches[p].append(v)
    if not any(batches):
        batches = []
    sched = MutationSchedule(tuple(tuple(b) for b in batches), tuple(sites), RULES[family])
    ped = _LATTICE_PEDIGREES.get((family, params))
    pedigree = Pedigree(ped[0], ped[1], ped[2], ped[3]) if ped else None
    return Model(model_name(family, params), family, params, Q, tuple(sites), sched, spec=spec,
                 window=tuple(window), pedigree=pedigree)


DEFAULT_WINDOWS = {"dKdV": (24,), "HM": (4, 4), "dmKdV": (16,), "dToda": (16,)}


def make_model(name: str, N: int | None = None, M: int | None = None, window=None) -> Model:
    """Build a model by family name.

    ``qPI``, ``qPII``, ``qPIII``, ``qPVI`` take no parameters.  ``dKdV`` and
    ``dmKdV`` take ``N >= M >= 1``; ``HM`` takes ``N >= 1``; ``dToda`` none.
    ``window`` is an int, a tuple, or a string like ``"6x4"``.
    """
    if name in PAINLEVE:
        return _painleve(name)
    if isinstance(window, str):
        try:
            window = tuple(int(t) for t in window.lower().split("x"))
        except ValueError as exc:
            raise ModelError(f"bad window {window!r}") from exc
    elif isinstance(window, int):
        window = (window,)
    if name == "dKdV" or name == "dmKdV":
        params = (N if N is not None else 1, M if M is not None else 1)
        if not 1 <= params[1] <= params[0]:
            raise ModelError(f"{name} needs N >= M >= 1")
    elif name == "HM":
        params = (N if N is not None else 2,)
        if params[0] < 1:
            raise ModelError("HM needs N >= 1")
    elif name == "dToda":
        params = ()
    else:
        raise ModelError(f"unknown model {name!r}")
    window = tuple(window) if window is not None else DEFAULT_WINDOWS[name]
    try:
        return _lattice(name, params, window)
    except LatticeError as exc:
        raise ModelError(str(exc)) from exc


def custom_model(quiver: Quiver, batches: Sequence[Sequence[int]], name: str = "custom") -> Model:
    """Model for an arbitrary quiver; vertex ``i`` starts as ``v_{i+1}`` and
    each mutation bumps a generation counter."""
    labels = tuple(("v", (i + 1, 0)) for i in range(quiver.n))
    sched = MutationSchedule(tuple(tuple(b) for b in batches), labels, RULES["generic"])
    return Model(name, "custom", (), quiver, labels, sched)


def catalog() -> list[Model]:
    return [
        make_model("qPI"), make_model("qPII"), make_model("qPIII"), make_model("qPVI"),
        make_model("dKdV", 1, 1), make_model("dKdV", 2, 1), make_model("dKdV", 3, 1),
        make_model("HM", 1), make_model("HM", 2),
        make_model("dmKdV", 1, 1), make_model("dmKdV", 2, 1),
        make_model("dToda"),
    ]


# ---------------------------------------------------------------------------
# coefficient bookkeeping


def plain_to_initial_coefficients(model: Model, plain: Sequence) -> tuple:
    """Initial coefficients such that the vertices, in order of their first
    mutation, carry the given values at that moment."""
    if not model.finite:
        raise ModelError("plain coefficients need a finite model; pass raw y for lattice windows")
    n = model.n
    plain = [Fraction(v) for v in plain]
    if len(plain) != n:
        raise ModelError(f"{model.name} needs {n} coefficient values, got {len(plain)}")
    if any(v <= 0 for v in plain):
        raise ModelError("coefficients must be positive")
    Q = model.quiver
    acc = [Fraction(1)] * n
    init: list = [None] * n
    cur: list = [None] * n
    it = iter(plain)
    t = 0
    while any(v is None for v in init):
        batch = model.schedule.batch(t)
        if t > 4 * n or not model.schedule.batches:
            raise ModelError(f"{model.name}: some vertices are never mutated")
        for k in batch:
            if init[k] is None:
                val = next(it)
                init[k] = val / acc[k]
                cur[k] = val
            yk = cur[k]
            lam = Q.lam
            for i in range(n):
                if i == k:
                    continue
                if lam[k][i] > 0:
                    f = (1 / yk + 1) ** (-lam[k][i])
                elif lam[i][k] > 0:
                    f = (yk + 1) ** lam[i][k]
                else:
                    continue
                acc[i] *= f
                if cur[i] is not None:
                    cur[i] *= f
            cur[k] = 1 / yk
            Q = mutate_quiver(Q, k)
        t += 1
    return tuple(init)


def random_positive_rationals(rng: random.Random, count: int, lo: int = 1, hi: int = 20) -> tuple:
    """``p/q`` with ``p, q`` uniform in ``[lo, hi]``."""
    return tuple(Fraction(rng.randint(lo, hi), rng.randint(lo, hi)) for _ in range(count))


def coefficient_sequences(traj) -> dict:
    """``{letter: {n: value}}`` from the plain coefficient labels of a run."""
    out: dict = {}
    for (letter, idx), v in traj.y.items():
        if len(idx) == 1:
            out.setdefault(letter, {})[idx[0]] = v
    return out


def _get(seq: dict, letter: str, n: int):
    try:
        return seq[letter][n]
    except KeyError:
        raise MissingLabel(f"{letter}_{n}") from None


def even_odd_split(seq: Sequence) -> tuple[list, list]:
    """``f_n = y_{2n}``, ``g_n = y_{2n+1}``."""
    seq = list(seq)
    return seq[0::2], seq[1::2]


def _inv1(v):
    return 1 / v + 1


# ---------------------------------------------------------------------------
# conserved quantities


@dataclass(frozen=True)
class ConservedQuantitySet:
    """Named exact values at index ``n``; names ending in ``^2`` are squares."""

    model: str
    n: int
    values: dict

    def __getitem__(self, k):
        return self.values[k]


def _c1(c1sq) -> QSurd:
    return QSurd.sqrt(c1sq)


def _cq_pi(s, n):
    y = lambda k: _get(s, "y", k)
    c1 = y(n + 3) * _inv1(y(n + 1)) / (y(n) * _inv1(y(n + 2)))
    c2 = y(n + 2) * y(n + 1) ** 2 * y(n) / (y(n + 1) + 1) * c1 ** (-(n + 1))
    return {"c1": c1, "c2": c2}


def _cq_pii(s, n):
    y = lambda k: _get(s, "y", k)
    c1sq = y(n + 4) * _inv1(y(n + 1)) / (y(n) * _inv1(y(n + 3)))
    c1 = _c1(c1sq)
    a = 2 * n
    c2sq = (y(a + 3) * y(a + 2) ** 2 * y(a + 1) ** 2 * y(a) / ((y(a + 2) + 1) * (y(a + 1) + 1))) * c1 ** (-(4 * n + 3))
    c3sq = (y(a + 3) * (y(a + 1) + 1) / (y(a) * (y(a + 2) + 1))) * c1 ** -1
    return {"c1^2": c1sq, "c2^2": c2sq, "c3^2": c3sq}


def _cq_piii(s, n):
    y = lambda k: _get(s, "y", k)
    z = lambda k: _get(s, "z", k)
    c1sq = y(n + 2) * z(n + 2) / (y(n) * z(n))
    c1 = _c1(c1sq)
    c2sq = y(n + 2) * y(n) * _inv1(z(n + 1)) ** 2 / (z(n + 2) * z(n) * _inv1(y(n + 1)) ** 2)
    a = 2 * n
    c3sq = (y(a + 1) * z(a + 1) * y(a) * z(a)) * c1 ** (-(4 * n + 1))
    c4sq = (y(a) * z(a) / (y(a + 1) * z(a + 1))) * c1
    return {"c1^2": c1sq, "c2^2": c2sq, "c3^2": c3sq, "c4^2": c4sq}


def _cq_pvi(s, n):
    y = lambda k: _get(s, "y", k)
    z = lambda k: _get(s, "z", k)
    Y = lambda k: _get(s, "Y", k)
    Z = lambda k: _get(s, "Z", k)
    p = lambda k: y(k) * z(k) * Y(k) * Z(k)
    c1sq = p(n + 1) / p(n)
    c1 = _c1(c1sq)
    c2 = p(n) * c1sq ** (-n)
    a = 2 * n
    c3sq = (y(a + 1) * z(a + 1) * y(a) * z(a)) * c1 ** (-(4 * n + 1))
    c4sq = (y(a) * z(a) / (y(a + 1) * z(a + 1))) * c1
    c5sq = (y(a + 1) * Y(a + 1) * y(a) * Y(a)) * c1 ** (-(4 * n + 1))
    c6sq = (y(a) * Y(a) / (y(a + 1) * Y(a + 1))) * c1
    return {"c1^2": c1sq, "c2": c2, "c3^2": c3sq, "c4^2": c4sq, "c5^2": c5sq, "c6^2": c6sq}


_CQ = {"qPI": _cq_pi, "qPII": _cq_pii, "qPIII": _cq_piii, "qPVI": _cq_pvi}


def _family(model) -> str:
    return model if isinstance(model, str) else model.family


def _sequences(data) -> dict:
    return data if isinstance(data, dict) else coefficient_sequences(data)


def conserved_quantities(model, traj, n: int) -> ConservedQuantitySet:
    """Conserved quantities evaluated at index ``n``.

    ``traj`` is a coefficient-mode trajectory or a ``{letter: {n: value}}``
    mapping.  Values involving odd powers of ``c1`` live in ``Q(c1)``
    (:class:`QSurd`), with ``c1`` the positive root of ``c1^2``.
    """
    fam = _family(model)
    if fam not in _CQ:
        raise ModelError(f"no conserved quantities for {fam}")
    vals = _CQ[fam](_sequences(traj), n)
    return ConservedQuantitySet(fam, n, {k: _simplify(v) for k, v in vals.items()})


def _simplify(v):
    if isinstance(v, QSurd) and v.is_rational():
        return v.to_fraction()
    return v


def proof_monitors(model, traj, n: int) -> dict:
    """Auxiliary sequences used in the conservation proofs, at index ``n``.

    ``qPI``: ``u`` (constant) and ``v`` (``v_{n+1} = c1 v_n``);
    ``qPII``: ``u = c1^2`` and ``v`` (``v_{n+2} = c1^2 v_n``);
    ``qPIII``: ``u``, ``v`` (constant) and ``t = y z`` (``t_{n+2} = c1^2 t_n``);
    ``qPVI``: ``p = y z Y Z`` (``p_{n+1} = c1^2 p_n``), ``yz`` and ``yY``
    (both advance by ``c1^2`` over two steps).
    """
    fam = _family(model)
    s = _sequences(traj)
    y = lambda k: _get(s, "y", k)
    if fam == "qPI":
        return {"u": y(n + 3) * _inv1(y(n + 1)) / (y(n) * _inv1(y(n + 2))),
                "v": y(n + 2) * y(n + 1) ** 2 * y(n) / (y(n + 1) + 1)}
    if fam == "qPII":
        return {"u": y(n + 4) * _inv1(y(n + 1)) / (y(n) * _inv1(y(n + 3))),
                "v": y(n + 2) * y(n) / _inv1(y(n + 1))}
    z = lambda k: _get(s, "z", k)
    if fam == "qPIII":
        return {"u": y(n + 2) * _inv1(z(n + 1)) / (z(n) * _inv1(y(n + 1))),
                "v": z(n + 2) * _inv1(y(n + 1)) / (y(n) * _inv1(z(n + 1))),
                "t": y(n) * z(n)}
    if fam == "qPVI":
        Y = lambda k: _get(s, "Y", k)
        Z = lambda k: _get(s, "Z", k)
        return {"p": y(n) * z(n) * Y(n) * Z(n), "yz": y(n) * z(n), "yY": y(n) * Y(n)}
    raise ModelError(f"no proof monitors for {fam}")


def _pair(c3sq, c4sq, e) -> QSurd:
    """``c3 * c4**e`` for ``e = +-1`` as the positive root in ``Q(c1)``."""
    return (as_surd(c3sq) * as_surd(c4sq) ** e).sqrt_positive()


def painleve_constants(model, cq: ConservedQuantitySet) -> dict:
    """Unsquared constants (or constant combinations) needed by the
    equations, all positive elements of ``Q(c1)``."""
    fam = _family(model)
    v = cq.values
    if fam == "qPI":
        return {"c1": as_surd(v["c1"]), "c2": as_surd(v["c2"])}
    c1 = _c1(v["c1^2"])
    if fam == "qPII":
        return {"c1": c1, "c2^2": as_surd(v["c2^2"]), "c3^2": as_surd(v["c3^2"])}
    if fam == "qPIII":
        return {"c1": c1, "c2": as_surd(v["c2^2"]).sqrt_positive(), "c3^2": as_surd(v["c3^2"]),
                "c3c4": _pair(v["c3^2"], v["c4^2"], 1), "c3/c4": _pair(v["c3^2"], v["c4^2"], -1)}
    if fam == "qPVI":
        return {"c1": c1, "c2": as_surd(v["c2"]), "c3^2": as_surd(v["c3^2"]), "c5^2": as_surd(v["c5^2"]),
                "c3c4": _pair(v["c3^2"], v["c4^2"], 1), "c3/c4": _pair(v["c3^2"], v["c4^2"], -1),
                "c5c6": _pair(v["c5^2"], v["c6^2"], 1), "c5/c6": _pair(v["c5^2"], v["c6^2"], -1)}
    raise ModelError(f"no Painleve equation for {fam}")


def painleve_rhs(model, n: int, values, constants: dict) -> dict:
    """Right-hand sides of the constant-form equations at index ``n``.

    Returns ``{name: (lhs_letter, rhs, squared)}``: for ``qPI`` the identity
    ``y_{n+1} y_{n-1} = rhs`` is exact; for the others ``rhs`` is the square
    of the right-hand side, to be compared with ``(y_{n+1} y_{n-1})^2``.
    """
    fam = _family(model)
    s = _sequences(values)
    k = constants
    if fam == "qPI":
        yn = as_surd(_get(s, "y", n))
        return {"y": ("y", k["c2"] * k["c1"] ** n * (yn + 1) / yn ** 2, False)}
    c1n = k["c1"] ** n
    c1_2n = k["c1"] ** (2 * n)
    even = n % 2 == 0
    if fam == "qPII":
        yn = as_surd(_get(s, "y", n))
        c3sq_pm = k["c3^2"] if even else k["c3^2"].inverse()
        return {"y": ("y", k["c2^2"] * c3sq_pm * c1_2n * ((yn + 1) / yn) ** 2, True)}
    if fam == "qPIII":
        P = (k["c3c4"] if even else k["c3/c4"]) * c1n
        out = {}
        for letter, c2 in (("y", k["c2"]), ("z", k["c2"].inverse())):
            v = as_surd(_get(s, letter, n))
            rhs = c2 * k["c3^2"] * c1_2n * (v + 1) / (v * (v + P))
            out[letter] = (letter, rhs * rhs, True)
        return out
    if fam == "qPVI":
        P = (k["c3c4"] if even else k["c3/c4"]) * c1n  # c3 c4^{(-1)^n} c1^n
        R = (k["c5c6"] if even else k["c5/c6"]) * c1n  # c5 c6^{(-1)^n} c1^n
        c2, c3sq, c5sq = k["c2"], k["c3^2"], k["c5^2"]
        g = c2 * c1_2n  # c2 c1^{2n}
        y, z, Y, Z = (as_surd(_get(s, c, n)) for c in "yzYZ")
        rhs = {
            "y": c2.inverse() * c3sq * c5sq * c1_2n * (y + 1) * (g / (P * R) * y + 1) / ((y + P) * (y + R)),
            "z": c2 * c3sq * c5sq.inverse() * c1_2n * (z + 1) * (R / P * z + 1) / ((z + P) * (z + g / R)),
            "Y": c2 * c3sq.inverse() * c5sq * c1_2n * (Y + 1) * (P / R * Y + 1) / ((Y + g / P) * (Y + R)),
            "Z": c2 ** 3 * (c3sq * c5sq).inverse() * c1_2n * (Z + 1) * (P * R / g * Z + 1) / ((Z + g / P) * (Z + g / R)),
        }
        return {c: (c, r * r, True) for c, r in rhs.items()}
    raise ModelError(f"no Painleve equation for {fam}")


def raw_recurrence(model, values, n: int) -> dict:
    """Coefficient recurrences obtained by composing one period of
    coefficient mutations: ``{letter: (predicted value, label index)}``."""
    fam = _family(model)
    s = _sequences(values)
    g = lambda c, k: _get(s, c, k)
    if fam == "qPI":
        y = lambda k: g("y", k)
        return {"y": ((y(n + 3) + 1) * (y(n + 1) + 1) / (_inv1(y(n + 2)) ** 2 * y(n)), n + 4)}
    if fam == "qPII":
        y = lambda k: g("y", k)
        return {"y": ((y(n + 4) + 1) * (y(n + 1) + 1) / (_inv1(y(n + 3)) * _inv1(y(n + 2)) * y(n)), n + 5)}
    if fam == "qPIII":
        out = {}
        for a, b in (("y", "z"), ("z", "y")):
            out[a] = ((g(a, n + 2) + 1) * (g(b, n + 1) + 1)
                      / (_inv1(g(b, n + 2)) * _inv1(g(a, n + 1)) * g(b, n)), n + 3)
        return out
    if fam == "qPVI":
        # (target, grows with, inverse partners, denominator) per printed system
        table = {"y": ("y", "Z", ("z", "Y"), "Z"), "z": ("z", "Y", ("y", "Z"), "Y"),
                 "Y": ("Y", "z", ("Z", "y"), "z"), "Z": ("Z", "y", ("Y", "z"), "y")}
        out = {}
        for c, (a, b, (p, q), d) in table.items():
            out[c] = ((g(a, n + 1) + 1) * (g(b, n + 1) + 1)
                      / (_inv1(g(p, n + 1)) * _inv1(g(q, n + 1)) * g(d, n)), n + 2)
        return out
    raise ModelError(f"no coefficient recurrence for {fam}")


def bilinear_to_painleve(model, traj_or_seq) -> list:
    """Coefficient-like sequence built from cluster variables:
    ``y_n = x_{n+2} x_n / x_{n+1}^2`` (qPI) or
    ``y_n = x_{n+3} x_n / (x_{n+2} x_{n+1})`` (qPII), indexed from 0 over
    the given cluster sequence."""
    fam = _family(model)
    if isinstance(traj_or_seq, (list, tuple)):
        xs = [Fraction(v) for v in traj_or_seq]
    else:
        seq = traj_or_seq.x_sequence("x")
        xs = [seq[k] for k in sorted(seq)]
    if any(v == 0 for v in xs):
        raise ZeroDivisionError("zero cluster variable")
    if fam == "qPI":
        return [xs[n + 2] * xs[n] / xs[n + 1] ** 2 for n in range(len(xs) - 2)]
    if fam == "qPII":
        return [xs[n + 3] * xs[n] / (xs[n + 2] * xs[n + 1]) for n in range(len(xs) - 3)]
    raise ModelError(f"no bilinear-to-Painleve transformation for {fam}")
