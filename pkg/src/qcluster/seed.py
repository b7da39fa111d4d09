"""Seeds, seed mutation and scheduled runs with labeled bookkeeping."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .arith import LaurentPoly, exact_str, poly_exact_div
from .lattice import ExchangeRule, Label, label_str
from .quiver import FrozenVertexError, Quiver, mutate_quiver

__all__ = [
    "Seed",
    "CoefficientError",
    "BatchAdjacencyError",
    "DepthLimitExceeded",
    "mutate_seed",
    "mutate_seed_free",
    "exchange_monomials",
    "extract_bilinear_coefficients",
    "MutationSchedule",
    "Step",
    "Trajectory",
    "run_schedule",
    "DEFAULT_DEPTH_LIMIT",
]

DEFAULT_DEPTH_LIMIT = 8


class CoefficientError(ValueError):
    pass


class BatchAdjacencyError(ValueError):
    pass


class DepthLimitExceeded(ValueError):
    pass


def _value(v):
    if isinstance(v, LaurentPoly):
        return v
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    raise TypeError(f"unsupported value type {type(v).__name__}")


@dataclass(frozen=True)
class Seed:
    """Quiver with cluster variables ``x`` and optional coefficients ``y``.

    ``x`` holds Fractions (numeric mode) or LaurentPolys over a shared
    variable list (symbolic mode).
    """

    quiver: Quiver
    x: tuple
    y: tuple | None = None

    def __post_init__(self):
        x = tuple(_value(v) for v in self.x)
        object.__setattr__(self, "x", x)
        n = self.quiver.n
        if len(x) != n:
            raise ValueError(f"{len(x)} cluster variables for {n} vertices")
        polys = [v for v in x if isinstance(v, LaurentPoly)]
        if polys:
            if len(polys) != n:
                raise ValueError("cannot mix symbolic and numeric cluster variables")
            if len({p.variables for p in polys}) != 1:
                raise ValueError("symbolic cluster variables must share one variable list")
        if self.y is not None:
            y = tuple(Fraction(v) for v in self.y)
            if len(y) != n:
                raise ValueError(f"{len(y)} coefficients for {n} vertices")
            if any(v == 0 for v in y):
                raise CoefficientError("coefficients must be nonzero")
            object.__setattr__(self, "y", y)

    @property
    def symbolic(self) -> bool:
        return bool(self.x) and isinstance(self.x[0], LaurentPoly)

    @property
    def has_coefficients(self) -> bool:
        return self.y is not None

    @classmethod
    def symbolic_initial(cls, quiver: Quiver, names: Sequence[str]) -> "Seed":
        names = tuple(names)
        return cls(quiver, tuple(LaurentPoly.var(names, s) for s in names))

    def to_json_obj(self, labels: Sequence[Label] | None = None) -> dict:
        obj = self.quiver.to_json_obj()
        obj["x"] = [exact_str(v) for v in self.x]
        if self.symbolic:
            obj["variables"] = list(self.x[0].variables)
        if self.y is not None:
            obj["y"] = [exact_str(v) for v in self.y]
        if labels is not None:
            obj["labels"] = [label_str(L) for L in labels]
        return obj

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Seed":
        Q = Quiver.from_json_obj(obj)
        if "variables" in obj:
            x = tuple(LaurentPoly.from_text(obj["variables"], s) for s in obj["x"])
        else:
            x = tuple(Fraction(s) for s in obj["x"])
        y = tuple(Fraction(s) for s in obj["y"]) if "y" in obj else None
        return cls(Q, x, y)


def exchange_monomials(seed: Seed, k: int):
    """``(out, in_)``: products over arrows leaving and entering ``k``."""
    row = seed.quiver.lam[k]
    one = LaurentPoly.const(seed.x[0].variables, 1) if seed.symbolic else Fraction(1)
    out, in_ = one, one
    for j, m in enumerate(row):
        if m > 0:
            out = out * seed.x[j] ** m
        elif m < 0:
            in_ = in_ * seed.x[j] ** (-m)
    return out, in_


def _check_mutable(seed: Seed, k: int):
    if not 0 <= k < seed.quiver.n:
        raise IndexError(f"vertex {k + 1} out of range 1..{seed.quiver.n}")
    if k in seed.quiver.frozen:
        raise FrozenVertexError(f"vertex {k + 1} is frozen")


def _mutated_coefficients(seed: Seed, k: int) -> tuple:
    lam = seed.quiver.lam
    yk = seed.y[k]
    new = []
    for i, yi in enumerate(seed.y):
        if i == k:
            new.append(1 / yk)
        elif lam[k][i] > 0:
            new.append(yi * (1 / yk + 1) ** (-lam[k][i]))
        elif lam[i][k] > 0:
            new.append(yi * (yk + 1) ** lam[i][k])
        else:
            new.append(yi)
    return tuple(new)


def mutate_seed(seed: Seed, k: int, allow_nonpositive: bool = False) -> Seed:
    """Mutation with coefficients at vertex ``k`` (0-based).

    Coefficients must be positive unless ``allow_nonpositive`` is set; a
    coefficient of -1 at ``k`` is always rejected.
    """
    _check_mutable(seed, k)
    if seed.y is None:
        raise CoefficientError("seed has no coefficients; use mutate_seed_free")
    if seed.symbolic:
        raise TypeError("coefficient mode needs numeric cluster variables")
    yk = seed.y[k]
    if yk == -1:
        raise CoefficientError(f"y_{k + 1} = -1 makes the exchange relation singular")
    if not allow_nonpositive and yk <= 0:
        raise CoefficientError(f"y_{k + 1} = {yk} is not positive")
    if seed.x[k] == 0:
        raise ZeroDivisionError(f"x_{k + 1} = 0")
    out, in_ = exchange_monomials(seed, k)
    xk = (out + yk * in_) / ((yk + 1) * seed.x[k])
    x = seed.x[:k] + (xk,) + seed.x[k + 1:]
    return Seed(mutate_quiver(seed.quiver, k), x, _mutated_coefficients(seed, k))


def mutate_seed_free(seed: Seed, k: int) -> Seed:
    """Coefficient-free mutation.  Symbolic division must be exact."""
    _check_mutable(seed, k)
    if seed.y is not None:
        raise CoefficientError("seed carries coefficients; use mutate_seed")
    out, in_ = exchange_monomials(seed, k)
    if seed.symbolic:
        xk = poly_exact_div(out + in_, seed.x[k])
    else:
        if seed.x[k] == 0:
            raise ZeroDivisionError(f"x_{k + 1} = 0")
        xk = (out + in_) / seed.x[k]
    x = seed.x[:k] + (xk,) + seed.x[k + 1:]
    return Seed(mutate_quiver(seed.quiver, k), x)


def extract_bilinear_coefficients(seed: Seed, k: int) -> tuple[Fraction, Fraction]:
    """``(a, b) = (y_k/(1+y_k), 1/(1+y_k))``: weights of the incoming and
    outgoing exchange monomials, so that ``x_k' x_k = a*in + b*out``."""
    if seed.y is None:
        raise CoefficientError("seed has no coefficients")
    yk = seed.y[k]
    if yk == -1:
        raise CoefficientError(f"y_{k + 1} = -1")
    return yk / (1 + yk), 1 / (1 + yk)


# ---------------------------------------------------------------------------
# schedules and trajectories


@dataclass(frozen=True)
class MutationSchedule:
    """Repeating candidate batches plus the relabeling of produced variables.

    ``labels`` names the initial cluster variables; ``rule`` supplies the new
    label of each mutated vertex and its expected exchange relation.  A sweep
    consists of ``sweep_length`` consecutive batches.  ``coef_label`` names
    the coefficient sitting at a vertex that is about to be mutated.
    """

    batches: tuple
    labels: tuple
    rule: ExchangeRule
    sweep_length: int = 1
    coef_label: Callable[[Label], Label] | None = None

    def __post_init__(self):
        object.__setattr__(self, "batches", tuple(tuple(sorted(b)) for b in self.batches))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("initial labels must be distinct")

    def batch(self, t: int) -> tuple:
        return self.batches[t % len(self.batches)] if self.batches else ()

    def relabel(self, label: Label) -> Label:
        return self.rule.step(label)

    def to_json_obj(self) -> dict:
        return {
            "batches": [[v + 1 for v in b] for b in self.batches],
            "sweep_length": self.sweep_length,
            "labels": [label_str(L) for L in self.labels],
            "rule": self.rule.name,
        }


@dataclass(frozen=True)
class Step:
    time: int
    vertex: int
    old_label: Label
    new_label: Label
    value: object
    coef_label: Label | None = None
    coef_value: Fraction | None = None


@dataclass
class Trajectory:
    """Labeled view (``x``, ``y``, ``ab``) plus the flat step log."""

    labels0: tuple
    x: dict = field(default_factory=dict)
    y: dict = field(default_factory=dict)
    ab: dict = field(default_factory=dict)
    steps: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    seeds: list = field(default_factory=list)
    batches_run: int = 0
    final_seed: Seed | None = None
    final_labels: tuple = ()

    def value(self, label: Label):
        return self.x[label]

    def coef(self, label: Label):
        return self.y[label]

    def x_sequence(self, letter: str = "x") -> dict:
        """1-index cluster sequence ``{n: value}`` for finite models."""
        return {L[1][0]: v for L, v in self.x.items() if L[0] == letter and len(L[1]) == 1}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["label", "kind", "value"])
        for L, v in self.x.items():
            w.writerow([label_str(L), "x", exact_str(v)])
        for L, v in self.y.items():
            w.writerow([label_str(L), "y", exact_str(v)])
        return buf.getvalue()

    def to_json_obj(self) -> dict:
        return {
            "x": {label_str(L): exact_str(v) for L, v in self.x.items()},
            "y": {label_str(L): exact_str(v) for L, v in self.y.items()},
            "ab": {label_str(L): [exact_str(a), exact_str(b)] for L, (a, b) in self.ab.items()},
            "skipped": [[t, v + 1, label_str(L), why] for t, v, L, why in self.skipped],
            "batches_run": self.batches_run,
        }

    def fingerprint(self) -> tuple:
        return (tuple((L, exact_str(v)) for L, v in self.x.items()),
                tuple((L, exact_str(v)) for L, v in self.y.items()))


def _template_row(rule: ExchangeRule, label: Label, where: dict) -> dict | None:
    out, in_ = rule.template(label)
    row: dict = {}
    for parts, sign in ((out, 1), (in_, -1)):
        for p, e in parts.items():
            v = where.get(p)
            if v is None:
                return None
            row[v] = row.get(v, 0) + sign * e
    return {k: m for k, m in row.items() if m}


def run_schedule(seed: Seed, schedule: MutationSchedule, sweeps: int, *,
                 depth_limit: int | None = DEFAULT_DEPTH_LIMIT, record_seeds: bool = False,
                 allow_nonpositive: bool = False) -> Trajectory:
    """Apply ``sweeps`` sweeps of the schedule, recording every new variable.

    A candidate vertex is mutated only when every variable in its exchange
    relation is currently present and its quiver row realizes that relation;
    otherwise it is skipped and the reason logged (this happens near frozen
    window boundaries).
    """
    if sweeps < 0:
        raise ValueError("sweeps must be nonnegative")
    if seed.symbolic and depth_limit is not None and sweeps > depth_limit:
        raise DepthLimitExceeded(f"symbolic runs are limited to {depth_limit} sweeps")
    if len(schedule.labels) != seed.quiver.n:
        raise ValueError("schedule labels do not match the seed size")
    labels = list(schedule.labels)
    traj = Trajectory(tuple(labels))
    for L, v in zip(labels, seed.x):
        traj.x[L] = v
    if record_seeds:
        traj.seeds.append(seed)
    rule = schedule.rule
    coef = seed.y is not None
    t = 0
    for _ in range(sweeps * schedule.sweep_length):
        where = {L: v for v, L in enumerate(labels)}
        batch = []
        for k in schedule.batch(t):
            if k in seed.quiver.frozen:
                traj.skipped.append((t, k, labels[k], "frozen"))
                continue
            if rule.template(labels[k]) is None:
                batch.append(k)
                continue
            row = _template_row(rule, labels[k], where)
            if row is None:
                traj.skipped.append((t, k, labels[k], "exchange partner outside window"))
                continue
            actual = {j: m for j, m in enumerate(seed.quiver.lam[k]) if m}
            if actual != row:
                traj.skipped.append((t, k, labels[k], "quiver row differs from exchange relation"))
                continue
            batch.append(k)
        lam = seed.quiver.lam
        for i in batch:
            for j in batch:
                if lam[i][j]:
                    raise BatchAdjacencyError(f"batch at time {t} contains adjacent vertices {i + 1},{j + 1}")
        for k in batch:
            old = labels[k]
            new = rule.step(old)
            if new in traj.x:
                raise ValueError(f"label {label_str(new)} produced twice")
            cl = cv = None
            if coef:
                cv = seed.y[k]
                cl = schedule.coef_label(old) if schedule.coef_label else old
                traj.y[cl] = cv
                traj.ab[old] = extract_bilinear_coefficients(seed, k)
                seed = mutate_seed(seed, k, allow_nonpositive=allow_nonpositive)
            else:
                seed = mutate_seed_free(seed, k)
            labels[k] = new
            traj.x[new] = seed.x[k]
            traj.steps.append(Step(t, k, old, new, seed.x[k], cl, cv))
        t += 1
        if record_seeds:
            traj.seeds.append(seed)
    traj.batches_run = t
    traj.final_seed = seed
    traj.final_labels = tuple(labels)
    return traj
