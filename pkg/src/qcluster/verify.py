"""Exact checkers that turn trajectories into pass/fail reports.

Every comparison is exact equality of rationals (or of elements of
``Q(sqrt r)`` where a square root of a rational constant is involved).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .arith import NonExactDivision, as_surd, exact_str, poly_eval
from .lattice import Label, label_str, lab, match_reduction, reduce as reduce_spec
from .models import (
    MissingLabel,
    Model,
    ModelError,
    coefficient_sequences,
    conserved_quantities,
    even_odd_split,
    make_model,
    painleve_constants,
    painleve_rhs,
    proof_monitors,
    random_positive_rationals,
    raw_recurrence,
)
from .seed import Trajectory, run_schedule

__all__ = [
    "CheckEntry",
    "VerificationReport",
    "check_bilinear",
    "check_bilinear_with_coefficients",
    "check_painleve",
    "check_conservation",
    "check_reduction_correspondence",
    "check_laurent",
    "check_pedigree",
    "bilinear_terms",
]


@dataclass(frozen=True)
class CheckEntry:
    index: tuple
    lhs: object
    rhs: object
    equal: bool
    what: str = ""

    def describe(self) -> str:
        head = f"{self.what} " if self.what else ""
        return f"{head}{_index_str(self.index)}: lhs={exact_str(self.lhs)} rhs={exact_str(self.rhs)}"


def _index_str(index) -> str:
    if isinstance(index, tuple) and len(index) == 2 and isinstance(index[0], str) and isinstance(index[1], tuple):
        return label_str(index)
    if isinstance(index, tuple):
        return "(" + ",".join(_index_str(i) for i in index) + ")"
    return str(index)


def _sort_key(entry_index):
    return repr(entry_index)


@dataclass
class VerificationReport:
    """Results for one named identity.

    ``passed`` means no entry failed.  A report that checked nothing also
    counts as passed but carries a warning; :attr:`ok` is stricter and is
    what the command line uses for its exit code.
    """

    identity: str
    model: str = ""
    entries: list = field(default_factory=list)
    skipped: list = field(default_factory=list)  # (index, reason)
    warnings: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def add(self, index, lhs, rhs, what: str = "") -> bool:
        eq = lhs == rhs
        self.entries.append(CheckEntry(index, lhs, rhs, eq, what))
        return eq

    def skip(self, index, reason: str):
        self.skipped.append((index, reason))

    def finish(self) -> "VerificationReport":
        self.entries.sort(key=lambda e: (e.what, _sort_key(e.index)))
        self.skipped.sort(key=lambda s: _sort_key(s[0]))
        if not self.entries:
            self.warnings.append("no identities were checked")
        return self

    @property
    def checked(self) -> int:
        return len(self.entries)

    @property
    def failures(self) -> list:
        return [e for e in self.entries if not e.equal]

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def ok(self) -> bool:
        return self.passed and self.checked > 0

    def to_text(self, verbose: bool = False) -> str:
        status = "PASS" if self.ok else ("FAIL" if not self.passed else "EMPTY")
        name = f"{self.model} {self.identity}" if self.model else self.identity
        lines = [f"{name}: {status} ({self.checked} checked, {len(self.skipped)} skipped)"]
        if self.details:
            lines.append("  " + ", ".join(f"{k}: {v}" for k, v in self.details.items()))
        for w in self.warnings:
            lines.append(f"  warning: {w}")
        for e in self.failures[:20]:
            lines.append(f"  mismatch {e.describe()}")
        if len(self.failures) > 20:
            lines.append(f"  ... {len(self.failures) - 20} more mismatches")
        if verbose:
            for e in self.entries:
                if e.equal:
                    lines.append(f"  ok {e.describe()}")
            reasons: dict = {}
            for _, why in self.skipped:
                reasons[why] = reasons.get(why, 0) + 1
            for why, c in sorted(reasons.items()):
                lines.append(f"  skipped {c}: {why}")
        return "\n".join(lines)

    def to_json_obj(self) -> dict:
        reasons: dict = {}
        for _, why in self.skipped:
            reasons[why] = reasons.get(why, 0) + 1
        return {
            "identity": self.identity,
            "model": self.model,
            "pass": self.passed,
            "checked": self.checked,
            "skipped": len(self.skipped),
            "skip_reasons": reasons,
            "warnings": list(self.warnings),
            "details": dict(self.details),
            "failures": [{"what": e.what, "index": _index_str(e.index),
                          "lhs": exact_str(e.lhs), "rhs": exact_str(e.rhs)} for e in self.failures],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2)


# ---------------------------------------------------------------------------
# bilinear equations, written out per family


def _x(*c):
    return lab("x", *c)


def _kdv_terms(new):
    n, m = new[1][0] - 1, new[1][1] - 1
    return (n, m), _x(n - 1, m), [_x(n - 1, m + 1), _x(n + 1, m)], [_x(n, m + 1), _x(n, m)]


def _hm_terms(new):
    a, b, l = new[1]
    n, m = a - 1, b - 1
    return ((n, m, l), _x(n, m, l + 1), [_x(n, m + 1, l + 1), _x(n + 1, m, l)],
            [_x(n, m + 1, l), _x(n + 1, m, l + 1)])


def _mkdv_terms(new):
    n, m = new[1][0] - 1, new[1][1] - 1
    s = new[0]
    t = "x" if s == "w" else "w"
    # w_{n+1}^{m+1} x_n^m = x_n^{m+1} w_{n+1}^m + w_n^{m+1} x_{n+1}^m and the swap
    return ((s, n, m), lab(t, n, m), [lab(t, n, m + 1), lab(s, n + 1, m)],
            [lab(s, n, m + 1), lab(t, n + 1, m)])


def _toda_terms(new):
    n, m = new[1][0] - 1, new[1][1]
    return (n, m), _x(n - 1, m), [_x(n - 1, m + 1), _x(n + 1, m - 1)], [_x(n, m), _x(n, m)]


def _pi_terms(new):
    n = new[1][0] - 4
    return (n,), _x(n), [_x(n + 2), _x(n + 2)], [_x(n + 3), _x(n + 1)]


def _pii_terms(new):
    n = new[1][0] - 5
    return (n,), _x(n), [_x(n + 2), _x(n + 3)], [_x(n + 4), _x(n + 1)]


def _piii_terms(new):
    s = new[0]
    t = "x" if s == "w" else "w"
    n = new[1][0] - 3
    # w_{n+3} x_n = x_{n+2} w_{n+1} + w_{n+2} x_{n+1} and the swap
    return ((s, n), lab(t, n), [lab(s, n + 1), lab(t, n + 2)], [lab(t, n + 1), lab(s, n + 2)])


# new letter -> (partner letter, out letters, in letters) at n+1
_PVI_TERMS = {
    "w": ("X", ("x", "W"), ("w", "X")),
    "x": ("W", ("w", "X"), ("x", "W")),
    "W": ("x", ("X", "w"), ("W", "x")),
    "X": ("w", ("W", "x"), ("X", "w")),
}


def _pvi_terms(new):
    s = new[0]
    n = new[1][0] - 2
    partner, out, in_ = _PVI_TERMS[s]
    return ((s, n), lab(partner, n), [lab(c, n + 1) for c in out], [lab(c, n + 1) for c in in_])


_TERMS: dict[str, Callable] = {
    "dKdV": _kdv_terms, "HM": _hm_terms, "dmKdV": _mkdv_terms, "dToda": _toda_terms,
    "qPI": _pi_terms, "qPII": _pii_terms, "qPIII": _piii_terms, "qPVI": _pvi_terms,
}

_EQUATION_NAMES = {
    "dKdV": "discrete KdV", "HM": "Hirota-Miwa", "dmKdV": "discrete mKdV", "dToda": "discrete Toda",
    "qPI": "q-PI bilinear", "qPII": "q-PII bilinear", "qPIII": "q-PIII bilinear", "qPVI": "q-PVI bilinear",
}


def bilinear_terms(family: str, new: Label):
    """``(index, partner, out_labels, in_labels)`` of the bilinear equation
    whose left side is ``new * partner``, or None for families without one."""
    f = _TERMS.get(family)
    return None if f is None else f(new)


def _prod(values):
    out = Fraction(1)
    for v in values:
        out = out * v
    return out


def _family_of(model) -> str:
    return model.family if isinstance(model, Model) else str(model)


def check_bilinear(model: Model, traj: Trajectory) -> VerificationReport:
    """Check the coefficient-free bilinear equation at every produced label
    whose partners are all recorded."""
    fam = model.family
    rep = VerificationReport(_EQUATION_NAMES.get(fam, "bilinear"), model.name)
    if fam not in _TERMS:
        rep.warnings.append(f"no bilinear equation for {fam}")
        return rep.finish()
    for step in traj.steps:
        new = step.new_label
        idx, partner, out, in_ = bilinear_terms(fam, new)
        need = [partner, *out, *in_]
        missing = [L for L in need if L not in traj.x]
        if missing:
            rep.skip(idx, f"missing label {label_str(missing[0])}")
            continue
        x = traj.x
        rep.add(idx, x[new] * x[partner], _prod(x[L] for L in out) + _prod(x[L] for L in in_))
    return rep.finish()


def check_bilinear_with_coefficients(model: Model, traj: Trajectory) -> VerificationReport:
    """Nonautonomous bilinear form ``new * old = b * out + a * in`` with the
    recorded per-step weights, plus ``a + b = 1``."""
    fam = model.family
    rep = VerificationReport(_EQUATION_NAMES.get(fam, "bilinear") + " with coefficients", model.name)
    if fam not in _TERMS:
        rep.warnings.append(f"no bilinear equation for {fam}")
        return rep.finish()
    for step in traj.steps:
        old, new = step.old_label, step.new_label
        if old not in traj.ab:
            rep.skip(label_str(old), "no recorded coefficients")
            continue
        a, b = traj.ab[old]
        idx, partner, out, in_ = bilinear_terms(fam, new)
        rep.add(idx, a + b, Fraction(1), "a+b")
        if partner != old:
            rep.add(idx, label_str(partner), label_str(old), "partner")
            continue
        missing = [L for L in (*out, *in_) if L not in traj.x]
        if missing:
            rep.skip(idx, f"missing label {label_str(missing[0])}")
            continue
        x = traj.x
        rep.add(idx, x[new] * x[old], b * _prod(x[L] for L in out) + a * _prod(x[L] for L in in_), "identity")
    return rep.finish()


# ---------------------------------------------------------------------------
# Painleve checks


def _as_sequences(data) -> dict:
    if isinstance(data, Trajectory):
        return coefficient_sequences(data)
    if isinstance(data, dict):
        return {k: dict(enumerate(v)) if isinstance(v, (list, tuple)) else v for k, v in data.items()}
    return {"y": dict(enumerate(data))}


def _indices(seqs: dict) -> range:
    hi = min((max(s) for s in seqs.values() if s), default=-1)
    return range(hi + 1)


def _split_rhs(fam: str, n: int, f, g, k: dict):
    """Two-component forms in ``f_n = y_{2n}``, ``g_n = y_{2n+1}``:
    returns ``(f_{n+1} f_n rhs, g_n g_{n-1} rhs)``, each unsquared."""
    c1 = k["c1"]
    gn, fn = as_surd(g), as_surd(f)
    if fam == "qPII":
        c2c3 = (k["c2^2"] * k["c3^2"]).sqrt_positive()
        c2_c3 = (k["c2^2"] / k["c3^2"]).sqrt_positive()
        return (c2_c3 * c1 ** (2 * n + 1) * (gn + 1) / gn,
                c2c3 * c1 ** (2 * n) * (fn + 1) / fn)
    if fam == "qPIII":
        pre = k["c2"] * k["c3^2"]
        return (pre * c1 ** (4 * n + 2) * (gn + 1) / (gn * (gn + k["c3/c4"] * c1 ** (2 * n + 1))),
                pre * c1 ** (4 * n) * (fn + 1) / (fn * (fn + k["c3c4"] * c1 ** (2 * n))))
    if fam == "qPVI":
        c2 = k["c2"]
        pre = c2.inverse() * k["c3^2"] * k["c5^2"]
        odd = c2 / (k["c3/c4"] * k["c5/c6"])
        even = c2 / (k["c3c4"] * k["c5c6"])
        return (pre * c1 ** (4 * n + 2) * (gn + 1) * (odd * gn + 1)
                / ((gn + k["c3/c4"] * c1 ** (2 * n + 1)) * (gn + k["c5/c6"] * c1 ** (2 * n + 1))),
                pre * c1 ** (4 * n) * (fn + 1) * (even * fn + 1)
                / ((fn + k["c3c4"] * c1 ** (2 * n)) * (fn + k["c5c6"] * c1 ** (2 * n))))
    raise ModelError(f"no two-component form for {fam}")


def check_painleve(model, traj, parts: Sequence[str] = ("raw", "equation", "monitors", "split"),
                   reference: int = 0) -> VerificationReport:
    """Coefficient dynamics of a Painleve model.

    ``traj`` is a coefficient trajectory, a ``{letter: {n: value}}`` map or
    a plain ``y`` list.  Parts: ``raw`` (the closed recurrence for the
    coefficients), ``equation`` (constant form, squared where only squares
    of constants are fixed, constants taken at index ``reference``),
    ``monitors`` (auxiliary step laws) and ``split`` (even/odd form).
    """
    fam = _family_of(model)
    name = model.name if isinstance(model, Model) else fam
    rep = VerificationReport("Painleve equation", name)
    s = _as_sequences(traj)
    idx = _indices(s)

    if "raw" in parts:
        for n in idx:
            try:
                pred = raw_recurrence(fam, s, n)
            except MissingLabel as exc:
                rep.skip(("raw", n), f"missing label {exc.args[0]}")
                continue
            for c, (v, target) in sorted(pred.items()):
                if target in s.get(c, {}):
                    rep.add((c, target), s[c][target], v, "recurrence")
                else:
                    rep.skip((c, target), "beyond trajectory")

    try:
        k = painleve_constants(fam, conserved_quantities(fam, s, reference))
    except MissingLabel as exc:
        rep.warnings.append(f"trajectory too short for constants ({exc.args[0]})")
        return rep.finish()

    if "equation" in parts:
        for n in idx:
            if n == 0:
                continue
            try:
                rhs = painleve_rhs(fam, n, s, k)
            except MissingLabel as exc:
                rep.skip(("equation", n), f"missing label {exc.args[0]}")
                continue
            for c, (_, r, squared) in sorted(rhs.items()):
                seq = s[c]
                if n + 1 not in seq or n - 1 not in seq:
                    rep.skip((c, n), "beyond trajectory")
                    continue
                lhs = as_surd(seq[n + 1] * seq[n - 1])
                rep.add((c, n), lhs * lhs if squared else lhs, r, "equation")

    if "monitors" in parts:
        _check_monitors(rep, fam, s, idx, k)

    if "split" in parts and fam in ("qPII", "qPIII", "qPVI"):
        f, g = even_odd_split([s["y"][i] for i in idx if i in s["y"]])
        for n in range(len(f)):
            try:
                rf, rg = _split_rhs(fam, n, f[n], g[n], k)
            except IndexError:
                break
            if n + 1 < len(f):
                rep.add(("f", n), as_surd(f[n + 1] * f[n]) ** 2, rf * rf, "split")
            if n >= 1:
                rep.add(("g", n), as_surd(g[n] * g[n - 1]) ** 2, rg * rg, "split")
    return rep.finish()


def _check_monitors(rep, fam, s, idx, k):
    mons = {}
    for n in idx:
        try:
            mons[n] = proof_monitors(fam, s, n)
        except MissingLabel:
            break
    c1 = k["c1"]
    c1sq = c1 * c1
    # (name, lag, factor)
    laws = {
        "qPI": [("u", 1, 1), ("v", 1, c1)],
        "qPII": [("u", 1, 1), ("v", 2, c1sq)],
        "qPIII": [("u", 1, 1), ("v", 1, 1), ("t", 2, c1sq)],
        "qPVI": [("p", 1, c1sq), ("yz", 2, c1sq), ("yY", 2, c1sq)],
    }[fam]
    for n in sorted(mons):
        for name, lag, factor in laws:
            if n + lag in mons:
                rep.add((name, n), as_surd(mons[n + lag][name]), factor * as_surd(mons[n][name]), "monitor")


def check_conservation(model, traj) -> VerificationReport:
    """Every conserved quantity agrees with its value at ``n = 0`` at every
    computable index."""
    fam = _family_of(model)
    name = model.name if isinstance(model, Model) else fam
    rep = VerificationReport("conserved quantities", name)
    s = _as_sequences(traj)
    try:
        base = conserved_quantities(fam, s, 0)
    except MissingLabel as exc:
        rep.warnings.append(f"trajectory too short ({exc.args[0]})")
        return rep.finish()
    for n in _indices(s):
        if n == 0:
            continue
        try:
            cq = conserved_quantities(fam, s, n)
        except MissingLabel:
            rep.skip(n, "beyond trajectory")
            continue
        for c in base.values:
            rep.add((c, n), cq.values[c], base.values[c], c)
    return rep.finish()


def conserved_summary(model, traj) -> dict:
    """Values at ``n = 0`` (exact strings) of the conserved quantities."""
    cq = conserved_quantities(_family_of(model), _as_sequences(traj), 0)
    return {k: exact_str(v) for k, v in cq.values.items()}


# ---------------------------------------------------------------------------
# reductions


def _canon(label: Label, v: Sequence[int]) -> Label:
    """Representative of ``label`` modulo translations by ``v``."""
    c = list(label[1])
    j = next(i for i, t in enumerate(v) if t)
    q = c[j] // v[j]
    c = [a - q * b for a, b in zip(c, v)]
    return (label[0], tuple(c))


def periodic_initial_data(parent: Model, child: Model, v: Sequence[int], rng: random.Random | None = None):
    """Initial values for parent and child that agree on each class of
    labels modulo ``v``.  ``rng=None`` gives constant data."""
    spec = reduce_spec(parent.spec, v)
    to_parent = child.pedigree.to_parent
    classes = {}
    keys = sorted({spec.locate(L) for L in parent.labels} | {spec.locate(to_parent(L)) for L in child.labels})
    vals = random_positive_rationals(rng, len(keys)) if rng is not None else (Fraction(1),) * len(keys)
    classes = dict(zip(keys, vals))
    xp = tuple(classes[spec.locate(L)] for L in parent.labels)
    xc = tuple(classes[spec.locate(to_parent(L))] for L in child.labels)
    return xp, xc


def check_reduction_correspondence(parent: Model, child: Model, v: Sequence[int], sweeps: int = 2,
                                   parent_sweeps: int | None = None,
                                   rng: random.Random | None = None) -> VerificationReport:
    """Run the parent with ``v``-periodic data and the child from the
    matching seed; every child variable must equal each parent variable in
    its class modulo ``v``."""
    v = tuple(int(t) for t in v)
    rep = VerificationReport(f"reduction by ({','.join(map(str, v))})", f"{parent.name} -> {child.name}")
    if child.pedigree is None or child.pedigree.parent != parent.family or tuple(child.pedigree.vector) != v:
        raise ModelError(f"{child.name} is not recorded as {parent.name} / {v}")
    if parent.spec is None:
        raise ModelError("parent must be a lattice model")
    xp, xc = periodic_initial_data(parent, child, v, rng)
    tp = run_schedule(parent.seed(x=xp), parent.schedule, sweeps if parent_sweeps is None else parent_sweeps)
    tc = run_schedule(child.seed(x=xc), child.schedule, sweeps)
    by_class: dict = {}
    for L, val in tp.x.items():
        by_class.setdefault(_canon(L, v), []).append((L, val))
    for step in tc.steps:
        Lc = step.new_label
        key = _canon(child.pedigree.to_parent(Lc), v)
        hits = by_class.get(key)
        if not hits:
            rep.skip(Lc, "not produced inside the parent window")
            continue
        for Lp, val in hits:
            rep.add((Lc, Lp), tc.x[Lc], val)
    if not rep.entries:
        rep.warnings.append("parent window too small for the requested depth")
    return rep.finish()


# ---------------------------------------------------------------------------
# Laurent phenomenon


def check_laurent(model: Model, sweeps: int, depth_limit: int | None = None) -> VerificationReport:
    """Symbolic run: every division must be exact.  Each produced variable
    is reported with its term count and compared, at all ones, with the
    numeric run."""
    rep = VerificationReport("Laurent property", model.name)
    kw = {} if depth_limit is None else {"depth_limit": depth_limit}
    try:
        sym = run_schedule(model.seed(symbolic=True), model.schedule, sweeps, **kw)
    except NonExactDivision as exc:
        rep.add("division", str(exc), "exact", "division")
        return rep.finish()
    num = run_schedule(model.seed(), model.schedule, sweeps)
    ones = {name: 1 for name in model.symbol_names()}
    for step in sym.steps:
        poly = sym.x[step.new_label]
        rep.details[label_str(step.new_label)] = len(poly.terms)
        rep.add(step.new_label, poly_eval(poly, ones), num.x[step.new_label], "at ones")
    return rep.finish()




# ---------------------------------------------------------------------------
# pedigrees


def pedigree_permutation(child: Model, reduced) -> tuple:
    """Vertex map child -> reduced motif induced by the stored label map."""
    to_parent = child.pedigree.to_parent
    return tuple(reduced.locate(to_parent(L))[0] for L in child.labels)


def check_pedigree(child: Model) -> VerificationReport:
    """Reduce the recorded parent and compare with the child quiver.

    Finite children are compared entry by entry of the arrow matrix after
    the permutation induced by the label map; lattice children stencil row
    by stencil row.
    """
    if child.pedigree is None:
        raise ModelError(f"{child.name} has no recorded pedigree")
    ped = child.pedigree
    rep = VerificationReport(f"pedigree {ped.describe()}", child.name)
    parent = make_model(ped.parent, *ped.parent_params) if ped.parent_params else make_model(ped.parent)
    reduced = reduce_spec(parent.spec, ped.vector)
    if child.finite:
        if reduced.rank:
            rep.add("rank", reduced.rank, 0, "rank")
            return rep.finish()
        R = reduced.finite_quiver()
        perm = pedigree_permutation(child, reduced)
        rep.details["permutation"] = [p + 1 for p in perm]
        if sorted(perm) != list(range(R.n)) or R.n != child.n:
            rep.add("labels", sorted(perm), list(range(R.n)), "bijection")
            return rep.finish()
        lam = child.quiver.lam
        for i in range(child.n):
            for j in range(child.n):
                rep.add((i + 1, j + 1), lam[i][j], R.lam[perm[i]][perm[j]], "arrows")
    else:
        problems = match_reduction(child.spec, reduced, ped.to_parent)
        rows = {f"arrows at {label_str(s)} ": s for s in child.spec.motif}
        seen = {}
        for p in problems:
            s = next((s for head, s in rows.items() if p.startswith(head)), None)
            if s is None:
                rep.add("motif", p, "consistent", "structure")
            else:
                seen[s] = p
        for s in child.spec.motif:
            rep.add(s, seen.get(s, "match"), "match", "stencil row")
    return rep.finish()
