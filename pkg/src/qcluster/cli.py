"""Command-line interface: ``qcluster list|run|verify|reduce``."""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .arith import exact_str
from .lattice import LatticeError, label_str, reduce as reduce_spec
from .models import (
    PAINLEVE,
    Model,
    ModelError,
    catalog,
    make_model,
    random_positive_rationals,
)
from .quiver import find_isomorphism
from .seed import DEFAULT_DEPTH_LIMIT, DepthLimitExceeded, run_schedule
from .verify import (
    check_bilinear,
    check_bilinear_with_coefficients,
    check_conservation,
    check_laurent,
    check_painleve,
    check_pedigree,
    check_reduction_correspondence,
    conserved_summary,
)

RNG_NAME = "random.Random (Mersenne Twister)"

# parent windows wide enough for the reduction checks at moderate depth
_PARENT_WINDOWS = {"HM": (6, 6), "dKdV": (48,), "dmKdV": (48,), "dToda": (48,)}


@dataclass
class RunConfig:
    model: str
    N: int | None = None
    M: int | None = None
    window: str | None = None
    sweeps: int = 4
    mode: str = "ones"  # ones | random | file
    random_seed: int | None = None
    x_file: str | None = None
    coeffs: tuple | None = None
    random_coeffs: bool = False
    symbolic: bool = False
    outputs: dict = field(default_factory=dict)

    def build(self) -> Model:
        return make_model(self.model, self.N, self.M, self.window)

    def header(self) -> list[str]:
        lines = [f"# model: {self.model}" + _params(self)]
        if self.mode == "random":
            lines.append(f"# initial data: random p/q, p,q uniform in [1,20], seed {self.random_seed} ({RNG_NAME})")
        elif self.mode == "file":
            lines.append(f"# initial data: file {self.x_file}")
        elif self.symbolic:
            lines.append("# initial data: symbolic")
        else:
            lines.append("# initial data: all ones")
        if self.coeffs is not None:
            lines.append("# coefficients: " + ",".join(exact_str(c) for c in self.coeffs))
        elif self.random_coeffs:
            lines.append("# coefficients: random (same generator)")
        lines.append(f"# sweeps: {self.sweeps}")
        return lines


def _params(cfg) -> str:
    parts = []
    if cfg.N is not None:
        parts.append(f"N={cfg.N}")
    if cfg.M is not None:
        parts.append(f"M={cfg.M}")
    if cfg.window is not None:
        parts.append(f"window={cfg.window}")
    return (" " + " ".join(parts)) if parts else ""


def _fraction_list(text: str) -> tuple:
    try:
        return tuple(Fraction(t.strip()) for t in text.split(",") if t.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad rational list {text!r}") from exc


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad integer vector {text!r}") from exc


def _initial_values(cfg: RunConfig, model: Model, rng):
    if cfg.mode == "random":
        return random_positive_rationals(rng, model.n)
    if cfg.mode == "file":
        vals = _fraction_list(Path(cfg.x_file).read_text().replace("\n", ","))
        if len(vals) != model.n:
            raise ModelError(f"{cfg.x_file} has {len(vals)} values, {model.name} needs {model.n}")
        return vals
    return (Fraction(1),) * model.n


def _seed(cfg: RunConfig, model: Model):
    rng = random.Random(cfg.random_seed) if cfg.random_seed is not None else None
    if cfg.symbolic:
        if cfg.coeffs is not None or cfg.random_coeffs:
            raise ModelError("symbolic mode is coefficient-free")
        return model.seed(symbolic=True)
    if (cfg.mode == "random" or cfg.random_coeffs) and rng is None:
        raise ModelError("random data needs --random-seed")
    x = _initial_values(cfg, model, rng)
    coeffs = cfg.coeffs
    if cfg.random_coeffs:
        coeffs = random_positive_rationals(rng, model.n)
    if coeffs is None:
        return model.seed(x=x)
    if len(coeffs) != model.n:
        raise ModelError(f"{model.name} needs {model.n} coefficients, got {len(coeffs)}")
    if model.finite:
        return model.seed(x=x, plain=coeffs)
    return model.seed(x=x, y=coeffs)


def coefficient_window(model: Model, seed, sweeps: int) -> list:
    """Plain coefficients carried by the seed after ``sweeps`` steps: the
    values recorded during the following ``len(batches)`` steps."""
    P = len(model.schedule.batches)
    traj = run_schedule(seed, model.schedule, sweeps + P)
    return [(s.coef_label, s.coef_value) for s in traj.steps if sweeps <= s.time < sweeps + P]


def _write_outputs(cfg: RunConfig, model: Model, traj, out):
    o = cfg.outputs
    if o.get("csv"):
        Path(o["csv"]).write_text("\n".join(cfg.header()) + "\n" + traj.to_csv())
        print(f"wrote {o['csv']}", file=out)
    if o.get("json"):
        obj = {"config": cfg.header(), "model": model.to_json_obj(), "trajectory": traj.to_json_obj()}
        Path(o["json"]).write_text(json.dumps(obj, indent=2) + "\n")
        print(f"wrote {o['json']}", file=out)
    if o.get("quiver"):
        Path(o["quiver"]).write_text(model.quiver.to_json() + "\n")
        print(f"wrote {o['quiver']}", file=out)
    if o.get("dot"):
        Path(o["dot"]).write_text(model.quiver.to_dot([label_str(L) for L in model.labels]))
        print(f"wrote {o['dot']}", file=out)


def cmd_run(cfg: RunConfig, out=sys.stdout) -> int:
    model = cfg.build()
    seed = _seed(cfg, model)
    traj = run_schedule(seed, model.schedule, cfg.sweeps)
    for line in cfg.header():
        print(line, file=out)
    if model.finite and not cfg.symbolic:
        for letter in sorted({L[0] for L in model.labels}, key="wxWX".index):
            seq = traj.x_sequence(letter)
            print(f"{letter}: " + ",".join(exact_str(seq[k]) for k in sorted(seq)), file=out)
    else:
        for step in traj.steps:
            print(f"{label_str(step.new_label)} = {exact_str(step.value)}", file=out)
    if traj.y:
        print("coefficients at mutation: " + ", ".join(f"{label_str(L)}={exact_str(v)}"
                                                       for L, v in traj.y.items()), file=out)
    if seed.y is not None and model.finite:
        win = coefficient_window(model, seed, cfg.sweeps)
        print("coefficient window: " + ", ".join(f"{label_str(L)}={exact_str(v)}" for L, v in win), file=out)
    reasons: dict = {}
    for _, _, _, why in traj.skipped:
        reasons[why] = reasons.get(why, 0) + 1
    print(f"mutations: {len(traj.steps)}", file=out)
    for why, c in sorted(reasons.items()):
        print(f"skipped {c}: {why}", file=out)
    _write_outputs(cfg, model, traj, out)
    return 0


IDENTITIES = ("bilinear", "coefficients", "painleve", "conservation", "laurent", "reduction", "pedigree")


def _parent_model(model: Model) -> Model:
    ped = model.pedigree
    return make_model(ped.parent, *ped.parent_params, window=_PARENT_WINDOWS[ped.parent])


def cmd_verify(cfg: RunConfig, identities, out=sys.stdout, verbose: bool = False) -> int:
    model = cfg.build()
    painleve = model.family in PAINLEVE
    if "all" in identities:
        identities = [i for i in IDENTITIES
                      if (i not in ("painleve", "conservation") or painleve)
                      and (i not in ("reduction", "pedigree") or model.pedigree is not None)]
    rng = random.Random(cfg.random_seed) if cfg.random_seed is not None else None
    if cfg.mode == "random" and rng is None:
        raise ModelError("random data needs --random-seed")

    def data(k):
        return random_positive_rationals(rng, k) if rng is not None else (Fraction(1),) * k

    for line in cfg.header():
        print(line, file=out)
    x0 = data(model.n)
    reports = []
    for ident in identities:
        if ident == "bilinear":
            traj = run_schedule(model.seed(x=x0), model.schedule, cfg.sweeps)
            reports.append(check_bilinear(model, traj))
        elif ident == "coefficients":
            y0 = cfg.coeffs or data(model.n)
            seed = model.seed(x=x0, plain=y0) if model.finite else model.seed(x=x0, y=y0)
            reports.append(check_bilinear_with_coefficients(model, run_schedule(seed, model.schedule, cfg.sweeps)))
        elif ident in ("painleve", "conservation"):
            if not painleve:
                raise ModelError(f"{ident} checks need a Painleve model, not {model.name}")
            y0 = cfg.coeffs or data(model.n)
            traj = run_schedule(model.seed(x=x0, plain=y0), model.schedule, cfg.sweeps)
            if ident == "painleve":
                reports.append(check_painleve(model, traj))
            else:
                rep = check_conservation(model, traj)
                try:
                    rep.details.update(conserved_summary(model, traj))
                except KeyError:
                    pass
                reports.append(rep)
        elif ident == "laurent":
            sweeps = cfg.sweeps
            if sweeps > DEFAULT_DEPTH_LIMIT:
                if "laurent" in identities and len(identities) == 1:
                    raise DepthLimitExceeded(f"symbolic runs are limited to {DEFAULT_DEPTH_LIMIT} sweeps")
                print(f"# laurent: symbolic run limited to {DEFAULT_DEPTH_LIMIT} sweeps", file=out)
                sweeps = DEFAULT_DEPTH_LIMIT
            reports.append(check_laurent(model, sweeps))
        elif ident == "reduction":
            if model.pedigree is None:
                raise ModelError(f"{model.name} has no recorded pedigree")
            reports.append(check_reduction_correspondence(_parent_model(model), model, model.pedigree.vector,
                                                          min(cfg.sweeps, 8), rng=rng))
        elif ident == "pedigree":
            reports.append(check_pedigree(model))
    for rep in reports:
        print(rep.to_text(verbose=verbose), file=out)
    ok = all(r.ok for r in reports)
    print("overall: " + ("PASS" if ok else "FAIL"), file=out)
    if cfg.outputs.get("json"):
        Path(cfg.outputs["json"]).write_text(json.dumps([r.to_json_obj() for r in reports], indent=2) + "\n")
    return 0 if ok else 1


def _known_children(family: str, params: tuple, v: tuple) -> list[Model]:
    return [m for m in catalog() if m.pedigree is not None and m.pedigree.parent == family
            and tuple(m.pedigree.parent_params) == params and tuple(m.pedigree.vector) == v]


def cmd_reduce(model_name: str, N, M, v: tuple, out=sys.stdout, json_path=None, dot_path=None) -> int:
    parent = make_model(model_name, N, M)
    if not any(v):
        raise ModelError("reduction vector must be nonzero")
    try:
        reduced = reduce_spec(parent.spec, v)
    except LatticeError as exc:
        raise ModelError(str(exc)) from exc
    vec = ",".join(map(str, v))
    print(f"reduced {parent.name} by ({vec}): {len(reduced.motif)} vertex classes, rank {reduced.rank}", file=out)
    match = None
    for child in _known_children(parent.family, parent.params, v):
        rep = check_pedigree(child)
        if rep.ok:
            match = child
            perm = rep.details.get("permutation")
            extra = f" via permutation ({','.join(map(str, perm))})" if perm else ""
            print(f"≅ {child.name}{extra}", file=out)
    if match is None and reduced.rank == 0:
        R = reduced.finite_quiver()
        for name in PAINLEVE:
            child = make_model(name)
            if child.n == R.n and find_isomorphism(child.quiver, R) is not None:
                match = child
                print(f"≅ {child.name} (up to relabeling)", file=out)
    if match is None:
        print("no known model matches", file=out)
    if reduced.rank == 0:
        R = reduced.finite_quiver()
        print(R.to_json(), file=out)
        if dot_path:
            Path(dot_path).write_text(R.to_dot([label_str(L) for L in reduced.motif]))
    if json_path:
        Path(json_path).write_text(json.dumps(reduced.to_json_obj(), indent=2) + "\n")
    return 0


def cmd_list(as_json: bool = False, out=sys.stdout) -> int:
    models = catalog()
    if as_json:
        print(json.dumps([m.to_json_obj() for m in models], indent=2), file=out)
    else:
        for m in models:
            print(m.catalog_line(), file=out)
    return 0


def _add_model_args(p):
    p.add_argument("model")
    p.add_argument("--N", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--window", help="chain site count (6x4 = 24) or plane cells like 4x4")


def _add_data_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--ones", action="store_true", help="all initial variables 1 (default)")
    g.add_argument("--x-file", help="file of initial values, comma or newline separated")
    p.add_argument("--random-seed", type=int, help="seed for random p/q data, p,q in [1,20]")
    p.add_argument("--coeffs", type=_fraction_list, help="coefficients, e.g. 1,2,3,4")
    p.add_argument("--sweeps", type=int, default=4)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qcluster", description="Cluster mutation dynamics of discrete integrable systems")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("list", help="list the model catalog")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("run", help="run a mutation schedule")
    _add_model_args(p)
    _add_data_args(p)
    p.add_argument("--random-coeffs", action="store_true")
    p.add_argument("--symbolic", action="store_true")
    p.add_argument("--csv")
    p.add_argument("--json")
    p.add_argument("--quiver-json")
    p.add_argument("--dot")

    p = sub.add_parser("verify", help="check identities on a run")
    _add_model_args(p)
    _add_data_args(p)
    for ident in ("all", *IDENTITIES):
        p.add_argument(f"--{ident}", action="store_true")
    p.add_argument("--json")
    p.add_argument("--verbose", "-v", action="store_true")

    p = sub.add_parser("reduce", help="reduce a lattice quiver by a translation")
    p.add_argument("model")
    p.add_argument("--N", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--v", type=_int_list, required=True)
    p.add_argument("--json")
    p.add_argument("--dot")
    return ap


def _config(a) -> RunConfig:
    if a.sweeps < 0:
        raise ModelError("--sweeps must be nonnegative")
    if a.x_file:
        mode = "file"
    elif a.random_seed is not None and not a.ones:
        mode = "random"
    else:
        mode = "ones"
    return RunConfig(a.model, a.N, a.M, a.window, a.sweeps, mode, a.random_seed, a.x_file, a.coeffs,
                     getattr(a, "random_coeffs", False), getattr(a, "symbolic", False),
                     {"csv": getattr(a, "csv", None), "json": a.json,
                      "quiver": getattr(a, "quiver_json", None), "dot": getattr(a, "dot", None)})


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    # exact values of long runs easily exceed the default 4300-digit cap
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)
    a = build_parser().parse_args(argv)
    try:
        if a.cmd == "list":
            return cmd_list(a.json, out)
        if a.cmd == "run":
            return cmd_run(_config(a), out)
        if a.cmd == "verify":
            chosen = [i for i in ("all", *IDENTITIES) if getattr(a, i)] or ["all"]
            return cmd_verify(_config(a), chosen, out, a.verbose)
        if a.cmd == "reduce":
            return cmd_reduce(a.model, a.N, a.M, a.v, out, a.json, a.dot)
    except (ModelError, LatticeError, DepthLimitExceeded, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
