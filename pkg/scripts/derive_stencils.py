"""Regenerate the shipped lattice stencils in src/qcluster/data/.

Each stencil is derived from its family's exchange relation, checked for
stability against a larger derivation window, and written as JSON.
"""

import argparse
import json
from pathlib import Path

from qcluster.lattice import SURFACES, derive_stencil

SHIPPED = [
    ("HM", (1,)), ("HM", (2,)), ("HM", (3,)),
    ("dKdV", (1, 1)), ("dKdV", (2, 1)), ("dKdV", (3, 1)), ("dKdV", (2, 2)), ("dKdV", (3, 2)),
    ("dmKdV", (1, 1)), ("dmKdV", (2, 1)), ("dmKdV", (3, 1)), ("dmKdV", (3, 2)),
    ("dToda", ()),
]


def stencil_name(family, params):
    return "_".join([family, *map(str, params)])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parents[1] / "src/qcluster/data")
    ap.add_argument("--margin", type=int, default=4)
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    for family, params in SHIPPED:
        motif, periods = SURFACES[family](*params)
        name = stencil_name(family, params)
        spec = derive_stencil(name, family, motif, periods, margin=args.margin)
        check = derive_stencil(name, family, motif, periods, margin=args.margin + 2)
        if spec.stencil != check.stencil:
            raise SystemExit(f"{name}: stencil not stable under window growth")
        obj = spec.to_json_obj()
        obj["meta"]["params"] = list(params)
        (args.out / f"{name}.json").write_text(json.dumps(obj, indent=1) + "\n")
        print(f"{name}: {len(motif)} motif sites, {len(spec.stencil)} stencil entries")


if __name__ == "__main__":
    main()
