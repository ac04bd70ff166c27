"""On-disk form of constructed instances.

A written instance directory holds:

* ``instance.json``   -- formula, mode, matrix, sizes, layer schedule;
* ``pattern.perm`` / ``text.perm`` -- the two permutations, one-line form;
* ``provenance.json`` -- per-family map from (cell, point index in tile)
  to permutation position (1-based).

The geometry itself is reproducible: rebuilding from the formula and mode
is deterministic, so verification reconstructs and compares byte-wise.
"""

from __future__ import annotations

import json
import os
from typing import Dict

from ..entries import format_entry, parse_entry
from ..grid import format_matrix_json, parse_matrix_json
from ..perm import format_perm
from .builder import (Formula3CNF, ReductionInstance, ReductionError,
                      reduce_formula)

__all__ = ["write_instance", "read_instance_summary", "rebuild_instance"]


def _instance_payload(inst: ReductionInstance) -> Dict:
    return {
        "formula": {"nvars": inst.formula.nvars,
                    "clauses": [list(c) for c in inst.formula.clauses]},
        "mode": inst.mode,
        "matrix": json.loads(format_matrix_json(inst.path.matrix)),
        "box_bound": [inst.box_bound.numerator, inst.box_bound.denominator],
        "sizes": inst.sizes,
        "layers": [list(l) for l in inst.layers],
        "d_used": inst.d_used,
        "path_cells": [list(c) for c in inst.path.cells],
        "bucket_entry": (format_entry(inst.bucket_entry)
                         if inst.bucket_entry is not None else None),
    }


def write_instance(inst: ReductionInstance, directory: str) -> None:
    if inst.counting_only:
        raise ReductionError("counting instances carry no geometry")
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "instance.json"), "w") as fh:
        json.dump(_instance_payload(inst), fh, indent=1)
        fh.write("\n")
    with open(os.path.join(directory, "pattern.perm"), "w") as fh:
        fh.write(format_perm(inst.pattern) + "\n")
    with open(os.path.join(directory, "text.perm"), "w") as fh:
        fh.write(format_perm(inst.text) + "\n")
    prov = {}
    for fam, name in (("P", "pattern"), ("T", "text")):
        prov[name] = {f"{i},{j}:{idx}": pos
                      for ((i, j), idx), pos in sorted(inst.prov[fam].items())}
    with open(os.path.join(directory, "provenance.json"), "w") as fh:
        json.dump(prov, fh, indent=1)
        fh.write("\n")


def read_instance_summary(directory: str) -> Dict:
    """The instance.json payload, with the formula and matrix parsed."""
    with open(os.path.join(directory, "instance.json")) as fh:
        data = json.load(fh)
    data["formula_obj"] = Formula3CNF(
        data["formula"]["nvars"],
        tuple(tuple(c) for c in data["formula"]["clauses"]))
    data["matrix_obj"] = parse_matrix_json(json.dumps(data["matrix"]))
    be = data.get("bucket_entry")
    data["bucket_entry_obj"] = parse_entry(be) if be else None
    return data


def rebuild_instance(summary: Dict) -> ReductionInstance:
    """Re-run the construction from a stored summary.

    The builder is deterministic, so the rebuilt instance carries the
    full geometry (trace, provenance, tiles) the files do not."""
    return reduce_formula(summary["formula_obj"], mode=summary["mode"],
                          matrix=summary["matrix_obj"],
                          bucket_entry=summary.get("bucket_entry_obj"))
