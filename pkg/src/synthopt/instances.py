"""Reading and writing instance documents.

Partition: ``{"type": "partition", "weights": [...]}``.
TSP: ``{"type": "tsp", "n": N, "matrix": [[...]], "forbidden": [[i, j], ...]}``
or the Euclidean form ``{"type": "tsp", "points": [[x, y], ...]}``.
"""
from __future__ import annotations

import json
from pathlib import Path

from synthopt.partition import PartitionError, PartitionInstance
from synthopt.tsp import TspError, TspInstance


class InstanceError(ValueError):
    pass


def parse_instance(doc) -> PartitionInstance | TspInstance:
    if not isinstance(doc, dict):
        raise InstanceError("instance: expected a JSON object")
    kind = doc.get("type")
    try:
        if kind == "partition":
            weights = doc.get("weights")
            if not isinstance(weights, list):
                raise InstanceError("weights: expected a list of numbers")
            return PartitionInstance.from_numbers(weights)
        if kind == "tsp":
            forbidden = doc.get("forbidden", [])
            if not isinstance(forbidden, list):
                raise InstanceError("forbidden: expected a list of node pairs")
            if "points" in doc:
                inst = TspInstance.from_points(doc["points"], forbidden)
            elif "matrix" in doc:
                matrix = doc["matrix"]
                if not isinstance(matrix, list) or not all(isinstance(r, list) for r in matrix):
                    raise InstanceError("matrix: expected a list of rows")
                inst = TspInstance.from_matrix(matrix, forbidden)
            else:
                raise InstanceError("matrix: missing (or give points)")
            if "n" in doc and doc["n"] != inst.n:
                raise InstanceError(f"n: declared {doc['n']} but the matrix has {inst.n} rows")
            return inst
    except (PartitionError, TspError) as exc:
        raise InstanceError(str(exc)) from None
    except (TypeError, ValueError) as exc:
        raise InstanceError(f"{kind}: {exc}") from None
    raise InstanceError(f"type: expected 'partition' or 'tsp', got {kind!r}")


def load_instance(path) -> PartitionInstance | TspInstance:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"instance: not valid JSON ({exc})") from None
    return parse_instance(doc)


def instance_to_doc(inst: PartitionInstance | TspInstance) -> dict:
    if isinstance(inst, PartitionInstance):
        return {"type": "partition", "weights": list(inst.weights)}
    return {
        "type": "tsp",
        "n": inst.n,
        "matrix": [list(row) for row in inst.dist],
        "forbidden": sorted([list(e) for e in inst.forbidden]),
    }
