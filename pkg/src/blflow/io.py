"""Problem files: a single JSON document describing one reproducible run.

Canonical formatting is fixed (key order, two-space indent, shortest
round-trip float repr) so that parse -> serialize is byte-stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import StructuralError
from .heatflow import Box, GaussianProfile, Profile, SumOfBoxes
from .model import BellmanSpec, Exponents, VectorSystem


@dataclass(frozen=True)
class Problem:
    system: VectorSystem
    exponents: Exponents | None
    B: BellmanSpec | None
    profiles: tuple[Profile, ...] | None
    C: np.ndarray | None
    seed: int = 0
    tolerances: dict = field(default_factory=dict)


def _parse_B(doc, n: int) -> BellmanSpec:
    variant = doc.get("variant")
    if variant == "young":
        return BellmanSpec.young(doc["alpha"])
    if variant == "product":
        return BellmanSpec.product(doc.get("M", 1.0), doc.get("n", n))
    if variant == "lifted":
        sv = doc.get("section_vars")
        return BellmanSpec.lifted(doc["phi"], doc.get("alpha", ()),
                                  section_vars=tuple(sv) if sv else None,
                                  theta=doc.get("theta"))
    raise StructuralError(f"unknown B variant {variant!r}")


def _parse_profile(doc) -> Profile:
    kind = doc.get("type")
    if kind == "box":
        return Box(doc["lo"], doc["hi"], doc["height"])
    if kind == "gaussian":
        return GaussianProfile(doc["amplitude"], doc["center"], doc["variance"])
    if kind == "sum_of_boxes":
        return SumOfBoxes(tuple(Box(b["lo"], b["hi"], b["height"])
                                for b in doc["boxes"]))
    raise StructuralError(f"unknown profile type {kind!r}")


def parse_problem(text: str) -> Problem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StructuralError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise StructuralError("problem file must be a JSON object")
    try:
        k, n = int(doc["k"]), int(doc["n"])
        A = np.asarray(doc["A"], dtype=float)
    except KeyError as exc:
        raise StructuralError(f"missing required field {exc}") from exc
    if A.shape != (k, n):
        raise StructuralError(f"A must be a {k}x{n} row-major array, got shape {A.shape}")
    system = VectorSystem(A)
    e = Exponents(doc["inv_p"]) if "inv_p" in doc else None
    if e is not None and e.n != n:
        raise StructuralError("inv_p length differs from n")
    B = _parse_B(doc["B"], n) if "B" in doc else None
    if B is not None and B.n != n:
        raise StructuralError("B has the wrong number of variables")
    profiles = None
    if "profiles" in doc:
        profiles = tuple(_parse_profile(p) for p in doc["profiles"])
        if len(profiles) != n:
            raise StructuralError("need one profile per column of A")
    C = None
    if "C" in doc:
        C = np.asarray(doc["C"], dtype=float)
        if C.shape != (k, k):
            raise StructuralError("C must be k x k")
    return Problem(system=system, exponents=e, B=B, profiles=profiles, C=C,
                   seed=int(doc.get("seed", 0)),
                   tolerances=dict(doc.get("tolerances", {})))


def _B_doc(B: BellmanSpec):
    if B.variant == "young":
        return {"variant": "young", "alpha": B.weights.tolist()}
    if B.variant == "product":
        return {"variant": "product", "M": B.coeff, "n": B.n}
    alpha = [float(B.weights[j]) for j in range(B.n) if j not in B.section_vars]
    return {"variant": "lifted",
            "phi": "sqrt_uv" if B.theta == 0.5 else "geomean",
            "alpha": alpha,
            "section_vars": list(B.section_vars),
            "theta": B.theta}


def _profile_doc(p: Profile):
    if isinstance(p, Box):
        return {"type": "box", "lo": p.lo, "hi": p.hi, "height": p.height}
    if isinstance(p, GaussianProfile):
        return {"type": "gaussian", "amplitude": p.amplitude,
                "center": p.center, "variance": p.variance}
    return {"type": "sum_of_boxes",
            "boxes": [{"lo": b.lo, "hi": b.hi, "height": b.height} for b in p.boxes]}


def serialize_problem(problem: Problem) -> str:
    """Canonical byte-stable serialization of a problem."""
    doc: dict = {
        "k": problem.system.k,
        "n": problem.system.n,
        "A": problem.system.A.tolist(),
    }
    if problem.exponents is not None:
        doc["inv_p"] = problem.exponents.inv_p.tolist()
    if problem.B is not None:
        doc["B"] = _B_doc(problem.B)
    if problem.profiles is not None:
        doc["profiles"] = [_profile_doc(p) for p in problem.profiles]
    if problem.C is not None:
        doc["C"] = problem.C.tolist()
    doc["seed"] = problem.seed
    if problem.tolerances:
        doc["tolerances"] = problem.tolerances
    return json.dumps(doc, indent=2) + "\n"
