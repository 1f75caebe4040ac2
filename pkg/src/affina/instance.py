"""Instance documents: parsing, validation and the analyses run on them."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .algebra import (
    AlgebraError,
    Congruence,
    FiniteAlgebra,
    check_guardrails,
    is_homomorphism,
    parse_identity,
    parse_term,
)
from .cohomology import CohomologyError, cohomology_group, equivalent, zero_cocycle
from .datum import AffineDatum, Extension, cocycle_from_lifting, reconstruct, semidirect
from .modexp import (
    ExpandedModule,
    ModuleError,
    ModuleExtension,
    NaWellsError,
    check_exactness_thm4,
    module_identities,
)
from .wells import WellsError, central_simplification, check_exactness_thm2, thm3_decompose

ANALYSES = ("datum", "cohomology", "wells", "decompose", "central", "modexp")


class InputError(ValueError):
    """The instance document is malformed; the message names the location."""


@dataclass
class Instance:
    ident: str
    description: str
    extension: Extension
    m: object
    identities: list
    lifting: tuple | None
    analyses: list
    module: ModuleExtension | None = None
    _datum: AffineDatum | None = field(default=None, repr=False)
    _H: object = field(default=None, repr=False)

    def datum(self) -> AffineDatum:
        if self._datum is None:
            self._datum = AffineDatum(self.extension, self.m, self.lifting)
        return self._datum

    def cohomology(self, force=False):
        if self._H is None:
            self._H = cohomology_group(self.datum(), self.identities, force=force)
        return self._H


def _require(doc, key, where):
    if key not in doc:
        raise InputError(f"missing field {where}{key!r}")
    return doc[key]


def parse_instance(doc: Mapping, default_id: str = "instance") -> Instance:
    if not isinstance(doc, Mapping):
        raise InputError("instance must be a JSON object")
    ident = doc.get("id", default_id)
    analyses = list(doc.get("analyses", ANALYSES))
    for a in analyses:
        if a not in ANALYSES:
            raise InputError(f"unknown analysis {a!r} at analyses")
    try:
        if "module" in doc:
            mod = doc["module"]
            M = ExpandedModule.from_dict(mod)
            X = ModuleExtension(M, _require(mod, "ideal", "module."))
            A = X.A
            E = Extension(A, X.alpha, X.Q, tuple(X.pi))
            base = module_identities(M)
        else:
            X = None
            A = FiniteAlgebra.from_dict(_require(doc, "algebra", ""))
            classes = _require(doc, "congruence", "")
            alpha = Congruence.from_classes(A.size, classes)
            if not alpha.is_compatible(A):
                raise InputError("congruence is not compatible with the operations")
            E = Extension.of(A, alpha)
            base = []
        idents = base + [parse_identity(s, A.signature) for s in doc.get("identities", [])]
        m = doc.get("m")
        if isinstance(m, str):
            m = parse_term(m, A.signature)
        elif m is None:
            from .datum import find_difference_term

            m = find_difference_term(E)
            if m is None:
                raise InputError("no m given and no ternary term of depth <= 3 works")
        lifting = doc.get("lifting")
        if lifting is not None:
            lifting = tuple(int(x) for x in lifting)
    except (AlgebraError, ModuleError) as exc:
        raise InputError(str(exc)) from None
    return Instance(ident, doc.get("description", ""), E, m, idents, lifting, analyses, X)


def load_instance(path) -> Instance:
    p = Path(path)
    try:
        doc = json.loads(p.read_text())
    except OSError as exc:
        raise InputError(f"cannot read {p}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_instance(doc, p.stem)


# ----------------------------------------------------------------- analyses


def run_datum(inst: Instance, force=False) -> dict:
    D = inst.datum()
    T = cocycle_from_lifting(D, D.lifting)
    AT = reconstruct(D, T)
    g = D.gamma.tolist()
    clauses = {
        "fibre_groups": D.fiber_groups_ok(),
        "semidirect_is_quotient": semidirect(D) == D.S,
        "round_trip": is_homomorphism(inst.extension.A, AT, g) and len(set(g)) == D.size,
    }
    return {
        "sizes": {"A": inst.extension.A.size, "Q": D.Q.size, "pairs": len(D.P), "S": D.size},
        "lifting": list(D.lifting),
        "representatives": [list(p) for p in D.rep_pair],
        "cocycle": D.cocycle_to_json(T),
        "clauses": clauses,
        "pass": all(clauses.values()),
    }


def run_cohomology(inst: Instance, force=False) -> dict:
    D = inst.datum()
    H = inst.cohomology(force)
    T = cocycle_from_lifting(D, D.lifting)
    out = H.to_json()
    out["cocycles"] = sum(len(c) for c in H.classes)
    out["coboundaries"] = len(H.coboundaries)
    out["class_of_extension"] = H.class_of(T)
    out["split"] = H.class_of(T) == H.zero
    clauses = {
        "zero_is_semidirect": H.class_of(zero_cocycle(D)) == H.zero,
        "cosets_partition": out["cocycles"] == H.order * len(H.coboundaries),
        "extension_witness": (equivalent(D, T, zero_cocycle(D)) is None) == (H.class_of(T) != H.zero),
    }
    out["clauses"] = clauses
    out["pass"] = all(clauses.values())
    return out


def run_wells(inst: Instance, force=False) -> dict:
    return check_exactness_thm2(inst.datum(), inst.identities, inst.cohomology(force))


def run_decompose(inst: Instance, force=False) -> dict:
    return thm3_decompose(inst.datum(), inst.identities, inst.cohomology(force))


def run_central(inst: Instance, force=False) -> dict:
    return central_simplification(inst.datum())


def run_modexp(inst: Instance, force=False) -> dict:
    if inst.module is None:
        return {"status": "not applicable", "reasons": ["instance is not an expanded module"], "pass": True}
    l = inst.lifting
    extra = inst.identities
    return check_exactness_thm4(inst.module, l, extra)


RUNNERS = {
    "datum": run_datum,
    "cohomology": run_cohomology,
    "wells": run_wells,
    "decompose": run_decompose,
    "central": run_central,
    "modexp": run_modexp,
}


def run_instance(inst: Instance, analyses=None, force: bool = False):
    """Run the selected analyses; returns ``(results, timing)``.

    Guardrail and datum errors propagate; failed checks are report content.
    """
    check_guardrails(inst.extension.A, force)
    results = {}
    timing = {}
    for name in analyses or inst.analyses:
        if name not in RUNNERS:
            raise InputError(f"unknown analysis {name!r}")
        t0 = time.perf_counter()
        try:
            results[name] = RUNNERS[name](inst, force)
        except (CohomologyError, WellsError, NaWellsError) as exc:
            results[name] = {"pass": False, "error": str(exc)}
        timing[name] = round(time.perf_counter() - t0, 6)
    return results, timing
