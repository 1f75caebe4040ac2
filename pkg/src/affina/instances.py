"""Small algebras used by the examples, the tests and ``affina examples``."""

from __future__ import annotations

import itertools
import json
import os
from pathlib import Path

import numpy as np

from .algebra import Congruence, FiniteAlgebra, Signature, generate_congruence, parse_identity
from .modexp import ExpandedModule, FiniteRing

GROUP_SIGNATURE = Signature.of(("+", 2), ("-", 1), ("0", 0))
GROUP_M = "+(+(x,-(y)),z)"
GROUP_IDENTITIES = [
    "+(+(x,y),z) = +(x,+(y,z))",
    "+(x,0) = x",
    "+(0,x) = x",
    "+(x,-(x)) = 0",
    "+(-(x),x) = 0",
]


def group_identities():
    return [parse_identity(s, GROUP_SIGNATURE) for s in GROUP_IDENTITIES]


def group_from_table(mul) -> FiniteAlgebra:
    """Group algebra from a multiplication table whose identity is element 0."""
    mul = np.asarray(mul, dtype=np.int64)
    n = mul.shape[0]
    inv = np.array([int(np.flatnonzero(mul[x] == 0)[0]) for x in range(n)])
    return FiniteAlgebra(GROUP_SIGNATURE, n, {"+": mul, "-": inv, "0": np.array(0)})


def cyclic(n: int) -> FiniteAlgebra:
    a, b = np.indices((n, n))
    return group_from_table((a + b) % n)


def abelian(*orders: int) -> FiniteAlgebra:
    """``Z_{n1} x ... x Z_{nk}``, mixed-radix index with the last factor fastest."""
    elems = list(itertools.product(*[range(n) for n in orders]))
    index = {e: i for i, e in enumerate(elems)}
    mul = [[index[tuple((x + y) % n for x, y, n in zip(e, f, orders))] for f in elems] for e in elems]
    return group_from_table(mul)


def _perm_group(gens_or_elems, compose):
    elems = sorted(gens_or_elems)
    index = {e: i for i, e in enumerate(elems)}
    return group_from_table([[index[compose(p, q)] for q in elems] for p in elems])


def symmetric3() -> FiniteAlgebra:
    """``S_3`` on permutation tuples in lexicographic order (identity first)."""
    return _perm_group(itertools.permutations(range(3)), lambda p, q: tuple(p[q[i]] for i in range(3)))


def dihedral4() -> FiniteAlgebra:
    """Symmetries of the square as permutations of its corners."""
    r = (1, 2, 3, 0)
    s = (0, 3, 2, 1)
    comp = lambda p, q: tuple(p[q[i]] for i in range(4))
    elems = {(0, 1, 2, 3)}
    frontier = list(elems)
    while frontier:
        x = frontier.pop()
        for g in (r, s):
            y = comp(g, x)
            if y not in elems:
                elems.add(y)
                frontier.append(y)
    return _perm_group(elems, comp)


def quaternion() -> FiniteAlgebra:
    """``Q_8`` as 4x4 integer matrices acting on the quaternion basis."""
    units = {
        "1": (1, 0, 0, 0), "i": (0, 1, 0, 0), "j": (0, 0, 1, 0), "k": (0, 0, 0, 1),
    }

    def qmul(a, b):
        a1, b1, c1, d1 = a
        a2, b2, c2, d2 = b
        return (
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )

    elems = []
    for u in units.values():
        elems.append(u)
        elems.append(tuple(-v for v in u))
    elems.sort(key=lambda e: (e != (1, 0, 0, 0), e))
    index = {e: i for i, e in enumerate(elems)}
    return group_from_table([[index[qmul(a, b)] for b in elems] for a in elems])


def normal_congruences(G: FiniteAlgebra) -> list[Congruence]:
    """All congruences of a finite algebra, found as joins of principal ones."""
    n = G.size
    principal = {}
    for a in range(n):
        for b in range(a + 1, n):
            c = generate_congruence(G, [(a, b)])
            principal.setdefault(c.blocks, c)
    found = {Congruence.identity(n).blocks: Congruence.identity(n)}
    frontier = list(found.values())
    while frontier:
        nxt = []
        for c in frontier:
            for p in principal.values():
                j = generate_congruence(G, list(zip(range(n), c.blocks)) + list(zip(range(n), p.blocks)))
                if j.blocks not in found:
                    found[j.blocks] = j
                    nxt.append(j)
        frontier = nxt
    return [found[k] for k in sorted(found)]


def abelian_kernel(G: FiniteAlgebra, theta: Congruence) -> bool:
    """The class of the identity element is an abelian subgroup."""
    K = theta.class_of(0)
    return all(G.apply("+", (a, b)) == G.apply("+", (b, a)) for a in K for b in K)


# ------------------------------------------------------------------ modules


def prime_field(p: int) -> FiniteRing:
    a, b = np.indices((p, p))
    return FiniteRing((a + b) % p, (a * b) % p)


def vector_space(p: int, dim: int) -> ExpandedModule:
    """``F_p^dim`` with index ``sum v_i p^i`` (first coordinate fastest)."""
    R = prime_field(p)
    elems = list(itertools.product(range(p), repeat=dim))
    code = lambda v: sum(c * p ** i for i, c in enumerate(v))
    vecs = sorted(elems, key=code)
    add = [[code(tuple((x + y) % p for x, y in zip(u, v))) for v in vecs] for u in vecs]
    scalar = [[code(tuple((r * x) % p for x in u)) for u in vecs] for r in range(p)]
    return ExpandedModule(R, add, scalar)


def dual_numbers() -> ExpandedModule:
    """``F_2[x]/(x^2)`` as an F_2-module with multiplication; ``a + b x`` has index ``a + 2b``."""
    R = prime_field(2)
    add = [[u ^ v for v in range(4)] for u in range(4)]
    scalar = [[0] * 4, list(range(4))]

    def mul(u, v):
        a, b = u & 1, u >> 1
        c, d = v & 1, v >> 1
        return (a * c) % 2 + 2 * ((a * d + b * c) % 2)

    return ExpandedModule(R, add, scalar, {"mul": [[mul(u, v) for v in range(4)] for u in range(4)]})


RING_IDENTITIES = ["mul(mul(x,y),z) = mul(x,mul(y,z))", "mul(x,y) = mul(y,x)"]


def module_m_string(M: ExpandedModule) -> str:
    return f"+(+(x,r{M.ring.minus_one}(y)),z)"


# ------------------------------------------------------- bundled instances


def _group_instance(ident, G, classes, note):
    return {
        "id": ident,
        "description": note,
        "algebra": G.to_dict(),
        "congruence": classes,
        "m": GROUP_M,
        "identities": GROUP_IDENTITIES,
        "analyses": ["datum", "cohomology", "wells", "decompose", "central"],
    }


def _module_instance(ident, M, ideal, note, extra_identities=(), analyses=None):
    return {
        "id": ident,
        "description": note,
        "module": {**M.to_dict(), "ideal": ideal},
        "m": module_m_string(M),
        "identities": list(extra_identities),
        "analyses": analyses or ["datum", "cohomology", "wells", "decompose", "central", "modexp"],
    }


def bundled_instances() -> dict[str, dict]:
    """The instance documents written by ``affina examples``."""
    out = {}
    out["z4"] = _group_instance("z4", cyclic(4), [[0, 2], [1, 3]], "Z4 as an extension of Z2 by Z2 (non-split)")
    out["v4"] = _group_instance(
        "v4", abelian(2, 2), [[0, 1], [2, 3]], "Z2 x Z2 over its first factor; element 2a+b is (a, b)"
    )
    out["s3-noncentral"] = _group_instance(
        "s3-noncentral", symmetric3(), [[0, 3, 4], [1, 2, 5]], "S3 over the cosets of A3; the kernel is not central"
    )
    f2 = vector_space(2, 2)
    out["f2sq"] = _module_instance(
        "f2sq", f2, [0, 1], "F2^2 over the first coordinate; element i+2q is (i, q)"
    )
    f3 = vector_space(3, 2)
    out["f3sq"] = _module_instance(
        "f3sq", f3, [0, 1, 2], "F3^2 over the first coordinate; element i+3q is (i, q)"
    )
    out["f2x-dual-numbers"] = _module_instance(
        "f2x-dual-numbers",
        dual_numbers(),
        [0, 2],
        "F2[x]/(x^2) with ideal (x); element a+2b is a+bx",
        RING_IDENTITIES,
    )
    return out


def emit_examples(directory, overwrite: bool = False) -> list[Path]:
    """Write every bundled instance as ``<id>.json``; refuse a non-empty directory."""
    d = Path(directory)
    if d.exists() and not d.is_dir():
        raise FileExistsError(f"{d} exists and is not a directory")
    if d.exists() and any(d.iterdir()) and not overwrite:
        raise FileExistsError(f"{d} is not empty; pass overwrite to replace its instance files")
    d.mkdir(parents=True, exist_ok=True)
    written = []
    for ident, doc in bundled_instances().items():
        path = d / f"{ident}.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
        os.replace(tmp, path)
        written.append(path)
    return written
