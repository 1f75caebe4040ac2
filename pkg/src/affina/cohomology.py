"""Coboundaries, compatible cocycles and the second cohomology group.

All arithmetic is fibrewise in ``S = A(alpha)/Delta_aa``.  A fibre-respecting
map ``h: Q -> S`` has coboundary ``(dh)_f(q) = f^S(h(q)) - h(f^Q(q))``; two
cocycles are equivalent when their difference is a coboundary.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import GuardrailError, Var, num_vars
from .datum import AffineDatum, TwoCocycle, reconstruct

NODE_CAP = 2_000_000


class CohomologyError(RuntimeError):
    """Internal inconsistency: classes not closed under the fibre sum."""


# ------------------------------------------------------------ arithmetic


def zero_cocycle(D: AffineDatum) -> TwoCocycle:
    """``T_f(q) = delta(l(f^Q(q)))``, whose reconstruction is the semidirect product."""
    return D.cocycle({name: D.zero[D.Q.table(name)] for name in D.order})


def add_cocycles(D: AffineDatum, S: TwoCocycle, T: TwoCocycle) -> TwoCocycle:
    return D.cocycle({name: D.add[S[name], T[name]] for name in D.order})


def neg_cocycle(D: AffineDatum, T: TwoCocycle) -> TwoCocycle:
    return D.cocycle({name: D.neg[T[name]] for name in D.order})


def sub_cocycles(D: AffineDatum, S: TwoCocycle, T: TwoCocycle) -> TwoCocycle:
    return D.cocycle({name: D.sub[S[name], T[name]] for name in D.order})


def check_witness(D: AffineDatum, h: Sequence[int]) -> None:
    if len(h) != D.Q.size or any(D.rho[x] != q for q, x in enumerate(h)):
        raise ValueError("witness must satisfy rho o h = id")


def coboundary(D: AffineDatum, h: Sequence[int]) -> TwoCocycle:
    check_witness(D, h)
    h = np.asarray(h, dtype=np.int64)
    values = {}
    for name, k in D.signature:
        qt = D.Q.table(name)
        if k == 0:
            values[name] = np.array(D.sub[int(D.S.table(name)), h[int(qt)]])
            continue
        grids = np.indices((D.Q.size,) * k)
        values[name] = D.sub[D.S.table(name)[tuple(h[g] for g in grids)], h[qt]]
    return D.cocycle(values)


def fiber_maps(D: AffineDatum):
    """All ``h`` with ``rho o h = id``; each fibre is listed zero first."""
    for h in itertools.product(*D.fiber_order):
        yield h


def equivalent(D: AffineDatum, S: TwoCocycle, T: TwoCocycle):
    """First ``h`` (in :func:`fiber_maps` order) with ``S - T = dh``, or ``None``."""
    target = sub_cocycles(D, S, T)
    for h in fiber_maps(D):
        if coboundary(D, h) == target:
            return h
    return None


def all_witnesses(D: AffineDatum, S: TwoCocycle, T: TwoCocycle) -> list:
    target = sub_cocycles(D, S, T)
    return [h for h in fiber_maps(D) if coboundary(D, h) == target]


def derivations(D: AffineDatum) -> list:
    """``Der``: fibre-respecting ``h`` with ``dh = 0``."""
    z = zero_cocycle(D)
    return [h for h in fiber_maps(D) if coboundary(D, h) == z]


# ---------------------------------------------------- compatibility checks


def compatibility_failures(D: AffineDatum, T: TwoCocycle, U) -> list[str]:
    """Why ``A_T`` fails to lie in ``U`` or to realize the datum; empty if it succeeds."""
    from .algebra import find_counterexample, term_table

    AT = reconstruct(D, T)
    out = []
    for e in U:
        bad = find_counterexample(AT, e)
        if bad is not None:
            out.append(f"identity fails at {list(bad)}")
    if D.m_term is not None:
        mt = term_table(AT, D.m_term, 3)
        for fib in D.fibers:
            for x, y, z in itertools.product(fib, repeat=3):
                if mt[x, y, z] != D.add[D.sub[x, y], z]:
                    out.append("m does not give the fibre difference in the reconstruction")
                    return out
    return out


def is_compatible(D: AffineDatum, T: TwoCocycle, U) -> bool:
    return not compatibility_failures(D, T, U)


# ------------------------------------------------------------ enumeration


class _Constraint:
    __slots__ = ("lhs", "rhs", "lifts", "fibre_check")

    def __init__(self, lhs, rhs, lifts, fibre_check=False):
        self.lhs, self.rhs, self.lifts, self.fibre_check = lhs, rhs, lifts, fibre_check


def _touched(D, t, env, out):
    """Evaluate ``t`` on ``Q`` at ``env`` and collect the cocycle entries it reads."""
    if isinstance(t, Var):
        return env[t.index]
    args = tuple(_touched(D, s, env, out) for s in t.args)
    out.add((t.name, args))
    return D.Q.apply(t.name, args)


def enumerate_cocycles(D: AffineDatum, U, force: bool = False, node_cap: int = NODE_CAP) -> list[TwoCocycle]:
    """Every fibre-respecting ``T`` whose reconstruction satisfies ``U`` and realizes the datum.

    Backtracking over the entries ``T_f(q)`` (nullary symbols first, then
    by arity and signature order, then ``q`` lexicographic).  Each
    (identity, Q-assignment) constraint is tested, on every lift of the
    assignment, as soon as its last entry is assigned.
    """
    entries = []
    for k in sorted({k for _, k in D.signature}):
        for name, kk in D.signature:
            if kk == k:
                for qs in itertools.product(range(D.Q.size), repeat=k):
                    entries.append((name, qs))
    position = {e: i for i, e in enumerate(entries)}
    domains = [D.fiber_order[D.Q.apply(name, qs)] for name, qs in entries]
    nq = D.Q.size

    fibres = [np.array(f, dtype=np.int64) for f in D.fibers]
    by_pos: list[list[_Constraint]] = [[] for _ in entries]
    checks = [(e.lhs, e.rhs, max(num_vars(e.lhs), num_vars(e.rhs)), False) for e in U]
    if D.m_term is not None:
        checks.append((D.m_term, None, 3, True))
    for lhs, rhs, nv, fibre_check in checks:
        envs = [(q, q, q) for q in range(nq)] if fibre_check else itertools.product(range(nq), repeat=nv)
        for env in envs:
            touched = set()
            _touched(D, lhs, env, touched)
            if rhs is not None:
                _touched(D, rhs, env, touched)
            grids = np.meshgrid(*[fibres[q] for q in env], indexing="ij") if env else []
            lifts = [g.ravel() for g in grids]
            c = _Constraint(lhs, rhs, lifts, fibre_check)
            slot = max((position[t] for t in touched), default=None)
            if slot is None:
                # no cocycle entry involved: decide it once, up front
                if not _holds(D, c, {}):
                    return []
                continue
            by_pos[slot].append(c)

    cur = {name: np.full((nq,) * k, -1, dtype=np.int64) for name, k in D.signature}
    found = []
    nodes = 0

    def dfs(p):
        nonlocal nodes
        if p == len(entries):
            found.append(D.cocycle({name: cur[name].copy() for name in D.order}))
            return
        name, qs = entries[p]
        for v in domains[p]:
            nodes += 1
            if nodes > node_cap and not force:
                raise GuardrailError(f"cocycle search exceeded {node_cap} nodes; pass force=True")
            cur[name][qs] = v
            if all(_holds(D, c, cur) for c in by_pos[p]):
                dfs(p + 1)
        cur[name][qs] = -1

    dfs(0)
    found.sort()
    return found


def _eval(D, t, lifts, cur):
    if isinstance(t, Var):
        return lifts[t.index]
    args = tuple(_eval(D, s, lifts, cur) for s in t.args)
    base = D.S.table(t.name)
    if not args:
        return D.add[int(base), int(cur[t.name])]
    return D.add[base[args], cur[t.name][tuple(D.rho[a] for a in args)]]


def _holds(D, c: _Constraint, cur) -> bool:
    left = _eval(D, c.lhs, c.lifts, cur)
    if c.fibre_check:
        x, y, z = c.lifts
        right = D.add[D.sub[x, y], z]
    else:
        right = _eval(D, c.rhs, c.lifts, cur)
    return bool(np.array_equal(np.broadcast_to(left, np.shape(right)), right) if np.ndim(right) else np.all(left == right))


# ---------------------------------------------------------------- the group


@dataclass
class CohomologyGroup:
    datum: AffineDatum
    classes: list  # list of sorted member lists
    reps: list
    zero: int
    table: np.ndarray
    coboundaries: list
    index: dict = field(repr=False, default_factory=dict)

    @property
    def order(self) -> int:
        return len(self.classes)

    def class_of(self, T: TwoCocycle) -> int:
        try:
            return self.index[T.key]
        except KeyError:
            raise CohomologyError("cocycle is not among the enumerated compatible cocycles") from None

    def add(self, i: int, j: int) -> int:
        return int(self.table[i, j])

    def neg(self, i: int) -> int:
        return int(np.flatnonzero(self.table[i] == self.zero)[0])

    def to_json(self) -> dict:
        D = self.datum
        return {
            "order": self.order,
            "zero": self.zero,
            "class_sizes": [len(c) for c in self.classes],
            "representatives": [D.cocycle_to_json(r) for r in self.reps],
            "addition": self.table.tolist(),
        }


def coboundary_group(D: AffineDatum) -> list[TwoCocycle]:
    seen = {}
    for h in fiber_maps(D):
        b = coboundary(D, h)
        seen.setdefault(b.key, b)
    return sorted(seen.values())


def cohomology_group(D: AffineDatum, U, force: bool = False, cocycles=None) -> CohomologyGroup:
    """Classes of compatible cocycles modulo coboundaries, with the fibre-sum addition."""
    Z = enumerate_cocycles(D, U, force=force) if cocycles is None else sorted(cocycles)
    zkeys = {T.key for T in Z}
    B = coboundary_group(D)
    index = {}
    classes = []
    for T in Z:
        if T.key in index:
            continue
        coset = sorted({add_cocycles(D, T, b) for b in B})
        if any(S.key not in zkeys for S in coset):
            raise CohomologyError("a coset of the coboundaries leaves the compatible cocycles")
        for S in coset:
            index[S.key] = len(classes)
        classes.append(coset)
    if not classes:
        raise CohomologyError("no compatible cocycles; the datum has no realization in U")
    reps = [c[0] for c in classes]
    n = len(classes)
    table = np.empty((n, n), dtype=np.int64)
    for i, j in itertools.product(range(n), repeat=2):
        key = add_cocycles(D, reps[i], reps[j]).key
        if key not in index:
            raise CohomologyError("fibre sum of two classes is not a compatible cocycle")
        table[i, j] = index[key]
    zkey = zero_cocycle(D).key
    if zkey not in index:
        raise CohomologyError("the zero cocycle is not compatible")
    zero = index[zkey]
    H = CohomologyGroup(D, classes, reps, zero, table, B, index)
    problems = group_axiom_failures(table, zero)
    if problems:
        raise CohomologyError("; ".join(problems))
    return H


def group_axiom_failures(table: np.ndarray, zero: int) -> list[str]:
    n = table.shape[0]
    r = range(n)
    out = []
    if not all(table[zero, i] == i and table[i, zero] == i for i in r):
        out.append("zero class is not neutral")
    if not np.array_equal(table, table.T):
        out.append("addition is not commutative")
    if not all(table[table[i, j], k] == table[i, table[j, k]] for i in r for j in r for k in r):
        out.append("addition is not associative")
    if not all((table[i] == zero).any() for i in r):
        out.append("some class has no inverse")
    return out
