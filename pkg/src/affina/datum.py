"""Affine datum of an extension and the algebras rebuilt from it.

An extension is a finite algebra ``A`` with a congruence ``alpha`` and the
canonical map onto ``Q = A/alpha``.  From it we build the pair algebra
``A(alpha)`` (the congruence ``alpha`` viewed as a subalgebra of ``A x A``),
its congruences ``Delta_aa``, ``Delta_a1`` and ``alpha_hat``, and the
semidirect universe ``S = A(alpha)/Delta_aa`` fibred over ``Q`` by ``rho``.

Elements of ``S`` are integers.  With a lifting ``l`` fixed, every element is
``[l(q); a]`` for a unique ``a`` in the class of ``q``; :attr:`AffineDatum.bottom`
records that ``a``.  Fibre arithmetic ``x +_u y = m(x, delta(u), y)`` is
computed through these coordinates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .algebra import (
    AlgebraError,
    Congruence,
    FiniteAlgebra,
    Op,
    Var,
    generate_congruence,
    num_vars,
    quotient,
    search_term,
    term_table,
)


class DatumError(ValueError):
    """The extension does not realize affine datum with the given m."""


# ----------------------------------------------------------------- extension


@dataclass(frozen=True, eq=False)
class Extension:
    A: FiniteAlgebra
    alpha: Congruence
    Q: FiniteAlgebra
    pi: tuple[int, ...]

    @classmethod
    def of(cls, A: FiniteAlgebra, alpha: Congruence) -> "Extension":
        Q, hom = quotient(A, alpha)
        return cls(A, alpha, Q, hom.map)

    def classes(self) -> list[list[int]]:
        """The alpha-classes, listed in the order of their Q-index."""
        out: list[list[int]] = [[] for _ in range(self.Q.size)]
        for a, q in enumerate(self.pi):
            out[q].append(a)
        return out


def canonical_lifting(E: Extension) -> tuple[int, ...]:
    """Least element of each class."""
    return tuple(c[0] for c in E.classes())


def all_liftings(E: Extension):
    yield from itertools.product(*E.classes())


def check_lifting(E: Extension, l: Sequence[int]) -> None:
    if len(l) != E.Q.size:
        raise DatumError(f"lifting has {len(l)} entries, quotient has {E.Q.size} elements")
    for q, a in enumerate(l):
        if not 0 <= a < E.A.size or E.pi[a] != q:
            raise DatumError(f"lifting sends {q} to {a}, which is not in its class")


def trace(E: Extension, l: Sequence[int]) -> tuple[int, ...]:
    """The alpha-trace ``r = l o pi``."""
    return tuple(l[q] for q in E.pi)


# ------------------------------------------------------------- pair algebra


class PairAlgebra:
    """``A(alpha)``: the pairs of ``alpha`` in lexicographic order, with coordinatewise operations."""

    def __init__(self, E: Extension):
        A = E.A
        n = A.size
        self.extension = E
        self.pairs = sorted(E.alpha.pairs())
        index = np.full((n, n), -1, dtype=np.int64)
        for i, (a, b) in enumerate(self.pairs):
            index[a, b] = i
        self.index = index
        first = np.array([a for a, _ in self.pairs], dtype=np.int64)
        second = np.array([b for _, b in self.pairs], dtype=np.int64)
        size = len(self.pairs)
        tables = {}
        for name, k in A.signature:
            tbl = A.table(name)
            if k == 0:
                c = int(tbl)
                tables[name] = np.array(index[c, c])
                continue
            grids = np.indices((size,) * k)
            top = tbl[tuple(first[g] for g in grids)]
            bot = tbl[tuple(second[g] for g in grids)]
            out = index[top, bot]
            if (out < 0).any():
                raise AlgebraError("alpha is not compatible with the operations")
            tables[name] = out
        self.algebra = FiniteAlgebra(A.signature, size, tables)
        diagonal = [index[a, a] for a in range(n)]
        self.diagonal = diagonal
        self.delta_aa = generate_congruence(
            self.algebra, [(index[a, a], index[b, b]) for a, b in E.alpha.pairs()]
        )
        self.delta_a1 = generate_congruence(self.algebra, [(diagonal[0], d) for d in diagonal])
        self.alpha_hat = Congruence.from_labels([E.alpha.blocks[a] for a, _ in self.pairs])

    def __len__(self):
        return len(self.pairs)


def build_pair_algebra(E: Extension) -> PairAlgebra:
    return PairAlgebra(E)


# ------------------------------------------------------------ the m operation


def m_table(A: FiniteAlgebra, m) -> np.ndarray:
    """Accept a ternary term or a ternary table and return the table."""
    if isinstance(m, (Var, Op)):
        if num_vars(m) > 3:
            raise DatumError("m must be a term in at most three variables")
        return term_table(A, m, 3)
    arr = np.asarray(m, dtype=np.int64)
    if arr.shape != (A.size,) * 3:
        raise DatumError(f"m table has shape {arr.shape}, expected {(A.size,) * 3}")
    if arr.min() < 0 or arr.max() >= A.size:
        raise DatumError("m table has entries outside the universe")
    return arr


def affine_failures(E: Extension, m, P: PairAlgebra | None = None) -> list[str]:
    """Reasons ``(E, m)`` fails to realize affine datum; empty when it does."""
    A = E.A
    mt = m_table(A, m)
    P = P or PairAlgebra(E)
    out = []
    # (i) Mal'cev on alpha-classes
    for a, b in E.alpha.pairs():
        if mt[a, a, b] != b or mt[a, b, b] != a:
            out.append(f"m is not Mal'cev on the pair ({a}, {b})")
            break
    # (ii) Delta_aa-related pairs ((a,b),(c,d)) have d = m(b,a,c)
    pairs = P.pairs
    done = False
    for cls in P.delta_aa.classes():
        for i in cls:
            a, b = pairs[i]
            for j in cls:
                c, d = pairs[j]
                if mt[b, a, c] != d:
                    out.append(f"pairs ({a},{b}) and ({c},{d}) are Delta-related but {d} != m({b},{a},{c})")
                    done = True
                    break
            if done:
                break
        if done:
            break
    # (iii) unique representation [r(a); a] for every trace
    Sq = P.delta_aa.num_classes()
    if Sq != A.size:
        out.append(f"A(alpha)/Delta has {Sq} elements, expected {A.size}")
    else:
        label = np.array(P.delta_aa.blocks)
        arange = np.arange(A.size)
        pi = np.array(E.pi)
        for l in all_liftings(E):
            r = np.array(l)[pi]
            if len(set(label[P.index[r, arange]].tolist())) != A.size:
                out.append(f"lifting {list(l)} does not represent A(alpha)/Delta uniquely")
                break
    return out


def check_affine(E: Extension, m) -> bool:
    return not affine_failures(E, m)


def find_difference_term(E: Extension, max_depth: int = 3):
    """Shallowest ternary term for which ``E`` realizes affine datum."""
    P = PairAlgebra(E)
    pairs = E.alpha.pairs()

    def accept(tbl):
        if any(tbl[a, a, b] != b or tbl[a, b, b] != a for a, b in pairs):
            return False
        return not affine_failures(E, tbl, P)

    return search_term(E.A, 3, max_depth, accept)


# ----------------------------------------------------------------- cocycles


class TwoCocycle:
    """Per-symbol maps ``T_f: Q^k -> S`` stored as integer arrays."""

    __slots__ = ("values", "key")

    def __init__(self, values: Mapping[str, np.ndarray], order: Sequence[str]):
        vals = {}
        for name in order:
            arr = np.array(values[name], dtype=np.int64)
            arr.setflags(write=False)
            vals[name] = arr
        self.values = vals
        self.key = tuple(v for name in order for v in vals[name].ravel().tolist())

    def __getitem__(self, name) -> np.ndarray:
        return self.values[name]

    def __eq__(self, other):
        return isinstance(other, TwoCocycle) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __lt__(self, other):
        return self.key < other.key

    def __repr__(self):
        return f"TwoCocycle({self.key})"


# -------------------------------------------------------------- affine datum


class AffineDatum:
    """The datum ``(Q, A^{alpha,tau}, *)`` computed from a witness extension.

    ``m`` may be a term or a table; a term is needed to test realization on
    reconstructed algebras.
    """

    def __init__(self, E: Extension, m, lifting: Sequence[int] | None = None, check: bool = True):
        A = E.A
        self.extension = E
        self.signature = A.signature
        self.order = A.signature.names
        self.m_term = m if isinstance(m, (Var, Op)) else None
        self.m = m_table(A, m)
        self.P = PairAlgebra(E)
        if check:
            bad = affine_failures(E, self.m, self.P)
            if bad:
                raise DatumError("; ".join(bad))
        l = canonical_lifting(E) if lifting is None else tuple(lifting)
        check_lifting(E, l)
        self.lifting = l
        self.Q = E.Q
        S, proj = quotient(self.P.algebra, self.P.delta_aa)
        self.S = S
        self.class_of_index = np.array(proj.map, dtype=np.int64)
        nS = S.size
        self.size = nS
        reps = self.P.delta_aa.representatives()
        self.rep_pair = [self.P.pairs[i] for i in reps]
        pi = np.array(E.pi, dtype=np.int64)
        self.rho = np.array([E.pi[a] for a, _ in self.rep_pair], dtype=np.int64)
        self.zero = np.array([self.cls(l[q], l[q]) for q in range(E.Q.size)], dtype=np.int64)
        r = np.array(l, dtype=np.int64)[pi]
        self.gamma = np.array([self.cls(int(r[a]), a) for a in range(A.size)], dtype=np.int64)
        if len(set(self.gamma.tolist())) != nS:
            raise DatumError("lifting does not represent A(alpha)/Delta uniquely")
        bottom = np.empty(nS, dtype=np.int64)
        bottom[self.gamma] = np.arange(A.size)
        self.bottom = bottom
        fibers = [[] for _ in range(E.Q.size)]
        for x in range(nS):
            fibers[self.rho[x]].append(x)
        self.fibers = fibers
        # zero first: the canonical order used when enumerating fibre maps
        self.fiber_order = [[int(self.zero[q])] + [x for x in f if x != self.zero[q]] for q, f in enumerate(fibers)]
        add = np.full((nS, nS), -1, dtype=np.int64)
        neg = np.empty(nS, dtype=np.int64)
        for q, fib in enumerate(fibers):
            u = l[q]
            for x in fib:
                bx = bottom[x]
                neg[x] = self.cls(u, int(self.m[u, bx, u]))
                for y in fib:
                    add[x, y] = self.cls(u, int(self.m[bx, u, bottom[y]]))
        self.add = add
        self.neg = neg
        self.sub = np.where(add >= 0, add[np.arange(nS)[:, None], neg[None, :]], -1)
        self._actions = {}

    # element helpers
    def cls(self, a: int, b: int) -> int:
        """The S-index of the class of the pair ``(a, b)``."""
        i = self.P.index[a, b]
        if i < 0:
            raise DatumError(f"({a}, {b}) is not an alpha-pair")
        return int(self.class_of_index[i])

    def fiber_add(self, x: int, y: int) -> int:
        v = self.add[x, y]
        if v < 0:
            raise DatumError(f"{x} and {y} lie in different fibres")
        return int(v)

    def fiber_sum(self, items: Sequence[int]) -> int:
        acc = items[0]
        for y in items[1:]:
            acc = self.fiber_add(acc, y)
        return acc

    def is_diagonal(self, x: int) -> bool:
        return x == self.zero[self.rho[x]]

    def action(self, name: str, i: int) -> np.ndarray:
        """``a(f, i)``: ``f^S`` with slot ``i`` free and fibre zeros elsewhere.

        Axes are ``Q`` for the fixed slots and ``S`` for slot ``i``; slot 0
        gives the partial operation ``f^Delta``.
        """
        key = (name, i)
        if key not in self._actions:
            k = self.signature.arity(name)
            shape = tuple(self.size if j == i else self.Q.size for j in range(k))
            grids = np.indices(shape)
            args = tuple(grids[j] if j == i else self.zero[grids[j]] for j in range(k))
            arr = self.S.table(name)[args]
            arr.setflags(write=False)
            self._actions[key] = arr
        return self._actions[key]

    def fiber_groups_ok(self) -> bool:
        """Each fibre is an abelian group under its sum, with the diagonal as zero."""
        for q, fib in enumerate(self.fibers):
            z = int(self.zero[q])
            f = np.array(fib)
            block = self.add[np.ix_(f, f)]
            if (block < 0).any() or not np.isin(block, f).all():
                return False
            if not np.array_equal(block, block.T):
                return False
            if not all(self.add[z, x] == x for x in fib):
                return False
            if not all(self.add[x, self.neg[x]] == z for x in fib):
                return False
            for x, y, w in itertools.product(fib, repeat=3):
                if self.add[self.add[x, y], w] != self.add[x, self.add[y, w]]:
                    return False
        return True

    # cocycle helpers
    def cocycle(self, values: Mapping[str, np.ndarray]) -> TwoCocycle:
        T = TwoCocycle(values, self.order)
        for name, k in self.signature:
            arr = T[name]
            if arr.shape != (self.Q.size,) * k:
                raise DatumError(f"cocycle component {name!r} has shape {arr.shape}")
            if arr.size and (arr.min() < 0 or arr.max() >= self.size):
                raise DatumError(f"cocycle component {name!r} leaves the universe")
            if not np.array_equal(self.rho[arr], self.Q.table(name)):
                raise DatumError(f"cocycle component {name!r} violates the fibre condition")
        return T

    def cocycle_to_json(self, T: TwoCocycle) -> dict:
        out = {}
        for name, k in self.signature:
            rows = []
            for qs in itertools.product(range(self.Q.size), repeat=k):
                a, b = self.rep_pair[int(T[name][qs])]
                rows.append([list(qs), [a, b]])
            out[name] = rows
        return out

    def cocycle_from_json(self, data: Mapping) -> TwoCocycle:
        values = {}
        for name, k in self.signature:
            arr = np.full((self.Q.size,) * k, -1, dtype=np.int64)
            for qs, (a, b) in data[name]:
                arr[tuple(qs)] = self.cls(a, b)
            if (arr < 0).any():
                raise DatumError(f"cocycle component {name!r} is incomplete")
            values[name] = arr
        return self.cocycle(values)


def cocycle_from_lifting(D: AffineDatum, l: Sequence[int]) -> TwoCocycle:
    """``T_f(q) = [l(f^Q(q)); f^A(l(q))]``."""
    E = D.extension
    check_lifting(E, l)
    larr = np.array(l, dtype=np.int64)
    values = {}
    for name, k in D.signature:
        qt = D.Q.table(name)
        if k == 0:
            values[name] = np.array(D.cls(l[int(qt)], E.A.apply(name, ())))
            continue
        grids = np.indices((D.Q.size,) * k)
        top = larr[qt]
        bot = E.A.table(name)[tuple(larr[g] for g in grids)]
        values[name] = D.class_of_index[D.P.index[top, bot]]
    return D.cocycle(values)


def deconstruct(E: Extension, l: Sequence[int] | None = None, m=None) -> tuple[AffineDatum, TwoCocycle]:
    """Split an extension into its datum and the cocycle of the lifting ``l``."""
    if m is None:
        m = find_difference_term(E)
        if m is None:
            raise DatumError("no ternary term of depth <= 3 makes this extension affine")
    D = AffineDatum(E, m, l)
    return D, cocycle_from_lifting(D, D.lifting)


def semidirect(D: AffineDatum) -> FiniteAlgebra:
    """The algebra on ``S`` with ``F_f(a) = sum_i a(f, i)(rho a_<i, a_i, rho a_>i)``."""
    tables = {}
    for name, k in D.signature:
        if k <= 1:
            tables[name] = D.S.table(name)
            continue
        grids = np.indices((D.size,) * k)
        acc = None
        for i in range(k):
            idx = tuple(grids[j] if j == i else D.rho[grids[j]] for j in range(k))
            term = D.action(name, i)[idx]
            acc = term if acc is None else D.add[acc, term]
        if (acc < 0).any():
            raise DatumError(f"summands of {name!r} fall in different fibres")
        tables[name] = acc
    return FiniteAlgebra(D.signature, D.size, tables)


def reconstruct_tables(D: AffineDatum, T: TwoCocycle, base: FiniteAlgebra | None = None) -> dict:
    base = base or semidirect(D)
    tables = {}
    for name, k in D.signature:
        semi = base.table(name)
        if k == 0:
            tables[name] = np.array(D.add[int(semi), int(T[name])])
            continue
        grids = np.indices((D.size,) * k)
        tables[name] = D.add[semi, T[name][tuple(D.rho[g] for g in grids)]]
    return tables


def reconstruct(D: AffineDatum, T: TwoCocycle) -> FiniteAlgebra:
    """``A_T``: the semidirect operations shifted by ``T`` in each fibre."""
    for name, k in D.signature:
        if not np.array_equal(D.rho[T[name]], D.Q.table(name)):
            raise DatumError(f"cocycle component {name!r} violates the fibre condition")
    tables = reconstruct_tables(D, T, D.S)
    if any((t < 0).any() for t in tables.values()):
        raise DatumError("reconstruction left the fibres")
    return FiniteAlgebra(D.signature, D.size, tables)


def gamma(D: AffineDatum, l: Sequence[int] | None = None) -> tuple[int, ...]:
    """``x -> [r(x); x]`` for the trace of ``l`` (default: the datum's lifting)."""
    if l is None or tuple(l) == D.lifting:
        return tuple(D.gamma.tolist())
    r = trace(D.extension, l)
    return tuple(D.cls(r[a], a) for a in range(D.extension.A.size))
