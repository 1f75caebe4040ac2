"""Finite algebras over arbitrary signatures.

Universes are the index ranges ``0..n-1`` and every operation is a dense
table.  Everything here is exhaustive: identities are checked on all
assignments, congruences are closed under all translations, automorphisms
are found by complete backtracking.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

MAX_SIZE = 16
MAX_ARITY = 4


class AlgebraError(ValueError):
    """Malformed algebra, term or congruence."""


class GuardrailError(RuntimeError):
    """An instance exceeds the desk-scale bounds and no override was given."""


def check_guardrails(A: "FiniteAlgebra", force: bool = False) -> None:
    if force:
        return
    if A.size > MAX_SIZE:
        raise GuardrailError(f"algebra has {A.size} elements (limit {MAX_SIZE}); pass force=True")
    worst = max((k for _, k in A.signature), default=0)
    if worst > MAX_ARITY:
        raise GuardrailError(f"arity {worst} exceeds limit {MAX_ARITY}; pass force=True")


# ---------------------------------------------------------------- signature


@dataclass(frozen=True)
class Signature:
    symbols: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [name for name, _ in self.symbols]
        if len(set(names)) != len(names):
            raise AlgebraError(f"duplicate operation names in {names}")
        for name, k in self.symbols:
            if not isinstance(k, int) or k < 0:
                raise AlgebraError(f"bad arity {k!r} for {name!r}")

    @classmethod
    def of(cls, *symbols: tuple[str, int]) -> "Signature":
        return cls(tuple((str(n), int(k)) for n, k in symbols))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.symbols)

    def arity(self, name: str) -> int:
        for n, k in self.symbols:
            if n == name:
                return k
        raise AlgebraError(f"unknown operation symbol {name!r}")

    def __contains__(self, name) -> bool:
        return name in self.names

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self):
        return len(self.symbols)


# ------------------------------------------------------------------ algebra


def _check_nested(name, data, size, depth, path=""):
    """Validate a nested-list table, reporting the first bad location."""
    if depth == 0:
        if isinstance(data, bool) or not isinstance(data, (int, np.integer)):
            raise AlgebraError(f"table entry is not an integer at {name}{path}")
        if not 0 <= data < size:
            raise AlgebraError(f"table entry out of range at {name}{path}")
        return
    if not isinstance(data, (list, tuple, np.ndarray)) or len(data) != size:
        raise AlgebraError(f"table has wrong shape at {name}{path}: expected {size} rows")
    for i, row in enumerate(data):
        _check_nested(name, row, size, depth - 1, f"{path}[{i}]")


class FiniteAlgebra:
    """An algebra on ``range(size)`` given by one table per symbol.

    Tables are numpy arrays of shape ``(size,) * arity``; entry
    ``table[a1, ..., ak]`` is the value of the operation.  Instances are
    treated as immutable.
    """

    __slots__ = ("signature", "size", "_tables", "_flat", "_hash")

    def __init__(self, signature: Signature, size: int, tables: Mapping[str, object]):
        if size < 1:
            raise AlgebraError("universe must be nonempty")
        self.signature = signature
        self.size = int(size)
        self._tables = {}
        self._flat = {}
        missing = set(signature.names) - set(tables)
        if missing:
            raise AlgebraError(f"missing tables for {sorted(missing)}")
        extra = set(tables) - set(signature.names)
        if extra:
            raise AlgebraError(f"tables for unknown symbols {sorted(extra)}")
        for name, k in signature:
            raw = tables[name]
            if isinstance(raw, np.ndarray):
                arr = np.asarray(raw, dtype=np.int64)
                if arr.shape != (size,) * k:
                    raise AlgebraError(f"table has wrong shape at {name}: {arr.shape}")
                if arr.size and (arr.min() < 0 or arr.max() >= size):
                    bad = np.argwhere((arr < 0) | (arr >= size))[0]
                    loc = "".join(f"[{i}]" for i in bad)
                    raise AlgebraError(f"table entry out of range at {name}{loc}")
            else:
                _check_nested(name, raw, size, k)
                arr = np.array(raw, dtype=np.int64).reshape((size,) * k)
            arr.setflags(write=False)
            self._tables[name] = arr
            self._flat[name] = tuple(arr.ravel().tolist())
        self._hash = None

    # construction helpers
    @classmethod
    def from_functions(cls, signature: Signature, size: int, funcs: Mapping[str, object]):
        """Tabulate Python callables (or constants for nullary symbols)."""
        tables = {}
        for name, k in signature:
            fn = funcs[name]
            if k == 0:
                tables[name] = np.array(fn() if callable(fn) else fn, dtype=np.int64)
                continue
            arr = np.empty((size,) * k, dtype=np.int64)
            for args in itertools.product(range(size), repeat=k):
                arr[args] = fn(*args)
            tables[name] = arr
        return cls(signature, size, tables)

    def table(self, name: str) -> np.ndarray:
        try:
            return self._tables[name]
        except KeyError:
            raise AlgebraError(f"unknown operation symbol {name!r}") from None

    def apply(self, name: str, args: Sequence[int]) -> int:
        flat = self._flat[name]
        idx = 0
        n = self.size
        for a in args:
            idx = idx * n + a
        return flat[idx]

    def arity(self, name: str) -> int:
        return self.signature.arity(name)

    def __len__(self):
        return self.size

    def _key(self):
        return (self.signature, self.size, tuple(self._flat[n] for n in self.signature.names))

    def __eq__(self, other):
        return isinstance(other, FiniteAlgebra) and self._key() == other._key()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self):
        ops = ", ".join(f"{n}/{k}" for n, k in self.signature)
        return f"FiniteAlgebra(size={self.size}, ops=[{ops}])"

    # JSON description format
    def to_dict(self) -> dict:
        return {
            "signature": [{"name": n, "arity": k} for n, k in self.signature],
            "size": self.size,
            "tables": {n: self._tables[n].tolist() for n in self.signature.names},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "FiniteAlgebra":
        try:
            sig = Signature.of(*[(s["name"], s["arity"]) for s in data["signature"]])
            size = data["size"]
            tables = data["tables"]
        except (KeyError, TypeError) as exc:
            raise AlgebraError(f"malformed algebra description: missing {exc}") from None
        if not isinstance(size, int) or isinstance(size, bool):
            raise AlgebraError("size must be an integer")
        return cls(sig, size, tables)


def direct_product(A: FiniteAlgebra, B: FiniteAlgebra) -> FiniteAlgebra:
    """Product algebra; the pair ``(a, b)`` has index ``a * |B| + b``."""
    if A.signature != B.signature:
        raise AlgebraError("direct product needs a common signature")
    m = B.size
    tables = {}
    for name, k in A.signature:
        ta, tb = A.table(name), B.table(name)
        if k == 0:
            tables[name] = np.array(int(ta) * m + int(tb))
            continue
        idx = np.indices((A.size * m,) * k)
        tables[name] = ta[tuple(i // m for i in idx)] * m + tb[tuple(i % m for i in idx)]
    return FiniteAlgebra(A.signature, A.size * m, tables)


def idempotent_elements(A: FiniteAlgebra) -> list[int]:
    """Elements ``v`` with ``f(v, ..., v) = v`` for every symbol (nullary ones included)."""
    return [v for v in range(A.size) if all(A.apply(n, (v,) * k) == v for n, k in A.signature)]


# -------------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Op:
    name: str
    args: tuple = ()


Term = "Var | Op"


@dataclass(frozen=True)
class Identity:
    lhs: object
    rhs: object

    @property
    def nvars(self) -> int:
        return max(num_vars(self.lhs), num_vars(self.rhs))


def num_vars(t) -> int:
    """One more than the largest variable index occurring in ``t``."""
    if isinstance(t, Var):
        return t.index + 1
    return max((num_vars(s) for s in t.args), default=0)


def term_depth(t) -> int:
    """Nesting depth of operation symbols; variables have depth 0."""
    if isinstance(t, Var):
        return 0
    return 1 + max((term_depth(s) for s in t.args), default=0)


_TOKEN = re.compile(r"\s*([(),=]|[^\s(),=]+)")


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise AlgebraError(f"cannot tokenize {text[pos:]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens, signature, variables):
        self.tokens = tokens
        self.pos = 0
        self.sig = signature
        self.vars = variables

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise AlgebraError(f"expected {expected or 'a token'}, got {tok!r}")
        self.pos += 1
        return tok

    def term(self):
        tok = self.take()
        if tok in "(),=":
            raise AlgebraError(f"unexpected {tok!r}")
        if tok in self.sig:
            k = self.sig.arity(tok)
            args = []
            if self.peek() == "(":
                self.take("(")
                if self.peek() != ")":
                    args.append(self.term())
                    while self.peek() == ",":
                        self.take(",")
                        args.append(self.term())
                self.take(")")
            if len(args) != k:
                raise AlgebraError(f"{tok!r} expects {k} arguments, got {len(args)}")
            return Op(tok, tuple(args))
        if tok not in self.vars:
            self.vars[tok] = len(self.vars)
        return Var(self.vars[tok])


def parse_term(text: str, signature: Signature, variables: dict | None = None):
    """Parse prefix notation such as ``+(+(x,-(y)),z)``.

    Names in the signature are operation symbols; anything else is a
    variable, numbered in order of first appearance (or by ``variables``).
    """
    variables = {} if variables is None else variables
    p = _Parser(_tokenize(text), signature, variables)
    t = p.term()
    if p.peek() is not None:
        raise AlgebraError(f"trailing input in term {text!r}")
    return t


def parse_identity(text: str, signature: Signature) -> Identity:
    if text.count("=") != 1:
        raise AlgebraError(f"identity needs exactly one '=': {text!r}")
    left, right = text.split("=")
    variables: dict = {}
    return Identity(parse_term(left, signature, variables), parse_term(right, signature, variables))


def term_to_str(t, names: Sequence[str] = "xyzuvwstpqrabcdefgh") -> str:
    if isinstance(t, Var):
        return names[t.index] if t.index < len(names) else f"x{t.index}"
    if not t.args:
        return t.name
    return f"{t.name}({','.join(term_to_str(s, names) for s in t.args)})"


def identity_to_str(e: Identity) -> str:
    return f"{term_to_str(e.lhs)} = {term_to_str(e.rhs)}"


def evaluate(t, env: Sequence[int], op) -> int:
    """Evaluate ``t`` with a caller-supplied ``op(name, args)``."""
    if isinstance(t, Var):
        return env[t.index]
    return op(t.name, tuple(evaluate(s, env, op) for s in t.args))


def eval_term(A: FiniteAlgebra, t, env: Sequence[int]) -> int:
    def op(name, args):
        k = A.arity(name)
        if k != len(args):
            raise AlgebraError(f"{name!r} has arity {k}, applied to {len(args)} arguments")
        return A.apply(name, args)

    nv = num_vars(t)
    if nv > len(env):
        raise AlgebraError(f"variable x{nv - 1} out of range for environment of length {len(env)}")
    if any(not 0 <= e < A.size for e in env):
        raise AlgebraError("environment value outside the universe")
    return evaluate(t, env, op)


def term_table(A: FiniteAlgebra, t, nvars: int | None = None) -> np.ndarray:
    """Values of ``t`` on every assignment, as an array of shape ``(n,) * nvars``."""
    nvars = num_vars(t) if nvars is None else nvars
    shape = (A.size,) * nvars
    grids = np.indices(shape) if nvars else np.zeros((0,), dtype=np.int64)

    def ev(s):
        if isinstance(s, Var):
            if s.index >= nvars:
                raise AlgebraError(f"variable x{s.index} out of range")
            return grids[s.index]
        tbl = A.table(s.name)
        if len(s.args) != tbl.ndim:
            raise AlgebraError(f"{s.name!r} has arity {tbl.ndim}, applied to {len(s.args)} arguments")
        if not s.args:
            return np.full(shape, int(tbl), dtype=np.int64)
        return tbl[tuple(ev(a) for a in s.args)]

    return np.asarray(ev(t), dtype=np.int64)


def _check_symbols(A: FiniteAlgebra, t):
    if isinstance(t, Op):
        if t.name not in A.signature:
            raise AlgebraError(f"symbol {t.name!r} is not in the algebra's signature")
        for s in t.args:
            _check_symbols(A, s)


def find_counterexample(A: FiniteAlgebra, e: Identity):
    """First assignment (lexicographic) violating ``e``, or ``None``."""
    _check_symbols(A, e.lhs)
    _check_symbols(A, e.rhs)
    nv = e.nvars
    bad = np.argwhere(term_table(A, e.lhs, nv) != term_table(A, e.rhs, nv))
    return None if len(bad) == 0 else tuple(int(v) for v in bad[0])


def satisfies(A: FiniteAlgebra, e: Identity) -> bool:
    return find_counterexample(A, e) is None


def satisfies_all(A: FiniteAlgebra, identities: Iterable[Identity]) -> bool:
    return all(satisfies(A, e) for e in identities)


def search_term(A: FiniteAlgebra, nvars: int, max_depth: int, accept, max_pool: int = 4096):
    """Shallowest term whose table satisfies ``accept``, or ``None``.

    Terms are explored level by level and deduplicated by their value
    table on ``A``, so each term operation is tried once.  Within a level
    the order is: symbols in signature order, argument tuples
    lexicographic over the pool.  ``accept`` receives the table as an
    array of shape ``(n,) * nvars``.
    """
    n = A.size
    shape = (n,) * nvars
    grids = np.indices(shape).reshape(nvars, -1) if nvars else np.zeros((0, 1), dtype=np.int64)
    pool: list = []
    seen = set()

    def offer(term, vec):
        key = vec.tobytes()
        if key in seen:
            return False
        seen.add(key)
        pool.append((term, vec))
        return bool(accept(vec.reshape(shape)))

    for i in range(nvars):
        if offer(Var(i), grids[i].copy()):
            return Var(i)
    for name, k in A.signature:
        if k == 0 and offer(Op(name), np.full(n ** nvars, A.apply(name, ()), dtype=np.int64)):
            return Op(name)
    start = 0
    for _ in range(max_depth):
        end = len(pool)
        if end > max_pool:
            raise GuardrailError(f"term search pool exceeded {max_pool} operations")
        for name, k in A.signature:
            if k == 0:
                continue
            flat = np.asarray(A._flat[name])
            for combo in itertools.product(range(end), repeat=k):
                if max(combo) < start:
                    continue
                idx = np.zeros(n ** nvars, dtype=np.int64)
                for j in combo:
                    idx = idx * n + pool[j][1]
                term = Op(name, tuple(pool[j][0] for j in combo))
                if offer(term, flat[idx]):
                    return term
        start = end
    return None


# --------------------------------------------------------------- congruence


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y) -> bool:
        x, y = self.find(x), self.find(y)
        if x == y:
            return False
        if y < x:
            x, y = y, x
        self.parent[y] = x
        return True


@dataclass(frozen=True)
class Congruence:
    """Equivalence on ``range(n)``; ``blocks[i]`` is the least member of i's class."""

    blocks: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.blocks)

    @classmethod
    def from_labels(cls, labels: Sequence) -> "Congruence":
        first = {}
        out = []
        for i, lab in enumerate(labels):
            out.append(first.setdefault(lab, i))
        return cls(tuple(out))

    @classmethod
    def from_classes(cls, n: int, classes: Iterable[Iterable[int]]) -> "Congruence":
        labels = list(range(n))
        seen = set()
        for c in classes:
            c = sorted(c)
            for a in c:
                if not 0 <= a < n:
                    raise AlgebraError(f"class member {a} out of range")
                if a in seen:
                    raise AlgebraError(f"element {a} occurs in two classes")
                seen.add(a)
                labels[a] = c[0]
        return cls.from_labels(labels)

    @classmethod
    def identity(cls, n: int) -> "Congruence":
        return cls(tuple(range(n)))

    @classmethod
    def full(cls, n: int) -> "Congruence":
        return cls((0,) * n)

    def related(self, a: int, b: int) -> bool:
        return self.blocks[a] == self.blocks[b]

    def classes(self) -> list[list[int]]:
        out: dict[int, list[int]] = {}
        for i, b in enumerate(self.blocks):
            out.setdefault(b, []).append(i)
        return [out[k] for k in sorted(out)]

    def representatives(self) -> list[int]:
        return sorted(set(self.blocks))

    def num_classes(self) -> int:
        return len(set(self.blocks))

    def pairs(self) -> list[tuple[int, int]]:
        return [(a, b) for c in self.classes() for a in c for b in c]

    def class_of(self, a: int) -> list[int]:
        return [i for i, b in enumerate(self.blocks) if b == self.blocks[a]]

    def __le__(self, other: "Congruence") -> bool:
        return all(other.blocks[a] == other.blocks[b] for a, b in enumerate(self.blocks))

    def meet(self, other: "Congruence") -> "Congruence":
        return Congruence.from_labels(list(zip(self.blocks, other.blocks)))

    def is_compatible(self, A: FiniteAlgebra) -> bool:
        blk = np.array(self.blocks)
        for name, k in A.signature:
            if k == 0:
                continue
            tbl = A.table(name)
            if not np.array_equal(blk[tbl], blk[tbl[np.ix_(*([blk] * k))]]):
                return False
        return True


def generate_congruence(A: FiniteAlgebra, pairs: Iterable[tuple[int, int]]) -> Congruence:
    """Least congruence of ``A`` containing ``pairs``.

    Every pair that causes a merge is pushed through all basic translations
    ``x -> f(c1, .., x, .., ck)``; the images are merged in turn.
    """
    n = A.size
    uf = _UnionFind(n)
    work = []
    for a, b in pairs:
        if not (0 <= a < n and 0 <= b < n):
            raise AlgebraError(f"pair ({a}, {b}) out of range")
        if uf.union(a, b):
            work.append((a, b))
    ops = [(A.table(name), k) for name, k in A.signature if k > 0]
    while work:
        a, b = work.pop()
        for tbl, k in ops:
            for i in range(k):
                xs = np.take(tbl, a, axis=i).ravel().tolist()
                ys = np.take(tbl, b, axis=i).ravel().tolist()
                for x, y in zip(xs, ys):
                    if x != y and uf.union(x, y):
                        work.append((x, y))
    return Congruence(tuple(uf.find(i) for i in range(n)))


# ----------------------------------------------------------- homomorphisms


@dataclass(frozen=True)
class Homomorphism:
    domain: FiniteAlgebra
    codomain: FiniteAlgebra
    map: tuple[int, ...]

    def __call__(self, a: int) -> int:
        return self.map[a]

    def kernel(self) -> Congruence:
        return Congruence.from_labels(self.map)


def is_homomorphism(A: FiniteAlgebra, B: FiniteAlgebra, mapping: Sequence[int]) -> bool:
    if A.signature != B.signature or len(mapping) != A.size:
        return False
    m = np.asarray(mapping, dtype=np.int64)
    for name, k in A.signature:
        ta, tb = A.table(name), B.table(name)
        if k == 0:
            if m[int(ta)] != int(tb):
                return False
        elif not np.array_equal(m[ta], tb[np.ix_(*([m] * k))]):
            return False
    return True


def quotient(A: FiniteAlgebra, theta: Congruence) -> tuple[FiniteAlgebra, Homomorphism]:
    """Quotient on the block representatives (in increasing order) and its canonical map."""
    if theta.size != A.size:
        raise AlgebraError("congruence lives on a universe of the wrong size")
    if not theta.is_compatible(A):
        raise AlgebraError("partition is not compatible with the operations")
    reps = theta.representatives()
    index = {r: i for i, r in enumerate(reps)}
    proj = np.array([index[b] for b in theta.blocks], dtype=np.int64)
    r = np.array(reps, dtype=np.int64)
    tables = {}
    for name, k in A.signature:
        tbl = A.table(name)
        tables[name] = np.array(proj[int(tbl)]) if k == 0 else proj[tbl[np.ix_(*([r] * k))]]
    Q = FiniteAlgebra(A.signature, len(reps), tables)
    return Q, Homomorphism(A, Q, tuple(proj.tolist()))


def _isomorphism_search(A: FiniteAlgebra, B: FiniteAlgebra, first: bool):
    """Backtracking over partial bijections closed under the operations.

    Each newly mapped element is combined with the already mapped ones
    through every table; forced images are assigned immediately and any
    clash prunes the branch.
    """
    if A.signature != B.signature or A.size != B.size:
        return []
    n = A.size
    ops = [(k, A._flat[name], B._flat[name]) for name, k in A.signature if k > 0]
    image = [-1] * n
    used = [False] * n
    order: list[int] = []
    found = []

    def set_image(a, b):
        if image[a] == -1:
            if used[b]:
                return False
            image[a] = b
            used[b] = True
            order.append(a)
            return True
        return image[a] == b

    for name, k in A.signature:
        if k == 0 and not set_image(A.apply(name, ()), B.apply(name, ())):
            return []

    def propagate(pos):
        while pos < len(order):
            for k, fa, fb in ops:
                for t in itertools.product(range(pos + 1), repeat=k):
                    if max(t) != pos:
                        continue
                    ia = ib = 0
                    for p in t:
                        ia = ia * n + order[p]
                        ib = ib * n + image[order[p]]
                    if not set_image(fa[ia], fb[ib]):
                        return False
            pos += 1
        return True

    def undo(mark):
        while len(order) > mark:
            a = order.pop()
            used[image[a]] = False
            image[a] = -1

    if not propagate(0):
        undo(0)
        return []

    def search():
        if len(order) == n:
            found.append(tuple(image))
            return first
        x = image.index(-1)
        for y in range(n):
            if used[y]:
                continue
            mark = len(order)
            set_image(x, y)
            if propagate(mark) and search():
                return True
            undo(mark)
        return False

    search()
    return sorted(found)


def find_automorphisms(A: FiniteAlgebra) -> list[tuple[int, ...]]:
    """Every automorphism of ``A`` as an image tuple, in lexicographic order."""
    return _isomorphism_search(A, A, first=False)


def find_isomorphism(A: FiniteAlgebra, B: FiniteAlgebra):
    found = _isomorphism_search(A, B, first=True)
    return found[0] if found else None


def is_isomorphic(A: FiniteAlgebra, B: FiniteAlgebra) -> bool:
    return find_isomorphism(A, B) is not None


# --------------------------------------------------------------- centrality


def is_central(A: FiniteAlgebra, alpha: Congruence) -> bool:
    """Term condition C(alpha, 1; 0), i.e. alpha lies below the center.

    The matrices t(a, c), t(a, d) / t(b, c), t(b, d) with ``a alpha b`` are
    exactly the elementary steps of the congruence on ``A x A`` generated by
    the diagonal pairs ``((a, a), (b, b))``.  The condition holds iff that
    congruence never links a diagonal element to an off-diagonal one.
    """
    n = A.size
    AA = direct_product(A, A)
    theta = generate_congruence(AA, [(a * n + a, b * n + b) for a, b in alpha.pairs()])
    diagonal = {a * n + a for a in range(n)}
    for c in theta.classes():
        if any(x in diagonal for x in c) and not all(x in diagonal for x in c):
            return False
    return True


# ------------------------------------------------------------- permutations


def compose(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """``p o q``: apply q first."""
    return tuple(p[x] for x in q)


def inverse(p: Sequence[int]) -> tuple[int, ...]:
    out = [0] * len(p)
    for i, x in enumerate(p):
        out[x] = i
    return tuple(out)


def identity_map(n: int) -> tuple[int, ...]:
    return tuple(range(n))
