"""Randomized laws over small extensions.

Each example draws an extension from a pool of groups and modules, then a
lifting, cocycles and compatible pairs from it.  Expensive objects are
cached per extension so the whole file stays well under two minutes.
"""

import functools
import itertools

import numpy as np
from hypothesis import given, settings, strategies as st

from affina.algebra import is_homomorphism, parse_term
from affina.cohomology import (
    add_cocycles,
    cohomology_group,
    equivalent,
    group_axiom_failures,
    sub_cocycles,
)
from affina.datum import AffineDatum, Extension, all_liftings, cocycle_from_lifting, deconstruct, reconstruct
from affina.instance import parse_instance
from affina.instances import (
    GROUP_M,
    GROUP_SIGNATURE,
    abelian,
    abelian_kernel,
    bundled_instances,
    cyclic,
    dihedral4,
    group_identities,
    normal_congruences,
    quaternion,
    symmetric3,
)
from affina.wells import CompatiblePair, act, act_class, compatible_pairs, ker_wells, wells_map

PROPS = settings(max_examples=150, deadline=None)


def _pool():
    out = []
    m = parse_term(GROUP_M, GROUP_SIGNATURE)
    U = group_identities()
    for G in [cyclic(4), cyclic(6), cyclic(8), abelian(2, 2), abelian(2, 4), symmetric3(), dihedral4(), quaternion()]:
        for th in normal_congruences(G):
            if 1 < th.num_classes() < G.size and abelian_kernel(G, th):
                out.append((Extension.of(G, th), m, U))
    docs = bundled_instances()
    for ident in ["f2sq", "f3sq", "f2x-dual-numbers"]:
        inst = parse_instance(docs[ident])
        out.append((inst.extension, inst.m, inst.identities))
    return out


POOL = _pool()


@functools.lru_cache(maxsize=None)
def setup(i):
    E, m, U = POOL[i]
    D = AffineDatum(E, m)
    H = cohomology_group(D, U)
    pairs = compatible_pairs(D)
    cocycles = [T for c in H.classes for T in c]
    return D, H, pairs, cocycles


@functools.lru_cache(maxsize=None)
def liftings(i):
    return list(itertools.islice(all_liftings(POOL[i][0]), 200))


extensions = st.integers(0, len(POOL) - 1)


@PROPS
@given(extensions, st.data())
def test_cocycle_class_independent_of_lifting(i, data):
    D, H, _, _ = setup(i)
    l1 = data.draw(st.sampled_from(liftings(i)))
    l2 = data.draw(st.sampled_from(liftings(i)))
    T1, T2 = cocycle_from_lifting(D, l1), cocycle_from_lifting(D, l2)
    assert equivalent(D, T1, T2) is not None
    assert H.class_of(T1) == H.class_of(T2)
    # a datum built on another lifting has the same classification
    E, m, U = POOL[i]
    D2 = AffineDatum(E, m, l2)
    assert cohomology_group(D2, U).order == H.order


@PROPS
@given(extensions, st.data())
def test_action_axioms(i, data):
    D, _, pairs, cocycles = setup(i)
    T = data.draw(st.sampled_from(cocycles))
    p = data.draw(st.sampled_from(pairs))
    q = data.draw(st.sampled_from(pairs))
    assert act(D, T, CompatiblePair.identity(D)) == T
    assert act(D, act(D, T, q), p) == act(D, T, p * q)
    # the action respects sums and coboundaries
    S = data.draw(st.sampled_from(cocycles))
    assert act(D, add_cocycles(D, S, T), p) == add_cocycles(D, act(D, S, p), act(D, T, p))


@PROPS
@given(extensions, st.data())
def test_wells_derivation_identity(i, data):
    D, H, pairs, cocycles = setup(i)
    T = data.draw(st.sampled_from(cocycles))
    p = data.draw(st.sampled_from(pairs))
    q = data.draw(st.sampled_from(pairs))
    lhs = wells_map(D, T, p * q, H)
    rhs = H.add(wells_map(D, T, p, H), act_class(H, wells_map(D, T, q, H), p))
    assert lhs == rhs


@PROPS
@given(extensions, st.data())
def test_kernel_intersection_inside_kernel_of_sum(i, data):
    D, H, pairs, cocycles = setup(i)
    T = data.draw(st.sampled_from(cocycles))
    T2 = data.draw(st.sampled_from(cocycles))
    both = set(ker_wells(D, T, H, pairs)) & set(ker_wells(D, T2, H, pairs))
    assert both <= set(ker_wells(D, add_cocycles(D, T, T2), H, pairs))


@PROPS
@given(extensions, st.data())
def test_h2_group_axioms(i, data):
    D, H, _, cocycles = setup(i)
    assert group_axiom_failures(H.table, H.zero) == []
    S = data.draw(st.sampled_from(cocycles))
    T = data.draw(st.sampled_from(cocycles))
    assert H.class_of(add_cocycles(D, S, T)) == H.add(H.class_of(S), H.class_of(T))
    assert H.class_of(sub_cocycles(D, S, S)) == H.zero


@PROPS
@given(extensions, st.data())
def test_round_trip(i, data):
    E, m, _ = POOL[i]
    l = data.draw(st.sampled_from(liftings(i)))
    D, T = deconstruct(E, l, m)
    AT = reconstruct(D, T)
    g = D.gamma.tolist()
    assert len(set(g)) == E.A.size
    assert is_homomorphism(E.A, AT, g)
    assert np.array_equal(D.rho[D.gamma], np.array(E.pi))
