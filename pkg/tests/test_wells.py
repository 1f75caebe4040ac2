import itertools

from affina.algebra import (
    Congruence,
    FiniteAlgebra,
    Signature,
    compose,
    find_automorphisms,
    inverse,
    parse_identity,
    parse_term,
)
from affina.cohomology import cohomology_group, derivations, equivalent, zero_cocycle
from affina.datum import AffineDatum, Extension, cocycle_from_lifting
from affina.instance import parse_instance
from affina.instances import (
    GROUP_M,
    GROUP_SIGNATURE,
    abelian,
    bundled_instances,
    cyclic,
    group_identities,
    symmetric3,
)
from affina.wells import (
    CompatiblePair,
    act,
    aut_alpha,
    central_simplification,
    check_exactness_thm2,
    compatible_pairs,
    der_iso,
    derivation_identity,
    ker_W,
    ker_wells,
    pair_failures,
    psi,
    stabilizers,
    thm3_decompose,
    wells_map,
)

import oracles

M = parse_term(GROUP_M, GROUP_SIGNATURE)
U = group_identities()


def datum(G, classes, l=None):
    return AffineDatum(Extension.of(G, Congruence.from_classes(G.size, classes)), M, l)


def z4():
    return datum(cyclic(4), [[0, 2], [1, 3]])


def f3sq():
    return parse_instance(bundled_instances()["f3sq"])


def test_aut_alpha_examples():
    D = z4()
    assert sorted(aut_alpha(D.extension)) == [(0, 1, 2, 3), (0, 3, 2, 1)]
    D = datum(abelian(2, 2), [[0, 1], [2, 3]])
    assert len(aut_alpha(D.extension)) == 2
    E = Extension.of(symmetric3(), Congruence.full(6))
    assert sorted(aut_alpha(E)) == sorted(find_automorphisms(symmetric3()))


def test_psi_examples():
    D = z4()
    ident = CompatiblePair.identity(D)
    assert psi(D, (0, 1, 2, 3)) == ident
    assert psi(D, (0, 3, 2, 1)) == ident
    inst = f3sq()
    D = inst.datum()
    # diag(2, 2) sends a + 3x to 2a + 3(2x)
    phi = tuple((2 * (i % 3)) % 3 + 3 * ((2 * (i // 3)) % 3) for i in range(9))
    p = psi(D, phi)
    xcoord = [D.lifting[q] // 3 for q in range(3)]
    assert all(xcoord[p.kappa[q]] == (2 * xcoord[q]) % 3 for q in range(3))
    for s, (a, b) in enumerate(D.rep_pair):
        c, d = D.rep_pair[p.sigma[s]]
        assert (d - c) % 3 == (2 * (b - a)) % 3


def test_compatible_pairs_match_naive():
    for G, classes in [(cyclic(4), [[0, 2], [1, 3]]), (symmetric3(), [[0, 3, 4], [1, 2, 5]]),
                       (cyclic(9), [[0, 3, 6], [1, 4, 7], [2, 5, 8]])]:
        D = datum(G, classes)
        nd = oracles.NaiveDatum(G, D.extension.classes(), oracles.group_m_on(G))
        assert len(compatible_pairs(D)) == len(oracles.naive_compatible(nd))
    assert len(compatible_pairs(z4())) == 1
    assert len(compatible_pairs(f3sq().datum())) == 4


def test_pair_failures_name_the_condition():
    D = datum(cyclic(9), [[0, 3, 6], [1, 4, 7], [2, 5, 8]])
    autS = find_automorphisms(D.S)
    autQ = find_automorphisms(D.Q)
    bad = [pair_failures(D, CompatiblePair(s, k)) for s in autS for k in autQ]
    assert any(b for b in bad)
    assert all(f.split()[0] in ("C1", "C2", "C3") for b in bad for f in b)


def test_action_examples():
    D = z4()
    T = cocycle_from_lifting(D, D.lifting)
    ident = CompatiblePair.identity(D)
    assert act(D, T, ident) == T
    for p in compatible_pairs(D):
        assert act(D, zero_cocycle(D), p) == zero_cocycle(D)
        assert equivalent(D, act(D, T, p), T) is not None


def test_wells_examples():
    D = z4()
    H = cohomology_group(D, U)
    T = cocycle_from_lifting(D, D.lifting)
    pairs = compatible_pairs(D)
    assert wells_map(D, T, CompatiblePair.identity(D), H) == H.zero
    assert all(wells_map(D, zero_cocycle(D), p, H) == H.zero for p in pairs)
    assert ker_wells(D, T, H, pairs) == pairs
    assert ker_W(H, pairs) == list(range(H.order))


def test_kernel_of_zero_is_everything_for_f3sq():
    inst = f3sq()
    D = inst.datum()
    H = inst.cohomology()
    pairs = compatible_pairs(D)
    assert ker_wells(D, zero_cocycle(D), H, pairs) == pairs


def test_derivation_identity_orientation():
    D = datum(cyclic(9), [[0, 3, 6], [1, 4, 7], [2, 5, 8]])
    H = cohomology_group(D, U)
    pairs = compatible_pairs(D)
    for T in H.reps:
        res = derivation_identity(D, T, H, pairs)
        assert res["left"]
    # some class has a Wells map that does not vanish
    T = cocycle_from_lifting(D, D.lifting)
    assert len(ker_wells(D, T, H, pairs)) < len(pairs)


def test_stabilizer_examples():
    D = z4()
    assert sorted(stabilizers(D)) == [(0, 1, 2, 3), (0, 3, 2, 1)]
    E = Extension.of(cyclic(3), Congruence.identity(3))
    D = AffineDatum(E, M)
    assert stabilizers(D) == [(0, 1, 2)]
    inst = parse_instance(bundled_instances()["f2sq"])
    assert len(stabilizers(inst.datum())) == 2


def test_der_iso_round_trip():
    for D in [z4(), datum(symmetric3(), [[0, 3, 4], [1, 2, 5]]), f3sq().datum()]:
        iso = der_iso(D)
        assert iso["injective"] and iso["image_is_stab"] and iso["round_trip"]
        assert len(iso["der"]) == len(derivations(D))


def test_exactness_sizes():
    expected = {
        "z4": (2, 2, 1, 2),
        "v4": (2, 2, 1, 2),
        "f3sq": (3, 12, 4, 1),
        "s3-noncentral": (3, 6, 2, 1),
    }
    docs = bundled_instances()
    for ident, sizes in expected.items():
        inst = parse_instance(docs[ident])
        rep = check_exactness_thm2(inst.datum(), inst.identities, inst.cohomology())
        assert rep["pass"], rep["clauses"]
        assert tuple(rep["sizes"]) == sizes


def test_exactness_with_nontrivial_wells_map():
    D = datum(cyclic(9), [[0, 3, 6], [1, 4, 7], [2, 5, 8]])
    rep = check_exactness_thm2(D, U)
    assert rep["pass"]
    assert rep["ker_WT"] == rep["image_psi"] < rep["sizes"][2]


def test_decomposition_examples():
    inst = f3sq()
    rep = thm3_decompose(inst.datum(), inst.identities, inst.cohomology())
    assert rep["pass"] and rep["sizes"]["aut_alpha_hat"] == 12 and rep["pi_zero"]
    rep = thm3_decompose(z4(), U)
    assert rep["pass"]
    assert rep["sizes"]["ker_WT"] == 1 and rep["sizes"]["aut_alpha_hat"] == rep["sizes"]["der"] == 2


def test_decomposition_non_central():
    D = datum(symmetric3(), [[0, 3, 4], [1, 2, 5]])
    rep = thm3_decompose(D, U)
    assert rep["pass"]
    assert rep["sizes"]["aut_alpha_hat"] == rep["sizes"]["der"] * rep["sizes"]["ker_WT"] == 6


def test_central_examples():
    rep = central_simplification(z4())
    assert rep["applicable"] and rep["pass"]
    assert (rep["sizes"]["aut0"], rep["sizes"]["C"]) == (1, 1)
    rep = central_simplification(f3sq().datum())
    assert rep["pass"] and rep["sizes"]["C"] == 4 == rep["sizes"]["aut0"] * rep["sizes"]["autQ"]


def test_central_not_applicable_without_idempotent():
    # Z4 with f(x, y) = x + y + 1; the constant 0 and f leave no idempotent in Z2
    sig = Signature.of(("+", 2), ("-", 1), ("0", 0), ("f", 2))
    base = cyclic(4)
    A = FiniteAlgebra(sig, 4, {
        "+": base.table("+"), "-": base.table("-"), "0": base.table("0"),
        "f": [[(x + y + 1) % 4 for y in range(4)] for x in range(4)],
    })
    E = Extension.of(A, Congruence.from_classes(4, [[0, 2], [1, 3]]))
    D = AffineDatum(E, parse_term(GROUP_M, sig))
    rep = central_simplification(D)
    assert rep["status"] == "not applicable"
    assert "Q has no idempotent element" in rep["reasons"]


def test_central_not_applicable_for_s3():
    rep = central_simplification(datum(symmetric3(), [[0, 3, 4], [1, 2, 5]]))
    assert rep["status"] == "not applicable" and "alpha is not central" in rep["reasons"]


def test_psi_is_a_homomorphism_on_f3sq():
    D = f3sq().datum()
    auts = aut_alpha(D.extension)
    for a, b in itertools.product(auts, repeat=2):
        assert psi(D, compose(a, b)) == psi(D, a) * psi(D, b)
        assert psi(D, inverse(a)) == psi(D, a).inverse()


def test_wells_under_extra_identity():
    # both extensions of the Z4 datum are abelian, so adding commutativity keeps both classes
    abel = U + [parse_identity("+(x,y) = +(y,x)", GROUP_SIGNATURE)]
    D = z4()
    H = cohomology_group(D, abel)
    assert H.order == 2
