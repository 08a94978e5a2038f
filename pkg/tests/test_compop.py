import numpy as np
import pytest

from nclp.compop import (
    SuperOperator,
    build_composition,
    change_of_weights,
    change_of_weights_scale,
    classify_characteristic_preserving,
    contraction_inclusion,
    identity_operator,
    left_multiplication,
    operator_norm,
    recover_left_multiplier,
    recover_right_multiplier,
    splitting_inequality_check,
)
from nclp.errors import (
    ExponentOrder,
    NotCommuting,
    NotFaithful,
    NotModuleMap,
    NotSummable,
    RatioMismatch,
)
from nclp.exponents import Exponent, INF
from nclp.haagerup import embed
from nclp.jordan import (
    JordanMorphismSpec,
    Tile,
    identity_morphism,
    random_morphism,
    transpose_morphism,
)
from nclp.matcore import BlockMatrix, BlockProfile, schatten_norm
from nclp.sampling import element, generator, hermitian, psd, unitary
from nclp.vnops import Weight, evaluate

PROF2 = BlockProfile([2])
PROF23 = BlockProfile([2, 3])


def faithful(profile, rng):
    return Weight(psd(profile, rng, eps=0.15))


# -- SuperOperator plumbing -------------------------------------------------


def test_materialisation_matches_action():
    rng = generator(0)
    w1 = faithful(PROF23, rng)
    w2 = faithful(PROF23, rng)
    C = build_composition(transpose_morphism(PROF23), w1, w2, 3, 1.5)
    for _ in range(5):
        x = element(PROF23, rng)
        assert (C.apply(x) - C.apply_via_matrix(x)).fro_norm() < 1e-10 * (1 + x.fro_norm())


def test_trace_dual_pairing():
    rng = generator(1)
    w1 = faithful(PROF2, rng)
    w2 = faithful(PROF2, rng)
    C = build_composition(identity_morphism(PROF2), w1, w2, 2, 1)
    D = C.trace_dual()
    assert D.p == Exponent(1).conjugate() == INF
    for _ in range(5):
        x = element(PROF2, rng)
        g = element(PROF2, rng)
        lhs = (g @ C.apply(x)).trace()
        rhs = (D.apply(g) @ x).trace()
        assert abs(lhs - rhs) < 1e-10 * (1 + abs(lhs))


# -- build_composition ------------------------------------------------------


def test_identity_composition_cancels():
    rng = generator(2)
    w = faithful(PROF23, rng)
    C = build_composition(identity_morphism(PROF23), w, w, 2, 2)
    x = element(PROF23, rng)
    assert (C.apply(x) - x).fro_norm() < 1e-10 * (1 + x.fro_norm())
    est = operator_norm(C)
    assert est.certified
    assert est.lower_bound == pytest.approx(1.0, abs=1e-9)


def test_composition_requires_order_and_faithfulness():
    rng = generator(3)
    w = faithful(PROF2, rng)
    with pytest.raises(ExponentOrder):
        build_composition(identity_morphism(PROF2), w, w, 1, 2)
    singular = Weight.diagonal(PROF2, [1.0, 0.0])
    with pytest.raises(NotFaithful):
        build_composition(identity_morphism(PROF2), singular, w, 2, 1)


def test_infinity_domain_bound():
    # ||C_J(a)||_q <= ||C_J(1)||_q ||a||_inf for self-adjoint a
    rng = generator(4)
    for k in range(8):
        spec = random_morphism(rng)
        w1 = faithful(spec.profile1, rng)
        w2 = faithful(spec.profile2, rng)
        C = build_composition(spec, w1, w2, "inf", 2)
        lead = schatten_norm(C.apply(BlockMatrix.identity(spec.profile1)), 2)
        for _ in range(10):
            a = hermitian(spec.profile1, rng)
            assert schatten_norm(C.apply(a), 2) <= lead * schatten_norm(a, "inf") + 1e-9


# -- operator_norm ----------------------------------------------------------


def test_norm_left_multiplication_certified():
    c = BlockMatrix.diagonal(PROF2, [2.0, 3.0])
    est = operator_norm(left_multiplication(PROF2, c, 2, 2))
    assert est.certified
    assert est.lower_bound == pytest.approx(3.0, abs=1e-10)


def test_norm_identity_all_pairs():
    for p in (1, 1.5, 2, 3, "inf"):
        est = operator_norm(identity_operator(PROF2, p), restarts=4, seed=11)
        assert est.lower_bound == pytest.approx(1.0, abs=1e-7)


def test_alternating_reaches_certified_value():
    rng = generator(5)
    for k in range(6):
        mat = rng.standard_normal((13, 13)) + 1j * rng.standard_normal((13, 13))
        S = SuperOperator.from_matrix(PROF23, PROF23, 2, 2, mat)
        exact = operator_norm(S).lower_bound
        alt = operator_norm(S, restarts=16, seed=k, method="alternating").lower_bound
        assert alt <= exact + 1e-9
        assert alt == pytest.approx(exact, rel=1e-4)


def test_norm_deterministic_given_seed():
    rng = generator(6)
    mat = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    S = SuperOperator.from_matrix(PROF2, PROF2, 3, 1.5, mat)
    a = operator_norm(S, restarts=5, seed=123)
    b = operator_norm(S, restarts=5, seed=123)
    assert a.lower_bound == b.lower_bound


# -- change of weights ------------------------------------------------------


def test_change_of_weights_identity():
    rng = generator(7)
    w = faithful(PROF2, rng)
    cw = change_of_weights(w, w, 2, 2)
    assert cw.d.allclose(BlockMatrix.identity(PROF2), tol=1e-9)
    assert cw.bound == pytest.approx(1.0, abs=1e-9)


def test_change_of_weights_diagonal_example():
    h = Weight.diagonal(PROF2, [0.5, 0.5])
    k = Weight.diagonal(PROF2, [0.8, 0.2])
    cw = change_of_weights(h, k, 2, 1)
    d_diag = np.diagonal(cw.d.blocks[0]).real
    assert d_diag == pytest.approx([1.063659, 0.531830], abs=1e-6)
    dd = (cw.d.adjoint() @ cw.d).blocks[0]
    assert np.allclose(np.diagonal(dd).real, [0.8 * np.sqrt(2), 0.2 * np.sqrt(2)], atol=1e-12)
    assert cw.bound == pytest.approx(np.sqrt(1.36), abs=1e-12)
    assert cw.bound == pytest.approx(1.166190, abs=1e-6)
    # the connecting element solves the problem exactly
    dh = cw.d @ h.power(0.25)
    assert (dh.adjoint() @ dh - k.power(1.0)).fro_norm() < 1e-12


def test_change_of_weights_singular_target():
    rng = generator(8)
    w = faithful(PROF2, rng)
    k = Weight.diagonal(PROF2, [1.0, 0.0])
    cw = change_of_weights(w, k, 2, 1)
    # d is supported on the support of k
    e = BlockMatrix.diagonal(PROF2, [1.0, 0.0])
    assert (e @ cw.d - cw.d).fro_norm() < 1e-10
    # the induced map lands in the compression
    x = embed(w, element(PROF2, rng), 2).matrix
    out = cw.operator.apply(x)
    assert (e @ out @ e - out).fro_norm() < 1e-10


def test_change_of_weights_soundness_random():
    rng = generator(9)
    for pair in ((2, 1), (3, 1.5), (4, 2), (2, 2)):
        for _ in range(5):
            h = faithful(PROF2, rng)
            k = faithful(PROF2, rng)
            cw = change_of_weights(h, k, *pair)
            est = operator_norm(cw.operator, restarts=4, seed=5)
            assert est.lower_bound <= cw.bound + 1e-6


def test_change_of_weights_sup_domain_corners():
    # p = inf: the connecting element is k^(1/2q) itself and the bound is
    # attained for commuting data; q = inf compresses to the support
    rng = generator(19)
    w = faithful(PROF23, rng)
    v = faithful(PROF23, rng)
    for q in (1, 2, "inf"):
        cw = change_of_weights(w, v, "inf", q)
        est = operator_norm(cw.operator, restarts=4, seed=3)
        assert est.lower_bound <= cw.bound + 1e-6
    # at (inf, 1) the bound is the total mass of the target weight
    cw1 = change_of_weights(w, v, "inf", 1)
    assert cw1.bound == pytest.approx(v.total(), rel=1e-10)


def test_norm_rank_one_map_exact():
    # a map concentrating one matrix entry: the L^3 -> L^1 norm is the
    # coefficient itself, reached by a rank-one input
    mat = np.zeros((4, 4), dtype=complex)
    mat[0, 3] = 2.5
    S = SuperOperator.from_matrix(PROF2, PROF2, 3, 1, mat)
    est = operator_norm(S, restarts=6, seed=0)
    assert est.lower_bound == pytest.approx(2.5, abs=1e-8)


def test_change_of_weights_scale():
    h = Weight.diagonal(PROF2, [0.5, 0.5])
    k = Weight.diagonal(PROF2, [0.8, 0.2])
    report = change_of_weights_scale(h, k, 2, [(2, 1), (4, 2)])
    assert report.all_ok
    assert all(np.isfinite(e.bound) for e in report.entries)
    ident = change_of_weights_scale(h, k, 1, [(1, 1), (2, 2), ("inf", "inf")])
    assert ident.all_ok
    with pytest.raises(RatioMismatch):
        change_of_weights_scale(h, k, 2, [(3, 1)])


# -- multiplier recovery ----------------------------------------------------


def test_recover_left_multiplier_round_trip():
    rng = generator(10)
    w = faithful(PROF23, rng)
    for p, q in ((2, 1), (3, 1.5), (2, 2)):
        c = element(PROF23, rng)
        T = left_multiplication(PROF23, c, p, q)
        rec = recover_left_multiplier(T, w)
        assert (rec.multiplier - c).fro_norm() < 1e-8 * (1 + c.fro_norm())
        # duality: T* is right multiplication by the same element
        dual = recover_right_multiplier(T.trace_dual(), w)
        assert (dual.multiplier - c).fro_norm() < 1e-8 * (1 + c.fro_norm())


def test_recover_left_multiplier_upper_triangular_example():
    w = Weight.diagonal(PROF2, [0.6, 0.4])
    c = BlockMatrix(PROF2, [np.array([[1.0, 2.0], [0.0, 1.0]])])
    rec = recover_left_multiplier(left_multiplication(PROF2, c, 2, 2), w)
    assert (rec.multiplier - c).fro_norm() < 1e-10


def test_recover_rejects_non_module_maps():
    rng = generator(11)
    w = faithful(PROF2, rng)
    transpose_map = SuperOperator(PROF2, PROF2, 2, 2, lambda x: x.transpose())
    with pytest.raises(NotModuleMap):
        recover_left_multiplier(transpose_map, w)
    u = unitary(2, rng)
    conj_map = SuperOperator(
        PROF2, PROF2, 2, 2,
        lambda x: BlockMatrix(PROF2, [u @ x.blocks[0] @ u.conj().T]),
    )
    with pytest.raises(NotModuleMap):
        recover_left_multiplier(conj_map, w)


# -- necessity direction: the dual density ----------------------------------


def test_trace_dual_density_identity():
    # composing C_J with the trace and dualising recovers the pushforward
    # density: tr(b embed(w1, a, r)) = k(a) with b = h^(-1/2r) k h^(-1/2r)
    rng = generator(12)
    for _ in range(6):
        spec = random_morphism(rng, allow_partial=False)
        w1 = faithful(spec.profile1, rng)
        w2 = faithful(spec.profile2, rng)
        r = Exponent(2)
        C = build_composition(spec, w1, w2, r, 1)
        from nclp.jordan import pushforward_density

        k = pushforward_density(spec, w2)
        half = w1.power(-float(r.reciprocal()) / 2)
        b = half @ k.rho @ half
        for s, size in enumerate(spec.profile1.dims):
            for i in range(size):
                for j in range(size):
                    a = BlockMatrix.matrix_unit(spec.profile1, s, i, j)
                    lhs = (b @ embed(w1, a, r).matrix).trace()
                    tr_c = C.apply(embed(w1, a, r).matrix).trace()
                    rhs = evaluate(k, a)
                    assert abs(lhs - rhs) < 1e-8 * (1 + abs(rhs))
                    assert abs(tr_c - rhs) < 1e-8 * (1 + abs(rhs))


# -- classifier -------------------------------------------------------------


def test_classifier_accepts_composition_operators():
    rng = generator(13)
    w1 = faithful(PROF2, rng)
    w2 = faithful(PROF2, rng)
    for spec in (identity_morphism(PROF2), transpose_morphism(PROF2)):
        C = build_composition(spec, w1, w2, 2, 1)
        res = classify_characteristic_preserving(C, w1, w2)
        assert res.accepted
        for i in range(2):
            for j in range(2):
                u = BlockMatrix.matrix_unit(PROF2, 0, i, j)
                assert (res.morphism.apply(u) - spec.apply(u)).fro_norm() < 1e-8


def test_classifier_rejects_perturbation():
    rng = generator(14)
    w1 = faithful(PROF2, rng)
    w2 = faithful(PROF2, rng)
    C = build_composition(identity_morphism(PROF2), w1, w2, 2, 1)
    mat = np.array(C.matrix())
    e11 = BlockMatrix.matrix_unit(PROF2, 0, 0, 0).flat()
    trace_vec = BlockMatrix.identity(PROF2).flat().conj()
    S = SuperOperator.from_matrix(PROF2, PROF2, 2, 1, mat + 0.1 * np.outer(e11, trace_vec))
    res = classify_characteristic_preserving(S, w1, w2)
    assert not res.accepted
    probe, image, residual = res.witness
    assert residual > 1e-7


def test_classifier_multiplicity_under_global_unitary():
    # two H copies and one A copy of the same source block, all hidden
    # behind per-tile unitaries and one unitary on the destination block
    rng = generator(42)
    big = BlockProfile([7])
    spec = JordanMorphismSpec(
        PROF2, big,
        [Tile(0, 0, 0, "H", conj_unitary=unitary(2, rng)),
         Tile(0, 0, 2, "H", conj_unitary=unitary(2, rng)),
         Tile(0, 0, 4, "A", conj_unitary=unitary(2, rng))],
        block_unitaries=[unitary(7, rng)],
    )
    w1 = faithful(PROF2, rng)
    w2 = faithful(big, rng)
    C = build_composition(spec, w1, w2, 2, 1)
    res = classify_characteristic_preserving(C, w1, w2)
    assert res.accepted
    assert sorted(t.kind for t in res.morphism.tiles) == ["A", "H", "H"]
    for i in range(2):
        for j in range(2):
            u = BlockMatrix.matrix_unit(PROF2, 0, i, j)
            assert (res.morphism.apply(u) - spec.apply(u)).fro_norm() < 1e-8


def test_classifier_handles_kills_and_multiplicity():
    rng = generator(15)
    # one source block dropped, one duplicated
    spec = JordanMorphismSpec(
        PROF23, BlockProfile([5]),
        [Tile(0, 0, 0, "H"), Tile(0, 0, 2, "A", conj_unitary=unitary(2, rng))],
    )
    w1 = faithful(PROF23, rng)
    w2 = faithful(BlockProfile([5]), rng)
    C = build_composition(spec, w1, w2, 3, 1.5)
    res = classify_characteristic_preserving(C, w1, w2)
    assert res.accepted
    worst = 0.0
    for s, size in enumerate(PROF23.dims):
        for i in range(size):
            for j in range(size):
                u = BlockMatrix.matrix_unit(PROF23, s, i, j)
                worst = max(worst, (res.morphism.apply(u) - spec.apply(u)).fro_norm())
    assert worst < 1e-8


# -- contraction inclusion --------------------------------------------------


def test_contraction_inclusion_identity():
    rng = generator(16)
    w = faithful(PROF2, rng)
    inc = contraction_inclusion(w, w, identity_morphism(PROF2), 2)
    assert inc.constant == pytest.approx(1.0, abs=1e-9)
    est = operator_norm(inc.operator, restarts=3, seed=2)
    assert est.lower_bound <= 2.0 * inc.bound + 1e-6


def test_contraction_inclusion_diagonal_subalgebra():
    # the diagonal of M_2 sits inside M_2 with constant 1 for the trace form
    diag_prof = BlockProfile([1, 1])
    wB = Weight.diagonal(diag_prof, [0.5, 0.5])
    w2 = Weight(BlockMatrix.identity(PROF2) * 0.5)
    inclusion = JordanMorphismSpec(
        diag_prof, PROF2, [Tile(0, 0, 0, "H"), Tile(1, 0, 1, "H")]
    )
    inc = contraction_inclusion(wB, w2, inclusion, 2)
    assert inc.constant == pytest.approx(1.0, abs=1e-9)
    # the embedded copy is the plain inclusion of diagonal L^p
    x = embed(wB, BlockMatrix.diagonal(diag_prof, [1.0, -2.0]), 2).matrix
    out = inc.operator.apply(x)
    assert np.allclose(out.blocks[0], np.diag([1.0, -2.0]) / np.sqrt(2), atol=1e-10)


def test_contraction_inclusion_modular_invariant_block():
    # block-diagonal subalgebra of M_3 with a matching block density: the map
    # agrees with the plain inclusion after the density identification
    prof_b = BlockProfile([2, 1])
    prof3 = BlockProfile([3])
    rng = generator(17)
    blk = psd(prof_b, rng, eps=0.2)
    w2 = Weight(BlockMatrix(prof3, [np.block([
        [blk.blocks[0], np.zeros((2, 1))],
        [np.zeros((1, 2)), blk.blocks[1]],
    ])]))
    wB = Weight(blk)
    inclusion = JordanMorphismSpec(prof_b, prof3, [Tile(0, 0, 0, "H"), Tile(1, 0, 2, "H")])
    inc = contraction_inclusion(wB, w2, inclusion, 3)
    assert inc.constant == pytest.approx(1.0, abs=1e-8)
    a = hermitian(prof_b, rng)
    lhs = inc.operator.apply(embed(wB, a, 3).matrix)
    rhs = embed(w2, inclusion.apply(a), 3).matrix
    assert (lhs - rhs).fro_norm() < 1e-9


# -- splitting inequality ---------------------------------------------------


def test_splitting_scalar_example():
    one = BlockProfile([1])
    hz = Weight.diagonal(one, [1.0])
    h1z = Weight.diagonal(one, [1.0])
    hJ = Weight.diagonal(one, [2.0])
    rep = splitting_inequality_check(hJ, hz, h1z, 2)
    assert rep.ok
    assert rep.min_gap_eigenvalue == pytest.approx(2 - np.sqrt(2), abs=1e-12)


def test_splitting_disjoint_supports_equality():
    hz = Weight.diagonal(PROF2, [1.0, 0.0])
    h1z = Weight.diagonal(PROF2, [0.0, 1.0])
    hJ = Weight.diagonal(PROF2, [1.0, 1.0])
    rep = splitting_inequality_check(hJ, hz, h1z, 2)
    assert rep.ok
    assert abs(rep.min_gap_eigenvalue) < 1e-12


def test_splitting_commuting_diagonals():
    hz = Weight.diagonal(PROF2, [1.0, 2.0])
    h1z = Weight.diagonal(PROF2, [3.0, 1.0])
    hJ = Weight.diagonal(PROF2, [4.0, 3.0])
    rep = splitting_inequality_check(hJ, hz, h1z, 3)
    assert rep.ok and rep.min_gap_eigenvalue >= -1e-9


def test_splitting_preconditions():
    rng = generator(18)
    hz = Weight.diagonal(PROF2, [1.0, 2.0])
    rotated = Weight(BlockMatrix(PROF2, [np.array([[2.0, 1.0], [1.0, 2.0]])]))
    with pytest.raises(NotCommuting):
        splitting_inequality_check(hz, hz, rotated, 2)
    with pytest.raises(NotSummable):
        splitting_inequality_check(hz, hz, hz, 2)
