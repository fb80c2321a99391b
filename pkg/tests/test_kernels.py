"""Region kernels, scaling identities, cascades, and symmetry machinery."""
import math

import numpy as np
import pytest
from scipy.integrate import quad, dblquad
from scipy.special import j1 as bessel_j1

from rlimited import kernels as K
from rlimited.moments import (Quadrature1D, preset_moments,
                              solve_moment_problem)

TRI = K.TriangleSpec(0.8, 0.7)
TET = K.TetraSpec(1.0, 0.8, 0.7)


def tri_oracle(spec, x, y):
    # integrate the analytic inner strip: K = int_0^dp e^{i2pi ux}
    #   * 2 sin(2 pi s u y) / (2 pi y) du, with the y -> 0 limit 2 s u
    if abs(y) < 1e-14:
        g = lambda u: np.exp(2j * np.pi * u * x) * 2 * spec.s * u
    else:
        g = lambda u: (np.exp(2j * np.pi * u * x)
                       * np.sin(2 * np.pi * spec.s * u * y) / (np.pi * y))
    re, _ = quad(lambda u: g(u).real, 0, spec.dp, epsabs=1e-13, limit=200)
    im, _ = quad(lambda u: g(u).imag, 0, spec.dp, epsabs=1e-13, limit=200)
    return re + 1j * im


def test_k_triangle_against_quadrature_oracle():
    rng = np.random.default_rng(21)
    for _ in range(5):
        x, y = rng.uniform(-2, 2, 2)
        got = K.k_triangle(TRI, x, y)
        assert abs(got - tri_oracle(TRI, x, y)) < 1e-12, (x, y)
    # the centred-series branch and both symmetry lines
    for x, y in [(0.9, 0.0), (0.9, 1e-5), (0.9, 2e-4), (0.0, 0.6)]:
        assert abs(K.k_triangle(TRI, x, y) - tri_oracle(TRI, x, y)) < 1e-12


def test_k_triangle_at_origin_is_area():
    assert K.k_triangle(TRI, 0.0, 0.0) == TRI.area
    assert abs(TRI.area - TRI.dp ** 2 * TRI.s) < 1e-16


def test_triangle_refine_matches_direct():
    x, y = 1.3, -0.8
    pair = (K.k_triangle(TRI, x / 2, y / 2), K.k_triangle(TRI, -x / 2, y / 2))
    got = K.triangle_scaling_refine(TRI, x, y, pair)
    assert abs(got - K.k_triangle(TRI, x, y)) < 1e-13
    # vectorized path agrees with the scalar one
    xs = np.array([0.3, 1.3, -0.7])
    ys = np.array([0.2, -0.8, 0.5])
    vp = K.k_triangle(TRI, xs / 2, ys / 2)
    vm = K.k_triangle(TRI, -xs / 2, ys / 2)
    vec = K.triangle_scaling_refine(TRI, xs, ys, (vp, vm))
    assert np.max(np.abs(vec - K.k_triangle(TRI, xs, ys))) < 1e-13


def test_triangle_invert_steps_one_level_down():
    x, y, m = 1.3, -0.8, 3
    vm = (K.k_triangle(TRI, 2 ** m * x, 2 ** m * y),
          K.k_triangle(TRI, -2 ** m * x, 2 ** m * y))
    got = K.triangle_scaling_invert(TRI, m, x, y, vm)
    want = K.k_triangle(TRI, 2 ** (m - 1) * x, 2 ** (m - 1) * y)
    assert abs(got - want) < 1e-13


def test_triangle_invert_refuses_singular_point():
    # cos(pi dp s 2^m y) = 0 kills the inversion determinant
    m = 1
    y = 0.5 / (TRI.dp * TRI.s * 2 ** m)
    with pytest.raises(ValueError):
        K.triangle_scaling_invert(TRI, m, 0.3, y, (1.0 + 0j, 1.0 + 0j))


def tet_oracle(spec, X, Y, Z):
    def inner(y, z, part):
        v = (np.exp(2j * np.pi * (z * Z + y * Y))
             * 2 * spec.s * y * np.sinc(2 * spec.s * y * X))
        return v.real if part == 0 else v.imag
    re, _ = dblquad(lambda y, z: inner(y, z, 0), 0, spec.h,
                    0, lambda z: spec.dp * z, epsabs=1e-11)
    im, _ = dblquad(lambda y, z: inner(y, z, 1), 0, spec.h,
                    0, lambda z: spec.dp * z, epsabs=1e-11)
    return re + 1j * im


def test_k_tetra_against_quadrature_oracle():
    pts = [(0.3, -0.4, 0.6), (1.2, 0.5, -0.9), (0.0, 0.0, 0.0),
           (1e-4, 0.2, 0.3), (0.5, 1e-4, 0.2)]
    for pt in pts:
        assert abs(K.k_tetra(TET, *pt) - tet_oracle(TET, *pt)) < 1e-9, pt
    assert K.k_tetra(TET, 0.0, 0.0, 0.0) == TET.volume


def test_k_cone_n1_against_quadrature_oracle():
    spec = K.ConeSpec(3.0, 0.8, 1)

    def oracle(t, x):
        if abs(x) < 1e-13:
            f = lambda w: 2 * np.cos(2 * np.pi * t * w) * 2 * spec.pmax * w
        else:
            f = lambda w: (2 * np.cos(2 * np.pi * t * w)
                           * np.sin(2 * np.pi * spec.pmax * w * x)
                           / (np.pi * x))
        return quad(f, 0, spec.omega0, epsabs=1e-13, limit=300)[0]

    for t, x in [(0.1, 0.2), (0.5, -0.7), (0.0, 0.0), (0.3, 1e-5),
                 (1.1, 0.9)]:
        assert abs(K.k_cone(spec, t, x) - oracle(t, x)) < 1e-12, (t, x)
    assert abs(K.k_cone(spec, 0, 0) - spec.measure) < 1e-14


def test_k_cone_n3_against_quadrature_oracle():
    spec = K.ConeSpec(2.0, 0.9, 3)

    def ball_val(km, r):
        if r < 1e-13:
            return 4 * np.pi * km ** 3 / 3
        u = 2 * np.pi * km * r
        return (np.sin(u) - u * np.cos(u)) / (2 * np.pi ** 2 * r ** 3)

    def oracle(t, r):
        f = lambda w: 2 * np.cos(2 * np.pi * t * w) * ball_val(
            spec.pmax * w, r)
        return quad(f, 0, spec.omega0, epsabs=1e-12, limit=300)[0]

    for t, r in [(0.13, 0.21), (0.4, 0.55), (0.0, 0.0), (0.2, 1e-4),
                 (0.8, 0.05)]:
        assert abs(K.k_cone(spec, t, r) - oracle(t, r)) < 1e-8, (t, r)
    assert abs(K.k_cone(spec, 0, 0) - spec.measure) < 1e-12


def test_k_cone_n2_against_bessel_oracle():
    spec = K.ConeSpec(50.0, 1.0, 2)

    def oracle(t, r):
        def g(w):
            R = spec.pmax * w
            z = 2 * np.pi * R * r
            disc = np.pi * R * R if z < 1e-10 else R * bessel_j1(z) / r
            return 2 * np.cos(2 * np.pi * t * w) * disc
        return quad(g, 0, spec.omega0, epsabs=1e-9, epsrel=1e-11,
                    limit=500)[0]

    for t, r in [(0.0, 0.0), (0.003, 0.0), (0.01, 0.02), (0.04, 0.01),
                 (0.02, 0.005)]:
        rel = abs(K.k_cone(spec, t, r) - oracle(t, r)) / spec.measure
        assert rel < 1e-9, (t, r, rel)


def test_k_cone_rejects_bad_dimension():
    with pytest.raises(ValueError):
        K.k_cone(K.ConeSpec(1.0, 1.0, 4), 0.0, 0.0)


def test_k_ball_against_quadrature_oracle():
    km = 1.7

    def oracle(r):
        f = lambda rho: 4 * np.pi * rho ** 2 * np.sinc(2 * rho * r)
        return quad(f, 0, km, epsabs=1e-13)[0]

    for r in (0.0, 1e-5, 0.3, 1.2):
        assert abs(K.k_ball(km, r) - oracle(r)) < 1e-12, r
    assert abs(K.k_ball(km, 0.0) - 4 * np.pi * km ** 3 / 3) < 1e-12


def test_preset_specs_geometry():
    eq = K.equilateral_spec()
    assert abs(eq.area - math.sqrt(3) / 4) < 1e-15
    sub = K.sub_triangle_spec()
    assert abs(sub.area - eq.area / 9) < 1e-15
    rt = K.regular_tetra_spec()
    assert abs(rt.volume - rt.h ** 3 * rt.dp ** 2 * rt.s / 3) < 1e-15
    st = K.sub_tetra_spec()
    assert abs(12 * st.volume - 1 / (6 * math.sqrt(2))) < 1e-15


def test_rotation_matrix_properties():
    R = K.rotation_matrix([1.0, 2.0, -0.5], 0.7)
    assert np.max(np.abs(R @ R.T - np.eye(3))) < 1e-14
    assert abs(np.linalg.det(R) - 1.0) < 1e-12
    assert abs(np.trace(R) - (1 + 2 * np.cos(0.7))) < 1e-14
    axis = np.array([1.0, 2.0, -0.5])
    assert np.max(np.abs(R @ axis - axis)) < 1e-14


def test_tetra_symmetry_group():
    G = K.tetra_symmetry_group()
    assert len(G) == 12
    for R in G:
        assert np.max(np.abs(R @ R.T - np.eye(3))) < 1e-12
        assert abs(np.linalg.det(R) - 1.0) < 1e-12
        # each rotation permutes the vertex set
        for v in K.TETRA_VERTICES:
            d = np.min(np.linalg.norm(K.TETRA_VERTICES - R @ v, axis=1))
            assert d < 1e-12
    # closure under composition
    for A in G:
        for B in G:
            assert any(np.allclose(A @ B, C, atol=1e-12) for C in G)


def test_tetra_contains():
    assert K.tetra_contains(K.TETRA_VERTICES).all()
    assert K.tetra_contains([[0.0, 0.0, 0.0]])[0]
    assert not K.tetra_contains([[1.0, 1.0, 1.0]])[0]


def test_cone_ls_error_decreases_with_terms():
    spec = K.ConeSpec(2.0, 1.0, 2)
    vals = []
    for M in (2, 4, 6, 8):
        rule = solve_moment_problem(preset_moments("j1_cosinc", 1.0,
                                                   2 * M - 1), M)
        vals.append(K.cone_ls_error(spec, rule))
    assert all(v > 0 for v in vals)
    assert all(b < a for a, b in zip(vals, vals[1:])), vals


@pytest.mark.parametrize("M", [4, 6])
def test_cone_ls_error_matches_bruteforce(M):
    spec = K.ConeSpec(2.0, 1.0, 2)
    rule = solve_moment_problem(preset_moments("j1_cosinc", 1.0, 2 * M - 1),
                                M)
    ls = K.cone_ls_error(spec, rule)
    bf = K.cone_ls_error_bruteforce(spec, rule)
    assert abs(bf / ls - 1) < 0.01, (ls, bf)


def test_j1_expansion_rejects_bad_nodes():
    bad = Quadrature1D(weights=np.array([1.0]), nodes=np.array([-0.5]),
                       band=1.0, symmetric=False, provenance={})
    with pytest.raises(ValueError):
        K.j1_expansion_from_rule(bad)


def test_tilde_k_cone_branch_continuity():
    spec = K.ConeSpec(50.0, 1.0, 2)
    rule = solve_moment_problem(preset_moments("j1_cosinc", 1.0, 11), 6)
    _, gamma = K.j1_expansion_from_rule(rule)
    r_sw = 0.5 / (2 * np.pi * spec.omega0 * spec.pmax * np.max(gamma))
    lo = K.tilde_k_cone(spec, rule, 0.013, r_sw * 0.999)
    hi = K.tilde_k_cone(spec, rule, 0.013, r_sw * 1.001)
    assert abs(lo - hi) / spec.measure < 1e-3
    with pytest.raises(ValueError):
        K.tilde_k_cone(K.ConeSpec(1.0, 1.0, 3), rule, 0.0, 0.0)


def test_quadrature_weight_totals():
    tq = K.triangle_quadrature(TRI, 4, 4, profile_grid=0)
    assert abs(tq.weights.sum() - TRI.area) < 1e-14
    eq = K.equilateral_symmetric_quadrature(3, 3, profile_grid=0)
    assert abs(eq.weights.sum() - math.sqrt(3) / 4) < 1e-14
    tt = K.tetra_quadrature(TET, 3, 3, 3, profile_grid=0)
    assert abs(tt.weights.sum() - TET.volume) < 1e-14
    tsym = K.tetra_symmetric_quadrature(2, 2, 2, profile_grid=0)
    assert abs(tsym.weights.sum() - 1 / (6 * math.sqrt(2))) < 1e-14
    spec = K.ConeSpec(2.0, 1.0, 2)
    cq = K.cone_quadrature(spec, 4, 3, 3, target_box=((-0.4, 0.4),) * 3,
                           profile_grid=0)
    assert abs(cq.weights.sum() - spec.measure) < 1e-12 * spec.measure
    vol = 4 * np.pi * 1.3 ** 3 / 3
    bq = K.ball_quadrature(1.3, 4, 4, 3, target_box=((-0.4, 0.4),) * 3,
                           profile_grid=0)
    assert abs(bq.weights.sum() - vol) < 1e-12 * vol


def test_cascade_profiles_and_containment():
    tq = K.triangle_quadrature(TRI, 6, 6, profile_grid=21)
    assert tq.provenance["error_profile"]["max_err"] < 1e-13
    assert K.region_contains(tq.region_tag, tq.nodes, tol=1e-9).all()

    eq = K.equilateral_symmetric_quadrature(4, 4, profile_grid=11)
    assert eq.provenance["error_profile"]["max_err"] < 1e-8
    assert K.region_contains(eq.region_tag, eq.nodes, tol=1e-9).all()

    tt = K.tetra_quadrature(TET, 6, 5, 4, target_box=((-0.3, 0.3),) * 3,
                            profile_grid=5)
    assert tt.provenance["error_profile"]["max_err"] < 1e-13
    assert K.region_contains(tt.region_tag, tt.nodes, tol=1e-9).all()

    vol = 4 * np.pi * 1.3 ** 3 / 3
    bq = K.ball_quadrature(1.3, 7, 6, 4, target_box=((-0.4, 0.4),) * 3,
                           profile_grid=5)
    assert bq.provenance["error_profile"]["max_err"] < 1e-3 * vol
    assert K.region_contains(bq.region_tag, bq.nodes, tol=1e-9).all()


def test_cone_cascade_profile_improves_with_terms():
    spec = K.ConeSpec(2.0, 1.0, 2)
    box = ((-0.4, 0.4),) * 3
    lo = K.cone_quadrature(spec, 4, 3, 3, target_box=box, profile_grid=5)
    hi = K.cone_quadrature(spec, 8, 5, 4, target_box=box, profile_grid=5)
    e_lo = lo.provenance["error_profile"]["max_err"]
    e_hi = hi.provenance["error_profile"]["max_err"]
    assert e_hi < 0.1 * e_lo, (e_lo, e_hi)
    assert K.region_contains(lo.region_tag, lo.nodes, tol=1e-9).all()


def test_quadrature_nd_json_round_trip():
    eq = K.equilateral_symmetric_quadrature(3, 3, profile_grid=0)
    back = K.quadrature_nd_from_json(K.quadrature_nd_to_json(eq))
    assert np.array_equal(back.nodes, eq.nodes)
    assert np.array_equal(back.weights, eq.weights)
    assert back.region_tag == eq.region_tag
    assert len(back.symmetry_group) == 3
    plain = K.triangle_quadrature(TRI, 3, 3, profile_grid=0)
    back2 = K.quadrature_nd_from_json(K.quadrature_nd_to_json(plain))
    assert back2.symmetry_group is None


def test_quadrature_nd_validation_and_eval():
    with pytest.raises(ValueError):
        K.QuadratureND(weights=np.ones(3), nodes=np.zeros((2, 2)),
                       region_tag=K.interval_region())
    q = K.triangle_quadrature(TRI, 3, 3, profile_grid=0)
    one = q.eval_sum(np.array([0.1, 0.2]))
    many = q.eval_sum(np.array([[0.1, 0.2], [0.0, 0.0]]))
    assert np.ndim(one) == 0 and many.shape == (2,)
    assert abs(many[0] - one) < 1e-15
    assert abs(many[1] - q.weights.sum()) < 1e-14


def test_region_transform_and_union_semantics():
    A = np.array([[1.0, 0.3], [0.0, 0.8]])
    base = K.triangle_region(0.8, 0.7)
    tr = K.transformed_region(base, A)
    pts = np.random.default_rng(4).uniform(-1, 1, (200, 2))
    lhs = K.region_contains(tr, pts)
    rhs = K.region_contains(base, pts @ np.linalg.inv(A).T)
    assert np.array_equal(lhs, rhs)
    uni = K.union_region([base, tr])
    both = K.region_contains(uni, pts)
    assert np.array_equal(both, lhs | K.region_contains(base, pts))


def test_region_json_round_trip():
    A = np.array([[1.0, 0.3], [0.0, 0.8]])
    tr = K.transformed_region(K.triangle_region(0.8, 0.7), A)
    assert K.region_from_json(K.region_to_json(tr)) == tr
    uni = K.union_region([K.triangle_region(0.8, 0.7), tr])
    assert K.region_from_json(K.region_to_json(uni)) == uni
    cone = K.cone_region(50.0, 1.0, 2)
    assert K.region_from_json(K.region_to_json(cone)) == cone
    with pytest.raises(ValueError):
        K.region_contains(K.Region("pentagon"), np.zeros((1, 2)))
