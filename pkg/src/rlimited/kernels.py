"""Closed-form Fourier kernels of wedge, tetrahedral, cone and ball regions,
plus the cascaded quadratures that turn each kernel into a finite
exponential sum.

Conventions: the kernel of a region R is K_R(x) = int_R e^{i 2 pi k.x} dk,
so K_R(0) = |R|.  The light cone pairs (w, k) with (t, x) through
w t - k.x; since every azimuth node set used here is sign symmetric, node
clouds still store plain (w, k) rows.
"""
from __future__ import annotations

import math

import numpy as np
from dataclasses import dataclass, field
from scipy.integrate import quad, simpson
from scipy.special import j1 as bessel_j1

from .numkit import sinc, cosinc, expc, power_exp_integral
from .sincapprox import symmetric_sinc_rule, one_sided_unit_rule
from .moments import Quadrature1D, chebyshev_rule_for_j0

# --------------------------------------------------------------------------
# region descriptions


@dataclass(frozen=True)
class Region:
    """Tagged Fourier-support description.

    kind is one of interval, triangle, tetrahedron, cone, ball, union;
    params holds the shape numbers; transform an optional matrix A mapping
    the base region (kernel |det A| K(A^T x)); parts the members of a union.
    symmetric marks R = -R.
    """
    kind: str
    params: tuple = ()
    transform: tuple | None = None
    parts: tuple | None = None
    symmetric: bool = False

    def param(self, name: str) -> float:
        return dict(self.params)[name]

    def transform_matrix(self) -> np.ndarray | None:
        if self.transform is None:
            return None
        return np.asarray(self.transform, dtype=float)


def _as_params(**kw) -> tuple:
    return tuple((k, float(v) if not isinstance(v, int) else v)
                 for k, v in kw.items())


def interval_region() -> Region:
    """The symmetric unit interval [-1, 1] on the frequency axis."""
    return Region("interval", symmetric=True)


def triangle_region(dp: float, s: float) -> Region:
    return Region("triangle", _as_params(dp=float(dp), s=float(s)))


def tetrahedron_region(h: float, dp: float, s: float) -> Region:
    return Region("tetrahedron",
                  _as_params(h=float(h), dp=float(dp), s=float(s)))


def cone_region(omega0: float, pmax: float, n: int = 2) -> Region:
    return Region("cone", (("omega0", float(omega0)),
                           ("pmax", float(pmax)), ("n", int(n))),
                  symmetric=True)


def ball_region(k_max: float) -> Region:
    return Region("ball", _as_params(k_max=float(k_max)), symmetric=True)


def transformed_region(base: Region, A) -> Region:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    prev = base.transform_matrix()
    if prev is not None:
        A = A @ prev
    return Region(base.kind, base.params,
                  transform=tuple(map(tuple, A.tolist())),
                  parts=base.parts, symmetric=base.symmetric)


def union_region(parts) -> Region:
    return Region("union", parts=tuple(parts))


@dataclass(frozen=True)
class TriangleSpec:
    """Isosceles wedge 0 <= kx <= dp, |ky| <= s kx."""
    dp: float
    s: float

    @property
    def area(self) -> float:
        return self.dp ** 2 * self.s


@dataclass(frozen=True)
class TetraSpec:
    """Cone over a wedge: 0 <= kz <= h, 0 <= ky <= dp kz, |kx| <= s ky."""
    h: float
    dp: float
    s: float

    @property
    def volume(self) -> float:
        return self.h ** 3 * self.dp ** 2 * self.s / 3.0


@dataclass(frozen=True)
class ConeSpec:
    """|k| <= |w| pmax for |w| <= omega0, spatial dimension n in {1,2,3}."""
    omega0: float
    pmax: float
    n: int = 2

    @property
    def measure(self) -> float:
        w0, p = self.omega0, self.pmax
        if self.n == 1:
            return 2.0 * w0 ** 2 * p
        if self.n == 2:
            return (2.0 * np.pi / 3.0) * w0 ** 3 * p ** 2
        if self.n == 3:
            return (2.0 * np.pi / 3.0) * w0 ** 4 * p ** 3
        raise ValueError("spatial dimension must be 1, 2 or 3")


def equilateral_spec() -> TriangleSpec:
    """The unit-side equilateral as one wedge with a vertex at the origin."""
    return TriangleSpec(dp=math.sqrt(3.0) / 2.0, s=1.0 / math.sqrt(3.0))


def sub_triangle_spec() -> TriangleSpec:
    """Ninth-area self-similar piece of the equilateral wedge."""
    return TriangleSpec(dp=math.sqrt(3.0) / 6.0, s=1.0 / math.sqrt(3.0))


def regular_tetra_spec() -> TetraSpec:
    """Stated parametrization of the regular-tetrahedron field figures."""
    h = math.sqrt(2.0 / 3.0)
    return TetraSpec(h=h, dp=(math.sqrt(3.0) / 6.0) * h, s=math.sqrt(3.0))


@dataclass
class QuadratureND:
    """Weighted node cloud in R^d standing in for a region kernel.

    provenance carries construction parameters and, when measured, the
    error profile {"max_err", "box", "grid_n"} over the verified difference
    box.  symmetry_group lists rotations the node multiset is invariant
    under.
    """
    weights: np.ndarray
    nodes: np.ndarray
    region_tag: Region
    symmetry_group: list | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        self.nodes = np.atleast_2d(np.asarray(self.nodes, dtype=float))
        if len(self.weights) != len(self.nodes):
            raise ValueError("weights/nodes length mismatch")

    def eval_sum(self, x) -> np.ndarray:
        """sum_m w_m e^{i 2 pi k_m . x} for x of shape (..., d)."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 1
        pts = np.atleast_2d(x)
        out = np.exp(2j * np.pi * (pts @ self.nodes.T)) @ self.weights.astype(
            complex)
        return out[0] if scalar else out


def quadrature_nd_to_json(q: QuadratureND) -> dict:
    d = {"weights": [float(w) for w in q.weights],
         "nodes": [[float(c) for c in row] for row in q.nodes],
         "region": region_to_json(q.region_tag),
         "provenance": q.provenance}
    if q.symmetry_group is not None:
        d["symmetry_group"] = [[[float(c) for c in row] for row in m]
                               for m in q.symmetry_group]
    return d


def quadrature_nd_from_json(d: dict) -> QuadratureND:
    group = d.get("symmetry_group")
    return QuadratureND(
        weights=np.asarray(d["weights"], dtype=float),
        nodes=np.asarray(d["nodes"], dtype=float),
        region_tag=region_from_json(d["region"]),
        symmetry_group=[np.asarray(m, dtype=float) for m in group]
        if group else None,
        provenance=dict(d.get("provenance", {})))


def region_to_json(r: Region) -> dict:
    d = {"kind": r.kind, "params": {k: v for k, v in r.params},
         "symmetric": r.symmetric}
    if r.transform is not None:
        d["transform"] = [list(row) for row in r.transform]
    if r.parts is not None:
        d["parts"] = [region_to_json(p) for p in r.parts]
    return d


def region_from_json(d: dict) -> Region:
    return Region(kind=d["kind"],
                  params=tuple(d.get("params", {}).items()),
                  transform=tuple(map(tuple, d["transform"]))
                  if "transform" in d else None,
                  parts=tuple(region_from_json(p) for p in d["parts"])
                  if "parts" in d else None,
                  symmetric=bool(d.get("symmetric", False)))


def region_contains(r: Region, points, tol: float = 1e-9) -> np.ndarray:
    """Membership mask with absolute slack tol on every face constraint."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    A = r.transform_matrix()
    if A is not None:
        base = Region(r.kind, r.params, None, r.parts, r.symmetric)
        return region_contains(base, pts @ np.linalg.inv(A).T, tol)
    if r.kind == "union":
        out = np.zeros(len(pts), dtype=bool)
        for part in r.parts:
            out |= region_contains(part, pts, tol)
        return out
    if r.kind == "interval":
        return np.abs(pts[:, 0]) <= 1.0 + tol
    if r.kind == "triangle":
        dp, s = r.param("dp"), r.param("s")
        kx, ky = pts[:, 0], pts[:, 1]
        return (kx >= -tol) & (kx <= dp + tol) & (np.abs(ky) <= s * kx + tol)
    if r.kind == "tetrahedron":
        h, dp, s = r.param("h"), r.param("dp"), r.param("s")
        kx, ky, kz = pts[:, 0], pts[:, 1], pts[:, 2]
        return ((kz >= -tol) & (kz <= h + tol) & (ky >= -tol)
                & (ky <= dp * kz + tol) & (np.abs(kx) <= s * ky + tol))
    if r.kind == "cone":
        w0, p = r.param("omega0"), r.param("pmax")
        w = pts[:, 0]
        rr = np.linalg.norm(pts[:, 1:], axis=1)
        return (np.abs(w) <= w0 + tol) & (rr <= p * np.abs(w) + tol)
    if r.kind == "ball":
        km = r.param("k_max")
        return np.linalg.norm(pts, axis=1) <= km + tol
    raise ValueError("unknown region kind %r" % r.kind)


# --------------------------------------------------------------------------
# wedge (triangle) kernel

_DQ_CUT = 1e-3


def _ik_vec(k: int, a) -> np.ndarray:
    """power_exp_integral(k, i a) elementwise over a real array."""
    a = np.asarray(a, dtype=float)
    flat = a.ravel()
    out = np.empty(flat.shape, dtype=complex)
    for i, v in enumerate(flat):
        out[i] = power_exp_integral(k, 1j * v)
    return out.reshape(a.shape)


def k_triangle(spec: TriangleSpec, x, y):
    """Kernel of the wedge, finite on both symmetry lines.

    With a = 2 pi dp x, b = 2 pi dp s y and g(u) = cosinc(u) - i sinc(u),
    K = 2 dp^2 s (g(a+b) - g(a-b)) / (2b).  The difference quotient turns
    into a centred series in b (odd g-derivatives are i^{k-1} I_k(ia))
    below |b| = 1e-3, where the direct form would cancel.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    a = 2.0 * np.pi * spec.dp * x
    b = 2.0 * np.pi * spec.dp * spec.s * y
    small = np.abs(b) <= _DQ_CUT
    bs = np.where(small, 1.0, b)
    gp = cosinc(a + bs) - 1j * sinc(a + bs)
    gm = cosinc(a - bs) - 1j * sinc(a - bs)
    dq = np.asarray((gp - gm) / (2.0 * bs), dtype=complex)
    if np.any(small):
        asm = a[small]
        b2 = b[small] ** 2
        dq[small] = (_ik_vec(1, asm) - b2 * _ik_vec(3, asm) / 6.0 +
                     b2 ** 2 * _ik_vec(5, asm) / 120.0 -
                     b2 ** 3 * _ik_vec(7, asm) / 5040.0)
    out = 2.0 * spec.dp ** 2 * spec.s * dq
    return complex(out) if out.ndim == 0 else out


def triangle_scaling_refine(spec: TriangleSpec, x, y, value_pair):
    """One level up: K(x,y) from the half-argument pair.

    value_pair = (K(x/2, y/2), K(-x/2, y/2));
    K(x,y) = 1/4 [v1 (1 + 2 e^{i pi dp x} cos(pi dp s y)) + e^{2 i pi dp x} v2].
    """
    v1, v2 = value_pair
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c = np.cos(np.pi * spec.dp * spec.s * y)
    p = 1.0 + 2.0 * np.exp(1j * np.pi * spec.dp * x) * c
    q = np.exp(2j * np.pi * spec.dp * x)
    return 0.25 * (np.asarray(v1) * p + q * np.asarray(v2))


def triangle_scaling_invert(spec: TriangleSpec, m: int, x, y, value_pair):
    """One level down: V_{m-1}(x,y) from (V_m(x,y), V_m(-x,y)) where
    V_m(x,y) = K(2^m x, 2^m y).

    Inverts the 2x2 refinement system; its determinant
    4c(c + cos(pi dp 2^m x)), c = cos(pi dp s 2^m y), must stay away from
    zero (|det|/4 <= 1e-8 raises).
    """
    vm_p = np.asarray(value_pair[0], dtype=complex)
    vm_m = np.asarray(value_pair[1], dtype=complex)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    X = (2.0 ** m) * x
    c = np.cos(np.pi * spec.dp * spec.s * (2.0 ** m) * y)
    e1 = np.exp(1j * np.pi * spec.dp * X)
    p = 1.0 + 2.0 * e1 * c
    q = e1 * e1
    det = np.abs(p) ** 2 - 1.0  # |q| = 1
    if np.any(np.abs(det) <= 4e-8):
        raise ValueError("refinement inversion singular: cosine denominator "
                         "within 1e-8 of zero at a requested point")
    return (np.conj(p) * vm_p - q * vm_m) * (4.0 / det)


# --------------------------------------------------------------------------
# wedge cascade and the equilateral assembly


def _difference_widths(target_box):
    """Per-axis width of the difference set {a - b : a, b in box}."""
    return tuple(float(hi - lo) for lo, hi in target_box)


def _profile_grid_nd(widths, n):
    axes = [np.linspace(-w, w, n) for w in widths]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def triangle_quadrature(spec: TriangleSpec, M_outer: int, M_inner: int,
                        target_box=((-0.5, 0.5), (-0.5, 0.5)),
                        profile_grid: int = 41) -> QuadratureND:
    """Cascade: axis-weighted one-sided rule, then a symmetric rule across
    the wedge at each axis node.

    K = dp^2 s int_0^1 v int_{-1}^{1} e^{i 2 pi dp v (x + s u y)} du dv;
    bands are sized on the difference set of target_box, so the recorded
    error profile covers every difference the caller can form within it.
    """
    Wx, Wy = _difference_widths(target_box)
    outer = one_sided_unit_rule(
        2.0 * np.pi * spec.dp * (Wx + spec.s * Wy), M_outer, power=1)
    nodes, weights = [], []
    for Aj, vj in zip(outer.weights, outer.nodes):
        inner = symmetric_sinc_rule(
            2.0 * np.pi * spec.dp * spec.s * vj * Wy, M_inner)
        kx = spec.dp * vj
        for cj, uj in zip(inner.weights, inner.nodes):
            nodes.append((kx, spec.dp * spec.s * vj * uj))
            weights.append(spec.area * Aj * cj)
    q = QuadratureND(weights=np.asarray(weights), nodes=np.asarray(nodes),
                     region_tag=triangle_region(spec.dp, spec.s),
                     provenance={"construction": "wedge-cascade",
                                 "M_outer": M_outer, "M_inner": M_inner,
                                 "target_box": [list(map(float, bx))
                                                for bx in target_box]})
    if profile_grid:
        pts = _profile_grid_nd((Wx, Wy), profile_grid)
        exact = k_triangle(spec, pts[:, 0], pts[:, 1])
        err = np.max(np.abs(exact - q.eval_sum(pts)))
        q.provenance["error_profile"] = {
            "max_err": float(err),
            "box": [[-Wx, Wx], [-Wy, Wy]],
            "grid_n": profile_grid}
    return q


def _rot2(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def equilateral_symmetric_quadrature(M_outer: int, M_inner: int,
                                     target_box=((-0.5, 0.5), (-0.5, 0.5)),
                                     profile_grid: int = 41) -> QuadratureND:
    """Node cloud for the centred unit-side equilateral, C3 invariant by
    construction: one centroid wedge copied through the three rotations.

    The wedge runs from the centroid to a side: dp = inradius sqrt(3)/6,
    s = sqrt(3) (half-side over inradius), area sqrt(3)/12 each.
    """
    spec = TriangleSpec(dp=math.sqrt(3.0) / 6.0, s=math.sqrt(3.0))
    rots = [_rot2(2.0 * np.pi * j / 3.0) for j in range(3)]
    base = triangle_quadrature(spec, M_outer, M_inner, target_box,
                               profile_grid=0)
    nodes = np.concatenate([base.nodes @ R.T for R in rots])
    weights = np.concatenate([base.weights] * 3)
    region = union_region([transformed_region(
        triangle_region(spec.dp, spec.s), R) for R in rots])
    q = QuadratureND(weights=weights, nodes=nodes, region_tag=region,
                     symmetry_group=[R.copy() for R in rots],
                     provenance={"construction": "equilateral-three-wedges",
                                 "piece": dict(base.provenance)})
    if profile_grid:
        Wx, Wy = _difference_widths(target_box)
        pts = _profile_grid_nd((Wx, Wy), profile_grid)
        exact = np.zeros(len(pts), dtype=complex)
        for R in rots:
            back = pts @ R  # (R^T)^T; |det R| = 1
            exact += k_triangle(spec, back[:, 0], back[:, 1])
        err = np.max(np.abs(exact - q.eval_sum(pts)))
        q.provenance["error_profile"] = {
            "max_err": float(err),
            "box": [[-Wx, Wx], [-Wy, Wy]],
            "grid_n": profile_grid}
    return q


# --------------------------------------------------------------------------
# tetrahedral kernel

_PHI_TAYLOR_CUT = 1e-2
_PHI_SERIES_TERMS = 12


def _f_derivs(a: float, jmax: int) -> np.ndarray:
    """F^{(j)}(a) for F(c) = expc(ic), j = 0..jmax: equals i^j I_j(ia)."""
    return np.array([(1j ** j) * power_exp_integral(j, 1j * a)
                     for j in range(jmax + 1)], dtype=complex)


def _phi_derivs(a: float, v: float, kmax: int) -> np.ndarray:
    """Phi^{(k)}(v), k = 0..kmax, for Phi(u) = (F(a+u) - F(a))/u.

    Upward recurrence Phi^{(k)} = (F^{(k)}(a+v) - k Phi^{(k-1)})/v away
    from v = 0; below |v| = 1e-2 the Taylor ladder
    Phi^{(k)}(v) = sum_i F^{(i+k+1)}(a) v^i / (i! (i+k+1)).
    """
    out = np.empty(kmax + 1, dtype=complex)
    if abs(v) >= _PHI_TAYLOR_CUT:
        fav = _f_derivs(a + v, kmax)
        fa0 = power_exp_integral(0, 1j * a)
        phi = (fav[0] - fa0) / v
        out[0] = phi
        for k in range(1, kmax + 1):
            phi = (fav[k] - k * phi) / v
            out[k] = phi
        return out
    fd = _f_derivs(a, kmax + _PHI_SERIES_TERMS + 1)
    for k in range(kmax + 1):
        acc = 0.0 + 0.0j
        ifac = 1.0
        vpow = 1.0
        for i in range(_PHI_SERIES_TERMS):
            if i:
                ifac *= i
                vpow *= v
            acc += fd[i + k + 1] * vpow / (ifac * (i + k + 1))
        out[k] = acc
    return out


def k_tetra(spec: TetraSpec, x, y, z):
    """Kernel of the tetrahedral wedge.

    With a = 2 pi h z, v = 2 pi h dp y, b = 2 pi h dp s x:
    K = -2 h^3 dp^2 s (Phi(v+b) - Phi(v-b)) / (2b),
    Phi(u) = (F(a+u) - F(a))/u, F(c) = expc(ic).  Both difference
    quotients switch to series ladders near their vanishing denominators.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    x, y, z = np.broadcast_arrays(x, y, z)
    a = 2.0 * np.pi * spec.h * z
    v = 2.0 * np.pi * spec.h * spec.dp * y
    b = 2.0 * np.pi * spec.h * spec.dp * spec.s * x
    far = ((np.abs(b) > _DQ_CUT) & (np.abs(v + b) >= _PHI_TAYLOR_CUT)
           & (np.abs(v - b) >= _PHI_TAYLOR_CUT))
    bs = np.where(far, b, 1.0)
    vp = np.where(far, v + b, 1.0)
    vm = np.where(far, v - b, 1.0)
    fa = expc(1j * a)
    phi_p = (expc(1j * (a + vp)) - fa) / vp
    phi_m = (expc(1j * (a + vm)) - fa) / vm
    D = np.asarray((phi_p - phi_m) / (2.0 * bs), dtype=complex)
    if not np.all(far):
        idx = np.nonzero(~far.ravel())[0]
        af, vf, bf = a.ravel()[idx], v.ravel()[idx], b.ravel()[idx]
        Dfix = np.empty(len(idx), dtype=complex)
        for i, (ai, vi, bi) in enumerate(zip(af, vf, bf)):
            if abs(bi) <= _DQ_CUT:
                ph = _phi_derivs(ai, vi, 5)
                Dfix[i] = (ph[1] + bi ** 2 * ph[3] / 6.0 +
                           bi ** 4 * ph[5] / 120.0)
            else:
                pp = _phi_derivs(ai, vi + bi, 0)[0]
                pm = _phi_derivs(ai, vi - bi, 0)[0]
                Dfix[i] = (pp - pm) / (2.0 * bi)
        D.ravel()[idx] = Dfix
    out = -2.0 * spec.h ** 3 * spec.dp ** 2 * spec.s * D
    return complex(out) if out.ndim == 0 else out


def tetra_quadrature(spec: TetraSpec, M1: int, M2: int, M3: int,
                     target_box=((-0.3, 0.3),) * 3,
                     profile_grid: int = 7) -> QuadratureND:
    """Three-stage cascade for the tetrahedral wedge.

    K = h^3 dp^2 s int w^2 int v int e^{i 2 pi h w (z + dp v (y + s u x))},
    outer w on (0,1) weighted w^2, middle v on (0,1) weighted v, inner u
    symmetric on (-1,1); bands sized from the difference box.
    """
    Wx, Wy, Wz = _difference_widths(target_box)
    span = Wy + spec.s * Wx
    outer = one_sided_unit_rule(
        2.0 * np.pi * spec.h * (Wz + spec.dp * span), M1, power=2)
    nodes, weights = [], []
    vol3 = spec.h ** 3 * spec.dp ** 2 * spec.s
    for Aj, wj in zip(outer.weights, outer.nodes):
        middle = one_sided_unit_rule(
            2.0 * np.pi * spec.h * spec.dp * wj * span, M2, power=1)
        for Bi, vi in zip(middle.weights, middle.nodes):
            inner = symmetric_sinc_rule(
                2.0 * np.pi * spec.h * spec.dp * spec.s * wj * vi * Wx, M3)
            ky = spec.dp * spec.h * wj * vi
            kz = spec.h * wj
            for cl, ul in zip(inner.weights, inner.nodes):
                nodes.append((spec.s * ky * ul, ky, kz))
                weights.append(vol3 * Aj * Bi * cl)
    q = QuadratureND(weights=np.asarray(weights), nodes=np.asarray(nodes),
                     region_tag=tetrahedron_region(spec.h, spec.dp, spec.s),
                     provenance={"construction": "tetra-cascade",
                                 "M1": M1, "M2": M2, "M3": M3,
                                 "target_box": [list(map(float, bx))
                                                for bx in target_box]})
    if profile_grid:
        pts = _profile_grid_nd((Wx, Wy, Wz), profile_grid)
        exact = k_tetra(spec, pts[:, 0], pts[:, 1], pts[:, 2])
        err = np.max(np.abs(exact - q.eval_sum(pts)))
        q.provenance["error_profile"] = {
            "max_err": float(err),
            "box": [[-Wx, Wx], [-Wy, Wy], [-Wz, Wz]],
            "grid_n": profile_grid}
    return q


# --------------------------------------------------------------------------
# tetrahedral symmetry

_SQ3 = math.sqrt(3.0)
_SQ6 = math.sqrt(6.0)

# unit-edge regular tetrahedron centred at the origin
TETRA_VERTICES = np.array([
    [-0.5, -_SQ3 / 6.0, -_SQ6 / 12.0],
    [0.5, -_SQ3 / 6.0, -_SQ6 / 12.0],
    [0.0, _SQ3 / 3.0, -_SQ6 / 12.0],
    [0.0, 0.0, _SQ6 / 4.0],
])


def rotation_matrix(axis, theta: float) -> np.ndarray:
    """Axis-angle rotation, axis need not be normalized."""
    u = np.asarray(axis, dtype=float)
    u = u / np.linalg.norm(u)
    c, s = np.cos(theta), np.sin(theta)
    ux = np.array([[0.0, -u[2], u[1]],
                   [u[2], 0.0, -u[0]],
                   [-u[1], u[0], 0.0]])
    return c * np.eye(3) + s * ux + (1.0 - c) * np.outer(u, u)


def tetra_symmetry_group() -> list:
    """The 12 rotations of the regular tetrahedron.

    Generated by closure from two vertex rotations; the canonical sort of
    the rounded entries keeps the output order deterministic.
    """
    g1 = rotation_matrix(TETRA_VERTICES[3], 2.0 * np.pi / 3.0)
    g2 = rotation_matrix(TETRA_VERTICES[0], 2.0 * np.pi / 3.0)

    def key(m):
        return tuple(np.round(m, 9).ravel())

    group = {key(np.eye(3)): np.eye(3)}
    frontier = [np.eye(3)]
    while frontier:
        nxt = []
        for m in frontier:
            for g in (g1, g2):
                prod = g @ m
                k = key(prod)
                if k not in group:
                    group[k] = prod
                    nxt.append(prod)
        frontier = nxt
    mats = [group[k] for k in sorted(group)]
    if len(mats) != 12:
        raise RuntimeError("tetra rotation closure has %d elements, "
                           "expected 12" % len(mats))
    return mats


def tetra_contains(points, tol: float = 1e-9) -> np.ndarray:
    """Barycentric membership test against the unit regular tetrahedron."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    A = np.vstack([TETRA_VERTICES.T, np.ones(4)])
    rhs = np.vstack([pts.T, np.ones(len(pts))])
    lam = np.linalg.solve(A, rhs)
    return np.all(lam >= -tol, axis=0)


def sub_tetra_spec() -> TetraSpec:
    """Twelfth piece of the unit tetrahedron: centroid over a third of a
    face; h = 1/sqrt(24) (centroid-to-face distance), dp = sqrt(2),
    s = sqrt(3)."""
    return TetraSpec(h=1.0 / math.sqrt(24.0), dp=math.sqrt(2.0),
                     s=math.sqrt(3.0))


# maps the parametrization frame onto the piece over the bottom face:
# +z of the wedge runs from the centroid toward the face centre, +y toward
# the v1-v2 edge midpoint; a rotation by pi about x does both.
SUB_TETRA_PLACEMENT = np.diag([1.0, -1.0, -1.0])


def tetra_symmetric_quadrature(M1: int, M2: int, M3: int,
                               target_box=((-0.3, 0.3),) * 3,
                               profile_grid: int = 7) -> QuadratureND:
    """Rule for the centred unit regular tetrahedron.

    One sub-piece cascade, placed onto the bottom face and copied through
    the 12-element rotation group; invariance of the node multiset is then
    automatic.  Weight total 12 x piece volume = 1/(6 sqrt 2).
    """
    spec = sub_tetra_spec()
    base = tetra_quadrature(spec, M1, M2, M3, target_box, profile_grid=0)
    group = tetra_symmetry_group()
    placed = base.nodes @ SUB_TETRA_PLACEMENT.T
    nodes = np.concatenate([placed @ R.T for R in group])
    weights = np.concatenate([base.weights] * len(group))
    parts = [transformed_region(
        tetrahedron_region(spec.h, spec.dp, spec.s),
        R @ SUB_TETRA_PLACEMENT) for R in group]
    q = QuadratureND(weights=weights, nodes=nodes,
                     region_tag=union_region(parts),
                     symmetry_group=[R.copy() for R in group],
                     provenance={"construction": "tetra-twelve-pieces",
                                 "piece": dict(base.provenance)})
    if profile_grid:
        Wx, Wy, Wz = _difference_widths(target_box)
        pts = _profile_grid_nd((Wx, Wy, Wz), profile_grid)
        exact = np.zeros(len(pts), dtype=complex)
        for R in group:
            back = pts @ (R @ SUB_TETRA_PLACEMENT)
            exact += k_tetra(spec, back[:, 0], back[:, 1], back[:, 2])
        err = np.max(np.abs(exact - q.eval_sum(pts)))
        q.provenance["error_profile"] = {
            "max_err": float(err),
            "box": [[-Wx, Wx], [-Wy, Wy], [-Wz, Wz]],
            "grid_n": profile_grid}
    return q


# --------------------------------------------------------------------------
# light-cone kernels


def _cosinc_derivs_at(a, ks) -> dict:
    """cosinc^{(k)}(a) = Im[i^k I_k(ia)] for each k in ks, vectorized."""
    return {k: np.imag((1j ** k) * _ik_vec(k, a)) for k in ks}


def _sinc_derivs_at(a, ks) -> dict:
    """sinc^{(k)}(a) = Re[i^k I_k(ia)] for each k in ks, vectorized."""
    return {k: np.real((1j ** k) * _ik_vec(k, a)) for k in ks}


def k_cone(spec: ConeSpec, t, x):
    """Kernel of the light cone at time t and spatial offset x.

    n=1 and n=3 are closed forms built on cosinc differences; n=2 is the
    adaptive integral 4 pi w0^3 p^2 int_0^1 w^2 j1c(2 pi w w0 p r)
    cos(2 pi w w0 t) dw, which serves as the oracle for the sinc surrogate.
    """
    if spec.n == 1:
        return _k_cone_1(spec, t, x)
    if spec.n == 2:
        return _k_cone_2(spec, t, x)
    if spec.n == 3:
        return _k_cone_3(spec, t, x)
    raise ValueError("spatial dimension must be 1, 2 or 3")


def _spatial_radius(x, n: int):
    x = np.asarray(x, dtype=float)
    if x.ndim and x.shape[-1] == n and n > 1:
        return np.sqrt(np.sum(x * x, axis=-1))
    return np.abs(x)


def _k_cone_1(spec: ConeSpec, t, x):
    w0, p = spec.omega0, spec.pmax
    t = np.asarray(t, dtype=float)
    r = np.asarray(x, dtype=float)
    t, r = np.broadcast_arrays(t, r)
    a = 2.0 * np.pi * w0 * t
    b = 2.0 * np.pi * w0 * p * r
    small = np.abs(b) <= _DQ_CUT
    bs = np.where(small, 1.0, b)
    dq = np.asarray((cosinc(a + bs) - cosinc(a - bs)) / (2.0 * bs),
                    dtype=float)
    if np.any(small):
        asm = a[small]
        b2 = b[small] ** 2
        cd = _cosinc_derivs_at(asm, (1, 3, 5))
        dq[small] = cd[1] + b2 * cd[3] / 6.0 + b2 ** 2 * cd[5] / 120.0
    out = (4.0 * w0 ** 2 * p * dq).astype(complex)
    return complex(out) if out.ndim == 0 else out


def _j1c(z):
    """J1(z)/z with the limit 1/2 at zero."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) <= 1e-4
    zs = np.where(small, 1.0, z)
    series = 0.5 - z * z / 16.0 + z ** 4 / 384.0
    out = np.where(small, series, bessel_j1(zs) / zs)
    return float(out) if out.ndim == 0 else out


def _sph_ratio(beta: float) -> float:
    """(sin b - b cos b)/b^3 with the limit 1/3."""
    if abs(beta) <= 1e-3:
        b2 = beta * beta
        return 1.0 / 3.0 - b2 / 30.0 + b2 * b2 / 840.0
    return (math.sin(beta) - beta * math.cos(beta)) / beta ** 3


def _k_cone_2(spec: ConeSpec, t, x):
    w0, p = spec.omega0, spec.pmax
    t = np.asarray(t, dtype=float)
    r = _spatial_radius(x, 2)
    t, r = np.broadcast_arrays(t, r)
    flat_t, flat_r = t.ravel(), r.ravel()
    out = np.empty(flat_t.shape, dtype=complex)
    pref = 4.0 * np.pi * w0 ** 3 * p ** 2
    for i, (ti, ri) in enumerate(zip(flat_t, flat_r)):
        bt = 2.0 * np.pi * w0 * ti
        if abs(ri) <= 1e-12:
            # radial limit: j1c -> 1/2, integral closes in elementary terms
            out[i] = pref * 0.5 * (sinc(bt) - 2.0 * _sph_ratio(bt))
            continue
        br = 2.0 * np.pi * w0 * p * ri
        val = quad(lambda u: u * u * _j1c(br * u) * math.cos(bt * u),
                   0.0, 1.0, epsabs=1e-11, epsrel=1e-11, limit=400)[0]
        out[i] = pref * val
    out = out.reshape(t.shape)
    return complex(out) if out.ndim == 0 else out


def _k_cone_3(spec: ConeSpec, t, x):
    w0, p = spec.omega0, spec.pmax
    t = np.asarray(t, dtype=float)
    r = _spatial_radius(x, 3)
    t, r = np.broadcast_arrays(t, r)
    a = 2.0 * np.pi * w0 * t
    kap = 2.0 * np.pi * w0 * p
    b = kap * r
    small = np.abs(b) <= 0.5
    bs = np.where(small, 1.0, b)
    rs = np.where(small, 1.0, r)
    bracket = ((cosinc(a + bs) - cosinc(a - bs)) / rs ** 3
               - (kap / rs ** 2) * (_cd1(a + bs) + _cd1(a - bs)))
    out = np.asarray((w0 / (2.0 * np.pi ** 2)) * bracket, dtype=float)
    if np.any(small):
        asm = a[small]
        bsm = b[small]
        cd = _cosinc_derivs_at(asm, (3, 5, 7, 9, 11, 13))
        acc = np.zeros_like(asm)
        for j in (3, 5, 7, 9, 11, 13):
            acc += cd[j] * bsm ** (j - 3) * (1.0 - j) / math.factorial(j)
        out[small] = (w0 / np.pi ** 2) * kap ** 3 * acc
    out = out.astype(complex)
    return complex(out) if out.ndim == 0 else out


def _cd1(u):
    """First derivative of cosinc: (sin u)/u - (1 - cos u)/u^2, stable."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) <= _DQ_CUT
    us = np.where(small, 1.0, u)
    direct = np.sin(us) / us - (1.0 - np.cos(us)) / us ** 2
    series = 0.5 - u * u / 8.0 + u ** 4 / 144.0
    out = np.where(small, series, direct)
    return float(out) if out.ndim == 0 else out


def j1_expansion_from_rule(j1_rule: Quadrature1D):
    """(alpha_m, gamma_m) with J1(u) ~ sum alpha_m cosinc(gamma_m u).

    The moment solver hands back (w_m, g_m) matching the j1_cosinc moments
    as sum w g^n; the expansion nodes are gamma = sqrt(g) with coefficients
    alpha = w / gamma.
    """
    g = np.asarray(j1_rule.nodes)
    if np.iscomplexobj(g):
        if np.max(np.abs(g.imag)) > 1e-8 * np.max(np.abs(g)):
            raise ValueError("j1 rule has genuinely complex nodes")
        g = g.real
    if np.any(g <= 0):
        raise ValueError("j1 rule has non-positive nodes")
    gamma = np.sqrt(g)
    w = np.asarray(j1_rule.weights)
    if np.iscomplexobj(w):
        w = w.real
    return w / gamma, gamma


def tilde_k_cone(spec: ConeSpec, j1_rule: Quadrature1D, t, r):
    """Sinc-combination surrogate of the n=2 cone kernel.

    K~ = (w0 / (pi r^2)) sum_m (alpha_m/gamma_m) [sinc(at)
         - (sinc(c_m - at) + sinc(c_m + at))/2],  at = 2 pi w0 t,
    c_m = 2 pi w0 gamma_m pmax r; its frequency support lies in the cone
    dilated by max gamma_m.  Small r switches to the even-derivative
    series of the bracket.
    """
    if spec.n != 2:
        raise ValueError("surrogate defined for the n=2 cone")
    alpha, gamma = j1_expansion_from_rule(j1_rule)
    w0, p = spec.omega0, spec.pmax
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    t, r = np.broadcast_arrays(t, r)
    at = 2.0 * np.pi * w0 * t
    big = 2.0 * np.pi * w0 * p * np.abs(r) * np.max(gamma) > 0.5
    out = np.zeros(t.shape, dtype=float)
    if np.any(big):
        atb = at[big]
        rb = r[big]
        acc = np.zeros_like(atb)
        for am, gm in zip(alpha, gamma):
            cm = 2.0 * np.pi * w0 * gm * p * rb
            acc += (am / gm) * (sinc(atb) - 0.5 * (sinc(cm - atb) +
                                                   sinc(cm + atb)))
        out[big] = (w0 / np.pi) * acc / rb ** 2
    if np.any(~big):
        # bracket = -sum_{even j>=2} sinc^{(j)}(at) c^j / j!; the j=2 term
        # carries r^2, so divide it out analytically before summing
        ats = at[~big]
        rsm = r[~big]
        sd = _sinc_derivs_at(ats, (2, 4, 6, 8, 10, 12))
        scale = (2.0 * np.pi * w0 * p) ** 2
        acc = np.zeros_like(ats)
        for am, gm in zip(alpha, gamma):
            g2s = scale * gm * gm
            c2 = g2s * rsm * rsm
            inner = np.zeros_like(ats)
            cpow = np.ones_like(ats)
            for j in (2, 4, 6, 8, 10, 12):
                inner += sd[j] * g2s * cpow / math.factorial(j)
                cpow = cpow * c2
            acc += (am / gm) * inner
        out[~big] = -(w0 / np.pi) * acc
    out = out.astype(complex)
    return complex(out) if out.ndim == 0 else out


def bessel_expansion_fidelity(j1_rule: Quadrature1D) -> dict:
    """max gamma_m and the node/coefficient table, for reporting."""
    alpha, gamma = j1_expansion_from_rule(j1_rule)
    return {"max_gamma": float(np.max(gamma)),
            "gamma": [float(g) for g in gamma],
            "alpha": [float(a) for a in alpha]}


def _x_overlap(gamma: float) -> float:
    """int_0^inf J1(u) cosinc(gamma u) du / u, closed form.

    gamma/2 below 1; above, gamma/2 - sqrt(g^2-1)/2 + arccosh(g)/(2g).
    """
    if gamma <= 1.0:
        return gamma / 2.0
    root = math.sqrt(gamma * gamma - 1.0)
    return gamma / 2.0 - root / 2.0 + math.log(gamma + root) / (2.0 * gamma)


def _w_cross(gm: float, gp: float, R: float = 800.0,
             n_grid: int = 240000) -> float:
    """int_0^inf cosinc(gm u) cosinc(gp u) du / u by composite Simpson
    plus the averaged tail beyond R."""
    u = np.linspace(0.0, R, n_grid + 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        f = cosinc(gm * u) * cosinc(gp * u) / np.where(u > 0, u, 1.0)
    f[0] = 0.0
    body = simpson(f, x=u)
    avg = 1.5 if abs(gm - gp) < 1e-12 else 1.0
    tail = avg / (gm * gp * 2.0 * R * R)
    return float(body + tail)


def cone_ls_error(spec: ConeSpec, j1_rule: Quadrature1D) -> float:
    """Integrated squared error of the sinc surrogate against the cone
    kernel: (4 pi / 3) w0^3 p^2 (1/2 - 2 sum a X(g) + sum a w a)."""
    alpha, gamma = j1_expansion_from_rule(j1_rule)
    V = 0.5 - 2.0 * sum(a * _x_overlap(g) for a, g in zip(alpha, gamma))
    for i, (ai, gi) in enumerate(zip(alpha, gamma)):
        for j, (aj, gj) in enumerate(zip(alpha, gamma)):
            if j < i:
                continue
            w = _w_cross(gi, gj)
            V += ai * aj * w * (1.0 if i == j else 2.0)
    return (4.0 * np.pi / 3.0) * spec.omega0 ** 3 * spec.pmax ** 2 * V


def cone_ls_error_bruteforce(spec: ConeSpec, j1_rule: Quadrature1D) -> float:
    """Independent squared-error estimate through the frequency domain.

    By Plancherel the error integral equals
    (4 pi/3) w0^3 p^2 int_0^inf |chi_{u<1} - H(u)|^2 u du with
    H(u) = sum_m (alpha_m/gamma_m) arccosh(gamma_m/u) over u < gamma_m,
    the radial transform shape of the surrogate disc profile.
    """
    alpha, gamma = j1_expansion_from_rule(j1_rule)

    def H(u):
        acc = 0.0
        for am, gm in zip(alpha, gamma):
            if u < gm:
                acc += (am / gm) * math.acosh(gm / u)
        return acc

    def integrand(u):
        chi = 1.0 if u < 1.0 else 0.0
        d = chi - H(u)
        return d * d * u

    # piecewise between the kinks at u = gamma_m and u = 1; the integrand
    # vanishes identically beyond max(1, gamma_max)
    cuts = sorted(set([0.0, 1.0] + [float(g) for g in gamma]))
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        total += quad(integrand, lo, hi, epsabs=1e-12, epsrel=1e-10,
                      limit=300)[0]
    pref = (4.0 * np.pi / 3.0) * spec.omega0 ** 3 * spec.pmax ** 2
    return pref * total


def cone_quadrature(spec: ConeSpec, M_w: int, M_p: int, M_t: int,
                    target_box=((-0.5, 0.5),) * 3,
                    profile_grid: int = 7) -> QuadratureND:
    """Cascade for the n=2 cone: symmetric frequency rule weighted w^2,
    per-frequency radial rule weighted rho, equiangular azimuth.

    The azimuth uses the Chebyshev-node rule for the circle average: the
    four sign copies of each (tau, sqrt(1-tau^2)) pair form 4 M_t
    equiangular points, each weighted pi/(2 M_t).
    """
    if spec.n != 2:
        raise ValueError("cascade implemented for the n=2 cone")
    w0, p = spec.omega0, spec.pmax
    Wt, Wx, Wy = _difference_widths(target_box)
    Wr = math.hypot(Wx, Wy)
    outer = symmetric_sinc_rule(2.0 * np.pi * w0 * (Wt + p * Wr), M_w)
    cheb = chebyshev_rule_for_j0(M_t)
    az = []
    for tau in cheb.nodes:
        sig = math.sqrt(max(0.0, 1.0 - tau * tau))
        for sx in (1.0, -1.0):
            for sy in (1.0, -1.0):
                az.append((sx * tau, sy * sig))
    az = np.asarray(az)
    az_w = np.pi / (2.0 * M_t)
    nodes, weights = [], []
    pref = w0 ** 3 * p ** 2
    for Aj, Om in zip(outer.weights, outer.nodes):
        radial = one_sided_unit_rule(
            2.0 * np.pi * w0 * abs(Om) * p * Wr, M_p, power=1)
        for Bi, rho in zip(radial.weights, radial.nodes):
            kr = w0 * abs(Om) * p * rho
            for ax, ay in az:
                nodes.append((w0 * Om, kr * ax, kr * ay))
                weights.append(pref * Aj * Om * Om * Bi * az_w)
    q = QuadratureND(weights=np.asarray(weights), nodes=np.asarray(nodes),
                     region_tag=cone_region(w0, p, 2),
                     provenance={"construction": "cone-cascade",
                                 "M_w": M_w, "M_p": M_p, "M_t": M_t,
                                 "target_box": [list(map(float, bx))
                                                for bx in target_box]})
    if profile_grid:
        pts = _profile_grid_nd((Wt, Wx, Wy), profile_grid)
        exact = k_cone(spec, pts[:, 0], pts[:, 1:])
        err = np.max(np.abs(exact - q.eval_sum(pts)))
        q.provenance["error_profile"] = {
            "max_err": float(err),
            "box": [[-Wt, Wt], [-Wx, Wx], [-Wy, Wy]],
            "grid_n": profile_grid}
    return q


# --------------------------------------------------------------------------
# ball


def k_ball(k_max: float, x):
    """Kernel of the radius-k_max ball:
    (sin u - u cos u)/(2 pi^2 r^3) with u = 2 pi k_max r."""
    r = _spatial_radius(x, 3)
    u = 2.0 * np.pi * k_max * np.asarray(r, dtype=float)
    small = np.abs(u) <= _DQ_CUT
    us = np.where(small, 1.0, u)
    rs = np.where(small, 1.0, r)
    direct = (np.sin(us) - us * np.cos(us)) / (2.0 * np.pi ** 2 * rs ** 3)
    vol = 4.0 * np.pi * k_max ** 3 / 3.0
    series = vol * (1.0 - u * u / 10.0 + u ** 4 / 280.0)
    out = np.where(small, series, direct).astype(complex)
    return complex(out) if out.ndim == 0 else out


def ball_quadrature(k_max: float, M_r: int, M_th: int, M_t: int,
                    target_box=((-0.5, 0.5),) * 3,
                    profile_grid: int = 7) -> QuadratureND:
    """Cascade for the ball: rho^2-weighted radial rule, symmetric polar
    rule, equiangular azimuth; weights sum to the ball volume."""
    Wx, Wy, Wz = _difference_widths(target_box)
    WR = math.sqrt(Wx * Wx + Wy * Wy + Wz * Wz)
    radial = one_sided_unit_rule(2.0 * np.pi * k_max * WR, M_r, power=2)
    cheb = chebyshev_rule_for_j0(M_t)
    az = []
    for tau in cheb.nodes:
        sig = math.sqrt(max(0.0, 1.0 - tau * tau))
        for sx in (1.0, -1.0):
            for sy in (1.0, -1.0):
                az.append((sx * tau, sy * sig))
    az = np.asarray(az)
    az_w = np.pi / (2.0 * M_t)
    nodes, weights = [], []
    pref = k_max ** 3
    for Aj, rho in zip(radial.weights, radial.nodes):
        polar = symmetric_sinc_rule(2.0 * np.pi * k_max * rho * WR, M_th)
        for Ci, tau in zip(polar.weights, polar.nodes):
            sig = math.sqrt(max(0.0, 1.0 - tau * tau))
            for ax, ay in az:
                nodes.append((k_max * rho * sig * ax,
                              k_max * rho * sig * ay,
                              k_max * rho * tau))
                weights.append(pref * Aj * Ci * az_w)
    q = QuadratureND(weights=np.asarray(weights), nodes=np.asarray(nodes),
                     region_tag=ball_region(k_max),
                     provenance={"construction": "ball-cascade",
                                 "M_r": M_r, "M_th": M_th, "M_t": M_t,
                                 "target_box": [list(map(float, bx))
                                                for bx in target_box]})
    if profile_grid:
        pts = _profile_grid_nd((Wx, Wy, Wz), profile_grid)
        exact = k_ball(k_max, pts)
        err = np.max(np.abs(exact - q.eval_sum(pts)))
        q.provenance["error_profile"] = {
            "max_err": float(err),
            "box": [[-Wx, Wx], [-Wy, Wy], [-Wz, Wz]],
            "grid_n": profile_grid}
    return q
