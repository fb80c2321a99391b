"""Approximate prolate bases from quadrature-discretized operators.

Two discrete eigensystems produce the same concentrated functions: the
exponential system (a scaled Fourier matrix over the rule's nodes) and the
kernel system (the sinc or region-kernel Gram matrix).  Eigenvalues mu
live in (0, 1] and measure energy concentration; lambda are the Fourier
eigenvalues with mu = B |lambda|^2 in 1D and mu = |det B| |lambda|^2 in ND.
"""
from __future__ import annotations

import numpy as np
from dataclasses import dataclass, field

from .numkit import sinc
from .moments import Quadrature1D

_TIE_TOL = 1e-10


@dataclass
class EigenBasis:
    """Eigenpairs of one discretized concentration operator.

    eigenvectors holds phi_n sampled at the rule's nodes, one unit-norm
    column per n, ordered by descending mu with deterministic tie-breaks.
    kind is "exp_system" or "kernel_system".
    """
    eigenvalues_mu: np.ndarray
    eigenvalues_lambda: np.ndarray
    eigenvectors: np.ndarray
    quadrature: object
    band: object
    kind: str
    provenance: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.eigenvalues_mu)


def _order_and_fix(mu: np.ndarray, lam: np.ndarray, vecs: np.ndarray):
    """Descending mu; ties by ascending dominant-component index; the
    dominant component of each column is rotated to the positive real axis."""
    vecs = vecs / np.linalg.norm(vecs, axis=0, keepdims=True)
    dom = np.argmax(np.abs(vecs), axis=0)
    order = np.lexsort((dom, -mu))
    mu, lam, vecs, dom = mu[order], lam[order], vecs[:, order], dom[order]
    for j in range(vecs.shape[1]):
        piv = vecs[dom[j], j]
        if abs(piv) > 0:
            vecs[:, j] = vecs[:, j] * (np.conj(piv) / abs(piv))
    if not np.iscomplexobj(lam):
        lam = lam.astype(complex)
    return mu, lam, vecs


def _degenerate_blocks(mu: np.ndarray) -> list:
    """Index runs of numerically equal eigenvalues, for reporting."""
    blocks, start = [], 0
    scale = max(float(mu[0]), 1.0) if len(mu) else 1.0
    for i in range(1, len(mu) + 1):
        if i == len(mu) or abs(mu[i] - mu[start]) > _TIE_TOL * scale:
            if i - start > 1:
                blocks.append(list(range(start, i)))
            start = i
    return blocks


def _positive_weights(q) -> np.ndarray:
    w = np.asarray(q.weights, dtype=float)
    if np.any(w <= 0):
        raise ValueError("eigensystem symmetrization needs positive weights")
    return w


def pswf_exp_eigensystem(q: Quadrature1D, B: float) -> EigenBasis:
    """Eigen-decompose E[k,m] = (1/B) a_m e^{i 2 pi B w_m w_k}.

    The similarity transform with diag(sqrt(a)) makes the matrix complex
    symmetric and (for a mirror-symmetric rule) normal, so eigenvalue
    magnitudes equal singular values and mu = B |lambda|^2 is reliable.
    """
    if not q.symmetric:
        raise ValueError("exponential eigensystem needs a symmetric rule")
    if B <= 0:
        raise ValueError("band must be positive")
    w = _positive_weights(q)
    om = np.asarray(q.nodes, dtype=float)
    d = np.sqrt(w)
    A_hat = (1.0 / B) * d[:, None] * d[None, :] * np.exp(
        2j * np.pi * B * om[:, None] * om[None, :])
    lam, psi = np.linalg.eig(A_hat)
    vecs = psi / d[:, None]
    mu = B * np.abs(lam) ** 2
    mu, lam, vecs = _order_and_fix(mu, lam, vecs)
    return EigenBasis(eigenvalues_mu=mu, eigenvalues_lambda=lam,
                      eigenvectors=vecs, quadrature=q, band=float(B),
                      kind="exp_system",
                      provenance={"degenerate_blocks": _degenerate_blocks(mu),
                                  "n_nodes": len(om)})


def pswf_kernel_eigensystem(q: Quadrature1D, B: float) -> EigenBasis:
    """Eigen-decompose S[m,k] = 2 a_k sinc(2 pi B (w_m - w_k)).

    Symmetrized to the real symmetric PSD form before eigh; eigenvalues
    are the concentration ratios mu directly, lambda is stored as the
    magnitude sqrt(mu / B).
    """
    if not q.symmetric:
        raise ValueError("kernel eigensystem needs a symmetric rule")
    if B <= 0:
        raise ValueError("band must be positive")
    w = _positive_weights(q)
    om = np.asarray(q.nodes, dtype=float)
    d = np.sqrt(w)
    S_hat = 2.0 * d[:, None] * d[None, :] * sinc(
        2.0 * np.pi * B * (om[:, None] - om[None, :]))
    mu, psi = np.linalg.eigh(S_hat)
    vecs = (psi / d[:, None]).astype(float)
    mu = mu[::-1].copy()
    vecs = vecs[:, ::-1].copy()
    lam = np.sqrt(np.maximum(mu, 0.0) / B)
    mu, lam, vecs = _order_and_fix(mu, lam, vecs)
    return EigenBasis(eigenvalues_mu=mu, eigenvalues_lambda=lam,
                      eigenvectors=vecs, quadrature=q, band=float(B),
                      kind="kernel_system",
                      provenance={"degenerate_blocks": _degenerate_blocks(mu),
                                  "n_nodes": len(om),
                                  "lambda_magnitude_only": True})


@dataclass
class ProlateEvaluator:
    """Pairs a basis with the extension formula used off the nodes."""
    basis: EigenBasis
    mode: str = ""  # "exp_extension" or "kernel_extension"

    def __post_init__(self):
        if not self.mode:
            self.mode = ("exp_extension" if self.basis.kind == "exp_system"
                         else "kernel_extension")
        if self.mode not in ("exp_extension", "kernel_extension"):
            raise ValueError("unknown extension mode %r" % self.mode)


def extend_prolate(ev: ProlateEvaluator, n: int, t, mu_min: float = 1e-8):
    """Continuous-argument phi_n(t); exact at the quadrature nodes.

    exp_extension: (1/(B lambda_n)) sum_m a_m e^{i 2 pi B w_m t} phi_n(w_m)
    kernel_extension: (1/(B mu_n)) sum_m a_m 2B sinc(2 pi B (t-w_m)) phi_n(w_m)

    Error amplification goes as 1/mu_n, so eigenpairs below mu_min are
    refused rather than silently extended.
    """
    b = ev.basis
    if not 0 <= n < len(b):
        raise IndexError("eigenpair index %d out of range" % n)
    mu = float(b.eigenvalues_mu[n])
    if mu < mu_min:
        raise ValueError("mu_%d = %.3e below the regularization floor %.1e"
                         % (n, mu, mu_min))
    B = float(b.band)
    a = np.asarray(b.quadrature.weights, dtype=float)
    om = np.asarray(b.quadrature.nodes, dtype=float)
    phi = b.eigenvectors[:, n]
    t = np.asarray(t, dtype=float)
    if ev.mode == "exp_extension":
        lam = complex(b.eigenvalues_lambda[n])
        if abs(lam) == 0:
            raise ValueError("lambda_%d = 0, extension undefined" % n)
        out = np.exp(2j * np.pi * B * t[..., None] * om) @ (a * phi) \
            / (B * lam)
    else:
        kern = 2.0 * B * sinc(2.0 * np.pi * B * (t[..., None] - om))
        out = kern @ (a * phi) / (B * mu)
    return complex(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# ND region eigensystems


def _band_matrix(kernel, B) -> np.ndarray:
    Bm = kernel.band if B is None else B
    Bm = np.atleast_2d(np.asarray(Bm, dtype=float))
    if Bm.shape[0] != Bm.shape[1]:
        raise ValueError("band must be a square matrix")
    return Bm


def rslepian_exp_eigensystem(kernel, B=None) -> EigenBasis:
    """ND exponential system over the kernel's own node cloud.

    E[l,m] = w_m e^{i 2 pi (B k_m) . k_l} with the base weights w; the
    eigenvalue relation becomes mu = |det B| |lambda|^2.  B must be
    symmetric so the weight-symmetrized matrix is complex symmetric.
    """
    Bm = _band_matrix(kernel, B)
    if not np.allclose(Bm, Bm.T, atol=1e-12 * max(1.0, np.abs(Bm).max())):
        raise ValueError("exponential eigensystem needs symmetric band")
    w = np.asarray(kernel.base_weights(), dtype=float)
    if np.any(w <= 0):
        raise ValueError("eigensystem symmetrization needs positive weights")
    nodes = np.atleast_2d(np.asarray(kernel.nodes, dtype=float))
    d = np.sqrt(w)
    phase = 2j * np.pi * (nodes @ Bm.T @ nodes.T).T
    A_hat = d[:, None] * d[None, :] * np.exp(phase)
    lam, psi = np.linalg.eig(A_hat)
    vecs = psi / d[:, None]
    det = abs(float(np.linalg.det(Bm)))
    mu = det * np.abs(lam) ** 2
    mu, lam, vecs = _order_and_fix(mu, lam, vecs)
    return EigenBasis(eigenvalues_mu=mu, eigenvalues_lambda=lam,
                      eigenvectors=vecs, quadrature=kernel, band=Bm,
                      kind="exp_system",
                      provenance={"degenerate_blocks": _degenerate_blocks(mu),
                                  "n_nodes": len(nodes), "det_band": det})


def rslepian_kernel_eigensystem(kernel, B=None) -> EigenBasis:
    """ND kernel system S[l,m] = w_m |det B| K_R(B (k_l - k_m)).

    The weight-symmetrized matrix is Hermitian PSD (real for symmetric
    regions); eigh returns the concentration eigenvalues mu directly.
    """
    from .projection import region_kernel_exact
    Bm = _band_matrix(kernel, B)
    w = np.asarray(kernel.base_weights(), dtype=float)
    if np.any(w <= 0):
        raise ValueError("eigensystem symmetrization needs positive weights")
    nodes = np.atleast_2d(np.asarray(kernel.nodes, dtype=float))
    det = abs(float(np.linalg.det(Bm)))
    diffs = (nodes[:, None, :] - nodes[None, :, :]) @ Bm.T
    K = np.asarray(region_kernel_exact(kernel.region,
                                       diffs.reshape(-1, nodes.shape[1])),
                   dtype=complex).reshape(len(nodes), len(nodes))
    d = np.sqrt(w)
    S_hat = det * d[:, None] * d[None, :] * K
    herm_defect = float(np.max(np.abs(S_hat - S_hat.conj().T)))
    S_hat = 0.5 * (S_hat + S_hat.conj().T)
    if np.max(np.abs(S_hat.imag)) <= 1e-12 * max(1.0, np.max(np.abs(S_hat))):
        S_hat = S_hat.real
    mu, psi = np.linalg.eigh(S_hat)
    vecs = psi / d[:, None]
    mu = mu[::-1].copy()
    vecs = vecs[:, ::-1].copy()
    lam = np.sqrt(np.maximum(mu, 0.0) / det)
    mu, lam, vecs = _order_and_fix(mu, lam, vecs)
    return EigenBasis(eigenvalues_mu=mu, eigenvalues_lambda=lam,
                      eigenvectors=vecs, quadrature=kernel, band=Bm,
                      kind="kernel_system",
                      provenance={"degenerate_blocks": _degenerate_blocks(mu),
                                  "n_nodes": len(nodes), "det_band": det,
                                  "hermitian_defect": herm_defect,
                                  "lambda_magnitude_only": True})


# --------------------------------------------------------------------------
# serialization


def _c_to_json(a: np.ndarray):
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return {"re": a.real.tolist(), "im": a.imag.tolist()}
    return {"re": a.tolist()}


def _c_from_json(d) -> np.ndarray:
    re = np.asarray(d["re"], dtype=float)
    if "im" in d:
        return re + 1j * np.asarray(d["im"], dtype=float)
    return re


def eigenbasis_to_json(b: EigenBasis) -> dict:
    nodes = np.asarray(b.quadrature.nodes, dtype=float)
    band = b.band
    return {"kind": b.kind,
            "mu": [float(m) for m in b.eigenvalues_mu],
            "lambda": _c_to_json(b.eigenvalues_lambda),
            "eigenvectors": _c_to_json(b.eigenvectors),
            "nodes": nodes.tolist(),
            "weights": np.asarray(b.quadrature.weights,
                                  dtype=float).tolist(),
            "band": band.tolist() if isinstance(band, np.ndarray)
            else float(band),
            "provenance": dict(b.provenance)}


def eigenbasis_from_json(d: dict) -> EigenBasis:
    """Rebuild the eigenpairs; the quadrature comes back as a bare
    weight/node record, sufficient for extension formulas."""
    band = d["band"]
    band = np.asarray(band, dtype=float) if isinstance(band, list) \
        else float(band)
    nodes = np.asarray(d["nodes"], dtype=float)
    if nodes.ndim == 1:
        q = Quadrature1D(weights=np.asarray(d["weights"], dtype=float),
                         nodes=nodes, band=float(np.atleast_1d(band)[0]),
                         symmetric=True)
    else:
        q = _NodeCloud(np.asarray(d["weights"], dtype=float), nodes)
    return EigenBasis(eigenvalues_mu=np.asarray(d["mu"], dtype=float),
                      eigenvalues_lambda=_c_from_json(d["lambda"]),
                      eigenvectors=_c_from_json(d["eigenvectors"]),
                      quadrature=q, band=band, kind=d["kind"],
                      provenance=dict(d.get("provenance", {})))


@dataclass
class _NodeCloud:
    weights: np.ndarray
    nodes: np.ndarray
