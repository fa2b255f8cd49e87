"""Minimal Gamma-unitary and Gamma-isometric dilations of a Gamma-contraction.

Slot coordinates: negative slots of the two-sided space carry coordinates of
the defect space of P (basis ``Qp``), positive slots those of the defect
space of P* (basis ``Qs``).  Every coupling block between H and a defect slot
is composed with the corresponding basis once, at build time.
"""

from dataclasses import dataclass, field

import numpy as np

from .numlin import adjoint, opnorm
from .seqop import FiniteVector, SeqOperator, SlotLayout, compose_window, identity, structural_distance

SYMBOL_GRID = 720


@dataclass
class DilationBundle:
    pair: object
    fp: object
    T0: SeqOperator
    U0: SeqOperator
    Tflat: SeqOperator
    Vflat: SeqOperator
    diagnostics: dict = field(default_factory=dict)

    @property
    def layout(self):
        return self.U0.layout_in

    @property
    def flat_layout(self):
        return self.Vflat.layout_in


def build_sznagy(pair, fp, radius=3):
    """Assemble (T0, U0) on l2(D_P) + H + l2(D_P*) and (Tflat, Vflat) on H + l2(D_P)."""
    s, p = pair.S, pair.P
    n = pair.n
    qp, qs = fp.defect_P.basis, fp.defect_Pstar.basis
    dp, ds = fp.defect_P.defect_op, fp.defect_Pstar.defect_op
    rp, rs = qp.shape[1], qs.shape[1]
    f, g = fp.F, fp.Fstar
    fa, ga = adjoint(f), adjoint(g)

    dp_h = adjoint(qp) @ dp  # H -> D_P coordinates
    pstar_c = adjoint(qp) @ adjoint(p) @ qs  # D_P* -> D_P coordinates
    ds_c = ds @ qs  # D_P* coordinates -> H

    k0 = SlotLayout(rp, n, rs)
    u0 = SeqOperator(
        k0,
        k0,
        {
            (-1, 0): dp_h,
            (-1, 1): -pstar_c,
            (0, 0): p,
            (0, 1): ds_c,
            (1, 2): np.eye(rs),
        },
        {1: np.eye(rp)},
        {1: np.eye(rs)},
        1,
    ).widen(radius)
    t0 = SeqOperator(
        k0,
        k0,
        {
            (-1, -1): f,
            (-1, 0): fa @ dp_h,
            (-1, 1): -fa @ pstar_c,
            (0, 0): s,
            (0, 1): ds_c @ g,
            (1, 1): ga,
            (1, 2): g,
        },
        {0: f, 1: fa},
        {0: ga, 1: g},
        1,
    ).widen(radius)

    n0 = SlotLayout.one_sided(n, rp)
    tflat = SeqOperator(
        n0,
        n0,
        {(0, 0): s, (1, 0): fa @ dp_h, (1, 1): f},
        {},
        {0: f, -1: fa},
        1,
    ).widen(radius)
    vflat = SeqOperator(
        n0,
        n0,
        {(0, 0): p, (1, 0): dp_h},
        {},
        {-1: np.eye(rp)},
        1,
    ).widen(radius)
    return DilationBundle(pair, fp, t0, u0, tflat, vflat)


def build_gamma_isometric(pair, fp, radius=3):
    """The minimal Gamma-isometric dilation (Tflat, Vflat) on H + l2(D_P)."""
    b = build_sznagy(pair, fp, radius)
    return b.Tflat, b.Vflat


def _center_basis(layout):
    return FiniteVector.delta(layout, 0, np.eye(layout.center_dim))


def compression_residual(t, u, s, p, max_power):
    """max over m, n <= max_power of ||P_H T^m U^n |_H - S^m P^n||."""
    worst = 0.0
    x = _center_basis(u.layout_in)
    pn = np.eye(s.shape[0])
    for k in range(max_power + 1):
        y = x
        sm = np.eye(s.shape[0])
        for m in range(max_power + 1):
            worst = max(worst, opnorm(y.block(0, s.shape[0]) - sm @ pn))
            y = t.apply(y)
            sm = s @ sm
        x = u.apply(x)
        pn = p @ pn
    return worst


def verify_dilation(bundle, max_power=5, tol=1e-9):
    """Check P_H T^m U^n |_H = S^m P^n for both the unitary and the isometric dilation."""
    s, p = bundle.pair.S, bundle.pair.P
    res = compression_residual(bundle.T0, bundle.U0, s, p, max_power)
    res_flat = compression_residual(bundle.Tflat, bundle.Vflat, s, p, max_power)
    return {
        "max_power": max_power,
        "dilation_residual": res,
        "isometric_dilation_residual": res_flat,
        "passed": bool(res <= tol and res_flat <= tol),
    }


def symbol_norm_max(a0, a1, points=SYMBOL_GRID):
    """max over |z| = 1 of ||a0 + a1 z|| on a uniform grid."""
    if a0.size == 0:
        return 0.0
    z = np.exp(2j * np.pi * np.arange(points) / points)
    vals = np.linalg.norm(a0[None] + z[:, None, None] * a1[None], ord=2, axis=(1, 2))
    return float(vals.max())


def verify_gamma_unitary_structure(bundle, tol=1e-9, norm_tol=1e-8):
    """Structural Gamma-unitary checks for (T0, U0) and Gamma-isometry checks for the flat pair.

    The spectral-radius condition r(T0) <= 2 is certified through the symbol
    norms of the two Toeplitz corners and ||S||, never through eigenvalues of
    a truncation.
    """
    t0, u0 = bundle.T0, bundle.U0
    tf, vf = bundle.Tflat, bundle.Vflat
    eye = identity(bundle.layout)
    eye_flat = identity(bundle.flat_layout)
    f, g = bundle.fp.F, bundle.fp.Fstar
    u0h = u0.adjoint()
    tfh = tf.adjoint()
    res = {
        "U0_unitary": max(
            structural_distance(compose_window(u0h, u0), eye),
            structural_distance(compose_window(u0, u0h), eye),
        ),
        "commutation": structural_distance(compose_window(t0, u0), compose_window(u0, t0)),
        "T0_eq_T0starU0": structural_distance(t0, compose_window(t0.adjoint(), u0)),
        "Vflat_isometry": structural_distance(compose_window(vf.adjoint(), vf), eye_flat),
        "flat_commutation": structural_distance(compose_window(tf, vf), compose_window(vf, tf)),
        "Tflat_eq_TflatstarVflat": structural_distance(tf, compose_window(tfh, vf)),
    }
    bounds = {
        "symbol_F": symbol_norm_max(f, adjoint(f)),
        "symbol_Fstar": symbol_norm_max(adjoint(g), g),
        "norm_S": opnorm(bundle.pair.S),
    }
    spectral_ok = all(v <= 2 + norm_tol for v in bounds.values())
    return {
        **res,
        "spectral_bound": {**bounds, "passed": spectral_ok},
        "passed": bool(all(v <= tol for v in res.values()) and spectral_ok),
    }


def minimality_check(bundle, horizon=4, tol=1e-9):
    """Windowed minimality: U0^k H and U0*^k H (k <= horizon) fill slots |j| <= horizon - 1."""
    u0 = bundle.U0
    u0h = u0.adjoint()
    layout = bundle.layout
    cols = []
    for op in (u0, u0h):
        x = _center_basis(layout)
        for _ in range(horizon + 1):
            cols.append(x)
            x = op.apply(x)
    lo, hi = -(horizon - 1), horizon - 1
    mats = []
    for v in cols:
        v = FiniteVector(layout, {i: b for i, b in v.blocks.items() if lo <= i <= hi})
        mats.append(v.to_dense(lo, hi).reshape(-1, layout.center_dim))
    m = np.hstack(mats)
    _, total = layout.offsets(lo, hi)
    if m.size == 0:
        rank = 0
    else:
        sv = np.linalg.svd(m, compute_uv=False)
        rank = int(np.sum(sv > tol * max(1.0, sv[0])))
    return {"horizon": horizon, "rank": rank, "window_dim": total, "filled": rank == total}


def adjoint_extension_residual(bundle):
    """||Tflat* h - S* h|| and ||Vflat* h - P* h|| over a basis of H, embedded at slot 0.

    Nonzero output outside slot 0 counts towards the residual.
    """
    s, p = bundle.pair.S, bundle.pair.P
    x = _center_basis(bundle.flat_layout)
    worst = 0.0
    for op, target in ((bundle.Tflat, s), (bundle.Vflat, p)):
        y = op.adjoint_apply(x)
        diff = y - FiniteVector.delta(bundle.flat_layout, 0, adjoint(target))
        worst = max(worst, diff.max_block_norm())
    return worst


def restrict_nonpositive(op, layout):
    """Restriction of a two-sided operator to indices <= 0, re-indexed k -> -k."""
    w = op.radius
    window = {}
    for k in range(0, w + 1):
        for j in op.row_cols(-k):
            if j <= 0:
                window[(k, -j)] = op.block(-k, j)
    right = {-d: b for d, b in op.left_tail.items()}
    return SeqOperator(layout, layout, window, {}, right, w)


def unitary_extension_residual(bundle):
    """How far (T0, U0) is from extending (Tflat, Vflat) on H + l2(D_P).

    Combines the invariance of the non-positive half under T0 and U0 with
    blockwise agreement of the restrictions.
    """
    worst = 0.0
    for two, flat in ((bundle.T0, bundle.Tflat), (bundle.U0, bundle.Vflat)):
        for i in range(1, two.radius + 1):
            for j in two.row_cols(i):
                if j <= 0:
                    worst = max(worst, opnorm(two.block(i, j)))
        worst = max(worst, structural_distance(restrict_nonpositive(two, bundle.flat_layout), flat))
    return worst
