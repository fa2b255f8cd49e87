"""Functional models: Toeplitz pairs, Wold splitting, DMP completions, co-isometric models."""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .dilation import symbol_norm_max
from .errors import (
    FactorizationResidualExceeded,
    LayoutMismatch,
    NotContraction,
    NotIsometry,
    NumericalRadiusExceeded,
    ShapeMismatch,
)
from .fundop import fundamental_coordinates
from .numlin import adjoint, as_matrix, defect, defect_from_gram, defect_rank_tol, numerical_radius, opnorm
from .seqop import FiniteVector, SeqOperator, SlotLayout, compose_window, identity, structural_distance


def _symbol_structure_residuals(t, v):
    """Residuals of the Gamma-isometry identities V*V = I, T = T*V and TV = VT."""
    return {
        "isometry": structural_distance(compose_window(v.adjoint(), v), identity(v.layout_in)),
        "T_eq_TstarV": structural_distance(t, compose_window(t.adjoint(), v)),
        "commutation": structural_distance(compose_window(t, v), compose_window(v, t)),
    }


@dataclass
class ToeplitzPairModel:
    """(T_phi, T_z) on l2(E) with phi(z) = A* + A z."""

    E_dim: int
    A: np.ndarray
    Tphi: SeqOperator
    Tz: SeqOperator
    checks: dict = field(default_factory=dict)


def toeplitz_pair(a):
    e = a.shape[0]
    layout = SlotLayout.one_sided(e, e)
    aa = adjoint(a)
    tphi = SeqOperator(layout, layout, {(0, 0): aa, (1, 0): a, (1, 1): aa}, {}, {0: aa, -1: a}, 1)
    tz = SeqOperator(layout, layout, {(1, 0): np.eye(e)}, {}, {-1: np.eye(e)}, 1)
    return tphi, tz


def pure_gamma_isometry_from_A(a, tol=1e-9):
    """Build the pure Gamma-isometry (T_{A* + Az}, T_z) for w(A) <= 1.

    Raises ``NumericalRadiusExceeded`` otherwise.  ``checks`` records the
    structural identities and the sampled symbol bound max ||A* + A z|| <= 2.
    """
    a = as_matrix(a, "A", square=True)
    w = numerical_radius(a)
    if w > 1 + tol:
        raise NumericalRadiusExceeded(f"w(A) = {w:.12g} exceeds 1")
    tphi, tz = toeplitz_pair(a)
    checks = _symbol_structure_residuals(tphi, tz)
    checks["symbol_norm"] = symbol_norm_max(adjoint(a), a)
    checks["omega_A"] = w
    checks["passed"] = bool(
        all(checks[k] <= tol for k in ("isometry", "T_eq_TstarV", "commutation"))
        and checks["symbol_norm"] <= 2 + 1e-8
    )
    return ToeplitzPairModel(a.shape[0], a, tphi, tz, checks)


@dataclass
class FiniteDefectSolution:
    """Fundamental operator of a pair of sequence operators with finite-rank defect."""

    F: np.ndarray
    defect: object
    lo: int
    hi: int
    layout: SlotLayout
    residual: float
    leak: float

    def lifted(self):
        q = self.defect.basis
        return q @ self.F @ adjoint(q)

    def slot_block(self, i, j):
        offs, _ = self.layout.offsets(self.lo, self.hi)
        f = self.lifted()
        di, dj = self.layout.dim(i), self.layout.dim(j)
        return f[offs[i] : offs[i] + di, offs[j] : offs[j] + dj]


def _support_window(op):
    lo = -op.radius if op.layout_out.two_sided else 0
    return lo, op.radius + op.band


def _leak(op, lo, hi):
    """Norm of the blocks of ``op`` outside rows/cols lo..hi (tails included)."""
    worst = max((opnorm(b) for b in op.left_tail.values()), default=0.0)
    worst = max(worst, max((opnorm(b) for b in op.right_tail.values()), default=0.0))
    for (i, j), b in op.window.items():
        if not (lo <= i <= hi and lo <= j <= hi):
            worst = max(worst, opnorm(b))
    return worst


def finite_defect_fundamental(s, p, rank_tol=None):
    """Solve S - S*P = D_P X D_P when I - P*P has finite support.

    ``s`` and ``p`` are SeqOperators; the defect and the right-hand side are
    assembled on a dense window covering their support.  ``leak`` reports any
    mass of either operator outside that window (zero when the finite-support
    premise holds).
    """
    eye = identity(p.layout_in)
    gram = eye - compose_window(p.adjoint(), p)
    rhs = s - compose_window(s.adjoint(), p)
    lo = min(_support_window(gram)[0], _support_window(rhs)[0])
    hi = max(_support_window(gram)[1], _support_window(rhs)[1])
    leak = max(_leak(gram, lo, hi), _leak(rhs, lo, hi))
    g = gram.dense_window(lo, hi)
    x = rhs.dense_window(lo, hi)
    tol = defect_rank_tol(g.shape[0]) if rank_tol is None else rank_tol
    dd = defect_from_gram(g, tol)
    f, residual = fundamental_coordinates(x, dd)
    return FiniteDefectSolution(f, dd, lo, hi, p.layout_in, residual, leak)


def recover_fundamental_from_model(model, tol=1e-9):
    """Fundamental operator of (T_phi*, T_z*), read on the slot-0 defect space.

    Returns the E x E block, which should equal ``model.A``.
    """
    sol = finite_defect_fundamental(model.Tphi.adjoint(), model.Tz.adjoint())
    return sol.slot_block(0, 0)


@dataclass
class PureIsometryIdentification:
    fundamental: np.ndarray
    defect_dim: int
    shift_residual: float
    symbol_residual: float
    norm_defect: float
    coefficients: int


def _coefficients(x, op, frame, count):
    """c_k(x) = Q* op^k x for k < count, stacked as (count, r, ncols).

    Q is supported on slots 0..frame.hi, so blocks beyond it contribute nothing.
    """
    out = []
    y = x
    qh = adjoint(frame.basis)
    for _ in range(count):
        kept = FiniteVector(y.layout, {i: b for i, b in y.blocks.items() if 0 <= i <= frame.hi})
        if not kept.blocks:
            kept = FiniteVector.delta(y.layout, 0, np.zeros((y.layout.dim(0), x._ncols() or 1), complex))
        out.append(qh @ kept.to_dense(0, frame.hi).reshape(qh.shape[1], -1))
        y = op.apply(y)
    return np.array(out)


@dataclass
class _Frame:
    basis: np.ndarray
    hi: int


def identify_pure_isometry(s_hat, p_hat, coefficients=40, probe_slots=3, rank_tol=None):
    """Identify a pure Gamma-isometry with (T_phi, T_z), phi = G* + G z.

    G is the fundamental operator of (S_hat*, P_hat*), computed on the finite
    defect space of P_hat*.  The identification sends x to its coefficient
    sequence c_k(x) = Q* (P_hat*)^k x; the report gives the residuals of the
    two intertwining relations and the norm defect 1 - sum ||c_k||^2 / ||x||^2
    over the first ``coefficients`` terms (small only when P_hat is pure).
    """
    sol = finite_defect_fundamental(s_hat.adjoint(), p_hat.adjoint(), rank_tol)
    if sol.lo != 0:
        raise LayoutMismatch("identify_pure_isometry expects one-sided operators")
    g = sol.F
    frame = _Frame(sol.defect.basis, sol.hi)
    layout = p_hat.layout_in
    pstar = p_hat.adjoint()
    shift_res = sym_res = 0.0
    norm_defect = 0.0
    for j in range(probe_slots + 1):
        d = layout.dim(j)
        if d == 0:
            continue
        x = FiniteVector.delta(layout, j, np.eye(d))
        c = _coefficients(x, pstar, frame, coefficients)
        cp = _coefficients(p_hat.apply(x), pstar, frame, coefficients)
        cs = _coefficients(s_hat.apply(x), pstar, frame, coefficients)
        shift_res = max(shift_res, opnorm(cp[0]), *(opnorm(cp[k] - c[k - 1]) for k in range(1, coefficients)))
        sym = [adjoint(g) @ c[0]] + [adjoint(g) @ c[k] + g @ c[k - 1] for k in range(1, coefficients)]
        sym_res = max(sym_res, *(opnorm(cs[k] - sym[k]) for k in range(coefficients)))
        gram = sum(adjoint(ck) @ ck for ck in c)
        norm_defect = max(norm_defect, opnorm(np.eye(d) - gram))
    return PureIsometryIdentification(g, sol.defect.rank, shift_res, sym_res, norm_defect, coefficients)


@dataclass
class WoldSplit:
    unitary_basis: np.ndarray
    pure_basis: np.ndarray
    iterations: int
    windowed: bool


def _orth(m, tol):
    if m.size == 0:
        return m
    u, sv, _ = np.linalg.svd(m, full_matrices=False)
    return u[:, sv > tol * max(1.0, sv[0] if sv.size else 1.0)]


def wold_decompose(v, tol=1e-9, windowed=False):
    """Split C^n into the intersection of the ranges of V^k and its complement.

    For a genuine (finite-dimensional) isometry the pure part is empty.  With
    ``windowed=True`` the isometry check is skipped so that compressions of
    sequence-space isometries to a finite window can be examined.
    """
    v = as_matrix(v, "V", square=True)
    n = v.shape[0]
    if not windowed and opnorm(adjoint(v) @ v - np.eye(n)) > tol:
        raise NotIsometry("V*V differs from I")
    basis = np.eye(n, dtype=complex)
    it = 0
    for it in range(1, n + 2):
        nxt = _orth(v @ basis, tol)
        if nxt.shape[1] == basis.shape[1]:
            break
        basis = nxt
    pure = scipy.linalg.null_space(adjoint(basis)) if basis.shape[1] else np.eye(n, dtype=complex)
    if basis.shape[1] == n:
        pure = np.zeros((n, 0), complex)
    return WoldSplit(basis, pure, it, windowed)


def norm_preserving_part(v, steps=16, threshold=0.5):
    """Orthonormal basis of {x : ||V^k x|| = ||x|| for all k} for a contraction V.

    Approximated through the Gram matrix of V^(2^steps); eigenvalues of P
    with |lambda| within about 2^-steps of the circle are not resolved.
    """
    v = as_matrix(v, "V", square=True)
    m = v.copy()
    for _ in range(steps):
        m = m @ m
    lam, vec = np.linalg.eigh(adjoint(m) @ m)
    return vec[:, lam > threshold]


@dataclass
class DMPResult:
    is_contraction: bool
    sigma_max: float
    C: np.ndarray | None = None
    norm_C: float | None = None
    residual: float | None = None


def dmp_check(t1, t2, x, tol=1e-9, rank_tol=None):
    """Contractivity of [[T1, X], [0, T2]] and extraction of the completing contraction.

    When the block matrix is a contraction, C = D_{T1*}^+ X D_{T2}^+ is returned
    together with ||C|| and the factorization residual ||D_{T1*} C D_{T2} - X||;
    a residual above ``tol * (1 + ||X||)`` raises ``FactorizationResidualExceeded``.
    """
    t1 = as_matrix(t1, "T1", square=True)
    t2 = as_matrix(t2, "T2", square=True)
    x = as_matrix(x, "X")
    if x.shape != (t1.shape[0], t2.shape[0]):
        raise ShapeMismatch(f"X has shape {x.shape}, expected {(t1.shape[0], t2.shape[0])}")
    if opnorm(t1) > 1 + tol or opnorm(t2) > 1 + tol:
        raise NotContraction("T1 and T2 must be contractions")
    m, k = x.shape
    block = np.block([[t1, x], [np.zeros((k, m)), t2]])
    sigma = opnorm(block)
    if sigma > 1 + tol:
        return DMPResult(False, sigma)
    c, residual = dmp_extract(t1, t2, x, tol, rank_tol)
    return DMPResult(True, sigma, c, opnorm(c), residual)


def dmp_extract(t1, t2, x, tol=1e-9, rank_tol=None):
    """C = D_{T1*}^+ X D_{T2}^+ and the residual ||D_{T1*} C D_{T2} - X||."""
    d1 = defect(adjoint(t1), rank_tol)
    d2 = defect(t2, rank_tol)
    inner = adjoint(d1.basis) @ x @ d2.basis
    inner = d1.inv_sqrt_eigenvalues()[:, None] * inner * d2.inv_sqrt_eigenvalues()[None, :]
    c = d1.basis @ inner @ adjoint(d2.basis)
    residual = opnorm(d1.defect_op @ c @ d2.defect_op - x)
    if residual > tol * (1 + opnorm(x)):
        raise FactorizationResidualExceeded(f"factorization residual {residual:.3e}")
    return c, residual


@dataclass
class CoisometricModel:
    T: SeqOperator
    V: SeqOperator
    B: np.ndarray
    report: dict


def build_coisometric_model(pair, fp, window=8, tol=1e-9):
    """Model (T, V) on H + D_P* + D_P* + ... for a Gamma-contraction.

    The report covers: H invariant with T|H = S and V|H = P, the
    Gamma-co-isometry identities, the fundamental operator B of (T, V) and its
    unitary equivalence with F, the coefficient-model intertwining on a window,
    and the unitary part of the isometry V* among vectors supported on a window.
    """
    s, p = pair.S, pair.P
    n = pair.n
    qs = fp.defect_Pstar.basis
    ds = fp.defect_Pstar.defect_op
    rs = qs.shape[1]
    g = fp.Fstar
    ga = adjoint(g)
    layout = SlotLayout.one_sided(n, rs)
    t = SeqOperator(
        layout, layout, {(0, 0): s, (0, 1): ds @ qs @ g, (1, 1): ga, (1, 2): g}, {}, {0: ga, 1: g}, 1
    )
    v = SeqOperator(layout, layout, {(0, 0): p, (0, 1): ds @ qs, (1, 2): np.eye(rs)}, {}, {1: np.eye(rs)}, 1)

    h = FiniteVector.delta(layout, 0, np.eye(n))
    restriction = max(
        (t.apply(h) - FiniteVector.delta(layout, 0, s)).max_block_norm(),
        (v.apply(h) - FiniteVector.delta(layout, 0, p)).max_block_norm(),
    )

    th, vh = t.adjoint(), v.adjoint()
    co = _symbol_structure_residuals(th, vh)
    co["symbol_Fstar"] = symbol_norm_max(ga, g)
    co["norm_S"] = opnorm(s)
    co["passed"] = bool(
        all(co[k] <= tol for k in ("isometry", "T_eq_TstarV", "commutation"))
        and co["symbol_Fstar"] <= 2 + 1e-8
        and co["norm_S"] <= 2 + 1e-8
    )

    sol = finite_defect_fundamental(t, v)
    b = sol.F
    qv = sol.defect.basis
    dv = sol.defect.defect_op
    # unitary L: D_P h -> D_V h, in defect coordinates
    qp = fp.defect_P.basis
    offs, _ = layout.offsets(sol.lo, sol.hi)
    dv_h = dv[:, offs[0] : offs[0] + n]
    lmap = adjoint(qv) @ dv_h @ qp * fp.defect_P.inv_sqrt_eigenvalues()[None, :]
    if b.shape == fp.F.shape:
        b_vs_f = max(
            opnorm(adjoint(lmap) @ b @ lmap - fp.F),
            opnorm(adjoint(lmap) @ lmap - np.eye(lmap.shape[1])),
        )
    else:
        b_vs_f = np.inf

    # coefficient model of the pure part: c_k(x) = Q_V* V^k x
    frame = _Frame(qv, sol.hi)
    window_res = 0.0
    for j in range(window):
        d = layout.dim(j)
        if d == 0 or b.size == 0:
            continue
        x = FiniteVector.delta(layout, j, np.eye(d))
        c = _coefficients(x, v, frame, window + 1)
        ct = _coefficients(t.apply(x), v, frame, window)
        for k in range(window):
            window_res = max(window_res, opnorm(ct[k] - (b @ c[k] + adjoint(b) @ c[k + 1])))

    # slots 0..window are V-invariant, so the compression of V there is exact;
    # the unitary part of the isometry V* is where every power of V keeps norms
    v_win = v.dense_window(0, window)
    unitary = norm_preserving_part(v_win)
    report = {
        "restriction_residual": restriction,
        "gamma_coisometry_checks": co,
        "defect_dims": [fp.defect_P.rank, sol.defect.rank],
        "B_vs_Fstar_window_residual": window_res,
        "B_unitarily_equivalent_F_residual": b_vs_f,
        "fundamental_B_residual": sol.residual,
        "wold_window": {
            "window": window,
            "unitary_dim": int(unitary.shape[1]),
            "pure_dim": int(v_win.shape[0] - unitary.shape[1]),
            "caveat": "restricted to vectors supported on slots 0..window; "
            "eigenvalues of P within ~1e-5 of the circle are not resolved",
        },
    }
    return CoisometricModel(t, v, b, report)
