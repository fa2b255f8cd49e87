"""Fundamental operators of a Gamma-contraction and their cross identities.

For a Gamma-contraction (S, P) the fundamental operator F is the unique
operator on the defect space of P with S - S*P = D_P F D_P; F_* is the same
object for the adjoint pair (S*, P*).  Both are stored in the coordinates of
the orthonormal defect bases returned by :func:`gamma_lab.numlin.defect`.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NotUnitary
from .numlin import DefectData, adjoint, as_matrix, defect, numerical_radius, opnorm

IDENTITY_NAMES = ("a1", "a2", "a3", "a4", "b1", "b2", "b3", "PF")


@dataclass(frozen=True)
class FundamentalPair:
    F: np.ndarray
    Fstar: np.ndarray
    residual_F: float
    residual_Fstar: float
    omega_F: float
    omega_Fstar: float
    defect_P: DefectData
    defect_Pstar: DefectData
    tol: float
    violates_equation: bool

    def F_ambient(self):
        """F lifted to the ambient space: Q F Q*."""
        q = self.defect_P.basis
        return q @ self.F @ adjoint(q)

    def Fstar_ambient(self):
        q = self.defect_Pstar.basis
        return q @ self.Fstar @ adjoint(q)

    def to_dict(self):
        return {
            "F": self.F,
            "Fstar": self.Fstar,
            "residual_F": self.residual_F,
            "residual_Fstar": self.residual_Fstar,
            "omega_F": self.omega_F,
            "omega_Fstar": self.omega_Fstar,
            "rank_DP": self.defect_P.rank,
            "rank_DPstar": self.defect_Pstar.rank,
            "violates_equation": self.violates_equation,
        }


def fundamental_coordinates(x, dd):
    """Solve X = D X_0 D on the defect space described by ``dd``.

    Returns the coordinate matrix Lambda^{-1/2} Q* X Q Lambda^{-1/2} and the
    residual ||D (Q X_0 Q*) D - X|| of its ambient lift.
    """
    q = dd.basis
    w = dd.inv_sqrt_eigenvalues()
    f = w[:, None] * (adjoint(q) @ x @ q) * w[None, :]
    residual = fundamental_residual(x, f, dd)
    return f, residual


def fundamental_residual(x, f, dd):
    """||D_P (Q F Q*) D_P - X|| for a candidate F in defect coordinates."""
    q = dd.basis
    d = dd.defect_op
    return opnorm(d @ q @ f @ adjoint(q) @ d - x)


def solve_fundamental(pair, rank_tol=None, tol=1e-10):
    """Fundamental operators F (of (S, P)) and F_* (of (S*, P*)).

    The equation is always solved on the retained defect directions; if the
    lifted residual exceeds ``tol * (1 + ||S||)`` the result is flagged with
    ``violates_equation`` (the pair cannot then be a Gamma-contraction).
    Rank-zero defects give empty 0 x 0 operators.
    """
    s, p = pair.S, pair.P
    sa, pa = adjoint(s), adjoint(p)
    dp = defect(p, rank_tol)
    dps = defect(pa, rank_tol)
    f, res_f = fundamental_coordinates(s - sa @ p, dp)
    fs, res_fs = fundamental_coordinates(sa - s @ pa, dps)
    bound = tol * (1.0 + opnorm(s))
    return FundamentalPair(
        F=f,
        Fstar=fs,
        residual_F=res_f,
        residual_Fstar=res_fs,
        omega_F=numerical_radius(f),
        omega_Fstar=numerical_radius(fs),
        defect_P=dp,
        defect_Pstar=dps,
        tol=tol,
        violates_equation=bool(res_f > bound or res_fs > bound),
    )


@dataclass
class IdentityReport:
    residuals: dict
    tol: float

    @property
    def passed(self):
        return all(v <= self.tol for v in self.residuals.values())

    def to_dict(self):
        return {**self.residuals, "passed": self.passed, "tol": self.tol}


def identity_suite(pair, fp, tol=1e-9):
    """Residuals of the operator identities linking S, P, F and F_*.

    Every identity is evaluated with F and F_* lifted to the ambient space, so
    maps between the two defect spaces need no basis pairing.
    """
    s, p = pair.S, pair.P
    sa, pa = adjoint(s), adjoint(p)
    dp = fp.defect_P.defect_op
    dps = fp.defect_Pstar.defect_op
    f = fp.F_ambient()
    fa = adjoint(f)
    g = fp.Fstar_ambient()
    ga = adjoint(g)
    res = {
        "a1": opnorm(dp @ s - (f @ dp + fa @ dp @ p)),
        "a2": opnorm(dp @ dps @ g - pa @ ga - (-f @ pa + fa @ dp @ dps)),
        "a3": opnorm(s @ dps - (dps @ ga + p @ dps @ g)),
        "a4": opnorm(fa @ pa - pa @ g),
        "b1": opnorm(dps @ g - (sa @ dps - dp @ f @ pa)),
        "b2": opnorm(p @ f @ dp - ga @ dps @ p),
        "b3": opnorm(p @ f @ pa + ga @ dps @ dps - ga),
        "PF": opnorm(p @ f - ga @ p),
    }
    return IdentityReport(res, tol)


def transport_under_unitary(pair, u, tol=1e-9, rank_tol=None):
    """Compare fundamental operators of (S, P) and (U*SU, U*PU).

    Returns a dict with singular-value distances and the residuals of the
    explicit intertwiners W = Q_1* U* Q built from the two defect bases.
    """
    u = as_matrix(u, "U", square=True)
    if opnorm(adjoint(u) @ u - np.eye(u.shape[0])) > tol:
        raise NotUnitary("U is not unitary within tolerance")
    pair1 = pair.conjugate_by(u)
    fp = solve_fundamental(pair, rank_tol)
    fp1 = solve_fundamental(pair1, rank_tol)
    out = {}
    for name, a, a1, dd, dd1 in (
        ("F", fp.F, fp1.F, fp.defect_P, fp1.defect_P),
        ("Fstar", fp.Fstar, fp1.Fstar, fp.defect_Pstar, fp1.defect_Pstar),
    ):
        if dd.rank != dd1.rank:
            out[f"{name}_sv_distance"] = np.inf
            out[f"{name}_intertwiner_residual"] = np.inf
            continue
        sv = np.linalg.svd(a, compute_uv=False) if a.size else np.zeros(0)
        sv1 = np.linalg.svd(a1, compute_uv=False) if a1.size else np.zeros(0)
        out[f"{name}_sv_distance"] = float(np.max(np.abs(sv - sv1), initial=0.0))
        w = adjoint(dd1.basis) @ adjoint(u) @ dd.basis
        out[f"{name}_intertwiner_residual"] = opnorm(a1 - w @ a @ adjoint(w))
    out["passed"] = all(v <= tol for k, v in out.items())
    return out
