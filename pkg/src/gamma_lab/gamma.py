"""Membership in the symmetrized bidisc and classification of commuting pairs."""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import NotCommuting, NotContractions, TriangularizationFailed
from .numlin import adjoint, as_matrix, hermitian_part, opnorm, principal_sqrt, spectral_radius

YES, NO, INCONCLUSIVE = "yes", "no", "inconclusive"


def pair_tolerance(s, p):
    return 1e-10 * (1.0 + opnorm(s) * opnorm(p))


@dataclass(frozen=True)
class OperatorPair:
    """A commuting pair (S, P) of n x n matrices.

    Construction fails with ``NotCommuting`` when ||SP - PS|| exceeds ``tol``
    (default ``1e-10 * (1 + ||S|| ||P||)``).
    """

    S: np.ndarray
    P: np.ndarray
    tol: float | None = None
    commutator_residual: float = field(init=False)

    def __post_init__(self):
        s = as_matrix(self.S, "S", square=True)
        p = as_matrix(self.P, "P", square=True)
        if s.shape != p.shape:
            raise NotCommuting(f"S is {s.shape} but P is {p.shape}")
        if s.shape[0] < 1:
            raise ValueError("pair dimension must be positive")
        s.setflags(write=False)
        p.setflags(write=False)
        tol = pair_tolerance(s, p) if self.tol is None else float(self.tol)
        res = opnorm(s @ p - p @ s)
        if res > tol:
            raise NotCommuting(f"||SP - PS|| = {res:.3e} exceeds {tol:.1e}")
        object.__setattr__(self, "S", s)
        object.__setattr__(self, "P", p)
        object.__setattr__(self, "tol", tol)
        object.__setattr__(self, "commutator_residual", res)

    @property
    def n(self):
        return self.S.shape[0]

    def adjoint(self):
        return OperatorPair(adjoint(self.S), adjoint(self.P), tol=self.tol)

    def conjugate_by(self, u):
        """The pair (U* S U, U* P U)."""
        u = as_matrix(u, "U", square=True)
        return OperatorPair(adjoint(u) @ self.S @ u, adjoint(u) @ self.P @ u, tol=self.tol)


def symmetrize(z1, z2):
    return (z1 + z2, z1 * z2)


def symmetrize_pair(t1, t2, tol=1e-10):
    """(T1 + T2, T1 T2) for commuting contractions T1, T2."""
    t1 = as_matrix(t1, "T1", square=True)
    t2 = as_matrix(t2, "T2", square=True)
    if t1.shape != t2.shape:
        raise NotCommuting("T1 and T2 differ in shape")
    if opnorm(t1) > 1 + tol or opnorm(t2) > 1 + tol:
        raise NotContractions(f"||T1|| = {opnorm(t1):.6g}, ||T2|| = {opnorm(t2):.6g}")
    if opnorm(t1 @ t2 - t2 @ t1) > tol:
        raise NotCommuting("T1 and T2 do not commute")
    return OperatorPair(t1 + t2, t1 @ t2)


def symmetrization_roots(s, p):
    """The two roots of x^2 - s x + p, computed without cancellation."""
    s, p = complex(s), complex(p)
    disc = np.sqrt(s * s - 4 * p)
    q = 0.5 * (s + disc) if abs(s + disc) >= abs(s - disc) else 0.5 * (s - disc)
    if q == 0:
        return 0j, 0j
    return q, p / q


class GammaPoint(NamedTuple):
    in_gamma: bool
    in_bgamma: bool


def point_in_gamma(s, p, tol=1e-10):
    r1, r2 = (abs(r) for r in symmetrization_roots(s, p))
    in_gamma = r1 <= 1 + tol and r2 <= 1 + tol
    in_bgamma = in_gamma and r1 >= 1 - tol and r2 >= 1 - tol
    return GammaPoint(bool(in_gamma), bool(in_bgamma))


def rho_form(s, p):
    """2(I - P*P) - (S - S*P) - (S* - P*S), symmetrized numerically."""
    s = np.asarray(s, dtype=np.complex128)
    p = np.asarray(p, dtype=np.complex128)
    if s.shape[-2:] != p.shape[-2:]:
        raise NotCommuting("S and P differ in shape")
    n = s.shape[-1]
    sa, pa = adjoint(s), adjoint(p)
    rho = 2 * (np.eye(n) - pa @ p) - (s - sa @ p) - (sa - pa @ s)
    return hermitian_part(rho)


def joint_spectrum(pair, tol=1e-8, max_retries=8, seed=0):
    """Joint eigenvalues (s_i, p_i) read off a common Schur triangularization.

    The Schur basis of S + gamma P is used for a random complex gamma and
    accepted when it triangularizes both S and P to within ``tol`` relative
    to their norms.
    """
    rng = np.random.default_rng(seed)
    scale = 1.0 + opnorm(pair.S) + opnorm(pair.P)
    worst = np.inf
    for _ in range(max_retries):
        gamma = rng.uniform(0.5, 2.0) * np.exp(2j * np.pi * rng.uniform())
        _, q = scipy.linalg.schur(pair.S + gamma * pair.P, output="complex")
        ts = adjoint(q) @ pair.S @ q
        tp = adjoint(q) @ pair.P @ q
        low = max(opnorm(np.tril(ts, -1)), opnorm(np.tril(tp, -1)))
        worst = min(worst, low)
        if low <= tol * scale:
            return [(complex(a), complex(b)) for a, b in zip(np.diag(ts), np.diag(tp))]
    raise TriangularizationFailed(
        f"no common triangularization after {max_retries} tries (best residual {worst:.3e})"
    )


@dataclass
class ContractionVerdict:
    verdict: str
    min_eigenvalue: float
    witness_alpha: complex
    spectrum_in_gamma: bool | None
    failing_point: tuple | None = None

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "min_eigenvalue": self.min_eigenvalue,
            "witness_alpha": [self.witness_alpha.real, self.witness_alpha.imag],
            "spectrum_in_gamma": self.spectrum_in_gamma,
            "failing_point": None
            if self.failing_point is None
            else [[z.real, z.imag] for z in self.failing_point],
        }


def alpha_grid(radial_steps=20, angular_steps=64):
    """Points r e^{i phi} with r = k/radial_steps (k = 0..radial_steps) and uniform phi."""
    r = np.arange(radial_steps + 1) / radial_steps
    phi = 2 * np.pi * np.arange(angular_steps) / angular_steps
    return (r[:, None] * np.exp(1j * phi)[None, :]).ravel()


def rho_grid_minimum(s, p, alphas):
    """Minimum eigenvalue of rho(alpha S, alpha^2 P) over ``alphas`` and the argmin."""
    a = np.asarray(alphas)[:, None, None]
    lam = np.linalg.eigvalsh(rho_form(a * s[None], a**2 * p[None]))[:, 0]
    k = int(np.argmin(lam))
    return float(lam[k]), complex(alphas[k])


def is_gamma_contraction(
    pair, radial_steps=20, angular_steps=64, tol=1e-8, spectrum_tol=1e-7
):
    """Decide whether ``pair`` is a Gamma-contraction.

    Both the joint spectrum must lie in Gamma and rho(alpha S, alpha^2 P) must
    be positive semidefinite on a polar grid of the closed unit disc.  The grid
    threshold is ``-tol * (1 + ||S|| + ||P||)``.
    """
    scale = 1.0 + opnorm(pair.S) + opnorm(pair.P)
    lam, alpha = rho_grid_minimum(pair.S, pair.P, alpha_grid(radial_steps, angular_steps))
    try:
        points = joint_spectrum(pair)
    except TriangularizationFailed:
        points = None
    failing = None
    if points is not None:
        for s, p in points:
            if not point_in_gamma(s, p, spectrum_tol).in_gamma:
                failing = (s, p)
                break
    if lam < -tol * scale or failing is not None:
        verdict = NO
    elif points is None:
        verdict = INCONCLUSIVE
    else:
        verdict = YES
    spectrum_ok = None if points is None else failing is None
    return ContractionVerdict(verdict, lam, alpha, spectrum_ok, failing)


@dataclass
class GammaClassification:
    is_gamma_contraction: ContractionVerdict
    is_gamma_unitary: str
    is_gamma_isometry: str
    joint_spectrum: list | None
    norms: dict
    residuals: dict
    tol: float

    def to_dict(self):
        return {
            "is_gamma_contraction": self.is_gamma_contraction.to_dict(),
            "is_gamma_unitary": self.is_gamma_unitary,
            "is_gamma_isometry": self.is_gamma_isometry,
            "joint_spectrum": self.joint_spectrum,
            "norms": self.norms,
            "residuals": self.residuals,
            "tol": self.tol,
        }


def classify_pair(pair, tol=1e-9, contraction_tol=1e-8, radial_steps=20, angular_steps=64):
    """Classify ``pair`` as Gamma-contraction / Gamma-isometry / Gamma-unitary.

    Gamma-isometry: P*P = I, S = S*P and r(S) <= 2.  Gamma-unitary adds PP* = I.
    Norm-type residuals are compared against ``tol * (1 + ||S||)``.
    """
    s, p = pair.S, pair.P
    n = pair.n
    eye = np.eye(n)
    res = {
        "isometry": opnorm(adjoint(p) @ p - eye),
        "coisometry": opnorm(p @ adjoint(p) - eye),
        "S_minus_SstarP": opnorm(s - adjoint(s) @ p),
    }
    rs = spectral_radius(s)
    scale = 1.0 + opnorm(s)
    iso = (
        res["isometry"] <= tol
        and res["S_minus_SstarP"] <= tol * scale
        and rs <= 2 + tol
    )
    uni = iso and res["coisometry"] <= tol
    contraction = is_gamma_contraction(
        pair, radial_steps, angular_steps, tol=contraction_tol
    )
    try:
        points = [
            {
                "s": [a.real, a.imag],
                "p": [b.real, b.imag],
                **point_in_gamma(a, b, 1e-7)._asdict(),
            }
            for a, b in joint_spectrum(pair)
        ]
    except TriangularizationFailed:
        points = None
    norms = {"S": opnorm(s), "P": opnorm(p), "r_S": rs}
    return GammaClassification(
        is_gamma_contraction=contraction,
        is_gamma_unitary=YES if uni else NO,
        is_gamma_isometry=YES if iso else NO,
        joint_spectrum=points,
        norms=norms,
        residuals=res,
        tol=tol,
    )


def _poly_terms(max_degree):
    return [(a, b) for a in range(max_degree + 1) for b in range(max_degree + 1 - a)]


def evaluate_polynomial(coeffs, s, p):
    """f(S, P) = sum c_ab S^a P^b for matrices or scalar arrays."""
    s = np.asarray(s)
    if s.ndim == 2:
        n = s.shape[0]
        spow, ppow = {0: np.eye(n, dtype=complex)}, {0: np.eye(n, dtype=complex)}
        out = np.zeros((n, n), complex)
        for (a, b), c in coeffs.items():
            for k in range(1, a + 1):
                spow.setdefault(k, spow[k - 1] @ s)
            for k in range(1, b + 1):
                ppow.setdefault(k, ppow[k - 1] @ p)
            out += c * spow[a] @ ppow[b]
        return out
    return sum(c * s**a * np.asarray(p) ** b for (a, b), c in coeffs.items())


def torus_sup(coeffs, grid=64):
    """max |f(z1 + z2, z1 z2)| over the torus: grid search then local polishing."""
    th = 2 * np.pi * np.arange(grid) / grid
    z1 = np.exp(1j * th)[:, None]
    z2 = np.exp(1j * th)[None, :]
    vals = np.abs(evaluate_polynomial(coeffs, z1 + z2, z1 * z2))
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    best = float(vals[i, j])

    def neg(x):
        a, b = np.exp(1j * x[0]), np.exp(1j * x[1])
        return -abs(evaluate_polynomial(coeffs, a + b, a * b))

    opt = scipy.optimize.minimize(
        neg, [th[i], th[j]], method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14}
    )
    return max(best, -float(opt.fun))


@dataclass
class VonNeumannResult:
    verdict: str
    worst_ratio: float
    ratios: list


def von_neumann_sample(
    pair, max_degree=3, trials=20, grid=64, tol=1e-6, seed=0, polynomials=None
):
    """Sampled von Neumann inequality ||f(S, P)|| <= sup over b-Gamma of |f|.

    ``polynomials`` may give explicit coefficient maps {(a, b): c}; otherwise
    ``trials`` random complex polynomials of total degree <= ``max_degree`` are
    drawn.  This is evidence only: the torus sup is itself sampled.
    """
    if polynomials is None:
        rng = np.random.default_rng(seed)
        terms = _poly_terms(max_degree)
        polynomials = [
            {t: complex(rng.normal(), rng.normal()) for t in terms} for _ in range(trials)
        ]
    ratios = []
    for coeffs in polynomials:
        sup = torus_sup(coeffs, grid)
        val = opnorm(evaluate_polynomial(coeffs, pair.S, pair.P))
        ratios.append(val / sup if sup > 0 else (0.0 if val == 0 else np.inf))
    worst = float(max(ratios))
    return VonNeumannResult(YES if worst <= 1 + tol else NO, worst, ratios)


@dataclass
class SymmetrizationSplit:
    status: str
    T1: np.ndarray | None = None
    T2: np.ndarray | None = None
    root: np.ndarray | None = None
    residual: float | None = None


def decompose_symmetrization(pair, tol=1e-9):
    """Try to write (S, P) = (T1 + T2, T1 T2) using the principal root of S^2 - 4P.

    Returns status ``"ok"`` with T1 = (S + R)/2, T2 = (S - R)/2 when the
    principal root R commutes with S and P, and ``"inconclusive"`` otherwise.
    Raises ``SqrtFailed`` if the principal root does not exist.
    """
    s, p = pair.S, pair.P
    scale = 1.0 + opnorm(s) ** 2 + opnorm(p)
    r = principal_sqrt(s @ s - 4 * p, tol=tol)
    comm = max(opnorm(r @ s - s @ r), opnorm(r @ p - p @ r))
    if comm > tol * scale:
        return SymmetrizationSplit(INCONCLUSIVE, root=r, residual=comm)
    t1 = 0.5 * (s + r)
    t2 = 0.5 * (s - r)
    residual = opnorm(t1 + t2 - s) + opnorm(t1 @ t2 - p)
    return SymmetrizationSplit("ok", t1, t2, r, residual)
