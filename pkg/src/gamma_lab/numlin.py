"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; ``as_matrix``
is the single entry point that validates and converts user input.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NotContraction, NotHermitian, NotPSD, ShapeMismatch, SqrtFailed

__all__ = [
    "DefectData",
    "adjoint",
    "as_matrix",
    "defect",
    "defect_from_gram",
    "defect_rank_tol",
    "hermitian_part",
    "lambda_max_real_part",
    "numerical_radius",
    "opnorm",
    "principal_sqrt",
    "psd_sqrt",
    "restrict_to_defect",
    "spectral_radius",
]

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def as_matrix(a, name="matrix", square=False):
    """Return ``a`` as a finite 2-D complex128 array.

    Scalars become 1x1 matrices.  Raises ``ShapeMismatch`` for anything that is
    not two dimensional and ``ValueError`` for NaN/Inf entries.
    """
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2:
        raise ShapeMismatch(f"{name} must be two dimensional, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def adjoint(m):
    return np.conj(np.swapaxes(m, -1, -2))


def hermitian_part(m):
    """Re(X) = (X + X*)/2."""
    return 0.5 * (m + adjoint(m))


def opnorm(m):
    """Spectral norm; zero for empty matrices."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def spectral_radius(t):
    t = as_matrix(t, "T", square=True)
    if t.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(t))))


def psd_sqrt(m, tol=1e-10):
    """Hermitian PSD square root of a Hermitian PSD matrix.

    Eigenvalues in ``[-tol, 0)`` are clamped to zero.
    """
    m = as_matrix(m, "M", square=True)
    if m.size == 0:
        return m.copy()
    scale = opnorm(m)
    if opnorm(m - adjoint(m)) > tol * max(scale, 1.0):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(hermitian_part(m))
    if w[0] < -tol:
        raise NotPSD(f"smallest eigenvalue {w[0]:.3e} < -{tol:.1e}")
    w = np.sqrt(np.clip(w, 0.0, None))
    r = (v * w) @ adjoint(v)
    return hermitian_part(r)


def defect_rank_tol(n):
    """Default rank threshold for defect spaces of an n x n contraction."""
    return 1e-9 * max(n, 1)


@dataclass(frozen=True)
class DefectData:
    """Defect operator and an orthonormal basis of the defect space of P.

    ``defect_op`` is rebuilt from the retained eigenpairs only, so directions
    whose eigenvalue of I - P*P falls below ``rank_tol`` are exactly zero.
    """

    source: np.ndarray
    defect_op: np.ndarray
    basis: np.ndarray
    eigenvalues: np.ndarray
    rank: int
    rank_tol: float

    @property
    def dim(self):
        return self.basis.shape[0]

    @property
    def projection(self):
        return self.basis @ adjoint(self.basis)

    def inv_sqrt_eigenvalues(self):
        return 1.0 / np.sqrt(self.eigenvalues)


def defect_from_gram(gram, rank_tol, source=None):
    """Defect data from a precomputed Gram defect I - P*P."""
    n = gram.shape[0]
    w, v = np.linalg.eigh(hermitian_part(gram))
    keep = w > rank_tol
    lam = w[keep]
    q = v[:, keep]
    d = (q * np.sqrt(lam)) @ adjoint(q) if lam.size else np.zeros((n, n), complex)
    return DefectData(
        source=source,
        defect_op=hermitian_part(d),
        basis=q,
        eigenvalues=lam,
        rank=int(lam.size),
        rank_tol=float(rank_tol),
    )


def defect(p, rank_tol=None):
    """Defect data of the contraction ``p``: D_P = (I - P*P)^(1/2).

    The rank is the number of eigenvalues of I - P*P exceeding ``rank_tol``
    (default ``1e-9 * n``).  Raises ``NotContraction`` if ``||P|| > 1 + rank_tol``.
    """
    p = as_matrix(p, "P")
    n = p.shape[1]
    if rank_tol is None:
        rank_tol = defect_rank_tol(n)
    if opnorm(p) > 1.0 + rank_tol:
        raise NotContraction(f"||P|| = {opnorm(p):.12g} exceeds 1")
    return defect_from_gram(np.eye(n) - adjoint(p) @ p, rank_tol, source=p)


def restrict_to_defect(m, left, right):
    """Coordinates of ``m`` between two defect spaces: left.basis* M right.basis."""
    m = as_matrix(m, "M")
    if m.shape != (left.basis.shape[0], right.basis.shape[0]):
        raise ShapeMismatch(
            f"M has shape {m.shape}, expected "
            f"{(left.basis.shape[0], right.basis.shape[0])}"
        )
    return adjoint(left.basis) @ m @ right.basis


def lambda_max_real_part(x, thetas):
    """Largest eigenvalue of Re(e^{i theta} X) for every theta in ``thetas``."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    if x.size == 0:
        return np.zeros(thetas.shape)
    rot = np.exp(1j * thetas)[:, None, None] * x[None, :, :]
    return np.linalg.eigvalsh(hermitian_part(rot))[:, -1]


def _golden_max(f, a, b, width):
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > width:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return max(fc, fd)


def numerical_radius(t, tol=1e-10, grid=720, refine=3):
    """Numerical radius w(T) = max_theta lambda_max(Re(e^{i theta} T)).

    A uniform grid of ``grid`` angles locates candidate maxima; the best
    ``refine`` grid points are polished by golden-section search down to an
    angular width of ``tol``.
    """
    t = as_matrix(t, "T", square=True)
    if t.size == 0:
        return 0.0
    grid = max(int(grid), 720)
    thetas = 2.0 * np.pi * np.arange(grid) / grid
    vals = lambda_max_real_part(t, thetas)
    best = float(vals.max())
    step = 2.0 * np.pi / grid

    def f(theta):
        return float(lambda_max_real_part(t, theta)[0])

    for k in np.argsort(vals)[::-1][:refine]:
        th = thetas[k]
        best = max(best, _golden_max(f, th - step, th + step, tol))
    return best


def principal_sqrt(m, tol=1e-10):
    """Principal square root by the Schur method.

    The triangular factor is filled in by the Bjorck-Hammarling recurrence.
    Raises ``SqrtFailed`` when an eigenvalue lies on the negative real axis,
    when a zero eigenvalue carries a nontrivial Jordan block, or when the
    result fails the check R^2 = M.
    """
    m = as_matrix(m, "M", square=True)
    n = m.shape[0]
    if n == 0:
        return m.copy()
    scale = max(opnorm(m), 1.0)
    tri, z = scipy.linalg.schur(m, output="complex")
    diag = np.diag(tri)
    for lam in diag:
        if lam.real < -tol * scale and abs(lam.imag) <= tol * scale:
            raise SqrtFailed(f"eigenvalue {lam:.6g} on the negative real axis")
    r = np.zeros_like(tri)
    for i in range(n):
        r[i, i] = np.sqrt(diag[i])
    for j in range(n):
        for i in range(j - 1, -1, -1):
            s = tri[i, j] - r[i, i + 1 : j] @ r[i + 1 : j, j]
            den = r[i, i] + r[j, j]
            if abs(den) <= tol * np.sqrt(scale):
                if abs(s) > tol * scale:
                    raise SqrtFailed("zero eigenvalue with a nontrivial Jordan block")
                r[i, j] = 0.0
            else:
                r[i, j] = s / den
    root = z @ r @ adjoint(z)
    if opnorm(root @ root - m) > tol * (1.0 + opnorm(m)) * max(n, 1) * 10:
        raise SqrtFailed("principal square root failed verification R^2 = M")
    return root
