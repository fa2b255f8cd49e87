"""Random commuting pairs used by the CLI and the test-suite.

``symmetrized_random`` and ``random_gamma_unitary`` are the two scenario kinds
exposed on the command line.  ``symmetrized_polynomial`` produces non-normal
Gamma-contractions (T2 is a disc-bounded polynomial in T1).
"""

import numpy as np
from scipy.stats import unitary_group

from .gamma import OperatorPair, symmetrize_pair
from .numlin import adjoint, opnorm

KINDS = ("symmetrized_random", "random_gamma_unitary", "symmetrized_polynomial")


def random_unitary(n, rng):
    if n == 1:
        return np.exp(2j * np.pi * rng.uniform()) * np.ones((1, 1))
    return unitary_group.rvs(n, random_state=rng)


def random_disc_points(k, rng, unimodular_prob=0.15):
    """Points of the closed disc; each lands on the circle with ``unimodular_prob``."""
    r = rng.uniform(0.0, 1.0, k)
    r[rng.uniform(size=k) < unimodular_prob] = 1.0
    return r * np.exp(2j * np.pi * rng.uniform(size=k))


def random_matrix(n, m, rng):
    return rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))


def random_contraction(n, rng, norm=None, m=None):
    """Gaussian matrix rescaled to operator norm ``norm`` (default uniform in [0.1, 1))."""
    m = n if m is None else m
    g = random_matrix(n, m, rng)
    if norm is None:
        norm = rng.uniform(0.1, 1.0)
    return g * (norm / opnorm(g))


def symmetrized_random(n, rng):
    q = random_unitary(n, rng)
    d1 = random_disc_points(n, rng)
    d2 = random_disc_points(n, rng)
    t1 = (q * d1) @ adjoint(q)
    t2 = (q * d2) @ adjoint(q)
    return OperatorPair(t1 + t2, t1 @ t2)


def random_gamma_unitary(n, rng):
    q = random_unitary(n, rng)
    u1 = (q * np.exp(2j * np.pi * rng.uniform(size=n))) @ adjoint(q)
    u2 = (q * np.exp(2j * np.pi * rng.uniform(size=n))) @ adjoint(q)
    return OperatorPair(u1 + u2, u1 @ u2)


def symmetrized_polynomial(n, rng):
    t1 = random_contraction(n, rng, norm=rng.uniform(0.2, 0.95))
    a, b = rng.uniform(size=2)
    a, b = a / (a + b), b / (a + b)
    a *= np.exp(2j * np.pi * rng.uniform())
    b *= np.exp(2j * np.pi * rng.uniform())
    # sup over the disc of |a z + b z^2| is at most |a| + |b| = 1 (von Neumann)
    t2 = a * t1 + b * t1 @ t1
    scale = max(1.0, opnorm(t2))
    return symmetrize_pair(t1, t2 / scale, tol=1e-9)


GENERATORS = {
    "symmetrized_random": symmetrized_random,
    "random_gamma_unitary": random_gamma_unitary,
    "symmetrized_polynomial": symmetrized_polynomial,
}


def generate(kind, n, rng):
    if n < 1:
        raise ValueError("dimension must be at least 1")
    try:
        return GENERATORS[kind](n, rng)
    except KeyError:
        raise ValueError(f"unknown generator kind {kind!r}") from None


def gamma_contraction_sweep(count, dim_max, seed, kinds=KINDS):
    """Deterministic list of ``count`` Gamma-contractions of dimensions 1..dim_max."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        kind = kinds[i % len(kinds)]
        n = int(rng.integers(1, dim_max + 1))
        out.append(generate(kind, n, rng))
    return out
