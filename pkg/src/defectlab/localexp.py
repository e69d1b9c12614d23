"""Local flows of skew-symmetric generators and their extension to groups.

A local flow ``phi(t)`` is only trusted for ``|t| < epsilon``.  The group is
recovered as ``U_t = phi(t/n)^n`` with ``n`` the smallest integer putting
``t/n`` inside ``(-epsilon', epsilon')``.  Everything is checked against an
independent matrix exponential.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DomainError, RankAmbiguityError, ToleranceError

SKEW_TOL = 1e-14
RANK_THRESHOLD = 1e-8
AMBIGUITY_BAND = (1e-10, 1e-6)


class Boundary(enum.Enum):
    INTERVAL = "interval"
    PERIODIC = "periodic"
    DECAY_WINDOW = "decay-window"


def opnorm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, 2)) if a.size else 0.0


@dataclass(frozen=True)
class Generator:
    """A real skew-symmetric matrix, optionally tagged with the 1-D grid it came from."""

    matrix: np.ndarray
    boundary: Boundary | None = None
    nodes: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"generator must be square, got shape {a.shape}")
        if a.size and np.max(np.abs(a + a.T)) > SKEW_TOL * max(1.0, np.max(np.abs(a))):
            raise ValueError("generator is not skew-symmetric")
        object.__setattr__(self, "matrix", a)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def dense(cls, a) -> "Generator":
        return cls(np.asarray(a, dtype=float))

    @classmethod
    def tridiagonal_1d(cls, n: int, boundary: Boundary | str = Boundary.INTERVAL,
                       length: float = 1.0) -> "Generator":
        """Central-difference d/dx on ``n`` nodes.

        Interval: nodes on [0, length], rows truncated at the ends (Dirichlet).
        Periodic: n nodes on a circle of circumference ``length``.
        DecayWindow: nodes on [-length/2, length/2], truncated like Interval;
        a stand-in for the line when paired with rapidly decaying data.
        """
        boundary = Boundary(boundary)
        if n < 3:
            raise ValueError("need at least 3 nodes")
        if boundary is Boundary.PERIODIC:
            h = length / n
            x = h * np.arange(n)
        else:
            h = length / (n - 1)
            x = np.linspace(0.0, length, n)
            if boundary is Boundary.DECAY_WINDOW:
                x = x - 0.5 * length
        a = (np.eye(n, k=1) - np.eye(n, k=-1)) / (2.0 * h)
        if boundary is Boundary.PERIODIC:
            a[0, -1] = -1.0 / (2.0 * h)
            a[-1, 0] = 1.0 / (2.0 * h)
        return cls(a, boundary, x)


def random_skew(rng: np.random.Generator, n: int) -> Generator:
    a = rng.standard_normal((n, n))
    return Generator(0.5 * (a - a.T))


def rotation_generator() -> Generator:
    return Generator(np.array([[0.0, 1.0], [-1.0, 0.0]]))


def so3_generators() -> tuple[Generator, Generator, Generator]:
    """Infinitesimal rotations about the x, y and z axes."""
    lx = np.array([[0, 0, 0], [0, 0, -1], [0, 1, 0]], dtype=float)
    ly = np.array([[0, 0, 1], [0, 0, 0], [-1, 0, 0]], dtype=float)
    lz = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 0]], dtype=float)
    return Generator(lx), Generator(ly), Generator(lz)


def _taylor_exp(a: np.ndarray) -> np.ndarray:
    # plain power series; callers keep ||a|| below one
    n = a.shape[0]
    out = np.eye(n)
    term = np.eye(n)
    for k in range(1, 60):
        term = term @ a / k
        out = out + term
        if np.max(np.abs(term)) <= 1e-18 * np.max(np.abs(out)):
            break
    return out


@dataclass(frozen=True)
class LocalFlow:
    """``phi(t) = sum (tH)^k / k!`` for ``|t| < epsilon``.

    By default ``epsilon = 1/||H||`` so the series has ratio below one, and
    ``epsilon_prime = epsilon / 2``.
    """

    generator: Generator
    epsilon: float
    epsilon_prime: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.epsilon_prime < self.epsilon:
            raise ValueError("epsilon_prime must lie in (0, epsilon)")

    @classmethod
    def of(cls, generator: Generator, epsilon: float | None = None,
           epsilon_prime: float | None = None) -> "LocalFlow":
        if epsilon is None:
            nrm = opnorm(generator.matrix)
            epsilon = 1.0 / nrm if nrm > 0 else 1.0
        if epsilon_prime is None:
            epsilon_prime = 0.5 * epsilon
        return cls(generator, float(epsilon), float(epsilon_prime))

    @property
    def H(self) -> np.ndarray:
        return self.generator.matrix

    def phi(self, t: float) -> np.ndarray:
        if not abs(t) < self.epsilon:
            raise DomainError(f"local flow used at |t| = {abs(t):g} >= epsilon = {self.epsilon:g}")
        if t == 0:
            return np.eye(self.generator.dim)
        return _taylor_exp(t * self.H)

    def apply(self, t: float, v) -> np.ndarray:
        return self.phi(t) @ np.asarray(v)

    def steps_for(self, t: float) -> int:
        """Smallest n with |t/n| < epsilon_prime."""
        return math.floor(abs(t) / self.epsilon_prime) + 1


def exponentiate_local(flow: LocalFlow, t: float, tol: float = 1e-10, *, n: int | None = None,
                       check: bool = True) -> np.ndarray:
    """``U_t = phi(t/n)^n``.

    With ``check`` the result is compared with ``scipy.linalg.expm(t H)`` and
    with orthogonality; :class:`ToleranceError` lists both residuals if
    either exceeds ``tol``.
    """
    dim = flow.generator.dim
    if t == 0:
        return np.eye(dim)
    n_min = flow.steps_for(t)
    if n is None:
        n = n_min
    elif n < n_min:
        raise DomainError(f"n={n} leaves t/n outside the local range; need n >= {n_min}")
    u = np.linalg.matrix_power(flow.phi(t / n), n)
    if check:
        res = {"orthogonality": opnorm(u.T @ u - np.eye(dim)),
               "expm": opnorm(u - scipy.linalg.expm(t * flow.H))}
        if max(res.values()) > tol:
            raise ToleranceError(f"U_t residuals above {tol:g}: {res}", residuals=res)
    return u


def verify_group_law(flow: LocalFlow, s: float, t: float) -> float:
    """||U_{s+t} - U_s U_t||."""
    us = exponentiate_local(flow, s, check=False)
    ut = exponentiate_local(flow, t, check=False)
    return opnorm(exponentiate_local(flow, s + t, check=False) - us @ ut)


def subdivision_change(flow: LocalFlow, t: float) -> float:
    """How much U_t moves when the number of steps is doubled."""
    n = flow.steps_for(t)
    return opnorm(exponentiate_local(flow, t, n=n, check=False)
                  - exponentiate_local(flow, t, n=2 * n, check=False))


@dataclass(frozen=True)
class NestedDomains:
    """Spectral cutoffs: D_eps spans eigenvectors of iH with |eigenvalue| < 1/eps."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def of(cls, generator: Generator) -> "NestedDomains":
        mu, vecs = np.linalg.eigh(1j * generator.matrix)
        return cls(mu, vecs)

    def basis(self, eps: float) -> np.ndarray:
        if not eps > 0:
            raise ValueError("eps must be positive")
        return self.eigenvectors[:, np.abs(self.eigenvalues) < 1.0 / eps]

    def dimension(self, eps: float) -> int:
        return self.basis(eps).shape[1]

    def projector(self, eps: float) -> np.ndarray:
        b = self.basis(eps)
        return b @ b.conj().T


def verify_isometry(flow: LocalFlow, domains: NestedDomains, samples: int = 100,
                    rng: np.random.Generator | None = None,
                    eps_values: Sequence[float] | None = None) -> float:
    """max | ||phi(t) v|| - ||v|| | for random v in D_eps and random |t| < eps."""
    rng = rng or np.random.default_rng(0)
    if eps_values is None:
        eps_values = [flow.epsilon * f for f in (0.25, 0.5, 0.9)]
    worst = 0.0
    for eps in eps_values:
        b = domains.basis(eps)
        if b.shape[1] == 0:
            continue
        t_max = min(eps, flow.epsilon)
        for _ in range(samples):
            c = rng.standard_normal(b.shape[1]) + 1j * rng.standard_normal(b.shape[1])
            v = b @ c
            t = rng.uniform(-t_max, t_max)
            worst = max(worst, abs(np.linalg.norm(flow.apply(t, v)) - np.linalg.norm(v)))
    return worst


# ---------------------------------------------------------------------------
# deficiency indices of discretised d/dx


@dataclass(frozen=True)
class DefectIndices:
    """``n_plus`` is the codimension of (H + I)D, i.e. the number of independent
    f with <(H + I)v, f> = 0 for all v in D; ``n_minus`` likewise for H - I.
    Witnesses span those complements and are sampled on ``x``."""

    n_plus: int
    n_minus: int
    witness_plus: np.ndarray
    witness_minus: np.ndarray
    x: np.ndarray
    sigma_plus: np.ndarray = field(repr=False)
    sigma_minus: np.ndarray = field(repr=False)

    @property
    def indices(self) -> tuple[int, int]:
        return self.n_plus, self.n_minus


def _codimension(a: np.ndarray):
    u, sigma, _ = np.linalg.svd(a, full_matrices=True)
    top = sigma[0] if sigma.size else 0.0
    rel = sigma / top if top > 0 else np.zeros_like(sigma)
    lo, hi = AMBIGUITY_BAND
    bad = (rel > lo) & (rel < hi)
    if np.any(bad):
        raise RankAmbiguityError(
            f"singular values {rel[bad]} (relative) fall in the ambiguity band {AMBIGUITY_BAND}; "
            "refine the grid")
    rank = int(np.sum(rel >= RANK_THRESHOLD))
    codim = a.shape[0] - rank
    return codim, u[:, rank:], rel


def _interval_operator(n: int, m: int):
    """Box-scheme d/dx from nodes to cell midpoints, domain vanishing on m end nodes.

    Returns (D, A, x_cells) with D the derivative and A the averaging map,
    restricted to the free nodes and to the cells they can reach.
    """
    h = 1.0 / (n - 1)
    # cell c spans nodes c and c + 1
    D = (np.eye(n - 1, n, k=1) - np.eye(n - 1, n)) / h
    A = 0.5 * (np.eye(n - 1, n, k=1) + np.eye(n - 1, n))
    free = slice(m, n - m)
    cells = np.arange(m - 1, n - m)
    return D[cells, free], A[cells, free], (cells + 0.5) * h


def defect_indices_1d(boundary: Boundary | str, n: int, m_margin: int = 2) -> DefectIndices:
    """Codimensions of (H + I)D and (H - I)D for a discretised d/dx on (0, 1).

    Interval: the domain is node vectors vanishing on the first and last
    ``m_margin`` nodes; d/dx and the identity act through the box scheme
    (difference and average onto cell midpoints), which has no spurious
    checkerboard mode.  Periodic: central differences on the full circle.
    """
    boundary = Boundary(boundary)
    if n < 50:
        raise DomainError("defect probe needs n >= 50")
    if m_margin < 2:
        raise DomainError("m_margin must be at least 2")
    if boundary is Boundary.INTERVAL:
        D, A, x = _interval_operator(n, m_margin)
    elif boundary is Boundary.PERIODIC:
        D = Generator.tridiagonal_1d(n, Boundary.PERIODIC).matrix
        A = np.eye(n)
        x = np.arange(n) / n
    else:
        raise DomainError(f"defect probe supports interval and periodic boundaries, not {boundary.value}")
    n_plus, w_plus, s_plus = _codimension(D + A)
    n_minus, w_minus, s_minus = _codimension(D - A)
    return DefectIndices(n_plus, n_minus, _orient(w_plus), _orient(w_minus), x, s_plus, s_minus)


def _orient(w: np.ndarray) -> np.ndarray:
    # single witness: flatten and fix the sign so the largest entry is positive
    if w.shape[1] != 1:
        return w
    v = w[:, 0]
    return v if v[np.argmax(np.abs(v))] >= 0 else -v


def cosine_similarity(a, b) -> float:
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    return float(abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b)))


# ---------------------------------------------------------------------------
# commuting criteria


def _check_pair(h1: Generator, h2: Generator):
    if h1.dim != h2.dim:
        raise DomainError(f"generators have different dimensions {h1.dim} and {h2.dim}")


def resolvent_commutation(h1: Generator, h2: Generator, lambda1: complex, lambda2: complex) -> float:
    """||[(l1 - H1)^-1, (l2 - H2)^-1]|| for l1, l2 off the imaginary axis."""
    _check_pair(h1, h2)
    for name, lam in (("lambda1", lambda1), ("lambda2", lambda2)):
        if complex(lam).real == 0:
            raise DomainError(f"{name} = {lam} is purely imaginary; the resolvent of a skew "
                              "operator is only guaranteed off iR")
    eye = np.eye(h1.dim)
    r1 = np.linalg.solve(lambda1 * eye - h1.matrix, eye)
    r2 = np.linalg.solve(lambda2 * eye - h2.matrix, eye)
    return opnorm(r1 @ r2 - r2 @ r1)


def generator_commutator(h1: Generator, h2: Generator) -> float:
    _check_pair(h1, h2)
    a, b = h1.matrix, h2.matrix
    return opnorm(a @ b - b @ a)


def group_commutation(h1: Generator, h2: Generator, s: float, t: float) -> float:
    """||U1(s) U2(t) - U2(t) U1(s)|| with both groups built from local flows."""
    _check_pair(h1, h2)
    u1 = exponentiate_local(LocalFlow.of(h1), s)
    u2 = exponentiate_local(LocalFlow.of(h2), t)
    return opnorm(u1 @ u2 - u2 @ u1)


def nelson_sum_of_squares(generators: Sequence[Generator], dim: int | None = None) -> np.ndarray:
    """L = sum H_j^2, checked symmetric and negative semidefinite."""
    if not generators:
        if dim is None:
            raise ValueError("an empty generator list needs an explicit dim")
        return np.zeros((dim, dim))
    dims = {g.dim for g in generators}
    if len(dims) != 1 or (dim is not None and dims != {dim}):
        raise DomainError(f"generators have inconsistent dimensions {sorted(dims)}")
    L = sum(g.matrix @ g.matrix for g in generators)
    asym = opnorm(L - L.T)
    top = float(np.linalg.eigvalsh(0.5 * (L + L.T)).max())
    if asym > 1e-12 or top > 1e-12 * max(1.0, opnorm(L)):
        raise ToleranceError("sum of squares is not symmetric negative semidefinite",
                             residuals={"asymmetry": asym, "max_eigenvalue": top})
    return L
