"""
Chart-level Riemannian and distribution geometry
Metrics, adapted frames, projectors, brackets and potential gradients
"""
import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np

from config import Config
from errors import FrameDegenerate, JacobianUnavailable, MetricSingular

VectorField = Callable[[np.ndarray], np.ndarray]
ScalarField = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class ChartBounds:
    """Box of valid chart coordinates; periodic coordinates are angles on S^1"""

    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    periodic: Tuple[bool, ...]

    @classmethod
    def unbounded(cls, n, periodic=None):
        periodic = tuple(bool(p) for p in (periodic or [False] * n))
        return cls(tuple([-math.inf] * n), tuple([math.inf] * n), periodic)

    def contains(self, q):
        q = np.asarray(q, dtype=float)
        return bool(np.all(q >= np.asarray(self.lower)) and np.all(q <= np.asarray(self.upper)))

    def wrap(self, q):
        """Map periodic coordinates into (-pi, pi]; used only when writing output"""
        q = np.array(q, dtype=float)
        for i, periodic in enumerate(self.periodic):
            if periodic:
                wrapped = math.remainder(q[i], 2.0 * math.pi)
                q[i] = math.pi if wrapped == -math.pi else wrapped
        return q


@dataclass(frozen=True)
class SystemDefinition:
    """
    Chart-level description of a nonholonomic mechanical system (Q, g, V, D).

    The distribution D is given by a frame X_1..X_m; every other object
    (complement, projectors, structure functions) is derived from it.
    """

    n: int
    m: int
    metric: Callable[[np.ndarray], np.ndarray]
    potential: ScalarField
    frame: Tuple[VectorField, ...]
    potential_gradient: Optional[VectorField] = None
    frame_jacobians: Optional[Tuple[Callable[[np.ndarray], np.ndarray], ...]] = None
    metric_derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None
    chart_bounds: Optional[ChartBounds] = None
    tag: str = 'custom'
    # None: decided by sampling dV, see is_constant_potential
    constant_potential: Optional[bool] = None

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.m > self.n:
            raise ValueError(f"Need 1 <= m <= n, got n={self.n}, m={self.m}")
        if len(self.frame) != self.m:
            raise ValueError(f"Frame has {len(self.frame)} fields, expected m={self.m}")
        if self.frame_jacobians is not None and len(self.frame_jacobians) != self.m:
            raise ValueError("frame_jacobians must supply one Jacobian per frame field")
        if self.chart_bounds is not None and len(self.chart_bounds.periodic) != self.n:
            raise ValueError("chart_bounds must flag every coordinate")


class FrameData(NamedTuple):
    """Adapted frame {X_a, Y_alpha} at a point with Gram data and structure functions"""

    q: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    gram: np.ndarray
    gram_inv: np.ndarray
    structure_D: np.ndarray
    structure_perp: np.ndarray


class LocalGeometry(NamedTuple):
    """Everything the adapted Hamiltonian equations need at one point"""

    G: np.ndarray
    X: np.ndarray
    gram: np.ndarray
    gram_inv: np.ndarray
    dgram_inv: np.ndarray   # (n, m, m): d g^{ab} / d q^k
    C: np.ndarray           # (m, m, m): C_ab^c
    V: float
    dV: np.ndarray


# Derivatives ==========================================================================

def _fd_steps(q, step=None):
    base = Config.FD_STEP if step is None else step
    return base * (1.0 + np.abs(q))


def _check_stencil(sys, q, offsets):
    bounds = sys.chart_bounds
    if bounds is None:
        return
    lower = np.asarray(bounds.lower)
    upper = np.asarray(bounds.upper)
    if np.any(q - offsets < lower) or np.any(q + offsets > upper):
        raise JacobianUnavailable(
            f"Finite-difference stencil around q={q.tolist()} leaves the chart bounds"
        )


def finite_difference(sys, func, q, step=None):
    """
    Fourth-order central differences of ``func`` at q.

    Returns an array of shape func(q).shape + (n,), the last axis indexing
    the coordinate differentiated against.
    """
    q = np.asarray(q, dtype=float)
    h = _fd_steps(q, step)
    _check_stencil(sys, q, 2.0 * h)
    columns = []
    for j in range(q.shape[0]):
        e = np.zeros_like(q)
        e[j] = h[j]
        f_p1 = np.asarray(func(q + e), dtype=float)
        f_m1 = np.asarray(func(q - e), dtype=float)
        f_p2 = np.asarray(func(q + 2 * e), dtype=float)
        f_m2 = np.asarray(func(q - 2 * e), dtype=float)
        columns.append((-f_p2 + 8.0 * f_p1 - 8.0 * f_m1 + f_m2) / (12.0 * h[j]))
    return np.stack(columns, axis=-1)


# Pointwise fields =====================================================================

def metric_at(sys: SystemDefinition, q) -> np.ndarray:
    """G(q), checked symmetric positive definite"""
    q = np.asarray(q, dtype=float)
    G = np.asarray(sys.metric(q), dtype=float)
    if G.shape != (sys.n, sys.n):
        raise MetricSingular(f"Metric has shape {G.shape}, expected {(sys.n, sys.n)}")
    if not np.allclose(G, G.T, rtol=1e-12, atol=1e-14):
        raise MetricSingular(f"Metric is not symmetric at q={q.tolist()}")
    try:
        np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        raise MetricSingular(f"Metric is not positive definite at q={q.tolist()}")
    return G


def frame_at(sys: SystemDefinition, q) -> np.ndarray:
    """n x m matrix whose columns are X_a(q)"""
    q = np.asarray(q, dtype=float)
    return np.column_stack([np.asarray(X_a(q), dtype=float) for X_a in sys.frame])


def frame_jacobians_at(sys: SystemDefinition, q) -> np.ndarray:
    """(m, n, n) array dX[a, i, j] = d X_a^i / d q^j"""
    q = np.asarray(q, dtype=float)
    if sys.frame_jacobians is not None:
        return np.stack([np.asarray(J(q), dtype=float) for J in sys.frame_jacobians])
    fd = finite_difference(sys, lambda x: frame_at(sys, x), q)  # (n, m, n)
    return np.moveaxis(fd, 1, 0)


def metric_derivative_at(sys: SystemDefinition, q) -> np.ndarray:
    """(n, n, n) array dG[k, i, j] = d G_ij / d q^k"""
    q = np.asarray(q, dtype=float)
    if sys.metric_derivative is not None:
        return np.asarray(sys.metric_derivative(q), dtype=float)
    fd = finite_difference(sys, lambda x: np.asarray(sys.metric(x), dtype=float), q)
    return np.moveaxis(fd, -1, 0)


def potential_differential_at(sys: SystemDefinition, q) -> np.ndarray:
    """dV(q) as an n-covector"""
    q = np.asarray(q, dtype=float)
    if sys.potential_gradient is not None:
        return np.asarray(sys.potential_gradient(q), dtype=float)
    return finite_difference(sys, lambda x: np.asarray(sys.potential(x), dtype=float), q)


def check_frame_jacobians(sys: SystemDefinition, q, step=1e-6) -> float:
    """Max componentwise gap between analytic frame Jacobians and central differences"""
    if sys.frame_jacobians is None:
        return 0.0
    q = np.asarray(q, dtype=float)
    analytic = frame_jacobians_at(sys, q)
    numeric = np.empty_like(analytic)
    for j in range(sys.n):
        e = np.zeros(sys.n)
        e[j] = step
        numeric[:, :, j] = (frame_at(sys, q + e) - frame_at(sys, q - e)).T / (2.0 * step)
    return float(np.max(np.abs(analytic - numeric)))


# Frame algebra ========================================================================

def _checked_inverse(gram, q, kappa_max=None):
    kappa_max = Config.KAPPA_MAX if kappa_max is None else kappa_max
    eigenvalues = np.linalg.eigvalsh(gram)
    if eigenvalues[0] <= 0.0 or eigenvalues[-1] > kappa_max * eigenvalues[0]:
        raise FrameDegenerate(
            f"Frame Gram matrix is degenerate at q={np.asarray(q).tolist()} "
            f"(eigenvalues {eigenvalues.tolist()})"
        )
    return np.linalg.inv(gram)


def gram_at(sys: SystemDefinition, q, kappa_max=None):
    """
    Gram matrix of the distribution frame and its inverse

    Args:
        sys: System definition
        q: Chart point
        kappa_max: Condition number bound (default Config.KAPPA_MAX)

    Returns:
        (g_ab, g^{ab}) as m x m arrays

    Raises:
        FrameDegenerate: If the Gram condition number exceeds kappa_max
    """
    G = metric_at(sys, q)
    X = frame_at(sys, q)
    gram = X.T @ G @ X
    gram = 0.5 * (gram + gram.T)
    return gram, _checked_inverse(gram, q, kappa_max)


def projector_at(sys: SystemDefinition, q) -> np.ndarray:
    """G-orthogonal projector P = X (X^T G X)^{-1} X^T G onto D_q"""
    G = metric_at(sys, q)
    X = frame_at(sys, q)
    _, gram_inv = gram_at(sys, q)
    return X @ gram_inv @ X.T @ G


def complement_frame(sys: SystemDefinition, q) -> np.ndarray:
    """
    G-orthonormal frame of the orthogonal complement of D_q

    Built by G-orthonormalizing (I - P) e_i over the standard basis and
    discarding near-zero results.

    Returns:
        n x (n - m) matrix Y
    """
    n, m = sys.n, sys.m
    if m == n:
        return np.zeros((n, 0))
    G = metric_at(sys, q)
    P = projector_at(sys, q)
    threshold = Config.COMPLEMENT_EPS * np.linalg.norm(G, 2)
    residual = np.eye(n) - P
    columns = []
    for i in range(n):
        y = residual[:, i].copy()
        # two Gram-Schmidt sweeps keep Y^T G Y at the identity to round-off
        for _ in range(2):
            for c in columns:
                y -= (c @ G @ y) * c
        norm = math.sqrt(max(float(y @ G @ y), 0.0))
        if norm <= threshold:
            continue
        columns.append(y / norm)
        if len(columns) == n - m:
            break
    if len(columns) < n - m:
        raise FrameDegenerate(
            f"Complement of D has dimension {len(columns)} < {n - m} at q={np.asarray(q).tolist()}"
        )
    return np.column_stack(columns)


def _brackets(X, dX):
    """(m, m, n) array of Lie brackets [X_a, X_b] = (dX_b) X_a - (dX_a) X_b"""
    return np.einsum('bij,ja->abi', dX, X) - np.einsum('aij,jb->abi', dX, X)


def structure_functions_at(sys: SystemDefinition, q):
    """
    Structure functions of the adapted frame

    Expresses every bracket [X_a, X_b] in the basis {X_a(q), Y_alpha(q)}.

    Returns:
        (C_ab^c as (m, m, m), C_ab^alpha as (m, m, n - m))

    Raises:
        FrameDegenerate: If the frame is degenerate at q
        JacobianUnavailable: If differencing leaves the chart
    """
    q = np.asarray(q, dtype=float)
    X = frame_at(sys, q)
    gram_at(sys, q)
    Y = complement_frame(sys, q)
    dX = frame_jacobians_at(sys, q)
    basis = np.hstack([X, Y])
    m = sys.m
    coefficients = np.zeros((m, m, sys.n))
    for a in range(m):
        for b in range(a + 1, m):
            bracket = dX[b] @ X[:, a] - dX[a] @ X[:, b]
            c_ab = np.linalg.solve(basis, bracket)
            coefficients[a, b] = c_ab
            coefficients[b, a] = -c_ab
    return coefficients[:, :, :m], coefficients[:, :, m:]


def frame_data(sys: SystemDefinition, q) -> FrameData:
    """Bundle the adapted frame at q"""
    q = np.asarray(q, dtype=float)
    gram, gram_inv = gram_at(sys, q)
    structure_D, structure_perp = structure_functions_at(sys, q)
    return FrameData(
        q=q,
        X=frame_at(sys, q),
        Y=complement_frame(sys, q),
        gram=gram,
        gram_inv=gram_inv,
        structure_D=structure_D,
        structure_perp=structure_perp,
    )


def grad_potential(sys: SystemDefinition, q) -> np.ndarray:
    """grad^g V = G^{-1} dV"""
    G = metric_at(sys, q)
    return np.linalg.solve(G, potential_differential_at(sys, q))


def local_geometry(sys: SystemDefinition, q) -> LocalGeometry:
    """
    Evaluate metric, frame, Gram inverse with its derivative and the
    D-components of the structure functions in one pass.

    The D-components use C_ab^c = g^{cd} g(X_d, [X_a, X_b]), which equals the
    basis solve of structure_functions_at because Y is G-orthogonal to D.
    """
    q = np.asarray(q, dtype=float)
    G = metric_at(sys, q)
    X = frame_at(sys, q)
    gram = X.T @ G @ X
    gram = 0.5 * (gram + gram.T)
    gram_inv = _checked_inverse(gram, q)
    dX = frame_jacobians_at(sys, q)
    dG = metric_derivative_at(sys, q)

    A = np.einsum('aik,ij,jb->kab', dX, G, X)
    dgram = A + A.transpose(0, 2, 1) + np.einsum('ia,kij,jb->kab', X, dG, X)
    dgram_inv = -np.einsum('ac,kcd,db->kab', gram_inv, dgram, gram_inv)

    brackets = _brackets(X, dX)
    C = np.einsum('cd,jd,jk,abk->abc', gram_inv, X, G, brackets)

    return LocalGeometry(
        G=G,
        X=X,
        gram=gram,
        gram_inv=gram_inv,
        dgram_inv=dgram_inv,
        C=C,
        V=float(sys.potential(q)),
        dV=potential_differential_at(sys, q),
    )


# Vectors in D =========================================================================

def g_norm(sys: SystemDefinition, q, v) -> float:
    """Riemannian length of v at q"""
    G = metric_at(sys, q)
    v = np.asarray(v, dtype=float)
    return math.sqrt(max(float(v @ G @ v), 0.0))


def frame_coefficients(sys: SystemDefinition, q, v) -> np.ndarray:
    """Coefficients y^a of the G-orthogonal projection of v onto D_q"""
    G = metric_at(sys, q)
    X = frame_at(sys, q)
    _, gram_inv = gram_at(sys, q)
    return gram_inv @ X.T @ G @ np.asarray(v, dtype=float)


def frame_vector(sys: SystemDefinition, q, y) -> np.ndarray:
    """Chart vector y^a X_a(q)"""
    return frame_at(sys, q) @ np.asarray(y, dtype=float)


def kinetic_part(sys: SystemDefinition) -> SystemDefinition:
    """The same (g, D) with the potential switched off"""
    zero = np.zeros(sys.n)
    return replace(
        sys,
        potential=lambda q: 0.0,
        potential_gradient=lambda q: zero,
        tag=f"{sys.tag}-kinetic",
        constant_potential=True,
    )


def is_constant_potential(sys: SystemDefinition, q=None, samples=32, seed=0) -> bool:
    """
    Whether V is constant on the whole chart

    The declared ``constant_potential`` flag wins. Otherwise dV is sampled at q
    and at seeded points of the chart box; unbounded coordinates are sampled
    within a distance 2 of q.
    """
    if sys.constant_potential is not None:
        return sys.constant_potential
    center = np.zeros(sys.n) if q is None else np.asarray(q, dtype=float)
    bounds = sys.chart_bounds or ChartBounds.unbounded(sys.n)
    lower = np.where(np.isfinite(bounds.lower), bounds.lower, center - 2.0)
    upper = np.where(np.isfinite(bounds.upper), bounds.upper, center + 2.0)
    # keep the difference stencil inside bounded boxes
    margin = 0.05 * (upper - lower)
    rng = np.random.default_rng(seed)
    points = [center] + list(rng.uniform(lower + margin, upper - margin, size=(samples, sys.n)))
    for point in points:
        if np.any(np.abs(potential_differential_at(sys, point)) > 1e-12):
            return False
    return True
