"""Certification of vector configurations in C^2.

A configuration is an ordered tuple of n vectors in C^m (here m=2, n=6).
The certification pipeline decides three geometric conditions on the
associated point set in R^{2m}:

* the origin lies in the convex hull of all vectors ("Siegel"),
* no subset of exactly 2m vectors contains the origin in its hull
  ("weak hyperbolicity"),
* which single vectors cannot be removed without losing the first
  condition (the "indispensable" indices).

All hull tests are decided exactly in rational arithmetic: every finite
float is a rational number, so barycentric systems are solved with
`fractions.Fraction` and the verdict carries no tolerance.  A float
fallback (linear-programming feasibility with tolerance `TAU_HULL`) is
available for callers that explicitly opt out of the exact path.
"""

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

TAU_HULL = 1e-9


class NotLVMError(Exception):
    """Raised when a configuration fails Siegel or weak hyperbolicity."""

    def __init__(self, failed_condition):
        self.failed_condition = failed_condition
        super().__init__("configuration is not admissible: %s fails" % failed_condition)


@dataclass(frozen=True)
class Configuration:
    m: int
    vectors: tuple

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("ambient dimension m must be >= 1")
        vecs = tuple(tuple(complex(c) for c in v) for v in self.vectors)
        object.__setattr__(self, "vectors", vecs)
        if len(vecs) < 2 * self.m + 1:
            raise ValueError("need at least 2m+1 vectors")
        for v in vecs:
            if len(v) != self.m:
                raise ValueError("every vector must have m coordinates")
            for c in v:
                if not np.isfinite(c.real) or not np.isfinite(c.imag):
                    raise ValueError("vector coordinates must be finite")

    @property
    def n(self):
        return len(self.vectors)


@dataclass(frozen=True)
class ConfigReport:
    is_siegel: bool
    is_weakly_hyperbolic: bool
    indispensable: frozenset
    type_triple: tuple or None


def real_points(config):
    """Return the configuration as an (n, 2m) array of reals."""
    out = np.empty((config.n, 2 * config.m))
    for i, v in enumerate(config.vectors):
        for j, c in enumerate(v):
            out[i, 2 * j] = c.real
            out[i, 2 * j + 1] = c.imag
    return out


def _solve_exact(matrix, rhs):
    """Gaussian elimination over Fraction.

    Returns the unique solution of ``matrix @ t = rhs`` if the matrix has
    full column rank and the system is consistent, otherwise None.  The
    caller enumerates subsets, so uniqueness (affine independence) is all
    we need: by Caratheodory some affinely independent subset witnesses
    hull membership whenever any convex combination does.
    """
    rows = len(matrix)
    cols = len(matrix[0])
    aug = [list(matrix[i]) + [rhs[i]] for i in range(rows)]
    pivot_row = 0
    pivot_cols = []
    for col in range(cols):
        pr = None
        for r in range(pivot_row, rows):
            if aug[r][col] != 0:
                pr = r
                break
        if pr is None:
            continue
        aug[pivot_row], aug[pr] = aug[pr], aug[pivot_row]
        pv = aug[pivot_row][col]
        aug[pivot_row] = [x / pv for x in aug[pivot_row]]
        for r in range(rows):
            if r != pivot_row and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[pivot_row])]
        pivot_cols.append(col)
        pivot_row += 1
        if pivot_row == rows:
            break
    if len(pivot_cols) < cols:
        return None  # rank-deficient subset: skip, a smaller subset covers it
    # consistency: remaining rows must be zero
    for r in range(pivot_row, rows):
        if aug[r][cols] != 0:
            return None
    sol = [Fraction(0)] * cols
    for i, col in enumerate(pivot_cols):
        sol[col] = aug[i][cols]
    return sol


def _in_hull_exact(points, target):
    pts = [[Fraction(x) for x in p] for p in points]
    tgt = [Fraction(x) for x in target]
    dim = len(tgt)
    n = len(pts)
    max_size = min(n, dim + 1)
    for size in range(1, max_size + 1):
        for subset in itertools.combinations(range(n), size):
            matrix = [[pts[i][d] for i in subset] for d in range(dim)]
            matrix.append([Fraction(1)] * size)
            rhs = tgt + [Fraction(1)]
            sol = _solve_exact(matrix, rhs)
            if sol is not None and all(t >= 0 for t in sol):
                return True
    return False


def _in_hull_float(points, target, tau):
    from scipy.optimize import linprog

    pts = np.asarray(points, dtype=float)
    tgt = np.asarray(target, dtype=float)
    n, dim = pts.shape
    a_eq = np.vstack([pts.T, np.ones(n)])
    b_eq = np.concatenate([tgt, [1.0]])
    res = linprog(np.zeros(n), A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * n,
                  method="highs")
    if not res.success:
        return False
    weights = res.x
    residual = np.max(np.abs(a_eq @ weights - b_eq))
    return residual <= tau and np.min(weights) >= -tau


def in_convex_hull(points, target, tau=TAU_HULL, exact=True):
    """Decide whether target is a convex combination of the given points.

    With ``exact=True`` (default) the decision is made in rational
    arithmetic over the binary values of the inputs and is tolerance-free.
    With ``exact=False`` a linear feasibility problem is solved instead and
    accepted up to absolute tolerance ``tau``.
    """
    points = [tuple(float(x) for x in p) for p in points]
    target = tuple(float(x) for x in target)
    if not points:
        raise ValueError("point list must be non-empty")
    dim = len(target)
    for p in points:
        if len(p) != dim:
            raise ValueError("dimension mismatch between points and target")
    if exact:
        return _in_hull_exact(points, target)
    return _in_hull_float(points, target, tau)


def check_siegel(config):
    """True iff the origin lies in the hull of all configuration vectors."""
    pts = real_points(config)
    return in_convex_hull(pts, np.zeros(2 * config.m))


def check_weak_hyperbolicity(config):
    """True iff no subset of exactly 2m vectors captures the origin."""
    pts = real_points(config)
    origin = np.zeros(2 * config.m)
    for subset in itertools.combinations(range(config.n), 2 * config.m):
        if in_convex_hull(pts[list(subset)], origin):
            return False
    return True


def indispensable_points(config):
    """Indices whose removal breaks the Siegel condition."""
    if not check_siegel(config):
        raise ValueError("indispensable_points requires a Siegel configuration")
    pts = real_points(config)
    origin = np.zeros(2 * config.m)
    out = set()
    for j in range(config.n):
        rest = np.delete(pts, j, axis=0)
        if not in_convex_hull(rest, origin):
            out.add(j + 1)  # 1-based, matching the Lambda numbering
    return out


def classify_type(config):
    """Return the triple (m, n, k) or raise NotLVMError."""
    if not check_siegel(config):
        raise NotLVMError("Siegel")
    if not check_weak_hyperbolicity(config):
        raise NotLVMError("weak hyperbolicity")
    k = len(indispensable_points(config))
    return (config.m, config.n, k)


def config_report(config):
    siegel = check_siegel(config)
    hyperbolic = check_weak_hyperbolicity(config)
    indispensable = frozenset()
    triple = None
    if siegel:
        indispensable = frozenset(indispensable_points(config))
        if hyperbolic:
            triple = (config.m, config.n, len(indispensable))
    return ConfigReport(siegel, hyperbolic, indispensable, triple)


def normalize_affine(config):
    """Apply the unique affine map sending the first m+1 vectors to
    e_1, ..., e_m, 0 and return the transformed configuration."""
    m = config.m
    base = np.array([config.vectors[i] for i in range(m + 1)], dtype=complex)
    targets = np.zeros((m + 1, m), dtype=complex)
    for i in range(m):
        targets[i, i] = 1.0
    # solve for M (m x m) and b: M @ v_i + b = target_i
    lhs = np.hstack([base, np.ones((m + 1, 1))])  # rows (v_i, 1)
    if abs(np.linalg.det(lhs @ lhs.conj().T)) == 0:
        raise ValueError("first m+1 vectors are affinely degenerate")
    coeffs = np.linalg.solve(lhs, targets)  # (m+1, m): stacked [M^T; b^T]
    mat_t = coeffs[:m, :]
    b = coeffs[m, :]
    new_vecs = []
    for v in config.vectors:
        w = np.asarray(v, dtype=complex) @ mat_t + b
        new_vecs.append(tuple(w))
    return Configuration(m, tuple(new_vecs))
