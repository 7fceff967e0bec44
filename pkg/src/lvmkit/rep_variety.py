"""Representation varieties of commuting pairs and the projection from
rank-3 to rank-2 representations.

A rank-2 representation is a commuting pair (A, B) of group elements; the
defining equations of the commuting-pair variety are evaluated by
variety_residual and their Zariski tangent space by tangent_dimension.

A StructureSpec is a commuting triple (A, B, C) with C near the identity;
psi_nonresonant / psi_resonant project it to the commuting pair carried by
the quotient threefold, anchored at principal branches so the projection
is continuous near the canonical triple (A, B, Id).
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .holonomy import holonomy_pair, omega_matrix
from .resonant_group import (
    GroupElement,
    commutation_residual,
    compose,
    element_from_params,
    group_exp,
    group_log,
    inverse,
)

TWO_PI_I = 2j * np.pi
SV_THRESHOLD = 1e-8
MIN_GAP = 10.0
TOL_CASE = 1e-12
REJECTION_RADIUS = 1.0


class NoConvergence(Exception):
    """Newton solve failed; the input is outside the valid neighborhood."""


@dataclass(frozen=True)
class VarietyResidual:
    equations: tuple  # of (name, complex residual)

    @property
    def max_abs(self):
        return max((abs(v) for _, v in self.equations), default=0.0)


@dataclass(frozen=True)
class StructureSpec:
    """Commuting triple (A, B, C); C is the extra holonomy of pi_1(V).

    base_config is required for the non-resonant projection (it supplies
    the anchor tail and the difference matrix); resonant regimes are
    configuration-free.
    """
    generators: tuple
    base_config: object = None
    tol: float = 1e-8

    def __post_init__(self):
        gens = tuple(self.generators)
        if len(gens) != 3:
            raise ValueError("a structure spec has three generators")
        regime = gens[0].regime
        if any(g.regime != regime for g in gens):
            raise ValueError("all generators must share one regime")
        scale = 1 + max(np.max(np.abs(g.params())) for g in gens)
        for i in range(3):
            for j in range(i + 1, 3):
                if commutation_residual(gens[i], gens[j]) > self.tol * scale:
                    raise ValueError(
                        "generators %d and %d do not commute" % (i + 1, j + 1))
        object.__setattr__(self, "generators", gens)

    @property
    def regime(self):
        return self.generators[0].regime


def variety_residual(pair, cls):
    """Residuals of the displayed defining equations at a candidate pair."""
    f, g = pair
    if f.regime != cls or g.regime != cls:
        raise ValueError("pair regime does not match the declared class")
    if cls.tag == "NonResonant":
        return VarietyResidual(())
    if cls.tag == "Single":
        a1, a2, a3, eps = f.data
        b1, b2, b3, delta = g.data
        p, q = cls.p, cls.q
        r = eps * (b3 - b1 ** p * b2 ** q) - delta * (a3 - a1 ** p * a2 ** q)
        return VarietyResidual((("shear-commutation", r),))
    # Double: element (a1, [[a2, e2], [e1, a3]]) against (b1, [[b2, d2], [d1, b3]])
    a1, amat = f.data
    b1, bmat = g.data
    a2, e2, e1, a3 = amat[0, 0], amat[0, 1], amat[1, 0], amat[1, 1]
    b2, d2, d1, b3 = bmat[0, 0], bmat[0, 1], bmat[1, 0], bmat[1, 1]
    p = cls.p
    eqs = (
        ("off-diagonal-balance", e1 * d2 * b1 ** p - d1 * e2 * a1 ** p),
        ("lower-shear", e1 * (b3 - b1 ** p * b2) - d1 * (a3 - a1 ** p * a2)),
        ("upper-shear", e2 * (b2 - b1 ** (-p) * b3) - d2 * (a2 - a1 ** (-p) * a3)),
    )
    return VarietyResidual(eqs)


def _commutator_params(f, g):
    return compose(f, g).params() - compose(g, f).params()


def tangent_dimension(pair, cls, tol=1e-8, h=1e-6):
    """Complex dimension of the Zariski tangent space to the commuting-
    pair variety at the given pair.

    Finite-difference Jacobian of the commutator map with respect to all
    group parameters of both elements (the map is holomorphic, so real
    increments determine the complex derivative), rank by singular-value
    threshold at sigma_max * 1e-8.
    """
    f, g = pair
    n = len(f.params())
    base = _commutator_params(f, g)
    scale = 1 + max(np.max(np.abs(f.params())), np.max(np.abs(g.params())))
    cols = []
    for which in range(2):
        for k in range(n):
            pf, pg = f.params().copy(), g.params().copy()
            (pf if which == 0 else pg)[k] += h
            f2 = element_from_params(cls, pf)
            g2 = element_from_params(cls, pg)
            cols.append((_commutator_params(f2, g2) - base) / h)
    jac = np.column_stack(cols)
    sv = np.linalg.svd(jac, compute_uv=False)
    if sv[0] <= 1e-9 * scale:
        return 2 * n  # Jacobian vanishes: the whole parameter space is tangent
    rel = sv / sv[0]
    rank = int(np.sum(rel > SV_THRESHOLD))
    if rank < len(sv) and rank > 0 and rel[rank] > 0:
        gap = rel[rank - 1] / rel[rank]
    else:
        gap = np.inf
    if gap < MIN_GAP:
        warnings.warn("RankAmbiguous: singular-value gap %.2f below %.0f"
                      % (gap, MIN_GAP))
    return 2 * n - rank


def tangent_gap(pair, cls, h=1e-6):
    """Ratio between the smallest kept and largest dropped singular value
    (inf when the Jacobian vanishes or has full rank)."""
    f, g = pair
    n = len(f.params())
    base = _commutator_params(f, g)
    scale = 1 + max(np.max(np.abs(f.params())), np.max(np.abs(g.params())))
    cols = []
    for which in range(2):
        for k in range(n):
            pf, pg = f.params().copy(), g.params().copy()
            (pf if which == 0 else pg)[k] += h
            cols.append((_commutator_params(element_from_params(cls, pf),
                                            element_from_params(cls, pg)) - base) / h)
    sv = np.linalg.svd(np.column_stack(cols), compute_uv=False)
    if sv[0] <= 1e-9 * scale:
        return np.inf
    rel = sv / sv[0]
    rank = int(np.sum(rel > SV_THRESHOLD))
    if rank == 0 or rank == len(sv) or rel[rank] == 0:
        return np.inf
    return float(rel[rank - 1] / rel[rank])


def _principal_c(gamma):
    return np.log(complex(gamma)) / TWO_PI_I


def _base_pairings(config):
    """(u0, v0) pairings of the anchor tail against the difference matrix."""
    omega = omega_matrix(config)
    inv = np.linalg.inv(omega)
    v = [np.asarray(w, dtype=complex) for w in config.vectors]
    u0 = np.array([ (v[j + 3] - v[0]) @ inv[:, 0] for j in range(3)])
    v0 = np.array([ (v[j + 3] - v[0]) @ inv[:, 1] for j in range(3)])
    return omega, u0, v0


def _nonres_residual(uv, c, alpha, beta):
    u, v = uv[:3], uv[3:]
    return np.array([
        np.exp(TWO_PI_I * u[0] * (1 + c[0])) - alpha[0],
        np.exp(TWO_PI_I * (u[1] + u[0] * c[1])) - alpha[1],
        np.exp(TWO_PI_I * (u[2] + u[0] * c[2])) - alpha[2],
        np.exp(TWO_PI_I * v[0] * (1 + c[0])) - beta[0],
        np.exp(TWO_PI_I * (v[1] + v[0] * c[1])) - beta[1],
        np.exp(TWO_PI_I * (v[2] + v[0] * c[2])) - beta[2],
    ])


def _nonres_jacobian(uv, c):
    u, v = uv[:3], uv[3:]
    jac = np.zeros((6, 6), dtype=complex)
    e = [np.exp(TWO_PI_I * u[0] * (1 + c[0])),
         np.exp(TWO_PI_I * (u[1] + u[0] * c[1])),
         np.exp(TWO_PI_I * (u[2] + u[0] * c[2])),
         np.exp(TWO_PI_I * v[0] * (1 + c[0])),
         np.exp(TWO_PI_I * (v[1] + v[0] * c[1])),
         np.exp(TWO_PI_I * (v[2] + v[0] * c[2]))]
    jac[0, 0] = TWO_PI_I * (1 + c[0]) * e[0]
    jac[1, 0] = TWO_PI_I * c[1] * e[1]
    jac[1, 1] = TWO_PI_I * e[1]
    jac[2, 0] = TWO_PI_I * c[2] * e[2]
    jac[2, 2] = TWO_PI_I * e[2]
    jac[3, 3] = TWO_PI_I * (1 + c[0]) * e[3]
    jac[4, 3] = TWO_PI_I * c[1] * e[4]
    jac[4, 4] = TWO_PI_I * e[4]
    jac[5, 3] = TWO_PI_I * c[2] * e[5]
    jac[5, 5] = TWO_PI_I * e[5]
    return jac


def _damped_newton(residual, jacobian, x0, anchor, scale=1.0,
                   max_iter=50, step_tol=1e-14):
    x = np.array(x0, dtype=complex)
    noise_floor = 1e-13 * (scale + np.max(np.abs(x)))
    if np.max(np.abs(x - anchor)) > REJECTION_RADIUS:
        raise NoConvergence("initial guess outside the branch-anchor "
                            "neighborhood")
    for _ in range(max_iter):
        r = residual(x)
        if np.max(np.abs(r)) <= noise_floor:
            return x
        try:
            step = np.linalg.solve(jacobian(x), r)
        except np.linalg.LinAlgError:
            raise NoConvergence("singular Jacobian in Newton solve")
        t = 1.0
        base_norm = np.linalg.norm(r)
        while t > 1e-6:
            trial = x - t * step
            if np.linalg.norm(residual(trial)) < base_norm:
                break
            t /= 2
        else:
            raise NoConvergence("damping exhausted without descent")
        x = x - t * step
        if np.max(np.abs(x - anchor)) > REJECTION_RADIUS:
            raise NoConvergence("iterate left the branch-anchor neighborhood")
        if t * np.max(np.abs(step)) < step_tol:
            return x
    raise NoConvergence("Newton did not converge in 50 iterations")


def psi_nonresonant(spec):
    """Project a non-resonant commuting triple to a commuting pair and the
    deformed configuration tail.

    Returns ((A_rho, B_rho), (Lambda4, Lambda5, Lambda6), (s1, s2)) where
    (s1, s2) are the translation lengths of the first two deck generators
    on the covering coordinate w1.
    """
    if spec.regime.tag != "NonResonant":
        raise ValueError("psi_nonresonant needs the NonResonant regime")
    if spec.base_config is None:
        raise ValueError("a base configuration anchor is required")
    a, b, cgen = spec.generators
    alpha = np.asarray(a.data, dtype=complex)
    beta = np.asarray(b.data, dtype=complex)
    c = np.array([_principal_c(g) for g in cgen.data])

    omega, u0, v0 = _base_pairings(spec.base_config)
    base = holonomy_pair(spec.base_config)
    alpha0 = np.asarray(base.alpha)
    beta0 = np.asarray(base.beta)

    # closed form with branches anchored at the base configuration
    du = np.log(alpha / alpha0) / TWO_PI_I
    dv = np.log(beta / beta0) / TWO_PI_I
    u = np.empty(3, dtype=complex)
    v = np.empty(3, dtype=complex)
    u[0] = (u0[0] + du[0]) / (1 + c[0])
    v[0] = (v0[0] + dv[0]) / (1 + c[0])
    u[1] = u0[1] + du[1] - u[0] * c[1]
    u[2] = u0[2] + du[2] - u[0] * c[2]
    v[1] = v0[1] + dv[1] - v[0] * c[1]
    v[2] = v0[2] + dv[2] - v[0] * c[2]

    anchor = np.concatenate([u0, v0])
    uv = _damped_newton(lambda x: _nonres_residual(x, c, alpha, beta),
                        lambda x: _nonres_jacobian(x, c),
                        np.concatenate([u, v]), anchor,
                        scale=np.max(np.abs(np.concatenate([alpha, beta]))))
    u, v = uv[:3], uv[3:]

    a_rho = GroupElement(spec.regime, tuple(np.exp(TWO_PI_I * u)))
    b_rho = GroupElement(spec.regime, tuple(np.exp(TWO_PI_I * v)))
    lam1 = np.asarray(spec.base_config.vectors[0], dtype=complex)
    tail = tuple(tuple(lam1 + omega.T @ np.array([u[j], v[j]]))
                 for j in range(3))
    return (a_rho, b_rho), tail, (u[0], v[0])


def _solve_scaling(target, c, anchor):
    """Solve x * exp(c * Log x) = target by damped Newton from x = target."""
    def res(x):
        return np.array([x[0] * np.exp(c * np.log(x[0])) - target])

    def jac(x):
        return np.array([[np.exp(c * np.log(x[0])) * (1 + c)]])

    out = _damped_newton(res, jac, np.array([target], dtype=complex),
                         np.array([anchor], dtype=complex),
                         scale=abs(target))
    return out[0]


def psi_resonant(spec, tol_case=TOL_CASE):
    """Project a resonant commuting triple (A, B, C) to a commuting pair.

    Returns ((A_rho, B_rho), (s1, s2)) with the deck translation lengths
    s1 = Log(delta)/2i pi, s2 = Log(eta)/2i pi.
    """
    regime = spec.regime
    a, b, cgen = spec.generators
    if regime.tag == "Double":
        gamma = cgen.data[0]
        delta = _solve_scaling(a.data[0], _principal_c(gamma), a.data[0])
        eta = _solve_scaling(b.data[0], _principal_c(gamma), b.data[0])
        x = group_log(cgen)
        s1 = np.log(delta) / TWO_PI_I
        s2 = np.log(eta) / TWO_PI_I
        a_rho = compose(inverse(group_exp(x.scaled(s1))), a)
        b_rho = compose(inverse(group_exp(x.scaled(s2))), b)
        return (a_rho, b_rho), (s1, s2)
    if regime.tag != "Single":
        raise ValueError("psi_resonant needs a resonant regime")

    p, q = regime.p, regime.q
    alpha, a1, a4, a3 = a.data
    beta, b1, b4, b3 = b.data
    gamma, c1, c4, c3 = cgen.data
    delta = _solve_scaling(alpha, _principal_c(gamma), alpha)
    eta = _solve_scaling(beta, _principal_c(gamma), beta)
    s1 = np.log(delta) / TWO_PI_I
    s2 = np.log(eta) / TWO_PI_I

    d1 = a1 * np.exp(-s1 * np.log(c1))
    d4 = a4 * np.exp(-s1 * np.log(c4))
    e1 = b1 * np.exp(-s2 * np.log(c1))
    e4 = b4 * np.exp(-s2 * np.log(c4))

    gap = abs(c4 - gamma ** p * c1 ** q)
    degenerate = gap < tol_case * (1 + abs(c4))
    if degenerate:
        if gap > 0:
            warnings.warn("case boundary: treating c4 = gamma^p c1^q "
                          "as the degenerate branch")
        d3 = a3 * (d4 / a4) - (c3 / c4) * s1 * delta ** p * d1 ** q
        e3 = b3 * (e4 / b4) - (c3 / c4) * s2 * eta ** p * e1 ** q
        a_rho = GroupElement(regime, (delta, d1, d4, d3))
        b_rho = GroupElement(regime, (eta, e1, e4, e3))
    else:
        a_rho = GroupElement(regime, (delta, d1, d4, 0))
        b_rho = GroupElement(regime, (eta, e1, e4, 0))
    return (a_rho, b_rho), (s1, s2)


def psi_case(spec, tol_case=TOL_CASE):
    """Which resonant formula applies: 'affine' (q=1), 'generic' or
    'degenerate' (q >= 2)."""
    if spec.regime.tag == "Double":
        return "affine"
    gamma, c1, c4, _ = spec.generators[2].data
    p, q = spec.regime.p, spec.regime.q
    if abs(c4 - gamma ** p * c1 ** q) < tol_case * (1 + abs(c4)):
        return "degenerate"
    return "generic"
