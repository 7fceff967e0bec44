"""Developing maps for (G, V)-structures near the canonical one.

The cover is C x (C^2 \\ {0}) with coordinate w = (w1, xi2, xi3); the
canonical developing map is Dev0(w) = (e^{2 i pi w1}, xi2, xi3).  Each
regime carries an explicit deformation of Dev0 driven by the third
holonomy generator C, and the deck action of Z^3 on the cover is:

* generator 3: w1 -> w1 + 1, (xi2, xi3) fixed;
* generators 1, 2: w1 -> w1 + s_i together with the fiber part of the
  projected generator (the i-th output of the psi_* projection) acting on
  (xi2, xi3), with xi1 read as e^{2 i pi w1}.

This convention is the single source of truth used by every equivariance
check in the package: Dev(deck_i(w)) = rho(e_i) . Dev(w) with rho the
*input* rank-3 representation.
"""

from dataclasses import dataclass

import numpy as np

from .rep_variety import StructureSpec, psi_case, psi_nonresonant, psi_resonant
from .resonant_group import PointV, apply, group_exp, group_log, identity, tau

TWO_PI_I = 2j * np.pi


@dataclass(frozen=True)
class DevMap:
    regime: object
    case: str  # "canonical-form" | "affine" | "generic" | "degenerate"
    params: tuple

    def __call__(self, w):
        return dev_eval(self, w)


@dataclass(frozen=True)
class DevStructure:
    """Everything needed to evaluate and verify one structure: the input
    triple, the projected pair, the deck shifts and the developing map."""
    spec: StructureSpec
    output_pair: tuple
    shifts: tuple
    dev: DevMap
    tail: tuple = None


def build_structure(spec):
    regime = spec.regime
    if regime.tag == "NonResonant":
        pair, tail, shifts = psi_nonresonant(spec)
        c = tuple(np.log(complex(g)) / TWO_PI_I for g in spec.generators[2].data)
        dev = DevMap(regime, "canonical-form", c)
        return DevStructure(spec, pair, shifts, dev, tail)
    pair, shifts = psi_resonant(spec)
    case = psi_case(spec)
    if case == "affine":
        x = group_log(spec.generators[2])
        dev = DevMap(regime, "affine", (x,))
    else:
        gamma, c1, c4, c3 = spec.generators[2].data
        dev = DevMap(regime, case, (gamma, c1, c4, c3))
    return DevStructure(spec, pair, shifts, dev, None)


def dev_eval(d, w):
    w1 = complex(w[0])
    xi2, xi3 = complex(w[1]), complex(w[2])
    if xi2 == 0 and xi3 == 0:
        raise ValueError("(xi2, xi3) must not both vanish")
    if d.case == "canonical-form":
        c1, c2, c3 = d.params
        return PointV((np.exp(TWO_PI_I * w1 * (1 + c1)),
                       np.exp(TWO_PI_I * w1 * c2) * xi2,
                       np.exp(TWO_PI_I * w1 * c3) * xi3))
    if d.case == "affine":
        x = d.params[0]
        base = PointV((np.exp(TWO_PI_I * w1), xi2, xi3))
        return apply(group_exp(x.scaled(w1)), base)
    gamma, c1, c4, c3 = d.params
    p, q = d.regime.p, d.regime.q
    lg, lc1, lc4 = np.log(gamma), np.log(c1), np.log(c4)
    first = np.exp((TWO_PI_I + lg) * w1)
    second = np.exp(w1 * lc1) * xi2
    if d.case == "generic":
        kappa = c3 / (gamma ** p * c1 ** q - c4)
        third = (np.exp(w1 * lc4) * xi3
                 + kappa * np.exp(p * (TWO_PI_I + lg) * w1)
                 * np.exp(q * w1 * lc1) * xi2 ** q)
    else:  # degenerate: c4 = gamma^p c1^q
        third = np.exp(w1 * lc4) * (
            xi3 + (c3 / c4) * w1 * np.exp(TWO_PI_I * p * w1) * xi2 ** q)
    return PointV((first, second, third))


def deck_transform(structure, index, w):
    """Image of w under the deck generator with the given index (1..3)."""
    w1 = complex(w[0])
    xi2, xi3 = complex(w[1]), complex(w[2])
    if index == 3:
        return (w1 + 1, xi2, xi3)
    if index not in (1, 2):
        raise ValueError("generator index must be 1, 2 or 3")
    gen = structure.output_pair[index - 1]
    s = structure.shifts[index - 1]
    regime = structure.spec.regime
    xi1 = np.exp(TWO_PI_I * w1)
    if regime.tag == "NonResonant":
        _, a2, a3 = gen.data
        return (w1 + s, a2 * xi2, a3 * xi3)
    if regime.tag == "Single":
        _, a2, a3, eps = gen.data
        p, q = regime.p, regime.q
        return (w1 + s, a2 * xi2, a3 * xi3 + eps * xi1 ** p * xi2 ** q)
    _, mat = gen.data
    tail = tau(xi1, regime.p, mat) @ np.array([xi2, xi3])
    return (w1 + s, tail[0], tail[1])


def equivariance_residual(structure, index, w):
    """Relative size of Dev(deck_index(w)) - rho(e_index) . Dev(w)."""
    lhs = dev_eval(structure.dev, deck_transform(structure, index, w)).array()
    base = dev_eval(structure.dev, w)
    rhs = apply(structure.spec.generators[index - 1], base).array()
    return float(np.max(np.abs(lhs - rhs)) / (1 + np.max(np.abs(rhs))))


def sample_cover_points(rng, samples):
    pts = []
    while len(pts) < samples:
        w1 = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        vec = rng.normal(size=2) + 1j * rng.normal(size=2)
        norm = np.linalg.norm(vec)
        if norm < 1e-6:
            continue
        vec = vec / norm * rng.uniform(0.5, 2.0)
        pts.append((w1, vec[0], vec[1]))
    return pts


@dataclass(frozen=True)
class StructureReport:
    passed: bool
    max_residual: float
    mean_residual: float
    per_generator: tuple
    complete: bool
    seed: int
    samples: int


def check_structure(spec, samples=100, tol=1e-9, seed=0):
    """Sampled equivariance verification of the structure carried by spec.

    Deterministic for a fixed seed.  The structure is flagged complete
    (uniformizable) exactly when the third generator is the identity.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    structure = build_structure(spec)
    rng = np.random.default_rng(seed)
    pts = sample_cover_points(rng, samples)
    per_gen = []
    for index in (1, 2, 3):
        res = [equivariance_residual(structure, index, w) for w in pts]
        per_gen.append((index, max(res), float(np.mean(res))))
    max_res = max(m for _, m, _ in per_gen)
    mean_res = float(np.mean([a for _, _, a in per_gen]))
    cgen = spec.generators[2]
    complete = np.max(np.abs(cgen.params()
                             - identity(spec.regime).params())) < 1e-12
    return StructureReport(max_res <= tol, max_res, mean_res,
                           tuple(per_gen), bool(complete), seed, samples)
