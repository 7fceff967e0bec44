"""Holonomy eigen-data of a certified (2, 6, 4) configuration.

The deck transformations of the universal cover of the associated
threefold act through six complex multipliers, packaged here as a pair of
triples (alpha, beta).  They are computed by a bilinear pairing of the
configuration tail against the inverse of the 2x2 difference matrix Omega
followed by exp(2*i*pi * .).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config_geometry import Configuration  # noqa: F401  (re-export convenience)

TWO_PI_I = 2j * np.pi


@dataclass(frozen=True)
class HolonomyPair:
    """Eigen-data (alpha_1..3, beta_1..3) with the optional source matrix.

    Synthetic instances (omega=None) are allowed so that downstream group
    and resonance code can be exercised on hand-picked eigen-data.
    """
    alpha: tuple
    beta: tuple
    omega: Optional[np.ndarray] = None

    def __post_init__(self):
        a = tuple(complex(x) for x in self.alpha)
        b = tuple(complex(x) for x in self.beta)
        if len(a) != 3 or len(b) != 3:
            raise ValueError("alpha and beta must each have three entries")
        if any(x == 0 for x in a + b):
            raise ValueError("eigen-data entries must be nonzero")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        if self.omega is not None:
            om = np.asarray(self.omega, dtype=complex)
            if om.shape != (2, 2):
                raise ValueError("omega must be 2x2")
            if om[0, 0] * om[1, 1] - om[0, 1] * om[1, 0] == 0:
                raise ValueError("omega must be invertible")
            om.setflags(write=False)
            object.__setattr__(self, "omega", om)

    def flat(self):
        """Interchange order: alpha1..3 then beta1..3 as [re, im] pairs."""
        return [[z.real, z.imag] for z in self.alpha + self.beta]


def pair_from_flat(values):
    """Inverse of HolonomyPair.flat for synthetic eigen-data."""
    zs = [complex(re, im) for re, im in values]
    if len(zs) != 6:
        raise ValueError("expected six [re, im] pairs")
    return HolonomyPair(tuple(zs[:3]), tuple(zs[3:]))


def omega_matrix(config):
    """Matrix with rows Lambda_2 - Lambda_1 and Lambda_3 - Lambda_1.

    The caller is expected to have certified the configuration (type
    (2, 6, 4)); certification is not repeated here because the pairing is
    invariant under affine maps that certification itself is not.
    """
    v = [np.asarray(w, dtype=complex) for w in config.vectors]
    if len(v) != 6 or config.m != 2:
        raise ValueError("expected six vectors in C^2")
    omega = np.array([v[1] - v[0], v[2] - v[0]])
    if abs(np.linalg.det(omega)) == 0:
        # cannot happen for certified input; a zero here means the
        # certification and the difference matrix disagree
        raise RuntimeError("internal inconsistency: singular difference matrix")
    return omega


def holonomy_pair(config):
    omega = omega_matrix(config)
    v = [np.asarray(w, dtype=complex) for w in config.vectors]
    inv = np.linalg.inv(omega)
    alpha = []
    beta = []
    for j in range(3):
        d = v[j + 3] - v[0]
        # complex bilinear pairing <d, inv @ K> = d^T inv K
        u = d @ inv[:, 0]
        w = d @ inv[:, 1]
        alpha.append(np.exp(TWO_PI_I * u))
        beta.append(np.exp(TWO_PI_I * w))
    pair = HolonomyPair(tuple(alpha), tuple(beta), omega)
    violations = validate_holonomy(pair)
    if violations:
        raise ValueError("eigen-data violates structural constraints: %s"
                         % "; ".join(violations))
    return pair


def validate_holonomy(h):
    """Return the list of violated structural constraints (empty = OK)."""
    violations = []
    for j in range(3):
        if abs(abs(h.alpha[j]) - 1) < 1e-12 and abs(abs(h.beta[j]) - 1) < 1e-12:
            violations.append(
                "component %d has both multipliers on the unit circle" % (j + 1))
    for j in (1, 2):
        if h.alpha[0] == h.alpha[j] and h.beta[0] == h.beta[j]:
            violations.append(
                "components 1 and %d have identical multiplier pairs" % (j + 1))
    return violations
