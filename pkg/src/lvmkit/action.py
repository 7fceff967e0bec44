"""Dynamics of the Z^2-action generated by a commuting pair: windowed
fixed-point certificates, orbits, and a properness falsification probe.

The probe never claims properness: its positive outcome is only "no
violation found" over the sampled window.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .resonant_group import PointV, apply, compose, identity, inverse

DEFAULT_WINDOW = 25
FP_TOL = 1e-10
ANNULUS_RADIUS = 1e2


@dataclass(frozen=True)
class ActionCertificate:
    window: int
    fixed_point_free: bool
    witness: Optional[tuple] = None  # ((r, s), PointV)

    def __post_init__(self):
        if self.fixed_point_free == (self.witness is not None):
            raise ValueError("witness must be present exactly when a fixed "
                             "point exists")


def _powers(f, bound):
    """f^r for r in [-bound, bound], by iterated composition."""
    out = {0: identity(f.regime)}
    finv = inverse(f)
    for r in range(1, bound + 1):
        out[r] = compose(out[r - 1], f)
        out[-r] = compose(out[-(r - 1)], finv)
    return out


def _near_one(z, tol):
    return np.isfinite(z) and abs(z - 1) <= tol


def _fixed_point_witness(h, tol):
    """An exact fixed point of h in V, or None.

    Solved per regime: the first coordinate forces the scalar part to be
    1; the fiber equations are at most affine in xi3 and are solved in
    closed form.
    """
    tag = h.regime.tag
    if tag == "NonResonant":
        h1, h2, h3 = h.data
        if not _near_one(h1, tol):
            return None
        if _near_one(h2, tol):
            return PointV((1, 1, 0))
        if _near_one(h3, tol):
            return PointV((1, 0, 1))
        return None
    if tag == "Single":
        h1, h2, h3, eps = h.data
        if not _near_one(h1, tol):
            return None
        if _near_one(h2, tol):
            if _near_one(h3, tol):
                return PointV((1, 1, 0)) if abs(eps) <= tol else None
            return PointV((1, 1, eps / (1 - h3)))
        if _near_one(h3, tol):
            return PointV((1, 0, 1))  # xi2 = 0 kills the shear term (q >= 1)
        return None
    h1, mat = h.data
    if not _near_one(h1, tol):
        return None
    # tau_p(xi1)(M) is similar to M for every xi1, so a fixed fiber point
    # exists iff 1 is an eigenvalue of M
    vals, vecs = np.linalg.eig(mat)
    for k in range(2):
        if _near_one(vals[k], tol):
            v = vecs[:, k]
            return PointV((1, v[0], v[1]))
    return None


def fixed_point_certificate(pair, window=DEFAULT_WINDOW, tol=FP_TOL):
    """Search the window |r|, |s| <= W for a fixed point of f^r g^s."""
    f, g = pair
    fp = _powers(f, window)
    gp = _powers(g, window)
    with np.errstate(over="ignore", invalid="ignore"):
        for r in range(-window, window + 1):
            for s in range(-window, window + 1):
                if r == 0 and s == 0:
                    continue
                w = _fixed_point_witness(compose(fp[r], gp[s]), tol)
                if w is not None:
                    return ActionCertificate(window, False, ((r, s), w))
    return ActionCertificate(window, True)


def orbit(pair, word, x):
    """Successive images of x under the group elements f^r g^s named by
    the word; the returned list starts with x itself."""
    f, g = pair
    if not isinstance(x, PointV):
        x = PointV(tuple(x))
    out = [x]
    for r, s in word:
        fr = _powers(f, abs(r))[r]
        gs = _powers(g, abs(s))[s]
        x = apply(compose(fr, gs), x)
        out.append(x)
    return out


@dataclass(frozen=True)
class PropernessReport:
    horizon: int
    compact_radius: float
    samples: int
    seed: int
    violations: tuple  # of ((r, s), PointV returning to the annulus)

    @property
    def no_violation_found(self):
        return not self.violations


def _in_annulus(xi, radius):
    inner = 1 / radius
    m1 = abs(xi[0])
    m23 = np.hypot(abs(xi[1]), abs(xi[2]))
    return inner <= m1 <= radius and inner <= m23 <= radius


def properness_probe(pair, compact_radius=ANNULUS_RADIUS, horizon=20,
                     samples=20, seed=0):
    """Look for words moving the compact annulus K back onto itself.

    Words f^r g^s with max(|r|, |s|) in [horizon/2, horizon] are applied
    to seeded sample points of K; any image landing in K again is
    reported as a falsification candidate.  Finding none proves nothing.
    """
    if compact_radius <= 1 or horizon < 1:
        raise ValueError("need compact_radius > 1 and horizon >= 1")
    f, g = pair
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(samples):
        m1 = 10 ** rng.uniform(-np.log10(compact_radius),
                               np.log10(compact_radius))
        m23 = 10 ** rng.uniform(-np.log10(compact_radius),
                                np.log10(compact_radius))
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v *= m23 / np.linalg.norm(v)
        pts.append(PointV((m1 * np.exp(2j * np.pi * rng.uniform()),
                           v[0], v[1])))
    fp = _powers(f, horizon)
    gp = _powers(g, horizon)
    lo = (horizon + 1) // 2
    violations = []
    with np.errstate(over="ignore", invalid="ignore"):
        for r in range(-horizon, horizon + 1):
            for s in range(-horizon, horizon + 1):
                if not lo <= max(abs(r), abs(s)) <= horizon:
                    continue
                h = compose(fp[r], gp[s])
                for x in pts:
                    try:
                        y = apply(h, x)
                    except ValueError:
                        continue
                    if np.all(np.isfinite(y.array())) and \
                            _in_annulus(y.array(), compact_radius):
                        violations.append(((r, s), x))
                        break
    return PropernessReport(horizon, compact_radius, samples, seed,
                            tuple(violations))
