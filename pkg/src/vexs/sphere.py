"""Anisotropy constants from |w . e|^p integrals over the unit sphere.

Two independent routes are kept side by side: a closed form in terms of
log-Gamma (the production path, overflow-safe for large p) and direct
sphere quadrature (the cross-check oracle).  Rules exist for n = 1
(the two-point sphere), n = 2 (midpoint trapezoid on the circle) and
n = 3 (Gauss-Legendre in the polar cosine, split at the equator, times
a uniform azimuth grid).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError
from .quadrature import gauss_nodes

_SURFACE = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}

# default node counts for the quadrature oracle; n=3 is (polar, azimuth)
_DEFAULT_N2 = 32768
_DEFAULT_N3 = (256, 512)


@dataclass(frozen=True)
class SphereRule:
    """Quadrature nodes and weights on S^{n-1}.

    Weights sum to the surface measure; nodes are unit vectors.  The
    reference axis (last coordinate for n = 3, first for n <= 2) is where
    the rule is most accurate for zonal integrands; `aligned_with`
    returns a rotated copy whose axis matches a given direction.
    """

    dimension: int
    kind: str
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def node_count(self) -> int:
        return self.nodes.shape[0]

    @property
    def axis(self) -> np.ndarray:
        e = np.zeros(self.dimension)
        e[-1 if self.dimension == 3 else 0] = 1.0
        return e

    def validate(self, tol_weights: float = 1e-12, tol_unit: float = 1e-14):
        total = float(np.sum(self.weights))
        surface = _SURFACE[self.dimension]
        if abs(total - surface) > tol_weights * surface:
            raise DomainError(
                f"rule weights sum to {total}, expected {surface}")
        norms = np.linalg.norm(self.nodes, axis=1)
        if float(np.max(np.abs(norms - 1.0))) > tol_unit:
            raise DomainError("rule nodes are not unit vectors")
        return self

    def aligned_with(self, v) -> "SphereRule":
        """Rotate the rule so its reference axis points along v."""
        v = np.asarray(v, dtype=float)
        nv = np.linalg.norm(v)
        if nv == 0.0 or v.shape != (self.dimension,):
            raise DomainError("alignment direction must be a nonzero n-vector")
        v = v / nv
        rot = _rotation_to(self.axis, v)
        return SphereRule(self.dimension, self.kind,
                          self.nodes @ rot.T, self.weights)


def _rotation_to(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """A rotation matrix sending unit vector a to unit vector b."""
    n = a.size
    c = float(a @ b)
    if c > 1.0 - 1e-15:
        return np.eye(n)
    if c < -1.0 + 1e-15:
        return -np.eye(n) if n % 2 == 1 else _flip_rotation(a, n)
    w = b - c * a
    w = w / np.linalg.norm(w)
    s = math.sqrt(max(0.0, 1.0 - c * c))
    # rotate by angle arccos(c) in the (a, w) plane, identity elsewhere
    rot = np.eye(n) - np.outer(a, a) - np.outer(w, w)
    rot += c * (np.outer(a, a) + np.outer(w, w))
    rot += s * (np.outer(w, a) - np.outer(a, w))
    return rot


def _flip_rotation(a: np.ndarray, n: int) -> np.ndarray:
    # even dimension: reflect a and one orthogonal direction
    q = np.zeros(n)
    q[int(np.argmin(np.abs(a)))] = 1.0
    q = q - (q @ a) * a
    q /= np.linalg.norm(q)
    rot = np.eye(n) - 2.0 * np.outer(a, a)
    rot = rot @ (np.eye(n) - 2.0 * np.outer(q, q))
    return rot


def default_rule(n: int, node_count=None) -> SphereRule:
    """The standard rule per dimension.

    n = 1: the exact two-point rule.  n = 2: midpoint trapezoid with
    `node_count` angles.  n = 3: equator-split Gauss-Legendre in
    cos(theta) times uniform azimuth; `node_count` is (polar, azimuth).
    """
    if n == 1:
        nodes = np.array([[1.0], [-1.0]])
        return SphereRule(1, "exact-pair", nodes, np.ones(2)).validate()
    if n == 2:
        m = int(node_count or _DEFAULT_N2)
        theta = 2.0 * math.pi * (np.arange(m) + 0.5) / m
        nodes = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        weights = np.full(m, 2.0 * math.pi / m)
        return SphereRule(2, "trapezoid-on-circle", nodes, weights).validate()
    if n == 3:
        nt, nphi = node_count or _DEFAULT_N3
        half = max(1, int(nt) // 2)
        xs, ws = gauss_nodes(half)
        t = np.concatenate([0.5 * (xs - 1.0), 0.5 * (xs + 1.0)])
        wt = np.concatenate([0.5 * ws, 0.5 * ws])
        phi = 2.0 * math.pi * (np.arange(int(nphi)) + 0.5) / int(nphi)
        st = np.sqrt(np.maximum(0.0, 1.0 - t * t))
        nodes = np.stack([
            np.outer(st, np.cos(phi)).ravel(),
            np.outer(st, np.sin(phi)).ravel(),
            np.repeat(t, int(nphi)),
        ], axis=1)
        weights = np.repeat(wt, int(nphi)) * (2.0 * math.pi / int(nphi))
        return SphereRule(3, "gauss-polar-uniform-azimuth",
                          nodes, weights).validate()
    raise DomainError(f"sphere rules exist for n in {{1, 2, 3}}, got {n}")


def abs_power_sphere_integral(n: int, p, rule: SphereRule | None = None,
                              e=None):
    """Integral over S^{n-1} of |w . e|^p (no 1/p factor).

    With rule=None the closed form 2 pi^{(n-1)/2} Gamma((p+1)/2) /
    Gamma((n+p)/2) is used, evaluated via log-Gamma; p may be an array.
    With a rule, the quadrature sum is returned for the reference
    direction e (default: the rule's axis).  The result is independent
    of e up to the rule's resolution.
    """
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr < 1.0):
        raise DomainError("exponent p must be >= 1")
    if rule is None:
        val = 2.0 * math.pi ** ((n - 1) / 2.0) * np.exp(
            gammaln((p_arr + 1.0) / 2.0) - gammaln((n + p_arr) / 2.0))
        return float(val) if np.isscalar(p) or p_arr.ndim == 0 else val
    if rule.dimension != n:
        raise DomainError("rule dimension mismatch")
    e = rule.axis if e is None else np.asarray(e, dtype=float)
    e = e / np.linalg.norm(e)
    proj = np.abs(rule.nodes @ e)
    if p_arr.ndim == 0:
        return float(np.sum(rule.weights * proj ** float(p_arr)))
    return np.array([float(np.sum(rule.weights * proj ** q)) for q in p_arr])


def k_np(n: int, p, rule: SphereRule | None = None, e=None):
    """The anisotropy constant: abs_power_sphere_integral(n, p) / p."""
    return abs_power_sphere_integral(n, p, rule, e) / np.asarray(p, dtype=float)


def k_np_values(n: int, p_values: np.ndarray) -> np.ndarray:
    """Vectorized closed-form K_{n, p(x)} for integrand evaluation."""
    p_values = np.asarray(p_values, dtype=float)
    return (2.0 * math.pi ** ((n - 1) / 2.0) / p_values) * np.exp(
        gammaln((p_values + 1.0) / 2.0) - gammaln((n + p_values) / 2.0))


@dataclass
class IdentityCheck:
    lhs: float
    rhs: float

    @property
    def rel_residual(self) -> float:
        scale = max(abs(self.rhs), 1e-300)
        return abs(self.lhs - self.rhs) / scale


def directional_identity_check(n: int, p: float, V,
                               rule: SphereRule | None = None,
                               align: bool = True) -> IdentityCheck:
    """Check int_{S^{n-1}} |V . w|^p dH = p K_{n,p} |V|^p.

    lhs is the quadrature sum, rhs the closed form.  By default the rule
    is rotated so its reference axis matches V, which keeps the zonal
    kink aligned with the rule's panel split; pass align=False to
    exercise the rule in generic position (resolution-limited accuracy).
    """
    V = np.asarray(V, dtype=float)
    if not np.all(np.isfinite(V)):
        raise DomainError("V must be finite")
    rule = rule if rule is not None else default_rule(n)
    nv = float(np.linalg.norm(V))
    if nv == 0.0:
        return IdentityCheck(lhs=0.0, rhs=0.0)
    use = rule.aligned_with(V) if align else rule
    lhs = float(np.sum(use.weights * np.abs(use.nodes @ V) ** p))
    rhs = p * k_np(n, p) * nv ** p
    return IdentityCheck(lhs=lhs, rhs=rhs)
