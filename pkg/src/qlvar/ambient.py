"""Static ambient 3-manifolds: spatial Schwarzschild slices and radial
conformal deformations of them.

Two charts are used throughout:

* the polar chart (r, psi, phi) in which the static metric is the closed form
  ``diag(1/(1-2m/r), r^2, r^2 sin^2 psi)`` — this is the chart the public
  point-evaluation API reports in;
* a Cartesian chart x = (r sin psi cos phi, r sin psi sin phi, r cos psi) in
  which the same metric reads ``g_ij = delta_ij + c(r) n_i n_j`` with
  ``c = 2m/(r - 2m)`` and ``n = x/r``.  Surface machinery works here because
  Cartesian components of embedded positions are smooth functions on the
  sphere while polar components are not.

Key closed forms (verified against 4th-order finite differences in the test
suite):

* inverse metric      g^ij = delta_ij - (2m/r) n_i n_j
* Ricci tensor        Ric  = -(2m/(r^3 f)) n (x) n + (m/r^3)(delta - n (x) n),
                      f = 1 - 2m/r; scalar curvature 0
* static potential    N = sqrt(1 - 2m/r), grad N = (m/r^2 N) n,
                      Hess N has radial eigenvalue -2m/(r^3 N) and tangential
                      eigenvalue m N / r (so Laplacian N = 0)
* static equation     (Lap N) g - Hess N + N Ric = 0 exactly.

Conformal physical metrics g = u^4 gbar with radial u use the dimension-3
transformation laws (omega = 2 ln u):

    Gamma~ = Gamma + delta (x) d(omega) + d(omega) (x) delta - gbar gbar^{-1} d(omega)
    Ric~   = Ric - (Hess omega - d omega (x) d omega) - (Lap omega + |d omega|^2) gbar
    R~     = u^-4 (R - 4 Lap omega - 2 |d omega|^2)   ( = -8 u^-5 Lap u for R = 0 )
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PointInsideHorizon, PoleEvaluation

__all__ = [
    "AmbientPoint",
    "AmbientGeometryAt",
    "StaticPotential",
    "StaticSpace",
    "ConformalStatic",
    "GaussianBump",
    "QuadraticGaussianBump",
    "point_to_xyz",
    "xyz_to_point",
    "fd_metric_derivative",
    "fd_curvature",
]


# ---------------------------------------------------------------------------
# chart points


@dataclass(frozen=True)
class AmbientPoint:
    """A point of the polar chart (r, psi, phi); 0 < psi < pi enforced."""

    r: float
    psi: float
    phi: float = 0.0

    def __post_init__(self):
        if not self.r > 0.0:
            raise ValueError(f"r must be positive, got {self.r}")
        if not 0.0 < self.psi < math.pi:
            raise PoleEvaluation(
                f"psi = {self.psi} is on the chart axis; polar-chart formulas "
                "are evaluated only for 0 < psi < pi")

    def xyz(self) -> np.ndarray:
        return point_to_xyz(self.r, self.psi, self.phi)


def point_to_xyz(r, psi, phi):
    """Polar chart -> Cartesian chart, vectorized over broadcastable inputs."""
    r, psi, phi = np.broadcast_arrays(np.asarray(r, float), np.asarray(psi, float),
                                      np.asarray(phi, float))
    sp = np.sin(psi)
    return np.stack([r * sp * np.cos(phi), r * sp * np.sin(phi), r * np.cos(psi)],
                    axis=-1)


def xyz_to_point(x):
    """Cartesian chart -> (r, psi, phi) arrays."""
    x = np.asarray(x, float)
    r = np.linalg.norm(x, axis=-1)
    psi = np.arccos(np.clip(x[..., 2] / r, -1.0, 1.0))
    phi = np.mod(np.arctan2(x[..., 1], x[..., 0]), 2.0 * math.pi)
    return r, psi, phi


@dataclass
class AmbientGeometryAt:
    """Fully assembled pointwise curvature data in the polar chart."""

    metric: np.ndarray        # (3,3)
    christoffel: np.ndarray   # (3,3,3), Gamma^k_ij indexed [k,i,j]
    ricci: np.ndarray         # (3,3)
    scalar: float


@dataclass
class StaticPotential:
    """Static potential N with its gradient and Hessian in the polar chart."""

    value: float
    gradient: np.ndarray      # (3,) covector (dN_r, dN_psi, dN_phi)
    hessian: np.ndarray       # (3,3)


# ---------------------------------------------------------------------------
# helpers shared by the Cartesian-chart machinery


def _split_radial(pts):
    pts = np.asarray(pts, float)
    r = np.linalg.norm(pts, axis=-1)
    n = pts / r[..., None]
    return r, n


def _projector(n):
    """P_ki = delta_ki - n_k n_i."""
    eye = np.eye(3)
    return eye - n[..., :, None] * n[..., None, :]


# ---------------------------------------------------------------------------
# static spaces


@dataclass
class StaticSpace:
    """Spatial Schwarzschild slice of mass ``mass`` on the chart r > r_min.

    ``mass = 0`` is Euclidean space with potential N identically 1.
    """

    mass: float
    r_min: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.mass < 0.0:
            raise ValueError("mass must be non-negative")
        if self.r_min is None:
            self.r_min = 2.0 * self.mass
        if self.r_min < 2.0 * self.mass:
            raise ValueError("r_min cannot reach below the horizon 2m")

    # -- guards -------------------------------------------------------------

    def _check_radius(self, r):
        bad = r <= self.r_min
        if np.any(bad):
            rmin = float(np.min(np.asarray(r)))
            raise PointInsideHorizon(
                f"evaluation at r = {rmin} violates r > {self.r_min} "
                f"(mass {self.mass})")

    # -- polar-chart public API ----------------------------------------------

    def metric_at(self, p: AmbientPoint) -> np.ndarray:
        """Closed-form metric diag(1/(1-2m/r), r^2, r^2 sin^2 psi)."""
        self._check_radius(p.r)
        # (r - 2m)/r stays well conditioned down to the horizon, 1 - 2m/r does not
        f = (p.r - 2.0 * self.mass) / p.r
        return np.diag([1.0 / f, p.r ** 2, (p.r * math.sin(p.psi)) ** 2])

    def curvature_at(self, p: AmbientPoint) -> AmbientGeometryAt:
        """Christoffels from analytic metric derivatives; Ricci and scalar
        assembled from Gamma and its analytic derivatives."""
        self._check_radius(p.r)
        m, r, psi = self.mass, p.r, p.psi
        f = (r - 2.0 * m) / r
        s, c = math.sin(psi), math.cos(psi)
        G = np.zeros((3, 3, 3))
        G[0, 0, 0] = -m / (r * r * f)
        G[0, 1, 1] = -r * f
        G[0, 2, 2] = -r * f * s * s
        G[1, 0, 1] = G[1, 1, 0] = 1.0 / r
        G[1, 2, 2] = -s * c
        G[2, 0, 2] = G[2, 2, 0] = 1.0 / r
        G[2, 1, 2] = G[2, 2, 1] = c / s

        dG = np.zeros((3, 3, 3, 3))  # dG[a,k,i,j] = partial_a Gamma^k_ij
        dG[0, 0, 0, 0] = 2.0 * m * (1.0 - m / r) / (r ** 3 * f * f)
        dG[0, 0, 1, 1] = -1.0
        dG[0, 0, 2, 2] = -s * s
        dG[1, 0, 2, 2] = -2.0 * r * f * s * c
        dG[0, 1, 0, 1] = dG[0, 1, 1, 0] = -1.0 / (r * r)
        dG[1, 1, 2, 2] = -(c * c - s * s)
        dG[0, 2, 0, 2] = dG[0, 2, 2, 0] = -1.0 / (r * r)
        dG[1, 2, 1, 2] = dG[1, 2, 2, 1] = -1.0 / (s * s)

        ricci = (np.einsum("kkij->ij", dG) - np.einsum("ikkj->ij", dG)
                 + np.einsum("kkl,lij->ij", G, G) - np.einsum("kil,lkj->ij", G, G))
        metric = self.metric_at(p)
        scalar = float(np.einsum("ij,ij->", np.linalg.inv(metric), ricci))
        return AmbientGeometryAt(metric=metric, christoffel=G, ricci=ricci,
                                 scalar=scalar)

    def static_potential(self, p: AmbientPoint) -> StaticPotential:
        """N = sqrt(1-2m/r) with polar-chart gradient and Hessian."""
        self._check_radius(p.r)
        m, r, psi = self.mass, p.r, p.psi
        N = math.sqrt((r - 2.0 * m) / r)
        dN = np.array([m / (r * r * N), 0.0, 0.0])
        hess = np.diag([-2.0 * m / (r ** 3 * N), m * N / r,
                        m * N / r * math.sin(psi) ** 2])
        return StaticPotential(value=N, gradient=dN, hessian=hess)

    def static_equation_residual(self, p: AmbientPoint) -> float:
        """Max-abs of (Lap N) g - Hess N + N Ric, assembled from parts."""
        geo = self.curvature_at(p)
        pot = self.static_potential(p)
        ginv = np.linalg.inv(geo.metric)
        lap = float(np.einsum("ij,ij->", ginv, pot.hessian))
        resid = lap * geo.metric - pot.hessian + pot.value * geo.ricci
        return float(np.max(np.abs(resid)))

    def killing_rotation_field(self, omega: float = 1.0) -> "KillingRotation":
        """The axial Killing field omega * d/dphi."""
        return KillingRotation(space=self, omega=omega)

    # -- Cartesian-chart vectorized machinery ---------------------------------

    def _c(self, r):
        if self.mass == 0.0:
            return np.zeros_like(r), np.zeros_like(r), np.zeros_like(r)
        d = r - 2.0 * self.mass
        c = 2.0 * self.mass / d
        return c, -2.0 * self.mass / d ** 2, 4.0 * self.mass / d ** 3

    def metric(self, pts) -> np.ndarray:
        """g_ij = delta_ij + c(r) n_i n_j at Cartesian points (...,3)."""
        r, n = _split_radial(pts)
        self._check_radius(r)
        c, _, _ = self._c(r)
        return np.eye(3) + c[..., None, None] * n[..., :, None] * n[..., None, :]

    def inv_metric(self, pts) -> np.ndarray:
        """g^ij = delta_ij - (2m/r) n_i n_j (Sherman-Morrison closed form)."""
        r, n = _split_radial(pts)
        self._check_radius(r)
        a = 2.0 * self.mass / r
        return np.eye(3) - a[..., None, None] * n[..., :, None] * n[..., None, :]

    def metric_derivative(self, pts) -> np.ndarray:
        """D[..., k, i, j] = partial_k g_ij, analytic."""
        r, n = _split_radial(pts)
        self._check_radius(r)
        c, c1, _ = self._c(r)
        P = _projector(n)
        nn = n[..., :, None] * n[..., None, :]
        term1 = c1[..., None, None, None] * n[..., :, None, None] * nn[..., None, :, :]
        term2 = (c / r)[..., None, None, None] * (
            P[..., :, :, None] * n[..., None, None, :]
            + n[..., None, :, None] * P[..., :, None, :])
        return term1 + term2

    def metric_second_derivative(self, pts) -> np.ndarray:
        """DD[..., l, k, i, j] = partial_l partial_k g_ij, analytic."""
        r, n = _split_radial(pts)
        self._check_radius(r)
        c, c1, c2 = self._c(r)
        P = _projector(n)
        rr = r[..., None, None, None, None]
        cN = c[..., None, None, None, None]
        c1N = c1[..., None, None, None, None]
        c2N = c2[..., None, None, None, None]
        n_l = n
        # dP[l, k, i] = partial_l P_ki = -(P_lk n_i + n_k P_li)/r
        dP = -(np.einsum("...lk,...i->...lki", P, n)
               + np.einsum("...k,...li->...lki", n, P)) / r[..., None, None, None]

        t1 = c2N * np.einsum("...l,...k,...i,...j->...lkij", n_l, n, n, n)
        t1 += (c1N / rr) * (np.einsum("...lk,...i,...j->...lkij", P, n, n)
                            + np.einsum("...k,...li,...j->...lkij", n, P, n)
                            + np.einsum("...k,...i,...lj->...lkij", n, n, P))
        t2 = (c1N / rr - cN / rr ** 2) * np.einsum(
            "...l,...kij->...lkij", n,
            np.einsum("...ki,...j->...kij", P, n)
            + np.einsum("...i,...kj->...kij", n, P))
        t2 += (cN / rr) * (np.einsum("...lki,...j->...lkij", dP, n)
                           + np.einsum("...ki,...lj->...lkij", P, P) / rr
                           + np.einsum("...li,...kj->...lkij", P, P) / rr
                           + np.einsum("...i,...lkj->...lkij", n, dP))
        return t1 + t2

    def christoffel(self, pts) -> np.ndarray:
        """Gamma[..., k, i, j] = Gamma^k_ij from the analytic metric derivative."""
        D = self.metric_derivative(pts)
        ginv = self.inv_metric(pts)
        S = (np.einsum("...ijl->...ijl", D)
             + np.einsum("...jil->...ijl", D)
             - np.einsum("...lij->...ijl", D))
        return 0.5 * np.einsum("...kl,...ijl->...kij", ginv, S)

    def christoffel_derivative(self, pts) -> np.ndarray:
        """dGamma[..., m, k, i, j] = partial_m Gamma^k_ij, analytic."""
        D = self.metric_derivative(pts)
        DD = self.metric_second_derivative(pts)
        ginv = self.inv_metric(pts)
        S = (np.einsum("...ijl->...ijl", D) + np.einsum("...jil->...ijl", D)
             - np.einsum("...lij->...ijl", D))
        dS = (np.einsum("...mijl->...mijl", DD) + np.einsum("...mjil->...mijl", DD)
              - np.einsum("...mlij->...mijl", DD))
        dginv = -np.einsum("...ka,...mab,...bl->...mkl", ginv, D, ginv)
        return (0.5 * np.einsum("...mkl,...ijl->...mkij", dginv, S)
                + 0.5 * np.einsum("...kl,...mijl->...mkij", ginv, dS))

    def ricci(self, pts) -> np.ndarray:
        """Ricci tensor in the Cartesian chart, assembled from Gamma and dGamma."""
        G = self.christoffel(pts)
        dG = self.christoffel_derivative(pts)
        return (np.einsum("...kkij->...ij", dG) - np.einsum("...ikkj->...ij", dG)
                + np.einsum("...kkl,...lij->...ij", G, G)
                - np.einsum("...kil,...lkj->...ij", G, G))

    def scalar_curvature(self, pts) -> np.ndarray:
        return np.einsum("...ij,...ij->...", self.inv_metric(pts), self.ricci(pts))

    def potential(self, pts):
        """(N, dN_i) at Cartesian points; dN is a covector field."""
        r, n = _split_radial(pts)
        self._check_radius(r)
        N = np.sqrt((r - 2.0 * self.mass) / r)
        dN = (self.mass / (r * r * N))[..., None] * n
        return N, dN


@dataclass
class KillingRotation:
    """Axial Killing field omega * d/dphi of a static space."""

    space: StaticSpace
    omega: float

    def at_xyz(self, pts) -> np.ndarray:
        """Cartesian components omega * (-y, x, 0)."""
        pts = np.asarray(pts, float)
        out = np.zeros_like(pts)
        out[..., 0] = -self.omega * pts[..., 1]
        out[..., 1] = self.omega * pts[..., 0]
        return out

    def squared_norm(self, pts) -> np.ndarray:
        """|V|^2_g = omega^2 r^2 sin^2 psi (the field is radial-orthogonal)."""
        pts = np.asarray(pts, float)
        return self.omega ** 2 * (pts[..., 0] ** 2 + pts[..., 1] ** 2)


# ---------------------------------------------------------------------------
# radial conformal factors


@dataclass(frozen=True)
class GaussianBump:
    """u(r) = 1 + amplitude * exp(-((r-center)/width)^2)."""

    amplitude: float
    center: float
    width: float = 1.0

    def u(self, r):
        z = (np.asarray(r, float) - self.center) / self.width
        return 1.0 + self.amplitude * np.exp(-z * z)

    def du(self, r):
        r = np.asarray(r, float)
        z = (r - self.center) / self.width
        return self.amplitude * np.exp(-z * z) * (-2.0 * z / self.width)

    def d2u(self, r):
        r = np.asarray(r, float)
        z = (r - self.center) / self.width
        return (self.amplitude * np.exp(-z * z)
                * (4.0 * z * z - 2.0) / self.width ** 2)


@dataclass(frozen=True)
class QuadraticGaussianBump:
    """u(r) = 1 + amplitude * (r-center)^2 * exp(-((r-center)/width)^2).

    Designed so that u = 1 and u' = 0 but u'' = 2*amplitude on the sphere
    r = center: the conformal change preserves the induced geometry and
    curvatures of that sphere while switching on ambient scalar curvature.
    """

    amplitude: float
    center: float
    width: float = 1.0

    def u(self, r):
        d = np.asarray(r, float) - self.center
        return 1.0 + self.amplitude * d * d * np.exp(-(d / self.width) ** 2)

    def du(self, r):
        d = np.asarray(r, float) - self.center
        e = np.exp(-(d / self.width) ** 2)
        return self.amplitude * e * (2.0 * d - 2.0 * d ** 3 / self.width ** 2)

    def d2u(self, r):
        d = np.asarray(r, float) - self.center
        w2 = self.width ** 2
        e = np.exp(-d * d / w2)
        return self.amplitude * e * (2.0 - 10.0 * d * d / w2
                                     + 4.0 * d ** 4 / w2 ** 2)


@dataclass
class ConformalStatic:
    """Physical ambient metric g = u(r)^4 * gbar over a static base space.

    Exposes the same Cartesian-chart interface as :class:`StaticSpace`
    (metric / inv_metric / christoffel / ricci / scalar_curvature) via the
    dimension-3 conformal transformation laws with omega = 2 ln u.
    """

    base: StaticSpace
    factor: GaussianBump | QuadraticGaussianBump

    @property
    def r_min(self):
        return self.base.r_min

    def _omega_data(self, pts):
        r, n = _split_radial(pts)
        u = self.factor.u(r)
        du = self.factor.du(r)
        d2u = self.factor.d2u(r)
        a = 2.0 * du / u                       # omega'(r)
        a1 = 2.0 * (d2u * u - du * du) / u ** 2  # omega''(r)
        dw = a[..., None] * n                  # d omega (covector = vector comps)
        P = _projector(n)
        ddw = (a1[..., None, None] * n[..., :, None] * n[..., None, :]
               + (a / r)[..., None, None] * P)  # coordinate second derivative
        return u, dw, ddw

    def conformal_factor(self, pts):
        r, _ = _split_radial(pts)
        return self.factor.u(r)

    def metric(self, pts):
        u, _, _ = self._omega_data(pts)
        return u[..., None, None] ** 4 * self.base.metric(pts)

    def inv_metric(self, pts):
        u, _, _ = self._omega_data(pts)
        return self.base.inv_metric(pts) / u[..., None, None] ** 4

    def christoffel(self, pts):
        _, dw, _ = self._omega_data(pts)
        Gbar = self.base.christoffel(pts)
        gbar = self.base.metric(pts)
        ginvbar = self.base.inv_metric(pts)
        grad = np.einsum("...kl,...l->...k", ginvbar, dw)
        eye = np.eye(3)
        return (Gbar
                + np.einsum("ki,...j->...kij", eye, dw)
                + np.einsum("kj,...i->...kij", eye, dw)
                - np.einsum("...ij,...k->...kij", gbar, grad))

    def _hess_omega(self, pts):
        _, dw, ddw = self._omega_data(pts)
        Gbar = self.base.christoffel(pts)
        return ddw - np.einsum("...kij,...k->...ij", Gbar, dw)

    def ricci(self, pts):
        _, dw, _ = self._omega_data(pts)
        gbar = self.base.metric(pts)
        ginvbar = self.base.inv_metric(pts)
        hess = self._hess_omega(pts)
        lap = np.einsum("...ij,...ij->...", ginvbar, hess)
        grad2 = np.einsum("...ij,...i,...j->...", ginvbar, dw, dw)
        return (self.base.ricci(pts)
                - (hess - dw[..., :, None] * dw[..., None, :])
                - (lap + grad2)[..., None, None] * gbar)

    def scalar_curvature(self, pts):
        u, dw, _ = self._omega_data(pts)
        ginvbar = self.base.inv_metric(pts)
        hess = self._hess_omega(pts)
        lap = np.einsum("...ij,...ij->...", ginvbar, hess)
        grad2 = np.einsum("...ij,...i,...j->...", ginvbar, dw, dw)
        return (self.base.scalar_curvature(pts) - 4.0 * lap - 2.0 * grad2) / u ** 4


# ---------------------------------------------------------------------------
# finite-difference cross-check oracles (4th-order central stencils)
#
# These are the documented fallback mode: they rebuild metric derivatives,
# Christoffels, Ricci and scalar curvature from point evaluations of the
# metric alone, so any slip in the analytic closed forms above shows up as a
# disagreement larger than the h^4 truncation error.

_FD4_OFFSETS = (-2, -1, 1, 2)
_FD4_WEIGHTS = (1.0 / 12.0, -2.0 / 3.0, 2.0 / 3.0, -1.0 / 12.0)


def fd_metric_derivative(metric_fn, pts, h=1e-3):
    """D[..., k, i, j] = partial_k g_ij by 4th-order central differences."""
    pts = np.asarray(pts, float)
    out = np.zeros(pts.shape[:-1] + (3, 3, 3))
    for k in range(3):
        acc = 0.0
        for off, w in zip(_FD4_OFFSETS, _FD4_WEIGHTS):
            q = pts.copy()
            q[..., k] += off * h
            acc = acc + w * metric_fn(q)
        out[..., k, :, :] = acc / h
    return out


def _fd_christoffel(metric_fn, pts, h):
    g = metric_fn(pts)
    ginv = np.linalg.inv(g)
    D = fd_metric_derivative(metric_fn, pts, h)
    S = (np.einsum("...ijl->...ijl", D) + np.einsum("...jil->...ijl", D)
         - np.einsum("...lij->...ijl", D))
    return 0.5 * np.einsum("...kl,...ijl->...kij", ginv, S)


def fd_curvature(metric_fn, pts, h=1e-3):
    """(Gamma, Ricci, scalar) from point evaluations of the metric only."""
    pts = np.asarray(pts, float)
    G = _fd_christoffel(metric_fn, pts, h)
    dG = np.zeros(pts.shape[:-1] + (3, 3, 3, 3))
    for a in range(3):
        acc = 0.0
        for off, w in zip(_FD4_OFFSETS, _FD4_WEIGHTS):
            q = pts.copy()
            q[..., a] += off * h
            acc = acc + w * _fd_christoffel(metric_fn, q, h)
        dG[..., a, :, :, :] = acc / h
    ricci = (np.einsum("...kkij->...ij", dG) - np.einsum("...ikkj->...ij", dG)
             + np.einsum("...kkl,...lij->...ij", G, G)
             - np.einsum("...kil,...lkj->...ij", G, G))
    scalar = np.einsum("...ij,...ij->...", np.linalg.inv(metric_fn(pts)), ricci)
    return G, ricci, scalar
