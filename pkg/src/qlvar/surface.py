"""Closed 2-surfaces in a curved ambient space, discretized spectrally.

A surface is a smooth map from the unit sphere into the Cartesian chart of an
ambient space, sampled on a Gauss-Legendre x uniform-azimuth grid (which never
touches the coordinate poles).  All label derivatives of the position — and of
derived component fields such as the induced metric — come from the scalar
sphere transform, so the discretization converges spectrally for axisymmetric
data and at high order for generic smooth data.

From the positions and the ambient metric/connection the builder assembles the
first and second fundamental forms, the outward unit normal, mean and Gaussian
curvature, the area measure, and intrinsic operators (Laplacian, covariant
divergence).  Two self-consistency residuals are exposed:

* ``gauss_residual``:  2 K - (R_amb - 2 Ric(nu,nu) + H^2 - |A|^2), which must
  vanish for any surface (the intrinsic K is computed independently from the
  induced metric via the Brioschi determinant formula);
* ``codazzi_residual``: (div_gamma A - dH)(e_a) - Ric(nu, e_a), likewise zero
  in the continuum.

Both are genuine discretization-error meters: nothing in their evaluation
assumes the identities hold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .ambient import point_to_xyz
from .errors import DegenerateMetric, NormalOrientationAmbiguous
from .sht import SphereTransform, get_transform

__all__ = ["SphereGrid", "ParamSurface", "AxiProfile", "SurfaceGeometry"]


@dataclass(frozen=True)
class SphereGrid:
    """Gauss-Legendre (polar) x uniform (azimuth) sampling of the label sphere."""

    n_theta: int = 24
    n_phi: int = 48

    @property
    def transform(self) -> SphereTransform:
        return get_transform(self.n_theta, self.n_phi)

    @property
    def theta(self) -> np.ndarray:
        return self.transform.theta

    @property
    def phi(self) -> np.ndarray:
        return self.transform.phi

    @cached_property
    def theta_mesh(self) -> np.ndarray:
        return np.broadcast_to(self.theta[:, None], (self.n_theta, self.n_phi)).copy()

    @cached_property
    def phi_mesh(self) -> np.ndarray:
        return np.broadcast_to(self.phi[None, :], (self.n_theta, self.n_phi)).copy()

    @cached_property
    def weights(self) -> np.ndarray:
        """Quadrature weights against d(theta-measure) = sin(theta) dtheta dphi.

        They sum to 4 pi exactly (to round-off)."""
        tr = self.transform
        return np.broadcast_to(
            tr.weights_x[:, None] * (2.0 * math.pi / self.n_phi),
            (self.n_theta, self.n_phi)).copy()

    @cached_property
    def unit_directions(self) -> np.ndarray:
        """Unit-sphere directions n(theta, phi), shape (n_theta, n_phi, 3)."""
        st = np.sin(self.theta_mesh)
        return np.stack([st * np.cos(self.phi_mesh),
                         st * np.sin(self.phi_mesh),
                         np.cos(self.theta_mesh)], axis=-1)

    def refined(self, factor: int = 2) -> "SphereGrid":
        return SphereGrid(self.n_theta * factor, self.n_phi * factor)

    def integrate_round(self, field: np.ndarray) -> float:
        return self.transform.integrate_round(field)


class ParamSurface:
    """A sampled closed surface: Cartesian positions indexed by sphere labels."""

    def __init__(self, grid: SphereGrid, positions: np.ndarray):
        positions = np.asarray(positions, float)
        if positions.shape != (grid.n_theta, grid.n_phi, 3):
            raise ValueError(
                f"positions must have shape {(grid.n_theta, grid.n_phi, 3)}, "
                f"got {positions.shape}")
        self.grid = grid
        self.positions = positions

    @classmethod
    def coordinate_sphere(cls, grid: SphereGrid, radius: float) -> "ParamSurface":
        if radius <= 0:
            raise ValueError("radius must be positive")
        return cls(grid, radius * grid.unit_directions)

    @classmethod
    def radial_graph(cls, grid: SphereGrid, radius_fn) -> "ParamSurface":
        """Star-shaped surface r = radius_fn(theta_mesh, phi_mesh)."""
        r = np.asarray(radius_fn(grid.theta_mesh, grid.phi_mesh), float)
        r = np.broadcast_to(r, (grid.n_theta, grid.n_phi))
        return cls(grid, r[..., None] * grid.unit_directions)

    @classmethod
    def axisymmetric(cls, grid: SphereGrid, radius_fn) -> "ParamSurface":
        """Star-shaped axisymmetric surface r = radius_fn(theta)."""
        r = np.broadcast_to(np.asarray(radius_fn(grid.theta), float),
                            (grid.n_theta,))
        return cls.radial_graph(grid, lambda th, ph: r[:, None] * np.ones_like(ph))

    def geometry(self, space) -> "SurfaceGeometry":
        return SurfaceGeometry(space, self)


@dataclass(frozen=True)
class AxiProfile:
    """Axisymmetric surface of revolution: label theta -> (rho, psi) ambient
    polar coordinates, azimuth carried through unchanged.

    ``rho`` and ``psi_bar`` are vectorized callables on (0, pi).  For a
    regular closed surface rho is even about both poles and psi_bar increases
    monotonically from 0 to pi.
    """

    rho: object            # theta -> areal radius
    psi_bar: object        # theta -> ambient polar angle

    @classmethod
    def round_sphere(cls, radius: float) -> "AxiProfile":
        return cls(rho=lambda th: np.full_like(np.asarray(th, float), radius),
                   psi_bar=lambda th: np.asarray(th, float))

    def surface(self, grid: SphereGrid) -> ParamSurface:
        r = np.broadcast_to(np.asarray(self.rho(grid.theta), float),
                            (grid.n_theta,))[:, None]
        psi = np.broadcast_to(np.asarray(self.psi_bar(grid.theta), float),
                              (grid.n_theta,))[:, None]
        xyz = point_to_xyz(r * np.ones((grid.n_theta, grid.n_phi)),
                           psi * np.ones((grid.n_theta, grid.n_phi)),
                           grid.phi_mesh)
        return ParamSurface(grid, xyz)


def _det2(m):
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def _inv2(m, det):
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 1, 1] = m[..., 0, 0]
    out[..., 0, 1] = -m[..., 0, 1]
    out[..., 1, 0] = -m[..., 1, 0]
    return out / det[..., None, None]


class SurfaceGeometry:
    """Fundamental forms and curvature of one surface in one ambient space.

    Everything is evaluated eagerly on construction except the pieces that
    need extra spectral analyses (Gaussian curvature, Codazzi residual,
    intrinsic operators), which are cached on first use.
    """

    def __init__(self, space, surface: ParamSurface):
        self.space = space
        self.surface = surface
        self.grid = surface.grid
        tr = self.grid.transform

        xyz = surface.positions
        comps = np.moveaxis(xyz, -1, 0)           # (3, nt, nphi)
        self._pos_coeffs = tr.analyze(comps)
        d_theta = tr.synth(self._pos_coeffs, 1, 0)
        d_phi = tr.synth(self._pos_coeffs, 0, 1)
        dd_tt = tr.synth(self._pos_coeffs, 2, 0)
        dd_tp = tr.synth(self._pos_coeffs, 1, 1)
        dd_pp = tr.synth(self._pos_coeffs, 0, 2)

        self.position = xyz
        # tangents[..., a, k]: d position^k / d label^a  (a = 0: theta, 1: phi)
        self.tangents = np.stack([np.moveaxis(d_theta, 0, -1),
                                  np.moveaxis(d_phi, 0, -1)], axis=-2)
        second = np.empty(xyz.shape[:2] + (2, 2, 3))
        second[..., 0, 0, :] = np.moveaxis(dd_tt, 0, -1)
        second[..., 0, 1, :] = np.moveaxis(dd_tp, 0, -1)
        second[..., 1, 0, :] = second[..., 0, 1, :]
        second[..., 1, 1, :] = np.moveaxis(dd_pp, 0, -1)

        g = space.metric(xyz)
        ginv = space.inv_metric(xyz)
        gamma = np.einsum("...ai,...ij,...bj->...ab", self.tangents, g,
                          self.tangents)
        det = _det2(gamma)
        if np.any(det <= 0):
            raise DegenerateMetric(
                "induced metric is not positive definite on the grid")
        self.metric = gamma
        self.det = det
        self.inv_metric = _inv2(gamma, det)
        self.area_element = np.sqrt(det)

        # outward unit normal: the Euclidean cross product of the tangents is
        # a covector annihilating the tangent plane; raise and normalize in g
        n_cov = np.cross(self.tangents[..., 0, :], self.tangents[..., 1, :])
        nu = np.einsum("...ij,...j->...i", ginv, n_cov)
        nu_norm = np.sqrt(np.einsum("...i,...i->...", n_cov, nu))
        nu = nu / nu_norm[..., None]
        center = xyz.reshape(-1, 3).mean(axis=0)
        outward = np.einsum("...i,...i->...", nu, xyz - center)
        if np.all(outward > 0):
            pass
        elif np.all(outward < 0):
            nu = -nu
        else:
            raise NormalOrientationAmbiguous(
                "cannot orient the normal consistently outward")
        self.normal = nu

        gamma_amb = space.christoffel(xyz)
        accel = second + np.einsum("...kij,...ai,...bj->...abk", gamma_amb,
                                   self.tangents, self.tangents)
        # A_ab = -g(nu, D_a T_b); round spheres get H > 0 with the outward normal
        self.second_fundamental = -np.einsum("...i,...ij,...abj->...ab",
                                             nu, g, accel)
        self.mean_curvature = np.einsum("...ab,...ab->...", self.inv_metric,
                                        self.second_fundamental)
        self.shear_square = np.einsum(
            "...ac,...bd,...ab,...cd->...", self.inv_metric, self.inv_metric,
            self.second_fundamental, self.second_fundamental)
        self.sigma2 = 0.5 * (self.mean_curvature ** 2 - self.shear_square)

        self.ambient_scalar = space.scalar_curvature(xyz)
        ric = space.ricci(xyz)
        self.ricci_normal_normal = np.einsum("...i,...ij,...j->...", nu, ric, nu)
        self.ricci_normal_tangent = np.einsum("...i,...ij,...aj->...a",
                                              nu, ric, self.tangents)

    # -- integration and intrinsic operators ---------------------------------

    def integrate(self, field) -> float:
        """Integral of a scalar field against the induced area measure."""
        tr = self.grid.transform
        smooth = self.area_element / np.sin(self.grid.theta)[:, None]
        return tr.integrate_round(np.asarray(field, float) * smooth)

    def area(self) -> float:
        return self.integrate(np.ones_like(self.mean_curvature))

    @cached_property
    def _metric_derivs(self):
        """dgam[..., c, a, b] = d gamma_ab / d label^c and its 2nd derivatives."""
        tr = self.grid.transform
        comps = np.stack([self.metric[..., 0, 0], self.metric[..., 0, 1],
                          self.metric[..., 1, 1]])
        c = tr.analyze(comps)
        d_t = tr.synth(c, 1, 0)
        d_p = tr.synth(c, 0, 1)
        d_tt = tr.synth(c, 2, 0)
        d_tp = tr.synth(c, 1, 1)
        d_pp = tr.synth(c, 0, 2)

        def unpack(trip):
            out = np.empty(self.det.shape + (2, 2))
            out[..., 0, 0] = trip[0]
            out[..., 0, 1] = trip[1]
            out[..., 1, 0] = trip[1]
            out[..., 1, 1] = trip[2]
            return out

        dgam = np.stack([unpack(d_t), unpack(d_p)], axis=-3)
        ddgam = np.empty(self.det.shape + (2, 2, 2, 2))
        ddgam[..., 0, 0, :, :] = unpack(d_tt)
        ddgam[..., 0, 1, :, :] = unpack(d_tp)
        ddgam[..., 1, 0, :, :] = unpack(d_tp)
        ddgam[..., 1, 1, :, :] = unpack(d_pp)
        return dgam, ddgam

    @cached_property
    def christoffel(self) -> np.ndarray:
        """Surface connection sG[..., c, a, b] = Gamma^c_ab of the induced metric."""
        dgam, _ = self._metric_derivs
        S = (np.einsum("...abd->...abd", dgam)
             + np.einsum("...bad->...abd", dgam)
             - np.einsum("...dab->...abd", dgam))
        return 0.5 * np.einsum("...cd,...abd->...cab", self.inv_metric, S)

    @cached_property
    def gauss_curvature(self) -> np.ndarray:
        """Intrinsic curvature from the induced metric alone (Brioschi)."""
        dgam, ddgam = self._metric_derivs
        E = self.metric[..., 0, 0]
        F = self.metric[..., 0, 1]
        G = self.metric[..., 1, 1]
        E_u, E_v = dgam[..., 0, 0, 0], dgam[..., 1, 0, 0]
        F_u, F_v = dgam[..., 0, 0, 1], dgam[..., 1, 0, 1]
        G_u, G_v = dgam[..., 0, 1, 1], dgam[..., 1, 1, 1]
        E_vv = ddgam[..., 1, 1, 0, 0]
        G_uu = ddgam[..., 0, 0, 1, 1]
        F_uv = ddgam[..., 0, 1, 0, 1]

        def det3(row0, row1, row2):
            a, b, c = row0
            d, e, f = row1
            g_, h, i = row2
            return a * (e * i - f * h) - b * (d * i - f * g_) + c * (d * h - e * g_)

        m1 = det3((-0.5 * E_vv + F_uv - 0.5 * G_uu, 0.5 * E_u, F_u - 0.5 * E_v),
                  (F_v - 0.5 * G_u, E, F),
                  (0.5 * G_v, F, G))
        m2 = det3((np.zeros_like(E), 0.5 * E_v, 0.5 * G_u),
                  (0.5 * E_v, E, F),
                  (0.5 * G_u, F, G))
        return (m1 - m2) / self.det ** 2

    def scalar_derivatives(self, field):
        """(d_theta u, d_phi u) and second label derivatives of a grid scalar."""
        tr = self.grid.transform
        c = tr.analyze(np.asarray(field, float))
        du = np.stack([tr.synth(c, 1, 0), tr.synth(c, 0, 1)], axis=-1)
        ddu = np.empty(du.shape[:-1] + (2, 2))
        ddu[..., 0, 0] = tr.synth(c, 2, 0)
        ddu[..., 0, 1] = ddu[..., 1, 0] = tr.synth(c, 1, 1)
        ddu[..., 1, 1] = tr.synth(c, 0, 2)
        return du, ddu

    def laplacian(self, field) -> np.ndarray:
        """Laplace-Beltrami of a scalar on the surface."""
        du, ddu = self.scalar_derivatives(field)
        hess = ddu - np.einsum("...cab,...c->...ab", self.christoffel, du)
        return np.einsum("...ab,...ab->...", self.inv_metric, hess)

    def gradient_squared(self, field) -> np.ndarray:
        du, _ = self.scalar_derivatives(field)
        return np.einsum("...ab,...a,...b->...", self.inv_metric, du, du)

    def surface_gradient(self, field) -> np.ndarray:
        """Label components grad^a u = gamma^{ab} d_b u of the intrinsic gradient."""
        du, _ = self.scalar_derivatives(field)
        return np.einsum("...ab,...b->...a", self.inv_metric, du)

    def divergence(self, label_components) -> np.ndarray:
        """Intrinsic divergence of a tangent field given by label components V^a.

        Computed as J^{-1} d_a (J V^a) with J the area density, so that
        div(grad u) reproduces the Laplacian and closed-surface integrals of a
        divergence vanish to quadrature accuracy.
        """
        tr = self.grid.transform
        V = np.asarray(label_components, float)
        flux = self.area_element[..., None] * V
        c = tr.analyze(np.stack([flux[..., 0], flux[..., 1]]))
        d_theta = tr.synth(c, 1, 0)
        d_phi = tr.synth(c, 0, 1)
        return (d_theta[0] + d_phi[1]) / self.area_element

    def tangent_vector(self, label_components) -> np.ndarray:
        """Ambient components of a tangent field given by label components."""
        return np.einsum("...a,...ak->...k", label_components, self.tangents)

    def principal_curvatures(self):
        """Pointwise (kappa_min, kappa_max) of the shape operator."""
        half = 0.5 * self.mean_curvature
        disc = np.sqrt(np.maximum(half ** 2 - self.sigma2, 0.0))
        return half - disc, half + disc

    # -- consistency residuals ------------------------------------------------

    def gauss_residual(self) -> float:
        """max |2K - (R - 2 Ric(nu,nu) + H^2 - |A|^2)| over the grid."""
        rhs = (self.ambient_scalar - 2.0 * self.ricci_normal_normal
               + self.mean_curvature ** 2 - self.shear_square)
        return float(np.max(np.abs(2.0 * self.gauss_curvature - rhs)))

    def codazzi_residual(self) -> float:
        """max gamma-norm of (div A - dH) - Ric(nu, .) over the grid."""
        tr = self.grid.transform
        A = self.second_fundamental
        comps = np.stack([A[..., 0, 0], A[..., 0, 1], A[..., 1, 1]])
        c = tr.analyze(comps)
        d_t = tr.synth(c, 1, 0)
        d_p = tr.synth(c, 0, 1)
        dA = np.empty(self.det.shape + (2, 2, 2))
        for k, trip in ((0, d_t), (1, d_p)):
            dA[..., k, 0, 0] = trip[0]
            dA[..., k, 0, 1] = trip[1]
            dA[..., k, 1, 0] = trip[1]
            dA[..., k, 1, 1] = trip[2]
        sG = self.christoffel
        covA = (dA - np.einsum("...dca,...db->...cab", sG, A)
                - np.einsum("...dcb,...ad->...cab", sG, A))
        divA = np.einsum("...ca,...cab->...b", self.inv_metric, covA)
        dH, _ = self.scalar_derivatives(self.mean_curvature)
        res = divA - dH - self.ricci_normal_tangent
        norm2 = np.einsum("...ab,...a,...b->...", self.inv_metric, res, res)
        return float(np.sqrt(np.max(norm2)))

    # -- ambient potential on the surface -------------------------------------

    def potential_fields(self):
        """(N, dN/dnu) of the ambient static potential along the surface."""
        N, dN = self.space.potential(self.position)
        return N, np.einsum("...i,...i->...", self.normal, dN)
