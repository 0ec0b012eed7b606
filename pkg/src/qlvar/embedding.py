"""Constructive isometric embedding of axisymmetric sphere metrics.

Given a smooth metric  E(theta) dtheta^2 + G(theta) dphi^2  on S^2, find a
surface of revolution (rho(theta), psi(theta)) in a static model space whose
induced metric matches it.  Matching the azimuthal coefficient fixes

    rho sin(psi) = R(theta),   R := sqrt(G),

and the polar coefficient then forces a quadratic in psi':

    A psi'^2 + B psi' + C = 0,
    A = (R^2/sin^2 psi) (cos^2 psi / (F sin^2 psi) + 1),
    B = -2 R R' cos(psi) / (F sin^3 psi),
    C = R'^2 / (F sin^2 psi) - E,          F = 1 - 2m/rho.

The larger root (convex branch, psi' > 0; it equals 1 on round spheres) is
integrated from the north pole, where a two-term regular series in theta
seeds the solve.  The single free parameter rho(0) is fixed by shooting on
south-pole (or equatorial, for symmetric data) closure.  A negative
discriminant means the convex embedding stops existing; crossing the horizon
radius is likewise fatal.  Both conditions are monitored as ODE events.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import (DegenerateMetric, HorizonCrossing, PointInsideHorizon,
                     PoleRegularityFailure, SolvabilityLost)
from .sht import LegendreSeries, get_transform
from .surface import AxiProfile, SphereGrid

__all__ = ["AxiMetric", "EmbeddingResult", "embed_round", "embed_axisymmetric",
           "embedding_residual"]


def _std_coeffs(series: LegendreSeries) -> np.ndarray:
    """Rescale orthonormal-Legendre coefficients to the standard convention."""
    ells = np.arange(series.lmax + 1)
    return series.coeffs * np.sqrt((2 * ells + 1) / 2.0)


@dataclass(frozen=True)
class AxiMetric:
    """Axisymmetric metric on S^2: E dtheta^2 + G dphi^2, held spectrally.

    G is stored as the regularized profile G/sin^2(theta), which extends
    smoothly over the poles; pole regularity of the metric itself requires
    its pole limit to agree with E there.
    """

    E: LegendreSeries
    G_reg: LegendreSeries
    n_theta: int

    @classmethod
    def from_samples(cls, E_vals, G_vals, transform, *,
                     pole_tol: float = 1e-6) -> "AxiMetric":
        E_vals = np.asarray(E_vals, float)
        G_vals = np.asarray(G_vals, float)
        if np.any(E_vals <= 0) or np.any(G_vals <= 0):
            raise DegenerateMetric("metric coefficients must be positive")
        Greg = G_vals / np.sin(transform.theta) ** 2

        def clean(series):
            # zero sub-roundoff coefficients: keeps constant and band-limited
            # profiles exactly representable instead of noise-polluted
            cut = 32 * np.finfo(float).eps * np.max(np.abs(series.coeffs))
            series.coeffs[np.abs(series.coeffs) < cut] = 0.0
            return series

        metric = cls(E=clean(LegendreSeries.fit(E_vals, transform)),
                     G_reg=clean(LegendreSeries.fit(Greg, transform)),
                     n_theta=transform.n_theta)
        scale = float(np.max(E_vals))
        for south in (False, True):
            e0 = metric.E.pole_value(south)
            g0 = metric.G_reg.pole_value(south)
            if abs(g0 - e0) > pole_tol * scale:
                raise PoleRegularityFailure(
                    f"G/sin^2 -> {g0:.6g} but E -> {e0:.6g} at the "
                    f"{'south' if south else 'north'} pole")
        return metric

    @classmethod
    def from_functions(cls, E_fn, G_fn, n_theta: int = 32, **kw) -> "AxiMetric":
        tr = get_transform(n_theta, 2 * n_theta)
        return cls.from_samples(E_fn(tr.theta), G_fn(tr.theta), tr, **kw)

    @classmethod
    def from_geometry(cls, geom, *, axi_tol: float = 1e-8, **kw) -> "AxiMetric":
        """Extract the (E, G) profiles from an axisymmetric SurfaceGeometry."""
        gam = geom.metric
        scale = float(np.max(np.abs(gam)))
        wobble = max(float(np.max(np.ptp(gam[..., 0, 0], axis=1))),
                     float(np.max(np.ptp(gam[..., 1, 1], axis=1))),
                     float(np.max(np.abs(gam[..., 0, 1]))))
        if wobble > axi_tol * scale:
            raise ValueError("surface metric is not axisymmetric "
                             f"(wobble {wobble:.3g} exceeds {axi_tol:.3g}*scale)")
        tr = geom.grid.transform
        return cls.from_samples(gam[..., 0, 0].mean(axis=1),
                                gam[..., 1, 1].mean(axis=1), tr, **kw)

    # -- fast pointwise evaluation (Clenshaw on standard Legendre coeffs) ----

    @cached_property
    def _cE(self):
        return _std_coeffs(self.E)

    @cached_property
    def _cG(self):
        return _std_coeffs(self.G_reg)

    @cached_property
    def _cG_deriv(self):
        return npleg.legder(self._cG)

    def E_at(self, theta):
        return npleg.legval(np.cos(theta), self._cE)

    def G_at(self, theta):
        return npleg.legval(np.cos(theta), self._cG) * np.sin(theta) ** 2

    def radius_profile(self, theta):
        """R = sqrt(G) and dR/dtheta."""
        x = np.cos(theta)
        s = np.sin(theta)
        g = npleg.legval(x, self._cG)
        dg = -s * npleg.legval(x, self._cG_deriv)
        root = np.sqrt(g)
        return s * root, x * root + s * dg / (2.0 * root)

    def is_symmetric(self, tol: float = 1e-9) -> bool:
        """True when both profiles are even about the equator."""
        scale = max(np.max(np.abs(self.E.coeffs)), np.max(np.abs(self.G_reg.coeffs)))
        odd_e = np.max(np.abs(self.E.coeffs[1::2]), initial=0.0)
        odd_g = np.max(np.abs(self.G_reg.coeffs[1::2]), initial=0.0)
        return max(odd_e, odd_g) <= tol * scale

    def pole_data(self, south: bool = False):
        """(E0, E2, R1, R3) of the regular pole expansions E = E0 + E2 u^2,
        R = R1 u + R3 u^3 in the distance u from the pole."""
        E0 = self.E.pole_value(south)
        E2 = self.E.pole_d2theta(south) / 2.0
        G0 = self.G_reg.pole_value(south)
        g0 = math.sqrt(G0)
        g2 = self.G_reg.pole_d2theta(south) / (4.0 * g0)
        return E0, E2, g0, g2 - g0 / 6.0


@dataclass
class EmbeddingResult:
    profile: AxiProfile
    residual: float
    solver_report: dict


def embed_round(area_radius: float, space) -> AxiProfile:
    """The coordinate sphere of a given areal radius, as a profile."""
    if area_radius <= 2.0 * space.mass:
        raise PointInsideHorizon(
            f"areal radius {area_radius} is inside the horizon 2m = {2 * space.mass}")
    return AxiProfile.round_sphere(area_radius)


class _Shot:
    """One integration of the profile ODE for a trial pole radius."""

    def __init__(self, metric: AxiMetric, space, rho0: float, theta_start: float,
                 theta_end: float, ode_rtol: float, eps_h: float):
        m = space.mass
        E0, E2, R1, R3 = metric.pole_data(south=False)
        c1 = R1 / rho0
        F0 = (rho0 - 2.0 * m) / rho0
        aq = 4.0 / F0
        bq = -4.0 * rho0 * c1 ** 2
        cq = 6.0 * rho0 * c1 * R3 + rho0 ** 2 * c1 ** 4 - E2
        rad = bq * bq - 4.0 * aq * cq
        if rad < 0:
            raise SolvabilityLost("no regular pole expansion (series radicand "
                                  "negative)", theta=0.0, radicand=rad)
        rho2 = (-bq - math.sqrt(rad)) / (2.0 * aq)
        c3 = (R3 - rho2 * c1 + rho0 * c1 ** 3 / 6.0) / rho0
        self.series = (c1, c3, rho0, rho2)
        self.rhs_evals = 0

        def pieces(theta, psi):
            # The raw discriminant B^2 - 4AC cancels catastrophically near the
            # poles (both terms ~ 1/theta^4); the factored form
            #   disc = 4 R^2 S / (F sin^4 psi),  S = E (cos^2 + F sin^2) - R'^2
            # is exact and numerically stable, and S is the natural
            # solvability scalar to monitor.
            R, Rp = metric.radius_profile(theta)
            E = metric.E_at(theta)
            sp, cp = math.sin(psi), math.cos(psi)
            rho = R / sp
            F = (rho - 2.0 * m) / rho
            S = E * (cp * cp + F * sp * sp) - Rp * Rp
            A = (R * R / sp ** 2) * (cp * cp / (F * sp * sp) + 1.0)
            B = -2.0 * R * Rp * cp / (F * sp ** 3)
            disc = 4.0 * R * R * S / (F * sp ** 4)
            return rho, A, B, S, disc

        def rhs(theta, y):
            self.rhs_evals += 1
            _, A, B, _, disc = pieces(theta, y[0])
            return [(-B + math.sqrt(max(disc, 0.0))) / (2.0 * A)]

        def ev_disc(theta, y):
            return pieces(theta, y[0])[3]

        def ev_horizon(theta, y):
            return pieces(theta, y[0])[0] - (2.0 * m + eps_h)

        ev_disc.terminal, ev_disc.direction = True, -1.0
        ev_horizon.terminal, ev_horizon.direction = True, -1.0
        events = (ev_disc, ev_horizon) if m > 0 else (ev_disc,)

        psi_start = c1 * theta_start + c3 * theta_start ** 3
        self.sol = solve_ivp(rhs, (theta_start, theta_end), [psi_start],
                             method="RK45", rtol=ode_rtol, atol=ode_rtol * 1e-2,
                             dense_output=True, events=events)
        self._pieces = pieces
        self.metric = metric

    @property
    def completed(self) -> bool:
        return self.sol.status == 0

    def failure(self):
        """The error this shot ended with, or None."""
        if self.sol.status == 0:
            return None
        if len(self.sol.t_events[0]):
            th = float(self.sol.t_events[0][0])
            psi = float(self.sol.y_events[0][0][0])
            scal = self._pieces(th, psi)[3]
            return SolvabilityLost(
                f"embedding discriminant vanished at theta = {th:.6f}",
                theta=th, radicand=scal)
        th = float(self.sol.t_events[1][0])
        return HorizonCrossing(f"profile reached the horizon at theta = {th:.6f}")

    def end_state(self):
        th = float(self.sol.t[-1])
        psi = float(self.sol.y[0, -1])
        _, A, B, _, disc = self._pieces(th, psi)
        slope = (-B + math.sqrt(max(disc, 0.0))) / (2.0 * A)
        return th, psi, slope


def embed_axisymmetric(metric: AxiMetric, space, tol: float = 1e-8, *,
                       rho_guess: float | None = None,
                       theta_start: float = 1e-5,
                       max_shots: int = 60) -> EmbeddingResult:
    """Solve the axisymmetric isometric-embedding problem by shooting.

    ``tol`` is the acceptable induced-metric mismatch (max norm over both
    coefficients); the ODE and root solves run well below it.
    """
    m = space.mass
    eps_h = 1e-6 * m
    # keep the ODE two orders below the requested metric tolerance
    # (default tol = 1e-8 recovers the solver default rtol = 1e-10)
    ode_rtol = max(tol * 1e-2, 1e-13)
    symmetric = bool(metric.is_symmetric())
    theta_end = math.pi / 2 if symmetric else math.pi - theta_start
    E0 = metric.pole_data(south=False)[0]
    scale = math.sqrt(E0)
    guess = rho_guess if rho_guess is not None else scale
    guess = max(guess, 2.0 * m + 16.0 * eps_h)
    shots = {"count": 0}

    def mismatch(rho0: float, keep=[None]) -> float:
        shots["count"] += 1
        shot = _Shot(metric, space, rho0, theta_start, theta_end, ode_rtol, eps_h)
        err = shot.failure()
        if err is not None:
            raise err
        keep[0] = shot
        th, psi, slope = shot.end_state()
        if symmetric:
            return psi - math.pi / 2
        return psi + (math.pi - th) * slope - math.pi

    last = [None]

    # find a pole radius whose integration survives to the far end
    a = fa = None
    init_error = None
    for factor in (1.0, 1.02, 0.98, 1.05, 0.95, 1.1, 0.9):
        rho0 = guess * factor
        if rho0 <= 2.0 * m + 4.0 * eps_h:
            continue
        try:
            fa = mismatch(rho0, last)
            a = rho0
            break
        except (SolvabilityLost, HorizonCrossing) as exc:
            if init_error is None:
                init_error = exc
    if a is None:
        raise init_error

    # walk toward the closure root (mismatch decreases with rho0), halving
    # the step whenever a trial radius loses the embedding mid-integration
    lo = hi = None
    if fa == 0.0:
        lo = hi = a
    else:
        direction = 1.0 if fa > 0 else -1.0
        h = 0.05
        walk_error = None
        for _ in range(max_shots):
            b = a * (1.0 + direction * h)
            if b <= 2.0 * m + 4.0 * eps_h:
                h *= 0.5
                continue
            try:
                fb = mismatch(b, last)
            except (SolvabilityLost, HorizonCrossing) as exc:
                walk_error = exc
                h *= 0.5
                if h < 1e-12:
                    raise walk_error
                continue
            if fb == 0.0 or (fb > 0) != (fa > 0):
                lo, hi = sorted((a, b))
                break
            a, fa = b, fb
            h = min(h * 1.6, 0.4)
        if lo is None:
            raise walk_error if walk_error is not None else SolvabilityLost(
                "no pole radius closes the profile at the far pole",
                theta=theta_end, radicand=float("nan"))

    if lo == hi:
        rho_pole = lo
    else:
        rho_pole = brentq(lambda r: mismatch(r, last), lo, hi,
                          xtol=1e-14 * scale, rtol=8.9e-16,
                          maxiter=max_shots)
    mismatch(rho_pole, last)  # regenerate the dense solution exactly at the root
    shot = last[0]

    # post-hoc convexity audit: the solvability scalar S must stay positive
    # away from the poles (it vanishes there quadratically by regularity); a
    # tangential dip to zero between ODE steps produces a kinked, non-convex
    # closure that the terminal event cannot see
    th_hi = float(shot.sol.t[-1])
    th_dense = np.linspace(0.02, th_hi - 1e-3, 600)
    psi_dense = shot.sol.sol(th_dense)[0]
    R_d, Rp_d = metric.radius_profile(th_dense)
    E_d = metric.E_at(th_dense)
    sp_d, cp_d = np.sin(psi_dense), np.cos(psi_dense)
    F_d = 1.0 - 2.0 * m * sp_d / R_d
    S_d = E_d * (cp_d ** 2 + F_d * sp_d ** 2) - Rp_d ** 2
    i_min = int(np.argmin(S_d))
    if S_d[i_min] <= 1e-7 * E0:
        raise SolvabilityLost(
            "convex embedding branch degenerates in the interior "
            f"(solvability scalar {S_d[i_min]:.3e} at theta = {th_dense[i_min]:.4f})",
            theta=float(th_dense[i_min]), radicand=float(S_d[i_min]))

    profile = _profile_from_shot(metric, shot, symmetric, theta_start)
    residual = embedding_residual(profile, metric, space)
    n_steps = int(shot.sol.t.size - 1)
    rejected = max(0, round((shot.sol.nfev - 1) / 6) - n_steps)
    report = {
        "rho_pole": float(rho_pole),
        "symmetric": symmetric,
        "shots": shots["count"],
        "ode_steps": n_steps,
        "ode_rejected_steps": int(rejected),
        "rhs_evals": int(shot.rhs_evals),
        "bracket": (float(lo), float(hi)),
    }
    if residual > tol:
        raise SolvabilityLost(
            f"converged profile misses the target metric: residual "
            f"{residual:.3e} > tol {tol:.3e}", theta=float("nan"),
            radicand=float("nan"))
    return EmbeddingResult(profile=profile, residual=residual,
                           solver_report=report)


def _profile_from_shot(metric: AxiMetric, shot: _Shot, symmetric: bool,
                       theta_start: float) -> AxiProfile:
    c1, c3, rho0, rho2 = shot.series
    sol = shot.sol
    th_lo = sol.t[0]
    th_hi = sol.t[-1]
    th_end, psi_end, slope_end = shot.end_state()

    def psi_core(th):
        """psi on [0, th_hi]: pole series below the ODE start, dense output above."""
        th = np.asarray(th, float)
        out = np.empty_like(th)
        near = th < th_lo
        if np.any(near):
            out[near] = c1 * th[near] + c3 * th[near] ** 3
        if np.any(~near):
            out[~near] = sol.sol(th[~near])[0]
        return out

    if symmetric:
        def psi_bar(th):
            th = np.asarray(th, float)
            north = np.minimum(th, math.pi - th)
            base = psi_core(north)
            return np.where(th <= math.pi / 2, base, math.pi - base)
    else:
        def psi_bar(th):
            th = np.asarray(th, float)
            out = psi_core(np.minimum(th, th_hi))
            tail = th > th_hi
            if np.any(tail):
                out[tail] = psi_end + slope_end * (th[tail] - th_end)
            return out

    def rho(th):
        th = np.asarray(th, float)
        u = np.minimum(th, math.pi - th)
        near = u < max(th_lo, 1e-7)
        out = np.empty_like(th)
        if np.any(~near):
            R, _ = metric.radius_profile(th[~near])
            out[~near] = R / np.sin(psi_bar(th[~near]))
        if np.any(near):
            out[near] = rho0 + rho2 * u[near] ** 2  # symmetric handled below
        return out

    if not symmetric:
        # near the south pole of an asymmetric profile, fall back on R/sin(psi)
        def rho_asym(th):
            th = np.asarray(th, float)
            near = th < max(th_lo, 1e-7)
            out = np.empty_like(th)
            if np.any(~near):
                R, _ = metric.radius_profile(th[~near])
                out[~near] = R / np.sin(psi_bar(th[~near]))
            if np.any(near):
                out[near] = rho0 + rho2 * th[near] ** 2
            return out

        return AxiProfile(rho=rho_asym, psi_bar=psi_bar)
    return AxiProfile(rho=rho, psi_bar=psi_bar)


def embedding_residual(profile: AxiProfile, metric: AxiMetric, space,
                       n_phi: int = 8) -> float:
    """Max-norm mismatch between the profile's induced metric and the target.

    The induced metric is recomputed through the full surface-geometry path
    (spectral differentiation of positions), keeping this check independent
    of the embedding solver's internals.
    """
    grid = SphereGrid(metric.n_theta, n_phi)
    geom = profile.surface(grid).geometry(space)
    th = grid.theta
    dE = np.max(np.abs(geom.metric[..., 0, 0] - metric.E_at(th)[:, None]))
    dG = np.max(np.abs(geom.metric[..., 1, 1] - metric.G_at(th)[:, None]))
    dX = np.max(np.abs(geom.metric[..., 0, 1]))
    return float(max(dE, dG, dX))
