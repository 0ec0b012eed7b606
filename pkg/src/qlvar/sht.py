"""Scalar spherical-harmonic transforms on Gauss-Legendre x Fourier grids.

Polar nodes are the Gauss-Legendre abscissae in x = cos(theta) (never the
poles), azimuthal nodes are uniform.  Fields sampled there are analyzed into
orthonormalized associated-Legendre coefficients

    F(theta, phi) = sum_{m,l} a_lm  Pbar_lm(cos theta) e^{i m phi},

with Pbar normalized so that  integral_{-1}^{1} Pbar_lm Pbar_l'm dx = delta.
Analysis uses the Gauss-Legendre weights (exact for band-limited fields since
Pbar_lm Pbar_l'm is a polynomial of degree l + l' <= 2 n_theta - 2), synthesis
evaluates the series and its theta/phi derivatives pointwise through stable
recurrences:

    dPbar_lm/dtheta  = (l x Pbar_lm - e_lm Pbar_{l-1,m}) / sin(theta),
    e_lm = sqrt((l^2 - m^2)(2l+1)/(2l-1)),
    d^2Pbar/dtheta^2 = -cot(theta) dPbar/dtheta - (l(l+1) - m^2/sin^2) Pbar.

Everything is exact (to round-off) for band-limited input and spectrally
accurate for smooth fields; the test suite pins this via Laplacian eigenvalue
and round-trip checks.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

__all__ = ["SphereTransform", "get_transform", "LegendreSeries"]


def _assoc_legendre_tables(lmax: int, mmax: int, x: np.ndarray):
    """Pbar and dPbar/dtheta tables of shape (mmax+1, lmax+1, len(x)).

    Entries with l < m are zero.  x must lie strictly inside (-1, 1).
    """
    nt = len(x)
    sin_t = np.sqrt(1.0 - x * x)
    P = np.zeros((mmax + 1, lmax + 1, nt))
    P[0, 0] = 1.0 / math.sqrt(2.0)
    for m in range(1, mmax + 1):
        P[m, m] = -math.sqrt((2 * m + 1) / (2.0 * m)) * sin_t * P[m - 1, m - 1]
    for m in range(mmax + 1):
        if m + 1 <= lmax:
            P[m, m + 1] = math.sqrt(2 * m + 3.0) * x * P[m, m]
        for l in range(m + 2, lmax + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            P[m, l] = a * (x * P[m, l - 1] - b * P[m, l - 2])

    dP = np.zeros_like(P)
    for m in range(mmax + 1):
        for l in range(m, lmax + 1):
            if l == 0:
                continue
            e = math.sqrt((l * l - m * m) * (2.0 * l + 1.0) / (2.0 * l - 1.0))
            prev = P[m, l - 1] if l - 1 >= m else 0.0
            dP[m, l] = (l * x * P[m, l] - e * prev) / sin_t
    return P, dP


class SphereTransform:
    """Forward/inverse transforms with derivative synthesis on one grid."""

    def __init__(self, n_theta: int, n_phi: int):
        if n_theta < 4 or n_phi < 4:
            raise ValueError("grid must be at least 4 x 4")
        self.n_theta = int(n_theta)
        self.n_phi = int(n_phi)
        xs, ws = roots_legendre(self.n_theta)
        # theta ascending from the north pole <=> x descending
        self.x = xs[::-1].copy()
        self.weights_x = ws[::-1].copy()
        self.theta = np.arccos(self.x)
        self.sin_theta = np.sqrt(1.0 - self.x ** 2)
        self.phi = 2.0 * math.pi * np.arange(self.n_phi) / self.n_phi
        self.lmax = self.n_theta - 1
        self.mmax = min(self.lmax, (self.n_phi - 1) // 2)
        P, dP = _assoc_legendre_tables(self.lmax, self.mmax, self.x)
        self._P = P
        self._dP = dP
        cot = self.x / self.sin_theta
        ells = np.arange(self.lmax + 1)
        ms = np.arange(self.mmax + 1)
        ll1 = (ells * (ells + 1.0))[None, :, None]
        m2s = (ms ** 2)[:, None, None] / (self.sin_theta ** 2)[None, None, :]
        self._d2P = -cot[None, None, :] * dP - (ll1 - m2s) * P
        # analysis operator folds the quadrature weights in
        self._Pw = P * self.weights_x[None, None, :]

    # -- transforms ----------------------------------------------------------

    def analyze(self, field: np.ndarray) -> np.ndarray:
        """Coefficients a[..., m, l] of a real field sampled as (..., nt, nphi)."""
        field = np.asarray(field, float)
        fm = np.fft.rfft(field, axis=-1) / self.n_phi
        fm = fm[..., : self.mmax + 1]
        return np.einsum("...im,mli->...ml", fm, self._Pw)

    def _synth_from_modes(self, gm: np.ndarray) -> np.ndarray:
        spec = np.zeros(gm.shape[:-1] + (self.n_phi // 2 + 1,), complex)
        spec[..., : self.mmax + 1] = gm
        return np.fft.irfft(spec * self.n_phi, n=self.n_phi, axis=-1)

    def synth(self, coeffs: np.ndarray, dtheta: int = 0, dphi: int = 0) -> np.ndarray:
        """Evaluate the series (or its derivative) back on the grid."""
        tab = {0: self._P, 1: self._dP, 2: self._d2P}[dtheta]
        c = coeffs
        if dphi:
            ms = np.arange(self.mmax + 1)
            c = c * (1j * ms[:, None]) ** dphi
        gm = np.einsum("...ml,mli->...im", c, tab)
        return self._synth_from_modes(gm)

    # -- convenience: all derivatives of one field in one analysis -----------

    def derivatives(self, field: np.ndarray):
        """(F, F_theta, F_phi, F_tt, F_tp, F_pp) synthesized from one analysis.

        The returned F is the band-limited projection of the input; for
        resolved smooth fields it matches the samples to round-off.
        """
        a = self.analyze(field)
        return (self.synth(a), self.synth(a, 1, 0), self.synth(a, 0, 1),
                self.synth(a, 2, 0), self.synth(a, 1, 1), self.synth(a, 0, 2))

    def integrate_round(self, field: np.ndarray) -> float:
        """Integral against the unit-round-sphere measure sin(theta) dtheta dphi."""
        w = self.weights_x[:, None] * (2.0 * math.pi / self.n_phi)
        return float(np.sum(field * w, axis=(-2, -1)))


@lru_cache(maxsize=32)
def get_transform(n_theta: int, n_phi: int) -> SphereTransform:
    return SphereTransform(n_theta, n_phi)


# ---------------------------------------------------------------------------
# 1-D Legendre series for axisymmetric profiles


class LegendreSeries:
    """Orthonormal-Legendre representation of a smooth function of theta.

    Built from samples at the Gauss-Legendre theta nodes; evaluable (with
    first and second theta-derivatives) at arbitrary interior theta, and at
    the poles through the regular limits

        Pbar_l(+-1) = (+-1)^l sqrt((2l+1)/2),   dPbar/dtheta = 0,
        d2Pbar/dtheta2 = -(+-1)^l (l(l+1)/2) sqrt((2l+1)/2).
    """

    def __init__(self, coeffs: np.ndarray):
        self.coeffs = np.asarray(coeffs, float)
        self.lmax = len(self.coeffs) - 1

    @classmethod
    def fit(cls, theta_nodes_values: np.ndarray, transform: SphereTransform):
        """Fit from samples at transform.theta (Gauss-Legendre nodes)."""
        vals = np.asarray(theta_nodes_values, float)
        Pw = transform._Pw[0]  # (lmax+1, nt), m = 0
        return cls(Pw @ vals)

    def _tables(self, theta):
        theta = np.asarray(theta, float)
        x = np.cos(theta)
        sin_t = np.sin(theta)
        L = self.lmax
        P = np.zeros((L + 1,) + x.shape)
        P[0] = 1.0 / math.sqrt(2.0)
        if L >= 1:
            P[1] = math.sqrt(1.5) * x
        for l in range(2, L + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l))
            b = (l - 1.0) / math.sqrt(4.0 * (l - 1.0) ** 2 - 1.0)
            P[l] = a * (x * P[l - 1] - b * P[l - 2])
        dP = np.zeros_like(P)
        with np.errstate(divide="ignore", invalid="ignore"):
            for l in range(1, L + 1):
                e = l * math.sqrt((2.0 * l + 1.0) / (2.0 * l - 1.0))
                dP[l] = (l * x * P[l] - e * P[l - 1]) / sin_t
        return P, dP, x, sin_t

    def value(self, theta):
        P, _, _, _ = self._tables(theta)
        return np.einsum("l,l...->...", self.coeffs, P)

    def dtheta(self, theta):
        _, dP, _, _ = self._tables(theta)
        return np.einsum("l,l...->...", self.coeffs, dP)

    def d2theta(self, theta):
        P, dP, x, sin_t = self._tables(theta)
        ells = np.arange(self.lmax + 1, dtype=float)
        cot = x / sin_t
        ll1 = (ells * (ells + 1.0)).reshape((self.lmax + 1,) + (1,) * np.ndim(x))
        d2P = -cot[None] * dP - ll1 * P
        return np.einsum("l,l...->...", self.coeffs, d2P)

    def pole_value(self, south: bool = False) -> float:
        ells = np.arange(self.lmax + 1)
        sign = (-1.0) ** ells if south else np.ones(self.lmax + 1)
        return float(np.sum(self.coeffs * sign * np.sqrt((2 * ells + 1) / 2.0)))

    def pole_d2theta(self, south: bool = False) -> float:
        ells = np.arange(self.lmax + 1)
        sign = (-1.0) ** ells if south else np.ones(self.lmax + 1)
        fac = -ells * (ells + 1) / 2.0 * np.sqrt((2 * ells + 1) / 2.0)
        return float(np.sum(self.coeffs * sign * fac))
