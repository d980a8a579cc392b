"""Tuple-level kernels of the modified-energy hierarchy.

All kernels act on zero-sum frequency tuples. The chain is

    M3 = -i [m(x1) m(x2+x3) (x2+x3)]_sym      (= (i/3) sum m^2(xi) xi)
    sigma3 = -M3 / (h3 - v3)
    M4 = -(3i/2) [sigma3(x1,x2,x3+x4) (x3+x4)]_sym
    sigma4 = -M4 / (h4 - v4)
    M5 = -2i [sigma4(x1,x2,x3,x4+x5) (x4+x5)]_sym

with the symmetrization carrying the 1/k! normalizer, so the lattice
derivative identities hold with no stray constants. ``h_k - v_k`` is
always evaluated in the factored (product) form, which cancels the
rounding blowup of raw power sums when a pair sum is small.

Exactly-zero denominators are removable; they are resolved by a
one-dimensional in-hyperplane limit with Richardson extrapolation, along
a direction that moves only the vanishing factor(s).

An optional band cutoff makes the kernels match a dealiased Galerkin
evolution exactly: pair sums beyond the cutoff then carry weight zero in
M4 and M5, mirroring the projection inside the discrete nonlinearity.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "h_v_eval",
    "power_sum_identity_check",
    "EnergyMultipliers",
]


def h_v_eval(freqs, disp):
    """``(h_k, v_k) = (i*mu*sum xi^3, i*sum xi^5)`` for a zero-sum tuple.

    ``freqs`` has the tuple on its last axis.
    """
    x = np.asarray(freqs, dtype=np.float64)
    h = 1j * disp.mu * np.sum(x ** 3, axis=-1)
    v = 1j * np.sum(x ** 5, axis=-1)
    return h, v


def _pair_products(x):
    p12 = x[..., 0] + x[..., 1]
    p13 = x[..., 0] + x[..., 2]
    p23 = x[..., 1] + x[..., 2]
    return p12, p13, p23


def power_sum_identity_check(freqs):
    """Max relative gap between power sums and their factored forms.

    For zero-sum triples: ``sum xi^3 = 3 x1 x2 x3`` and
    ``sum xi^5 = (5/2) x1 x2 x3 sum xi^2``; for zero-sum quadruples:
    ``sum xi^3 = -3 (x1+x2)(x1+x3)(x2+x3)`` and
    ``sum xi^5 = -(5/2)(x1+x2)(x1+x3)(x2+x3) sum xi^2``.
    """
    x = np.asarray(freqs, dtype=np.float64)
    k = x.shape[-1]
    cubes = np.sum(x ** 3, axis=-1)
    quints = np.sum(x ** 5, axis=-1)
    squares = np.sum(x ** 2, axis=-1)
    if k == 3:
        prod = x[..., 0] * x[..., 1] * x[..., 2]
        fc = 3.0 * prod
        fq = 2.5 * prod * squares
    elif k == 4:
        p12, p13, p23 = _pair_products(x)
        prod = p12 * p13 * p23
        fc = -3.0 * prod
        fq = -2.5 * prod * squares
    else:
        raise ValueError("factored forms exist for k = 3 and k = 4 only")
    scale_c = np.maximum(np.abs(cubes), np.abs(fc)) + np.sum(np.abs(x) ** 3, axis=-1)
    scale_q = np.maximum(np.abs(quints), np.abs(fq)) + np.sum(np.abs(x) ** 5, axis=-1)
    rel_c = np.abs(cubes - fc) / scale_c
    rel_q = np.abs(quints - fq) / scale_q
    return float(np.max(np.maximum(rel_c, rel_q)))


def _richardson(f, cols, direction, step):
    """Even-in-eps average of ``f`` at +-step, +-step/2, extrapolated."""
    def shifted(eps):
        args = [c + eps * d for c, d in zip(cols, direction)]
        return f(*args)

    g1 = 0.5 * (shifted(step) + shifted(-step))
    g2 = 0.5 * (shifted(0.5 * step) + shifted(-0.5 * step))
    return (4.0 * g2 - g1) / 3.0


@dataclass(frozen=True)
class EnergyMultipliers:
    """Kernel family for a fixed smoothing multiplier and dispersion.

    ``band_cutoff`` (a frequency, or None) activates the Galerkin-exact
    variant described in the module docstring. ``limit_step`` is the base
    displacement of the removable-singularity limit, in frequency units.
    """

    mult: object
    disp: object
    band_cutoff: float = None
    limit_step: float = 1e-3

    # -- helpers -------------------------------------------------------

    def _band(self, s):
        if self.band_cutoff is None:
            return 1.0
        return (np.abs(s) <= self.band_cutoff).astype(np.float64)

    def _m2x(self, x):
        return self.mult.m2(x) * x

    # -- cubic level ----------------------------------------------------

    def m3(self, x1, x2, x3):
        """Symmetrized cubic multiplier on the zero-sum hyperplane."""
        return (1j / 3.0) * (self._m2x(x1) + self._m2x(x2) + self._m2x(x3))

    def hv3(self, x1, x2, x3):
        """Factored ``h3 - v3 = -(5i/2) x1 x2 x3 (sum xi^2 - 6 mu/5)``."""
        squares = x1 * x1 + x2 * x2 + x3 * x3
        return -2.5j * (x1 * x2 * x3) * (squares - 1.2 * self.disp.mu)

    def sigma3(self, x1, x2, x3):
        """Cancellation multiplier ``-M3/(h3 - v3)``; zero below threshold,
        removable zero-frequency points resolved by the limit policy."""
        x1 = np.atleast_1d(np.asarray(x1, dtype=np.float64))
        x2 = np.atleast_1d(np.asarray(x2, dtype=np.float64))
        x3 = np.atleast_1d(np.asarray(x3, dtype=np.float64))
        x1, x2, x3 = np.broadcast_arrays(x1, x2, x3)
        N = self.mult.threshold
        below = (np.abs(x1) <= N) & (np.abs(x2) <= N) & (np.abs(x3) <= N)
        prod = x1 * x2 * x3
        singular = (prod == 0.0) & ~below
        out = np.zeros(x1.shape, dtype=np.complex128)
        ok = ~below & ~singular
        if np.any(ok):
            num = self.m3(x1[ok], x2[ok], x3[ok])
            out[ok] = -num / self.hv3(x1[ok], x2[ok], x3[ok])
        if np.any(singular):
            out[singular] = self._sigma3_limit(x1[singular], x2[singular], x3[singular])
        return out

    def _sigma3_regular(self, x1, x2, x3):
        return -self.m3(x1, x2, x3) / self.hv3(x1, x2, x3)

    def _sigma3_limit(self, x1, x2, x3):
        cols = [x1, x2, x3]
        mags = np.stack([np.abs(c) for c in cols])
        zero_slot = np.argmin(mags, axis=0)
        big_slot = np.argmax(mags, axis=0)
        direction = [
            (zero_slot == i).astype(np.float64) - (big_slot == i).astype(np.float64)
            for i in range(3)
        ]
        step = self.limit_step * np.maximum(1.0, mags.max(axis=0))
        return _richardson(self._sigma3_regular, cols, direction, step)

    # -- quartic level ---------------------------------------------------

    def _t_pair(self, xa, xb):
        """``sigma3(xa, xb, -(xa+xb)) * (xa+xb)``, band-masked."""
        s = xa + xb
        return self.sigma3(xa, xb, -s) * s * self._band(s)

    def m4(self, x1, x2, x3, x4):
        """Symmetrized quartic multiplier, as the six-pair sum."""
        total = (
            self._t_pair(x1, x2)
            + self._t_pair(x1, x3)
            + self._t_pair(x1, x4)
            + self._t_pair(x2, x3)
            + self._t_pair(x2, x4)
            + self._t_pair(x3, x4)
        )
        return 0.25j * total

    def m4_grouped(self, x1, x2, x3, x4):
        """Alternate evaluator: the three complementary-pair differences."""
        def bracket(a, b, c, d):
            s = c + d
            inner = self.sigma3(a, b, s) - self.sigma3(-c, -d, s)
            return inner * s * self._band(s)

        total = bracket(x1, x2, x3, x4) + bracket(x1, x3, x2, x4) + bracket(x1, x4, x2, x3)
        return -0.25j * total

    def hv4(self, x1, x2, x3, x4):
        """Factored ``h4 - v4 = i (x1+x2)(x1+x3)(x2+x3) ((5/2) sum xi^2 - 3 mu)``."""
        p12 = x1 + x2
        p13 = x1 + x3
        p23 = x2 + x3
        squares = x1 * x1 + x2 * x2 + x3 * x3 + x4 * x4
        return 1j * p12 * p13 * p23 * (2.5 * squares - 3.0 * self.disp.mu)

    def sigma4(self, x1, x2, x3, x4):
        """``-M4/(h4 - v4)`` with the singular-set limit policy."""
        x1 = np.atleast_1d(np.asarray(x1, dtype=np.float64))
        x2 = np.atleast_1d(np.asarray(x2, dtype=np.float64))
        x3 = np.atleast_1d(np.asarray(x3, dtype=np.float64))
        x4 = np.atleast_1d(np.asarray(x4, dtype=np.float64))
        x1, x2, x3, x4 = np.broadcast_arrays(x1, x2, x3, x4)
        N = self.mult.threshold
        p12 = x1 + x2
        p13 = x1 + x3
        p23 = x2 + x3
        below = (
            (np.abs(x1) <= N)
            & (np.abs(x2) <= N)
            & (np.abs(x3) <= N)
            & (np.abs(x4) <= N)
            & (np.abs(p12) <= N)
            & (np.abs(p13) <= N)
            & (np.abs(p23) <= N)
        )
        z12 = p12 == 0.0
        z13 = p13 == 0.0
        z23 = p23 == 0.0
        singular = (z12 | z13 | z23) & ~below
        out = np.zeros(x1.shape, dtype=np.complex128)
        ok = ~below & ~singular
        if np.any(ok):
            out[ok] = self._sigma4_regular(x1[ok], x2[ok], x3[ok], x4[ok])
        if np.any(singular):
            out[singular] = self._sigma4_limit(
                x1[singular], x2[singular], x3[singular], x4[singular],
                z12[singular], z13[singular], z23[singular],
            )
        return out

    def _sigma4_regular(self, x1, x2, x3, x4):
        return -self.m4(x1, x2, x3, x4) / self.hv4(x1, x2, x3, x4)

    # Direction table: move every vanishing pair factor, fix the others.
    _DIRECTIONS = {
        (True, False, False): (1.0, 1.0, -1.0, -1.0),
        (False, True, False): (1.0, -1.0, 1.0, -1.0),
        (False, False, True): (-1.0, 1.0, 1.0, -1.0),
        (True, True, False): (1.0, 0.0, 0.0, -1.0),
        (True, False, True): (0.0, 1.0, 0.0, -1.0),
        (False, True, True): (1.0, -1.0, 0.0, 0.0),
        (True, True, True): (1.0, 0.0, 0.0, -1.0),
    }

    def _sigma4_limit(self, x1, x2, x3, x4, z12, z13, z23):
        cols = [x1, x2, x3, x4]
        out = np.zeros(x1.shape, dtype=np.complex128)
        keys = np.stack([z12, z13, z23])
        scale = np.maximum(1.0, np.max(np.abs(np.stack(cols)), axis=0))
        for key, d in self._DIRECTIONS.items():
            sel = (keys[0] == key[0]) & (keys[1] == key[1]) & (keys[2] == key[2])
            if not np.any(sel):
                continue
            sub = [c[sel] for c in cols]
            direction = [np.full(sub[0].shape, di) for di in d]
            out[sel] = _richardson(
                self._sigma4_regular, sub, direction, self.limit_step * scale[sel]
            )
        return out

    # -- quintic level ----------------------------------------------------

    def m5(self, x1, x2, x3, x4, x5):
        """Symmetrized quintic multiplier: ten pair groupings of sigma4."""
        cols = [
            np.atleast_1d(np.asarray(c, dtype=np.float64)) for c in (x1, x2, x3, x4, x5)
        ]
        cols = list(np.broadcast_arrays(*cols))
        total = np.zeros(cols[0].shape, dtype=np.complex128)
        idx = range(5)
        for a in idx:
            for b in idx:
                if b <= a:
                    continue
                rest = [i for i in idx if i not in (a, b)]
                s = cols[a] + cols[b]
                total = total + (
                    self.sigma4(cols[rest[0]], cols[rest[1]], cols[rest[2]], s)
                    * s
                    * self._band(s)
                )
        return -0.2j * total
