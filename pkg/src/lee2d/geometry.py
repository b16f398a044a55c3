"""Concrete two-dimensional geometries and their spectral data.

Charts
------
plane       Cartesian ``(x1, x2)``.
torus       fundamental domain ``[0, L1) x [0, L2)``.
sphere      colatitude/longitude ``(theta, phi)`` in ``[0, pi] x [0, 2 pi)``.
hyperbolic  geodesic polar coordinates ``(r, theta)`` about a fixed origin,
            ``r >= 0``, ``theta`` in ``[0, 2 pi)``; sectional curvature ``-1/R**2``.

Points are plain coordinate pairs; arrays of shape ``(..., 2)`` are accepted
wherever a single point is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.special import sph_harm_y

from .errors import DomainError, UnsupportedError


class Kind(str, Enum):
    PLANE = "plane"
    TORUS = "torus"
    SPHERE = "sphere"
    HYPERBOLIC = "hyperbolic"


_ALIASES = {
    "plane": Kind.PLANE,
    "torus": Kind.TORUS,
    "sphere": Kind.SPHERE,
    "hyperbolic": Kind.HYPERBOLIC,
    "hyperbolicplane": Kind.HYPERBOLIC,
    "hyperbolic_plane": Kind.HYPERBOLIC,
}


@dataclass(frozen=True)
class Manifold:
    """A geometry descriptor: kind plus metric parameters.

    Use the ``plane``, ``torus``, ``sphere`` and ``hyperbolic`` constructors
    rather than the raw initialiser.
    """

    kind: Kind
    torus_periods: tuple[float, float] | None = None
    radius: float | None = None

    def __post_init__(self):
        kind = _ALIASES.get(str(getattr(self.kind, "value", self.kind)).lower())
        if kind is None:
            raise DomainError(f"unknown geometry kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind is Kind.TORUS:
            if self.torus_periods is None or len(self.torus_periods) != 2:
                raise DomainError("torus needs two periods (L1, L2)")
            periods = tuple(float(L) for L in self.torus_periods)
            if not all(L > 0 and math.isfinite(L) for L in periods):
                raise DomainError(f"torus periods must be positive, got {periods}")
            object.__setattr__(self, "torus_periods", periods)
        elif self.torus_periods is not None:
            raise DomainError("torus_periods only applies to a torus")
        if kind in (Kind.SPHERE, Kind.HYPERBOLIC):
            if self.radius is None or not (self.radius > 0 and math.isfinite(self.radius)):
                raise DomainError(f"{kind.value} radius must be positive, got {self.radius}")
            object.__setattr__(self, "radius", float(self.radius))
        elif self.radius is not None:
            raise DomainError(f"radius does not apply to a {kind.value}")

    @classmethod
    def plane(cls):
        return cls(Kind.PLANE)

    @classmethod
    def torus(cls, L1: float, L2: float):
        return cls(Kind.TORUS, torus_periods=(L1, L2))

    @classmethod
    def sphere(cls, radius: float = 1.0):
        return cls(Kind.SPHERE, radius=radius)

    @classmethod
    def hyperbolic(cls, radius: float = 1.0):
        return cls(Kind.HYPERBOLIC, radius=radius)

    @property
    def volume(self) -> float:
        if self.kind is Kind.TORUS:
            return self.torus_periods[0] * self.torus_periods[1]
        if self.kind is Kind.SPHERE:
            return 4.0 * math.pi * self.radius**2
        return math.inf

    @property
    def compact(self) -> bool:
        return self.kind in (Kind.TORUS, Kind.SPHERE)

    @property
    def cartan_hadamard(self) -> bool:
        return self.kind in (Kind.PLANE, Kind.HYPERBOLIC)

    @property
    def length_scale(self) -> float:
        """Intrinsic length used to split s-integrals; 1 for the scale-free plane."""
        if self.kind is Kind.TORUS:
            return min(self.torus_periods)
        if self.kind is Kind.PLANE:
            return 1.0
        return self.radius

    def scaled(self, alpha: float) -> "Manifold":
        """The same manifold carrying the metric ``alpha**2 g``."""
        if not alpha > 0:
            raise DomainError(f"scale factor must be positive, got {alpha}")
        if self.kind is Kind.PLANE:
            return self
        if self.kind is Kind.TORUS:
            L1, L2 = self.torus_periods
            return Manifold.torus(alpha * L1, alpha * L2)
        return Manifold(self.kind, radius=alpha * self.radius)

    def describe(self) -> dict:
        out = {"kind": self.kind.value}
        if self.kind is Kind.TORUS:
            out["periods"] = list(self.torus_periods)
        elif self.radius is not None:
            out["radius"] = self.radius
        return out


def scale_point(man: Manifold, x, alpha: float):
    """Image of ``x`` under the isometry ``(man, alpha**2 g) -> man.scaled(alpha)``."""
    x = np.asarray(x, dtype=float)
    if man.kind is Kind.SPHERE:
        return x
    if man.kind is Kind.HYPERBOLIC:
        return np.stack([alpha * x[..., 0], x[..., 1]], axis=-1)
    return alpha * x


def check_point(man: Manifold, x) -> np.ndarray:
    """Validate chart coordinates; returns them as an array of shape (..., 2)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (2,):
        raise DomainError(f"points need two coordinates, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("point coordinates must be finite")
    a, b = x[..., 0], x[..., 1]
    if man.kind is Kind.TORUS:
        L1, L2 = man.torus_periods
        ok = (a >= 0) & (a < L1) & (b >= 0) & (b < L2)
    elif man.kind is Kind.SPHERE:
        ok = (a >= 0) & (a <= math.pi) & (b >= 0) & (b < 2 * math.pi)
    elif man.kind is Kind.HYPERBOLIC:
        ok = (a >= 0) & (b >= 0) & (b < 2 * math.pi)
    else:
        ok = np.ones(a.shape, dtype=bool)
    if not np.all(ok):
        raise DomainError(f"point(s) outside the {man.kind.value} chart: {x[~ok].tolist()}")
    return x


def _wrap(d, period):
    d = np.mod(d, period)
    return np.minimum(d, period - d)


def geodesic_distance(man: Manifold, x, y):
    """Riemannian distance between points (broadcasts over leading axes)."""
    x = check_point(man, x)
    y = check_point(man, y)
    dx0, dx1 = x[..., 0] - y[..., 0], x[..., 1] - y[..., 1]
    if man.kind is Kind.PLANE:
        return np.hypot(dx0, dx1)
    if man.kind is Kind.TORUS:
        L1, L2 = man.torus_periods
        return np.hypot(_wrap(dx0, L1), _wrap(dx1, L2))
    R = man.radius
    if man.kind is Kind.SPHERE:
        hav = np.sin(0.5 * dx0) ** 2 + np.sin(x[..., 0]) * np.sin(y[..., 0]) * np.sin(0.5 * dx1) ** 2
        return 2.0 * R * np.arcsin(np.sqrt(np.clip(hav, 0.0, 1.0)))
    # sinh^2(d/2) = sinh^2((r1-r2)/2) + sinh r1 sinh r2 sin^2(dtheta/2), radii in units of R
    r1, r2 = x[..., 0] / R, y[..., 0] / R
    q = np.sinh(0.5 * (r1 - r2)) ** 2 + np.sinh(r1) * np.sinh(r2) * np.sin(0.5 * dx1) ** 2
    return 2.0 * R * np.arcsinh(np.sqrt(q))


def scaled_eigenvalue(sigma, m: float, chi):
    """Eigenvalue of the Laplacian for the rescaled metric ``2m(2m+chi) g``."""
    chi = np.asarray(chi, dtype=float)
    scale = 2.0 * m * (2.0 * m + chi)
    if m <= 0 or np.any(2.0 * m + chi <= 0):
        raise DomainError("scaled_eigenvalue needs m > 0 and 2m + chi > 0")
    out = np.asarray(sigma, dtype=float) / scale
    return float(out) if out.ndim == 0 else out


# -- spectra -----------------------------------------------------------------


def _real_sph_harm(l: int, theta, phi, radius: float):
    """Real orthonormal spherical harmonics of degree l, shape (2l+1, ...)."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    rows = []
    for mm in range(-l, l + 1):
        y = sph_harm_y(l, abs(mm), theta, phi)
        if mm == 0:
            rows.append(y.real)
        elif mm > 0:
            rows.append(math.sqrt(2.0) * (-1) ** mm * y.real)
        else:
            rows.append(math.sqrt(2.0) * (-1) ** mm * y.imag)
    return np.asarray(rows) / radius


def _torus_basis(kvecs, periods, x):
    """Real orthonormal Fourier basis for one eigenvalue class on the torus."""
    L1, L2 = periods
    V = L1 * L2
    x = np.asarray(x, dtype=float)
    rows = []
    seen = set()
    for k1, k2 in kvecs:
        if (k1, k2) == (0, 0):
            rows.append(np.full(x.shape[:-1], 1.0 / math.sqrt(V)))
            continue
        if (-k1, -k2) in seen:
            continue
        seen.add((k1, k2))
        phase = 2.0 * math.pi * (k1 * x[..., 0] / L1 + k2 * x[..., 1] / L2)
        rows.append(math.sqrt(2.0 / V) * np.cos(phase))
        rows.append(math.sqrt(2.0 / V) * np.sin(phase))
    return np.asarray(rows)


@dataclass(frozen=True)
class SpectralMode:
    """One eigenvalue class of ``-Laplacian`` on a compact manifold.

    Degenerate eigenfunctions are stored per class; ``eigenfunction_at``
    returns the values of a real orthonormal basis of the eigenspace and
    ``density_at`` the basis-independent sum of squares.
    """

    index: int
    eigenvalue: float
    multiplicity: int
    manifold: Manifold = field(repr=False)
    label: tuple = field(default=(), repr=False)

    def eigenfunction_at(self, x):
        x = check_point(self.manifold, x)
        if self.manifold.kind is Kind.SPHERE:
            return _real_sph_harm(self.label[0], x[..., 0], x[..., 1], self.manifold.radius)
        return _torus_basis(self.label, self.manifold.torus_periods, x)

    def density_at(self, x):
        """Sum of ``|f|**2`` over the class (addition theorem; constant here)."""
        x = check_point(self.manifold, x)
        return np.full(x.shape[:-1], self.multiplicity / self.manifold.volume)


def spectrum(man: Manifold, cutoff: float) -> list[SpectralMode]:
    """All eigenvalue classes with ``sigma <= cutoff``, in nondecreasing order."""
    if not man.compact:
        raise UnsupportedError(f"{man.kind.value} has continuous spectrum")
    if not cutoff > 0:
        raise DomainError(f"spectral cutoff must be positive, got {cutoff}")
    if man.kind is Kind.SPHERE:
        R2 = man.radius**2
        lmax = int(math.floor(0.5 * (-1.0 + math.sqrt(1.0 + 4.0 * cutoff * R2)))) + 1
        modes = []
        for l in range(lmax + 1):
            sigma = l * (l + 1) / R2
            if sigma <= cutoff * (1 + 1e-14):
                modes.append(SpectralMode(l, sigma, 2 * l + 1, man, (l,)))
        return modes
    L1, L2 = man.torus_periods
    k1max = int(math.floor(L1 * math.sqrt(cutoff) / (2 * math.pi))) + 1
    k2max = int(math.floor(L2 * math.sqrt(cutoff) / (2 * math.pi))) + 1
    classes: dict[float, list] = {}
    for k1 in range(-k1max, k1max + 1):
        for k2 in range(-k2max, k2max + 1):
            sigma = 4 * math.pi**2 * (k1**2 / L1**2 + k2**2 / L2**2)
            if sigma <= cutoff * (1 + 1e-14):
                key = float(f"{sigma:.12e}")
                classes.setdefault(key, []).append((k1, k2))
    modes = []
    for i, key in enumerate(sorted(classes)):
        kv = tuple(classes[key])
        k1, k2 = kv[0]
        sigma = 4 * math.pi**2 * (k1**2 / L1**2 + k2**2 / L2**2)
        modes.append(SpectralMode(i, sigma, len(kv), man, kv))
    return modes
