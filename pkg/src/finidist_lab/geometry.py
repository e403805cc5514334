"""Round-sphere geometry: slice coordinates, frames, and closed-form measures.

Points of the unit n-sphere S^n in R^(n+1) are written in slice coordinates

    x = (z * sin(theta), cos(theta)),    theta in [0, pi],  z in S^(n-1),

with theta the colatitude measured from the north pole e_(n+1).  The
longitude direction z is undefined at the two poles; every routine that
recovers z reports that explicitly instead of returning garbage.

Measures follow the convention that omega_n is the volume of the unit ball
of R^n, so the boundary sphere S^(n-1)(r) of a Euclidean ball has area
n*omega_n*r^(n-1), while geodesic balls and latitude slices live on the
n-dimensional sphere S^n and carry the density n*omega_n*sin^(n-1)(theta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.stats import qmc

# Below this value of sin(theta) the longitude z of a point is treated as
# undefined (the point is numerically a pole).
POLE_TOL = 1e-12

# Axis-projection residuals smaller than this make Gram-Schmidt fall back to
# the next coordinate axis.
_FRAME_TOL = 1e-6


# ---------------------------------------------------------------------------
# closed-form measures
# ---------------------------------------------------------------------------

def gamma_half_integer(twice_x: int) -> float:
    """Gamma(twice_x / 2) for a positive integer twice_x, by exact recursion.

    Even arguments reduce to factorials, odd ones to Gamma(1/2) = sqrt(pi).
    Exact up to one floating rounding per multiply, which keeps omega_n
    reliable for every dimension used here.
    """
    if twice_x <= 0:
        raise ValueError(f"gamma argument must be positive, got {twice_x}/2")
    if twice_x % 2 == 0:
        return float(math.factorial(twice_x // 2 - 1))
    # Gamma(m + 1/2) = (2m)! / (4^m m!) * sqrt(pi) with m = (twice_x - 1) // 2
    m = (twice_x - 1) // 2
    return math.factorial(2 * m) / (4.0**m * math.factorial(m)) * math.sqrt(math.pi)


def unit_ball_volume(n: int) -> float:
    """Volume omega_n of the unit ball in R^n."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    return math.pi ** (n / 2.0) / gamma_half_integer(n + 2)


def sphere_area(n: int, r: float = 1.0) -> float:
    """Surface area n*omega_n*r^(n-1) of the sphere S^(n-1)(r) in R^n."""
    if r < 0:
        raise ValueError(f"radius must be nonnegative, got {r}")
    return n * unit_ball_volume(n) * r ** (n - 1)


def sin_power_integral(m: int, a: float, b: float) -> float:
    """Integral of sin(t)^m over [a, b] by the exact reduction formula."""
    if m < 0:
        raise ValueError(f"power must be nonnegative, got {m}")
    if m == 1:
        # cos(a) - cos(b) written as a product; the plain difference loses
        # most of its digits when b - a is a sliver
        return 2.0 * math.sin(0.5 * (a + b)) * math.sin(0.5 * (b - a))

    def antideriv(m: int, x: float) -> float:
        if m == 0:
            return x
        if m == 1:
            return -math.cos(x)
        return (-math.sin(x) ** (m - 1) * math.cos(x) + (m - 1) * antideriv(m - 2, x)) / m

    return antideriv(m, b) - antideriv(m, a)


def geodesic_ball_volume(n: int, rho: float) -> float:
    """Volume of a geodesic ball of radius rho on the unit sphere S^n."""
    if not (0.0 <= rho <= math.pi):
        raise ValueError(f"geodesic radius must lie in [0, pi], got {rho}")
    return n * unit_ball_volume(n) * sin_power_integral(n - 1, 0.0, rho)


def slice_volume_exact(n: int, alpha: float, beta: float) -> float:
    """Volume of the latitude slice alpha <= theta <= beta of S^n."""
    _check_slice_bounds(alpha, beta)
    # the antiderivative difference can come out at -1e-36 for slivers
    return max(0.0, n * unit_ball_volume(n) * sin_power_integral(n - 1, alpha, beta))


def slice_volume_bound(n: int, alpha: float, beta: float) -> float:
    """Upper bound omega_n*(beta^n - alpha^n) for the slice volume.

    Follows from sin(theta) <= theta; always >= slice_volume_exact.
    """
    _check_slice_bounds(alpha, beta)
    return unit_ball_volume(n) * (beta**n - alpha**n)


def _check_slice_bounds(alpha: float, beta: float) -> None:
    if not (0.0 <= alpha <= beta <= math.pi):
        raise ValueError(f"slice bounds need 0 <= alpha <= beta <= pi, got ({alpha}, {beta})")


_MEASURE_QUERIES = {
    "omega_n": lambda n, *a: unit_ball_volume(n),
    "sphere_area": lambda n, *a: sphere_area(n, *a),
    "geodesic_ball_volume": lambda n, *a: geodesic_ball_volume(n, *a),
    "slice_volume_exact": lambda n, *a: slice_volume_exact(n, *a),
    "slice_volume_bound": lambda n, *a: slice_volume_bound(n, *a),
}


def measures(n: int, query: str, *args: float) -> float:
    """Dispatch a named closed-form measure in dimension n.

    Parameters
    ----------
    n : int
        Dimension parameter, 2 <= n <= 8.  Euclidean queries (sphere_area)
        read n as the ambient dimension of R^n; spherical queries
        (geodesic_ball_volume, slice_volume_*) read it as the dimension of
        the sphere S^n.
    query : str
        One of omega_n, sphere_area, geodesic_ball_volume,
        slice_volume_exact, slice_volume_bound.
    *args
        Radii or slice bounds, as required by the query.
    """
    if not 2 <= n <= 8:
        raise ValueError(f"measures supports 2 <= n <= 8, got {n}")
    try:
        fn = _MEASURE_QUERIES[query]
    except KeyError:
        raise ValueError(f"unknown measure query {query!r}") from None
    return fn(n, *args)


# ---------------------------------------------------------------------------
# slice coordinates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpherePoint:
    """A point of S^n with its slice coordinates.

    ``z`` is None when the point is a pole (sin(theta) below POLE_TOL).
    """

    ambient: np.ndarray
    theta: float
    z: Optional[np.ndarray]

    @property
    def dim(self) -> int:
        """Dimension n of the sphere S^n the point lives on."""
        return self.ambient.shape[0] - 1

    @property
    def at_pole(self) -> bool:
        return self.z is None


def colatitude(x: np.ndarray) -> np.ndarray:
    """Colatitude theta of ambient points, robust near the poles.

    Uses atan2(|x_(1..n)|, x_(n+1)) instead of arccos of the last
    coordinate, which keeps full relative accuracy for theta down to the
    underflow threshold (arccos loses everything below sqrt(eps)).
    """
    x = np.asarray(x, dtype=float)
    return np.arctan2(np.linalg.norm(x[..., :-1], axis=-1), x[..., -1])


def slice_coords(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched slice coordinates (theta, z, z_defined) of ambient points.

    Where z_defined is False the returned z row is a placeholder unit vector
    and must not be used.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    theta = colatitude(x)
    s = np.linalg.norm(x[:, :-1], axis=1)
    defined = s > POLE_TOL
    z = np.zeros_like(x[:, :-1])
    z[:, 0] = 1.0
    safe = np.where(defined, s, 1.0)
    z = np.where(defined[:, None], x[:, :-1] / safe[:, None], z)
    return theta, z, defined


def to_slice_coords(x: np.ndarray) -> SpherePoint:
    """Slice coordinates of a single ambient point on S^n."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] < 3:
        raise ValueError("expected a single ambient point of S^n, n >= 2")
    nrm = np.linalg.norm(x)
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError(f"point is not on the unit sphere: |x| = {nrm}")
    theta, z, defined = slice_coords(x[None, :])
    return SpherePoint(ambient=x, theta=float(theta[0]), z=z[0] if defined[0] else None)


def from_slice_coords(theta, z) -> np.ndarray:
    """Ambient points (z*sin(theta), cos(theta)); broadcasts over rows."""
    theta = np.asarray(theta, dtype=float)
    z = np.asarray(z, dtype=float)
    st = np.sin(theta)[..., None]
    return np.concatenate([z * st, np.cos(theta)[..., None]], axis=-1)


def geodesic_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Geodesic distance arccos<a, b> on the unit sphere, clamped to [0, pi]."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    dot = np.clip(np.sum(a * b, axis=-1), -1.0, 1.0)
    return np.arccos(dot)


# ---------------------------------------------------------------------------
# frames
# ---------------------------------------------------------------------------

def tangent_frames(x: np.ndarray) -> np.ndarray:
    """Orthonormal tangent frames at unit vectors x, orientation-fixed.

    Parameters
    ----------
    x : ndarray, shape (N, d)
        Unit vectors (points of S^(d-1) in R^d).

    Returns
    -------
    ndarray, shape (N, d, d-1)
        Columns are orthonormal tangent vectors; det [frame | x] = +1, so
        the frame together with the outward normal is positively oriented.

    Gram-Schmidt runs over the coordinate axes in their natural order and
    skips an axis at a point whenever its residual falls below a fixed
    tolerance, which makes the construction deterministic and continuous
    away from the fallback loci.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    npts, d = x.shape
    k = d - 1
    frame = np.zeros((npts, d, k))
    count = np.zeros(npts, dtype=int)
    for axis in range(d):
        v = np.zeros((npts, d))
        v[:, axis] = 1.0
        v -= x * x[:, axis][:, None]
        for j in range(k):
            has = count > j
            col = frame[:, :, j]
            proj = np.sum(v * col, axis=1)
            v = np.where(has[:, None], v - proj[:, None] * col, v)
        nrm = np.linalg.norm(v, axis=1)
        accept = (nrm > _FRAME_TOL) & (count < k)
        if not np.any(accept):
            continue
        vn = v / np.where(nrm > _FRAME_TOL, nrm, 1.0)[:, None]
        idx = np.nonzero(accept)[0]
        frame[idx, :, count[idx]] = vn[idx]
        count[idx] += 1
    if np.any(count < k):
        raise RuntimeError("tangent frame construction ran out of axes")
    full = np.concatenate([frame, x[:, :, None]], axis=2)
    neg = np.linalg.det(full) < 0
    frame[neg, :, k - 1] *= -1.0
    return frame


def tangent_frame(x: np.ndarray) -> np.ndarray:
    """Tangent frame at a single unit vector; shape (d, d-1)."""
    return tangent_frames(np.asarray(x, dtype=float)[None, :])[0]


def rotation_to_point(c: np.ndarray) -> np.ndarray:
    """Special-orthogonal Q in R^d with Q e_d = c (north pole goes to c)."""
    c = np.asarray(c, dtype=float)
    frame = tangent_frame(c)
    return np.concatenate([frame, c[:, None]], axis=1)


# ---------------------------------------------------------------------------
# exponential chart of the unit sphere
# ---------------------------------------------------------------------------

def sphere_exp(q: np.ndarray, v: np.ndarray, frame: Optional[np.ndarray] = None) -> np.ndarray:
    """Exponential chart of S^n at q, applied to chart coordinates v.

    v has shape (N, n); rows map to cos(|v|) q + sin(|v|) F vhat with F the
    tangent frame at q.  Injective for |v| < pi.
    """
    q = np.asarray(q, dtype=float)
    v = np.atleast_2d(np.asarray(v, dtype=float))
    if frame is None:
        frame = tangent_frame(q)
    rho = np.linalg.norm(v, axis=1)
    safe = np.where(rho > 0, rho, 1.0)
    vhat = v / safe[:, None]
    u = vhat @ frame.T
    out = np.cos(rho)[:, None] * q[None, :] + np.sin(rho)[:, None] * u
    return np.where(rho[:, None] > 0, out, q[None, :] + 0.0 * out)


def sphere_exp_differential(q: np.ndarray, v: np.ndarray,
                            frame: Optional[np.ndarray] = None) -> np.ndarray:
    """Ambient Jacobians of the exponential chart, shape (N, n+1, n).

    Radial directions keep unit speed; directions orthogonal to v are
    scaled by sin(|v|)/|v| (the round-sphere Jacobi field factor).
    """
    q = np.asarray(q, dtype=float)
    v = np.atleast_2d(np.asarray(v, dtype=float))
    if frame is None:
        frame = tangent_frame(q)
    npts, n = v.shape
    rho = np.linalg.norm(v, axis=1)
    small = rho < 1e-14
    safe = np.where(small, 1.0, rho)
    vhat = v / safe[:, None]
    u = vhat @ frame.T                                    # (N, n+1)
    radial = -np.sin(rho)[:, None] * q[None, :] + np.cos(rho)[:, None] * u
    sinc = np.where(small, 1.0, np.sin(rho) / safe)
    jac = (radial[:, :, None] * vhat[:, None, :]
           + sinc[:, None, None] * (frame[None, :, :] - u[:, :, None] * vhat[:, None, :]))
    jac[small] = frame
    return jac


def sphere_log(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Log map of the unit sphere: tangent vectors at p pointing to y.

    Batched over rows of p and y (same shapes).  Near the cut locus the
    direction is ill-conditioned but the routine stays finite.
    """
    p = np.atleast_2d(np.asarray(p, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    c = np.sum(p * y, axis=1)
    w = y - c[:, None] * p
    s = np.linalg.norm(w, axis=1)
    delta = np.arctan2(s, c)
    small = s < 1e-14
    scale = np.where(small, 1.0, delta / np.where(small, 1.0, s))
    return scale[:, None] * w


# ---------------------------------------------------------------------------
# regions and targets
# ---------------------------------------------------------------------------

_REGION_KINDS = ("euclidean-ball", "euclidean-sphere", "euclidean-annulus",
                 "geodesic-ball", "latitude-slice")


@dataclass(frozen=True)
class Region:
    """A subset of R^n or of S^n over which to integrate or sample.

    kind selects the interpretation:
      euclidean-ball      B(center, radius) in R^dim
      euclidean-sphere    S(center, radius) in R^dim
      euclidean-annulus   inner_radius < |x - center| < radius
      geodesic-ball       geodesic ball B(center, radius) on S^dim
      latitude-slice      alpha <= theta <= beta on S^dim
    """

    kind: str
    dim: int
    center: Optional[np.ndarray] = None
    radius: Optional[float] = None
    inner_radius: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None

    def __post_init__(self):
        if self.kind not in _REGION_KINDS:
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.dim < 2:
            raise ValueError(f"region dimension must be >= 2, got {self.dim}")
        if self.kind in ("euclidean-ball", "euclidean-sphere", "euclidean-annulus"):
            if self.center is None or self.radius is None:
                raise ValueError(f"{self.kind} needs center and radius")
            if self.radius <= 0:
                raise ValueError("radius must be positive")
            object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
            if self.kind == "euclidean-annulus":
                if self.inner_radius is None or not 0 <= self.inner_radius < self.radius:
                    raise ValueError("annulus needs 0 <= inner_radius < radius")
        elif self.kind == "geodesic-ball":
            if self.center is None or self.radius is None:
                raise ValueError("geodesic-ball needs center and radius")
            if not 0 < self.radius <= math.pi:
                raise ValueError("geodesic radius must lie in (0, pi]")
            c = np.asarray(self.center, dtype=float)
            if abs(np.linalg.norm(c) - 1.0) > 1e-9:
                raise ValueError("geodesic-ball center must be a unit vector")
            object.__setattr__(self, "center", c)
        else:  # latitude-slice
            if self.alpha is None or self.beta is None:
                raise ValueError("latitude-slice needs alpha and beta")
            _check_slice_bounds(self.alpha, self.beta)


@dataclass(frozen=True)
class TargetSpec:
    """Target manifold of a map: metric, dimension, smallness data.

    injectivity_radius is pi for the unit sphere and +inf for Euclidean
    space (the Euclidean oscillation estimate carries no smallness
    hypothesis, so infinite thresholds make every hypothesis vacuous
    there).  Graph targets carry their profile and its gradient so tangent
    frames can be built without differencing.
    """

    kind: str
    dim: int
    injectivity_radius: float = math.pi
    graph_profile: Optional[Callable[[np.ndarray], np.ndarray]] = None
    graph_gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.kind not in ("euclidean-space", "unit-sphere", "graph-manifold"):
            raise ValueError(f"unknown target kind {self.kind!r}")
        if self.kind == "graph-manifold" and (self.graph_profile is None or self.graph_gradient is None):
            raise ValueError("graph-manifold target needs graph_profile and graph_gradient")
        if not self.injectivity_radius > 0:
            raise ValueError("injectivity_radius must be positive")

    @property
    def ambient_dim(self) -> int:
        """Dimension of the ambient space target points are stored in."""
        if self.kind == "euclidean-space":
            return self.dim
        return self.dim + 1


def euclidean_target(dim: int) -> TargetSpec:
    return TargetSpec(kind="euclidean-space", dim=dim, injectivity_radius=math.inf)


def unit_sphere_target(dim: int) -> TargetSpec:
    return TargetSpec(kind="unit-sphere", dim=dim, injectivity_radius=math.pi)


# ---------------------------------------------------------------------------
# measure-uniform sampling
# ---------------------------------------------------------------------------

def _colatitude_inverse_cdf(u: np.ndarray, alpha: float, beta: float,
                            power: int) -> np.ndarray:
    """Quantiles of the density sin(theta)^power on [alpha, beta]."""
    if power == 0:
        return alpha + u * (beta - alpha)
    if power == 1:
        ca, cb = math.cos(alpha), math.cos(beta)
        return np.arccos(np.clip(ca - u * (ca - cb), -1.0, 1.0))
    if power == 2:
        def cdf(t):
            return 0.5 * (t - np.sin(t) * np.cos(t))
        target = cdf(np.asarray(alpha)) + u * (cdf(np.asarray(beta)) - cdf(np.asarray(alpha)))
        lo = np.full_like(u, alpha)
        hi = np.full_like(u, beta)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            below = cdf(mid) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)
    raise ValueError(f"no quantile rule for sin^{power}")


def _unit_directions(u: np.ndarray, d: int) -> np.ndarray:
    """Uniform points of S^(d-1) in R^d from d-1 quasi-random coordinates."""
    if d == 2:
        phi = 2.0 * math.pi * u[:, 0]
        return np.stack([np.cos(phi), np.sin(phi)], axis=1)
    if d == 3:
        z = 2.0 * u[:, 0] - 1.0
        phi = 2.0 * math.pi * u[:, 1]
        s = np.sqrt(np.maximum(1.0 - z * z, 0.0))
        return np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)
    if d == 4:
        psi = _colatitude_inverse_cdf(u[:, 0], 0.0, math.pi, power=2)
        sub = _unit_directions(u[:, 1:], 3)
        return np.concatenate([sub * np.sin(psi)[:, None], np.cos(psi)[:, None]], axis=1)
    raise ValueError(f"direction sampling supports ambient dimension 2..4, got {d}")


def sample_region(region: Region, count: int, seed: int = 0,
                  law: str = "measure") -> np.ndarray:
    """Quasi-random points of a region, deterministic for a fixed seed.

    law "measure" distributes by the region's natural measure (radial
    power law in Euclidean balls and annuli, sin^(n-1) colatitude law on
    the sphere); law "coverage" spreads the radial or colatitude
    coordinate uniformly instead, which visits thin shells and near-pole
    bands that carry almost no measure — the right notion when hunting
    for image diameters rather than averaging.
    """
    if count < 1:
        raise ValueError("need at least one sample")
    if law not in ("measure", "coverage"):
        raise ValueError(f"unknown sampling law {law!r}")
    kind, n = region.kind, region.dim
    if kind in ("euclidean-ball", "euclidean-annulus"):
        u = qmc.Halton(d=n, scramble=True, seed=seed).random(count)
        r0 = region.inner_radius if kind == "euclidean-annulus" else 0.0
        if law == "measure":
            r = ((1.0 - u[:, 0]) * r0**n + u[:, 0] * region.radius**n) ** (1.0 / n)
        else:
            r = r0 + u[:, 0] * (region.radius - r0)
        dirs = _unit_directions(u[:, 1:], n)
        return region.center[None, :] + r[:, None] * dirs
    if kind == "euclidean-sphere":
        u = qmc.Halton(d=n - 1, scramble=True, seed=seed).random(count)
        dirs = _unit_directions(u, n)
        return region.center[None, :] + region.radius * dirs
    # sphere regions: colatitude + longitude direction
    u = qmc.Halton(d=n, scramble=True, seed=seed).random(count)
    if kind == "geodesic-ball":
        lo, hi = 0.0, region.radius
    else:
        lo, hi = region.alpha, region.beta
    power = (n - 1) if law == "measure" else 0
    theta = _colatitude_inverse_cdf(u[:, 0], lo, hi, power=power)
    z = _unit_directions(u[:, 1:], n)
    pts = from_slice_coords(theta, z)
    if kind == "geodesic-ball":
        north = np.zeros(n + 1)
        north[-1] = 1.0
        if np.linalg.norm(region.center - north) > 1e-12:
            pts = pts @ rotation_to_point(region.center).T
    return pts
