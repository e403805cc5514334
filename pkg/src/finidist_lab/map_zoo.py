"""Closed-form map families between spheres and Euclidean balls.

Every family is packaged as a MapField: a vectorized evaluator, an optional
closed-form ambient differential, a declared singular set (points, kink
latitudes, kink shells) that quadrature and finite-difference probes must
respect, and metadata (target spec, finite-distortion class, closed-form
core integrals for singular energies).

Sphere maps use slice coordinates x = (z sin(theta), cos(theta)).  The
latitude-profile families (slice stretches, their reflected versions, the
polar cap profile) all share the differential structure

    Df = psi'(theta) e_psi ⊗ e_theta  +  (sin(psi)/sin(theta)) R_z,

where e_theta, e_psi are the unit colatitude directions at input and image
and R_z maps longitude directions (optionally through the reflection sigma
that flips the first z coordinate, which restores orientation for the
direction-reversing profiles).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import geometry
from .geometry import TargetSpec, euclidean_target, unit_sphere_target

DEFAULT_KMAX = 6
_TINY = 1e-300


def orlicz_density(t: np.ndarray, n: int) -> np.ndarray:
    """Borderline Orlicz integrand P(t) = t^n / log(e + t)."""
    t = np.asarray(t, dtype=float)
    return t**n / np.log(math.e + t)


# ---------------------------------------------------------------------------
# descriptors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DomainSpec:
    """Where a map is defined.

    kind is "sphere" (all of S^dim), "euclidean-ball" (B(center, radius) in
    R^dim) or "sphere-minus-cap" (S^dim with the open geodesic cap of
    radius cap_radius around cap_center removed).  slice_bounds restricts a
    sphere domain to a latitude slice.
    """

    kind: str
    dim: int
    radius: Optional[float] = None
    center: Optional[tuple] = None
    cap_center: Optional[tuple] = None
    cap_radius: Optional[float] = None
    slice_bounds: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ("sphere", "euclidean-ball", "sphere-minus-cap"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == "euclidean-ball" and (self.radius is None or self.radius <= 0):
            raise ValueError("euclidean-ball domain needs a positive radius")
        if self.kind == "sphere-minus-cap" and (self.cap_center is None or self.cap_radius is None):
            raise ValueError("sphere-minus-cap domain needs cap_center and cap_radius")

    @property
    def ambient_dim(self) -> int:
        return self.dim if self.kind == "euclidean-ball" else self.dim + 1

    def center_array(self) -> np.ndarray:
        if self.center is None:
            return np.zeros(self.ambient_dim)
        return np.asarray(self.center, dtype=float)


@dataclass(frozen=True)
class SingularSet:
    """Declared non-smoothness loci of a closed form.

    points: isolated ambient points; latitudes: colatitudes of kink
    circles on a sphere domain; shells: (center, radius) spheres in a
    Euclidean domain where the formula has a kink.
    """

    points: tuple = ()
    latitudes: tuple = ()
    shells: tuple = ()

    def clear_of(self, x: np.ndarray, margin: float) -> np.ndarray:
        """Boolean mask of rows of x at distance > margin from every locus."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        ok = np.ones(x.shape[0], dtype=bool)
        for p in self.points:
            ok &= np.linalg.norm(x - np.asarray(p, dtype=float)[None, :], axis=1) > margin
        if self.latitudes:
            theta = geometry.colatitude(x)
            for lat in self.latitudes:
                ok &= np.abs(theta - lat) > margin
        for center, radius in self.shells:
            d = np.linalg.norm(x - np.asarray(center, dtype=float)[None, :], axis=1)
            ok &= np.abs(d - radius) > margin
        return ok


@dataclass
class MapField:
    """A map together with its analytic data and declared singularities."""

    family: str
    params: dict
    domain: DomainSpec
    target: TargetSpec
    singular: SingularSet = field(default_factory=SingularSet)
    has_analytic_differential: bool = False
    is_finite_distortion: bool = True
    label: str = ""
    _evaluate: Callable = None
    _differential: Optional[Callable] = None
    _energy_core: Optional[Callable] = None
    _jacobian_core: Optional[Callable] = None

    def __post_init__(self):
        if not self.label:
            self.label = self.family

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Map points (N, d) or (d,) to target ambient coordinates."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        y = self._evaluate(np.atleast_2d(x))
        return y[0] if single else y

    def differential_ambient(self, x: np.ndarray) -> np.ndarray:
        """Closed-form ambient Jacobians (N, target_ambient, domain_ambient)."""
        if self._differential is None:
            raise ValueError(f"family {self.family!r} has no analytic differential; "
                             "use finite differences")
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        jac = self._differential(np.atleast_2d(x))
        return jac[0] if single else jac

    def energy_core(self, exponent: int):
        """Core rules for integrating |Df|^exponent across declared singular radii."""
        if self._energy_core is None:
            return None
        return self._energy_core(exponent)

    def jacobian_core(self):
        """Core rules for integrating the Jacobian across declared singular radii."""
        if self._jacobian_core is None:
            return None
        return self._jacobian_core()


# ---------------------------------------------------------------------------
# rotations and power maps
# ---------------------------------------------------------------------------

def identity_map(n: int = 2) -> MapField:
    """The identity of S^n."""
    return rotation_map(n, matrix=np.eye(n + 1))


def rotation_map(n: int = 2, matrix: Optional[np.ndarray] = None,
                 seed: Optional[int] = None) -> MapField:
    """A rotation of S^n; random special-orthogonal when given a seed."""
    if matrix is None:
        rng = np.random.default_rng(0 if seed is None else seed)
        a = rng.standard_normal((n + 1, n + 1))
        q, r = np.linalg.qr(a)
        q *= np.sign(np.diag(r))[None, :]
        if np.linalg.det(q) < 0:
            q[:, 0] *= -1.0
        matrix = q
    q = np.asarray(matrix, dtype=float)
    if q.shape != (n + 1, n + 1) or np.max(np.abs(q @ q.T - np.eye(n + 1))) > 1e-10:
        raise ValueError("rotation matrix must be orthogonal of size n+1")

    def ev(x):
        return x @ q.T

    def dv(x):
        return np.broadcast_to(q, (x.shape[0], n + 1, n + 1)).copy()

    return MapField(
        family="rotation", params={"matrix": q.tolist(), "n": n},
        domain=DomainSpec(kind="sphere", dim=n), target=unit_sphere_target(n),
        has_analytic_differential=True, is_finite_distortion=True,
        label="rotation" if seed is None else f"rotation(seed={seed})",
        _evaluate=ev, _differential=dv)


def power_map(k: int) -> MapField:
    """The longitude winding map (theta, phi) -> (theta, k phi) of S^2."""
    if k < 1 or k != int(k):
        raise ValueError(f"power map needs an integer k >= 1, got {k}")
    k = int(k)

    def ev(x):
        s = np.linalg.norm(x[:, :2], axis=1)
        phi = np.arctan2(x[:, 1], x[:, 0])
        return np.stack([s * np.cos(k * phi), s * np.sin(k * phi), x[:, 2]], axis=1)

    def dv(x):
        s = np.linalg.norm(x[:, :2], axis=1)
        c = x[:, 2]
        phi = np.arctan2(x[:, 1], x[:, 0])
        kphi = k * phi
        e_th_in = np.stack([c * np.cos(phi), c * np.sin(phi), -s], axis=1)
        e_ph_in = np.stack([-np.sin(phi), np.cos(phi), np.zeros_like(phi)], axis=1)
        e_th_out = np.stack([c * np.cos(kphi), c * np.sin(kphi), -s], axis=1)
        e_ph_out = np.stack([-np.sin(kphi), np.cos(kphi), np.zeros_like(phi)], axis=1)
        return (e_th_out[:, :, None] * e_th_in[:, None, :]
                + k * e_ph_out[:, :, None] * e_ph_in[:, None, :])

    poles = (np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, -1.0]))
    return MapField(
        family="power", params={"k": k},
        domain=DomainSpec(kind="sphere", dim=2), target=unit_sphere_target(2),
        singular=SingularSet(points=poles),
        has_analytic_differential=True, is_finite_distortion=True,
        label=f"power(k={k})", _evaluate=ev, _differential=dv)


# ---------------------------------------------------------------------------
# Euclidean radial families
# ---------------------------------------------------------------------------

def radial_stretch(eps: float, n: int = 2, domain_radius: float = 1.0) -> MapField:
    """x -> x |x|^(eps-1) on a Euclidean ball; distortion 1/eps."""
    if not 0 < eps <= 1:
        raise ValueError(f"radial stretch needs eps in (0, 1], got {eps}")

    def ev(x):
        r = np.linalg.norm(x, axis=1)
        scale = np.where(r > 0, np.maximum(r, _TINY) ** (eps - 1.0), 0.0)
        return x * scale[:, None]

    def dv(x):
        r = np.maximum(np.linalg.norm(x, axis=1), _TINY)
        xhat = x / r[:, None]
        eye = np.broadcast_to(np.eye(n), (x.shape[0], n, n))
        rank1 = xhat[:, :, None] * xhat[:, None, :]
        return r[:, None, None] ** (eps - 1.0) * (eye + (eps - 1.0) * rank1)

    nwn = geometry.sphere_area(n)

    def energy_core(p):
        # |Df| = r^(eps-1) for eps <= 1; exact integral over B(0, t)
        expo = p * (eps - 1.0) + n
        if expo <= 0:
            return None
        return {0.0: ("exact", lambda t: nwn * t**expo / expo)}

    def jacobian_core():
        return {0.0: ("exact", lambda t: geometry.unit_ball_volume(n) * t ** (n * eps))}

    return MapField(
        family="radial_stretch", params={"eps": eps, "n": n},
        domain=DomainSpec(kind="euclidean-ball", dim=n, radius=domain_radius),
        target=euclidean_target(n),
        singular=SingularSet(points=(np.zeros(n),)),
        has_analytic_differential=True, is_finite_distortion=True,
        label=f"radial_stretch(eps={eps})", _evaluate=ev, _differential=dv,
        _energy_core=energy_core, _jacobian_core=jacobian_core)


def _loglog_value(r: np.ndarray) -> np.ndarray:
    if np.any(r == 0.0) or np.any(r >= 1.0):
        raise ValueError("log|log r| needs 0 < r < 1")
    return np.log(-np.log(r))


def _loglog_gradient(x: np.ndarray) -> np.ndarray:
    r = np.linalg.norm(x, axis=1)
    if np.any(r == 0.0) or np.any(r >= 1.0):
        raise ValueError("log|log r| needs 0 < r < 1")
    return x / (r**2 * np.log(r))[:, None]


def _loglog_energy_core(n: int):
    nwn = geometry.sphere_area(n)

    def core(p):
        if p != n:
            return None
        # |grad|^n r^(n-1) = 1/(r |log r|^n); antiderivative -|log r|^(1-n)/(n-1)
        return {0.0: ("exact", lambda t: nwn * (-math.log(t)) ** (1 - n) / (n - 1))}

    return core


def loglog_scalar(n: int = 2, domain_radius: float = math.exp(-2.0)) -> MapField:
    """The scalar field log|log|x||, the classic unbounded W^(1,n) example."""
    if domain_radius >= 1.0:
        raise ValueError("domain must stay inside the unit ball")

    def ev(x):
        return _loglog_value(np.linalg.norm(x, axis=1))[:, None]

    def dv(x):
        return _loglog_gradient(x)[:, None, :]

    return MapField(
        family="loglog", params={"n": n, "domain_radius": domain_radius},
        domain=DomainSpec(kind="euclidean-ball", dim=n, radius=domain_radius),
        target=euclidean_target(1),
        singular=SingularSet(points=(np.zeros(n),)),
        has_analytic_differential=True, is_finite_distortion=False,
        label=f"loglog(r0={domain_radius:.3g})", _evaluate=ev, _differential=dv,
        _energy_core=_loglog_energy_core(n))


def dense_singularities(n: int = 2, centers: Optional[Sequence] = None,
                        weights: Optional[Sequence[float]] = None,
                        bump_radius: float = 0.12,
                        domain_radius: float = 1.0) -> MapField:
    """Finite weighted sum of truncated loglog bumps.

    Each bump is log|log(r/r0)|-shaped: b(r) = log(-log r) - log(-log r0)
    for r < r0 and 0 beyond, so the field is continuous with a kink shell
    at r0 around every center.  Default weights halve with each center, so
    truncations form a Cauchy sequence in the W^(1,n) seminorm.
    """
    if centers is None:
        # deterministic spread staying well inside the unit ball
        k = 5
        ang = 2.0 * math.pi * np.arange(k) / k
        centers = 0.55 * np.stack([np.cos(ang), np.sin(ang)], axis=1)
        if n > 2:
            centers = np.concatenate([centers, np.zeros((k, n - 2))], axis=1)
    centers = [np.asarray(c, dtype=float) for c in centers]
    if weights is None:
        weights = [2.0 ** (-(j + 1)) for j in range(len(centers))]
    weights = [float(w) for w in weights]
    if len(weights) != len(centers):
        raise ValueError("need one weight per center")
    r0 = float(bump_radius)
    if not 0 < r0 < 1:
        raise ValueError("bump radius must lie in (0, 1)")
    offset = math.log(-math.log(r0))

    def ev(x):
        out = np.zeros(x.shape[0])
        for c, w in zip(centers, weights):
            r = np.linalg.norm(x - c[None, :], axis=1)
            if np.any(r == 0.0):
                raise ValueError("evaluation at a singular center")
            inside = r < r0
            if np.any(inside):
                out[inside] += w * (_loglog_value(r[inside]) - offset)
        return out[:, None]

    return MapField(
        family="dense_singularities",
        params={"n": n, "centers": [c.tolist() for c in centers],
                "weights": weights, "bump_radius": r0},
        domain=DomainSpec(kind="euclidean-ball", dim=n, radius=domain_radius),
        target=euclidean_target(1),
        singular=SingularSet(points=tuple(centers),
                             shells=tuple((c, r0) for c in centers)),
        has_analytic_differential=False, is_finite_distortion=False,
        label=f"dense_singularities(m={len(centers)})", _evaluate=ev)


def graph_embed(n: int = 2, domain_radius: float = math.exp(-2.0)) -> MapField:
    """x -> (x, log|log|x||), an embedding into a non-compact graph manifold."""
    target = TargetSpec(
        kind="graph-manifold", dim=n, injectivity_radius=0.05,
        graph_profile=lambda x: _loglog_value(np.linalg.norm(np.atleast_2d(x), axis=1)),
        graph_gradient=lambda x: _loglog_gradient(np.atleast_2d(x)))

    def ev(x):
        return np.concatenate([x, _loglog_value(np.linalg.norm(x, axis=1))[:, None]], axis=1)

    nwn = geometry.sphere_area(n)

    def energy_core(p):
        if p != n:
            return None
        # |Df|^n = (1 + |grad|^2)^(n/2) <= 2^(n/2) |grad|^n once |grad| >= 1
        return {0.0: ("bound", lambda t: 2 ** (n / 2.0) * nwn * (-math.log(t)) ** (1 - n) / (n - 1))}

    return MapField(
        family="graph_embed", params={"n": n, "domain_radius": domain_radius},
        domain=DomainSpec(kind="euclidean-ball", dim=n, radius=domain_radius),
        target=target,
        singular=SingularSet(points=(np.zeros(n),)),
        has_analytic_differential=False, is_finite_distortion=True,
        label="graph_embed", _evaluate=ev, _energy_core=energy_core)


def euclidean_radial_retraction(n: int = 2, center: Optional[np.ndarray] = None,
                                radius: float = 0.5,
                                domain_radius: float = 1.0) -> MapField:
    """Nearest-point retraction of R^n onto the closed ball B(center, radius)."""
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    rho = float(radius)
    if rho <= 0:
        raise ValueError("retraction radius must be positive")

    def ev(x):
        d = np.linalg.norm(x - c[None, :], axis=1)
        scale = np.where(d > rho, rho / np.maximum(d, _TINY), 1.0)
        return c[None, :] + (x - c[None, :]) * scale[:, None]

    def dv(x):
        d = np.maximum(np.linalg.norm(x - c[None, :], axis=1), _TINY)
        xhat = (x - c[None, :]) / d[:, None]
        eye = np.broadcast_to(np.eye(n), (x.shape[0], n, n)).copy()
        outside = (rho / d)[:, None, None] * (eye - xhat[:, :, None] * xhat[:, None, :])
        return np.where((d > rho)[:, None, None], outside, eye)

    return MapField(
        family="euclidean_radial_retraction",
        params={"n": n, "center": c.tolist(), "radius": rho},
        domain=DomainSpec(kind="euclidean-ball", dim=n, radius=domain_radius,
                          center=tuple(c)),
        target=euclidean_target(n),
        singular=SingularSet(shells=((c, rho),)),
        has_analytic_differential=True, is_finite_distortion=False,
        label=f"radial_retraction(rho={rho})", _evaluate=ev, _differential=dv)


def inversion(rho: float = 0.5, n: int = 2, domain_radius: float = 1.0) -> MapField:
    """The sphere inversion x -> rho^2 x / |x|^2 (orientation reversing)."""
    rho = float(rho)

    def ev(x):
        r2 = np.maximum(np.sum(x * x, axis=1), _TINY)
        return rho**2 * x / r2[:, None]

    def dv(x):
        r = np.maximum(np.linalg.norm(x, axis=1), _TINY)
        xhat = x / r[:, None]
        eye = np.broadcast_to(np.eye(n), (x.shape[0], n, n))
        rank1 = xhat[:, :, None] * xhat[:, None, :]
        return (rho**2 / r**2)[:, None, None] * (eye - 2.0 * rank1)

    return MapField(
        family="inversion", params={"rho": rho, "n": n},
        domain=DomainSpec(kind="euclidean-ball", dim=n, radius=domain_radius),
        target=euclidean_target(n),
        singular=SingularSet(points=(np.zeros(n),)),
        has_analytic_differential=True, is_finite_distortion=False,
        label=f"inversion(rho={rho})", _evaluate=ev, _differential=dv)


# ---------------------------------------------------------------------------
# latitude-profile maps of S^n
# ---------------------------------------------------------------------------

def _profile_pieces(x: np.ndarray):
    theta, z, defined = geometry.slice_coords(x)
    return theta, z, defined


def _profile_evaluate(x, psi_of, reflect: bool):
    theta, z, _ = _profile_pieces(x)
    psi = psi_of(theta)
    zz = z.copy()
    if reflect:
        zz[:, 0] *= -1.0
    return geometry.from_slice_coords(psi, zz)


def _profile_differential(x, psi_of, dpsi_of, reflect: bool):
    theta, z, _ = _profile_pieces(x)
    psi = psi_of(theta)
    dpsi = dpsi_of(theta)
    zz = z.copy()
    if reflect:
        zz[:, 0] *= -1.0
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(psi), np.cos(psi)
    npts, d = x.shape
    n = d - 1
    e_in = np.concatenate([z * ct[:, None], -st[:, None]], axis=1)
    e_out = np.concatenate([zz * cp[:, None], -sp[:, None]], axis=1)
    # longitude scaling with pole-safe limit sin(psi)/sin(theta) -> psi'(theta)
    ratio = np.where(st > 1e-150, sp / np.maximum(st, _TINY), dpsi)
    proj = np.broadcast_to(np.eye(n), (npts, n, n)) - z[:, :, None] * z[:, None, :]
    if reflect:
        proj = proj.copy()
        proj[:, 0, :] *= -1.0
    jac = np.zeros((npts, d, d))
    jac[:, :n, :n] = ratio[:, None, None] * proj
    jac += dpsi[:, None, None] * e_out[:, :, None] * e_in[:, None, :]
    return jac


def _check_in_slice(x, alpha, beta):
    theta = geometry.colatitude(np.atleast_2d(x))
    if np.any(theta < alpha - 1e-9) or np.any(theta > beta + 1e-9):
        raise ValueError(f"point outside the domain slice [{alpha}, {beta}]")


def slice_stretch(alpha: float, beta: float, n: int = 2) -> MapField:
    """Stretch the slice alpha <= theta <= beta over the whole of S^n.

    Colatitude maps affinely onto [0, pi] (alpha to the north pole, beta to
    the south pole); longitudes are kept.
    """
    geometry._check_slice_bounds(alpha, beta)
    if beta <= alpha:
        raise ValueError("slice must have positive width")
    s = math.pi / (beta - alpha)
    psi_of = lambda th: (th - alpha) * s
    dpsi_of = lambda th: np.full_like(th, s)

    def ev(x):
        _check_in_slice(x, alpha, beta)
        return _profile_evaluate(x, psi_of, reflect=False)

    def dv(x):
        _check_in_slice(x, alpha, beta)
        return _profile_differential(x, psi_of, dpsi_of, reflect=False)

    return MapField(
        family="slice_stretch", params={"alpha": alpha, "beta": beta, "n": n},
        domain=DomainSpec(kind="sphere", dim=n, slice_bounds=(alpha, beta)),
        target=unit_sphere_target(n),
        singular=SingularSet(latitudes=(alpha, beta)),
        has_analytic_differential=True, is_finite_distortion=True,
        label=f"slice_stretch[{alpha:.3g},{beta:.3g}]",
        _evaluate=ev, _differential=dv)


def slice_stretch_reflected(alpha: float, beta: float, n: int = 2) -> MapField:
    """Orientation-preserving reversed stretch: beta to north, alpha to south.

    The colatitude reversal alone would reverse orientation; composing with
    the longitude reflection sigma (first z coordinate negated) restores it.
    """
    geometry._check_slice_bounds(alpha, beta)
    if beta <= alpha:
        raise ValueError("slice must have positive width")
    s = math.pi / (beta - alpha)
    psi_of = lambda th: (beta - th) * s
    dpsi_of = lambda th: np.full_like(th, -s)

    def ev(x):
        _check_in_slice(x, alpha, beta)
        return _profile_evaluate(x, psi_of, reflect=True)

    def dv(x):
        _check_in_slice(x, alpha, beta)
        return _profile_differential(x, psi_of, dpsi_of, reflect=True)

    return MapField(
        family="slice_stretch_reflected", params={"alpha": alpha, "beta": beta, "n": n},
        domain=DomainSpec(kind="sphere", dim=n, slice_bounds=(alpha, beta)),
        target=unit_sphere_target(n),
        singular=SingularSet(latitudes=(alpha, beta)),
        has_analytic_differential=True, is_finite_distortion=True,
        label=f"slice_stretch_reflected[{alpha:.3g},{beta:.3g}]",
        _evaluate=ev, _differential=dv)


def cap_profile(c: float = math.pi / 4, n: int = 2) -> MapField:
    """Smooth non-surjective map into the polar cap theta <= c.

    Colatitude follows psi = c sin(theta), so both poles land on the north
    pole and the image misses everything below latitude c; its degree is 0.
    """
    if not 0 < c <= math.pi / 2:
        raise ValueError("cap amplitude must lie in (0, pi/2]")
    psi_of = lambda th: c * np.sin(th)
    dpsi_of = lambda th: c * np.cos(th)

    def ev(x):
        return _profile_evaluate(x, psi_of, reflect=False)

    def dv(x):
        return _profile_differential(x, psi_of, dpsi_of, reflect=False)

    poles = (np.concatenate([np.zeros(n), [1.0]]), np.concatenate([np.zeros(n), [-1.0]]))
    return MapField(
        family="cap_profile", params={"c": c, "n": n},
        domain=DomainSpec(kind="sphere", dim=n), target=unit_sphere_target(n),
        singular=SingularSet(points=poles),
        has_analytic_differential=True, is_finite_distortion=False,
        label=f"cap_profile(c={c:.3g})", _evaluate=ev, _differential=dv)


# ---------------------------------------------------------------------------
# the glued-slice counterexample
# ---------------------------------------------------------------------------

def counterexample_schedule(k_max: int) -> list[float]:
    """Colatitudes theta_k = 2^(-k^2) pi for k = 0..k_max."""
    return [2.0 ** (-(k * k)) * math.pi for k in range(k_max + 1)]


def counterexample_map(k_max: int = DEFAULT_KMAX, n: int = 2) -> MapField:
    """Gluing of alternating slice stretches on theta_k = 2^(-k^2) pi.

    Slice k covers theta in [theta_k, theta_(k-1)] and is stretched over
    the whole sphere, with the plain stretch for odd k and the reflected
    one for even k so neighbouring slices agree on the shared latitude
    circle (it goes to the north pole for odd k, the south pole for even
    k) and every slice preserves orientation.  Slices run to k_max + 1 and
    the residual polar cap is frozen at the pole its boundary circle maps
    to, so the map is continuous but oscillates fully inside every
    neighbourhood of the north pole down to scale theta_(k_max+1).
    """
    if not 2 <= k_max <= 6:
        raise ValueError(f"k_max must lie in [2, 6], got {k_max}")
    if not 2 <= n <= 3:
        raise ValueError("the counterexample is built for n in {2, 3}")
    kk = k_max + 1
    thetas = counterexample_schedule(kk)  # theta_0 .. theta_(k_max+1)
    cap_pole = 1.0 if kk % 2 == 1 else -1.0  # north for odd last slice

    slices = []
    for k in range(1, kk + 1):
        a, b = thetas[k], thetas[k - 1]
        s = math.pi / (b - a)
        slices.append({"k": k, "alpha": a, "beta": b, "stretch": s,
                       "reflect": k % 2 == 0})

    def psi_fns(sl):
        a, b, s = sl["alpha"], sl["beta"], sl["stretch"]
        if sl["reflect"]:
            return (lambda th: (b - th) * s), (lambda th: np.full_like(th, -s))
        return (lambda th: (th - a) * s), (lambda th: np.full_like(th, s))

    def ev(x):
        theta = geometry.colatitude(x)
        out = np.zeros((x.shape[0], n + 1))
        out[:, -1] = cap_pole
        done = theta < thetas[kk]
        for sl in slices:  # top slice first, so each claims [alpha, beta]
            mask = (~done) & (theta >= sl["alpha"])
            if np.any(mask):
                psi_of, _ = psi_fns(sl)
                out[mask] = _profile_evaluate(x[mask], psi_of, sl["reflect"])
                done |= mask
        return out

    def dv(x):
        theta = geometry.colatitude(x)
        jac = np.zeros((x.shape[0], n + 1, n + 1))
        done = theta < thetas[kk]  # cap: constant, Df = 0
        for sl in slices:
            mask = (~done) & (theta >= sl["alpha"])
            if np.any(mask):
                psi_of, dpsi_of = psi_fns(sl)
                jac[mask] = _profile_differential(x[mask], psi_of, dpsi_of, sl["reflect"])
                done |= mask
        return jac

    return MapField(
        family="counterexample", params={"k_max": k_max, "n": n},
        domain=DomainSpec(kind="sphere", dim=n), target=unit_sphere_target(n),
        singular=SingularSet(latitudes=tuple(thetas[1:]),
                             points=(np.concatenate([np.zeros(n), [1.0]]),
                                     np.concatenate([np.zeros(n), [-1.0]]))),
        has_analytic_differential=True, is_finite_distortion=True,
        label=f"counterexample(K={k_max})", _evaluate=ev, _differential=dv)


# ---------------------------------------------------------------------------
# Moebius transplant
# ---------------------------------------------------------------------------

def mobius(a: complex = 0.3 + 0.2j) -> MapField:
    """Disc Moebius automorphism transplanted to S^2 by stereographic charts.

    w -> (w - a)/(1 - conj(a) w) conjugated with the projection from the
    north pole; conformal on the whole sphere, so its distortion is 1.
    """
    a = complex(a)
    if abs(a) >= 1:
        raise ValueError("parameter must lie in the open unit disc")

    north = np.array([0.0, 0.0, 1.0])

    def to_chart(x):
        denom = 1.0 - x[:, 2]
        w = (x[:, 0] + 1j * x[:, 1]) / denom
        return w

    def from_chart(w):
        u, v = np.real(w), np.imag(w)
        r2 = u * u + v * v
        return np.stack([2 * u, 2 * v, r2 - 1.0], axis=1) / (r2 + 1.0)[:, None]

    def ev(x):
        out = np.empty((x.shape[0], 3))
        at_north = 1.0 - x[:, 2] < 1e-14
        rest = ~at_north
        if np.any(at_north):
            if a == 0:
                out[at_north] = north
            else:
                out[at_north] = from_chart(np.array([-1.0 / np.conj(a)]))
        if np.any(rest):
            w = to_chart(x[rest])
            denom = 1.0 - np.conj(a) * w
            img = np.empty((w.shape[0], 3))
            to_pole = np.abs(denom) < 1e-14
            img[to_pole] = north
            mw = (w[~to_pole] - a) / denom[~to_pole]
            img[~to_pole] = from_chart(mw)
            out[rest] = img
        return out

    def dv(x):
        w = to_chart(x)
        denom = 1.0 - x[:, 2]
        d_sp = np.zeros((x.shape[0], 2, 3))
        d_sp[:, 0, 0] = 1.0 / denom
        d_sp[:, 0, 2] = x[:, 0] / denom**2
        d_sp[:, 1, 1] = 1.0 / denom
        d_sp[:, 1, 2] = x[:, 1] / denom**2
        mp = (1.0 - abs(a) ** 2) / (1.0 - np.conj(a) * w) ** 2
        d_m = np.zeros((x.shape[0], 2, 2))
        d_m[:, 0, 0] = np.real(mp)
        d_m[:, 0, 1] = -np.imag(mp)
        d_m[:, 1, 0] = np.imag(mp)
        d_m[:, 1, 1] = np.real(mp)
        mw = (w - a) / (1.0 - np.conj(a) * w)
        u, v = np.real(mw), np.imag(mw)
        r2 = u * u + v * v
        d_inv = np.zeros((x.shape[0], 3, 2))
        d_inv[:, 0, 0] = 2 * (r2 + 1.0) - 4 * u * u
        d_inv[:, 0, 1] = -4 * u * v
        d_inv[:, 1, 0] = -4 * u * v
        d_inv[:, 1, 1] = 2 * (r2 + 1.0) - 4 * v * v
        d_inv[:, 2, 0] = 4 * u
        d_inv[:, 2, 1] = 4 * v
        d_inv /= ((r2 + 1.0) ** 2)[:, None, None]
        return d_inv @ d_m @ d_sp

    sing_points = [north]
    if a != 0:
        w_star = 1.0 / np.conj(a)
        sing_points.append(from_chart(np.array([w_star]))[0])
    return MapField(
        family="mobius", params={"a": [a.real, a.imag]},
        domain=DomainSpec(kind="sphere", dim=2), target=unit_sphere_target(2),
        singular=SingularSet(points=tuple(sing_points)),
        has_analytic_differential=True, is_finite_distortion=True,
        label=f"mobius(a={a.real:.2g}{a.imag:+.2g}i)", _evaluate=ev, _differential=dv)


# ---------------------------------------------------------------------------
# composition
# ---------------------------------------------------------------------------

def composed(outer: MapField, inner: MapField) -> MapField:
    """Pointwise composition outer after inner (finite differences only).

    The declared singular set is inherited from the inner map; kinks of the
    outer map pulled back through the inner one are not tracked, so probe
    smoothness checks should stick to the component families.
    """

    def ev(x):
        return outer._evaluate(inner._evaluate(x))

    return MapField(
        family="composed",
        params={"outer": outer.family, "inner": inner.family,
                "outer_params": outer.params, "inner_params": inner.params},
        domain=inner.domain, target=outer.target,
        singular=inner.singular,
        has_analytic_differential=False,
        is_finite_distortion=outer.is_finite_distortion and inner.is_finite_distortion,
        label=f"{outer.label} o {inner.label}", _evaluate=ev)


# ---------------------------------------------------------------------------
# stretch-factor bound for the slice families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DerivativeBoundReport:
    """Sampled stretch against the per-slice reference bound.

    per_slice rows are (slice index, reference bound, sampled max |Df|,
    ratio); fitted_constant is the smallest C making
    max |Df| <= C * reference hold on every audited slice.
    """

    per_slice: tuple
    fitted_constant: float
    samples_per_slice: int


def derivative_bound_check(mapfield: MapField, samples: int = 800,
                           seed: int = 0) -> DerivativeBoundReport:
    """Fit the constant in the slice-stretch derivative bound by sampling.

    For a single slice map on [alpha, beta] (beta <= pi/2) the reference is
    max(1/sin(alpha), pi/(beta - alpha)); for the glued counterexample each
    slice k >= 2 is audited against 2^((k-1)^2).
    """
    from . import calculus

    n = mapfield.domain.dim
    entries = []
    if mapfield.family in ("slice_stretch", "slice_stretch_reflected"):
        a, b = mapfield.params["alpha"], mapfield.params["beta"]
        if b > math.pi / 2 + 1e-12:
            raise ValueError("bound requires beta <= pi/2")
        if a <= 0:
            raise ValueError("bound requires alpha > 0")
        entries.append((1, a, b, max(1.0 / math.sin(a), math.pi / (b - a))))
    elif mapfield.family == "counterexample":
        kk = mapfield.params["k_max"] + 1
        thetas = counterexample_schedule(kk)
        for k in range(2, kk + 1):
            entries.append((k, thetas[k], thetas[k - 1], 2.0 ** ((k - 1) ** 2)))
    else:
        raise ValueError("derivative bound applies to the slice-stretch families")

    rows = []
    worst = 0.0
    for k, a, b, ref in entries:
        region = geometry.Region(kind="latitude-slice", dim=n, alpha=a, beta=b)
        pts = geometry.sample_region(region, samples, seed=seed + k)
        mats = calculus.frame_matrix(mapfield, pts)
        top = float(np.max(calculus.operator_norm(mats)))
        rows.append((k, ref, top, top / ref))
        worst = max(worst, top / ref)
    return DerivativeBoundReport(per_slice=tuple(rows), fitted_constant=worst,
                                 samples_per_slice=samples)


# ---------------------------------------------------------------------------
# factory
# ---------------------------------------------------------------------------

_FACTORIES = {
    "identity": identity_map,
    "rotation": rotation_map,
    "power": power_map,
    "radial_stretch": radial_stretch,
    "loglog": loglog_scalar,
    "dense_singularities": dense_singularities,
    "graph_embed": graph_embed,
    "slice_stretch": slice_stretch,
    "slice_stretch_reflected": slice_stretch_reflected,
    "counterexample": counterexample_map,
    "euclidean_radial_retraction": euclidean_radial_retraction,
    "mobius": mobius,
    "cap_profile": cap_profile,
    "inversion": inversion,
}


def make_map(family: str, **params) -> MapField:
    """Build a map family by name; the CLI config schema uses these names."""
    try:
        fn = _FACTORIES[family]
    except KeyError:
        raise ValueError(f"unknown map family {family!r}") from None
    return fn(**params)
