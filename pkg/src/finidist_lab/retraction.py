"""Lipschitz retraction of the sphere minus a small cap onto a geodesic cap.

The map is a three-step composite: stereographic projection from the
excluded cap's center q, Euclidean radial retraction onto the planar
image of the target cap, and the inverse projection.  Geodesic circles
not through q project to round spheres of the plane, so the planar
retraction's fixed disk is exactly the image of the target cap: the
composite is the identity there, lands in its closure everywhere, and is
Lipschitz because the excluded cap keeps the projection's derivative
bounded.  Outside the fixed cap the image is the cap's boundary, so the
Jacobian vanishes there; that rank collapse is what the degree and
Jacobian-matching checks lean on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import calculus, geometry
from .geometry import Region, unit_sphere_target
from .map_zoo import DomainSpec, MapField, SingularSet
from .estimates import Hypothesis, VerificationReport, _ratio


@dataclass(frozen=True)
class RetractionSpec:
    """Geometry of the retraction: fixed cap B(p, 2d), excluded cap B(q, r_prime).

    The scale d matches the boundary-control setup, where the fixed cap is
    the radius-2d ball; 2d must stay below a fifth of the injectivity
    radius and the two caps' closures must not meet.
    """

    p: np.ndarray
    d: float
    q: np.ndarray
    r_prime: float

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        q = np.asarray(self.q, dtype=float)
        if p.ndim != 1 or p.shape != q.shape:
            raise ValueError("p and q must be ambient vectors of equal dimension")
        for name, v in (("p", p), ("q", q)):
            if abs(np.linalg.norm(v) - 1.0) > 1e-9:
                raise ValueError(f"{name} must be a unit vector")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        if not 0 < 2 * self.d < math.pi / 5:
            raise ValueError("need 0 < 2d < pi/5")
        if not 0 < self.r_prime < math.pi:
            raise ValueError("need 0 < r_prime < pi")
        sep = float(geometry.geodesic_distance(p[None, :], q[None, :])[0])
        if sep <= 2 * self.d + self.r_prime:
            raise ValueError(
                f"caps overlap: distance(p, q) = {sep:.6f} needs > "
                f"{2 * self.d + self.r_prime:.6f}")

    @property
    def dim(self) -> int:
        return self.p.shape[0] - 1


def default_spec(n: int = 2) -> RetractionSpec:
    """A comfortable instance: fixed cap at the north pole, hole at the south."""
    p = np.zeros(n + 1)
    p[-1] = 1.0
    return RetractionSpec(p=p, d=0.25, q=-p, r_prime=0.3)


def _fixed_disk(spec: RetractionSpec, rot: np.ndarray) -> tuple[np.ndarray, float]:
    """Planar center and radius of the image of B(p, 2d).

    The projection does not send p to the image center, so the disk is
    recovered from the two boundary points that the great circle through
    q and p cuts out of the cap boundary: their images are antipodal on
    the image sphere.
    """
    p, q = spec.p, spec.q
    t = q - float(q @ p) * p
    norm = float(np.linalg.norm(t))
    if norm < 1e-12:
        # antipodal q: every great circle through p and q works alike
        t = geometry.tangent_frame(p)[:, 0]
    else:
        t = t / norm
    ends = np.stack([math.cos(2 * spec.d) * p + math.sin(2 * spec.d) * t,
                     math.cos(2 * spec.d) * p - math.sin(2 * spec.d) * t])
    w = _project(ends @ rot)
    return 0.5 * (w[0] + w[1]), 0.5 * float(np.linalg.norm(w[0] - w[1]))


def _project(y: np.ndarray) -> np.ndarray:
    """Stereographic projection from the north pole of the rotated frame."""
    return y[:, :-1] / (1.0 - y[:, -1:])


def _unproject(w: np.ndarray) -> np.ndarray:
    sq = np.sum(w * w, axis=1, keepdims=True)
    return np.concatenate([2.0 * w, sq - 1.0], axis=1) / (sq + 1.0)


def build_retraction(spec: RetractionSpec) -> MapField:
    """Assemble the retraction as a MapField with a closed-form differential."""
    n = spec.dim
    rot = geometry.rotation_to_point(spec.q)  # columns map north to q
    center, rho = _fixed_disk(spec, rot)

    def ev(x):
        y = x @ rot  # coordinates with q at the north pole
        w = _project(y)
        dvec = w - center[None, :]
        dist = np.linalg.norm(dvec, axis=1, keepdims=True)
        scale = np.where(dist > rho, rho / np.where(dist > 0, dist, 1.0), 1.0)
        return _unproject(center[None, :] + scale * dvec) @ rot.T

    def dv(x):
        m = x.shape[0]
        y = x @ rot
        w = _project(y)
        s = y[:, -1:]
        # stereographic differential, n x (n+1) in the rotated frame
        d_sp = np.zeros((m, n, n + 1))
        d_sp[:, :, :n] = np.eye(n) / (1.0 - s)[:, :, None]
        d_sp[:, :, n] = y[:, :n] / (1.0 - s) ** 2
        dvec = w - center[None, :]
        dist = np.linalg.norm(dvec, axis=1)
        outside = dist > rho
        d_ret = np.broadcast_to(np.eye(n), (m, n, n)).copy()
        if np.any(outside):
            dhat = dvec[outside] / dist[outside, None]
            proj = np.eye(n) - dhat[:, :, None] * dhat[:, None, :]
            d_ret[outside] = (rho / dist[outside])[:, None, None] * proj
        scale = np.where(outside, rho / np.where(dist > 0, dist, 1.0), 1.0)
        wp = center[None, :] + scale[:, None] * dvec
        sq = np.sum(wp * wp, axis=1)
        sigma = sq + 1.0
        d_inv = np.zeros((m, n + 1, n))
        d_inv[:, :n, :] = 2.0 * np.eye(n) / sigma[:, None, None] \
            - 4.0 * wp[:, :, None] * wp[:, None, :] / (sigma**2)[:, None, None]
        d_inv[:, n, :] = 4.0 * wp / (sigma**2)[:, None]
        chain = d_inv @ d_ret @ d_sp
        return np.einsum('ij,njk,lk->nil', rot, chain, rot)

    return MapField(
        family="retraction",
        params={"p": spec.p.tolist(), "d": spec.d, "q": spec.q.tolist(),
                "r_prime": spec.r_prime, "disk_radius": rho},
        domain=DomainSpec(kind="sphere-minus-cap", dim=n,
                          cap_center=tuple(spec.q), cap_radius=spec.r_prime),
        target=unit_sphere_target(n),
        singular=SingularSet(),
        has_analytic_differential=True, is_finite_distortion=False,
        label=f"retraction(d={spec.d:g},r'={spec.r_prime:g})",
        _evaluate=ev, _differential=dv)


def verify_retraction(mapfield: MapField, samples: int = 10000,
                      seed: int = 0) -> VerificationReport:
    """Check the retraction identities on samples and estimate its Lipschitz bound.

    Identity on the fixed cap, idempotence, and containment are each held
    to 1e-9; the Jacobian outside the fixed cap to 1e-6.  The sampled
    Lipschitz estimate L-hat is a max over nested random pairs, so
    doubling the pair count can only raise it; the reported lhs is the
    relative growth under doubling, required to stay below 10%.
    """
    spec_p = np.asarray(mapfield.params["p"], dtype=float)
    two_d = 2.0 * float(mapfield.params["d"])
    n = mapfield.domain.dim

    core = geometry.sample_region(
        Region(kind="geodesic-ball", dim=n, center=spec_p, radius=two_d),
        samples, seed=seed, law="coverage")
    identity_err = float(np.max(np.linalg.norm(mapfield.evaluate(core) - core, axis=1)))

    dom = calculus.domain_region(mapfield)
    pts = geometry.sample_region(dom, 4 * samples, seed=seed + 1, law="coverage")
    img = mapfield.evaluate(pts)
    idem_err = float(np.max(np.linalg.norm(mapfield.evaluate(img) - img, axis=1)))
    contain_err = float(np.max(
        geometry.geodesic_distance(img, spec_p[None, :]) - two_d))

    gaps = geometry.geodesic_distance(pts[0::2], pts[1::2])
    moves = geometry.geodesic_distance(img[0::2], img[1::2])
    quotients = moves / gaps
    l_half = float(np.max(quotients[:samples]))
    l_full = float(np.max(quotients))
    growth = (l_full - l_half) / l_full if l_full > 0 else 0.0

    outside = geometry.geodesic_distance(pts, spec_p[None, :]) > two_d + 1e-6
    jac = calculus.jacobian_det(calculus.frame_matrix(mapfield, pts[outside]))
    jac_err = float(np.max(np.abs(jac))) if jac.size else 0.0

    hyps = (
        Hypothesis("identity-on-fixed-cap", identity_err, 1e-9, identity_err <= 1e-9),
        Hypothesis("idempotence", idem_err, 1e-9, idem_err <= 1e-9),
        Hypothesis("containment", contain_err, 1e-9, contain_err <= 1e-9),
        Hypothesis("jacobian-vanishes-outside", jac_err, 1e-6, jac_err <= 1e-6),
    )
    verdict = "pass" if all(h.ok for h in hyps) and growth <= 0.1 else "fail"
    return VerificationReport(
        name=f"retraction[{mapfield.label}]", lhs=growth, rhs=0.1,
        ratio=_ratio(growth, 0.1), tolerance=0.0, hypotheses=hyps,
        verdict=verdict,
        details={"lipschitz": l_full, "lipschitz_half": l_half,
                 "samples": samples, "pairs": 2 * samples,
                 "outside_points": int(np.count_nonzero(outside))})
