"""Experiment runner: named suites, JSON/CSV reports, deterministic outputs.

Each suite assembles VerificationReport rows from the library modules and
the runner serializes them twice: a JSON document carrying hypotheses and
quadrature indicators, and a flat CSV for plotting.  With a fixed config
and seed the CSV is byte-identical across runs.  Exit code 0 means no row
failed (hypothesis-not-met does not fail a run), 1 means at least one
fail verdict, 2 means the configuration was unusable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import calculus, estimates, geometry, map_zoo, retraction

SCHEMA_VERSION = 1

_SUITES = ("constants", "morrey", "osc-log", "boundary-control", "degree",
           "counterexample", "retraction", "loglog", "extremal")

_SUITE_LEVELS = {"constants": 4, "morrey": 4, "osc-log": 3,
                 "boundary-control": 3, "degree": 4, "counterexample": 3,
                 "retraction": 3, "loglog": 4, "extremal": 4}


class ConfigError(ValueError):
    """Raised for unusable configuration; mapped to exit code 2."""


@dataclass
class ExperimentConfig:
    suite: str = "constants"
    n: int = 2
    k_max: int = 6
    level: Optional[int] = None
    samples: int = 4096
    seed: int = 0
    tolerance: float = 1e-3
    budget: int = 60
    spheres_per_map: int = 10
    windows_per_map: int = 20
    families: tuple = ("constant", "cosine", "cap-bump")
    out: str = "."

    def validate(self) -> None:
        if self.suite != "all" and self.suite not in _SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}; choose from "
                              f"{', '.join(_SUITES)} or 'all'")
        if not 2 <= self.n <= 4:
            raise ConfigError("n must be 2, 3 or 4")
        if not 2 <= self.k_max <= 6:
            raise ConfigError("k_max must be between 2 and 6")
        if self.level is not None and not 1 <= self.level <= 8:
            raise ConfigError("level must be between 1 and 8")
        if self.samples < 4:
            raise ConfigError("samples must be at least 4")
        if self.tolerance <= 0:
            raise ConfigError("tolerance must be positive")
        if self.budget < 8:
            raise ConfigError("budget must be at least 8")
        for fam in self.families:
            if fam not in estimates._SEARCH_FAMILIES:
                raise ConfigError(f"unknown search family {fam!r}")

    def level_for(self, suite: str) -> int:
        return self.level if self.level is not None else _SUITE_LEVELS[suite]


def load_config(path: Optional[str], overrides: dict) -> ExperimentConfig:
    data = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config document must be a JSON object")
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config fields: {', '.join(sorted(unknown))}")
    data.update({k: v for k, v in overrides.items() if v is not None})
    if "families" in data:
        data["families"] = tuple(data["families"])
    try:
        cfg = ExperimentConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def _report(name, lhs, rhs, tolerance, hypotheses=(), verdict=None, details=None):
    if verdict is None:
        ok = all(h.ok for h in hypotheses)
        verdict = ("pass" if lhs <= rhs * (1 + tolerance) else "fail") if ok \
            else "hypothesis-not-met"
    return estimates.VerificationReport(
        name=name, lhs=float(lhs), rhs=float(rhs),
        ratio=estimates._ratio(lhs, rhs), tolerance=tolerance,
        hypotheses=tuple(hypotheses), verdict=verdict, details=details or {})


def suite_constants(cfg: ExperimentConfig) -> list:
    reports = []
    for n in (2, 3, 4):
        t = estimates.constants(n, geometry.unit_sphere_target(n))
        reports.append(_report(
            f"constants[n={n},unit-sphere]", 0.0, 0.0, cfg.tolerance,
            verdict="pass",
            details={"c_m": t.c_m, "d_n": t.d_n, "a_n": t.a_n, "b_n": t.b_n,
                     "six_cm_pow_n": t.six_cm_pow_n}))
    return reports


def suite_morrey(cfg: ExperimentConfig) -> list:
    level = cfg.level_for("morrey")
    reports = []
    for i, case in enumerate(estimates.morrey_corpus(
            spheres_per_map=cfg.spheres_per_map)):
        reports.append(estimates.verify_morrey(
            case.mapfield, case.center, case.radius, level=level,
            count=cfg.samples, seed=cfg.seed + i, tolerance=cfg.tolerance,
            breakpoints=case.breakpoints))
    return reports


def suite_osc_log(cfg: ExperimentConfig) -> list:
    level = cfg.level_for("osc-log")
    reports = []
    for ci, case in enumerate(estimates.osc_log_corpus(
            windows_per_map=cfg.windows_per_map)):
        for wi, (x, r, big) in enumerate(case.windows):
            reports.append(estimates.verify_osc_log(
                case.mapfield, x, r, big, level=level, count=cfg.samples,
                seed=cfg.seed + 1000 * ci + wi, tolerance=cfg.tolerance))
    return reports


def suite_boundary_control(cfg: ExperimentConfig) -> list:
    level = cfg.level_for("boundary-control")
    north = np.array([0.0, 0.0, 1.0])
    x0 = np.array([0.3, -0.5, math.sqrt(1 - 0.34)])
    rows = []
    geodesic = [(map_zoo.power_map(2), x0, 0.06), (map_zoo.rotation_map(2, seed=1), x0, 0.12),
                (map_zoo.mobius(0.3 + 0.2j), -x0, 0.1)]
    for m, c, r in geodesic:
        ball = geometry.Region(kind="geodesic-ball", dim=2, center=c, radius=r)
        rows.append(estimates.verify_boundary_control(
            m, ball, mode="manifold-6x", level=level, count=cfg.samples,
            seed=cfg.seed, tolerance=cfg.tolerance))
    theta2 = map_zoo.counterexample_schedule(cfg.k_max)[2]
    ball = geometry.Region(kind="geodesic-ball", dim=2, center=north, radius=theta2)
    rows.append(estimates.verify_boundary_control(
        map_zoo.counterexample_map(cfg.k_max), ball, mode="manifold-6x",
        level=level, count=cfg.samples, seed=cfg.seed, tolerance=cfg.tolerance))
    eball = geometry.Region(kind="euclidean-ball", dim=2, center=np.zeros(2),
                            radius=0.5)
    for eps in (0.5, 0.8):
        rows.append(estimates.verify_boundary_control(
            map_zoo.radial_stretch(eps), eball, mode="euclidean-2x",
            level=level, count=cfg.samples, seed=cfg.seed,
            tolerance=cfg.tolerance))
    return rows


def suite_degree(cfg: ExperimentConfig) -> list:
    level = cfg.level_for("degree")
    rows = []
    maps = [map_zoo.power_map(k) for k in range(1, 6)]
    maps.append(map_zoo.cap_profile(1.0))
    for m in maps:
        d = estimates.degree(m, level=level)
        rows.append(_report(
            f"degree[{m.label}]", d.residual, cfg.tolerance, 0.0,
            details={"estimate": d.estimate, "nearest": d.nearest,
                     "quad_level": level,
                     "quad_error_indicator": d.error_indicator}))
    return rows


def suite_counterexample(cfg: ExperimentConfig) -> list:
    level = cfg.level_for("counterexample")
    audit = estimates.counterexample_audit(
        n=2, k_max=cfg.k_max, level=level, count=cfg.samples, seed=cfg.seed)
    four_pi = audit.sphere_volume
    rows = []
    for s in audit.slices:
        hyps = [estimates.Hypothesis("volume-exact-below-bound", s.volume_exact,
                                     s.volume_bound,
                                     s.volume_exact <= s.volume_bound * (1 + 1e-12))]
        if s.k >= 2:
            hyps.append(estimates.Hypothesis("oscillation-within-inner-ball",
                                             s.oscillation_inner, 1.99,
                                             s.oscillation_inner >= 1.99))
        rows.append(_report(
            f"counterexample[k={s.k}]", abs(s.jacobian_integral - four_pi),
            0.01 * four_pi, 0.0, hypotheses=hyps,
            details={"alpha": s.alpha, "beta": s.beta,
                     "jacobian_integral": s.jacobian_integral,
                     "energy_n": s.energy_n, "orlicz": s.orlicz,
                     "oscillation_inner": s.oscillation_inner,
                     "quad_level": level, "quad_error_indicator": 0.0}))
    hyps = [estimates.Hypothesis("energy-grows-linearly", audit.total_energy,
                                 0.99 * cfg.k_max * four_pi,
                                 audit.total_energy >= 0.99 * cfg.k_max * four_pi)]
    if cfg.k_max >= 3:
        p3 = audit.slices[2].cumulative_orlicz
        rows.append(_report(
            "counterexample[cumulative]", audit.total_orlicz, 2.0 * p3, 0.0,
            hypotheses=hyps,
            details={"total_energy": audit.total_energy,
                     "total_orlicz": audit.total_orlicz,
                     "orlicz_at_k3": p3, "k_max": cfg.k_max,
                     "quad_level": level, "quad_error_indicator": 0.0}))
    else:
        rows.append(_report(
            "counterexample[cumulative]", 0.0, 0.0, 0.0, hypotheses=hyps,
            details={"total_energy": audit.total_energy,
                     "total_orlicz": audit.total_orlicz, "k_max": cfg.k_max,
                     "quad_level": level, "quad_error_indicator": 0.0}))
    return rows


def suite_retraction(cfg: ExperimentConfig) -> list:
    rows = []
    specs = [retraction.default_spec(),
             retraction.RetractionSpec(p=np.array([1.0, 0.0, 0.0]), d=0.2,
                                       q=np.array([0.0, 0.0, 1.0]), r_prime=0.25)]
    for spec in specs:
        R = retraction.build_retraction(spec)
        rows.append(retraction.verify_retraction(R, samples=cfg.samples,
                                                 seed=cfg.seed))
    return rows


def suite_loglog(cfg: ExperimentConfig) -> list:
    level = cfg.level_for("loglog")
    ll = map_zoo.loglog_scalar()
    est = calculus.energy(ll, calculus.domain_region(ll), level=level)
    rows = [_report(
        "loglog-energy", abs(est.value - math.pi), cfg.tolerance, 0.0,
        details={"energy": est.value, "oracle": math.pi, "quad_level": level,
                 "quad_error_indicator": est.error_indicator})]
    ge = map_zoo.graph_embed()
    audit = calculus.finite_distortion_audit(ge, samples=cfg.samples,
                                             seed=cfg.seed)
    rows.append(_report(
        "graph-embed-positivity", audit.violation_fraction, 0.0, 0.0,
        details={"samples": audit.samples,
                 "positive_fraction": audit.positive_fraction,
                 "min_jacobian": audit.min_jacobian}))
    return rows


def suite_extremal(cfg: ExperimentConfig) -> list:
    rows = []
    for fam in cfg.families:
        res = estimates.morrey_extremal_search(
            fam, budget=cfg.budget, level=cfg.level_for("extremal"),
            count=min(cfg.samples, 2048), seed=cfg.seed)
        rows.append(_report(
            f"extremal[{fam}]", res.best_ratio, 1.0, cfg.tolerance,
            details={"best_params": list(res.best_params),
                     "evaluations": res.evaluations}))
    return rows


_SUITE_FNS = {
    "constants": suite_constants,
    "morrey": suite_morrey,
    "osc-log": suite_osc_log,
    "boundary-control": suite_boundary_control,
    "degree": suite_degree,
    "counterexample": suite_counterexample,
    "retraction": suite_retraction,
    "loglog": suite_loglog,
    "extremal": suite_extremal,
}


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _finite(v: float):
    return float(v) if math.isfinite(v) else repr(float(v))


def _constants_block(cfg: ExperimentConfig) -> dict:
    block = {"morrey_constant_by_n": {str(n): estimates.morrey_constant(n)
                                      for n in (2, 3, 4)}}
    t = estimates.constants(cfg.n, geometry.unit_sphere_target(cfg.n))
    block["unit_sphere_target"] = {"n": cfg.n, "c_m": t.c_m, "d_n": t.d_n,
                                   "a_n": t.a_n, "b_n": t.b_n,
                                   "six_cm_pow_n": t.six_cm_pow_n}
    return block


def _json_document(cfg: ExperimentConfig, rows: list) -> dict:
    reports = []
    for suite, rep in rows:
        reports.append({
            "suite": suite,
            "name": rep.name,
            "hypotheses": [{"name": h.name, "value": _finite(h.value),
                            "threshold": _finite(h.threshold), "ok": bool(h.ok)}
                           for h in rep.hypotheses],
            "lhs": _finite(rep.lhs),
            "rhs": _finite(rep.rhs),
            "ratio": _finite(rep.ratio),
            "tolerance": _finite(rep.tolerance),
            "verdict": rep.verdict,
            "quadrature": {
                "level": int(rep.details.get("quad_level", cfg.level_for(suite))),
                "error_indicator": _finite(rep.details.get(
                    "quad_error_indicator", 0.0))},
        })
    echo = asdict(cfg)
    echo["families"] = list(echo["families"])
    return {"schema_version": SCHEMA_VERSION, "config_echo": echo,
            "constants": _constants_block(cfg), "reports": reports}


def _params_field(rep) -> str:
    keep = ("r", "R", "estimate", "alpha", "beta", "best_params", "lipschitz",
            "energy", "fitted_constant", "c_m", "a_n", "b_n")
    parts = [f"{k}={rep.details[k]!r}" for k in keep if k in rep.details]
    return ";".join(parts)


def _csv_text(rows: list) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["schema_version", "suite", "map", "params", "lhs", "rhs",
                     "ratio", "verdict"])
    for suite, rep in rows:
        writer.writerow([SCHEMA_VERSION, suite, rep.name, _params_field(rep),
                         repr(rep.lhs), repr(rep.rhs), repr(rep.ratio),
                         rep.verdict])
    return buf.getvalue()


def run(cfg: ExperimentConfig) -> int:
    """Execute the configured suite(s) and write report files."""
    suites = list(_SUITES) if cfg.suite == "all" else [cfg.suite]
    rows = []
    for suite in suites:
        for rep in _SUITE_FNS[suite](cfg):
            rows.append((suite, rep))
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = "all" if cfg.suite == "all" else cfg.suite
    doc = _json_document(cfg, rows)
    (outdir / f"{stem}.json").write_text(
        json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    (outdir / f"{stem}.csv").write_text(_csv_text(rows), encoding="utf-8")
    counts = {"pass": 0, "fail": 0, "hypothesis-not-met": 0}
    for _, rep in rows:
        counts[rep.verdict] += 1
    print(f"{stem}: {len(rows)} checks -> {counts['pass']} pass, "
          f"{counts['fail']} fail, {counts['hypothesis-not-met']} hypothesis-not-met")
    return 1 if counts["fail"] else 0


def main(argv: Optional[list] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="finidist-lab",
        description="Verification suites for maps of finite distortion.")
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--suite", help="suite name (or 'all'): " + ", ".join(_SUITES))
    parser.add_argument("--out", help="output directory for JSON/CSV reports")
    parser.add_argument("--seed", type=int, help="base random seed")
    parser.add_argument("--level", type=int, help="quadrature refinement level")
    parser.add_argument("--samples", type=int, help="sample count per check")
    parser.add_argument("--tol", type=float, dest="tolerance",
                        help="pass tolerance for lhs <= rhs checks")
    args = parser.parse_args(argv)
    overrides = {k: getattr(args, k) for k in
                 ("suite", "out", "seed", "level", "samples", "tolerance")}
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    raise SystemExit(main())
