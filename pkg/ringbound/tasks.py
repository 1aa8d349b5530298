"""
Scenario Tasks
One runner per scenario task; each returns the tables, grids and summary
record that the CLI writes out
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ringbound.core.capacity import default_reference_condenser
from ringbound.core.toolkit import RingBound
from ringbound.models.results import Certificate
from ringbound.scenario import Scenario
from ringbound.utils.grid_io import GridData, solution_grid

logger = logging.getLogger(__name__)

Row = Sequence[Any]


@dataclass
class Table:
    header: List[str]
    rows: List[Row]
    meta: Dict[str, Any] = field(default_factory=dict)


@dataclass
class TaskOutput:
    """
    Everything a task produces. ``failure`` names a reported numerical
    failure (the files are still written).
    """

    tables: Dict[str, Table] = field(default_factory=dict)
    grids: Dict[str, Tuple[GridData, bool]] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)
    failure: Optional[str] = None
    timings: Dict[str, float] = field(default_factory=dict)


def _divergence_table(rb: RingBound, scenario: Scenario) -> Table:
    reports = rb.divergence_report(scenario.gauge(), scenario.exponents())
    return Table(
        ["exponent_of", "q", "delta0", "horizon", "partial_integral", "verdict"],
        [
            [key, r.exponent, r.delta0, r.horizon, r.partial_integral, r.verdict]
            for key, r in reports.items()
        ],
    )


def _eps_grid(rb: RingBound, scenario: Scenario) -> Optional[np.ndarray]:
    spec = scenario.eps_grid()
    if spec is None:
        return None
    if "epsilons" in spec:
        return np.asarray(spec["epsilons"], dtype=float)
    return rb.certificate_grid(
        scenario.r0(), scenario.exponents().n, spec.get("decades"), spec.get("per_decade")
    )


def _b_n(rb: RingBound, scenario: Scenario, out: TaskOutput) -> float:
    spec = scenario.b_n_spec()
    if spec != "calibrate":
        return float(spec)
    exps = scenario.exponents()
    value = rb.calibrate_kruglikov_constant(
        [default_reference_condenser(exps.n)], exps, scenario.calibration_resolution()
    )
    out.summary["b_n_calibrated"] = value
    logger.info("calibrated b_n = %.10g", value)
    return value


def _certificate_meta(cert: Certificate) -> Dict[str, Any]:
    meta: Dict[str, Any] = {"kind": cert.kind, "status": cert.status}
    for key, value in cert.inputs.items():
        meta[key] = (
            " ".join(f"{k}={v}" for k, v in value.items()) if isinstance(value, dict) else value
        )
    meta["provenance"] = " > ".join(cert.provenance)
    meta["conditional"] = cert.conditional
    for note in cert.notes:
        meta.setdefault("note", note)
    return meta


def _certificate_summary(cert: Certificate) -> Dict[str, Any]:
    finite = cert.bounds[np.isfinite(cert.bounds)]
    return {
        "kind": cert.kind,
        "status": cert.status,
        "conditional": cert.conditional,
        "provenance": list(cert.provenance),
        "inputs": cert.inputs,
        "points": int(cert.bounds.size),
        "finite_points": cert.finite_count,
        "smallest_bound": float(finite.min()) if finite.size else float("inf"),
        "notes": list(cert.notes),
    }


def run_mass_check(rb: RingBound, scenario: Scenario) -> TaskOutput:
    domain = scenario.domain()
    check = rb.verify_mass_bound(scenario.field(), scenario.gauge(), domain, scenario.budget())
    out = TaskOutput()
    out.tables["mass_check.csv"] = Table(
        ["integral", "abserr", "M0", "satisfied", "diverged", "method"],
        [[check.integral, check.abserr, scenario.budget().M0, check.satisfied, check.diverged,
          check.method]],
    )
    if "exponents" in scenario.data:
        out.tables["divergence.csv"] = _divergence_table(rb, scenario)
    out.summary = {"integral": check.integral, "satisfied": check.satisfied}
    return out


def run_ring_bound(rb: RingBound, scenario: Scenario) -> TaskOutput:
    exps, ring, fld = scenario.exponents(), scenario.ring(), scenario.field()
    I = rb.ring_integral_I(fld, ring, exps)
    bound = rb.modulus_upper_bound(I, exps)
    out = TaskOutput()
    out.tables["ring_bound.csv"] = Table(
        ["r1", "r2", "n", "p", "I", "bound", "identity_capacity"],
        [[ring.r1, ring.r2, exps.n, exps.p, I, bound, rb.ring_capacity_exact(ring, exps)]],
        {"field": fld.kind, "x0": ring.x0},
    )
    profile = rb.radial_profile(fld, ring, scenario.radial_samples())
    out.tables["radial_profile.csv"] = Table(["t", "q"], profile.rows())
    out.summary = {"I": I, "bound": bound}
    return out


def run_fubini(rb: RingBound, scenario: Scenario) -> TaskOutput:
    exps, ring = scenario.exponents(), scenario.ring()
    check = rb.fubini_check(scenario.field(), ring, exps)
    out = TaskOutput()
    out.tables["fubini.csv"] = Table(
        ["r1", "r2", "n", "p", "lhs", "rhs", "abserr", "relative_gap"],
        [[ring.r1, ring.r2, exps.n, exps.p, check.lhs, check.rhs, check.abserr,
          check.relative_gap]],
    )
    out.summary = {"relative_gap": check.relative_gap}
    return out


def run_orlicz_curve(rb: RingBound, scenario: Scenario) -> TaskOutput:
    spec = scenario.eps_grid() or {}
    sigma = scenario.sigmas()[0]
    curve = rb.orlicz_curve(
        scenario.gauge(),
        scenario.exponents(),
        scenario.budget(),
        scenario.x0(),
        scenario.r0(),
        sigma,
        decades=spec.get("decades"),
        per_decade=spec.get("per_decade"),
        phi_floor=scenario.flag("phi_floor"),
    )
    out = TaskOutput()
    out.tables["orlicz_curve.csv"] = Table(
        ["epsilon", "lower_bound", "meets_sigma"],
        curve.rows(),
        {"sigma": sigma, "r_star": curve.r_star},
    )
    out.tables["divergence.csv"] = _divergence_table(rb, scenario)
    out.summary = {"sigma": sigma, "r_star": curve.r_star}
    return out


def run_epsilon_star(rb: RingBound, scenario: Scenario) -> TaskOutput:
    rows = []
    for sigma in scenario.sigmas():
        res = rb.epsilon_star(
            scenario.gauge(),
            scenario.exponents(),
            scenario.budget(),
            scenario.x0(),
            scenario.r0(),
            sigma,
            phi_floor=scenario.flag("phi_floor"),
        )
        rows.append([sigma, res.found, res.r_star, res.reason, res.floor, res.bound_at_floor,
                     res.conditional, res.divergence_fails, res.grid_step])
    out = TaskOutput()
    out.tables["epsilon_star.csv"] = Table(
        ["sigma", "found", "r_star", "reason", "floor", "bound_at_floor", "conditional",
         "divergence_fails", "grid_step"],
        rows,
    )
    out.summary = {"r_star": {str(r[0]): r[2] for r in rows}}
    return out


def run_capacity_oracle(rb: RingBound, scenario: Scenario) -> TaskOutput:
    exps, cond = scenario.exponents(), scenario.condenser()
    sol = rb.discrete_p_capacity(
        cond, exps, scenario.resolution(), rasterization=scenario.rasterization()
    )
    exact = None
    if "condenser" not in scenario.data:
        exact = rb.ring_capacity_exact(scenario.ring(), exps)
    out = TaskOutput()
    out.tables["capacity.csv"] = Table(
        ["n", "p", "resolution", "energy", "exact", "iterations", "residual", "converged"],
        [[exps.n, exps.p, sol.resolution, sol.energy, exact, sol.iterations, sol.residual,
          sol.converged]],
        {"geometry": cond.describe(), "rasterization": scenario.rasterization()},
    )
    fmt = scenario.export_format()
    if fmt is not None:
        name = "potential.grid" if fmt == "text" else "potential.bin"
        out.grids[name] = (solution_grid(sol), fmt == "binary")
    out.summary = {
        "geometry": cond.describe(),
        "n": exps.n,
        "p": exps.p,
        "resolution": sol.resolution,
        "energy": sol.energy,
        "residual": sol.residual,
        "converged": sol.converged,
    }
    out.timings["capacity_wall_time"] = sol.wall_time
    if not sol.converged:
        out.failure = f"capacity minimizer did not converge in {sol.iterations} iterations"
    return out


def run_certificate_thm1(rb: RingBound, scenario: Scenario) -> TaskOutput:
    cert = rb.capacity_decay_certificate(
        scenario.gauge(),
        scenario.exponents(),
        scenario.budget(),
        scenario.x0(),
        scenario.r0(),
        eps_grid=_eps_grid(rb, scenario),
        allow_conditional=scenario.flag("allow_conditional"),
        phi_floor=scenario.flag("phi_floor"),
    )
    out = TaskOutput()
    out.tables["certificate.csv"] = Table(["epsilon", "bound"], cert.rows(),
                                          _certificate_meta(cert))
    out.summary = _certificate_summary(cert)
    table = scenario.delta_table()
    if table is not None:
        chordal = rb.chordal_modulus_from_delta_table(cert, table)
        out.tables["chordal_modulus.csv"] = Table(
            ["epsilon", "chordal_diameter_bound"], chordal.rows(), _certificate_meta(chordal)
        )
        out.summary["chordal_modulus"] = _certificate_summary(chordal)
    return out


def run_certificate_thm2(rb: RingBound, scenario: Scenario) -> TaskOutput:
    out = TaskOutput()
    cert = rb.diameter_certificate(
        scenario.gauge(),
        scenario.exponents(),
        scenario.budget(),
        scenario.x0(),
        scenario.r0(),
        _b_n(rb, scenario, out),
        eps_grid=_eps_grid(rb, scenario),
        allow_conditional=scenario.flag("allow_conditional"),
    )
    stages = [cert.stages.get(k, np.full(cert.bounds.size, np.inf))
              for k in ("alpha", "alpha1", "alpha2")]
    rows = [[e, *(s[i] for s in stages), b] for i, (e, b) in enumerate(cert.rows())]
    out.tables["certificate.csv"] = Table(
        ["epsilon", "alpha", "alpha1", "alpha2", "alpha3"], rows, _certificate_meta(cert)
    )
    out.summary.update(_certificate_summary(cert))
    if cert.status != "ok":
        out.failure = f"diameter certificate status {cert.status}"
    return out


def run_soundness_sweep(rb: RingBound, scenario: Scenario) -> TaskOutput:
    out = TaskOutput()
    report = rb.soundness_sweep(
        scenario.alphas(),
        scenario.gauge(),
        scenario.exponents(),
        scenario.r0(),
        _b_n(rb, scenario, out),
        eps_grid=_eps_grid(rb, scenario),
    )
    cert = report.certificate
    header = ["epsilon", "bound"] + [f"diameter_alpha_{a:g}" for a in report.alphas]
    rows = [
        [e, b, *(report.measured[a][i] for a in report.alphas)]
        for i, (e, b) in enumerate(cert.rows())
    ]
    out.tables["sweep.csv"] = Table(header, rows, _certificate_meta(cert))
    out.tables["violations.csv"] = Table(
        ["alpha", "epsilon", "measured", "bound"], [list(v) for v in report.violations]
    )
    out.summary.update(_certificate_summary(cert))
    out.summary["alphas"] = report.alphas
    out.summary["violations"] = len(report.violations)
    if cert.status != "ok":
        out.failure = f"diameter certificate status {cert.status}"
    elif not report.ok:
        out.failure = f"{len(report.violations)} certificate violation(s)"
    return out


TASK_RUNNERS: Dict[str, Callable[[RingBound, Scenario], TaskOutput]] = {
    "mass-check": run_mass_check,
    "ring-bound": run_ring_bound,
    "fubini": run_fubini,
    "orlicz-curve": run_orlicz_curve,
    "epsilon-star": run_epsilon_star,
    "capacity-oracle": run_capacity_oracle,
    "certificate-thm1": run_certificate_thm1,
    "certificate-thm2": run_certificate_thm2,
    "soundness-sweep": run_soundness_sweep,
}


def run_task(rb: RingBound, scenario: Scenario) -> TaskOutput:
    logger.info("running task %s from %s", scenario.task, scenario.source)
    return TASK_RUNNERS[scenario.task](rb, scenario)
