"""Experiment drivers behind ``hyperent run``.

Each driver turns a validated :class:`RunConfig` into named text artifacts
and a summary.  Nothing is written here; :func:`execute` hands everything
to a single writer so each file is produced exactly once.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__
from .analysis import cross_section, decay_fits
from .cft import lattice_vs_cft, ratio_spread
from .config import RunConfig
from .counting import cumulants, qpc_protocol
from .errors import ComputationError, GaplessError
from .gaussian import ContourField, SpectralData, contour, entropy, spectral_decompose
from .holo import (
    HoloChart,
    conic,
    extremal_curve,
    modular_flow_boundary,
    boundary_flow_rk,
    modular_flow_bulk,
    wedge_excess,
)
from .hyperfine import cumulant_density_field, edge_scaling_profile, hyperfine_field
from .io import curve_csv, edge_csv, field_csv, field_total, summary_json, write_artifacts
from .lattice import (
    ChernParams,
    LatticeSpec,
    Region,
    SiteIndex,
    build_chain_correlation,
    build_chern_torus_correlation,
    chern_number,
    fock_oracle,
    restrict,
)
from .spectrum import many_body_spectrum, reconstruct_spectrum, traces_from_spectrum

SUMMARY_NAME = "summary.json"


@dataclass
class RunOutcome:
    """Artifacts keyed by file name, summary, and named residual checks.

    ``error`` holds the type and message of an exception that stopped the run.
    """

    artifacts: dict[str, str] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)
    error: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def check(self, name: str, residual: float, tol: float) -> None:
        self.summary.setdefault("residuals", {})[name] = residual
        self.checks[name] = bool(residual <= tol)


def _tag(v: float) -> str:
    return f"{float(v):g}"


def _chain_state(cfg: RunConfig) -> tuple[LatticeSpec, Region, SpectralData]:
    c = cfg.chain
    filling = 0.5 if c.filling is None and c.mu is None else c.filling
    spec = LatticeSpec.chain(c.L, c.boundary, filling=filling, mu=c.mu)
    if cfg.region.stop > c.L:
        raise ComputationError(f"region stop {cfg.region.stop} exceeds chain length {c.L}")
    M = build_chain_correlation(spec)
    A = Region.interval(cfg.region.start, cfg.region.stop)
    return spec, A, spectral_decompose(restrict(M, A))


def _emit_standard_fields(
    cfg: RunConfig, sd: SpectralData, out: RunOutcome, hyperfine: bool = False
) -> dict[str, ContourField]:
    """Contours per order and cumulant densities per ``k``, with sum-rule checks."""
    tol = cfg.tolerances.sum_rule
    fields: dict[str, ContourField] = {}
    out.summary["entropies"] = {}
    out.summary["cumulants"] = {}
    for n in cfg.orders:
        f = contour(sd, n)
        S = entropy(sd, n).value
        name = f"contour_n{_tag(n)}.csv"
        fields[name] = f
        out.summary["entropies"][_tag(n)] = S
        out.check(f"sum_rule.s_n{_tag(n)}", abs(field_total(f) - S), tol)
    kmax = max(cfg.cumulant_orders, default=0)
    jet_c = cumulants(sd, max(kmax, 2)) if kmax else np.zeros(1)
    for k in cfg.cumulant_orders:
        f = cumulant_density_field(sd, k)
        name = f"cumulant_k{k}.csv"
        fields[name] = f
        out.summary["cumulants"][str(k)] = float(jet_c[k])
        out.check(f"sum_rule.C_{k}", abs(field_total(f) - float(jet_c[k])), tol)
    if cfg.hyperfine or hyperfine:
        for n, k in itertools.product(cfg.orders, [k for k in cfg.cumulant_orders if k % 2 == 0]):
            fields[f"hyperfine_n{_tag(n)}_k{k}.csv"] = hyperfine_field(sd, n, k)
    for name, f in fields.items():
        out.artifacts[name] = field_csv(f)
    return fields


def run_chain(cfg: RunConfig) -> RunOutcome:
    out = RunOutcome()
    _, A, sd = _chain_state(cfg)
    out.summary["region_size"] = len(A)
    _emit_standard_fields(cfg, sd, out)
    return out


def run_cft_compare(cfg: RunConfig) -> RunOutcome:
    out = RunOutcome()
    _, A, sd = _chain_state(cfg)
    fields = _emit_standard_fields(cfg, sd, out)
    reports = {}
    c2 = cumulant_density_field(sd, 2)
    for n in cfg.orders:
        f = fields[f"contour_n{_tag(n)}.csv"]
        rep = lattice_vs_cft(f, fraction=cfg.middle_fraction)
        spread = ratio_spread(f, c2, cfg.middle_fraction)
        reports[_tag(n)] = {**rep.as_dict(), "ratio_spread": spread}
        out.check(f"cft.mean_deviation_n{_tag(n)}", rep.mean_relative, cfg.tolerances.cft_mean)
        out.check(f"cft.ratio_spread_n{_tag(n)}", spread, cfg.tolerances.cft_ratio_spread)
    rep2 = lattice_vs_cft(c2, fraction=cfg.middle_fraction)
    reports["C_2"] = rep2.as_dict()
    out.summary["fit_reports"] = reports
    return out


def run_qpc(cfg: RunConfig) -> RunOutcome:
    out = RunOutcome()
    spec, A, sd = _chain_state(cfg)
    M = build_chain_correlation(spec)
    q = cfg.qpc
    xs = q.sites if q and q.sites is not None else [s.x for s in A.sites]
    order = q.order if q else 12
    targets = [SiteIndex(y=None, x=int(x)) for x in xs]
    for t in targets:
        if t not in A:
            raise ComputationError(f"site {t.x} is not in the region")
    for k in cfg.cumulant_orders:
        direct = cumulant_density_field(sd, k).as_dict()
        vals = np.array([qpc_protocol(M, A, t, k, max(order, k)) for t in targets])
        ref = np.array([direct[t] for t in targets])
        out.artifacts[f"qpc_k{k}.csv"] = field_csv(
            ContourField(values=vals, sites=tuple(targets), kind="cumulant", k=k)
        )
        out.check(f"qpc.C_{k}", float(np.max(np.abs(vals - ref))), cfg.tolerances.qpc)
    return out


def run_recon(cfg: RunConfig) -> RunOutcome:
    out = RunOutcome()
    spec, A, sd = _chain_state(cfg)
    res = reconstruct_spectrum(traces_from_spectrum(sd), tol=cfg.tolerances.spectrum)
    direct = many_body_spectrum(sd)
    out.check("recon.vs_products", float(np.max(np.abs(res.eigenvalues - direct))), cfg.tolerances.spectrum)
    out.summary["trace_residual"] = res.trace_residual
    out.summary["distinct"] = res.distinct
    out.summary["multiplicities"] = res.multiplicities
    if spec.boundary[0] != "infinite" and spec.n_sites <= 8:
        fock = fock_oracle(spec, A).spectrum
        out.check("recon.vs_fock", float(np.max(np.abs(res.eigenvalues - fock))), cfg.tolerances.spectrum)
    rows = ["index,eigenvalue,direct"]
    for i, (a, b) in enumerate(zip(res.eigenvalues.tolist(), direct.tolist())):
        rows.append(f"{i},{a:.17g},{b:.17g}")
    out.artifacts["spectrum.csv"] = "\n".join(rows) + "\n"
    out.summary["entropies"] = {_tag(n): entropy(sd, n).value for n in cfg.orders}
    return out


def run_chern_torus(cfg: RunConfig) -> RunOutcome:
    out = RunOutcome()
    c, r = cfg.chern, cfg.region
    if r.x1 > c.Lx or r.y1 > c.Ly:
        raise ComputationError("region does not fit on the torus")
    params = ChernParams(m=c.m, lam=c.lam, mu=c.mu)
    M = build_chern_torus_correlation(LatticeSpec.square(c.Lx, c.Ly), params)
    A = Region.rectangle(r.x0, r.x1, r.y0, r.y1)
    sd = spectral_decompose(restrict(M, A))
    _emit_standard_fields(cfg, sd, out, hyperfine=True)
    try:
        out.summary["chern_number"] = chern_number(params, c.chern_grid)
    except GaplessError as exc:
        out.summary["chern_number"] = None
        out.summary["chern_number_note"] = str(exc)
    row = (r.y0 + r.y1) // 2
    fits = {}
    for n, k in itertools.product(cfg.orders, [k for k in cfg.cumulant_orders if k % 2 == 0]):
        cs = cross_section(hyperfine_field(sd, n, k), row)
        try:
            fits[f"n{_tag(n)}_k{k}"] = decay_fits(cs).as_dict()
        except ValueError as exc:
            fits[f"n{_tag(n)}_k{k}"] = {"error": str(exc)}
    out.summary["cross_section_row"] = row
    out.summary["fit_reports"] = fits
    return out


def run_chern_cylinder(cfg: RunConfig) -> RunOutcome:
    out = RunOutcome()
    c = cfg.cylinder
    if c is None:
        from .config import CylinderSection

        c = CylinderSection()
    m_values = np.round(np.arange(c.m_min, c.m_max + c.m_step / 2, c.m_step), 10)
    ks = [k for k in cfg.cumulant_orders if k % 2 == 0]
    profiles = [
        edge_scaling_profile(m_values, kx, c.n, ks, Ly=c.Ly, lam=c.lam, mu=c.mu, boundary_width=c.boundary_width)
        for kx in c.kx
    ]
    out.artifacts["edge_profile.csv"] = edge_csv(profiles)
    collapse = {}
    for p in profiles:
        devs = [
            float(np.max(np.abs(p.normalized[a] - p.normalized[b])))
            for a, b in itertools.combinations(sorted(p.normalized), 2)
        ]
        collapse[_tag(p.k_x)] = {"max_pairwise_deviation": max(devs, default=0.0)}
    out.summary["collapse"] = collapse
    return out


def run_holo(cfg: RunConfig) -> RunOutcome:
    out = RunOutcome()
    h = cfg.holo
    if h is None:
        from .config import HoloSection

        h = HoloSection()
    tol = cfg.tolerances.flow
    curves = {}
    for n in cfg.orders:
        if n < 1:
            raise ComputationError("holographic curves need n >= 1")
        chart = HoloChart.symmetric(h.R, n)
        curve = extremal_curve(chart, h.samples, h.cutoff)
        out.artifacts[f"curve_n{_tag(n)}.csv"] = curve_csv(curve)
        u, v = (curve.x + curve.t) / 2, (curve.x - curve.t) / 2
        curves[_tag(n)] = {
            "length": curve.length,
            "max_wedge_excess": float(np.max(wedge_excess(curve.x, curve.t, curve.z, h.R))),
            "anchors": [list(a) for a in curve.anchor_points()],
        }
        out.check(f"holo.null_surfaces_n{_tag(n)}", float(np.max(np.abs(conic(u, v, chart)))) / h.R**2, tol)
        if n == 1:
            rt = float(np.max(np.abs(np.hypot(curve.x, curve.z) - h.R)) / h.R)
            out.check("holo.rt_semicircle", rt, tol)
        s = np.linspace(0.0, h.flow_time, 11)
        fn = modular_flow_bulk(h.flow_start, chart, (0.0, h.flow_time), s)
        f1 = modular_flow_bulk(h.flow_start, HoloChart.symmetric(h.R, 1), (0.0, n * h.flow_time), n * s)
        if fn.truncated or f1.truncated:
            curves[_tag(n)]["flow_truncated"] = True
        else:
            dev = max(float(np.max(np.abs(a - b))) for a, b in ((fn.u, f1.u), (fn.v, f1.v)))
            dev = max(dev, float(np.max(np.abs(fn.r - f1.r) / np.abs(f1.r))))
            out.check(f"holo.reparameterization_n{_tag(n)}", dev, tol)
        sb = np.linspace(-1.0, 1.0, 21)
        u0, v0 = h.flow_start[0], h.flow_start[1]
        closed = modular_flow_boundary(u0, v0, chart, sb)
        uu, vv = boundary_flow_rk(u0, v0, chart, sb)
        out.check(
            f"holo.boundary_rk_n{_tag(n)}",
            max(float(np.max(np.abs(closed.u - uu))), float(np.max(np.abs(closed.v - vv)))),
            tol,
        )
    out.summary["curves"] = curves
    return out


DRIVERS: dict[str, Callable[[RunConfig], RunOutcome]] = {
    "chain": run_chain,
    "cft-compare": run_cft_compare,
    "qpc": run_qpc,
    "recon": run_recon,
    "chern-torus": run_chern_torus,
    "chern-cylinder": run_chern_cylinder,
    "holo": run_holo,
}


def execute(cfg: RunConfig, out_dir: Optional[Path] = None) -> tuple[RunOutcome, Path]:
    """Run ``cfg`` and write its artifacts plus ``summary.json``.

    A :class:`ComputationError` (and domain errors raised mid-computation)
    is recorded in the summary and the outcome is marked failed.
    """
    out_dir = cfg.resolved_output_dir() if out_dir is None else Path(out_dir)
    try:
        outcome = DRIVERS[cfg.experiment](cfg)
    except (ComputationError, ValueError) as exc:
        outcome = RunOutcome(error={"type": type(exc).__name__, "message": str(exc)})
        outcome.checks["completed"] = False
    summary = dict(outcome.summary)
    summary.setdefault("residuals", {})
    summary["acceptance"] = dict(sorted(outcome.checks.items()))
    summary["passed"] = outcome.passed
    summary["error"] = outcome.error
    summary["experiment"] = cfg.experiment
    summary["version"] = __version__
    summary["config"] = cfg.echo()
    artifacts = dict(outcome.artifacts)
    artifacts[SUMMARY_NAME] = summary_json(summary)
    write_artifacts(out_dir, artifacts)
    return outcome, out_dir
