"""Acceptance checks shared by ``hyperent selftest`` and the test suite.

Each check returns a :class:`CriterionResult` whose ``line()`` is a single
pass/fail summary.  A check passes only if its numerical condition holds
and it finished within its runtime budget.
"""

from __future__ import annotations

import itertools
import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .analysis import cross_section, decay_fits, monotone
from .cft import ContinuumParams, lattice_vs_cft, ratio_spread
from .config import parse_config
from .counting import cumulants, project_measure, qpc_protocol
from .errors import DegeneracyError
from .gaussian import (
    analytic_tridiagonal_K,
    contour,
    entropy,
    gibbs_correlation,
    spectral_decompose,
)
from .holo import (
    HoloChart,
    boundary_flow_rk,
    extremal_curve,
    modular_flow_boundary,
    modular_flow_bulk,
    wedge_excess,
)
from .hyperfine import beta_coefficient, cumulant_density_field, edge_scaling_profile, hyperfine_field
from .lattice import (
    ChernParams,
    CorrelationMatrix,
    LatticeSpec,
    Region,
    SiteIndex,
    build_chain_correlation,
    build_chern_torus_correlation,
    chern_number,
    fock_oracle,
    restrict,
)
from .pipeline import execute
from .spectrum import reconstruct_spectrum, traces_from_spectrum


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    ok: bool
    detail: str
    seconds: float
    budget: Optional[float]

    @property
    def passed(self) -> bool:
        return self.ok and (self.budget is None or self.seconds <= self.budget)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        budget = "" if self.budget is None else f" / {self.budget:g}s"
        return f"[{status}] {self.number:>2} {self.name}: {self.detail} ({self.seconds:.1f}s{budget})"


def _timed(number: int, name: str, budget: Optional[float], fn: Callable[[], tuple[bool, str]]) -> CriterionResult:
    t0 = time.perf_counter()
    ok, detail = fn()
    return CriterionResult(number, name, bool(ok), detail, time.perf_counter() - t0, budget)


# Random instances ----------------------------------------------------------


def _chain_sites(n: int) -> tuple[SiteIndex, ...]:
    return tuple(SiteIndex(y=None, x=i) for i in range(n))


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_correlation(rng: np.random.Generator, n: int, pure: Optional[bool] = None) -> CorrelationMatrix:
    """Random valid correlation matrix on ``n`` chain sites.

    Pure states are projectors onto a random subspace; mixed states have
    eigenvalues drawn uniformly from ``[0, 1]``.
    """
    if pure is None:
        pure = bool(rng.integers(2))
    U = random_unitary(rng, n)
    if pure:
        occ = np.zeros(n)
        occ[: int(rng.integers(0, n + 1))] = 1.0
    else:
        occ = rng.uniform(0, 1, n)
    M = (U * occ) @ U.conj().T
    return CorrelationMatrix(0.5 * (M + M.conj().T), _chain_sites(n), tag="random")


# Criteria ------------------------------------------------------------------


def criterion_1() -> CriterionResult:
    def run():
        b22 = beta_coefficient(2, 2).value
        b42 = beta_coefficient(4, 2).value
        b21 = beta_coefficient(2, 1).value
        d = 1e-6
        limit = 0.5 * (beta_coefficient(2, 1 + d).value + beta_coefficient(2, 1 - d).value)
        errs = (abs(b22 - math.pi**2 / 4), abs(b42 + math.pi**4 / 192), abs(b21 - math.pi**2 / 3))
        ok = errs[0] <= 1e-14 and errs[1] <= 1e-14 and errs[2] <= 1e-14 and abs(limit - b21) <= 1e-6
        return ok, (
            f"|beta_2(2)-pi^2/4|={errs[0]:.1e}, |beta_4(2)+pi^4/192|={errs[1]:.1e}, "
            f"|beta_2(1)-pi^2/3|={errs[2]:.1e}, n->1 limit gap={abs(limit - b21):.1e}"
        )

    return _timed(1, "coefficient exactness", 1.0, run)


def criterion_2(instances: int = 200, seed: int = 2) -> CriterionResult:
    def run():
        rng = np.random.default_rng(seed)
        worst_s = worst_c = 0.0
        for _ in range(instances):
            M = random_correlation(rng, int(rng.integers(2, 41)))
            sd = spectral_decompose(M)
            for n in (1, 2, 3, 1.5):
                worst_s = max(worst_s, abs(contour(sd, n).total() - entropy(sd, n).value))
            ref = cumulants(sd, 8)
            for k in (2, 4, 6, 8):
                worst_c = max(worst_c, abs(cumulant_density_field(sd, k).total() - ref[k]))
        ok = worst_s <= 1e-10 and worst_c <= 1e-10
        return ok, f"{instances} states, max |sum s_n - S_n|={worst_s:.1e}, max |sum C_k(j) - C_k|={worst_c:.1e}"

    return _timed(2, "sum rules", 30.0, run)


def criterion_3(max_L: int = 8) -> CriterionResult:
    def run():
        worst_s = worst_p = 0.0
        n_ent = n_spec = skipped = 0
        for L in range(2, max_L + 1):
            for bc in ("open", "periodic"):
                if bc == "periodic" and L < 3:
                    continue
                for n_part in range(0, L + 1):
                    spec = LatticeSpec.chain(L, bc, filling=n_part / L)
                    try:
                        M = build_chain_correlation(spec)
                    except DegeneracyError:
                        skipped += 1
                        continue
                    for r in range(1, L):
                        for idx in itertools.combinations(range(L), r):
                            A = Region(tuple(SiteIndex(y=None, x=i) for i in idx))
                            fock = fock_oracle(spec, A, orders=(2, 3))
                            sd = spectral_decompose(restrict(M, A))
                            for n in (1, 2, 3):
                                worst_s = max(worst_s, abs(entropy(sd, n).value - fock.entropies[float(n)]))
                            n_ent += 1
                            if r <= 4:
                                res = reconstruct_spectrum(traces_from_spectrum(sd))
                                worst_p = max(worst_p, float(np.max(np.abs(res.eigenvalues - fock.spectrum))))
                                n_spec += 1
        ok = worst_s <= 1e-10 and worst_p <= 1e-6
        return ok, (
            f"{n_ent} bipartitions, max |S_n - S_n^Fock|={worst_s:.1e}; "
            f"{n_spec} spectra, max eigenvalue error={worst_p:.1e}; {skipped} degenerate fillings skipped"
        )

    return _timed(3, "many-body oracle", 60.0, run)


def _axiom_normalization(rng, instances: int) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(instances):
        sd = spectral_decompose(random_correlation(rng, int(rng.integers(2, 25))))
        ref = cumulants(sd, 8)
        n = float(rng.choice([1.0, 2.0, 3.0, 1.5]))
        for k in (2, 4, 6, 8):
            h = hyperfine_field(sd, n, k)
            worst = max(worst, abs(h.total() / beta_coefficient(k, n).value - ref[k]))
    return worst <= 1e-8, f"normalization max err {worst:.1e}"


def _mirror_state(rng, L: int) -> CorrelationMatrix:
    h = rng.normal(size=(L, L))
    h = h + h.T
    J = np.eye(L)[::-1]
    h = 0.5 * (h + J @ h @ J)
    e, v = np.linalg.eigh(h)
    occ = (np.arange(L) < int(rng.integers(1, L))).astype(float)
    M = (v * occ) @ v.T
    return CorrelationMatrix(M.astype(complex), _chain_sites(L), tag="mirror")


def _axiom_exchange(rng, instances: int) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(instances):
        L = int(rng.integers(4, 24))
        M = _mirror_state(rng, L)
        a = int(rng.integers(0, L // 2))
        A = Region.interval(a, L - a)  # mirror-symmetric region
        sd = spectral_decompose(restrict(M, A))
        for n, k in ((1.0, 2), (2.0, 2), (2.0, 4), (3.0, 6)):
            v = hyperfine_field(sd, n, k).values
            worst = max(worst, float(np.max(np.abs(v - v[::-1]))))
    return worst <= 1e-10, f"exchange max err {worst:.1e}"


def _axiom_local_unitary(rng, instances: int) -> tuple[bool, str]:
    """Independent on-site unitaries on every site of ``X`` (single-orbital sites carry phases)."""
    worst = 0.0
    for _ in range(instances):
        M = random_correlation(rng, int(rng.integers(2, 25)))
        n_sites = M.size
        X = rng.choice(n_sites, int(rng.integers(1, n_sites + 1)), replace=False)
        phases = np.ones(n_sites, dtype=complex)
        phases[X] = np.exp(2j * np.pi * rng.uniform(size=X.size))
        M2 = CorrelationMatrix(phases[:, None] * M.matrix * phases.conj()[None, :], M.sites)
        sd1, sd2 = spectral_decompose(M), spectral_decompose(M2)
        for n, k in ((1.0, 2), (2.0, 4)):
            a = hyperfine_field(sd1, n, k).values[X]
            b = hyperfine_field(sd2, n, k).values[X]
            worst = max(worst, float(np.max(np.abs(a - b))))
    return worst <= 1e-10, f"local-unitary max err {worst:.1e}"


def _axiom_measurement(rng, instances: int) -> tuple[bool, str]:
    violations = 0
    worst = 0.0
    for _ in range(instances):
        L = int(rng.integers(2, 30))
        M = random_correlation(rng, L, pure=True)
        A = Region(tuple(M.sites[i] for i in sorted(rng.choice(L, int(rng.integers(1, L + 1)), replace=False))))
        i = A.sites[int(rng.integers(len(A)))]
        before = entropy(spectral_decompose(restrict(M, A))).value
        after = entropy(spectral_decompose(restrict(project_measure(M, i), A))).value
        if after > before + 1e-12:
            violations += 1
            worst = max(worst, after - before)
    return violations == 0, f"measurement monotonicity violated in {violations}/{instances} (max excess {worst:.3f})"


def criterion_4(instances: int = 100, seed: int = 4) -> CriterionResult:
    def run():
        rng = np.random.default_rng(seed)
        parts = [
            _axiom_normalization(rng, instances),
            _axiom_exchange(rng, instances),
            _axiom_local_unitary(rng, instances),
            _axiom_measurement(rng, instances),
        ]
        return all(p[0] for p in parts), "; ".join(p[1] for p in parts)

    return _timed(4, "hyperfine axioms", None, run)


def criterion_5(L: int = 640, sizes=(20, 40, 80, 160)) -> CriterionResult:
    def run():
        M = build_chain_correlation(LatticeSpec.chain(L, "open", filling=0.5))
        target = math.pi**2 / 4
        devs = []
        for ell in sizes:
            sd = spectral_decompose(restrict(M, Region.interval(0, ell)))
            ratio = entropy(sd, 2).value / cumulant_density_field(sd, 2).total()
            devs.append(abs(ratio - target) / target)
        ok = monotone(devs) and devs[-1] < 0.03
        return ok, "relative deviations " + ", ".join(f"{d:.4f}" for d in devs)

    return _timed(5, "Fermi-gas dominance", 120.0, run)


def criterion_6(L: int = 400, size: int = 100) -> CriterionResult:
    def run():
        M = build_chain_correlation(LatticeSpec.chain(L, "infinite", filling=0.5))
        start = (L - size) // 2
        sd = spectral_decompose(restrict(M, Region.interval(start, start + size)))
        s2 = contour(sd, 2)
        rep = lattice_vs_cft(s2, ContinuumParams(R=size / 2, epsilon=1.0, n=2))
        spread = ratio_spread(s2, cumulant_density_field(sd, 2))
        ok = rep.mean_relative < 0.05 and spread < 0.05
        return ok, f"mean rel. deviation {rep.mean_relative:.4f}, ratio spread {spread:.4f}"

    return _timed(6, "CFT comparison", 60.0, run)


def criterion_7(n_sites: int = 50) -> CriterionResult:
    def run():
        K = analytic_tridiagonal_K(n_sites, math.pi / 2)
        T = 1.0 / (math.pi * n_sites)
        sd = spectral_decompose(gibbs_correlation(K, T))
        s1 = contour(sd, 1).values
        worst = 0.0
        for n in (2, 3, 4):
            worst = max(worst, float(np.max(np.abs(n * contour(sd, n, refined=True).values - s1))))
        return worst <= 1e-8, f"max |n s~_n - s_1| = {worst:.3e} (max s_1 = {s1.max():.3e})"

    return _timed(7, "refined Renyi identity", 10.0, run)


def criterion_8(draws: int = 50, seed: int = 8) -> CriterionResult:
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(draws):
            L = int(rng.integers(2, 20))
            M = random_correlation(rng, L)
            A = Region(tuple(M.sites[i] for i in sorted(rng.choice(L, int(rng.integers(1, L + 1)), replace=False))))
            site = A.sites[int(rng.integers(len(A)))]
            sd = spectral_decompose(restrict(M, A))
            for k in range(1, 9):
                direct = cumulant_density_field(sd, k).as_dict()[site]
                worst = max(worst, abs(qpc_protocol(M, A, site, k) - direct))
        return worst <= 1e-8, f"{draws} draws, k<=8, max |QPC - direct| = {worst:.1e}"

    return _timed(8, "QPC route", 60.0, run)


def _torus_fits(m: float, mu: float, L: int = 40):
    M = build_chern_torus_correlation(LatticeSpec.square(L, L), ChernParams(m=m, mu=mu))
    lo, hi = L // 4, L // 4 + L // 2
    sd = spectral_decompose(restrict(M, Region.rectangle(lo, hi, lo, hi)))
    return decay_fits(cross_section(hyperfine_field(sd, 2, 2), (lo + hi) // 2))


def criterion_9() -> CriterionResult:
    def run():
        parts = []
        ok = True
        for m in (3.0, 1.0):
            f = _torus_fits(m, 0.0)
            ok &= f.exponential.r2 > 0.99
            parts.append(f"m={m:g} exp R2={f.exponential.r2:.4f}")
        crit = _torus_fits(0.0, 0.0)
        fermi = _torus_fits(0.0, 2 / 3)
        ok &= crit.power_law.r2 > 0.99 and fermi.power_law.r2 > 0.99
        ok &= abs(fermi.power_exponent) < abs(crit.power_exponent)
        parts.append(f"m=0 pow R2={crit.power_law.r2:.4f} exponent={crit.power_exponent:.3f}")
        parts.append(f"mu=2/3 pow R2={fermi.power_law.r2:.4f} exponent={fermi.power_exponent:.3f}")
        cn = {m: chern_number(ChernParams(m=m)) for m in (3.0, 1.0, -1.0)}
        ok &= cn[3.0] == 0 and abs(cn[1.0]) == 1 and abs(cn[-1.0]) == 1
        parts.append("Chern numbers " + ", ".join(f"m={m:g}:{c}" for m, c in cn.items()))
        return ok, "; ".join(parts)

    return _timed(9, "Chern phenomenology", 600.0, run)


def _pairwise(profile, mask) -> float:
    ks = sorted(profile.normalized)
    return max(
        float(np.max(np.abs(profile.normalized[a][mask] - profile.normalized[b][mask])))
        for a, b in itertools.combinations(ks, 2)
    )


def criterion_10(Ly: int = 40) -> CriterionResult:
    def run():
        m = np.round(np.arange(-3.0, 3.0 + 1e-9, 0.1), 10)
        ks = (2, 4, 6)
        parts = []
        ok = True
        for kx, lo, hi in ((0.0, -1.8, -0.2), (math.pi, 0.2, 1.8)):
            p = edge_scaling_profile(m, kx, 2.0, ks, Ly=Ly)
            mask = (m > lo) & (m < hi)
            pair = _pairwise(p, mask)
            low = min(float(np.min(p.normalized[k][mask])) for k in ks)
            ok &= pair <= 0.05 and low > 0.9
            parts.append(f"kx={kx:.3f}: pairwise {pair:.4f}, min {low:.3f}")
        p = edge_scaling_profile(m, math.pi / 3, 2.0, ks, Ly=Ly)
        pair = _pairwise(p, np.ones(m.size, dtype=bool))
        ok &= pair > 0.05
        parts.append(f"kx=pi/3 control: pairwise {pair:.4f}")
        return ok, "; ".join(parts)

    return _timed(10, "edge-state scaling collapse", 600.0, run)


def criterion_11(R: float = 2.0) -> CriterionResult:
    def run():
        c1 = extremal_curve(HoloChart.symmetric(R, 1), samples=400, cutoff=1e-3)
        rt = float(np.max(np.abs(np.hypot(c1.x, c1.z) - R)) + np.max(np.abs(c1.t)))
        start = (0.1, -0.2, 2.0)
        s = np.linspace(0.0, 0.25, 11)
        flow_dev = 0.0
        rk_dev = 0.0
        for n in (2.0, 3.0):
            fn = modular_flow_bulk(start, HoloChart.symmetric(R, n), (0.0, 0.25), s)
            f1 = modular_flow_bulk(start, HoloChart.symmetric(R, 1), (0.0, n * 0.25), n * s)
            for a, b in ((fn.u, f1.u), (fn.v, f1.v), (fn.r, f1.r)):
                flow_dev = max(flow_dev, float(np.max(np.abs(a - b))))
        sb = np.linspace(-1.0, 1.0, 41)
        for n in (1.0, 2.0):
            chart = HoloChart.symmetric(R, n)
            closed = modular_flow_boundary(0.3, -0.4, chart, sb)
            uu, vv = boundary_flow_rk(0.3, -0.4, chart, sb)
            rk_dev = max(rk_dev, float(np.max(np.abs(closed.u - uu))), float(np.max(np.abs(closed.v - vv))))
        c2 = extremal_curve(HoloChart.symmetric(R, 2), samples=400, cutoff=1e-3)
        excess = float(np.max(wedge_excess(c2.x, c2.t, c2.z, R)))
        ok = rt <= 1e-8 and flow_dev <= 1e-8 and rk_dev <= 1e-8 and excess > 0
        return ok, (
            f"RT residual {rt:.1e}, flow_n vs flow_1 {flow_dev:.1e}, boundary RK {rk_dev:.1e}, "
            f"C^(2) wedge excess {excess:.3f}"
        )

    return _timed(11, "holography", 30.0, run)


DETERMINISM_CONFIG = """\
experiment: chain
output_dir: out
orders: [1, 2]
cumulant_orders: [2, 4, 6]
chain: {L: 400, boundary: open, filling: 0.5}
region: {start: 150, stop: 250}
"""


def criterion_12(config_text: str = DETERMINISM_CONFIG) -> CriterionResult:
    def run():
        cfg = parse_config(config_text)
        with tempfile.TemporaryDirectory() as tmp:
            dirs = [Path(tmp) / "a", Path(tmp) / "b"]
            for d in dirs:
                execute(cfg, d)
            names = sorted(p.name for p in dirs[0].iterdir())
            same = names == sorted(p.name for p in dirs[1].iterdir()) and all(
                (dirs[0] / n).read_bytes() == (dirs[1] / n).read_bytes() for n in names
            )
        return same, f"{len(names)} artifacts {'byte-identical' if same else 'differ'} across two runs"

    return _timed(12, "determinism", None, run)


CRITERIA: dict[int, Callable[[], CriterionResult]] = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
    11: criterion_11,
    12: criterion_12,
}


def run_all(selected: Optional[list[int]] = None, echo: Optional[Callable[[str], None]] = None) -> list[CriterionResult]:
    out = []
    for number in selected or sorted(CRITERIA):
        res = CRITERIA[number]()
        if echo is not None:
            echo(res.line())
        out.append(res)
    return out
