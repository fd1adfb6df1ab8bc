"""
Analytic-versus-SDP cross-checks.

Each check returns a ``CheckResult``; ``run_all`` runs them in a fixed order
and the report text is deterministic (no timings, fixed seeds).
"""

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import closed_form, linalg, qobjects
from .scan import ScanConfig, row_violations, run_scan
from .tester import GAP_TOL, TESTER_TOL, discriminate, sequential_success, validate_tester

SEED = 20240611
NOISY_PS = (0.25, 0.04, 0.01)


@dataclass
class CheckResult:
    key: str
    name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        text = f"[{status}] {self.key} {self.name}: residual {self.residual:.3e} (tol {self.tolerance:.0e})"
        return text + (f" {self.detail}" if self.detail else "")


@dataclass
class Oracles:
    """Closed forms the checks compare against; swapped out in mutation mode."""

    luders: object = closed_form.projective_luders_success
    measurement: object = closed_form.projective_measurement_success
    noisy_measurement: object = closed_form.noisy_z_measurement_success
    eigenvalues: object = closed_form.noisy_z_difference_eigenvalues


def mutated_oracles():
    def luders(pair):
        x = pair.overlap_sq
        return 0.5 * (1 + np.sqrt(max(0.0, 1 - 3.9 * pair.p_psi * pair.p_phi * x * x)))

    def eigenvalues(params):
        lam = closed_form.noisy_z_difference_eigenvalues(params)
        return (lam[0], lam[1], lam[2], -1.01 * params.p * params.rho[1, 1].real)

    return replace(Oracles(), luders=luders, eigenvalues=eigenvalues)


@dataclass
class Context:
    oracles: Oracles = field(default_factory=Oracles)
    records: list = field(default_factory=list)
    workers: int = None
    cache: dict = field(default_factory=dict)

    def solve(self, povms, priors, mode, key=None):
        if key is not None and key in self.cache:
            return self.cache[key]
        e, tester, report = discriminate(povms, priors, mode)
        self.records.append((tester, report, e.d_out))
        if key is not None:
            self.cache[key] = report
        return report


def _timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


def check_zx_measurement(ctx):
    target = np.cos(np.pi / 8) ** 2
    report, elapsed = _timed(lambda: ctx.solve([qobjects.z_povm(), qobjects.x_povm()], (0.5, 0.5), "measurement"))
    res = abs(report.primal_value - target)
    ok = res <= 1e-6 and elapsed < 1.0
    return CheckResult("1", "Z-vs-X measurement = cos^2(pi/8)", ok, res, 1e-6, "" if elapsed < 1.0 else "runtime >= 1 s")


def check_zx_instrument(ctx):
    target = 0.5 + np.sqrt(3) / 4
    report, elapsed = _timed(lambda: ctx.solve([qobjects.z_povm(), qobjects.x_povm()], (0.5, 0.5), "instrument"))
    res = abs(report.primal_value - target)
    ok = res <= 1e-6 and elapsed < 5.0
    return CheckResult("2", "Z-vs-X Lüders = 1/2 + sqrt(3)/4", ok, res, 1e-6, "" if elapsed < 5.0 else "runtime >= 5 s")


def check_projective_oracle(ctx, n=100):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    start = time.perf_counter()
    for _ in range(n):
        p_psi = float(rng.uniform())
        pair = closed_form.ProjectivePair(
            linalg.random_pure_state(2, rng), linalg.random_pure_state(2, rng), p_psi, 1 - p_psi
        )
        priors = (pair.p_psi, pair.p_phi)
        inst = ctx.solve(pair.povms(), priors, "instrument").primal_value
        meas = ctx.solve(pair.povms(), priors, "measurement").primal_value
        worst = max(worst, abs(inst - ctx.oracles.luders(pair)), abs(meas - ctx.oracles.measurement(pair)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 600
    return CheckResult("3", f"projective pairs vs closed forms ({n} pairs)", ok, worst, 1e-6)


def check_sequential(ctx, n=50):
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for _ in range(n):
        pair = closed_form.ProjectivePair(linalg.random_pure_state(2, rng), linalg.random_pure_state(2, rng))
        strategy = closed_form.optimal_sequential_strategy(pair)
        value = sequential_success(pair.povms(), (0.5, 0.5), strategy)
        worst = max(worst, abs(value - ctx.oracles.luders(pair)))
    return CheckResult("4", f"entanglement-free strategy attains the optimum ({n} pairs)", worst <= 1e-9, worst, 1e-9)


def _noisy_values(ctx, p):
    povms = [qobjects.z_povm(), qobjects.w_povm(p)]
    meas = ctx.solve(povms, (0.5, 0.5), "measurement", key=("noisy", p, "measurement")).primal_value
    inst = ctx.solve(povms, (0.5, 0.5), "instrument", key=("noisy", p, "instrument")).primal_value
    return meas, inst


def check_noisy_measurement(ctx):
    worst = 0.0
    for p in NOISY_PS:
        meas, _ = _noisy_values(ctx, p)
        worst = max(worst, abs(meas - ctx.oracles.noisy_measurement(p)))
    return CheckResult("5a", "Z-vs-W^p measurement = 1/2 + p/2", worst <= 1e-6, worst, 1e-6)


def check_noisy_luders_bound(ctx):
    """Shortfall of the Lüders SDP below 1/2 + (p + sqrt p)/4 (positive means violated)."""
    worst = -np.inf
    values = []
    for p in NOISY_PS:
        _, inst = _noisy_values(ctx, p)
        worst = max(worst, 0.5 + (p + np.sqrt(p)) / 4 - inst)
        values.append(f"{inst:.6f}")
    shortfall = max(worst, 0.0)
    return CheckResult(
        "5b", "Z-vs-W^p Lüders >= 1/2 + (p + sqrt p)/4", worst <= 1e-6, shortfall, 1e-6, f"values {', '.join(values)}"
    )


def check_noisy_advantage_bound(ctx):
    worst = -np.inf
    values = []
    for p in NOISY_PS:
        meas, inst = _noisy_values(ctx, p)
        delta = (inst - 0.5) / (meas - 0.5)
        worst = max(worst, closed_form.noisy_z_bias_lower(p) - delta)
        values.append(f"{delta:.4f}")
    shortfall = max(worst, 0.0)
    return CheckResult(
        "5c", "Z-vs-W^p advantage >= (p + sqrt p)/(2p)", worst <= 1e-4, shortfall, 1e-4, f"values {', '.join(values)}"
    )


def check_noisy_sequential_optimum(ctx):
    """Supplementary: the Lüders SDP equals the best entanglement-free probe, and the advantage grows as p shrinks."""
    worst = 0.0
    deltas = []
    for p in NOISY_PS:
        meas, inst = _noisy_values(ctx, p)
        worst = max(worst, abs(inst - closed_form.noisy_z_sequential_optimum(p)))
        deltas.append((inst - 0.5) / (meas - 0.5))
    growing = all(b > a for a, b in zip(deltas, deltas[1:]))
    return CheckResult(
        "5d",
        "Z-vs-W^p Lüders = best entanglement-free probe; advantage increasing",
        worst <= 1e-6 and growing,
        worst,
        1e-6,
    )


def check_eigenvalues(ctx, n=100):
    rng = np.random.default_rng(SEED + 2)
    worst = 0.0
    for _ in range(n):
        params = closed_form.NoisyZParams(float(rng.uniform()), linalg.random_density_matrix(2, rng))
        numeric, _ = linalg.eig_hermitian(closed_form.noisy_z_difference_operator(params))
        formula = np.sort(np.array(ctx.oracles.eigenvalues(params)))
        worst = max(worst, float(np.max(np.abs(numeric - formula))))
    return CheckResult("6", f"noisy-Z eigenvalue formula vs eigendecomposition ({n} draws)", worst <= 1e-10, worst, 1e-10)


def check_structural(ctx, n=100):
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for _ in range(n):
        psi = linalg.random_pure_state(2, rng)
        out = closed_form.entangled_collapse(psi)
        worst = max(worst, abs(np.vdot(out, out).real - 0.5))
        worst = max(worst, float(np.max(np.abs(out - np.kron(psi, psi.conj()) / np.sqrt(2)))))
        m0, m1 = qobjects.projective_qubit_povm(psi)
        worst = max(worst, float(np.max(np.abs(linalg.universal_not(m0) - m1))))
    half = np.eye(2) / 2
    worst = max(worst, float(np.max(np.abs(linalg.universal_not(half) - half))))
    return CheckResult("7", "collapse identity, universal-NOT fixed point and outcome swap", worst <= 1e-12, worst, 1e-12)


def check_tester_certificates(ctx):
    if not ctx.records:
        for check in (check_zx_measurement, check_zx_instrument, check_projective_oracle, check_noisy_measurement):
            check(ctx)
    worst_res, worst_gap = 0.0, 0.0
    for tester, report, d_out in ctx.records:
        worst_res = max(worst_res, max(validate_tester(tester, d_out).residuals()))
        worst_gap = max(worst_gap, report.gap)
    ok = worst_res <= TESTER_TOL and worst_gap <= GAP_TOL
    return CheckResult(
        "8",
        f"tester feasibility and duality gap ({len(ctx.records)} solves)",
        ok,
        max(worst_res, worst_gap),
        1e-7,
    )


def check_scans(ctx, grid_n=20):
    worst = 0.0
    bad = 0
    start = time.perf_counter()
    for family in ("trine", "noisy"):
        rows = run_scan(ScanConfig(family, grid_n=grid_n), workers=ctx.workers)
        bad += len(row_violations(rows)) + sum(1 for r in rows if r.p_meas is None or r.p_inst is None)
        origin = rows[0]
        worst = max(worst, abs(origin.p_meas - 0.5), abs(origin.p_inst - 0.5))
    elapsed = time.perf_counter() - start
    ok = bad == 0 and worst <= 1e-6 and elapsed < 1800
    return CheckResult("9", f"scan dominance on {grid_n}x{grid_n} trine and noisy grids", ok, worst, 1e-6, f"violations {bad}")


CHECKS = (
    check_zx_measurement,
    check_zx_instrument,
    check_projective_oracle,
    check_sequential,
    check_noisy_measurement,
    check_noisy_luders_bound,
    check_noisy_advantage_bound,
    check_noisy_sequential_optimum,
    check_eigenvalues,
    check_structural,
    check_tester_certificates,
    check_scans,
)


def run_all(mutation=False, workers=None, out=print):
    ctx = Context(oracles=mutated_oracles() if mutation else Oracles(), workers=workers)
    results = []
    for check in CHECKS:
        result = check(ctx)
        results.append(result)
        out(result.line())
    failed = [r.key for r in results if not r.passed]
    out(f"{len(results) - len(failed)}/{len(results)} checks passed" + (f"; failed: {', '.join(failed)}" if failed else ""))
    return results
