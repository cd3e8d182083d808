"""Acceptance checks shared by the test suite and the CLI verify command.

run_all executes nine numbered criteria covering the analytic formulas,
the barrier solver against its analytic oracles, threshold detection,
the Kraus/Choi equivalence of the one-bit protocol, protocol sampling,
measurement validity, and the structural invariants of the covariant
parametrization.  Each criterion reports pass/fail plus the measured
quantities; exceptions inside a criterion mark it failed instead of
aborting the run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from entclone.analytic import (
    ALPHA_MAX,
    CloneFamily,
    alpha_critical,
    fidelity_bh,
    fidelity_global,
    fidelity_locc,
    params_for,
    schmidt_state,
)
from entclone.channel import apply_choi, clone_reductions, constraint_matrices
from entclone.covariant import (
    CHOI_LAYOUT,
    PTILDE_LAYOUT,
    assemble_ptilde,
    build_t_operators,
    reorder_to_choi,
    two_party_rep,
)
from entclone.linalg import partial_trace, partial_transpose, random_su2
from entclone.protocol import (
    average_clone_fidelity,
    build_dilations,
    build_kraus,
    kraus_to_choi,
    run_protocol_exact,
    run_protocol_sampled,
)
from entclone.sdp import (
    ThresholdDetectionError,
    _sweep_solutions,
    detect_threshold,
)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str


def _fmt(x: float) -> str:
    return f"{x:.3e}"


def run_all(tol: float = 1e-7, seed: int = 7) -> list[CriterionResult]:
    """Run the nine acceptance criteria; returns one result per criterion.

    tol is handed to every semidefinite solve; the pass thresholds of
    the criteria themselves are fixed.  seed controls the random draws
    of the structural checks, the sampling seeds, and the solver seed
    argument, so repeated calls with the same seed give identical
    reports.
    """
    t = build_t_operators()
    a0 = alpha_critical()
    results: list[CriterionResult] = []

    def record(number: int, name: str, fn: Callable[[], tuple[bool, str]]) -> None:
        try:
            passed, detail = fn()
        except Exception as exc:
            passed, detail = False, f"exception: {exc}"
        results.append(CriterionResult(number=number, name=name, passed=passed, detail=detail))

    # The solver sweeps feed criteria 3 and 4; compute them once.
    sweep_error: Exception | None = None
    coarse_plain = coarse_ppt = fine_ppt = fine_plain = None
    try:
        grid = np.linspace(0.0, ALPHA_MAX, 50)
        coarse_plain = _sweep_solutions(grid, False, t=t, tol=tol, seed=seed)
        coarse_ppt = _sweep_solutions(grid, True, t=t, tol=tol, seed=seed)
        fine_grid = np.arange(0.30, 0.37 + 1e-12, 0.002)
        fine_ppt = [
            (alpha, sol.f_star)
            for alpha, sol in _sweep_solutions(fine_grid, True, t=t, tol=tol, seed=seed)
        ]
        fine_plain = [
            (alpha, sol.f_star)
            for alpha, sol in _sweep_solutions(fine_grid, False, t=t, tol=tol, seed=seed)
        ]
    except Exception as exc:
        sweep_error = exc

    def criterion_1() -> tuple[bool, str]:
        checks = (
            abs(fidelity_global(ALPHA_MAX) - (5.0 + math.sqrt(13.0)) / 12.0),
            abs(fidelity_global(0.0) - (17.0 + math.sqrt(73.0)) / 36.0),
            abs(fidelity_bh(ALPHA_MAX) - 7.0 / 12.0),
            abs(fidelity_locc(ALPHA_MAX) - 5.0 / 8.0),
        )
        worst = max(checks)
        return worst <= 1e-12, f"worst endpoint error {_fmt(worst)} (tol 1e-12)"

    def criterion_2() -> tuple[bool, str]:
        dec4 = abs(a0 - 0.3357) <= 5e-5
        a11 = float(params_for(CloneFamily.LOCC_OPTIMAL, a0)[0, 0])
        h = 1e-5
        deriv = abs(fidelity_global(a0 + h) - fidelity_global(a0 - h)) / (2.0 * h)
        curves_up = (
            fidelity_global(a0 + h) >= fidelity_global(a0)
            and fidelity_global(a0 - h) >= fidelity_global(a0)
        )
        ok = dec4 and a11 <= 1e-13 and deriv <= 1e-8 and curves_up
        return ok, (
            f"alpha0={a0:.7f} a11={_fmt(a11)} |F'|={_fmt(deriv)} minimum={curves_up}"
        )

    def criterion_3() -> tuple[bool, str]:
        if sweep_error is not None:
            raise sweep_error
        sup_plain = max(abs(s.f_star - fidelity_global(a)) for a, s in coarse_plain)
        sup_ppt = max(abs(s.f_star - fidelity_locc(a)) for a, s in coarse_ppt)
        iters = max(s.iterations for _, s in coarse_plain + coarse_ppt)
        ok = sup_plain <= 1e-6 and sup_ppt <= 1e-6 and iters <= 200
        return ok, (
            f"sup err plain {_fmt(sup_plain)}, ppt {_fmt(sup_ppt)} (tol 1e-6), "
            f"max Newton steps {iters} (cap 200)"
        )

    def criterion_4() -> tuple[bool, str]:
        if sweep_error is not None:
            raise sweep_error
        found = detect_threshold(fine_ppt)
        err = abs(found - a0)
        try:
            ghost = detect_threshold(fine_plain)
            smooth = False
            extra = f"; smooth sweep wrongly flagged {ghost:.4f}"
        except ThresholdDetectionError:
            smooth = True
            extra = "; smooth sweep correctly clean"
        ok = err <= 0.005 and smooth
        return ok, f"kink at {found:.4f}, err {_fmt(err)} (tol 5e-3){extra}"

    def criterion_5() -> tuple[bool, str]:
        worst = 0.0
        for alpha in (0.05, 0.15, 0.25, 0.33):
            sols = _sweep_solutions([alpha], True, t=t, tol=tol, seed=seed)
            worst = max(worst, abs(sols[0][1].f_star - fidelity_bh(alpha)))
        return worst <= 1e-6, f"worst |ppt - no-communication| {_fmt(worst)} (tol 1e-6)"

    def criterion_6() -> tuple[bool, str]:
        worst_frob = worst_complete = 0.0
        for alpha in (0.4, 0.5, 0.6, ALPHA_MAX):
            ks = build_kraus(alpha)
            ptilde = assemble_ptilde(params_for(CloneFamily.LOCC_OPTIMAL, alpha), t)
            worst_frob = max(worst_frob, float(np.linalg.norm(kraus_to_choi(ks) - ptilde)))
            total = sum(k.conj().T @ k for k in ks.k)
            worst_complete = max(worst_complete, float(np.max(np.abs(total - np.eye(4)))))
        ok = worst_frob <= 1e-10 and worst_complete <= 1e-12
        return ok, (
            f"worst Choi distance {_fmt(worst_frob)} (tol 1e-10), "
            f"completeness dev {_fmt(worst_complete)} (tol 1e-12)"
        )

    def criterion_7() -> tuple[bool, str]:
        transcripts = run_protocol_exact(ALPHA_MAX)
        prob_err = abs(sum(tr.joint_probability for tr in transcripts) - 1.0)
        f_err = abs(average_clone_fidelity(transcripts, schmidt_state(ALPHA_MAX)) - 0.625)
        exact = average_clone_fidelity(transcripts, schmidt_state(ALPHA_MAX))
        covered = 0
        for offset in range(100):
            est, stderr = run_protocol_sampled(ALPHA_MAX, trials=100_000, seed=seed + offset)
            if abs(est - exact) <= 3.0 * stderr:
                covered += 1
        ok = f_err <= 1e-12 and prob_err <= 1e-12 and covered >= 99
        return ok, (
            f"F err {_fmt(f_err)}, prob sum err {_fmt(prob_err)} (tol 1e-12), "
            f"3-sigma coverage {covered}/100 (need 99)"
        )

    def criterion_8() -> tuple[bool, str]:
        worst = 0.0
        for alpha in np.linspace(0.0, ALPHA_MAX, 15):
            ks = build_kraus(alpha)
            povm = sum(m.conj().T @ m for m in ks.m)
            worst = max(worst, float(np.max(np.abs(povm - np.eye(2)))))
            half = ks.m[0].conj().T @ ks.m[0] + ks.m[2].conj().T @ ks.m[2]
            worst = max(worst, float(np.max(np.abs(half - np.eye(2) / 2.0))))
            for u in build_dilations(ks):
                worst = max(worst, float(np.max(np.abs(u.conj().T @ u - np.eye(2)))))
        return worst <= 1e-12, f"worst measurement identity dev {_fmt(worst)} (tol 1e-12)"

    def criterion_9() -> tuple[bool, str]:
        ts = t.as_list()
        algebra = max(
            float(np.max(np.abs(ts[i] @ ts[i] - ts[i]))) for i in range(3)
        )
        algebra = max(algebra, float(np.max(np.abs(ts[0] + ts[1] + ts[2] - np.eye(8)))))
        algebra = max(algebra, float(np.max(np.abs(ts[3] @ ts[0] @ ts[3] - ts[1]))))

        rng = np.random.default_rng(seed)
        cov = 0.0
        for _ in range(20):
            a_rand = rng.normal(size=(5, 5))
            ptilde = assemble_ptilde(a_rand, t)
            w = two_party_rep(random_su2(rng), random_su2(rng))
            cov = max(cov, float(np.max(np.abs(w @ ptilde @ w.conj().T - ptilde))))

        eq, sym_rows = constraint_matrices(t)
        rows = np.vstack([eq[None, :], sym_rows])
        rhs = np.zeros(rows.shape[0])
        rhs[0] = 1.0
        x_part = np.linalg.lstsq(rows, rhs, rcond=None)[0]
        _, sv, vh = np.linalg.svd(rows)
        null = vh[int(np.sum(sv > 1e-12 * sv[0])):].T
        feas = 0.0
        for _ in range(5):
            x = x_part + null @ (0.3 * rng.normal(size=null.shape[1]))
            choi = reorder_to_choi(assemble_ptilde(x.reshape(5, 5), t))
            tr_out = partial_trace(choi, CHOI_LAYOUT, {"1A", "1B", "2A", "2B"})
            feas = max(feas, float(np.max(np.abs(tr_out - np.eye(4)))))
            for _ in range(2):
                g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
                g = (g + g.conj().T) / 2.0
                r1, r2 = clone_reductions(apply_choi(choi, g))
                feas = max(feas, float(np.max(np.abs(r1 - r2))))

        ppt_eig = 0.0
        for family in (CloneFamily.BUZEK_HILLERY_SQUARED, CloneFamily.LOCC_OPTIMAL):
            for alpha in (0.0, 0.15, 0.3, a0, 0.45, 0.6, ALPHA_MAX):
                ptilde = assemble_ptilde(params_for(family, alpha), t)
                flipped = partial_transpose(ptilde, PTILDE_LAYOUT, {"1B", "2B", "B"})
                low = float(np.linalg.eigvalsh((flipped + flipped.conj().T) / 2.0).min())
                ppt_eig = min(ppt_eig, low)

        ok = algebra <= 1e-12 and cov <= 1e-10 and feas <= 1e-9 and ppt_eig >= -1e-10
        return ok, (
            f"algebra dev {_fmt(algebra)} (tol 1e-12), covariance {_fmt(cov)} (tol 1e-10), "
            f"feasibility dev {_fmt(feas)} (tol 1e-9), min transposed eig {_fmt(ppt_eig)} "
            f"(floor -1e-10)"
        )

    record(1, "analytic endpoint fidelities", criterion_1)
    record(2, "critical weight and tangency", criterion_2)
    record(3, "solver matches analytic optima", criterion_3)
    record(4, "curvature-jump detection", criterion_4)
    record(5, "ppt equals no-communication below threshold", criterion_5)
    record(6, "kraus channel equals covariant family", criterion_6)
    record(7, "protocol fidelity, exact and sampled", criterion_7)
    record(8, "measurement validity and dilations", criterion_8)
    record(9, "structural invariants", criterion_9)
    return results


def format_report(results: list[CriterionResult]) -> str:
    """Fixed-width pass/fail table, one line per criterion."""
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"[{status}] criterion {r.number}: {r.name} -- {r.detail}")
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} criteria passed")
    return "\n".join(lines)
