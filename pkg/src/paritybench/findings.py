"""End-to-end comparison of the schemes and arms on one instance.

The protocol: tune (beta, gamma) per scheme and arm on a coarse grid at a
reference budget ``M_ref``, rerun the tuned settings with a fresh seed, then
check seven qualitative orderings between the resulting success curves.

``M_ref`` is the largest power of two not exceeding ``ln 2 / p``, i.e. about
the budget at which uniform logical sampling succeeds half the time.  Tuning
and evaluation use different seeds so the reported optimum is not biased
upward by selection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .experiments import (
    ExperimentSpec,
    Landscape,
    SuccessCurve,
    run_experiment,
    sweep_landscape,
)
from .instances import GroundTruth, LogicalProblem

BETAS = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0)
GAMMAS = (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0)
PHYSICAL = ("slhz", "slhz3", "me")
Z = 3.0


def reference_budget(truth: GroundTruth) -> int:
    target = math.log(2.0) / truth.p_exhaustive
    return 1 << max(0, int(math.floor(math.log2(target))))


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


@dataclass
class FindingsReport:
    M_ref: int
    M_max: int
    landscapes: dict = field(default_factory=dict)
    curves: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> str:
        lines = [f"reference budget M_ref={self.M_ref}, curves to M_max={self.M_max}"]
        for (scheme, arm), curve in sorted(self.curves.items()):
            s = curve.spec
            lines.append(
                f"  {scheme:>7} {arm}: beta={s.beta:g} gamma={s.gamma:g} "
                f"P(M_ref)={curve.success_at(self.M_ref):.3f}"
                f"+-{curve.stderr_at(self.M_ref):.3f}"
            )
        lines.extend(c.line() for c in self.checks)
        return "\n".join(lines)


def _gap(c1: SuccessCurve, c2: SuccessCurve, M: int) -> tuple[float, float]:
    """Difference c1 - c2 at M and its combined standard error."""
    d = c1.success_at(M) - c2.success_at(M)
    se = math.hypot(c1.stderr_at(M), c2.stderr_at(M))
    return d, se


def _fmt(c: SuccessCurve, M: int) -> str:
    return f"{c.success_at(M):.3f}+-{c.stderr_at(M):.3f}"


def tune(scheme: str, arm: str, problem: LogicalProblem, truth: GroundTruth, M: int,
         reps: int, seed: int, betas=BETAS, gammas=GAMMAS, threads=None) -> Landscape:
    gammas = (1.0,) if scheme == "logical" else gammas
    base = ExperimentSpec(scheme, arm, betas[0], gammas[0], M, reps, seed)
    return sweep_landscape(base, betas, gammas, M, problem, truth, threads=threads)


def reproduce_findings(problem: LogicalProblem, truth: GroundTruth, reps: int = 500,
                       seed: int = 2024, betas=BETAS, gammas=GAMMAS, curve_factor: int = 4,
                       threads=None, log=None) -> FindingsReport:
    M_ref = reference_budget(truth)
    M_max = M_ref * curve_factor
    report = FindingsReport(M_ref, M_max)
    say = log or (lambda msg: None)

    tuned = [("logical", "b")] + [(s, a) for s in PHYSICAL for a in ("b", "c")]
    for scheme, arm in tuned:
        land = tune(scheme, arm, problem, truth, M_ref, reps, seed, betas, gammas, threads)
        report.landscapes[(scheme, arm)] = land
        beta, gamma = land.optimum
        say(f"tuned {scheme}/{arm}: beta={beta:g} gamma={gamma:g} "
            f"P={land.success.max():.3f}")
        spec = replace(land.base, beta=beta, gamma=gamma, M=M_max, seed=seed + 1)
        report.curves[(scheme, arm)] = run_experiment(spec, problem, truth, threads=threads)

    untuned = [("logical", "a")] + [(s, a) for s in PHYSICAL for a in ("a", "d")]
    for scheme, arm in untuned:
        spec = ExperimentSpec(scheme, arm, M=M_max, reps=reps, seed=seed + 1)
        report.curves[(scheme, arm)] = run_experiment(spec, problem, truth, threads=threads)
        say(f"ran {scheme}/{arm}")

    report.checks = evaluate(report.curves, M_ref, M_max)
    return report


def evaluate(curves: dict, M_ref: int, M_max: int) -> list[Check]:
    c = curves
    checks = []

    worst = max(c[(s, "a")].success_at(M_max) for s in PHYSICAL)
    checks.append(Check("finding 1: uniform physical sampling is negligible", worst < 1e-3,
                        f"max arm-a success at M={M_max} is {worst:.4f} (< 0.001)"))

    ok, detail = True, []
    for M in c[("slhz", "d")].checkpoints:
        d, _ = _gap(c[("slhz", "d")], c[("logical", "a")], M)
        band = Z * (c[("slhz", "d")].stderr_at(M) + c[("logical", "a")].stderr_at(M))
        if abs(d) > band:
            ok = False
            detail.append(f"M={M}: |{d:.3f}| > {band:.3f}")
    checks.append(Check("finding 2: SLHZ arm d matches logical uniform search", ok,
                        "; ".join(detail) or "3-sigma bands overlap at every checkpoint"))

    M = M_ref
    slhz_b = c[("slhz", "b")]
    parts, ok = [], True
    for other in ("slhz3", "me"):
        d, se = _gap(c[(other, "b")], slhz_b, M)
        ok &= d > Z * se
        parts.append(f"{other} b {_fmt(c[(other, 'b')], M)} vs slhz b {_fmt(slhz_b, M)}")
    checks.append(Check("finding 3: SLHZ annealing trails modified SLHZ and ME", ok,
                        "; ".join(parts)))

    gaps, ok, parts = {}, True, []
    for s in ("slhz", "slhz3"):
        d, se = _gap(c[(s, "c")], c[(s, "b")], M)
        gaps[s] = d
        ok &= d > Z * se
        parts.append(f"{s} c-b = {d:.3f} (3se {Z * se:.3f})")
    ok &= gaps["slhz"] > gaps["slhz3"]
    checks.append(Check("finding 4: decoding lifts both parity schemes, SLHZ more", ok,
                        "; ".join(parts)))

    d, se = _gap(c[("me", "c")], c[("me", "b")], M)
    checks.append(Check("finding 5: MV decoding does not change ME annealing", abs(d) <= Z * se,
                        f"me c {_fmt(c[('me', 'c')], M)} vs me b {_fmt(c[('me', 'b')], M)}"))

    d, se = _gap(c[("slhz", "c")], c[("me", "c")], M)
    checks.append(Check("finding 6: decoded SLHZ beats decoded ME", d > Z * se,
                        f"slhz c {_fmt(c[('slhz', 'c')], M)} vs me c {_fmt(c[('me', 'c')], M)}"))

    ok, parts = True, []
    ref = c[("logical", "b")]
    for s in PHYSICAL:
        for arm in ("b", "c"):
            d, se = _gap(c[(s, arm)], ref, M)
            if d > Z * se:
                ok = False
                parts.append(f"{s} {arm} {_fmt(c[(s, arm)], M)} exceeds logical b {_fmt(ref, M)}")
    checks.append(Check("finding 7: no embedding beats logical annealing", ok,
                        "; ".join(parts) or f"logical b {_fmt(ref, M)} is never exceeded"))
    return checks
