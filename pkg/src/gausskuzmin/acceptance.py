"""Acceptance criteria, runnable from the CLI (``gausskuzmin check``) and from pytest."""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from gausskuzmin import cfrac_core, constants
from gausskuzmin.gk_iteration import IterationConfig, estimate_rate, gk_step, iterate_distribution, iterate_g
from gausskuzmin.grid import GridFunction
from gausskuzmin.mc_verify import MCConfig, empirical_cdf_distance
from gausskuzmin.pf_operator import (
    OperatorConfig,
    apply_U,
    check_monotone_flip,
    h_function,
    normalization_error,
    random_nondecreasing_pl,
)

CONTRACTION_SLACK = 1e-3
DEFAULT_CONTRACTION_THRESHOLD = 0.7601
WIRSING = 0.303663002
RATE_BRACKET = (0.296, 0.311)


@dataclass
class CriterionResult:
    name: str
    passed: bool
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        summary = ", ".join(f"{k}={_fmt(v)}" for k, v in self.details.items() if not isinstance(v, (list, dict)))
        return f"[{mark}] {self.name:<14} {self.seconds:7.2f}s  {summary}"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def brute_force_q(terms: int = 10_000_000) -> tuple[float, float]:
    """sum_i [1/(i+1)^3 + 1/(i^3 (i+1))] summed directly, plus a tail estimate.

    Returns (value, tail_bound). The omitted tail is ~1/terms^2 and is added
    at its midpoint value; the bound covers the whole tail.
    """
    parts = []
    for start in range(1, terms + 1, 1_000_000):
        i = np.arange(start, min(start + 1_000_000, terms + 1), dtype=float)
        parts.append(1.0 / (i + 1.0) ** 3 + 1.0 / (i**3 * (i + 1.0)))
    # sum smallest terms first
    partial = math.fsum(np.concatenate(parts)[::-1])
    tail = 1.0 / terms**2
    return partial + tail, tail


def crit_constants(**_) -> CriterionResult:
    q = constants.contraction_constant(1e-12)
    oracle, oracle_tail = brute_force_q()
    z2 = constants.zeta(2, 1e-12)
    q_err = abs(q.value - oracle)
    z2_err = abs(z2.value - math.pi**2 / 6)
    return CriterionResult(
        "constants",
        passed=q_err <= 1e-9 and z2_err <= 1e-12,
        details={
            "q": q.value,
            "q_oracle": oracle,
            "q_error": q_err,
            "zeta2_error": z2_err,
            "q_printed": constants.PRINTED_Q,
            "note": constants.PRINTED_Q_NOTE,
        },
    )


def crit_normalization(cfg: OperatorConfig = OperatorConfig(), **_) -> CriterionResult:
    err = normalization_error(cfg)
    return CriterionResult("normalization", passed=err <= 1e-9, details={"sup_error": err})


def crit_monotonicity(cfg: OperatorConfig = OperatorConfig(), trials: int = 200, seed: int = 42, **_) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    all_ok = True
    for _ in range(trials):
        f = cfg.grid_function(random_nondecreasing_pl(rng, cfg.grid_size))
        rep = check_monotone_flip(f, cfg, slack=1e-9)
        worst = max(worst, rep.worst_violation)
        all_ok &= rep.is_input_nondecreasing and rep.is_output_nonincreasing
    return CriterionResult(
        "monotonicity", passed=all_ok and worst <= 1e-9, details={"trials": trials, "worst_violation": worst}
    )


def crit_fixed_point(cfg: OperatorConfig = OperatorConfig(), **_) -> CriterionResult:
    G = cfg.sample(constants.gauss_cdf)
    gk_err = gk_step(G, cfg).sup_distance(G)
    c = GridFunction.constant(constants.INV_LOG2, cfg.grid_size, cfg.interpolation)
    u_err = apply_U(c, cfg).sup_distance(c)
    return CriterionResult(
        "fixed-point",
        passed=gk_err <= 5e-8 and u_err <= 1e-9,
        details={"gk_step_error": gk_err, "U_density_error": u_err},
    )


def crit_contraction(
    cfg: OperatorConfig = OperatorConfig(), threshold: float = DEFAULT_CONTRACTION_THRESHOLD, **_
) -> CriterionResult:
    reports = iterate_g(IterationConfig(operator=cfg, steps=16, initial="identity"))
    ratios = [r.ratio_M for r in reports if r.ratio_M is not None]
    worst = max(ratios)
    return CriterionResult(
        "contraction",
        passed=len(ratios) == 16 and worst <= threshold,
        details={"max_ratio_M": worst, "threshold": threshold, "ratios_M": ratios},
    )


def crit_decay_rate(
    cfg: OperatorConfig = OperatorConfig(), threshold: float = DEFAULT_CONTRACTION_THRESHOLD, **_
) -> CriterionResult:
    reports = iterate_distribution(IterationConfig(operator=cfg, steps=16, initial="identity"))
    est = estimate_rate(reports, 8, 16)
    ratios = [r.ratio_error for r in reports if r.ratio_error is not None]
    lo, hi = RATE_BRACKET
    ok = est.rate is not None and lo <= est.rate <= hi and max(ratios) <= threshold
    return CriterionResult(
        "decay-rate",
        passed=ok,
        details={
            "rate": est.rate,
            "r_squared": est.r_squared,
            "wirsing": WIRSING,
            "max_ratio_error": max(ratios),
            "threshold": threshold,
        },
    )


def crit_h_function(cfg: OperatorConfig = OperatorConfig(), **_) -> CriterionResult:
    h = h_function(cfg)
    target = constants.zeta(3, 1e-13).value - constants.zeta(2, 1e-13).value + 1.0
    h0_err = abs(h.values[0] - target)
    rise = max(0.0, float(np.max(np.diff(h.values))))
    return CriterionResult(
        "h-function",
        passed=h0_err <= 1e-8 and rise == 0.0,
        details={"h0": float(h.values[0]), "h0_error": h0_err, "max_increase": rise},
    )


def random_rationals(count: int, seed: int, max_den: int = 10**6) -> list[Fraction]:
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        q = rng.randint(1, max_den)
        out.append(Fraction(rng.randrange(q), q))
    return out


def crit_roundtrip(count: int = 1000, seed: int = 42, **_) -> CriterionResult:
    failures = 0
    max_len = 0
    for x in random_rationals(count, seed):
        e = cfrac_core.expand(x)
        orb = cfrac_core.orbit(x, len(e.digits))
        if not (e.exact and cfrac_core.evaluate(e) == x and orb[-1] == 0):
            failures += 1
        max_len = max(max_len, len(e.digits))
    return CriterionResult(
        "roundtrip", passed=failures == 0, details={"rationals": count, "failures": failures, "max_digits": max_len}
    )


def crit_monte_carlo(samples: int = 100_000, seed: int = 42, workers: int = 1, **_) -> CriterionResult:
    rep = empirical_cdf_distance(MCConfig(n=10, samples=samples, seed=seed), workers=workers)
    p1 = constants.digit_probability(1)
    freq1 = rep.digit_histogram[0] / rep.samples if rep.samples else float("nan")
    ok = (
        rep.ks_distance is not None
        and rep.ks_distance <= 0.007
        and abs(freq1 - p1) <= 0.006
        and rep.rejected == 0
    )
    return CriterionResult(
        "monte-carlo",
        passed=ok,
        details={"ks_distance": rep.ks_distance, "digit1_frequency": freq1, "digit1_expected": p1, "rejected": rep.rejected},
    )


CRITERIA: dict[str, Callable[..., CriterionResult]] = {
    "constants": crit_constants,
    "normalization": crit_normalization,
    "monotonicity": crit_monotonicity,
    "fixed-point": crit_fixed_point,
    "contraction": crit_contraction,
    "decay-rate": crit_decay_rate,
    "h-function": crit_h_function,
    "roundtrip": crit_roundtrip,
    "monte-carlo": crit_monte_carlo,
}


def run_criterion(name: str, **kwargs) -> CriterionResult:
    if name not in CRITERIA:
        raise KeyError(f"unknown criterion {name!r}; choose from {', '.join(CRITERIA)}")
    t0 = time.perf_counter()
    res = CRITERIA[name](**kwargs)
    res.seconds = time.perf_counter() - t0
    return res


def run_all(only: list[str] | None = None, **kwargs) -> list[CriterionResult]:
    names = only or list(CRITERIA)
    return [run_criterion(n, **kwargs) for n in names]
