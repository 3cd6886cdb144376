r"""Checkers and constant estimators for the functional inequalities.

Every checker evaluates one inequality instance on a given space with the
curvature constant K supplied by the caller (normally
``curvature.effective_K`` on the same computational domain) and returns a
``CheckReport``.  The pass rule is

    margin = rhs - lhs  >=  -(tol_rel * |rhs| + tol_abs),

with ``tol_rel`` defaulting to 2e-2 for discretization-grade sweeps and
1e-6 for exact-function checks; pointwise floors additionally carry a small
absolute tolerance because their reference side is zero.

The dimension parameter N ranges over (-inf, 0) and [n, inf] (n the grid
dimension); the coefficient (N-1)/(K N) is read as 1/K at N = inf.  Each
checker documents its own admissible N range.

Sign-changing test functions are routed through the positive/negative part
device: the gradient energy of f is accumulated as the energy of f_+ under
F plus the energy of f_- under the reversed norm, which agrees with
int F^2(grad f) dm in the continuum and respects non-reversibility.

``TestBank`` provides the reproducible function bank quantifying "for all f"
in the sweeps, and ``run_checker_matrix`` drives the (checker x N x bank)
regression matrix with deterministic report ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np

from .calculus import gradient_kink_mask, operators_for
from .curvature import admissible_N, effective_K
from .space import WeightedSpace, integrate
from .transport import transport_cost_sq

__all__ = [
    "CheckReport", "TestBank", "make_test_bank",
    "lichnerowicz_coeff", "gradient_energy_integral",
    "check_integrated_bochner", "check_bochner_pointwise",
    "check_poincare", "estimate_poincare_constant",
    "check_logsobolev", "check_gamma2_integral", "check_talagrand",
    "check_entropy_energy", "check_nash", "check_nonsharp_sobolev",
    "check_sobolev", "check_sobolev_inf",
    "SobolevExponents", "sobolev_exponent_table",
    "ABParameters", "ab_parameter_solver", "feasibility_boundary",
    "run_checker_matrix", "CHECKER_IDS",
]

TOL_SWEEP = 2e-2
TOL_EXACT = 1e-6
POINTWISE_TOL_ABS = 2e-2


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one inequality instance."""

    checker: str
    N: float
    K: float
    lhs: float
    rhs: float
    margin: float
    passed: bool
    tol_rel: float
    tol_abs: float = 0.0
    metadata: dict = field(default_factory=dict)


def _report(checker: str, N: float, K: float, lhs: float, rhs: float,
            tol_rel: float, tol_abs: float = 0.0, **metadata) -> CheckReport:
    margin = rhs - lhs
    # the 1e-13 term keeps exact-equality cases (rhs = 0) from failing on
    # floating-point dust
    allowance = tol_rel * abs(rhs) + tol_abs + 1e-13 * max(1.0, abs(lhs), abs(rhs))
    passed = bool(margin >= -allowance)
    return CheckReport(checker=checker, N=N, K=K, lhs=lhs, rhs=rhs,
                       margin=margin, passed=passed, tol_rel=tol_rel,
                       tol_abs=tol_abs, metadata=metadata)


def lichnerowicz_coeff(N: float, K: float) -> float:
    """(N - 1)/(K N), read as 1/K at N = infinity; requires K > 0."""
    if K <= 0:
        raise ValueError(f"checker needs a positive curvature constant, got K = {K}")
    if math.isinf(N):
        return 1.0 / K
    return (N - 1.0) / (K * N)


def _require_N(checker: str, N: float, dim: int, lo: Optional[float] = None,
               finite: bool = False, allow_negative: bool = False) -> None:
    if not admissible_N(N, dim):
        raise ValueError(f"{checker}: N = {N} not admissible on a {dim}D space")
    if N < 0 and not allow_negative:
        raise ValueError(f"{checker}: N < 0 is outside this inequality's range")
    if finite and math.isinf(N):
        raise ValueError(f"{checker}: N must be finite")
    if lo is not None and not math.isinf(N) and N <= lo:
        raise ValueError(f"{checker}: need N > {lo}")


# ----------------------------------------------------------------------
# shared functionals

def _lp_norm(space: WeightedSpace, f: np.ndarray, p: float) -> float:
    return float(integrate(space, np.abs(f) ** p) ** (1.0 / p))


def _variance(space: WeightedSpace, f: np.ndarray) -> float:
    centered = f - integrate(space, f)
    return integrate(space, centered * centered)


def _entropy_of_density(space: WeightedSpace, f: np.ndarray) -> float:
    """int_{f>0} f log f dm for a nonnegative density f."""
    mask = f > 1e-300
    out = np.zeros_like(f)
    out[mask] = f[mask] * np.log(f[mask])
    return integrate(space, out)


def gradient_energy_integral(space: WeightedSpace, f: np.ndarray) -> float:
    """int F^2(grad f) dm via the positive/negative part device.

    Accumulates the energy of f_+ under F and of f_- under the reversed
    norm; for single-signed f this equals the direct integral exactly.
    """
    ops = operators_for(space)
    f = np.asarray(f, dtype=float)
    f_plus = np.clip(f, 0.0, None)
    f_minus = np.clip(-f, 0.0, None)
    total = integrate(space, space.norm.dual_sq_values(ops.differential(f_plus)))
    if np.any(f_minus > 0):
        rev = space.norm.reverse()
        total += integrate(space, rev.dual_sq_values(ops.differential(f_minus)))
    return total


# ----------------------------------------------------------------------
# Bochner-type checks

def check_integrated_bochner(space: WeightedSpace, f: np.ndarray, N: float,
                             K: float, tol_rel: float = TOL_SWEEP) -> CheckReport:
    """Integrated Bochner inequality, rearranged through the exact discrete
    identity int D[Lap f](grad f) dm = -int (Lap f)^2 dm:

        K int F^2(grad f) dm + (1/N) int (Lap f)^2 dm  <=  int (Lap f)^2 dm.

    When K > 0 the metadata carries the equivalent gradient-vs-Laplacian
    form with coefficient (N-1)/(K N)."""
    _require_N("integrated_bochner", N, space.dim, allow_negative=True)
    ops = operators_for(space)
    f = np.asarray(f, dtype=float)
    grad_sq = integrate(space, space.norm.dual_sq_values(ops.differential(f)))
    lap = ops.laplacian(f)
    lap_sq = integrate(space, lap * lap)
    direct = integrate(space, np.einsum("mi,mi->m", ops.differential(lap), ops.gradient(f)))
    lhs = K * grad_sq + (0.0 if math.isinf(N) else lap_sq / N)
    meta = {"adjointness_gap": direct + lap_sq}
    if K > 0:
        meta["dual_lhs"] = grad_sq
        meta["dual_rhs"] = lichnerowicz_coeff(N, K) * lap_sq
    return _report("integrated_bochner", N, K, lhs, lap_sq, tol_rel, **meta)


def check_bochner_pointwise(space: WeightedSpace, f: np.ndarray, N: float, K: float,
                            tol_abs: float = POINTWISE_TOL_ABS) -> CheckReport:
    """Pointwise Bochner floor: min over interior nodes of

        Gamma2(f) - K F^2(grad f) - (Lap f)^2 / N   >=   -tol_abs.

    Nodes in the gradient-zero band are excluded from the floor for
    non-smooth norms (the unmasked minimum is reported in the metadata)."""
    _require_N("bochner_pointwise", N, space.dim, allow_negative=True)
    ops = operators_for(space)
    f = np.asarray(f, dtype=float)
    expr = ops.gamma2(f) - K * space.norm.dual_sq_values(ops.differential(f))
    if not math.isinf(N):
        expr = expr - ops.laplacian(f) ** 2 / N
    mask = gradient_kink_mask(ops, f)
    keep = ops.interior & mask
    if not np.any(keep):
        keep = ops.interior
    floor = float(np.min(expr[keep]))
    return _report("bochner_pointwise", N, K, -floor, 0.0, 0.0, tol_abs,
                   unmasked_floor=float(np.min(expr[ops.interior])),
                   excluded_nodes=int(np.sum(ops.interior & ~mask)))


# ----------------------------------------------------------------------
# Poincare

def check_poincare(space: WeightedSpace, f: np.ndarray, N: float, K: float,
                   tol_rel: float = TOL_SWEEP) -> CheckReport:
    """Var_m(f) <= (N-1)/(K N) * int F^2(grad f) dm, K > 0."""
    _require_N("poincare", N, space.dim, allow_negative=True)
    coeff = lichnerowicz_coeff(N, K)
    f = np.asarray(f, dtype=float)
    ops = operators_for(space)
    grad_sq = integrate(space, space.norm.dual_sq_values(ops.differential(f)))
    return _report("poincare", N, K, _variance(space, f), coeff * grad_sq, tol_rel)


def estimate_poincare_constant(space: WeightedSpace, seed: int = 0,
                               bank: Optional["TestBank"] = None,
                               ascent_iters: int = 150) -> float:
    """Sup of Var_m(f) / int F^2(grad f) dm over the test bank plus
    gradient-ascent refinements; a lower bound on the true constant."""
    ops = operators_for(space)
    bank = bank if bank is not None else make_test_bank(space, seed=seed)

    def quotient(g: np.ndarray) -> float:
        w = integrate(space, space.norm.dual_sq_values(ops.differential(g)))
        if w < 1e-14:
            return -math.inf
        return _variance(space, g) / w

    best_q, best_f = -math.inf, None
    for _, g in bank.members:
        q = quotient(g)
        if q > best_q:
            best_q, best_f = q, g
    if best_f is None:
        raise ValueError("bank contained no field with positive energy")

    f = best_f.copy()
    s = 0.5
    for _ in range(ascent_iters):
        q = quotient(f)
        centered = f - integrate(space, f)
        direction = centered + q * ops.laplacian(f)
        dn = math.sqrt(integrate(space, direction * direction))
        fn = math.sqrt(integrate(space, centered * centered))
        if dn < 1e-14 * max(fn, 1.0):
            break
        improved = False
        while s >= 1e-4:
            trial = f + (s * fn / dn) * direction
            if quotient(trial) > q + 1e-15:
                f, improved = trial, True
                s = min(1.0, s * 1.3)
                break
            s *= 0.5
        if not improved:
            break
        best_q = max(best_q, quotient(f))
    return float(best_q)


# ----------------------------------------------------------------------
# entropy-type checks

def check_logsobolev(space: WeightedSpace, f: np.ndarray, N: float, K: float,
                     tol_rel: float = TOL_SWEEP) -> CheckReport:
    """Ent_m(f m) <= (N-1)/(2 K N) * int_{f>0} F^2(grad f)/f dm for a
    nonnegative density f (auto-normalized to unit mass, with a flag).

    The inequality is proved for N in [n, inf); N = inf is accepted as the
    classical limit with coefficient 1/(2K), and N < 0 is accepted as an
    *experiment* (flagged in metadata) since the bound can genuinely fail
    there."""
    _require_N("logsobolev", N, space.dim, allow_negative=True)
    f = np.asarray(f, dtype=float)
    if np.min(f) < -1e-12:
        raise ValueError("logsobolev needs a nonnegative function")
    f = np.clip(f, 0.0, None)
    meta = {}
    total = integrate(space, f)
    if abs(total - 1.0) > 1e-8:
        if total <= 0:
            raise ValueError("logsobolev: function has zero mass")
        f = f / total
        meta["normalized"] = True
    if N < 0:
        meta["outside_proved_range"] = True
    ops = operators_for(space)
    grad_sq = space.norm.dual_sq_values(ops.differential(f))
    mask = f > 1e-300
    fisher = integrate(space, np.where(mask, grad_sq / np.where(mask, f, 1.0), 0.0))
    lhs = _entropy_of_density(space, f)
    rhs = 0.5 * lichnerowicz_coeff(N, K) * fisher
    return _report("logsobolev", N, K, lhs, rhs, tol_rel, fisher=fisher, **meta)


def check_gamma2_integral(space: WeightedSpace, u: np.ndarray, N: float, K: float,
                          tol_rel: float = TOL_SWEEP) -> CheckReport:
    """int u F^2(grad log u) dm <= (N-1)/(K N) * int u Gamma2(log u) dm
    for u bounded away from zero."""
    _require_N("gamma2_integral", N, space.dim)
    u = np.asarray(u, dtype=float)
    if np.min(u) <= 0:
        raise ValueError("gamma2_integral needs inf u > 0")
    coeff = lichnerowicz_coeff(N, K)
    ops = operators_for(space)
    log_u = np.log(u)
    grad_sq = space.norm.dual_sq_values(ops.differential(log_u))
    lhs = integrate(space, u * grad_sq)
    rhs = coeff * integrate(space, u * ops.gamma2(log_u))
    return _report("gamma2_integral", N, K, lhs, rhs, tol_rel)


def check_talagrand(space: WeightedSpace, mu: np.ndarray, N: float, K: float,
                    tol_rel: float = TOL_SWEEP) -> CheckReport:
    """W2^2(mu, m) <= 2 (N-1)/(K N) * Ent_m(mu) for N in [n, inf), with the
    asymmetric squared-distance transport cost (mu is the source)."""
    _require_N("talagrand", N, space.dim, finite=True)
    coeff = lichnerowicz_coeff(N, K)
    mu = np.asarray(mu, dtype=float)
    m = space.cell_mass
    mask = mu > 0
    if np.any(mask & (m <= 0)):
        raise ValueError("mu charges a node of zero reference mass: entropy infinite")
    ent = float(np.sum(mu[mask] * np.log(mu[mask] / m[mask])))
    lhs = transport_cost_sq(space, mu, m)
    return _report("talagrand", N, K, lhs, 2.0 * coeff * ent, tol_rel, entropy=ent)


def check_entropy_energy(space: WeightedSpace, f: np.ndarray, N: float, K: float,
                         tol_rel: float = TOL_SWEEP) -> CheckReport:
    """Ent_m(f^2 m) <= (N/2) log(1 + 4/(K N) int F^2(grad f) dm) for
    N in [n, inf), f normalized to unit L2 mass (flagged if rescaled)."""
    _require_N("entropy_energy", N, space.dim, finite=True)
    if K <= 0:
        raise ValueError("entropy_energy needs K > 0")
    f = np.asarray(f, dtype=float)
    meta = {}
    total = integrate(space, f * f)
    if abs(total - 1.0) > 1e-8:
        if total <= 0:
            raise ValueError("entropy_energy: zero function")
        f = f / math.sqrt(total)
        meta["normalized"] = True
    lhs = _entropy_of_density(space, f * f)
    grad_sq = gradient_energy_integral(space, f)
    rhs = 0.5 * N * math.log1p(4.0 * grad_sq / (K * N))
    return _report("entropy_energy", N, K, lhs, rhs, tol_rel, **meta)


def check_nash(space: WeightedSpace, f: np.ndarray, N: float, K: float,
               tol_rel: float = TOL_SWEEP) -> CheckReport:
    """Nash inequality ||f||_2^{N+2} <= (||f||_2^2 + 4/(K N) E(f))^{N/2} ||f||_1^2,
    compared in the log domain so that large N neither overflows nor
    underflows."""
    _require_N("nash", N, space.dim, finite=True)
    if K <= 0:
        raise ValueError("nash needs K > 0")
    f = np.asarray(f, dtype=float)
    l2 = _lp_norm(space, f, 2.0)
    l1 = _lp_norm(space, f, 1.0)
    if l2 < 1e-300:
        return _report("nash", N, K, 0.0, 0.0, tol_rel, log_domain=True)
    energy = 0.5 * gradient_energy_integral(space, f)
    lhs = (N + 2.0) * math.log(l2)
    rhs = 0.5 * N * math.log(l2 * l2 + 4.0 * energy / (K * N)) + 2.0 * math.log(l1)
    return _report("nash", N, K, lhs, rhs, tol_rel, log_domain=True)


def check_nonsharp_sobolev(space: WeightedSpace, f: np.ndarray, N: float, K: float,
                           tol_rel: float = TOL_SWEEP) -> CheckReport:
    """Non-sharp Sobolev bound with fully explicit constants:
    ||f||_p^2 <= 2^{4N/(N-2)} ( (4/3)||f||_2^2 + 4/(K N) E(f) ), p = 2N/(N-2)."""
    _require_N("nonsharp_sobolev", N, space.dim, lo=2.0, finite=True)
    if K <= 0:
        raise ValueError("nonsharp_sobolev needs K > 0")
    f = np.asarray(f, dtype=float)
    p = 2.0 * N / (N - 2.0)
    lhs = _lp_norm(space, f, p) ** 2
    energy = 0.5 * gradient_energy_integral(space, f)
    const = 2.0 ** (4.0 * N / (N - 2.0))
    rhs = const * ((4.0 / 3.0) * _lp_norm(space, f, 2.0) ** 2 + 4.0 * energy / (K * N))
    return _report("nonsharp_sobolev", N, K, lhs, rhs, tol_rel, p=p, constant=const)


def _sobolev_difference_quotient(space: WeightedSpace, f: np.ndarray, p: float) -> float:
    l2 = _lp_norm(space, f, 2.0)
    lp = _lp_norm(space, f, p)
    return (lp * lp - l2 * l2) / (p - 2.0)


def check_sobolev(space: WeightedSpace, f: np.ndarray, p: float, N: float, K: float,
                  tol_rel: float = TOL_SWEEP) -> CheckReport:
    """Sharp Sobolev family for N in [n, inf):

        (||f||_p^2 - ||f||_2^2)/(p - 2) <= (N-1)/(K N) int F^2(grad f) dm

    for 1 <= p <= 2(N+1)/N.  p = 2 dispatches to the log-Sobolev checker as
    the stated limit (applied to f^2 normalized to unit mass)."""
    _require_N("sobolev", N, space.dim, finite=True)
    p_max = 2.0 * (N + 1.0) / N
    if not (1.0 - 1e-12 <= p <= p_max + 1e-12):
        raise ValueError(f"sobolev: p = {p} outside [1, {p_max}]")
    f = np.asarray(f, dtype=float)
    if abs(p - 2.0) < 1e-9:
        total = integrate(space, f * f)
        if total <= 0:
            raise ValueError("sobolev: zero function")
        report = check_logsobolev(space, f * f / total, N, K, tol_rel=tol_rel)
        meta = dict(report.metadata)
        meta.update(p=2.0, dispatched_from="sobolev")
        return CheckReport(checker="sobolev", N=N, K=K, lhs=report.lhs,
                           rhs=report.rhs, margin=report.margin,
                           passed=report.passed, tol_rel=report.tol_rel,
                           tol_abs=report.tol_abs, metadata=meta)
    lhs = _sobolev_difference_quotient(space, f, p)
    rhs = lichnerowicz_coeff(N, K) * gradient_energy_integral(space, f)
    return _report("sobolev", N, K, lhs, rhs, tol_rel, p=p)


def check_sobolev_inf(space: WeightedSpace, f: np.ndarray, p: float, K: float,
                      tol_rel: float = TOL_SWEEP) -> CheckReport:
    """Dimension-free Sobolev family (N = inf): for 1 <= p <= 2,

        (||f||_p^2 - ||f||_2^2)/(p - 2) <= (1/K) int F^2(grad f) dm,

    where the p < 2 sign of (p - 2) keeps the quotient nonnegative.
    p = 2 dispatches to log-Sobolev at N = inf."""
    if not (1.0 - 1e-12 <= p <= 2.0 + 1e-12):
        raise ValueError(f"sobolev_inf: p = {p} outside [1, 2]")
    if K <= 0:
        raise ValueError("sobolev_inf needs K > 0")
    f = np.asarray(f, dtype=float)
    if abs(p - 2.0) < 1e-9:
        total = integrate(space, f * f)
        if total <= 0:
            raise ValueError("sobolev_inf: zero function")
        report = check_logsobolev(space, f * f / total, math.inf, K, tol_rel=tol_rel)
        meta = dict(report.metadata)
        meta.update(p=2.0, dispatched_from="sobolev_inf")
        return CheckReport(checker="sobolev_inf", N=math.inf, K=K, lhs=report.lhs,
                           rhs=report.rhs, margin=report.margin,
                           passed=report.passed, tol_rel=report.tol_rel,
                           tol_abs=report.tol_abs, metadata=meta)
    lhs = _sobolev_difference_quotient(space, f, p)
    rhs = gradient_energy_integral(space, f) / K
    return _report("sobolev_inf", math.inf, K, lhs, rhs, tol_rel, p=p)


# ----------------------------------------------------------------------
# exponent algebra for the sharp Sobolev proof parameters

@dataclass(frozen=True)
class SobolevExponents:
    p_basic_max: float
    p_extended_max: float
    b0_extremal: float
    a0_extremal: float


def sobolev_exponent_table(N: float) -> SobolevExponents:
    """Admissible-exponent table for dimension parameter N > 2.

    ``p_basic_max`` = 2(N+1)/N is the proved range; ``p_extended_max`` is
    the slightly larger threshold up to which the proof parameters stay
    feasible; at the critical exponent 2N/(N-2) the extremal parameter pair
    is (b0, a0) = (2(N-3)/(N-2), -2/(N-2)) with a0 < 0 (infeasible)."""
    if N <= 2:
        raise ValueError("exponent table needs N > 2")
    p_basic = 2.0 * (N + 1.0) / N
    p_ext = (7.0 * N * N + 2.0 * N + (N + 2.0) * math.sqrt(N * N + 8.0 * N)) \
        / (4.0 * N * (N - 1.0))
    p_crit = 2.0 * N / (N - 2.0)
    if not (p_basic <= p_ext + 1e-12 and p_ext <= p_crit + 1e-12):
        raise ArithmeticError("exponent ordering violated; N out of range?")
    return SobolevExponents(
        p_basic_max=p_basic,
        p_extended_max=p_ext,
        b0_extremal=2.0 * (N - 3.0) / (N - 2.0),
        a0_extremal=-2.0 / (N - 2.0),
    )


@dataclass(frozen=True)
class ABParameters:
    a0: float
    b0: float
    feasible: bool
    residuals: tuple


def ab_parameter_solver(N: float, p: float) -> ABParameters:
    """Solve the coefficient-matching system of the sharp Sobolev argument.

    Eliminating a = b/2 - (p-1)(N-1)/(N+2) leaves a quadratic in b; the
    larger root b0 >= 2(1 - (p-1)/(N+2)) is taken and a0 derived from it.
    Non-reversibility forces a, b >= 0, so a0 < 0 means the parameter pair
    is infeasible at this (N, p).  Both matching equations are re-verified
    to 1e-10."""
    if N <= 2:
        raise ValueError("parameter solver needs N > 2")
    q = (p - 1.0) / (N + 2.0) - 1.0
    r = -(p - 2.0) + (p - 1.0) ** 2 * ((N - 1.0) / (N + 2.0)) ** 2
    disc = q * q - r
    if disc < -1e-12:
        raise ValueError(
            f"negative discriminant at (N, p) = ({N}, {p}): p outside [1, {2*N/(N-2)}]"
        )
    b0 = 2.0 * (-q + math.sqrt(max(disc, 0.0)))
    a0 = 0.5 * b0 - (p - 1.0) * (N - 1.0) / (N + 2.0)
    res1 = abs((p - 1.0 - 0.5 * b0) - (3.0 * b0 - 2.0 * (N + 2.0) * a0) / (2.0 * (N - 1.0)))
    res2 = abs((p - 2.0) * (b0 - 1.0) - ((a0 - b0) ** 2 - N * a0 * a0) / (N - 1.0))
    if max(res1, res2) > 1e-10:
        raise ArithmeticError(f"parameter equations not satisfied: residuals {res1}, {res2}")
    return ABParameters(a0=a0, b0=b0, feasible=bool(a0 >= 0.0), residuals=(res1, res2))


def feasibility_boundary(N: float, tol: float = 1e-12) -> float:
    """Largest p with a feasible parameter pair, located by bisection on the
    sign of a0 between 2(N+1)/N and the critical exponent."""
    table = sobolev_exponent_table(N)
    lo, hi = table.p_basic_max, 2.0 * N / (N - 2.0)
    if ab_parameter_solver(N, lo).a0 < 0:
        raise ArithmeticError("a0 must be feasible at p = 2(N+1)/N")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ab_parameter_solver(N, mid).a0 >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ----------------------------------------------------------------------
# test bank

@dataclass(frozen=True)
class TestBank:
    """Reproducible bank of smooth scalar fields, mean-zero and amplitude-
    normalized, quantifying the 'for all f' of the sweeps."""

    members: tuple  # of (label, ndarray) pairs
    seed: int

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def fields(self):
        return [f for _, f in self.members]


def _normalize_member(space: WeightedSpace, f: np.ndarray) -> Optional[np.ndarray]:
    f = np.asarray(f, dtype=float)
    f = f - integrate(space, f)
    amp = float(np.max(np.abs(f)))
    if amp < 1e-13:
        return None
    return f / amp


def make_test_bank(space: WeightedSpace, seed: int = 0, size: int = 12) -> TestBank:
    if size < 1:
        raise ValueError("bank size must be >= 1")
    x = space.coords[:, 0]
    Lx = space.domain.lengths[0]
    raw = []
    if space.dim == 1:
        raw += [
            ("linear", x),
            ("quadratic", x**2),
            ("cubic", x**3),
            ("mode-sin1", np.sin(2 * np.pi * x / Lx)),
            ("mode-cos1", np.cos(2 * np.pi * x / Lx)),
            ("mode-sin2", np.sin(4 * np.pi * x / Lx)),
            ("tilt-pos", np.exp(1.6 * x / Lx)),
            ("tilt-neg", np.exp(-1.2 * x / Lx)),
            ("bump", np.exp(-((x - 0.1 * Lx) / (0.15 * Lx)) ** 2)),
        ]
    else:
        y = space.coords[:, 1]
        Ly = space.domain.lengths[1]
        raw += [
            ("linear-x", x),
            ("linear-y", y),
            ("mode-x", np.sin(2 * np.pi * x / Lx)),
            ("mode-y", np.cos(2 * np.pi * y / Ly)),
            ("mode-xy", np.sin(2 * np.pi * x / Lx) * np.cos(2 * np.pi * y / Ly)),
            ("tilt", np.exp(0.8 * (x / Lx + y / Ly))),
            ("bump", np.exp(-((x / (0.2 * Lx)) ** 2 + (y / (0.2 * Ly)) ** 2))),
        ]
    rng = np.random.default_rng(seed)
    members = []
    for label, f in raw:
        g = _normalize_member(space, f)
        if g is not None:
            members.append((label, g))
        if len(members) == size:
            break
    k = 0
    while len(members) < size:
        modes = np.arange(1, 5)
        f = np.zeros(space.n_nodes)
        for m in modes:
            a, b = rng.standard_normal(2) / m**2
            f = f + a * np.cos(2 * np.pi * m * x / Lx) + b * np.sin(2 * np.pi * m * x / Lx)
            if space.dim == 2:
                y = space.coords[:, 1]
                Ly = space.domain.lengths[1]
                c, d = rng.standard_normal(2) / m**2
                f = f + c * np.cos(2 * np.pi * m * y / Ly) + d * np.sin(2 * np.pi * m * y / Ly)
        g = _normalize_member(space, f)
        if g is not None:
            members.append((f"noise-{k}", g))
        k += 1
    return TestBank(members=tuple(members), seed=seed)


# ----------------------------------------------------------------------
# the regression matrix

CHECKER_IDS = (
    "integrated_bochner", "bochner_pointwise", "poincare", "logsobolev",
    "gamma2_integral", "talagrand", "entropy_energy", "nash",
    "nonsharp_sobolev", "sobolev", "sobolev_inf",
)


def _positive_density(space: WeightedSpace, g: np.ndarray) -> np.ndarray:
    f = 1.0 + 0.45 * g
    return f / integrate(space, f)


def _sobolev_p_grid(N: float) -> List[float]:
    p_max = 2.0 * (N + 1.0) / N
    grid = [1.0, 1.5, 2.0, p_max]
    return sorted({p for p in grid if 1.0 <= p <= p_max + 1e-12})


def _measure_from_member(space: WeightedSpace, g: np.ndarray) -> np.ndarray:
    mu = (1.0 + 0.45 * g) * space.cell_mass
    return mu / mu.sum()


def run_checker_matrix(space: WeightedSpace, N_values: Sequence[float],
                       checkers: Optional[Sequence[str]] = None,
                       bank: Optional[TestBank] = None, seed: int = 0,
                       bank_size: int = 12, override_K: Optional[float] = None,
                       tol_rel: float = TOL_SWEEP,
                       n_directions: int = 16) -> List[CheckReport]:
    """Run the (checker x N x bank) matrix on one space.

    K is taken from ``effective_K`` on this very space for each N unless
    ``override_K`` pins it (falsification runs).  Checkers are applied only
    at their admissible N; reports come back in deterministic order."""
    chosen = list(checkers) if checkers else list(CHECKER_IDS)
    unknown = [c for c in chosen if c not in CHECKER_IDS]
    if unknown:
        raise ValueError(f"unknown checkers: {unknown}")
    bank = bank if bank is not None else make_test_bank(space, seed=seed, size=bank_size)
    reports: List[CheckReport] = []
    for N in N_values:
        if not admissible_N(N, space.dim):
            raise ValueError(f"matrix: N = {N} not admissible on this space")
        K = override_K if override_K is not None else effective_K(space, N, n_directions).K_eff
        finite = not math.isinf(N)
        for checker in chosen:
            if checker == "sobolev_inf" and finite:
                continue
            if checker in ("logsobolev", "gamma2_integral", "talagrand",
                           "entropy_energy", "nash", "nonsharp_sobolev",
                           "sobolev") and N < 0:
                continue
            if checker in ("talagrand", "entropy_energy", "nash",
                           "nonsharp_sobolev", "sobolev") and not finite:
                continue
            if checker == "nonsharp_sobolev" and N <= 2:
                continue
            if checker in ("poincare", "logsobolev", "gamma2_integral",
                           "talagrand", "entropy_energy", "nash",
                           "nonsharp_sobolev", "sobolev", "sobolev_inf") and K <= 0:
                continue
            for label, g in bank:
                meta = {"member": label}
                if checker == "integrated_bochner":
                    rep = check_integrated_bochner(space, g, N, K, tol_rel)
                elif checker == "bochner_pointwise":
                    rep = check_bochner_pointwise(space, g, N, K)
                elif checker == "poincare":
                    rep = check_poincare(space, g, N, K, tol_rel)
                elif checker == "logsobolev":
                    rep = check_logsobolev(space, _positive_density(space, g), N, K, tol_rel)
                elif checker == "gamma2_integral":
                    rep = check_gamma2_integral(space, 1.0 + 0.45 * g, N, K, tol_rel)
                elif checker == "talagrand":
                    rep = check_talagrand(space, _measure_from_member(space, g), N, K, tol_rel)
                elif checker == "entropy_energy":
                    rep = check_entropy_energy(space, g, N, K, tol_rel)
                elif checker == "nash":
                    rep = check_nash(space, g, N, K, tol_rel)
                elif checker == "nonsharp_sobolev":
                    rep = check_nonsharp_sobolev(space, g, N, K, tol_rel)
                elif checker == "sobolev":
                    for p in _sobolev_p_grid(N):
                        rep_p = check_sobolev(space, g, p, N, K, tol_rel)
                        md = dict(rep_p.metadata)
                        md.update(meta)
                        reports.append(replace(rep_p, metadata=md))
                    continue
                else:  # sobolev_inf
                    for p in (1.0, 1.5, 2.0):
                        rep_p = check_sobolev_inf(space, g, p, K, tol_rel)
                        md = dict(rep_p.metadata)
                        md.update(meta)
                        reports.append(replace(rep_p, metadata=md))
                    continue
                md = dict(rep.metadata)
                md.update(meta)
                reports.append(replace(rep, metadata=md))
    return reports
