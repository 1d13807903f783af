"""Numerical verifiers for the scalar inequalities behind the filter and
deconvolution estimates.

Four families, named by what the left side is:

  highpass_power     (1 - (1+x)^-m)^a      <= m x / a^(1/m)
  highpass_power_sq  (1 - (1+x^2)^-m)^a    <= sqrt(m) x / (2a)^(1/(2m))
  highpass_ratio     (x^2/(1+x^2))^a       <= x / sqrt(2a)   (and x/sqrt(a))
  exp_limit          |(1+x/n)^-n - e^-x|   <= 2/n, with (1+x/n)^-n >= e^-x

All hold for x >= 0 and real exponents a, m, n >= 1.  The left sides are
high-pass filter symbols raised to large powers: naive evaluation loses all
digits near x = 0, so everything routes through the expm1/log1p kernels.
Verification is a margin check with floating-point slack 1e-12 max(1, rhs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from . import kernels

__all__ = [
    "NAMES",
    "IneqCase",
    "GridSpec",
    "SweepResult",
    "check_highpass_power",
    "check_highpass_power_sq",
    "check_highpass_ratio",
    "check_exp_limit",
    "default_grid",
    "sweep",
]

NAMES = ("highpass_power", "highpass_power_sq", "highpass_ratio",
         "exp_limit")

_SLACK = 1e-12


@dataclass(frozen=True)
class IneqCase:
    """One evaluated inequality instance; margin = rhs - lhs."""

    name: str
    params: tuple
    lhs: float
    rhs: float
    side_ok: bool = True

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.side_ok and self.margin >= -_SLACK * max(1.0, self.rhs)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValueError(message)


def check_highpass_power(x: float, a: float, m: float) -> IneqCase:
    """(1 - (1+x)^-m)^a against m x / a^(1/m), for x >= 0, a, m >= 1."""
    _require(x >= 0.0, f"x must be >= 0, got {x}")
    _require(a >= 1.0, f"a must be >= 1, got {a}")
    _require(m >= 1.0, f"m must be >= 1, got {m}")
    lhs = float(kernels.compl_power(x, a, m))
    rhs = m * x * math.exp(-math.log(a) / m)
    return IneqCase("highpass_power", (x, a, m), lhs, rhs)


def check_highpass_power_sq(x: float, a: float, m: float) -> IneqCase:
    """(1 - (1+x^2)^-m)^a against sqrt(m) x / (2a)^(1/(2m))."""
    _require(x >= 0.0, f"x must be >= 0, got {x}")
    _require(a >= 1.0, f"a must be >= 1, got {a}")
    _require(m >= 1.0, f"m must be >= 1, got {m}")
    lhs = float(kernels.compl_power(x * x, a, m))
    rhs = math.sqrt(m) * x * math.exp(-math.log(2.0 * a) / (2.0 * m))
    return IneqCase("highpass_power_sq", (x, a, m), lhs, rhs)


def check_highpass_ratio(x: float, a: float) -> IneqCase:
    """(x^2/(1+x^2))^a against x / sqrt(2a).

    The weaker companion bound x / sqrt(a) is implied (it is larger) and
    folded into side_ok for completeness.
    """
    _require(x >= 0.0, f"x must be >= 0, got {x}")
    _require(a >= 1.0, f"a must be >= 1, got {a}")
    lhs = float(kernels.ratio_power(x * x, a))
    rhs = x / math.sqrt(2.0 * a)
    weak = x / math.sqrt(a)
    side_ok = lhs <= weak + _SLACK * max(1.0, weak)
    return IneqCase("highpass_ratio", (x, a), lhs, rhs, side_ok=side_ok)


def check_exp_limit(x: float, n: float) -> IneqCase:
    """|(1+x/n)^-n - e^-x| against 2/n, plus the sign fact that the power
    dominates the exponential."""
    _require(x >= 0.0, f"x must be >= 0, got {x}")
    _require(n >= 1.0, f"n must be >= 1, got {n}")
    _, diff = kernels.exp_limit_terms(x, n)
    diff = float(diff)
    # diff = (1+x/n)^-n - e^-x is computed as a signed quantity; it must be
    # nonnegative up to rounding for the absolute bound to be one-sided.
    side_ok = diff >= -_SLACK
    return IneqCase("exp_limit", (x, n), abs(diff), 2.0 / n, side_ok=side_ok)


_CHECKS = {
    "highpass_power": (check_highpass_power, 3),
    "highpass_power_sq": (check_highpass_power_sq, 3),
    "highpass_ratio": (check_highpass_ratio, 2),
    "exp_limit": (check_exp_limit, 2),
}


@dataclass(frozen=True)
class GridSpec:
    """Evaluation grid: log-spaced x (optionally with 0) times exponents."""

    x_points: int
    x_lo: float = 1e-6
    x_hi: float = 1e6
    include_zero: bool = True
    exps: tuple = (1.0, 1.5, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0,
                   256.0, 512.0, 1024.0)

    def x_values(self) -> np.ndarray:
        xs = np.logspace(math.log10(self.x_lo), math.log10(self.x_hi),
                         self.x_points)
        if self.include_zero:
            xs = np.concatenate(([0.0], xs))
        return xs


def default_grid(name: str, dense: bool = False) -> GridSpec:
    """Per-family default sized so every sweep exceeds 1e5 tuples."""
    if name not in _CHECKS:
        raise ValueError(f"unknown inequality: {name!r} (choose from {NAMES})")
    _, arity = _CHECKS[name]
    base = 800 if arity == 3 else 9600
    return GridSpec(x_points=base * (10 if dense else 1))


@dataclass(frozen=True)
class SweepResult:
    """Aggregate of one sweep; failures hold the offending tuples, if any."""

    name: str
    grid: GridSpec
    n_cases: int
    min_margin: float
    worst: IneqCase
    failures: tuple = ()

    @property
    def passed(self) -> bool:
        return not self.failures

    def cases(self) -> Iterator[IneqCase]:
        """Re-evaluate the grid lazily, one scalar case at a time."""
        check, arity = _CHECKS[self.name]
        xs = self.grid.x_values()
        if arity == 2:
            for e in self.grid.exps:
                for x in xs:
                    yield check(float(x), e)
        else:
            for a in self.grid.exps:
                for m in self.grid.exps:
                    for x in xs:
                        yield check(float(x), a, m)


def _eval_vector(name: str, xs: np.ndarray, exps: Sequence[float]):
    """Vectorized (lhs, rhs, side_margin, params) stream per exponent combo."""
    if name == "highpass_power":
        for a in exps:
            for m in exps:
                lhs = kernels.compl_power(xs, a, m)
                rhs = m * xs * math.exp(-math.log(a) / m)
                yield lhs, rhs, None, lambda i, a=a, m=m: (float(xs[i]), a, m)
    elif name == "highpass_power_sq":
        for a in exps:
            for m in exps:
                lhs = kernels.compl_power(xs * xs, a, m)
                rhs = math.sqrt(m) * xs \
                    * math.exp(-math.log(2.0 * a) / (2.0 * m))
                yield lhs, rhs, None, lambda i, a=a, m=m: (float(xs[i]), a, m)
    elif name == "highpass_ratio":
        for a in exps:
            lhs = kernels.ratio_power(xs * xs, a)
            rhs = xs / math.sqrt(2.0 * a)
            weak = xs / math.sqrt(a)
            side = weak - lhs + _SLACK * np.maximum(1.0, weak)
            yield lhs, rhs, side, lambda i, a=a: (float(xs[i]), a)
    elif name == "exp_limit":
        for n in exps:
            _, diff = kernels.exp_limit_terms(xs, n)
            lhs = np.abs(diff)
            rhs = np.full_like(xs, 2.0 / n)
            side = diff + _SLACK
            yield lhs, rhs, side, lambda i, n=n: (float(xs[i]), n)
    else:
        raise ValueError(f"unknown inequality: {name!r} (choose from {NAMES})")


def sweep(name: str, grid: Optional[GridSpec] = None,
          dense: bool = False) -> SweepResult:
    """Exhaustively evaluate one family over its grid.

    Returns the aggregate with the worst (smallest-margin) case materialized
    and every failing tuple collected; passing sweeps have an empty failures
    tuple.
    """
    if name not in _CHECKS:
        raise ValueError(f"unknown inequality: {name!r} (choose from {NAMES})")
    if grid is None:
        grid = default_grid(name, dense=dense)
    xs = grid.x_values()
    if len(xs) == 0 or len(grid.exps) == 0:
        raise ValueError("empty grid")

    check, _ = _CHECKS[name]
    n_cases = 0
    min_rel_margin = math.inf
    worst_params = None
    failures = []
    for lhs, rhs, side, params_of in _eval_vector(name, xs, grid.exps):
        margin = rhs - lhs
        scale = np.maximum(1.0, rhs)
        rel = margin / scale
        n_cases += len(xs)
        i_min = int(np.argmin(rel))
        if rel[i_min] < min_rel_margin:
            min_rel_margin = float(rel[i_min])
            worst_params = params_of(i_min)
        bad = margin < -_SLACK * scale
        if side is not None:
            bad |= side < 0.0
        for i in np.flatnonzero(bad):
            failures.append(check(*params_of(int(i))))
    worst = check(*worst_params)
    return SweepResult(
        name=name, grid=grid, n_cases=n_cases,
        min_margin=min_rel_margin, worst=worst, failures=tuple(failures),
    )
