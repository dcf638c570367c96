"""Instance generators: seeded synthetic data, parameter grids, and the
catalog of small hand-built matrices used by the golden tests.

PRNG identity is pinned: numpy's default_rng (PCG64). The same seed always
reproduces the same instance, across platforms and package versions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .model import (CardinalityBounds, Instance, InstanceError,
                    check_feasibility, make_instance)

PRNG_ALGORITHM = "numpy.random.Generator(PCG64)"

REVENUE_RANGE_DEFAULT = (1, 1000)
EXPERTISE_RANGE_DEFAULT = (0.0, 1.0)


@dataclass(frozen=True)
class GenSpec:
    m: int = 100
    n: int = 100
    seed: int = 0
    revenue_range: Tuple[int, int] = REVENUE_RANGE_DEFAULT
    expertise_range: Tuple[float, float] = EXPERTISE_RANGE_DEFAULT

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise InstanceError(f"need m, n >= 1, got {self.m}x{self.n}")
        lo, hi = self.revenue_range
        if lo > hi or lo < 1:
            raise InstanceError(f"bad revenue range [{lo}, {hi}]")
        elo, ehi = self.expertise_range
        if elo > ehi or elo < 0.0 or ehi > 1.0:
            raise InstanceError(f"bad expertise range [{elo}, {ehi}]")


def generate_synthetic(spec: GenSpec) -> Instance:
    """Draw revenues then expertise from one PCG64 stream; W = E * rev."""
    rng = np.random.default_rng(spec.seed)
    rev = rng.integers(spec.revenue_range[0], spec.revenue_range[1],
                       size=spec.n, endpoint=True).astype(np.float64)
    elo, ehi = spec.expertise_range
    e = elo + (ehi - elo) * rng.random((spec.m, spec.n))
    w = e * rev
    return make_instance(w, e=e, rev=rev, seed=spec.seed,
                         instance_id=f"syn-{spec.m}x{spec.n}-s{spec.seed}")


# ---------------------------------------------------------------------------
# parameter grids

SYNTHETIC_L_VALUES = (5, 10, 15, 20, 25)
SYNTHETIC_EPS = 3
# alpha kept as exact fractions so floor(alpha * L1 * m / n) is integer math
SYNTHETIC_ALPHAS = ((1, 2), (3, 4), (1, 1))
REAL_L_VALUE = 15


@dataclass(frozen=True)
class GridEntry:
    label: str
    l_value: int
    eps: int
    alpha: Optional[Tuple[int, int]]
    r2_mode: str
    bounds: CardinalityBounds
    skip: bool
    skip_reason: Optional[str]


@dataclass(frozen=True)
class ParamGrid:
    profile: str
    m: int
    n: int
    entries: tuple

    def active(self) -> tuple:
        return tuple(e for e in self.entries if not e.skip)


def _grid_entry(label, l_value, eps, alpha, r2_mode, l1, l2, r1, r2, m, n) -> GridEntry:
    try:
        bounds = CardinalityBounds(l1, l2, r1, r2)
    except InstanceError as exc:
        bounds = CardinalityBounds(0, max(l2, 0), 0, max(r2, r1, 0))
        return GridEntry(label, l_value, eps, alpha, r2_mode, bounds,
                         skip=True, skip_reason=str(exc))
    report = check_feasibility(m, n, bounds)
    return GridEntry(label, l_value, eps, alpha, r2_mode, bounds,
                     skip=not report.feasible,
                     skip_reason=None if report.feasible else report.reason)


def build_param_grid(m: int, n: int, profile: str = "synthetic") -> ParamGrid:
    """Derived bound combinations; infeasible ones carry a skip flag."""
    if m < 1 or n < 1:
        raise InstanceError(f"need m, n >= 1, got {m}x{n}")
    entries = []
    if profile == "synthetic":
        for l_value in SYNTHETIC_L_VALUES:
            l1, l2 = l_value - SYNTHETIC_EPS, l_value + SYNTHETIC_EPS
            for num, den in SYNTHETIC_ALPHAS:
                r1 = (num * l1 * m) // (den * n)
                for r2_mode in ("m", "2r1"):
                    r2 = m if r2_mode == "m" else 2 * r1
                    label = f"L{l_value}-a{num}of{den}-{r2_mode}"
                    entries.append(_grid_entry(label, l_value, SYNTHETIC_EPS,
                                               (num, den), r2_mode,
                                               l1, l2, r1, r2, m, n))
    elif profile == "real":
        l1 = l2 = REAL_L_VALUE
        r1 = (REAL_L_VALUE * m) // n
        entries.append(_grid_entry(f"real-L{REAL_L_VALUE}", REAL_L_VALUE, 0,
                                   None, "m", l1, l2, r1, m, m, n))
    else:
        raise InstanceError(f"unknown grid profile {profile!r}")
    return ParamGrid(profile=profile, m=m, n=n, entries=tuple(entries))


# ---------------------------------------------------------------------------
# hand-built catalog

PAPER_INSTANCE_NAMES = ("table-A", "table-B", "table-C", "table-D", "theorem-3")


def paper_instance(name: str, **params):
    """Return (Instance, CardinalityBounds) for a named catalog entry.

    table-A takes alpha in (0, 10); theorem-3 takes eps >= 0. The other
    entries take no parameters. Unexpected parameters are rejected so a
    misspelled key cannot silently fall back to a default.
    """
    allowed = {"table-A": {"alpha"}, "theorem-3": {"eps"}}.get(name, set())
    extra = sorted(set(params) - allowed)
    if extra:
        raise InstanceError(f"{name} does not take parameters {extra}")
    if name == "table-A":
        alpha = _require_param(name, params, "alpha")
        if not 0.0 < alpha < 10.0:
            raise InstanceError(f"table-A needs alpha in (0, 10), got {alpha}")
        row = [alpha / 4.0] * 4 + [10.0 - alpha]
        w = [list(row) for _ in range(4)] + [[2.0] * 5]
        inst = make_instance(w, instance_id=f"table-A:alpha={alpha!r}")
        return inst, CardinalityBounds(3, 3, 3, 3)
    if name == "table-B":
        w = [[3, 3, 2, 1, 1]] * 4 + [[1, 1, 2, 3, 3]]
        inst = make_instance(w, instance_id="table-B")
        return inst, CardinalityBounds(3, 3, 3, 3)
    if name == "table-C":
        w = [[7, 1, 2], [5.5, 2, 2.5], [5, 4, 1]]
        inst = make_instance(w, instance_id="table-C")
        return inst, CardinalityBounds(2, 2, 2, 2)
    if name == "table-D":
        w = [[7, 1, 2], [6, 1.5, 2.5], [5, 4, 1]]
        inst = make_instance(w, instance_id="table-D")
        return inst, CardinalityBounds(2, 2, 2, 2)
    if name == "theorem-3":
        eps = _require_param(name, params, "eps")
        if eps < 0.0:
            raise InstanceError(f"theorem-3 needs eps >= 0, got {eps}")
        w = [[1.0, 1.0, 2.0 + eps, 2.0 + eps],
             [eps, eps, 3.0, 3.0]]
        inst = make_instance(w, instance_id=f"theorem-3:eps={eps!r}")
        return inst, CardinalityBounds(2, 2, 1, 1)
    raise InstanceError(
        f"unknown catalog name {name!r}; known: {', '.join(PAPER_INSTANCE_NAMES)}")


def _require_param(name: str, params: dict, key: str) -> float:
    if key not in params:
        raise InstanceError(f"{name} requires parameter {key!r}")
    extra = set(params) - {key}
    if extra:
        raise InstanceError(f"{name} got unexpected parameters: {sorted(extra)}")
    return float(params[key])
