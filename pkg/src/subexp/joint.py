"""Joint laws under sequential independence.

Independence here is ordered: marginal i+1 is independent of marginals
1..i, and the joint worst-case expectation is evaluated by backward
recursion (innermost expectation over the last marginal first).  The two
nesting orders need not agree, which :func:`asymmetry_probe` makes
observable.

Grid error accumulates additively: the partial maximum over one variable
of a Lipschitz function is Lipschitz in the remaining variables with the
same constant, so each maximal marginal contributes lipschitz * h_i / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence, Union

import numpy as np

from .maximal import GridSpec, MaximalDist, apply_elementwise, interval_distance
from .scenarios import BoundedLipschitzFn, ScenarioFamily

__all__ = [
    "Marginal",
    "BoundedLipschitzFnN",
    "JointSpec",
    "ComposeResult",
    "ProbeResult",
    "PointCapacity",
    "compose_independent",
    "asymmetry_probe",
    "indicator_approx",
    "point_capacity",
]

Marginal = Union[MaximalDist, ScenarioFamily]


@dataclass(frozen=True)
class BoundedLipschitzFnN:
    """An n-ary test function, Lipschitz with respect to the sum of
    coordinatewise distances: |f(x) - f(y)| <= lipschitz * sum_i |x_i - y_i|."""

    fn: Callable[..., float]
    arity: int
    lipschitz: float
    bound: float = math.inf
    name: str = ""

    def __post_init__(self) -> None:
        if self.arity < 1:
            raise ValueError(f"arity must be >= 1, got {self.arity!r}")
        if not (self.lipschitz >= 0.0) or math.isinf(self.lipschitz):
            raise ValueError(f"lipschitz constant must be finite and >= 0, got {self.lipschitz!r}")

    def __call__(self, *xs: float) -> float:
        return self.fn(*xs)


@dataclass(frozen=True)
class JointSpec:
    """Ordered marginals; entry i+1 is independent of entries 1..i."""

    marginals: tuple[Marginal, ...]

    def __post_init__(self) -> None:
        if not self.marginals:
            raise ValueError("a joint spec needs at least one marginal")
        for i, m in enumerate(self.marginals):
            if not isinstance(m, (MaximalDist, ScenarioFamily)):
                raise TypeError(
                    f"marginal {i} must be a MaximalDist or ScenarioFamily, got {type(m).__name__}"
                )
        object.__setattr__(self, "marginals", tuple(self.marginals))

    def __len__(self) -> int:
        return len(self.marginals)


class ComposeResult(NamedTuple):
    value: float
    error_bound: float


def _family_reducer(fam: ScenarioFamily) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Support points plus a per-measure weight matrix over that support."""
    support = list(fam.support())
    index = {p: k for k, p in enumerate(support)}
    W = np.zeros((len(fam.measures), len(support)))
    for mi, m in enumerate(fam.measures):
        for p, w in m.atoms:
            W[mi, index[p]] += w
    row_mass = W.sum(axis=1)
    return np.asarray(support, dtype=float), W, row_mass


def compose_independent(j: JointSpec, f: BoundedLipschitzFnN, grid: GridSpec) -> ComposeResult:
    """Worst-case expectation of f under the sequentially independent joint law.

    Maximal marginals are scanned on ``grid``; family marginals are exact
    finite suprema.  The reported bound is the sum of the per-marginal
    grid certificates.
    """
    if f.arity != len(j.marginals):
        raise ValueError(f"function arity {f.arity} does not match {len(j.marginals)} marginals")

    axes: list[np.ndarray] = []
    reducers: list = []
    err = 0.0
    for m in j.marginals:
        if isinstance(m, MaximalDist):
            pts = grid.points(m)
            axes.append(pts)
            reducers.append(("max", None))
            err += f.lipschitz * grid.spacing(m) / 2.0
        else:
            pts, W, mass = _family_reducer(m)
            axes.append(pts)
            reducers.append(("family", (W, mass)))

    mesh = np.meshgrid(*axes, indexing="ij")
    vals = apply_elementwise(f.fn, *mesh)

    # Innermost expectation is over the last marginal, so reduce from the
    # trailing axis inward.
    for kind, payload in reversed(reducers):
        if kind == "max":
            vals = vals.max(axis=-1)
        else:
            W, mass = payload
            per_measure = np.tensordot(vals, W, axes=([-1], [1])) / mass
            vals = per_measure.max(axis=-1)
    return ComposeResult(float(vals), err)


class ProbeResult(NamedTuple):
    ab: float
    ba: float


def asymmetry_probe(dA: Marginal, dB: Marginal, f: BoundedLipschitzFnN, grid: GridSpec) -> ProbeResult:
    """Evaluate both nesting orders of a binary function.

    ``ab`` treats the second argument as independent of the first (inner
    expectation over ``dB``); ``ba`` swaps the roles.  The two numbers
    differ for suitably chosen inputs, which is the point.
    """
    if f.arity != 2:
        raise ValueError(f"asymmetry probe needs a binary function, got arity {f.arity}")
    ab = compose_independent(JointSpec((dA, dB)), f, grid).value
    swapped = BoundedLipschitzFnN(
        fn=lambda y, x: f.fn(x, y),
        arity=2,
        lipschitz=f.lipschitz,
        bound=f.bound,
        name=f.name + "~swapped" if f.name else "",
    )
    ba = compose_independent(JointSpec((dB, dA)), swapped, grid).value
    return ProbeResult(ab, ba)


def indicator_approx(x_star: float, k: int) -> BoundedLipschitzFn:
    """Lipschitz approximation of the indicator of {x_star}.

    phi_k(x) = 1 / (1 + k * |x - x_star|): equals 1 at x_star, has
    Lipschitz constant k and bound 1, and decreases pointwise to the
    indicator as k grows.
    """
    k = int(k)
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    xs = float(x_star)
    return BoundedLipschitzFn(
        fn=lambda x: 1.0 / (1.0 + k * abs(x - xs)),
        lipschitz=float(k),
        bound=1.0,
        name=f"indicator_approx(x*={xs}, k={k})",
    )


class PointCapacity(NamedTuple):
    value: float
    trace: tuple[float, ...]


def point_capacity(j: JointSpec, points: Sequence[float], k_max: int) -> PointCapacity:
    """Joint upper capacity of a point under maximal marginals.

    The capacity of {(x_1, ..., x_n)} is 1 exactly when every coordinate
    lies in its marginal interval, else 0; that indicator product is
    returned as ``value``.  The ``trace`` holds the worst-case
    expectations of the product of indicator approximations for
    k = 1..k_max, computed in closed form as
    prod_i 1 / (1 + k * dist(x_i, [lo_i, hi_i])).  The trace decreases in
    k toward ``value`` and serves as a diagnostic; ``value`` is the limit.
    """
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max!r}")
    if len(points) != len(j.marginals):
        raise ValueError(f"{len(points)} coordinates for {len(j.marginals)} marginals")
    dists = []
    for i, m in enumerate(j.marginals):
        if not isinstance(m, MaximalDist):
            raise TypeError(f"point_capacity needs maximal marginals; marginal {i} is {type(m).__name__}")
        dists.append(interval_distance(m, float(points[i])))
    value = 1.0 if all(dd == 0.0 for dd in dists) else 0.0
    trace = []
    for k in range(1, k_max + 1):
        prod = 1.0
        for dd in dists:
            prod *= 1.0 / (1.0 + k * dd)
        trace.append(prod)
    return PointCapacity(value, tuple(trace))
