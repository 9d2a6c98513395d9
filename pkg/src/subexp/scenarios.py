"""Finite scenario families and worst-case (sublinear) expectations.

A scenario family is a finite, nonempty set of finitely supported
probability measures on the real line.  The upper expectation of a test
function is the largest classical expectation across the family, and the
upper capacity of an event is the largest probability any member assigns
to it.

Expectations are accumulated in exact rational arithmetic (weights and
function values are dyadic rationals, so sums and the final normalisation
are exact) and rounded to float once at the end.  Because rounding is
monotone, the returned floats satisfy monotonicity and constant
preservation exactly, not merely up to tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, NamedTuple, Sequence

__all__ = [
    "WEIGHT_TOL",
    "EvaluationError",
    "BoundedLipschitzFn",
    "DiscreteMeasure",
    "ScenarioFamily",
    "SublinearResult",
    "expect_linear",
    "sublinear_expect",
    "capacity",
]

# Absolute tolerance on the total mass of a measure.  Constructors reject
# out-of-tolerance weights instead of renormalising them.
WEIGHT_TOL = 1e-12


class EvaluationError(ValueError):
    """A test function returned a non-finite value at an atom."""


@dataclass(frozen=True)
class BoundedLipschitzFn:
    """A scalar test function with declared Lipschitz constant and bound.

    Parameters
    ----------
    fn : callable
        Pure function of one real argument.
    lipschitz : float
        A (not necessarily tight) Lipschitz constant, ``>= 0``.
    bound : float, optional
        Sup-norm bound; ``math.inf`` declares the function unbounded.
    name : str, optional
        Label used in reports and error messages.

    The declared constants are trusted by grid-based evaluators when they
    compute error certificates; tests spot-check them by randomized finite
    differences.
    """

    fn: Callable[[float], float]
    lipschitz: float
    bound: float = math.inf
    name: str = ""

    def __post_init__(self) -> None:
        if not (self.lipschitz >= 0.0) or math.isinf(self.lipschitz):
            raise ValueError(f"lipschitz constant must be finite and >= 0, got {self.lipschitz!r}")
        if not (self.bound >= 0.0):
            raise ValueError(f"bound must be >= 0 (or inf), got {self.bound!r}")

    def __call__(self, x: float) -> float:
        return self.fn(x)


def _as_finite_float(x, what: str) -> float:
    try:
        v = float(x)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{what} is not a real number: {x!r}") from exc
    if not math.isfinite(v):
        raise ValueError(f"{what} must be finite, got {v!r}")
    return v


@dataclass(frozen=True)
class DiscreteMeasure:
    """A finitely supported probability measure, stored as (point, weight) atoms.

    Weights must be nonnegative and sum to 1 within ``WEIGHT_TOL`` in
    absolute value; anything else is rejected (never silently
    renormalised).  Duplicate points are allowed and their weights add on
    query.
    """

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.atoms:
            raise ValueError("a measure needs at least one atom")
        clean = []
        for i, pair in enumerate(self.atoms):
            if len(pair) != 2:
                raise ValueError(f"atom {i} must be a (point, weight) pair, got {pair!r}")
            p = _as_finite_float(pair[0], f"atom {i} point")
            w = _as_finite_float(pair[1], f"atom {i} weight")
            if w < 0.0:
                raise ValueError(f"atom {i} has negative weight {w!r}")
            clean.append((p, w))
        total = math.fsum(w for _, w in clean)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(
                f"weights must sum to 1 within {WEIGHT_TOL} (got {total!r}); "
                "renormalise before constructing the measure"
            )
        object.__setattr__(self, "atoms", tuple(clean))

    @classmethod
    def dirac(cls, point: float) -> "DiscreteMeasure":
        """Unit mass at a single point."""
        return cls(((float(point), 1.0),))

    @classmethod
    def uniform(cls, points: Iterable[float]) -> "DiscreteMeasure":
        pts = [float(p) for p in points]
        if not pts:
            raise ValueError("uniform measure needs at least one point")
        w = 1.0 / len(pts)
        return cls(tuple((p, w) for p in pts))

    def merged_atoms(self) -> tuple[tuple[float, float], ...]:
        """Atoms with duplicate points merged (weights added), sorted by point."""
        acc: dict[float, Fraction] = {}
        for p, w in self.atoms:
            acc[p] = acc.get(p, Fraction(0)) + Fraction(w)
        return tuple((p, float(acc[p])) for p in sorted(acc))

    def support(self) -> tuple[float, ...]:
        return tuple(sorted({p for p, _ in self.atoms}))

    def to_dict(self) -> dict:
        return {"atoms": [[p, w] for p, w in self.atoms]}

    @classmethod
    def from_dict(cls, obj: dict) -> "DiscreteMeasure":
        if not isinstance(obj, dict) or "atoms" not in obj:
            raise ValueError(f"measure object must look like {{'atoms': [[point, weight], ...]}}, got {obj!r}")
        atoms = obj["atoms"]
        if not isinstance(atoms, (list, tuple)):
            raise ValueError(f"'atoms' must be an array, got {atoms!r}")
        return cls(tuple((a[0], a[1]) for a in atoms))


@dataclass(frozen=True)
class ScenarioFamily:
    """A nonempty, finite set of scenario measures."""

    measures: tuple[DiscreteMeasure, ...]

    def __post_init__(self) -> None:
        if not self.measures:
            raise ValueError("a scenario family must contain at least one measure")
        for i, m in enumerate(self.measures):
            if not isinstance(m, DiscreteMeasure):
                raise TypeError(f"family entry {i} must be a DiscreteMeasure, got {type(m).__name__}")
        object.__setattr__(self, "measures", tuple(self.measures))

    def __len__(self) -> int:
        return len(self.measures)

    def support(self) -> tuple[float, ...]:
        """Sorted union of the atom points of all members."""
        pts: set[float] = set()
        for m in self.measures:
            pts.update(m.support())
        return tuple(sorted(pts))

    def to_list(self) -> list:
        return [m.to_dict() for m in self.measures]

    @classmethod
    def from_list(cls, obj: Sequence) -> "ScenarioFamily":
        if not isinstance(obj, (list, tuple)):
            raise ValueError(f"a family must be a JSON array of measures, got {obj!r}")
        return cls(tuple(DiscreteMeasure.from_dict(m) for m in obj))


def _expect_exact(measure: DiscreteMeasure, f: Callable[[float], float]) -> Fraction:
    """Exact rational expectation of f under one measure.

    The measure's total mass may differ from 1 by up to WEIGHT_TOL, so the
    sum is normalised by the exact mass.  This keeps the expectation of a
    constant exactly equal to that constant.
    """
    num = Fraction(0)
    den = Fraction(0)
    for i, (p, w) in enumerate(measure.atoms):
        try:
            v = float(f(p))
        except Exception as exc:
            raise EvaluationError(f"test function failed at atom {i} (point {p!r}): {exc}") from exc
        if not math.isfinite(v):
            raise EvaluationError(f"test function returned non-finite value {v!r} at atom {i} (point {p!r})")
        wf = Fraction(w)
        num += wf * Fraction(v)
        den += wf
    return num / den


def expect_linear(measure: DiscreteMeasure, f: Callable[[float], float] | BoundedLipschitzFn) -> float:
    """Classical expectation of ``f`` under a single measure.

    Raises
    ------
    EvaluationError
        If ``f`` evaluates to a non-finite value at some atom; the message
        identifies the offending atom.
    """
    return float(_expect_exact(measure, f))


class SublinearResult(NamedTuple):
    value: float
    argmax_index: int


def sublinear_expect(family: ScenarioFamily, f: Callable[[float], float] | BoundedLipschitzFn) -> SublinearResult:
    """Upper expectation: the largest expectation of ``f`` across the family.

    Returns the value together with the index of the attaining measure.
    Ties go to the lowest index (left-to-right scan).
    """
    best_val: float | None = None
    best_idx = 0
    for i, m in enumerate(family.measures):
        v = float(_expect_exact(m, f))
        if best_val is None or v > best_val:
            best_val = v
            best_idx = i
    assert best_val is not None
    return SublinearResult(best_val, best_idx)


def capacity(family: ScenarioFamily, event: Callable[[float], bool]) -> float:
    """Upper capacity of an event: the largest probability across the family.

    ``event`` must be decidable (return a truth value) on every atom point
    of every member; predicate failures propagate.
    """
    best = 0.0
    for m in family.measures:
        num = Fraction(0)
        den = Fraction(0)
        for p, w in m.atoms:
            wf = Fraction(w)
            den += wf
            if event(p):
                num += wf
        v = float(num / den)
        if v > best:
            best = v
    return best
