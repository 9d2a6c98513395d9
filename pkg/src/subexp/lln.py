"""Law-of-large-numbers experiments under mean ambiguity.

Observations are X_i = mu_i + eps_i where each mu_i is chosen by a policy
inside the mean interval and eps_i is mean-zero noise.  Empirical
averages of f(S_n/n) taken over any finite policy class only explore part
of the ambiguity, so the estimates reported here are lower bounds on the
worst case; the limit target itself comes from the maximal distribution.

Determinism: replication r draws from numpy's PCG64 generator seeded with
seed + r.  Within one replication, policies that randomise draw their
whole mean sequence first and the noise vector second; the adversarial
policy (which must see the running average) draws the noise vector first
and then walks the path.  Identical configs and seeds therefore
reproduce paths bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .maximal import GridSpec, MaximalDist, eval_maximal, interval_distance
from .scenarios import BoundedLipschitzFn

__all__ = [
    "SimulationError",
    "NoiseSpec",
    "MeanPolicy",
    "SimConfig",
    "SimRow",
    "SimReport",
    "simulate_path",
    "empirical_lln",
    "rate_check",
    "second_moment_upper",
    "log_schedule",
]

GENERATOR_NAME = "numpy-pcg64"


class SimulationError(RuntimeError):
    """A policy produced a mean outside the ambiguity interval."""


@dataclass(frozen=True)
class NoiseSpec:
    """Mean-zero observation noise.

    kinds: "none", "uniform" (uniform on [-a, a]), "two_point" (+-a with
    equal probability).  ``second_moment`` is exact: 0, a^2/3, a^2.
    """

    kind: str
    half_width: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("none", "uniform", "two_point"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind != "none" and not (self.half_width > 0):
            raise ValueError(f"noise half-width must be positive, got {self.half_width!r}")

    @classmethod
    def none(cls) -> "NoiseSpec":
        return cls("none")

    @classmethod
    def uniform(cls, half_width: float) -> "NoiseSpec":
        return cls("uniform", float(half_width))

    @classmethod
    def two_point(cls, half_width: float) -> "NoiseSpec":
        return cls("two_point", float(half_width))

    @property
    def second_moment(self) -> float:
        if self.kind == "none":
            return 0.0
        if self.kind == "uniform":
            return self.half_width**2 / 3.0
        return self.half_width**2

    @property
    def label(self) -> str:
        return "none" if self.kind == "none" else f"{self.kind}:{self.half_width}"

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "none":
            return np.zeros(n)
        if self.kind == "uniform":
            return rng.uniform(-self.half_width, self.half_width, n)
        return (2.0 * rng.integers(0, 2, n) - 1.0) * self.half_width


@dataclass(frozen=True)
class MeanPolicy:
    """Per-step mean selection inside the ambiguity interval.

    Use the factory classmethods.  ``adversarial`` takes a callback that
    receives the running average of the observations so far (0.0 before
    the first step) and returns the next mean; it is a library-only
    policy, the CLI grammar covers the other three kinds.
    """

    kind: str
    values: tuple[float, ...] = ()
    callback: Callable[[float], float] | None = None
    label: str = ""

    @classmethod
    def constant(cls, mu: float) -> "MeanPolicy":
        mu = float(mu)
        return cls("constant", (mu,), None, f"constant({mu:g})")

    @classmethod
    def periodic(cls, mus: Sequence[float]) -> "MeanPolicy":
        vals = tuple(float(m) for m in mus)
        if not vals:
            raise ValueError("periodic policy needs at least one mean")
        return cls("periodic", vals, None, "periodic(" + ",".join(f"{v:g}" for v in vals) + ")")

    @classmethod
    def random_choice(cls, mus: Sequence[float]) -> "MeanPolicy":
        vals = tuple(float(m) for m in mus)
        if not vals:
            raise ValueError("random policy needs at least one mean")
        return cls("random", vals, None, "random(" + ",".join(f"{v:g}" for v in vals) + ")")

    @classmethod
    def adversarial(cls, fn: Callable[[float], float], name: str = "callback") -> "MeanPolicy":
        return cls("adversarial", (), fn, f"adversarial({name})")

    @property
    def policy_id(self) -> str:
        return self.label

    def mean_vector(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """The full mean sequence for non-adversarial kinds."""
        if self.kind == "constant":
            return np.full(n, self.values[0])
        if self.kind == "periodic":
            reps = -(-n // len(self.values))
            return np.tile(np.asarray(self.values), reps)[:n]
        if self.kind == "random":
            return rng.choice(np.asarray(self.values), size=n)
        raise ValueError("adversarial policies generate means stepwise, not as a vector")


@dataclass(frozen=True)
class SimConfig:
    n: int
    reps: int
    seed: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n!r}")
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps!r}")


def _check_means(mus: np.ndarray, d: MaximalDist, policy: MeanPolicy) -> None:
    bad = np.flatnonzero((mus < d.mu_lo) | (mus > d.mu_hi))
    if bad.size:
        i = int(bad[0])
        raise SimulationError(
            f"policy {policy.policy_id} produced mean {float(mus[i])!r} at step {i}, "
            f"outside [{d.mu_lo}, {d.mu_hi}]"
        )


def _simulate_one(
    d: MaximalDist, policy: MeanPolicy, noise: NoiseSpec, n: int, rng: np.random.Generator
) -> np.ndarray:
    if policy.kind == "adversarial":
        eps = noise.sample(rng, n)
        x = np.empty(n)
        total = 0.0
        for i in range(n):
            running = total / i if i else 0.0
            mu = float(policy.callback(running))
            if not (d.mu_lo <= mu <= d.mu_hi):
                raise SimulationError(
                    f"policy {policy.policy_id} produced mean {mu!r} at step {i}, "
                    f"outside [{d.mu_lo}, {d.mu_hi}]"
                )
            x[i] = mu + eps[i]
            total += x[i]
        return x
    mus = policy.mean_vector(n, rng)
    _check_means(mus, d, policy)
    return mus + noise.sample(rng, n)


def _rep_rng(seed: int, r: int) -> np.random.Generator:
    return np.random.default_rng(seed + r)


def simulate_path(d: MaximalDist, policy: MeanPolicy, noise: NoiseSpec, cfg: SimConfig) -> np.ndarray:
    """Simulate cfg.reps paths of length cfg.n; returns a (reps, n) array."""
    rows = [_simulate_one(d, policy, noise, cfg.n, _rep_rng(cfg.seed, r)) for r in range(cfg.reps)]
    return np.vstack(rows)


def log_schedule(n_max: int, num: int = 10) -> list[int]:
    """Distinct integer sample sizes, roughly log-spaced, ending at n_max."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max!r}")
    raw = np.geomspace(1, n_max, num=num)
    return sorted({int(round(v)) for v in raw} | {n_max})


@dataclass(frozen=True)
class SimRow:
    n: int
    policy_id: str
    estimate: float
    target_or_bound: float
    gap: float
    stderr: float


@dataclass(frozen=True)
class SimReport:
    """Tabular result of an LLN or rate experiment.

    ``gap`` is estimate - target_or_bound in both kinds.  For kind
    "rate" a row is a violation when its gap exceeds three standard
    errors of the Monte-Carlo mean.
    """

    kind: str
    rows: tuple[SimRow, ...]
    seed: int
    noise: str
    policies: tuple[str, ...]
    generator: str = GENERATOR_NAME

    CSV_COLUMNS = ("n", "policy_id", "estimate", "target_or_bound", "gap", "stderr")

    def max_rows(self) -> list[SimRow]:
        """Per n, the row with the largest estimate (first policy on ties)."""
        out: dict[int, SimRow] = {}
        for row in self.rows:
            cur = out.get(row.n)
            if cur is None or row.estimate > cur.estimate:
                out[row.n] = row
        return [out[n] for n in sorted(out)]

    def violations(self) -> list[SimRow]:
        if self.kind != "rate":
            return []
        return [r for r in self.rows if r.gap > 3.0 * r.stderr]

    def csv_rows(self) -> list[list]:
        return [
            [r.n, r.policy_id, repr(r.estimate), repr(r.target_or_bound), repr(r.gap), repr(r.stderr)]
            for r in self.rows
        ]

    def to_json_obj(self) -> dict:
        semantics = (
            "policy-class maximum: a lower bound on the worst case"
            if self.kind == "lln"
            else "Monte-Carlo mean vs theoretical upper bound"
        )
        return {
            "kind": self.kind,
            "estimate_semantics": semantics,
            "seed": self.seed,
            "generator": self.generator,
            "noise": self.noise,
            "policies": list(self.policies),
            "rows": [
                {
                    "n": r.n,
                    "policy_id": r.policy_id,
                    "estimate": r.estimate,
                    "target_or_bound": r.target_or_bound,
                    "gap": r.gap,
                    "stderr": r.stderr,
                }
                for r in self.rows
            ],
            "summary": [
                {
                    "n": r.n,
                    "policy_id": r.policy_id,
                    "estimate": r.estimate,
                    "target_or_bound": r.target_or_bound,
                    "gap": r.gap,
                    "stderr": r.stderr,
                }
                for r in self.max_rows()
            ],
            "violations": len(self.violations()),
        }


def _mean_and_stderr(vals: np.ndarray) -> tuple[float, float]:
    m = float(np.mean(vals))
    if vals.size < 2:
        return m, 0.0
    return m, float(np.std(vals, ddof=1) / math.sqrt(vals.size))


def _prefix_stats(
    d: MaximalDist,
    policy: MeanPolicy,
    noise: NoiseSpec,
    cfg: SimConfig,
    schedule: Sequence[int],
    transform: Callable[[np.ndarray], np.ndarray],
) -> list[tuple[float, float]]:
    """Monte-Carlo mean and stderr of transform(S_n / n) at each scheduled n.

    Paths are streamed one replication at a time so that reps * n_max
    never has to be materialised.
    """
    sched = np.asarray(schedule, dtype=int)
    n_max = int(sched.max())
    acc = np.empty((cfg.reps, len(sched)))
    for r in range(cfg.reps):
        path = _simulate_one(d, policy, noise, n_max, _rep_rng(cfg.seed, r))
        means = np.cumsum(path)[sched - 1] / sched
        acc[r, :] = transform(means)
    return [_mean_and_stderr(acc[:, k]) for k in range(len(sched))]


def empirical_lln(
    d: MaximalDist,
    f: BoundedLipschitzFn,
    policies: Sequence[MeanPolicy],
    noise: NoiseSpec,
    cfg: SimConfig,
    grid: GridSpec,
    n_schedule: Sequence[int] | None = None,
) -> SimReport:
    """Empirical averages of f(S_n/n) against the maximal-distribution target.

    One row per (n, policy).  The per-n maximum over the policy class (see
    :meth:`SimReport.max_rows`) is a lower-bound estimate of the worst
    case; finitely many policies cannot exhaust the ambiguity.
    """
    if not policies:
        raise ValueError("need at least one policy")
    schedule = list(n_schedule) if n_schedule is not None else log_schedule(cfg.n)
    if max(schedule) > cfg.n:
        raise ValueError(f"schedule reaches n={max(schedule)} beyond cfg.n={cfg.n}")
    target = eval_maximal(d, f, grid).value

    def transform(means: np.ndarray) -> np.ndarray:
        return np.asarray([float(f(m)) for m in means])

    rows = []
    for pol in policies:
        stats = _prefix_stats(d, pol, noise, cfg, schedule, transform)
        for n, (est, se) in zip(schedule, stats):
            rows.append(SimRow(n, pol.policy_id, est, target, est - target, se))
    return SimReport(
        kind="lln",
        rows=tuple(rows),
        seed=cfg.seed,
        noise=noise.label,
        policies=tuple(p.policy_id for p in policies),
    )


def second_moment_upper(d: MaximalDist, noise: NoiseSpec) -> float:
    """Worst-case second moment of a single observation X = mu + eps."""
    return max(d.mu_lo**2, d.mu_hi**2) + noise.second_moment


def rate_check(
    d: MaximalDist,
    policies: Sequence[MeanPolicy],
    noise: NoiseSpec,
    cfg: SimConfig,
    n_schedule: Sequence[int],
) -> SimReport:
    """Convergence-rate check for the squared interval distance of S_n/n.

    For every scheduled n the Monte-Carlo mean of dist(S_n/n, [lo, hi])^2
    is compared against second_moment_upper / n.  Rows whose estimate
    exceeds the bound by more than three standard errors are flagged as
    violations (:meth:`SimReport.violations`).
    """
    if not policies:
        raise ValueError("need at least one policy")
    schedule = list(n_schedule)
    if not schedule:
        raise ValueError("n_schedule must be nonempty")
    if max(schedule) > cfg.n:
        raise ValueError(f"schedule reaches n={max(schedule)} beyond cfg.n={cfg.n}")
    m2 = second_moment_upper(d, noise)

    def transform(means: np.ndarray) -> np.ndarray:
        return np.asarray([interval_distance(d, m) ** 2 for m in means])

    rows = []
    for pol in policies:
        stats = _prefix_stats(d, pol, noise, cfg, schedule, transform)
        for n, (est, se) in zip(schedule, stats):
            bound = m2 / n
            rows.append(SimRow(n, pol.policy_id, est, bound, est - bound, se))
    return SimReport(
        kind="rate",
        rows=tuple(rows),
        seed=cfg.seed,
        noise=noise.label,
        policies=tuple(p.policy_id for p in policies),
    )
