"""Single-site von Neumann measurement, staged patterns, and branch walks.

A measurement at one site is specified by a d x d unitary u: outcome s means
the register collapsed onto basis vector u|s> (the eigenvector of the rotated
clock observable u Z u^dag with eigenvalue w^s).  Patterns group sites into
ordered stages; a stage's bases may depend on outcomes of strictly earlier
stages, which is how the adaptive gate protocols are expressed.

Two drivers share the same walk: a seeded sampler that follows one Born
trajectory, and an exhaustive enumerator that forces every outcome string
(zero-probability branches included, flagged by their probability).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .algebra import assert_unitary
from .cluster import ClusterGraph
from .states import NORM_TOL, ZERO_BRANCH_TOL, StateVector, project_site

DEFAULT_BRANCH_CAP = 10**6


class BranchCapExceeded(RuntimeError):
    """Enumeration would visit more outcome strings than the configured cap."""


@dataclass(frozen=True)
class MeasureResult:
    outcome: int
    post: StateVector
    probability: float

    @property
    def is_zero_branch(self) -> bool:
        return self.probability < ZERO_BRANCH_TOL


def measure_site(
    state: StateVector,
    site: int,
    u: np.ndarray,
    rng: np.random.Generator | None = None,
    force: int | None = None,
) -> MeasureResult:
    """Measure the rotated clock observable u Z u^dag at one site.

    With a generator, the outcome is drawn from the Born distribution; with
    force=s the branch s is selected for replay (a forced branch of
    probability below 1e-14 comes back flagged with an unnormalized post
    state).  The measured register is kept, collapsed onto u|s>.
    """
    d = state.d
    u = np.asarray(u, dtype=complex)
    if u.shape != (d, d):
        raise ValueError(f"basis unitary must be {d}x{d}, got {u.shape}")
    assert_unitary(u, 1e-9, "measurement basis")
    axis = site - 1
    overlaps = np.tensordot(u.conj().T, state.tensor(), axes=([1], [axis]))
    probs = np.linalg.norm(overlaps.reshape(d, -1), axis=1) ** 2
    if force is None:
        if rng is None:
            raise ValueError("need a random generator unless an outcome is forced")
        total = probs.sum()
        s = int(rng.choice(d, p=probs / total))
    else:
        if not 0 <= force < d:
            raise ValueError(f"forced outcome {force} out of range 0..{d - 1}")
        s = int(force)
    post = np.moveaxis(np.multiply.outer(u[:, s], overlaps[s]), 0, axis).reshape(-1)
    p = float(probs[s])
    if p >= ZERO_BRANCH_TOL:
        post = post / np.sqrt(p)
        return MeasureResult(s, StateVector(d, state.n_sites, post), p)
    return MeasureResult(s, StateVector(d, state.n_sites, post, normalized=False), p)


@dataclass(frozen=True)
class Stage:
    """One round of simultaneous measurements.

    resolve maps the outcomes of strictly earlier stages to the basis
    unitary of each site in this stage.
    """

    sites: tuple[int, ...]
    resolve: Callable[[Mapping[int, int]], Mapping[int, np.ndarray]]

    @staticmethod
    def static(bases: Mapping[int, np.ndarray]) -> "Stage":
        fixed = {site: np.asarray(u, dtype=complex) for site, u in bases.items()}
        return Stage(tuple(sorted(fixed)), lambda outcomes: fixed)


@dataclass(frozen=True)
class MeasurementPattern:
    """Ordered stages of rotated-basis measurements on a cluster graph."""

    graph: ClusterGraph
    stages: tuple[Stage, ...]

    def __post_init__(self):
        seen: set[int] = set()
        for stage in self.stages:
            for s in stage.sites:
                if not 1 <= s <= self.graph.n_sites:
                    raise ValueError(f"stage site {s} outside 1..{self.graph.n_sites}")
                if s in seen:
                    raise ValueError(f"site {s} measured in more than one stage")
                seen.add(s)

    @property
    def measured_sites(self) -> tuple[int, ...]:
        return tuple(s for stage in self.stages for s in sorted(stage.sites))


@dataclass
class OutcomeRecord:
    """Measured digits, branch probability, post state, and collapse vectors."""

    outcomes: dict[int, int]
    probability: float
    state: StateVector
    directions: dict[int, np.ndarray]

    @property
    def is_zero_branch(self) -> bool:
        return self.probability < ZERO_BRANCH_TOL


def _resolve_stage(stage: Stage, prior: Mapping[int, int]) -> dict[int, np.ndarray]:
    try:
        bases = stage.resolve(dict(prior))
    except KeyError as exc:
        raise ValueError(f"adaptive stage read an unmeasured site's outcome: {exc}") from exc
    if set(bases) != set(stage.sites):
        raise ValueError(f"stage resolver returned bases for {sorted(bases)}, expected {sorted(stage.sites)}")
    return {site: np.asarray(u, dtype=complex) for site, u in bases.items()}


def run_pattern_sampled(state: StateVector, pattern: MeasurementPattern, seed: int) -> OutcomeRecord:
    """Follow one Born trajectory through the pattern; deterministic per seed."""
    rng = np.random.default_rng(seed)
    outcomes: dict[int, int] = {}
    directions: dict[int, np.ndarray] = {}
    prob = 1.0
    current = state
    for stage in pattern.stages:
        bases = _resolve_stage(stage, outcomes)
        for site in sorted(stage.sites):
            res = measure_site(current, site, bases[site], rng=rng)
            outcomes[site] = res.outcome
            directions[site] = bases[site][:, res.outcome]
            prob *= res.probability
            current = res.post
    return OutcomeRecord(outcomes, prob, current, directions)


def enumerate_branches(
    state: StateVector,
    pattern: MeasurementPattern,
    branch_cap: int = DEFAULT_BRANCH_CAP,
) -> list[OutcomeRecord]:
    """Visit every outcome string of the pattern, in lexicographic order.

    Adaptive bases are resolved per branch.  Zero-probability branches are
    walked and reported (their post states stay unnormalized), so the
    returned probabilities always sum to 1 within float error.  Raises
    BranchCapExceeded when d^(measured sites) exceeds branch_cap.
    """
    d = state.d
    total_sites = len(pattern.measured_sites)
    n_branches = d**total_sites
    if n_branches > branch_cap:
        raise BranchCapExceeded(
            f"{n_branches} branches exceed the cap of {branch_cap}"
        )
    records: list[OutcomeRecord] = []

    def walk(stage_idx: int, site_idx: int, current: StateVector, outcomes, directions, prob,
             stage_sites: list[int], bases: dict[int, np.ndarray]):
        if site_idx == len(stage_sites):
            walk_stage(stage_idx + 1, current, outcomes, directions, prob)
            return
        site = stage_sites[site_idx]
        for s in range(d):
            res = measure_site(current, site, bases[site], force=s)
            outcomes[site] = s
            directions[site] = bases[site][:, s]
            walk(stage_idx, site_idx + 1, res.post, outcomes, directions,
                 prob * res.probability, stage_sites, bases)
        del outcomes[site], directions[site]

    def walk_stage(stage_idx: int, current: StateVector, outcomes, directions, prob):
        if stage_idx == len(pattern.stages):
            records.append(OutcomeRecord(dict(outcomes), prob, current, dict(directions)))
            return
        stage = pattern.stages[stage_idx]
        bases = _resolve_stage(stage, outcomes)
        walk(stage_idx, 0, current, outcomes, directions, prob, sorted(stage.sites), bases)

    walk_stage(0, state, {}, {}, 1.0)
    return records


def replay_branch(state: StateVector, pattern: MeasurementPattern, outcomes: Mapping[int, int]) -> OutcomeRecord:
    """Re-run a pattern forcing a recorded outcome string."""
    record_outcomes: dict[int, int] = {}
    directions: dict[int, np.ndarray] = {}
    prob = 1.0
    current = state
    for stage in pattern.stages:
        bases = _resolve_stage(stage, record_outcomes)
        for site in sorted(stage.sites):
            res = measure_site(current, site, bases[site], force=outcomes[site])
            record_outcomes[site] = res.outcome
            directions[site] = bases[site][:, res.outcome]
            prob *= res.probability
            current = res.post
    return OutcomeRecord(record_outcomes, prob, current, directions)
