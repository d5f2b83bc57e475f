"""Dense N-qudit state vectors and the tensor operations built on them.

A state over N qudits of dimension d is a length-d^N complex vector.  Site 1
is the most significant digit of the basis index, so the amplitude tensor is
just the vector reshaped to (d, ..., d) with axis a-1 belonging to site a.
Single-site and few-site operators are applied by contracting the relevant
axes; no d^N x d^N matrix is ever formed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .algebra import check_dim, omega_pow

NORM_TOL = 1e-12
ZERO_BRANCH_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class StateVector:
    """Immutable amplitude vector over (C^d)^(x n_sites).

    normalized=False marks intentionally unnormalized intermediates (branch
    projections); every other state must have unit 2-norm within 1e-12.
    """

    d: int
    n_sites: int
    amplitudes: np.ndarray
    normalized: bool = field(default=True)

    def __post_init__(self):
        check_dim(self.d)
        if self.n_sites < 1:
            raise ValueError("n_sites must be >= 1")
        amps = np.asarray(self.amplitudes, dtype=complex)
        expected = self.d**self.n_sites
        if amps.shape != (expected,):
            raise ValueError(f"amplitudes must have shape ({expected},), got {amps.shape}")
        if self.normalized:
            nrm = np.linalg.norm(amps)
            if abs(nrm - 1.0) > NORM_TOL:
                raise ValueError(f"state norm {nrm!r} deviates from 1 by more than {NORM_TOL}")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.d**self.n_sites

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per site (read-only view)."""
        return self.amplitudes.reshape((self.d,) * self.n_sites)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def renormalized(self) -> "StateVector":
        nrm = self.norm()
        if nrm < ZERO_BRANCH_TOL:
            raise ValueError("cannot renormalize a (near-)zero state")
        return StateVector(self.d, self.n_sites, self.amplitudes / nrm)

    def _site_axis(self, site: int) -> int:
        if not 1 <= site <= self.n_sites:
            raise ValueError(f"site must be in 1..{self.n_sites}, got {site}")
        return site - 1


def basis_ket(d: int, n_sites: int, digits: Sequence[int]) -> StateVector:
    """Computational basis state |t_1 ... t_n> (site 1 most significant)."""
    check_dim(d)
    if len(digits) != n_sites:
        raise ValueError(f"need {n_sites} digits, got {len(digits)}")
    index = 0
    for t in digits:
        if not 0 <= t < d:
            raise ValueError(f"digit {t} out of range 0..{d - 1}")
        index = index * d + int(t)
    amps = np.zeros(d**n_sites, dtype=complex)
    amps[index] = 1.0
    return StateVector(d, n_sites, amps)


def plus_state(d: int, n_sites: int) -> StateVector:
    """Uniform superposition: |x(0)> on every site."""
    check_dim(d)
    dim = d**n_sites
    return StateVector(d, n_sites, np.full(dim, dim**-0.5, dtype=complex))


def random_state(d: int, n_sites: int, rng: np.random.Generator) -> StateVector:
    """Haar-ish random normalized state from complex Gaussian amplitudes."""
    dim = d**n_sites
    amps = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return StateVector(d, n_sites, amps / np.linalg.norm(amps))


def apply_local(state: StateVector, site: int, op: np.ndarray) -> StateVector:
    """Apply a d x d operator to one site by contracting its axis."""
    axis = state._site_axis(site)
    if op.shape != (state.d, state.d):
        raise ValueError(f"operator must be {state.d}x{state.d}, got {op.shape}")
    moved = np.tensordot(op, state.tensor(), axes=([1], [axis]))
    out = np.moveaxis(moved, 0, axis).reshape(-1)
    return StateVector(state.d, state.n_sites, out, normalized=state.normalized)


def apply_sites(state: StateVector, sites: Sequence[int], op: np.ndarray) -> StateVector:
    """Apply a d^k x d^k operator to k distinct sites (listed order = tensor order)."""
    k = len(sites)
    axes = [state._site_axis(s) for s in sites]
    if len(set(axes)) != k:
        raise ValueError("sites must be distinct")
    dk = state.d**k
    if op.shape != (dk, dk):
        raise ValueError(f"operator must be {dk}x{dk} for {k} sites, got {op.shape}")
    op_t = op.reshape((state.d,) * (2 * k))
    moved = np.tensordot(op_t, state.tensor(), axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(moved, list(range(k)), axes).reshape(-1)
    return StateVector(state.d, state.n_sites, out, normalized=state.normalized)


def apply_phase_gate(state: StateVector, a: int, b: int) -> StateVector:
    """Two-site intertwiner |j>_a |k>_b -> w^(jk) |j>_a |k>_b.

    Diagonal, symmetric in (a, b), commutes with every other phase gate.
    """
    if a == b:
        raise ValueError("phase gate requires two distinct sites")
    ax_a, ax_b = state._site_axis(a), state._site_axis(b)
    d, n = state.d, state.n_sites
    phases = omega_pow(d, np.outer(np.arange(d), np.arange(d)))
    shape = [1] * n
    shape[ax_a] = d
    shape[ax_b] = d
    if ax_a < ax_b:
        block = phases
    else:
        block = phases.T
    out = state.tensor() * block.reshape(shape)
    return StateVector(d, n, out.reshape(-1), normalized=state.normalized)


def project_site(state: StateVector, site: int, direction: np.ndarray) -> tuple[StateVector, float]:
    """Project one site onto a normalized d-vector, keeping the register.

    Returns the unnormalized |dir><dir|_site |state> and its squared norm
    (the branch probability).  Zero-probability branches come back with
    probability ~0 and an all-zero state; the caller decides how to flag.
    """
    axis = state._site_axis(site)
    direction = np.asarray(direction, dtype=complex)
    if direction.shape != (state.d,):
        raise ValueError(f"direction must be a length-{state.d} vector")
    overlap = np.tensordot(direction.conj(), state.tensor(), axes=([0], [axis]))
    prob = float(np.vdot(overlap, overlap).real)
    post = np.moveaxis(np.multiply.outer(direction, overlap), 0, axis).reshape(-1)
    return StateVector(state.d, state.n_sites, post, normalized=False), prob


def reduced_density(state: StateVector, keep_sites: Sequence[int]) -> np.ndarray:
    """Partial trace onto keep_sites (listed order = tensor order)."""
    if len(keep_sites) == 0:
        raise ValueError("keep_sites must be nonempty")
    axes = [state._site_axis(s) for s in keep_sites]
    if len(set(axes)) != len(axes):
        raise ValueError("keep_sites must be distinct")
    rest = [ax for ax in range(state.n_sites) if ax not in axes]
    t = np.transpose(state.tensor(), axes + rest)
    mat = t.reshape(state.d ** len(axes), -1)
    return mat @ mat.conj().T


def extract_sites(
    state: StateVector,
    keep_sites: Sequence[int],
    collapsed: Mapping[int, np.ndarray],
) -> StateVector:
    """Factor measured registers out of a product-form state.

    Every site not in keep_sites must appear in collapsed with the vector its
    register holds; those axes are contracted away and the surviving axes are
    ordered as keep_sites.  The result is renormalized.
    """
    keep_axes = [state._site_axis(s) for s in keep_sites]
    others = [s for s in range(1, state.n_sites + 1) if s not in set(keep_sites)]
    missing = [s for s in others if s not in collapsed]
    if missing:
        raise ValueError(f"no collapse vector given for measured sites {missing}")
    t = state.tensor()
    axes = list(range(state.n_sites))
    for s in others:
        ax = axes.index(s - 1)
        t = np.tensordot(np.asarray(collapsed[s], dtype=complex).conj(), t, axes=([0], [ax]))
        axes.pop(ax)
    order = [axes.index(ax) for ax in keep_axes]
    out = np.transpose(t, order).reshape(-1)
    nrm = np.linalg.norm(out)
    if nrm < ZERO_BRANCH_TOL:
        raise ValueError("extracted state has zero norm (impossible branch)")
    return StateVector(state.d, len(keep_sites), out / nrm)


def state_overlap(s1: StateVector, s2: StateVector) -> complex:
    if (s1.d, s1.n_sites) != (s2.d, s2.n_sites):
        raise ValueError("states live on different spaces")
    return complex(np.vdot(s1.amplitudes, s2.amplitudes))


def equal_up_to_phase(s1: StateVector, s2: StateVector, tol: float = 1e-10) -> tuple[bool, float]:
    """Phase-insensitive comparison; returns (equal, |<s1|s2>|)."""
    fidelity = abs(state_overlap(s1, s2))
    return fidelity >= 1 - tol, float(fidelity)
