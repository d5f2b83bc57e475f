"""Constructors for the d-level Weyl (clock/shift) operator algebra.

The single-qudit generators are the clock matrix Z = diag(1, w, ..., w^(d-1))
and the cyclic shift X with X|k> = |k-1 mod d>, where w = exp(2*pi*i/d).
They satisfy

    X @ Z == w * (Z @ X),        X^d == Z^d == I,

and the d^2 monomials Z^j X^k form a trace-orthogonal basis of the operator
space.  On top of the generators this module provides: phase-aligned Weyl
operators with clock spectrum, diagonal integer-lift generators and their
fractional powers, intertwiner synthesis for Clifford-type conjugation
actions, the four elementary Clifford families, and a factorization of a
general coprime Weyl conjugation target into those families.

All matrices are dense complex128.  Tolerances are explicit arguments so
callers can tighten verification; defaults follow the package-wide 1e-10
(unitarity / eigen checks) and 1e-9 (composed products).
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

DEFAULT_TOL = 1e-10
COMPOSED_TOL = 1e-9

BASIC_KINDS = ("U1n", "Un1", "V", "W")


def check_dim(d: int) -> int:
    """Validate a qudit dimension (integer >= 2)."""
    if not isinstance(d, (int, np.integer)) or isinstance(d, bool):
        raise ValueError(f"dimension must be an integer, got {d!r}")
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    return int(d)


def check_lifts(d: int, lifts: Sequence[int]) -> np.ndarray:
    """Validate an integer lift vector of length d."""
    check_dim(d)
    arr = np.asarray(lifts)
    if arr.shape != (d,):
        raise ValueError(f"lift vector must have length {d}, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == np.round(arr)):
            raise ValueError("lift entries must be integers")
        arr = arr.astype(int)
    return arr.astype(int)


def zero_lifts(d: int) -> np.ndarray:
    """The all-zero lift vector."""
    return np.zeros(check_dim(d), dtype=int)


def root_of_unity(d: int) -> complex:
    """Primitive d-th root of unity exp(2*pi*i/d)."""
    check_dim(d)
    return complex(np.exp(2j * np.pi / d))


def omega_pow(d: int, exponent) -> np.ndarray | complex:
    """exp(2*pi*i*exponent/d) for real (scalar or array) exponents.

    Computed from the exponent directly rather than by complex powers, so
    fractional exponents are unambiguous.
    """
    return np.exp(2j * np.pi * np.asarray(exponent, dtype=float) / d)


def gen_z(d: int) -> np.ndarray:
    """Clock operator Z = diag(1, w, ..., w^(d-1))."""
    check_dim(d)
    return np.diag(omega_pow(d, np.arange(d))).astype(complex)


def gen_x(d: int) -> np.ndarray:
    """Shift operator with X|k> = |k-1 mod d>.

    Ones on the superdiagonal plus the bottom-left corner; X @ Z = w * Z @ X.
    """
    check_dim(d)
    x = np.zeros((d, d), dtype=complex)
    for k in range(d):
        x[(k - 1) % d, k] = 1.0
    return x


def fourier(d: int) -> np.ndarray:
    """Discrete Fourier matrix F with F|s> = |x(s)>, the shift eigenbasis."""
    check_dim(d)
    k = np.arange(d)
    return omega_pow(d, np.outer(k, k)) / np.sqrt(d)


def x_eigenvector(d: int, j: int) -> np.ndarray:
    """Shift eigenvector |x(j)> = d^(-1/2) * sum_k w^(jk) |k>."""
    check_dim(d)
    if not 0 <= j < d:
        raise ValueError(f"eigenvector index must be in 0..{d - 1}, got {j}")
    return omega_pow(d, j * np.arange(d)) / np.sqrt(d)


def mat_power(a: np.ndarray, e: int, d: int) -> np.ndarray:
    """a^e for an order-d unitary word, with the exponent reduced mod d."""
    return np.linalg.matrix_power(a, int(e) % d)


def weyl(d: int, j: int, k: int) -> np.ndarray:
    """Weyl monomial Z^j X^k."""
    check_dim(d)
    if not (0 <= j < d and 0 <= k < d):
        raise ValueError(f"weyl powers must be in 0..{d - 1}, got ({j}, {k})")
    return mat_power(gen_z(d), j, d) @ mat_power(gen_x(d), k, d)


def weyl_gram(d: int) -> np.ndarray:
    """Gram matrix of Hilbert-Schmidt inner products of all Weyl monomials.

    Entry [(j,k), (j',k')] = Tr[(Z^j X^k)^dag Z^j' X^k']; trace-orthogonality
    of the basis means this is d times the identity.
    """
    ops = [weyl(d, j, k) for j in range(d) for k in range(d)]
    g = np.empty((d * d, d * d), dtype=complex)
    for a, oa in enumerate(ops):
        for b, ob in enumerate(ops):
            g[a, b] = np.trace(oa.conj().T @ ob)
    return g


def weyl_phase_op(d: int, m: int, n: int) -> np.ndarray:
    """w^(-(d-1)mn/2) Z^m X^n with the raw (possibly negative) m, n phases.

    Internal building block: the prefactor exponent is kept as the exact
    half-integer -(d-1)*m*n/2, which matters for even d where it is not a
    power of w.
    """
    phase = omega_pow(d, -0.5 * (d - 1) * m * n)
    return phase * mat_power(gen_z(d), m, d) @ mat_power(gen_x(d), n, d)


def zbar(d: int, m: int, n: int) -> np.ndarray:
    """Phase-aligned Weyl operator with the same spectrum as the clock Z.

    Requires gcd(m, n) = 1 on the mod-d representatives; the prefactor
    exp(-i*pi*(d-1)*m*n/d) makes the operator order d with eigenvalues
    {w^k}.  (m, n) = (1, 0) returns Z itself.
    """
    check_dim(d)
    m, n = m % d, n % d
    if math.gcd(m, n) != 1:
        raise ValueError(f"(m, n) = ({m}, {n}) must be coprime")
    return weyl_phase_op(d, m, n)


def assert_unitary(a: np.ndarray, tol: float = DEFAULT_TOL, what: str = "operator") -> None:
    """Raise ValueError unless a @ a^dag is the identity within tol."""
    dim = a.shape[0]
    resid = np.max(np.abs(a @ a.conj().T - np.eye(dim)))
    if resid > tol:
        raise ValueError(f"{what} is not unitary (max residual {resid:.3e} > {tol:.1e})")


def assert_hermitian(a: np.ndarray, tol: float = DEFAULT_TOL, what: str = "operator") -> None:
    """Raise ValueError unless a equals its adjoint within tol."""
    resid = np.max(np.abs(a - a.conj().T))
    if resid > tol:
        raise ValueError(f"{what} is not Hermitian (max residual {resid:.3e} > {tol:.1e})")


def phase_eigenbasis(op: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal eigenbasis of an order-d unitary with spectrum {w^s}.

    Returns a unitary u whose column s is the eigenvector of eigenvalue w^s.
    The spectral projectors are recovered by the Fourier average
    P_s = (1/d) sum_t w^(-st) op^t, which makes the construction independent
    of any general eigensolver.  Column phases are fixed so that the first
    component above 1e-6 of the column max is real positive, which pins the
    basis (and everything downstream) deterministically.

    Raises ValueError if the spectrum is degenerate, or if some w^s is
    missing, or if op is not order d within tol.
    """
    d = op.shape[0]
    check_dim(d)
    powers = [np.eye(d, dtype=complex)]
    for _ in range(d - 1):
        powers.append(powers[-1] @ op)
    cols = []
    recon = np.zeros_like(op)
    for s in range(d):
        proj = sum(omega_pow(d, -s * t) * powers[t] for t in range(d)) / d
        mult = np.trace(proj).real
        if abs(mult - 1.0) > max(tol * d, 1e-7):
            raise ValueError(
                f"eigenvalue w^{s} has multiplicity {mult:.6f}; "
                "spectrum must be {w^s} with each value once"
            )
        j = int(np.argmax(np.linalg.norm(proj, axis=0)))
        v = proj[:, j]
        v = v / np.linalg.norm(v)
        anchor = np.flatnonzero(np.abs(v) > 1e-6 * np.max(np.abs(v)))[0]
        v = v * (np.abs(v[anchor]) / v[anchor])
        cols.append(v)
        recon = recon + omega_pow(d, s) * np.outer(v, v.conj())
    if np.max(np.abs(recon - op)) > max(tol * d, 1e-8):
        raise ValueError("operator is not order d with clock spectrum within tolerance")
    u = np.column_stack(cols)
    assert_unitary(u, max(tol * d, 1e-8), "eigenbasis")
    return u


def diag_generator(base: np.ndarray, lifts: Sequence[int], tol: float = DEFAULT_TOL) -> np.ndarray:
    """Hermitian generator sum_s |s(base)> (s + m_s d) <s(base)|.

    base must be an order-d unitary with nondegenerate clock spectrum; the
    integer lifts select which branch of the multivalued logarithm each
    eigenvalue takes.  All-zero lifts on the clock Z give the number operator
    diag(0, 1, ..., d-1).
    """
    d = base.shape[0]
    m = check_lifts(d, lifts)
    u = phase_eigenbasis(base, tol)
    values = np.arange(d) + m * d
    gen = (u * values) @ u.conj().T
    return (gen + gen.conj().T) / 2


def param_unitary(base: np.ndarray, lifts: Sequence[int], beta: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Fractional power w^(beta * N(base, lifts)) of an order-d unitary.

    At beta = 1 with zero lifts this reproduces base; powers with the same
    base and lifts compose additively in beta.
    """
    d = base.shape[0]
    m = check_lifts(d, lifts)
    u = phase_eigenbasis(base, tol)
    phases = omega_pow(d, beta * (np.arange(d) + m * d))
    return (u * phases) @ u.conj().T


@dataclass(frozen=True)
class CliffordSpec:
    """Pair of coprime Weyl exponent vectors defining a single-qudit Clifford.

    The images Z -> zbar(d, m1, n1), X -> zbar(d, m2, n2) intertwine with the
    generators iff m1*n2 - m2*n1 = 1 (mod d); both pairs must be coprime.
    """

    d: int
    m1: int
    n1: int
    m2: int
    n2: int

    def __post_init__(self):
        check_dim(self.d)
        d = self.d
        m1, n1, m2, n2 = self.m1 % d, self.n1 % d, self.m2 % d, self.n2 % d
        if math.gcd(m1, n1) != 1:
            raise ValueError(f"(m1, n1) = ({m1}, {n1}) must be coprime")
        if math.gcd(m2, n2) != 1:
            raise ValueError(f"(m2, n2) = ({m2}, {n2}) must be coprime")
        if (m1 * n2 - m2 * n1) % d != 1:
            raise ValueError("m1*n2 - m2*n1 must be 1 mod d")

    def z_image(self) -> np.ndarray:
        return zbar(self.d, self.m1, self.n1)

    def x_image(self) -> np.ndarray:
        return zbar(self.d, self.m2, self.n2)


def _kron_all(ops: Sequence[np.ndarray]) -> np.ndarray:
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def _check_action_algebra(d, n_sites, z_images, x_images, tol):
    q = root_of_unity(d)
    dim = d**n_sites
    eye = np.eye(dim)
    for name, ims in (("z", z_images), ("x", x_images)):
        for i, a in enumerate(ims):
            if a.shape != (dim, dim):
                raise ValueError(f"{name}_images[{i}] has shape {a.shape}, expected {dim}x{dim}")
            assert_unitary(a, tol * dim, f"{name}_images[{i}]")
            if np.max(np.abs(np.linalg.matrix_power(a, d) - eye)) > tol * dim:
                raise ValueError(f"{name}_images[{i}]^{d} is not the identity")
    for i in range(n_sites):
        for j in range(n_sites):
            lhs = x_images[i] @ z_images[j]
            rhs = (q if i == j else 1.0) * z_images[j] @ x_images[i]
            if np.max(np.abs(lhs - rhs)) > tol * dim:
                raise ValueError(f"images violate the commutation phase at sites ({i}, {j})")
            if i < j:
                for ims in (z_images, x_images):
                    if np.max(np.abs(ims[i] @ ims[j] - ims[j] @ ims[i])) > tol * dim:
                        raise ValueError(f"images at sites ({i}, {j}) fail to commute")


def _fix_global_phase(u: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    flat = u.ravel()
    anchor = np.flatnonzero(np.abs(flat) > max(tol, 1e-6 * np.max(np.abs(flat))))[0]
    return u * (np.abs(flat[anchor]) / flat[anchor])


def clifford_from_action(
    d: int,
    n_sites: int,
    z_images: Sequence[np.ndarray],
    x_images: Sequence[np.ndarray],
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """Unitary U with U Z_i U^dag = z_images[i] and U X_i U^dag = x_images[i].

    The images must satisfy the same algebra as the generators (checked
    numerically first).  U is then recovered by averaging seed matrices over
    the Weyl group, which projects onto the one-dimensional intertwiner
    space; the result is unique up to a global phase, fixed so the first
    nonzero entry of U (row-major scan) is real positive.
    """
    check_dim(d)
    if n_sites < 1:
        raise ValueError("n_sites must be >= 1")
    if len(z_images) != n_sites or len(x_images) != n_sites:
        raise ValueError("need one z image and one x image per site")
    z_images = [np.asarray(a, dtype=complex) for a in z_images]
    x_images = [np.asarray(a, dtype=complex) for a in x_images]
    _check_action_algebra(d, n_sites, z_images, x_images, tol)

    dim = d**n_sites
    z1, x1 = gen_z(d), gen_x(d)
    site_words = [[mat_power(z1, a, d) @ mat_power(x1, b, d) for b in range(d)] for a in range(d)]

    def image_word(i, a, b):
        return mat_power(z_images[i], a, d) @ mat_power(x_images[i], b, d)

    exps = list(itertools.product(range(d), repeat=2 * n_sites))
    plain_words = []
    image_words = []
    for v in exps:
        plain_words.append(_kron_all([site_words[v[2 * i]][v[2 * i + 1]] for i in range(n_sites)]))
        w = image_word(0, v[0], v[1])
        for i in range(1, n_sites):
            w = w @ image_word(i, v[2 * i], v[2 * i + 1])
        image_words.append(w)

    eye = np.eye(dim)
    for a in range(dim):
        for b in range(dim):
            seed = np.zeros((dim, dim), dtype=complex)
            seed[a, b] = 1.0
            acc = np.zeros((dim, dim), dtype=complex)
            for wbar, w in zip(image_words, plain_words):
                acc += wbar @ seed @ w.conj().T
            scale = np.sqrt(np.trace(acc @ acc.conj().T).real / dim)
            if scale < 1e-9 * dim:
                continue
            u = acc / scale
            if np.max(np.abs(u @ u.conj().T - eye)) > max(tol * dim, 1e-8):
                continue
            resid = 0.0
            for i in range(n_sites):
                zi = _kron_all([z1 if j == i else np.eye(d) for j in range(n_sites)])
                xi = _kron_all([x1 if j == i else np.eye(d) for j in range(n_sites)])
                resid = max(resid, np.max(np.abs(u @ zi @ u.conj().T - z_images[i])))
                resid = max(resid, np.max(np.abs(u @ xi @ u.conj().T - x_images[i])))
            if resid > max(tol * dim, 1e-8):
                raise ValueError(f"intertwiner residual {resid:.3e} exceeds tolerance")
            return _fix_global_phase(u)
    raise ValueError("no intertwiner found; images do not define a Clifford action")


def basic_clifford(d: int, kind: str, n: int = 1) -> np.ndarray:
    """One of the four elementary single-qudit Clifford unitaries.

    Conjugation actions (phi_k = w^(-(d-1)k/2)):

        U1n:  Z -> phi_n Z X^n        X -> X
        Un1:  Z -> phi_n Z^n X        X -> Z^dag
        V:    same as U1n with n = 1
        W:    Z -> Z                  X -> phi_1 Z X

    n may be any integer (negative values give the adjoint family members);
    the prefactor uses the raw n, which matters for even d.  The matrix is
    synthesized with clifford_from_action and is deterministic.
    """
    check_dim(d)
    if kind not in BASIC_KINDS:
        raise ValueError(f"kind must be one of {BASIC_KINDS}, got {kind!r}")
    if kind == "V":
        kind, n = "U1n", 1
    z, x = gen_z(d), gen_x(d)
    if kind == "U1n":
        z_img = weyl_phase_op(d, 1, n)
        x_img = x
    elif kind == "Un1":
        z_img = weyl_phase_op(d, n, 1)
        x_img = z.conj().T
    else:  # W
        z_img = z
        x_img = weyl_phase_op(d, 1, 1)
    return clifford_from_action(d, 1, [z_img], [x_img])


class FactorStep(NamedTuple):
    """One element of a factorization word.

    For kinds U1n / Un1 the value is the family parameter n; for kinds V / W
    it is the repetition count.
    """

    kind: str
    value: int


def compose_factor_word(d: int, word: Sequence[FactorStep]) -> np.ndarray:
    """Matrix product of a factorization word (leftmost step first)."""
    out = np.eye(d, dtype=complex)
    for step in word:
        if step.kind in ("U1n", "Un1"):
            out = out @ basic_clifford(d, step.kind, step.value)
        elif step.kind in ("V", "W"):
            out = out @ np.linalg.matrix_power(basic_clifford(d, step.kind), step.value)
        else:
            raise ValueError(f"unknown factor step kind {step.kind!r}")
    return out


def _compress_word(steps: list[tuple[str, int]]) -> list[FactorStep]:
    out: list[FactorStep] = []
    for kind, value in steps:
        if kind in ("V", "W") and out and out[-1].kind == kind:
            out[-1] = FactorStep(kind, out[-1].value + value)
        else:
            out.append(FactorStep(kind, value))
    return out


def factor_clifford(d: int, m: int, n: int, tol: float = COMPOSED_TOL) -> list[FactorStep]:
    """Factor the Clifford taking Z to zbar(d, m, n) into basic elements.

    Searches breadth-first over the exponent plane Z_d x Z_d: left-composing
    V sends (m', n') to (m', n' + m') and W sends it to (m' + n', n'),
    starting from the one-step families (1, k) and (k, 1).  The composed
    word is verified to conjugate Z onto zbar(d, m, n) up to a global phase
    before it is returned.
    """
    check_dim(d)
    m, n = m % d, n % d
    if math.gcd(m, n) != 1:
        raise ValueError(f"(m, n) = ({m}, {n}) must be coprime")

    words: dict[tuple[int, int], list[tuple[str, int]]] = {}
    queue: deque[tuple[int, int]] = deque()
    for k in range(d):
        for node, step in (((1, k), ("U1n", k)), ((k % d, 1), ("Un1", k))):
            if node not in words:
                words[node] = [step]
                queue.append(node)
    while queue and (m, n) not in words:
        a, b = queue.popleft()
        for node, move in (((a, (a + b) % d), ("V", 1)), (((a + b) % d, b), ("W", 1))):
            if node not in words:
                words[node] = [move] + words[(a, b)]
                queue.append(node)
    if (m, n) not in words:
        raise ValueError(f"no factorization reaches ({m}, {n}) over Z_{d}")

    word = _compress_word(words[(m, n)])
    product = compose_factor_word(d, word)
    conj = product @ gen_z(d) @ product.conj().T
    fidelity = abs(np.trace(conj.conj().T @ zbar(d, m, n))) / d
    if fidelity < 1 - tol:
        raise RuntimeError(
            f"factorization of ({m}, {n}) failed verification (fidelity {fidelity:.12f})"
        )
    return word
