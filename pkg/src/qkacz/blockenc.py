"""Block-encoding algebra at explicit matrix level.

A block-encoding is a unitary of dimension 2**a * d whose top-left d x d
block (every ancilla qubit projected onto |0>) equals a target operator
divided by a tracked subnormalization alpha.  Ancilla registers always
occupy the leading tensor factor.  The combinators below compose such
objects so that the encoded operators multiply, tensor, average, rescale,
and amplify, each preserving unitarity by construction.

Subnormalization is carried as data rather than burned into the matrix;
``encoded_of`` multiplies it back, which keeps long chains of rescalings
drift-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .linalg import as_vector


class AmplificationWindowError(ValueError):
    """Amplification requested outside its validity window."""

    def __init__(self, message, offending_sv=None, iteration=None):
        super().__init__(message)
        self.offending_sv = offending_sv
        self.iteration = iteration


@dataclass(frozen=True)
class BlockEncoding:
    """A unitary with ancilla count, system dimension, and subnormalization."""

    unitary: np.ndarray
    ancilla_qubits: int
    system_dim: int
    subnormalization: float
    label: str = ""

    @property
    def total_dim(self) -> int:
        return self.unitary.shape[0]


@dataclass(frozen=True)
class StatePrepCost:
    """Cost model of one state-preparation unitary.

    ``structured`` rows charge gates = c1 * ceil(log2 m) with a constant
    number of ancillas; ``sparse-general`` rows charge depth =
    c3 * ceil(log2 s_j) with c4 * s_j ancillas.  The field not fixed by the
    regime mirrors the regime's own scalar.
    """

    regime: str
    gates: int
    depth: int
    ancillas: int
    s_j: int

    def scalar(self) -> int:
        """The regime's headline cost: gates when structured, else depth."""
        return self.gates if self.regime == "structured" else self.depth


@dataclass(frozen=True)
class StatePrepUnitary:
    """Plain unitary (alpha = 1, no ancillas) whose first column is ``target``."""

    base: BlockEncoding
    target: np.ndarray
    cost_model: StatePrepCost


def encoded_of(E: BlockEncoding) -> np.ndarray:
    """The encoded operator alpha * (<0|^a (x) I) U (|0>^a (x) I)."""
    d = E.system_dim
    return E.subnormalization * E.unitary[:d, :d]


def principal_column(E: BlockEncoding) -> np.ndarray:
    """First column of the encoded operator (the all-zeros ancilla branch)."""
    d = E.system_dim
    return E.subnormalization * E.unitary[:d, 0]


def validate_block_encoding(E: BlockEncoding, tol: float = 1e-10):
    """Raise unless E is unitary and its encoded block is alpha-bounded."""
    dim = 2 ** E.ancilla_qubits * E.system_dim
    if E.unitary.shape != (dim, dim):
        raise ValueError(f"unitary shape {E.unitary.shape} does not match "
                         f"2**{E.ancilla_qubits} * {E.system_dim}")
    if E.subnormalization <= 0.0:
        raise ValueError("subnormalization must be positive")
    gram = E.unitary.conj().T @ E.unitary
    err = float(np.max(np.abs(gram - np.eye(dim))))
    if err > tol:
        raise ValueError(f"not unitary: max |U+U - I| = {err:.3g}")
    block = E.unitary[:E.system_dim, :E.system_dim]
    top = float(np.linalg.norm(block, 2))
    if top > 1.0 + tol:
        raise ValueError(f"encoded block norm {top:.6g} exceeds 1")


def with_subnormalization(E: BlockEncoding, alpha: float) -> BlockEncoding:
    """Reinterpret E with a different declared subnormalization."""
    if alpha <= 0.0:
        raise ValueError("subnormalization must be positive")
    return replace(E, subnormalization=float(alpha))


def _sqrt_psd(W, s, side="left"):
    # W diag(sqrt(1 - s^2)) W+ for the two defect blocks of a dilation
    c = np.sqrt(np.clip(1.0 - s ** 2, 0.0, None))
    return (W * c) @ W.conj().T


def dilate(M, label: str = "") -> BlockEncoding:
    """One-ancilla unitary completion of a contraction M.

    Returns the unitary [[M, sqrt(I - M M+)], [sqrt(I - M+ M), -M+]] as a
    block-encoding with alpha = 1, so the encoded operator is exactly M.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"dilation needs a square matrix, got {M.shape}")
    W, s, Vh = np.linalg.svd(M)
    if s.size and s[0] > 1.0 + 1e-12:
        raise ValueError(f"operator norm {s[0]:.6g} exceeds 1; subnormalize first")
    upper_right = _sqrt_psd(W, s)
    lower_left = _sqrt_psd(Vh.conj().T, s)
    U = np.block([[M, upper_right], [lower_left, -M.conj().T]])
    return BlockEncoding(U, 1, M.shape[0], 1.0, label)


def state_prep(v, regime: str = "structured", c1: int = 1, c2: int = 1,
               c3: int = 1, c4: int = 1) -> StatePrepUnitary:
    """Householder completion of a unit vector into a unitary first column.

    Parameters
    ----------
    v : array_like
        Unit-norm real vector.
    regime : {"structured", "sparse-general"}
        Which cost model to attach.
    c1, c2, c3, c4 : int
        Cost-model constants (gates, ancillas, depth, ancillas-per-nonzero).
    """
    v = as_vector(v)
    nrm = float(np.linalg.norm(v))
    if nrm == 0.0:
        raise ValueError("cannot prepare the zero vector")
    if abs(nrm - 1.0) > 1e-10:
        raise ValueError(f"state must be unit norm, got {nrm:.12g}")
    if regime not in ("structured", "sparse-general"):
        raise ValueError(f"unknown state-prep regime {regime!r}")

    m = v.size
    s = 1.0 if v[0] >= 0.0 else -1.0
    w = v.copy()
    w[0] += s
    H = np.eye(m) - (2.0 / float(w @ w)) * np.outer(w, w)
    U = H.copy()
    U[:, 0] = -s * H[:, 0]  # flip so the first column is +v

    s_j = int(np.count_nonzero(v))
    if regime == "structured":
        gates = c1 * (m - 1).bit_length()
        cost = StatePrepCost(regime, gates, gates, c2, s_j)
    else:
        depth = c3 * (s_j - 1).bit_length()
        cost = StatePrepCost(regime, depth, depth, c4 * s_j, s_j)
    base = BlockEncoding(U.astype(complex), 0, m, 1.0, label="state-prep")
    return StatePrepUnitary(base, v.copy(), cost)


def _lift(U, a: int, d: int, extra: int, leading: bool) -> np.ndarray:
    """Embed U (a ancillas, system d) among ``extra`` idle ancilla qubits.

    ``leading=True`` places the idle register before U's own ancillas;
    otherwise between U's ancillas and the system.  Either way all ancillas
    stay in the leading tensor factor.
    """
    if extra == 0:
        return U
    E = 2 ** extra
    if leading:
        return np.kron(np.eye(E), U)
    A = 2 ** a
    U4 = U.reshape(A, d, A, d)
    W = np.einsum("asbt,ef->aesbft", U4, np.eye(E))
    dim = A * E * d
    return W.reshape(dim, dim)


def be_product(L: BlockEncoding, R: BlockEncoding,
               label: str = "") -> BlockEncoding:
    """Block-encoding of the product encoded(L) @ encoded(R).

    Operand ancilla registers stay disjoint, so ancilla counts add and the
    subnormalizations multiply.
    """
    if L.system_dim != R.system_dim:
        raise ValueError(f"system dimension mismatch: {L.system_dim} vs "
                         f"{R.system_dim}")
    d = L.system_dim
    Lf = _lift(L.unitary, L.ancilla_qubits, d, R.ancilla_qubits, leading=False)
    Rf = _lift(R.unitary, R.ancilla_qubits, d, L.ancilla_qubits, leading=True)
    U = Lf @ Rf
    return BlockEncoding(U, L.ancilla_qubits + R.ancilla_qubits, d,
                         L.subnormalization * R.subnormalization, label)


def be_tensor(L: BlockEncoding, R: BlockEncoding,
              label: str = "") -> BlockEncoding:
    """Block-encoding of the Kronecker product encoded(L) (x) encoded(R).

    The raw Kronecker product interleaves registers as (anc_L, sys_L,
    anc_R, sys_R); a swap of the middle legs regroups all ancillas in front.
    """
    aL, dL = L.ancilla_qubits, L.system_dim
    aR, dR = R.ancilla_qubits, R.system_dim
    K = np.kron(L.unitary, R.unitary)
    AL, AR = 2 ** aL, 2 ** aR
    T8 = K.reshape(AL, dL, AR, dR, AL, dL, AR, dR)
    T8 = T8.transpose(0, 2, 1, 3, 4, 6, 5, 7)
    dim = AL * AR * dL * dR
    U = np.ascontiguousarray(T8).reshape(dim, dim)
    return BlockEncoding(U, aL + aR, dL * dR,
                         L.subnormalization * R.subnormalization, label)


def balance_subnormalizations(L: BlockEncoding, R: BlockEncoding):
    """Equalize two subnormalizations without changing encoded operators.

    The smaller-alpha operand's block is divided by the ratio (one extra
    rotated ancilla) and its alpha redeclared to the larger value, leaving
    encoded_of invariant.  Returns (L, R, balanced_flag).
    """
    aL, aR = L.subnormalization, R.subnormalization
    if abs(aL - aR) <= 1e-12 * max(aL, aR):
        return L, R, False
    if aL < aR:
        L = with_subnormalization(be_scale_down(L, aR / aL), aR)
    else:
        R = with_subnormalization(be_scale_down(R, aL / aR), aL)
    return L, R, True


def be_linear_combination(L: BlockEncoding, R: BlockEncoding,
                          signs=(1, 1), label: str = "") -> BlockEncoding:
    """Two-term combination encoding (s1 * encoded(L) + s2 * encoded(R)) / 2.

    Implemented as a Hadamard-conjugated select over the two operands (one
    fresh select qubit).  Operands with unequal subnormalization are
    balanced first; see ``balance_subnormalizations``.
    """
    if L.system_dim != R.system_dim:
        raise ValueError(f"system dimension mismatch: {L.system_dim} vs "
                         f"{R.system_dim}")
    s1, s2 = signs
    if s1 not in (-1, 1) or s2 not in (-1, 1):
        raise ValueError(f"signs must be +1 or -1, got {signs}")
    L, R, _ = balance_subnormalizations(L, R)
    d = L.system_dim
    Lf = s1 * _lift(L.unitary, L.ancilla_qubits, d, R.ancilla_qubits,
                    leading=False)
    Rf = s2 * _lift(R.unitary, R.ancilla_qubits, d, L.ancilla_qubits,
                    leading=True)
    U = 0.5 * np.block([[Lf + Rf, Lf - Rf], [Lf - Rf, Lf + Rf]])
    return BlockEncoding(U, L.ancilla_qubits + R.ancilla_qubits + 1, d,
                         L.subnormalization, label)


def be_scale_down(E: BlockEncoding, p: float, label: str = "") -> BlockEncoding:
    """Block-encoding of encoded(E) / p for p >= 1.

    One extra ancilla rotated by arccos(1/p); subnormalization unchanged.
    """
    if p < 1.0:
        raise ValueError(f"scale factor must be >= 1, got {p}")
    c = 1.0 / p
    s = math.sqrt(max(0.0, 1.0 - c * c))
    V = np.array([[c, s], [s, -c]])
    U = np.kron(V, E.unitary)
    return BlockEncoding(U, E.ancilla_qubits + 1, E.system_dim,
                         E.subnormalization, label)


def amplification_query_count(gamma: float, delta: float,
                              eps_amp: float = 1e-3) -> int:
    """Queries to E and its adjoint charged by one amplification call."""
    return math.ceil(gamma / delta * math.log(gamma / eps_amp))


def be_amplify(E: BlockEncoding, gamma: float, delta: float,
               label: str = "") -> BlockEncoding:
    """Multiply the encoded operator by gamma > 1, exactly.

    Valid only while every singular value of gamma * encoded / alpha stays
    at or below 1 - delta.  The actual singular-value transformation is
    replaced by a fresh dilation of the amplified block (the encoded
    operator is what the pipeline's correctness claims concern); the query
    count of the modulated sequence is available separately through
    ``amplification_query_count``.
    """
    if gamma <= 1.0:
        raise ValueError(f"amplification factor must exceed 1, got {gamma}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    d = E.system_dim
    block = E.unitary[:d, :d]
    svals = np.linalg.svd(gamma * block, compute_uv=False)
    top = float(svals[0]) if svals.size else 0.0
    if top > 1.0 - delta + 1e-12:
        raise AmplificationWindowError(
            f"amplification window exceeded: singular value {top / gamma:.6g} "
            f"above (1 - delta)/gamma = {(1.0 - delta) / gamma:.6g}",
            offending_sv=top / gamma)
    core = dilate(gamma * block)
    U = _lift(core.unitary, 1, d, E.ancilla_qubits, leading=True)
    return BlockEncoding(U, E.ancilla_qubits + 1, d, E.subnormalization, label)


def promote_system_to_ancilla(E: BlockEncoding, qubits: int) -> BlockEncoding:
    """Reinterpret the leading ``qubits`` system qubits as ancillas.

    The unitary is untouched; only the register bookkeeping changes, so the
    encoded operator becomes the top-left subblock of the old one.  Used
    after a tensor step whose leading factor exists only to deposit a scalar
    on the principal branch.
    """
    if qubits < 0:
        raise ValueError("qubit count must be nonnegative")
    block = 2 ** qubits
    if E.system_dim % block != 0:
        raise ValueError(f"system dimension {E.system_dim} is not divisible "
                         f"by 2**{qubits}")
    return replace(E, ancilla_qubits=E.ancilla_qubits + qubits,
                   system_dim=E.system_dim // block)
