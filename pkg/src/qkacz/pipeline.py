"""Five-step block-encoded iteration reproducing the relaxed row projection.

Each iteration composes block-encoding combinators so that the encoded
iterate matrix B_k keeps the current solution estimate in its first column:

    step 1  product of the row bra with the iterate encoding, giving the
            inner product a_j @ x on the principal entry;
    step 2  a single-qubit x-rotation depositing b_j there;
    step 3  their combination times lam / ||a_j||, tensored onto the row
            preparation unitary, yielding the update column;
    step 4  a linear combination with the iterate encoding, giving half the
            new iterate;
    step 5  amplification by 2, removing the half.

Two backends run the same step functions: ``full-unitary`` carries every
composite unitary explicitly (small systems only), ``encoded-operator``
carries just the encoded matrix and subnormalization.  Both re-dilate the
iterate at iteration boundaries, resetting the ancilla register.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import blockenc
from .blockenc import (AmplificationWindowError, BlockEncoding, StatePrepCost,
                       StatePrepUnitary, amplification_query_count, dilate,
                       state_prep)
from .kaczmarz import (IterateTrace, LinearSystem, SelectionStrategy,
                       kaczmarz_step, select_row)
from .prng import uniform_array
from .resources import ResourceLedger, StepRecord, ledger_advance

BACKENDS = ("full-unitary", "encoded-operator")

FULL_UNITARY_MAX_COLS = 4
FULL_UNITARY_MAX_T = 4


class DimensionGuardError(ValueError):
    """Full-unitary backend asked to run past its dimension guard."""


@dataclass(frozen=True)
class QuantumIterationState:
    """Final pipeline state: iterate encoding, its claim, and the ledger."""

    encoding: BlockEncoding
    k: int
    first_column: np.ndarray
    alpha_history: list
    ledger: ResourceLedger
    column_history: np.ndarray  # (T+1, m): principal column after each step


@dataclass(frozen=True)
class MeasurementOutcome:
    """Post-selection statistics of the final encoded state."""

    success_probability: float
    normalized_state: np.ndarray
    shots: int | None = None
    empirical_success: float | None = None


# ---------------------------------------------------------------------------
# Backend operation sets.  Both expose the same combinator surface; the
# unitary backend delegates to blockenc, the encoded backend mirrors the
# arithmetic on (matrix, alpha, ancilla-count) records.
# ---------------------------------------------------------------------------

class UnitaryOps:
    name = "full-unitary"

    def unitary_encoding(self, U, alpha=1.0):
        U = np.asarray(U, dtype=complex)
        return BlockEncoding(U, 0, U.shape[0], float(alpha))

    def dilate(self, M):
        return dilate(M)

    def product(self, L, R):
        return blockenc.be_product(L, R)

    def tensor(self, L, R):
        return blockenc.be_tensor(L, R)

    def lcu(self, L, R, signs):
        return blockenc.be_linear_combination(L, R, signs)

    def scale_down(self, E, p):
        return blockenc.be_scale_down(E, p)

    def amplify(self, E, gamma, delta):
        return blockenc.be_amplify(E, gamma, delta)

    def promote(self, E, qubits):
        return blockenc.promote_system_to_ancilla(E, qubits)

    def encoded(self, E):
        return blockenc.encoded_of(E)

    def alpha(self, E):
        return E.subnormalization

    def ancillas(self, E):
        return E.ancilla_qubits


@dataclass(frozen=True)
class _EncodedOperator:
    """Encoded matrix plus the bookkeeping a full unitary would carry."""

    matrix: np.ndarray
    alpha: float
    ancilla_qubits: int


class EncodedOps:
    name = "encoded-operator"

    def unitary_encoding(self, U, alpha=1.0):
        U = np.asarray(U, dtype=complex)
        return _EncodedOperator(float(alpha) * U, float(alpha), 0)

    def dilate(self, M):
        M = np.asarray(M, dtype=complex)
        top = float(np.linalg.norm(M, 2))
        if top > 1.0 + 1e-12:
            raise ValueError(f"operator norm {top:.6g} exceeds 1; "
                             "subnormalize first")
        return _EncodedOperator(M, 1.0, 1)

    def product(self, L, R):
        return _EncodedOperator(L.matrix @ R.matrix, L.alpha * R.alpha,
                                L.ancilla_qubits + R.ancilla_qubits)

    def tensor(self, L, R):
        return _EncodedOperator(np.kron(L.matrix, R.matrix),
                                L.alpha * R.alpha,
                                L.ancilla_qubits + R.ancilla_qubits)

    def lcu(self, L, R, signs):
        # mirror blockenc: unequal subnormalizations cost one balancing ancilla
        extra = 0
        alpha = L.alpha
        if abs(L.alpha - R.alpha) > 1e-12 * max(L.alpha, R.alpha):
            extra = 1
            alpha = max(L.alpha, R.alpha)
        s1, s2 = signs
        M = 0.5 * (s1 * L.matrix + s2 * R.matrix)
        return _EncodedOperator(
            M, alpha, L.ancilla_qubits + R.ancilla_qubits + 1 + extra)

    def scale_down(self, E, p):
        if p < 1.0:
            raise ValueError(f"scale factor must be >= 1, got {p}")
        return _EncodedOperator(E.matrix / p, E.alpha, E.ancilla_qubits + 1)

    def amplify(self, E, gamma, delta):
        if gamma <= 1.0:
            raise ValueError(f"amplification factor must exceed 1, got {gamma}")
        svals = np.linalg.svd(gamma * E.matrix / E.alpha, compute_uv=False)
        top = float(svals[0]) if svals.size else 0.0
        if top > 1.0 - delta + 1e-12:
            raise AmplificationWindowError(
                f"amplification window exceeded: singular value "
                f"{top / gamma:.6g} above (1 - delta)/gamma = "
                f"{(1.0 - delta) / gamma:.6g}",
                offending_sv=top / gamma)
        return _EncodedOperator(gamma * E.matrix, E.alpha,
                                E.ancilla_qubits + 1)

    def promote(self, E, qubits):
        block = 2 ** qubits
        d = E.matrix.shape[0]
        if d % block != 0:
            raise ValueError(f"system dimension {d} is not divisible by "
                             f"2**{qubits}")
        sub = d // block
        return _EncodedOperator(E.matrix[:sub, :sub],
                                E.alpha, E.ancilla_qubits + qubits)

    def encoded(self, E):
        return E.matrix

    def alpha(self, E):
        return E.alpha

    def ancillas(self, E):
        return E.ancilla_qubits


def _note(rec: StepRecord, result, ops, *operands, amp_queries=0):
    """Accumulate the ancilla and depth cost of one combinator call."""
    added = ops.ancillas(result) - sum(ops.ancillas(E) for E in operands)
    rec.ancillas += added
    rec.depth += amp_queries if amp_queries else 1
    rec.amp_queries += amp_queries
    return result


# ---------------------------------------------------------------------------
# The five steps, written once over either operation set.
# ---------------------------------------------------------------------------

def _step1(ops, rec, state_enc, prep_unitary, row_norm):
    rec.ux_invocations += 1
    rec.uj_invocations += 1
    bra = ops.unitary_encoding(np.asarray(prep_unitary).conj().T,
                               alpha=row_norm)
    return _note(rec, ops.product(bra, state_enc), ops, bra, state_enc)


def _step2_matrix(b_j):
    if abs(b_j) > 1.0:
        raise ValueError(f"b entry {b_j:.6g} not normalized: |b_j| must be <= 1")
    c = float(b_j)
    s = np.sqrt(max(0.0, 1.0 - c * c))
    return np.array([[c, -1j * s], [-1j * s, c]])


def _step3(ops, rec, inner_enc, rx_enc, prep_unitary, row_norm, lam, delta):
    d = np.asarray(prep_unitary).shape[0]
    rx_full = ops.tensor(rx_enc, ops.unitary_encoding(np.eye(d // 2)))
    rec.depth += 1  # the tensor embedding of the rotation
    residual_half = _note(rec, ops.lcu(rx_full, inner_enc, (1, -1)),
                          ops, rx_full, inner_enc)
    rec.uj_invocations += 1
    prep_enc = ops.unitary_encoding(prep_unitary)
    column = _note(rec, ops.tensor(residual_half, prep_enc),
                   ops, residual_half, prep_enc)
    column = ops.promote(column, (d - 1).bit_length())
    factor = lam / row_norm
    if factor > 1.0 + 1e-12:
        q = amplification_query_count(factor, delta)
        column = _note(rec, ops.amplify(column, factor, delta), ops, column,
                       amp_queries=q)
    elif factor < 1.0 - 1e-12:
        column = _note(rec, ops.scale_down(column, 1.0 / factor), ops, column)
    return column


def _step4(ops, rec, state_enc, residual_enc):
    rec.ux_invocations += 1
    return _note(rec, ops.lcu(state_enc, residual_enc, (1, 1)),
                 ops, state_enc, residual_enc)


def _step5(ops, rec, half_enc, delta):
    q = amplification_query_count(2.0, delta)
    return _note(rec, ops.amplify(half_enc, 2.0, delta), ops, half_enc,
                 amp_queries=q)


# ---------------------------------------------------------------------------
# Public single-step surface (full-unitary objects), used directly by tests
# and documentation examples.
# ---------------------------------------------------------------------------

def step1_inner_product(state_enc: BlockEncoding, prep: StatePrepUnitary,
                        row_norm: float) -> BlockEncoding:
    """Encoding whose principal entry is the row/iterate inner product."""
    if row_norm <= 0.0:
        raise ValueError("row norm must be positive")
    return _step1(UnitaryOps(), StepRecord(), state_enc,
                  prep.base.unitary, row_norm)


def step2_rx(b_j: float) -> BlockEncoding:
    """Single-qubit x-rotation with cos(theta/2) = b_j on the (0, 0) entry."""
    return BlockEncoding(_step2_matrix(b_j), 0, 2, 1.0, label="rx")


def step3_residual_column(step1_enc: BlockEncoding, step2_enc: BlockEncoding,
                          prep: StatePrepUnitary, row_norm: float,
                          lam: float, delta: float = 0.05) -> BlockEncoding:
    """Encoding of (lam/2) * (b_j - a_j @ x) / ||a_j||**2 times the row.

    The principal column carries the scaled update direction; the factor
    lam / ||a_j|| is applied by amplification (or rescaling) after the
    leading register has been promoted, where the window constraint binds
    on the scalar residual rather than on the full combination.
    """
    if not 0.0 < lam <= 2.0:
        raise ValueError(f"relaxation parameter must lie in (0, 2], got {lam}")
    return _step3(UnitaryOps(), StepRecord(), step1_enc, step2_enc,
                  prep.base.unitary, row_norm, lam, delta)


def step4_combine(state_enc: BlockEncoding,
                  residual_enc: BlockEncoding) -> BlockEncoding:
    """Combination encoding half the updated iterate in its first column."""
    return _step4(UnitaryOps(), StepRecord(), state_enc, residual_enc)


def step5_deflate(half_enc: BlockEncoding,
                  delta: float = 0.05) -> BlockEncoding:
    """Remove the factor half by amplification with gamma = 2."""
    return _step5(UnitaryOps(), StepRecord(), half_enc, delta)


# ---------------------------------------------------------------------------
# Full runs.
# ---------------------------------------------------------------------------

def _next_pow2(m: int) -> int:
    return max(2, 1 << (m - 1).bit_length())


def _pad(v: np.ndarray, d: int) -> np.ndarray:
    out = np.zeros(d)
    out[:v.size] = v
    return out


def run_quantum_kaczmarz(sys: LinearSystem, strategy: SelectionStrategy,
                         lam: float, T: int, x0=None,
                         backend: str = "encoded-operator",
                         delta: float = 0.05,
                         prep_regime: str = "structured",
                         c0_cost: int = 1):
    """Run T block-encoded iterations next to the classical recurrence.

    Returns ``(state, trace)`` where ``trace`` is the classical iterate
    trace driven by the identical row sequence.  The system must satisfy
    the normalization assumptions (operator norm of A and norm of b at
    most 1).  The full-unitary backend is guarded to m <= 4 columns and
    T <= 4 iterations; use the encoded-operator backend beyond that.
    """
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected {BACKENDS}")
    if not 0.0 < lam <= 2.0:
        raise ValueError(f"relaxation parameter must lie in (0, 2], got {lam}")
    if T < 0:
        raise ValueError("T must be nonnegative")
    sys.check_normalized()
    if backend == "full-unitary" and (sys.m > FULL_UNITARY_MAX_COLS
                                      or T > FULL_UNITARY_MAX_T):
        raise DimensionGuardError(
            f"full-unitary backend is limited to m <= {FULL_UNITARY_MAX_COLS} "
            f"and T <= {FULL_UNITARY_MAX_T} (got m={sys.m}, T={T}); "
            "use the encoded-operator backend")

    ops = UnitaryOps() if backend == "full-unitary" else EncodedOps()
    m = sys.m
    d = _next_pow2(m)
    x0 = np.zeros(m) if x0 is None else np.asarray(x0, dtype=float)
    if x0.size != m:
        raise ValueError(f"x0 has {x0.size} entries, expected {m}")
    if float(np.linalg.norm(x0)) > 1.0:
        raise ValueError("initial iterate must have norm at most 1")

    rows = [select_row(strategy, sys, k) for k in range(T)]
    preps = {}
    for j in set(rows):
        if sys.row_norms[j] == 0.0:
            raise ValueError(f"degenerate row {j}: zero norm")
        preps[j] = state_prep(_pad(sys.A[j] / sys.row_norms[j], d),
                              regime=prep_regime)

    c_prep = max((_prep_cost(sys, j, d, prep_regime).scalar()
                  for j in range(sys.n)), default=0)
    ledger = ResourceLedger(c0=c0_cost, c_prep=c_prep)

    B = np.outer(_pad(x0, d), np.eye(d)[0]).astype(complex)
    state_enc = ops.dilate(B)
    alpha_history = [ops.alpha(state_enc)]
    column_history = np.empty((T + 1, m))
    column_history[0] = x0

    x_classical = [x0]
    for k in range(T):
        j = rows[k]
        rec = StepRecord()
        prep_U = preps[j].base.unitary
        nrm = float(sys.row_norms[j])
        try:
            s1 = _step1(ops, rec, state_enc, prep_U, nrm)
            rx = ops.unitary_encoding(_step2_matrix(float(sys.b[j])))
            s3 = _step3(ops, rec, s1, rx, prep_U, nrm, 2.0 * lam, delta)
            s4 = _step4(ops, rec, state_enc, s3)
            s5 = _step5(ops, rec, s4, delta)
        except AmplificationWindowError as exc:
            raise AmplificationWindowError(
                f"iteration {k} (row {j}): {exc}",
                offending_sv=exc.offending_sv, iteration=k) from exc

        alpha = float(ops.alpha(s5))
        if abs(alpha - 1.0) > 1e-9:
            raise RuntimeError(f"subnormalization drifted to {alpha} at "
                               f"iteration {k}")
        B = np.asarray(ops.encoded(s5))
        col = B[:, 0]
        if float(np.max(np.abs(col.imag))) > 1e-10:
            raise RuntimeError(f"iterate column acquired imaginary parts at "
                               f"iteration {k}")
        if m < d and float(np.max(np.abs(col.real[m:]))) > 1e-10:
            raise RuntimeError(f"padding entries became nonzero at "
                               f"iteration {k}")
        column_history[k + 1] = col.real[:m]
        alpha_history.append(alpha)
        state_enc = ops.dilate(B)  # boundary re-dilation resets the register
        rec.ancillas += ops.ancillas(state_enc)
        rec.depth += 1
        ledger_advance(ledger, rec)
        x_classical.append(kaczmarz_step(x_classical[-1], sys, j, lam))

    final_encoding = state_enc if backend == "full-unitary" else dilate(B)
    state = QuantumIterationState(
        encoding=final_encoding,
        k=T,
        first_column=column_history[T].copy(),
        alpha_history=alpha_history,
        ledger=ledger,
        column_history=column_history,
    )
    trace = IterateTrace(np.array(x_classical), np.array(rows, dtype=np.int64),
                         None, lam)
    return state, trace


def _prep_cost(sys: LinearSystem, j: int, d: int,
               regime: str) -> StatePrepCost:
    # cost model only; no unitary is built for unused rows
    s_j = int(np.count_nonzero(sys.A[j]))
    if regime == "structured":
        gates = (d - 1).bit_length()
        return StatePrepCost(regime, gates, gates, 1, s_j)
    depth = (max(s_j, 1) - 1).bit_length()
    return StatePrepCost(regime, depth, depth, s_j, s_j)


def measure(state: QuantumIterationState, shots: int | None = None,
            seed: int = 0) -> MeasurementOutcome:
    """Post-selection outcome for the final iterate encoding.

    The analytic success probability is the squared norm of the encoded
    first column; with ``shots`` given, a Bernoulli sample of that rate is
    reported as ``empirical_success``.
    """
    x = state.first_column
    p = float(x @ x)
    if p == 0.0:
        raise ValueError("post-selection probability zero: final iterate "
                         "vanishes")
    if p > 1.0 + 1e-10:
        raise ValueError(f"success probability {p:.6g} exceeds 1")
    p = min(p, 1.0)
    normalized = x / np.sqrt(p)
    empirical = None
    if shots is not None:
        if shots < 1:
            raise ValueError("shots must be positive")
        empirical = float(np.count_nonzero(
            uniform_array(seed, shots) < p)) / shots
    return MeasurementOutcome(p, normalized, shots, empirical)
