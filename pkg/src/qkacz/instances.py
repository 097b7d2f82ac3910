"""Test-instance generation and the plain-text system file format.

Generated systems are deterministic in the seed.  With ``normalize`` set
(the default) the operator norm of A is capped at 1 and consistent
right-hand sides are built as b = A @ x* from a drawn solution x*, which
keeps every later block-encoded iterate safely inside the unit ball.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kaczmarz import LinearSystem

# Norm of the drawn solution x*. Iterates started at zero stay within twice
# this value, so 0.45 keeps them under the deflation window at delta = 0.05.
SOLUTION_NORM = 0.45

INSTANCE_KINDS = ("gaussian", "synthesized-spectrum", "file")


@dataclass(frozen=True)
class InstanceSpec:
    """Recipe for one linear system."""

    kind: str
    n: int | None = None
    m: int | None = None
    target_rank: int | None = None
    target_kappa: float | None = None
    row_sparsity: int | None = None
    normalize: bool = True
    consistent: bool = True
    path: str | None = None

    def __post_init__(self):
        if self.kind not in INSTANCE_KINDS:
            raise ValueError(f"unknown instance kind {self.kind!r}; "
                             f"expected one of {INSTANCE_KINDS}")
        if self.kind == "file":
            if not self.path:
                raise ValueError("file instances need a path")
        else:
            if not self.n or not self.m or self.n < 1 or self.m < 1:
                raise ValueError("generated instances need n >= 1 and m >= 1")


def generate_instance(spec: InstanceSpec, seed: int) -> LinearSystem:
    """Build the system described by ``spec``, deterministically from seed."""
    if spec.kind == "file":
        return read_system(spec.path)
    rng = np.random.default_rng(seed)
    if spec.kind == "gaussian":
        A = rng.standard_normal((spec.n, spec.m))
        if spec.row_sparsity is not None:
            A = _sparsify_rows(A, spec.row_sparsity, rng)
    else:
        A = _synthesized(spec, rng)
    if spec.normalize:
        top = float(np.linalg.norm(A, 2))
        if top > 1.0:
            A = A / top
    b = _right_hand_side(A, spec, rng)
    return LinearSystem(A, b)


def _sparsify_rows(A, s, rng):
    n, m = A.shape
    if not 1 <= s <= m:
        raise ValueError(f"row sparsity must lie in [1, {m}], got {s}")
    out = np.zeros_like(A)
    for i in range(n):
        cols = rng.choice(m, size=s, replace=False)
        out[i, cols] = A[i, cols]
    return out


def _synthesized(spec, rng):
    r = spec.target_rank or min(spec.n, spec.m)
    if not 1 <= r <= min(spec.n, spec.m):
        raise ValueError(f"target rank must lie in [1, {min(spec.n, spec.m)}]")
    kappa = spec.target_kappa or 1.0
    if kappa < 1.0:
        raise ValueError(f"target kappa must be >= 1, got {kappa}")
    sigma = np.geomspace(1.0, 1.0 / kappa, r) if r > 1 else np.array([1.0])
    U, _ = np.linalg.qr(rng.standard_normal((spec.n, r)))
    V, _ = np.linalg.qr(rng.standard_normal((spec.m, r)))
    return (U * sigma) @ V.T


def _right_hand_side(A, spec, rng):
    n, m = A.shape
    if spec.consistent:
        direction = rng.standard_normal(m)
        direction /= np.linalg.norm(direction)
        xstar = SOLUTION_NORM * direction
        return A @ xstar
    b = rng.standard_normal(n)
    if spec.normalize:
        nrm = float(np.linalg.norm(b))
        if nrm > 1.0:
            b = b / nrm
    return b


def write_system(path, sys: LinearSystem):
    """Write the system in the plain-text exchange format.

    Line 1 holds ``n m``; the next n lines hold m space-separated entries;
    a ``b:`` marker line follows, then n entries of b, one per line.  All
    floats use 17 significant digits so a round trip is bit exact.
    """
    with open(path, "w") as fh:
        fh.write(f"{sys.n} {sys.m}\n")
        for row in sys.A:
            fh.write(" ".join("%.17g" % v for v in row) + "\n")
        fh.write("b:\n")
        for v in sys.b:
            fh.write("%.17g\n" % v)


def read_system(path) -> LinearSystem:
    """Parse a system file written by ``write_system``."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    try:
        n, m = (int(tok) for tok in lines[0].split())
    except (IndexError, ValueError) as exc:
        raise ValueError(f"{path}: first line must be 'n m'") from exc
    if len(lines) != n + 2 + n or lines[n + 1] != "b:":
        raise ValueError(f"{path}: expected {n} matrix rows, a 'b:' line, "
                         f"and {n} right-hand-side entries")
    try:
        A = np.array([[float(tok) for tok in lines[1 + i].split()]
                      for i in range(n)])
        b = np.array([float(lines[n + 2 + i]) for i in range(n)])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed numeric entry: {exc}") from exc
    if A.shape != (n, m):
        raise ValueError(f"{path}: matrix rows do not all have {m} entries")
    return LinearSystem(A, b)
