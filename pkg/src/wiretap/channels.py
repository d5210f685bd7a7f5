"""Single-letter channels and wiretap channels.

A Channel is a row-stochastic |X| x |Y| matrix.  A WiretapChannel is a
single-letter joint kernel W(y,z|x), stored as an |X| x (|Y|*|Z|) matrix
with z varying fastest within each y block, optionally carrying a
physical-degradation factorization W(y,z|x) = W1(y|x) * W2(z|y).

n-letter objects are never materialized; memoryless extension is exposed
only through log-density evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .prob import SIMPLEX_TOL, ValidationError

ROW_TOL = 1e-12
FACTOR_TOL = 1e-10

__all__ = [
    "Channel",
    "WiretapChannel",
    "DegradednessCertificate",
    "bsc",
    "compose",
    "check_stochastic_degradedness",
    "is_weakly_symmetric",
    "n_letter_density",
    "load_channel",
    "load_wiretap",
    "save_channel",
]


def _check_rows(m: np.ndarray, what: str) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise ValidationError(f"{what}: expected a non-empty 2-d matrix")
    if np.any(m < 0):
        raise ValidationError(f"{what}: negative entries")
    sums = m.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_TOL)
    if bad.size:
        raise ValidationError(f"{what}: row {bad[0]} sums to {sums[bad[0]]!r}, not 1")
    m = m / sums[:, None]
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class Channel:
    """Row-stochastic transition matrix from an input to an output alphabet."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _check_rows(self.matrix, "Channel"))

    @property
    def input_size(self) -> int:
        return self.matrix.shape[0]

    @property
    def output_size(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def identity(cls, k: int) -> "Channel":
        return cls(np.eye(k))


def bsc(p: float) -> Channel:
    """Binary symmetric channel with crossover probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"bsc: crossover {p} outside [0, 1]")
    return Channel(np.array([[1 - p, p], [p, 1 - p]]))


@dataclass(frozen=True)
class WiretapChannel:
    """Joint kernel W(y,z|x); column index = y * |Z| + z."""

    joint: np.ndarray
    y_size: int
    z_size: int
    w1: Optional[Channel] = None
    w2: Optional[Channel] = None

    def __post_init__(self):
        joint = _check_rows(self.joint, "WiretapChannel")
        if joint.shape[1] != self.y_size * self.z_size:
            raise ValidationError(
                f"WiretapChannel: {joint.shape[1]} columns != |Y|*|Z| = "
                f"{self.y_size * self.z_size}"
            )
        object.__setattr__(self, "joint", joint)
        if (self.w1 is None) != (self.w2 is None):
            raise ValidationError("WiretapChannel: factorization needs both W1 and W2")
        if self.w1 is not None:
            prod = np.einsum("xy,yz->xyz", self.w1.matrix, self.w2.matrix)
            if np.max(np.abs(prod.reshape(self.joint.shape) - joint)) > FACTOR_TOL:
                raise ValidationError(
                    "WiretapChannel: joint does not match declared factorization"
                )

    @property
    def x_size(self) -> int:
        return self.joint.shape[0]

    @property
    def kernel(self) -> np.ndarray:
        """Joint kernel as an (|X|, |Y|, |Z|) array."""
        return self.joint.reshape(self.x_size, self.y_size, self.z_size)

    def marginal_y(self) -> Channel:
        return Channel(self.kernel.sum(axis=2))

    def marginal_z(self) -> Channel:
        return Channel(self.kernel.sum(axis=1))

    def conditional_y_given_z(self) -> np.ndarray:
        """W_{Y|Z}(y|x,z) as an (|X|, |Y|, |Z|) array; 0 where z unreachable from x."""
        k = self.kernel
        wz = k.sum(axis=1)  # (x, z)
        out = np.zeros_like(k)
        np.divide(k, wz[:, None, :], out=out, where=wz[:, None, :] > 0)
        return out


def compose(w1: Channel, w2: Channel) -> WiretapChannel:
    """Physically degraded wiretap channel W(y,z|x) = W1(y|x) W2(z|y)."""
    if w1.output_size != w2.input_size:
        raise ValidationError(
            f"compose: |Y| mismatch ({w1.output_size} vs {w2.input_size})"
        )
    joint = np.einsum("xy,yz->xyz", w1.matrix, w2.matrix)
    return WiretapChannel(
        joint.reshape(w1.input_size, -1),
        y_size=w1.output_size,
        z_size=w2.output_size,
        w1=w1,
        w2=w2,
    )


@dataclass(frozen=True)
class DegradednessCertificate:
    verdict: str  # physically_factored | stochastically_degraded | not_degraded
    witness: Optional[Channel]
    residual: float
    tol: float

    @property
    def degraded(self) -> bool:
        return self.verdict in ("physically_factored", "stochastically_degraded")


class SolverError(RuntimeError):
    """LP solver failed; distinct from a 'not degraded' verdict."""


def check_stochastic_degradedness(
    wy: Channel, wz: Channel, tol: float = 1e-9
) -> DegradednessCertificate:
    """Decide whether wz = wy . V for some channel V, via a linear program.

    Minimizes the entrywise infinity-norm residual of wy @ V - wz over
    row-stochastic V.  The 'not_degraded' verdict requires the optimal
    residual to exceed 10 * tol so boundary instances do not flap.
    """
    if wy.input_size != wz.input_size:
        raise ValidationError("check_stochastic_degradedness: input alphabet mismatch")
    ny, nz, nx = wy.output_size, wz.output_size, wy.input_size

    # Variables: V (ny*nz, row-major) followed by the residual bound t.
    nvar = ny * nz + 1
    c = np.zeros(nvar)
    c[-1] = 1.0

    # |(wy @ V - wz)[i, k]| <= t  for every (i, k).
    rows = []
    rhs = []
    for i in range(nx):
        for k in range(nz):
            a = np.zeros(nvar)
            a[k : ny * nz : nz] = wy.matrix[i]  # coefficient of V[j, k] is wy[i, j]
            a[-1] = -1.0
            rows.append(a.copy())
            rhs.append(wz.matrix[i, k])
            a2 = -a
            a2[-1] = -1.0
            rows.append(a2)
            rhs.append(-wz.matrix[i, k])
    a_ub = np.array(rows)
    b_ub = np.array(rhs)

    # Row sums of V equal 1.
    a_eq = np.zeros((ny, nvar))
    for j in range(ny):
        a_eq[j, j * nz : (j + 1) * nz] = 1.0
    b_eq = np.ones(ny)

    bounds = [(0.0, 1.0)] * (ny * nz) + [(0.0, None)]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds,
                  method="highs")
    if not res.success:
        raise SolverError(f"degradedness LP failed: {res.message}")

    v = res.x[:-1].reshape(ny, nz)
    # Clean tiny LP noise so the witness passes Channel validation.
    v = np.clip(v, 0.0, None)
    v /= v.sum(axis=1, keepdims=True)
    residual = float(np.max(np.abs(wy.matrix @ v - wz.matrix)))

    if residual <= 10 * tol:
        return DegradednessCertificate("stochastically_degraded", Channel(v), residual, tol)
    return DegradednessCertificate("not_degraded", None, residual, tol)


def degradedness_certificate(w: WiretapChannel, tol: float = 1e-9) -> DegradednessCertificate:
    """Certificate for a wiretap channel; constructor factorization is accepted as-is."""
    if w.w2 is not None:
        return DegradednessCertificate("physically_factored", w.w2, 0.0, tol)
    return check_stochastic_degradedness(w.marginal_y(), w.marginal_z(), tol)


def is_weakly_symmetric(c: Channel, tol: float = 1e-9) -> bool:
    """Rows are permutations of one another and column sums are all equal."""
    rows = np.sort(c.matrix, axis=1)
    if np.max(np.abs(rows - rows[0])) > tol:
        return False
    cols = c.matrix.sum(axis=0)
    return bool(np.max(np.abs(cols - cols[0])) <= tol)


def n_letter_density(matrix: np.ndarray, x_vec: np.ndarray, out_vec: np.ndarray) -> float:
    """Sum_i log2 W(out_i | x_i) in bits; -inf on a zero-probability transition.

    `matrix` is a single-letter row-stochastic matrix; the n-letter matrix
    is never formed.
    """
    x_vec = np.asarray(x_vec)
    out_vec = np.asarray(out_vec)
    if x_vec.shape != out_vec.shape or x_vec.ndim != 1:
        raise ValidationError("n_letter_density: vectors must be 1-d of equal length")
    probs = matrix[x_vec, out_vec]
    if np.any(probs == 0):
        return -math.inf
    return float(np.sum(np.log2(probs)))


# ---------------------------------------------------------------------------
# File formats
#
# Channel file: header "<|X|> <|Y|>", then |X| rows of probabilities.
# Wiretap file: "joint <|X|> <|Y|> <|Z|>" + |X| rows of |Y|*|Z| entries
# (z-major within y), or "factored" + two channel blocks.
# '#' comments and blank lines allowed everywhere.
# ---------------------------------------------------------------------------


class FileFormatError(ValidationError):
    def __init__(self, path, lineno, msg):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.lineno = lineno


def _tokens(path):
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.split("#", 1)[0].strip()
            if body:
                yield lineno, body.split()


def _read_channel_block(path, it) -> Channel:
    try:
        lineno, header = next(it)
    except StopIteration:
        raise FileFormatError(path, 0, "missing channel header")
    if len(header) != 2:
        raise FileFormatError(path, lineno, "channel header must be '<|X|> <|Y|>'")
    try:
        nx, ny = int(header[0]), int(header[1])
    except ValueError:
        raise FileFormatError(path, lineno, "channel header must hold two integers")
    rows = []
    for _ in range(nx):
        try:
            lineno, toks = next(it)
        except StopIteration:
            raise FileFormatError(path, lineno, f"expected {nx} rows, file ended early")
        if len(toks) != ny:
            raise FileFormatError(path, lineno, f"expected {ny} entries, got {len(toks)}")
        try:
            rows.append([float(t) for t in toks])
        except ValueError:
            raise FileFormatError(path, lineno, "non-numeric entry")
    try:
        return Channel(np.array(rows))
    except ValidationError as exc:
        raise FileFormatError(path, lineno, str(exc))


def load_channel(path) -> Channel:
    return _read_channel_block(path, _tokens(path))


def load_wiretap(path) -> WiretapChannel:
    it = _tokens(path)
    try:
        lineno, header = next(it)
    except StopIteration:
        raise FileFormatError(path, 0, "empty wiretap file")
    kind = header[0].lower()
    if kind == "factored":
        w1 = _read_channel_block(path, it)
        w2 = _read_channel_block(path, it)
        return compose(w1, w2)
    if kind == "joint":
        if len(header) != 4:
            raise FileFormatError(path, lineno, "joint header must be 'joint <|X|> <|Y|> <|Z|>'")
        try:
            nx, ny, nz = (int(t) for t in header[1:])
        except ValueError:
            raise FileFormatError(path, lineno, "joint header must hold three integers")
        rows = []
        for _ in range(nx):
            try:
                lineno, toks = next(it)
            except StopIteration:
                raise FileFormatError(path, lineno, f"expected {nx} rows, file ended early")
            if len(toks) != ny * nz:
                raise FileFormatError(
                    path, lineno, f"expected {ny * nz} entries, got {len(toks)}"
                )
            try:
                rows.append([float(t) for t in toks])
            except ValueError:
                raise FileFormatError(path, lineno, "non-numeric entry")
        try:
            return WiretapChannel(np.array(rows), y_size=ny, z_size=nz)
        except ValidationError as exc:
            raise FileFormatError(path, lineno, str(exc))
    raise FileFormatError(path, lineno, f"unknown wiretap section {header[0]!r}")


def save_channel(c: Channel, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{c.input_size} {c.output_size}\n")
        for row in c.matrix:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")
