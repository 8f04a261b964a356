"""Terminated quasi-cyclic spatially coupled LDPC codes.

A code is described by its coupled exponent matrix: entry ``-1`` is an empty
block, an entry ``s >= 0`` is the ``theta x theta`` identity with its rows
rotated right ``s`` times.  Row ``r`` of the coupled matrix (a *layer* when
``c == 1``) and column block ``t * b + i`` carry sub-matrix ``E_psi(r)`` with
``psi = r - t``; the time argument is resolved modulo the period.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy.sparse as sp


class InvalidShiftError(ValueError):
    """An exponent entry does not fit the lifting factor."""


class ConstructionError(RuntimeError):
    """No 4-cycle-free realization was found within the resample limit."""


@dataclass(frozen=True)
class CodeSpec:
    """Ensemble parameters of a terminated periodic QC-SC-LDPC code.

    ``b``/``c`` are the VN/CN blocks per coupling instant, ``memory`` the
    coupling memory, ``period`` the time-variation period, ``lifting`` the
    circulant size and ``coupling_len`` the number of coupling instants.
    ``term_instants`` defaults to ``memory``.
    """

    b: int = 2
    c: int = 1
    memory: int = 4
    period: int = 3
    lifting: int = 256
    coupling_len: int = 100
    term_instants: int | None = None

    def __post_init__(self):
        if self.term_instants is None:
            object.__setattr__(self, "term_instants", self.memory)
        if not (self.b > self.c >= 1):
            raise ValueError(f"need b > c >= 1, got b={self.b}, c={self.c}")
        if self.memory < 0 or self.period < 1 or self.lifting < 1:
            raise ValueError("memory >= 0, period >= 1 and lifting >= 1 required")
        if self.term_instants < 0 or self.coupling_len <= self.term_instants:
            raise ValueError("coupling length must exceed the termination instants")

    @property
    def msg_instants(self) -> int:
        return self.coupling_len - self.term_instants

    @property
    def n_layers(self) -> int:
        """Rows of the coupled exponent matrix, ``c (J + memory)``."""
        return self.c * (self.coupling_len + self.memory)

    @property
    def n_vn_blocks(self) -> int:
        return self.b * self.coupling_len

    @property
    def shift_shape(self) -> tuple[int, int, int, int]:
        """Shape of the per-period shift table ``[psi, slot, row, col]``."""
        return (self.memory + 1, self.period, self.c, self.b)


@dataclass(frozen=True)
class CodeRates:
    k: int
    n: int
    rate: Fraction
    rate_asymptotic: Fraction
    constraint_length: int


@dataclass(frozen=True, eq=False)
class CodeRealization:
    """One sampled code: per-slot shift table plus the coupled exponent matrix.

    The flat edge arrays (``layer_ptr``, ``edge_vb``, ``edge_shift``,
    ``edge_t``) list the populated blocks row by row in column order and are
    what the decoder kernel consumes.
    """

    spec: CodeSpec
    shifts: np.ndarray
    coupled: np.ndarray
    layer_ptr: np.ndarray = field(repr=False)
    edge_vb: np.ndarray = field(repr=False)
    edge_shift: np.ndarray = field(repr=False)
    edge_t: np.ndarray = field(repr=False)

    @property
    def n_edges(self) -> int:
        return len(self.edge_vb)

    @property
    def n(self) -> int:
        return self.spec.n_vn_blocks * self.spec.lifting

    def layer_adjacency(self, layer: int) -> list[tuple[int, int]]:
        """``(vn_block, shift)`` pairs of one layer, in column order."""
        lo, hi = self.layer_ptr[layer], self.layer_ptr[layer + 1]
        return list(zip(self.edge_vb[lo:hi].tolist(), self.edge_shift[lo:hi].tolist()))

    def info_vns(self) -> np.ndarray:
        """Indices of the ``k`` information bits (first ``b - c`` blocks of each message instant)."""
        s = self.spec
        blocks = [t * s.b + i for t in range(s.msg_instants) for i in range(s.b - s.c)]
        theta = s.lifting
        return (np.asarray(blocks)[:, None] * theta + np.arange(theta)[None, :]).ravel()

    def lifted(self) -> sp.csr_matrix:
        return lift(self.coupled, self.spec.lifting)

    def __eq__(self, other):
        if not isinstance(other, CodeRealization):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self.shifts, other.shifts)

    __hash__ = None


def check_exponents(E, theta: int) -> np.ndarray:
    E = np.asarray(E, dtype=np.int64)
    if E.ndim != 2 or E.size == 0:
        raise ValueError("exponent matrix must be a non-empty 2-D array")
    if theta < 1:
        raise ValueError("lifting factor must be positive")
    if E.min() < -1:
        raise InvalidShiftError("exponent entries must be >= -1")
    if E.max() >= theta:
        raise InvalidShiftError(f"shift {E.max()} does not fit lifting factor {theta}")
    return E


def lift(E, theta: int) -> sp.csr_matrix:
    """Expand an exponent matrix into its binary parity-check matrix."""
    E = check_exponents(E, theta)
    M, N = E.shape
    rows, cols = [], []
    r = np.arange(theta)
    for j, i in zip(*np.nonzero(E >= 0)):
        rows.append(j * theta + r)
        cols.append(i * theta + (r + E[j, i]) % theta)
    if rows:
        rows, cols = np.concatenate(rows), np.concatenate(cols)
    data = np.ones(len(rows), dtype=np.uint8)
    return sp.csr_matrix((data, (rows, cols)), shape=(M * theta, N * theta))


def has_four_cycle(E, theta: int) -> bool:
    """Whether the lifted Tanner graph of ``E`` contains a cycle of length 4.

    Rows ``j1, j2`` and columns ``i1 != i2`` close a 4-cycle iff all four
    blocks are populated and ``E[j1,i1] - E[j2,i1] == E[j1,i2] - E[j2,i2]``
    modulo ``theta``; for each row pair this is a duplicate search over the
    shift differences of the jointly populated columns.
    """
    E = check_exponents(E, theta)
    M, N = E.shape
    sentinel = -1 - np.arange(N)
    for d in range(1, M):
        a, b = E[:-d], E[d:]
        both = (a >= 0) & (b >= 0)
        if both.sum(axis=1).max() < 2:
            continue
        diff = np.where(both, (a - b) % theta, sentinel)
        diff.sort(axis=1)
        dup = (diff[:, 1:] == diff[:, :-1]) & (diff[:, 1:] >= 0)
        if dup.any():
            return True
    return False


def build_coupled(spec: CodeSpec, shifts) -> CodeRealization:
    """Assemble the terminated coupled exponent matrix from a per-slot shift table."""
    shifts = np.array(shifts, dtype=np.int64)
    if shifts.shape != spec.shift_shape:
        raise ValueError(f"shift table must have shape {spec.shift_shape}, got {shifts.shape}")
    if shifts.min() < 0 or shifts.max() >= spec.lifting:
        raise InvalidShiftError("sub-matrix shifts must lie in [0, lifting - 1]")
    b, c, mem, T, J = spec.b, spec.c, spec.memory, spec.period, spec.coupling_len
    E = np.full((spec.n_layers, spec.n_vn_blocks), -1, dtype=np.int64)
    for t in range(J):
        for psi in range(mem + 1):
            r = t + psi
            E[r * c:(r + 1) * c, t * b:(t + 1) * b] = shifts[psi, r % T]

    rows, cols = np.nonzero(E >= 0)  # row-major, so sorted by layer then column
    layer_ptr = np.zeros(E.shape[0] + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=E.shape[0]), out=layer_ptr[1:])
    E.flags.writeable = False
    shifts.flags.writeable = False
    return CodeRealization(
        spec=spec,
        shifts=shifts,
        coupled=E,
        layer_ptr=layer_ptr,
        edge_vb=cols.astype(np.int64),
        edge_shift=E[rows, cols].astype(np.int64),
        edge_t=(cols // b).astype(np.int64),
    )


def sample_realization(spec: CodeSpec, rng: np.random.Generator, max_tries: int = 1000) -> CodeRealization:
    """Draw uniform shifts for every period slot, rejecting realizations with 4-cycles."""
    for _ in range(max_tries):
        shifts = rng.integers(0, spec.lifting, size=spec.shift_shape)
        real = build_coupled(spec, shifts)
        if not has_four_cycle(real.coupled, spec.lifting):
            return real
    raise ConstructionError(f"no 4-cycle-free realization in {max_tries} draws for {spec}")


def code_rates(spec: CodeSpec) -> CodeRates:
    theta = spec.lifting
    r_inf = Fraction(spec.b - spec.c, spec.b)
    return CodeRates(
        k=spec.msg_instants * (spec.b - spec.c) * theta,
        n=spec.coupling_len * spec.b * theta,
        rate=Fraction(spec.msg_instants, spec.coupling_len) * r_inf,
        rate_asymptotic=r_inf,
        constraint_length=spec.b * theta * (spec.memory + 1),
    )


def layer_profile(real: CodeRealization) -> list[int]:
    """Number of populated blocks in every row of the coupled matrix."""
    return np.diff(real.layer_ptr).tolist()


def write_realization(real: CodeRealization, path) -> None:
    s = real.spec
    lines = [f"{s.b} {s.c} {s.memory} {s.period} {s.lifting} {s.coupling_len}"]
    for psi in range(s.memory + 1):
        for slot in range(s.period):
            lines.append(" ".join(str(v) for v in real.shifts[psi, slot].ravel()))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_realization(path) -> CodeRealization:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    b, c, mem, T, theta, J = (int(v) for v in lines[0].split())
    spec = CodeSpec(b=b, c=c, memory=mem, period=T, lifting=theta, coupling_len=J)
    body = lines[1:]
    if len(body) != (mem + 1) * T:
        raise ValueError(f"expected {(mem + 1) * T} shift lines, found {len(body)}")
    shifts = np.array([[int(v) for v in ln.split()] for ln in body], dtype=np.int64)
    return build_coupled(spec, shifts.reshape(spec.shift_shape))
