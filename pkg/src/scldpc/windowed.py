"""Window scheduling, update masks, early termination and complexity budgets.

All complexity figures count message updates per *block* edge of the coupled
exponent matrix; the lifting factor does not enter.  The windowed decoder
assumes ``c == 1``, so a layer is one row of the coupled matrix.
"""

from __future__ import annotations

import dataclasses
import enum
import warnings
from dataclasses import dataclass

import numpy as np

from .construction import CodeRealization, CodeSpec
from .kernel import DEFAULT_QUANT, DecoderState, QuantSpec, _kernel_args, _run_windows


class Strategy(str, enum.Enum):
    VN_CENTERED = "VN_CENTERED"
    CN_CENTERED = "CN_CENTERED"
    FULL_BLOCK = "FULL_BLOCK"


class EtSet(str, enum.Enum):
    TARGET = "TARGET"
    COMPLETE = "COMPLETE"
    ALL = "ALL"
    NONE = "NONE"


class WindowSizeWarning(UserWarning):
    """Window too small for the target/complete/all CN sets to be strictly nested."""


def _require_single_cn_block(spec: CodeSpec) -> None:
    if spec.c != 1:
        raise ValueError("windowed decoding is implemented for c == 1 only")


def n_positions(spec: CodeSpec, W: int) -> int:
    """Number of window positions, ``J + memory - W + 1``."""
    return spec.coupling_len + spec.memory - W + 1


@dataclass(frozen=True)
class WindowConfig:
    window: int
    strategy: Strategy = Strategy.VN_CENTERED
    et_set: EtSet = EtSet.TARGET
    imax: int = 1

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        object.__setattr__(self, "et_set", EtSet(self.et_set))
        if self.imax < 1:
            raise ValueError("at least one iteration per window is required")
        if self.window < 1:
            raise ValueError("window size must be positive")

    def check_against(self, memory: int) -> None:
        if (self.strategy is not Strategy.FULL_BLOCK
                and self.et_set in (EtSet.TARGET, EtSet.COMPLETE)
                and self.window <= 2 * memory + 1):
            warnings.warn(
                f"window {self.window} <= 2*memory+1 = {2 * memory + 1}: "
                "target and complete CN sets are not strictly nested",
                WindowSizeWarning, stacklevel=3)


@dataclass(frozen=True)
class BudgetSpec:
    imax_fbd: int
    i1_fbd: int

    @classmethod
    def for_code(cls, spec: CodeSpec, imax_fbd: int = 200) -> BudgetSpec:
        return cls(imax_fbd, i1_per_iteration(spec, Strategy.FULL_BLOCK))

    @property
    def nmu_max(self) -> int:
        return self.imax_fbd * self.i1_fbd


@dataclass
class DecodeOutcome:
    info_bits: np.ndarray
    success: bool
    nmu: int
    per_window_iters: list[int]


def window_layers(w: int, W: int, M: int) -> range:
    if not 1 <= W <= M:
        raise ValueError(f"window size {W} outside [1, {M}]")
    if not 0 <= w <= M - W:
        raise ValueError(f"window position {w} outside [0, {M - W}]")
    return range(w, w + W)


def _adjacent_instants(spec: CodeSpec, layer: int) -> range:
    return range(max(0, layer - spec.memory), min(layer, spec.coupling_len - 1) + 1)


def vn_mask(w: int, W: int, strategy, spec: CodeSpec) -> dict[int, set[int]]:
    """Updatable VN blocks for every layer of the window at position ``w``."""
    _require_single_cn_block(spec)
    strategy = Strategy(strategy)
    layers = window_layers(w, W, spec.n_layers)
    masks = {}
    for l in layers:
        ts = _adjacent_instants(spec, l)
        if strategy is Strategy.VN_CENTERED:
            ts = [t for t in ts if w <= t <= w + W - 1]
        masks[l] = {t * spec.b + i for t in ts for i in range(spec.b)}
    return masks


def et_layer_set(w: int, W: int, memory: int, et_set, last: bool = False) -> range:
    """Window layers whose parity must hold for the window to advance early.

    At the last position (``last=True``) every VN in the window is final, so
    the target and complete sets widen to the whole window.
    """
    et_set = EtSet(et_set)
    if last and et_set is not EtSet.NONE:
        et_set = EtSet.ALL
    lo, hi = _et_offsets(W, memory, et_set)
    return range(w + lo, w + hi)


def _et_offsets(W: int, memory: int, et_set: EtSet) -> tuple[int, int]:
    if et_set is EtSet.TARGET:
        return 0, min(W, memory + 1)
    if et_set is EtSet.COMPLETE:
        return 0, max(0, W - memory)
    if et_set is EtSet.ALL:
        return 0, W
    return 0, 0


def i1_per_iteration(spec: CodeSpec, strategy, W: int | None = None) -> int:
    """Block-edge updates for one iteration at every window position."""
    strategy = Strategy(strategy)
    if strategy is Strategy.FULL_BLOCK:
        W = spec.n_layers
        strategy = Strategy.CN_CENTERED
    total = 0
    for w in range(n_positions(spec, W)):
        total += sum(len(m) for m in vn_mask(w, W, strategy, spec).values())
    return total


def nmsg_middle(spec: CodeSpec, strategy, W: int) -> int:
    """Block-edge updates per iteration of one window clear of both terminations."""
    mid = dataclasses.replace(spec, coupling_len=W + 2 * spec.memory + 1, term_instants=None)
    w = spec.memory
    return sum(len(m) for m in vn_mask(w, W, strategy, mid).values())


def derive_imax(budget: BudgetSpec, spec: CodeSpec, strategy, W: int | None = None) -> int:
    i1 = i1_per_iteration(spec, strategy, W)
    if i1 <= 0:
        raise ValueError("window configuration performs no updates")
    return budget.imax_fbd * budget.i1_fbd // i1


def configure(budget: BudgetSpec, spec: CodeSpec, strategy, W: int | None = None,
              et_set=EtSet.TARGET) -> WindowConfig:
    """Window config whose per-window iteration cap matches the FBD budget."""
    strategy = Strategy(strategy)
    if strategy is Strategy.FULL_BLOCK:
        return WindowConfig(spec.n_layers, strategy, et_set, budget.imax_fbd)
    return WindowConfig(W, strategy, et_set, derive_imax(budget, spec, strategy, W))


def decode_windowed(llrs, real: CodeRealization, cfg: WindowConfig,
                    quant: QuantSpec | None = DEFAULT_QUANT,
                    state: DecoderState | None = None) -> DecodeOutcome:
    """Slide the window over the coupled code, top to bottom, and decode.

    Each position runs up to ``cfg.imax`` top-to-bottom sweeps over its
    layers and moves on early once every layer of the ET set reported a
    satisfied parity during the last sweep (see ``et_layer_set`` for the
    last position).  ``state`` may carry a prepared
    decoder state; otherwise one is initialized from ``llrs``.
    """
    spec = real.spec
    _require_single_cn_block(spec)
    if state is None:
        state = DecoderState(real, llrs, quant)
    M = spec.n_layers
    if cfg.strategy is Strategy.FULL_BLOCK:
        W, vn_centered = M, False
    else:
        W, vn_centered = cfg.window, cfg.strategy is Strategy.VN_CENTERED
        cfg.check_against(spec.memory)
    window_layers(0, W, M)
    n_pos = n_positions(spec, W)
    et_lo, et_hi = _et_offsets(W, spec.memory, cfg.et_set)
    et_last_hi = W if cfg.et_set is not EtSet.NONE else 0
    iters = np.zeros(n_pos, dtype=np.int64)
    nmu = _run_windows(
        state.posteriors, state.messages, real.layer_ptr, real.edge_vb, real.edge_shift,
        real.edge_t, spec.lifting, spec.coupling_len, W, n_pos, vn_centered,
        cfg.et_set is not EtSet.NONE, et_lo, et_hi, et_last_hi, cfg.imax,
        *_kernel_args(state.quant), iters)
    state.update_counter += int(nmu)
    bits = (state.posteriors[real.info_vns()] < 0).astype(np.uint8)
    return DecodeOutcome(bits, not bits.any(), int(nmu), iters.tolist())


def decode_fbd(llrs, real: CodeRealization, budget: BudgetSpec,
               quant: QuantSpec | None = DEFAULT_QUANT, early_termination: bool = True,
               state: DecoderState | None = None) -> DecodeOutcome:
    """Full block decoding: layered sweeps over all layers, syndrome-based stop."""
    et = EtSet.ALL if early_termination else EtSet.NONE
    cfg = WindowConfig(real.spec.n_layers, Strategy.FULL_BLOCK, et, budget.imax_fbd)
    return decode_windowed(llrs, real, cfg, quant, state)
