"""Layered message-passing kernel in fixed-point or reference arithmetic.

Values are carried as float64 throughout.  In fixed-point mode every LLR is
a multiple of the step.  CN-to-VN and VN-to-CN messages saturate at
``max_steps`` steps; posteriors keep the headroom of a sum of ``d_v + 1``
saturated terms, so ``L = lambda + sum(R)`` holds exactly and a saturated
posterior can never flip the sign of a VN-to-CN message.  The box-plus
correction terms come from a lookup table with resolution
``step / 2**guard_bits``.  Passing ``quant=None`` selects reference
arithmetic: exact log-domain box-plus, no rounding, no saturation.

The check-node rule is the SPA/min-sum blend: the edge carrying the weakest
incoming message gets the exact extrinsic box-plus value; every other edge
gets the magnitude of the box-plus over *all* inputs with its own extrinsic
sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit


@dataclass(frozen=True)
class QuantSpec:
    step: float = 1.0 / 16
    max_steps: int = 1023
    guard_bits: int = 4
    lut: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        res = self.lut_res
        # table ends at the first zero entry; larger indices clamp onto it
        k = np.arange(int(np.ceil(np.log(2.0 / res) / res)) + 2) * res
        lut = np.round(np.log1p(np.exp(-k)) / res) * res
        object.__setattr__(self, "lut", lut[:np.argmax(lut == 0) + 1])

    @property
    def lut_res(self) -> float:
        return self.step / 2 ** self.guard_bits

    @property
    def max_value(self) -> float:
        return self.max_steps * self.step


DEFAULT_QUANT = QuantSpec()
_NO_LUT = np.zeros(1)


def _kernel_args(quant):
    # (fixed, step, 1/step, saturation value, lut, 1/lut resolution)
    if quant is None:
        return False, 1.0, 1.0, math.inf, _NO_LUT, 1.0
    return True, quant.step, 1.0 / quant.step, quant.max_value, quant.lut, 1.0 / quant.lut_res


@dataclass(frozen=True)
class FixedLlr:
    sign: int
    magnitude: int
    step: float = DEFAULT_QUANT.step

    @property
    def value(self) -> float:
        return self.sign * self.magnitude * self.step

    def __float__(self):
        return self.value


# -- scalar primitives (njit) -------------------------------------------------

@njit(cache=True)
def _sgn(x):
    if x > 0:
        return 1.0
    if x < 0:
        return -1.0
    return 0.0


@njit(cache=True)
def _quant(x, fixed, step, inv_step, maxval):
    if not fixed:
        return x
    m = math.floor(abs(x) * inv_step + 0.5) * step
    if m > maxval:
        m = maxval
    return _sgn(x) * m


@njit(cache=True)
def _sat(x, maxval):
    if x > maxval:
        return maxval
    if x < -maxval:
        return -maxval
    return x


@njit(cache=True)
def _boxplus(a, b, fixed, lut, lut_scale):
    s = _sgn(a) * _sgn(b)
    if s == 0.0:
        return 0.0
    ma = abs(a)
    mb = abs(b)
    m = min(ma, mb)
    if fixed:
        i1 = int((ma + mb) * lut_scale + 0.5)
        i2 = int(abs(ma - mb) * lut_scale + 0.5)
        n = lut.shape[0] - 1
        m += lut[min(i1, n)] - lut[min(i2, n)]
    else:
        m += math.log1p(math.exp(-(ma + mb))) - math.log1p(math.exp(-abs(ma - mb)))
    if m < 0.0:
        m = 0.0
    return s * m


@njit(cache=True)
def _blend_cn(q, d, out, fixed, step, inv_step, maxval, lut, lut_scale):
    """Blend CN update on ``q[:d]`` into ``out[:d]``; returns parity flag."""
    wk = 0
    neg = 0
    zero = 0
    prod = 1.0
    for k in range(d):
        v = q[k]
        if v == 0.0:
            zero += 1
        else:
            if v < 0.0:
                neg += 1
                prod = -prod
        if abs(v) < abs(q[wk]):
            wk = k
    parity_ok = zero > 0 or neg % 2 == 0

    ext = 0.0
    first = True
    for k in range(d):
        if k == wk:
            continue
        if first:
            ext = q[k]
            first = False
        else:
            ext = _boxplus(ext, q[k], fixed, lut, lut_scale)
    all_mag = abs(_quant(_boxplus(ext, q[wk], fixed, lut, lut_scale), fixed, step, inv_step, maxval))
    ext = _quant(ext, fixed, step, inv_step, maxval)

    for k in range(d):
        if k == wk:
            out[k] = ext
            continue
        v = q[k]
        if zero - (1 if v == 0.0 else 0) > 0:
            out[k] = 0.0
        else:
            s = prod * _sgn(v) if v != 0.0 else prod
            out[k] = s * all_mag
    return parity_ok


@njit(cache=True)
def _msa_cn(q, d, out):
    for k in range(d):
        s = 1.0
        m = math.inf
        for j in range(d):
            if j != k:
                s *= _sgn(q[j])
                m = min(m, abs(q[j]))
        out[k] = s * m


# -- layer and schedule (njit) -------------------------------------------------

@njit(cache=True)
def _process_layer(L, R, layer_ptr, edge_vb, edge_shift, theta, l, commit,
                   fixed, step, inv_step, maxval, lut, lut_scale, Q, V, ext, allm, wk, sg, nz):
    # column-wise over the theta CNs of the layer; same rule as _blend_cn
    lo = layer_ptr[l]
    d = layer_ptr[l + 1] - lo
    for k in range(d):
        e = lo + k
        sh = edge_shift[e]
        base = edge_vb[e] * theta
        for r in range(theta):
            v = r + sh
            if v >= theta:
                v -= theta
            v += base
            V[k, r] = v
            q = L[v] - R[e, r]
            if fixed:
                q = _sat(q, maxval)
            Q[k, r] = q

    parity_ok = True
    for r in range(theta):
        w = 0
        prod = 1.0
        z = 0
        for k in range(d):
            v = Q[k, r]
            if v == 0.0:
                z += 1
            elif v < 0.0:
                prod = -prod
            if abs(v) < abs(Q[w, r]):
                w = k
        wk[r] = w
        sg[r] = prod
        nz[r] = z
        if z == 0 and prod < 0.0:
            parity_ok = False
        ext[r] = Q[1, r] if w == 0 else Q[0, r]

    for k in range(1, d):
        for r in range(theta):
            w = wk[r]
            if k == w or (w == 0 and k == 1):
                continue
            ext[r] = _boxplus(ext[r], Q[k, r], fixed, lut, lut_scale)
    for r in range(theta):
        a = _boxplus(ext[r], Q[wk[r], r], fixed, lut, lut_scale)
        allm[r] = abs(_quant(a, fixed, step, inv_step, maxval))
        ext[r] = _quant(ext[r], fixed, step, inv_step, maxval)

    updates = 0
    for k in range(d):
        e = lo + k
        if not commit[e]:
            continue
        updates += 1
        for r in range(theta):
            if k == wk[r]:
                out = ext[r]
            else:
                v = Q[k, r]
                if v == 0.0:
                    out = 0.0 if nz[r] > 1 else sg[r] * allm[r]
                elif nz[r] > 0:
                    out = 0.0
                else:
                    out = sg[r] * _sgn(v) * allm[r]
            L[V[k, r]] += out - R[e, r]
            R[e, r] = out
    return updates, parity_ok


def _layer_buffers(dmax, theta):
    return (np.empty((dmax, theta)), np.empty((dmax, theta), np.int64), np.empty(theta),
            np.empty(theta), np.empty(theta, np.int64), np.empty(theta), np.empty(theta, np.int64))


_layer_buffers_jit = njit(cache=True)(_layer_buffers)


@njit(cache=True)
def _run_windows(L, R, layer_ptr, edge_vb, edge_shift, edge_t, theta, J, W, n_pos,
                 vn_centered, et_on, et_lo, et_hi, et_last_hi, imax,
                 fixed, step, inv_step, maxval, lut, lut_scale, iters_out):
    n_e = edge_vb.shape[0]
    dmax = 1
    for l in range(layer_ptr.shape[0] - 1):
        dmax = max(dmax, layer_ptr[l + 1] - layer_ptr[l])
    Q, V, ext, allm, wk, sg, nz = _layer_buffers_jit(dmax, theta)
    commit = np.empty(n_e, np.bool_)
    nmu = 0
    for w in range(n_pos):
        t_lo = w if vn_centered else 0
        t_hi = min(w + W - 1, J - 1) if vn_centered else J - 1
        for e in range(n_e):
            commit[e] = edge_t[e] >= t_lo and edge_t[e] <= t_hi
        hi = et_last_hi if w == n_pos - 1 else et_hi
        it = 0
        while it < imax:
            ok = True
            for l in range(w, w + W):
                u, p = _process_layer(L, R, layer_ptr, edge_vb, edge_shift, theta, l, commit,
                                      fixed, step, inv_step, maxval, lut, lut_scale,
                                      Q, V, ext, allm, wk, sg, nz)
                nmu += u
                if not p and et_lo <= l - w < hi:
                    ok = False
            it += 1
            if et_on and ok:
                break
        iters_out[w] = it
    return nmu


# -- Python surface -----------------------------------------------------------

def quantize(x: float, quant: QuantSpec = DEFAULT_QUANT) -> FixedLlr:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("cannot quantize a non-finite LLR")
    mag = min(quant.max_steps, math.floor(abs(x) / quant.step + 0.5))
    sign = 0 if mag == 0 else (1 if x > 0 else -1)
    return FixedLlr(sign, mag, quant.step)


def quantize_array(x, quant: QuantSpec | None = DEFAULT_QUANT) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if quant is None:
        return x.copy()
    if not np.all(np.isfinite(x)):
        raise ValueError("cannot quantize non-finite LLRs")
    mag = np.minimum(np.floor(np.abs(x) / quant.step + 0.5), quant.max_steps)
    return np.sign(x) * mag * quant.step


def box_plus(a, b, quant: QuantSpec | None = DEFAULT_QUANT):
    """Pairwise box-plus; returns a ``FixedLlr`` or, for ``quant=None``, a float."""
    fixed, _, _, _, lut, scale = _kernel_args(quant)
    a, b = float(a), float(b)
    if fixed:
        a, b = quantize(a, quant).value, quantize(b, quant).value
        return quantize(_boxplus(a, b, True, lut, scale), quant)
    return _boxplus(a, b, False, lut, scale)


def box_plus_fold(values, quant: QuantSpec | None = DEFAULT_QUANT) -> float:
    """Left fold of box-plus over ``values`` as the CN kernel computes it.

    Operands are quantized; intermediate results stay on the table grid and
    only the final value is rounded to the step.
    """
    fixed, step, inv_step, maxval, lut, scale = _kernel_args(quant)
    x = quantize_array(values, quant)
    if x.size == 0:
        raise ValueError("nothing to fold")
    acc = float(x[0])
    for v in x[1:]:
        acc = _boxplus(acc, float(v), fixed, lut, scale)
    return float(_quant(acc, fixed, step, inv_step, maxval))


def spa_extrinsic(inputs) -> np.ndarray:
    """Exact sum-product extrinsic outputs via the tanh rule (reference oracle)."""
    x = np.asarray(inputs, dtype=float)
    t = np.tanh(x / 2)
    out = np.empty_like(x)
    for k in range(x.size):
        out[k] = 2 * np.arctanh(np.prod(np.delete(t, k)))
    return out


def _prep_cn(inputs, quant):
    x = np.asarray(inputs, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("check-node update needs degree >= 2")
    return quantize_array(x, quant) if quant is not None else x.copy()


def cn_update_msa(inputs, quant: QuantSpec | None = DEFAULT_QUANT) -> np.ndarray:
    q = _prep_cn(inputs, quant)
    out = np.empty_like(q)
    _msa_cn(q, q.size, out)
    return out


def cn_update_blend(inputs, quant: QuantSpec | None = DEFAULT_QUANT) -> np.ndarray:
    q = _prep_cn(inputs, quant)
    out = np.empty_like(q)
    _blend_cn(q, q.size, out, *_kernel_args(quant))
    return out


def check_parity(inputs) -> bool:
    """Sign product of the inputs is non-negative (zero counts as satisfied)."""
    x = np.asarray(inputs, dtype=float)
    return bool(np.prod(np.sign(x)) >= 0)


class DecoderState:
    """Posterior LLRs plus per-edge CN-to-VN messages for one realization.

    ``messages[e, r]`` is the message from CN ``r`` of edge ``e``'s layer to
    its VN; the edge order is that of ``CodeRealization.edge_vb``.
    """

    def __init__(self, real, llrs, quant: QuantSpec | None = DEFAULT_QUANT):
        llrs = np.asarray(llrs, dtype=float)
        if llrs.shape != (real.n,):
            raise ValueError(f"expected {real.n} channel LLRs, got shape {llrs.shape}")
        self.real = real
        self.quant = quant
        self.channel = quantize_array(llrs, quant)
        self.posteriors = self.channel.copy()
        self.messages = np.zeros((real.n_edges, real.spec.lifting))
        self.update_counter = 0

    def conservation_error(self) -> float:
        """Max ``|L - lambda - sum R|`` over all VNs."""
        real = self.real
        theta = real.spec.lifting
        total = self.channel.copy()
        r = np.arange(theta)
        for e in range(real.n_edges):
            vns = real.edge_vb[e] * theta + (r + real.edge_shift[e]) % theta
            total[vns] += self.messages[e]
        return float(np.max(np.abs(self.posteriors - total)))


def process_layer(state: DecoderState, layer: int, mask=None) -> tuple[bool, int]:
    """Run the blend CN update over one layer.

    ``mask`` is the set of VN blocks whose edges may be written; edges to
    other VN blocks are read but left untouched.  Returns the layer's parity
    flag and the number of block edges committed.
    """
    real = state.real
    lo, hi = real.layer_ptr[layer], real.layer_ptr[layer + 1]
    if hi - lo < 2:
        raise ValueError(f"layer {layer} has degree {hi - lo} < 2")
    commit = np.zeros(real.n_edges, dtype=bool)
    if mask is None:
        commit[lo:hi] = True
    else:
        mask = set(mask)
        adj = set(real.edge_vb[lo:hi].tolist())
        if not mask <= adj:
            raise ValueError(f"mask blocks {sorted(mask - adj)} are not adjacent to layer {layer}")
        commit[lo:hi] = np.isin(real.edge_vb[lo:hi], list(mask))
    dmax = int(np.diff(real.layer_ptr).max())
    updates, ok = _process_layer(
        state.posteriors, state.messages, real.layer_ptr, real.edge_vb, real.edge_shift,
        real.spec.lifting, layer, commit, *_kernel_args(state.quant),
        *_layer_buffers(dmax, real.spec.lifting))
    state.update_counter += updates
    return bool(ok), int(updates)


def hard_decisions(state: DecoderState, vn_range=None) -> np.ndarray:
    L = state.posteriors if vn_range is None else state.posteriors[vn_range]
    return (L < 0).astype(np.uint8)
