import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scldpc.construction import CodeSpec, sample_realization
from scldpc.kernel import (
    DEFAULT_QUANT,
    DecoderState,
    QuantSpec,
    box_plus,
    box_plus_fold,
    check_parity,
    cn_update_blend,
    cn_update_msa,
    hard_decisions,
    process_layer,
    quantize,
    quantize_array,
    spa_extrinsic,
)

D = DEFAULT_QUANT.step
SAT = DEFAULT_QUANT.max_value


def exact_fold(x):
    """Tanh-product fold in 60-digit arithmetic."""
    with mpmath.workdps(60):
        p = mpmath.mpf(1)
        for v in np.asarray(x, dtype=float):
            p *= mpmath.tanh(mpmath.mpf(v) / 2)
        return float(2 * mpmath.atanh(p))


def blend_oracle(x):
    x = np.asarray(x, dtype=float)
    weak = int(np.argmin(np.abs(x)))
    full = abs(exact_fold(x))
    out = np.empty_like(x)
    for k in range(x.size):
        others = np.delete(x, k)
        sign = np.prod(np.sign(others))
        out[k] = exact_fold(others) if k == weak else sign * full
    return out


@pytest.mark.parametrize("x, sign, mag", [
    (0.0, 0, 0),
    (1e6, 1, 1023),
    (-1e6, -1, 1023),
    (-1.03, -1, 16),
    (1.5 / 16, 1, 2),
    (-0.5 / 16, -1, 1),
    (0.49 / 16, 0, 0),
])
def test_quantize(x, sign, mag):
    q = quantize(x)
    assert (q.sign, q.magnitude) == (sign, mag)
    assert q.value == sign * mag * D


def test_quantize_rejects_nonfinite():
    with pytest.raises(ValueError):
        quantize(float("nan"))
    with pytest.raises(ValueError):
        quantize_array([1.0, float("inf")])


def test_quantize_array_matches_scalar():
    x = np.random.default_rng(0).normal(scale=30, size=500)
    np.testing.assert_array_equal(quantize_array(x), [quantize(v).value for v in x])


def test_box_plus_examples():
    assert box_plus(3.0, 0.0).value == 0.0
    assert abs(box_plus(2.5, SAT).value - 2.5) <= D
    assert box_plus(2.0, -3.5, None) == pytest.approx(-1.8027, abs=1e-4)
    assert abs(box_plus(2.0, -3.5).value - exact_fold([2.0, -3.5])) <= D


@given(st.floats(-40, 40), st.floats(-40, 40))
@settings(max_examples=200, deadline=None)
def test_box_plus_properties(a, b):
    ref = box_plus(a, b, None)
    assert abs(ref) <= min(abs(a), abs(b)) + 1e-12
    assert box_plus(a, b).value == box_plus(b, a).value
    qa, qb = quantize(a).value, quantize(b).value
    assert abs(box_plus(a, b).value - exact_fold([qa, qb])) <= 2 * D


@given(st.floats(-20, 20), st.floats(-20, 20), st.floats(-20, 20))
@settings(max_examples=200, deadline=None)
def test_box_plus_associativity(a, b, c):
    left = box_plus(box_plus(a, b, None), c, None)
    right = box_plus(a, box_plus(b, c, None), None)
    assert left == pytest.approx(right, abs=1e-9)
    ql = box_plus(box_plus(a, b).value, c).value
    qr = box_plus(a, box_plus(b, c).value).value
    assert abs(ql - qr) <= 2 * D


def test_lut_truncated_at_first_zero():
    lut = DEFAULT_QUANT.lut
    assert lut[-1] == 0 and np.all(lut[:-1] > 0)
    assert lut[0] == pytest.approx(math.log(2), abs=DEFAULT_QUANT.lut_res)


@pytest.mark.parametrize("inputs, expected", [
    ([2.0, -3.5, 1.0], [-1.0, 1.0, -2.0]),
    ([1.5, -0.25], [-0.25, 1.5]),
    ([0.0, 2.0, -1.0], [-1.0, 0.0, 0.0]),
])
def test_msa_examples(inputs, expected):
    np.testing.assert_array_equal(cn_update_msa(inputs), expected)


def test_cn_degree_error():
    for fn in (cn_update_msa, cn_update_blend):
        with pytest.raises(ValueError):
            fn([1.0])


def test_blend_example():
    ref = cn_update_blend([2.0, -3.5, 1.0], None)
    np.testing.assert_allclose(ref, [-0.6886, 0.6886, -1.8027], atol=1e-4)
    np.testing.assert_allclose(ref, blend_oracle([2.0, -3.5, 1.0]), atol=1e-12)
    q = cn_update_blend([2.0, -3.5, 1.0])
    np.testing.assert_allclose(q, ref, atol=2 * D)
    assert np.all(np.round(q / D) == q / D)


def test_blend_degree_two_and_tie():
    out = cn_update_blend([1.0, 2.5], None)
    assert out[0] == pytest.approx(2.5)
    assert out[1] == pytest.approx(abs(exact_fold([1.0, 2.5])))
    # tie goes to the first edge: it alone receives the exact extrinsic
    out = cn_update_blend([1.0, -1.0], None)
    assert out[0] == pytest.approx(-1.0)
    assert out[1] == pytest.approx(abs(exact_fold([1.0, -1.0])))


def test_blend_and_msa_against_spa_reference():
    rng = np.random.default_rng(1)
    for _ in range(300):
        x = rng.normal(1.0, 4.0, size=int(rng.integers(2, 12)))
        spa = spa_extrinsic(x)
        blend = cn_update_blend(x, None)
        np.testing.assert_allclose(blend, blend_oracle(x), atol=1e-9)
        weak = int(np.argmin(np.abs(x)))
        assert blend[weak] == pytest.approx(spa[weak], abs=1e-9)
        others = np.delete(np.arange(x.size), weak)
        assert np.all(np.abs(blend[others]) <= np.abs(spa[others]) + 1e-9)
        msa = cn_update_msa(x, None)
        assert np.all(np.sign(msa) == np.sign(spa))
        assert np.all(np.abs(msa) >= np.abs(spa) - 1e-12)


def test_fold_matches_blend_weakest_edge():
    rng = np.random.default_rng(3)
    for _ in range(200):
        x = rng.normal(2.0, 5.0, size=int(rng.integers(2, 11)))
        q = quantize_array(x)
        k = int(np.argmin(np.abs(q)))
        assert cn_update_blend(x)[k] == box_plus_fold(np.delete(q, k))
        assert abs(box_plus_fold(q) - exact_fold(q)) <= 2 * D
    assert box_plus_fold([2.0, -3.5], None) == pytest.approx(box_plus(2.0, -3.5, None))
    with pytest.raises(ValueError):
        box_plus_fold([])


@pytest.mark.parametrize("inputs, ok", [
    ([1.0, 2.0, 3.0], True),
    ([-1.0, 2.0, 3.0], False),
    ([-1.0, -2.0, 3.0], True),
    ([0.0, -2.0, 3.0], True),
])
def test_check_parity(inputs, ok):
    assert check_parity(inputs) is ok


@pytest.fixture(scope="module")
def small_code():
    return sample_realization(CodeSpec(lifting=32, coupling_len=10), np.random.default_rng(2))


def random_state(real, quant, seed):
    rng = np.random.default_rng(seed)
    state = DecoderState(real, rng.normal(2.0, 3.0, size=real.n), quant)
    # arbitrary but consistent history: a few layer updates
    for layer in rng.permutation(real.spec.n_layers)[:6]:
        process_layer(state, int(layer))
    return state


@pytest.mark.parametrize("quant", [DEFAULT_QUANT, None])
def test_process_layer_matches_per_cn_oracle(small_code, quant):
    real = small_code
    theta = real.spec.lifting
    for layer in (0, 3, 7, 13):
        state = random_state(real, quant, layer)
        L0, R0 = state.posteriors.copy(), state.messages.copy()
        ok, updates = process_layer(state, layer)
        lo, hi = real.layer_ptr[layer], real.layer_ptr[layer + 1]
        L, R = L0.copy(), R0.copy()
        parity = True
        for r in range(theta):
            vns = [real.edge_vb[e] * theta + (r + real.edge_shift[e]) % theta for e in range(lo, hi)]
            q = np.array([L0[v] - R0[e, r] for v, e in zip(vns, range(lo, hi))])
            if quant is not None:
                q = np.clip(q, -SAT, SAT)
            parity &= check_parity(q)
            out = cn_update_blend(q, quant)
            for k, (v, e) in enumerate(zip(vns, range(lo, hi))):
                L[v] += out[k] - R0[e, r]
                R[e, r] = out[k]
        np.testing.assert_allclose(state.posteriors, L, atol=1e-12)
        np.testing.assert_allclose(state.messages, R, atol=1e-12)
        assert ok is parity
        assert updates == hi - lo


def test_process_layer_mask_and_accounting(small_code):
    real = small_code
    state = DecoderState(real, np.full(real.n, 5.0))
    ok, updates = process_layer(state, 7)
    assert ok and updates == 10
    before = state.messages.copy()
    ok, updates = process_layer(state, 7, mask={14, 15})
    assert updates == 2
    lo = real.layer_ptr[7]
    untouched = [e for e in range(lo, real.layer_ptr[8]) if real.edge_vb[e] not in (14, 15)]
    np.testing.assert_array_equal(state.messages[untouched], before[untouched])
    with pytest.raises(ValueError):
        process_layer(state, 7, mask={0})


def test_update_count_independent_of_lifting():
    counts = []
    for theta in (32, 64):
        real = sample_realization(CodeSpec(lifting=theta, coupling_len=10), np.random.default_rng(0))
        state = DecoderState(real, np.ones(real.n))
        counts.append([process_layer(state, l)[1] for l in range(real.spec.n_layers)])
    assert counts[0] == counts[1]


def test_reference_conservation(small_code):
    rng = np.random.default_rng(4)
    state = DecoderState(small_code, rng.normal(1.5, 3.0, size=small_code.n), None)
    for sweep in range(3):
        for layer in range(small_code.spec.n_layers):
            process_layer(state, layer)
            assert state.conservation_error() < 1e-9


def test_fixed_point_conservation_exact(small_code):
    state = random_state(small_code, DEFAULT_QUANT, 9)
    assert state.conservation_error() == 0.0
    assert np.all(np.abs(state.messages) <= SAT)


def test_parity_detects_flip(small_code):
    state = DecoderState(small_code, np.full(small_code.n, 4.0))
    assert all(process_layer(state, l)[0] for l in range(small_code.spec.n_layers))
    state.posteriors[100] = -50.0
    flags = [process_layer(state, l)[0] for l in range(small_code.spec.n_layers)]
    assert not all(flags)


def test_hard_decisions(small_code):
    state = DecoderState(small_code, np.zeros(small_code.n))
    state.posteriors[:3] = [3.0, -D, 0.0]
    np.testing.assert_array_equal(hard_decisions(state, slice(0, 3)), [0, 1, 0])


def test_state_validation(small_code):
    with pytest.raises(ValueError):
        DecoderState(small_code, np.zeros(5))


def test_quant_spec_custom():
    q = QuantSpec(step=0.25, max_steps=63, guard_bits=0)
    assert q.max_value == 15.75
    assert quantize(100.0, q).value == 15.75
