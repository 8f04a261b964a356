# %% [markdown]
# The check-node rule
#
# Min-sum against the blend used by the decoder, with exact sum-product as
# the yardstick.  In the blend the weakest edge gets the exact extrinsic
# value and every other edge the magnitude of the fold over all inputs.

# %%
import numpy as np

from scldpc.kernel import box_plus, cn_update_blend, cn_update_msa, quantize, spa_extrinsic

x = [2.0, -3.5, 1.0]
print("spa   ", np.round(spa_extrinsic(x), 4))
print("msa   ", cn_update_msa(x, None))
print("blend ", np.round(cn_update_blend(x, None), 4))
print("blend (fixed point)", cn_update_blend(x))

# %% Quantization: step 1/16, 10-bit magnitude
for v in (0.0, -1.03, 0.5 / 16, 1e6):
    q = quantize(v)
    print(f"{v:>10}: sign={q.sign:+d} magnitude={q.magnitude:4d} value={q.value}")

# %% Box-plus on the grid against the exact value
a, b = 2.0, -3.5
print("exact", box_plus(a, b, None), " fixed", box_plus(a, b).value)

# %% Min-sum overestimates; the blend stays at or below the exact magnitude
rng = np.random.default_rng(0)
over, under = [], []
for _ in range(2000):
    x = rng.normal(3.0, 3.0, 10)
    spa = np.abs(spa_extrinsic(x))
    over.append(np.mean(np.abs(cn_update_msa(x, None)) - spa))
    under.append(np.mean(np.abs(cn_update_blend(x, None)) - spa))
print(f"mean |msa| - |spa|   = {np.mean(over):+.3f}")
print(f"mean |blend| - |spa| = {np.mean(under):+.3f}")
