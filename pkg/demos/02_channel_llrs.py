# %% [markdown]
# Channel LLRs for the all-zero codeword
#
# Bits are scrambled before 16-QAM so the symbols cover the whole
# constellation.  Four-branch MRC over Rayleigh fading, then exact log-MAP
# demapping and descrambling.

# %%
import numpy as np

from scldpc.channel import CONSTELLATION, ChannelSpec, apply_channel, generate_allzero_llrs

print("constellation energy:", np.mean(np.abs(CONSTELLATION) ** 2).round(6))
for idx in (0b0000, 0b0110, 0b1111):
    print(f"{idx:04b} -> {CONSTELLATION[idx] * np.sqrt(10):.0f} / sqrt(10)")

# %% Fading gains: E[alpha^2] = 1 whatever the branch count
rng = np.random.default_rng(0)
for branches in (1, 2, 4):
    _, alpha = apply_channel(np.zeros(50_000), ChannelSpec(10.0, branches), rng)
    print(f"branches={branches}  mean alpha^2={np.mean(alpha ** 2):.3f}  P(alpha^2 < 0.1)={np.mean(alpha ** 2 < 0.1):.4f}")

# %% LLR statistics versus SNR; the fraction of wrong signs falls fast
for snr in (0.0, 5.0, 7.0, 10.0, 15.0):
    llr = generate_allzero_llrs(40_000, ChannelSpec(snr), np.random.default_rng(1))
    print(f"{snr:5.1f} dB  mean={llr.mean():7.2f}  wrong sign={np.mean(llr < 0):.4f}  |llr|>63.9={np.mean(np.abs(llr) > 63.9375):.4f}")
