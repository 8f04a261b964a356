# %% [markdown]
# Windows, update masks and the equal-complexity budget
#
# A window covers W consecutive layers.  The VN-centered strategy updates
# only VNs of instants inside the window; CN-centered also writes to the
# instants just left behind.  Each strategy gets the same maximal number of
# block-edge updates as 200 full block iterations.

# %%
from scldpc.construction import CodeSpec
from scldpc.harness import budget_deviation, format_table, reproduce_table1
from scldpc.windowed import EtSet, Strategy, et_layer_set, n_positions, vn_mask

spec = CodeSpec(lifting=256, coupling_len=100)
W, w = 12, 40
print("window positions:", n_positions(spec, W))
for strategy in (Strategy.VN_CENTERED, Strategy.CN_CENTERED):
    masks = vn_mask(w, W, strategy, spec)
    print(strategy.value, [len(masks[l]) for l in sorted(masks)], "->", sum(map(len, masks.values())))

# %% Early termination sets at one position
for s in EtSet:
    layers = et_layer_set(w, W, spec.memory, s)
    print(f"{s.value:8s} layers {list(layers)[:1]}..{list(layers)[-1:]}  ({len(layers)} layers)")

# %% Budget table
table = reproduce_table1()
print(format_table(table))
print(f"largest N_max gap to the FBD budget: {100 * budget_deviation(table):.2f}%")
