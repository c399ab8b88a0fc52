"""
One bit per sale
================

A deterministic single-item menu needs ceil(log2(size)) bits to name the
buyer's entry. With a shared random threshold one bit is enough: the seller
draws a price from the allocation curve and the buyer says yes or no.
"""

from menusize import Menu, cc_deterministic, simulate_public_coin

# a lottery menu: half the item for 1, the whole item for 3, or a 90% share for 2.4
M = Menu([((0.5,), 1.0), ((0.9,), 2.4), ((1.0,), 3.0)])
print(f"deterministic protocol: {cc_deterministic(M)} bits")

for v in (1.5, 3.6, 7.0):
    run = simulate_public_coin(M, v, trials=200_000, seed=1)
    print(f"v={v}: allocation {run.alloc:.4f} (menu {run.target_alloc}), "
          f"payment {run.payment:.4f} (menu {run.target_payment})")
print("thresholds used:", run.breakpoints)
