"""
Grand bundle versus separate selling on fair coins
==================================================

Each item is worth 0 or 1 with equal odds. Selling items separately at
price 1 extracts all of the welfare, n/2. The best single price for the
whole bundle falls short, and the shortfall grows like the square root of n.
"""

import math

from menusize import CompoundMenu, bundle_price_curve, full_price_stats, posted_price_menu
from menusize.core import Menu

n = 16

# separate selling, kept as independent one-item auctions
separate = CompoundMenu(n, tuple(((i,), posted_price_menu(1.0)) for i in range(n)))
stats = full_price_stats(separate, n)
print(f"separate selling: revenue {stats.revenue}, full-price fraction {stats.fraction_full_price}")

# the grand bundle at its best price
curve = bundle_price_curve(n)
bundle = Menu.from_arrays([[1.0] * n], [curve.best_price])
bstats = full_price_stats(bundle, n)
print(f"bundle at {curve.best_price}: revenue {curve.best_revenue:.4f}, "
      f"full-price fraction {bstats.fraction_full_price:.4f}")

# the gap keeps growing
print(" n   best price   revenue    gap    gap/sqrt(n)")
for m in (16, 64, 256, 1024):
    c = bundle_price_curve(m)
    print(f"{m:4d} {c.best_price:9.1f} {c.best_revenue:11.3f} {c.gap:7.3f} {c.gap / math.sqrt(m):8.3f}")
