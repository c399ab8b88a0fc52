"""
A compound auction close to separate selling
============================================

Separate selling of n items has up to 2**n - 1 outcomes. Grouping items by
price and selling each group as one or a few bundles keeps most of the
revenue with far fewer outcomes.
"""

import numpy as np

from menusize import ProductDist, SingleDist, build_srev_auction, compound_revenue, srev

rng = np.random.default_rng(7)
n = 48

# item values spread over several orders of magnitude, plus a few long shots
items = []
for i in range(n):
    if i % 12 == 0:
        items.append(SingleDist([0.0, 1e7], [1 - 1e-7, 1e-7]))
        continue
    scale = 10.0 ** rng.uniform(-2, 2)
    values = np.unique(np.round(rng.random(5) * 10, 2)) * scale
    items.append(SingleDist.from_pairs(values, rng.random(values.size) + 0.1))
F = ProductDist(tuple(items))

C, report = build_srev_auction(F, eps=0.5)
revenue, stderr = compound_revenue(C, F)
print(f"separate selling revenue: {srev(F):.4f}")
print(f"compound revenue:         {revenue:.4f} (stderr {stderr:.2g})")

# how the items were grouped
kinds = {}
for info in report.subauctions:
    kinds.setdefault(info.kind, []).append(len(info.items))
for kind, sizes in kinds.items():
    print(f"{kind:>7}: {len(sizes)} sub-auctions, sizes {sizes}")

print(f"bundles: {report.num_bundles}, flattened outcomes: {report.count_choices}")
print(f"separate selling would have {2**n - 1} outcomes")
