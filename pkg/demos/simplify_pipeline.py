"""
Shrinking an optimal menu
=========================

Start from the exact optimal menu of a small two-item instance, push it
through the simplification chain, and watch the revenue at every stage.
"""

import numpy as np

from menusize import ProductDist, SingleDist, expand, pipeline, rev_opt, revenue_exact
from menusize.core import menu_size

# two independent items with small supports; the second has a rare high value
F = ProductDist((
    SingleDist([1.0, 2.0, 4.0], [0.5, 0.3, 0.2]),
    SingleDist([0.0, 3.0, 60.0], [0.6, 0.38, 0.02]),
))
full = expand(F)
print(f"optimal revenue: {rev_opt(full):.4f}")

# the pipeline solves the LP on the conditioned distribution itself
menu, diag = pipeline(F, eps=0.5)

# revenues are reported in the original currency on the conditioned instance
for stage, rev in diag.stage_revenue.items():
    print(f"{stage:>12}: {rev:.4f}")

# the thresholds that drive the chain
print(f"eps_tilde={diag.eps_tilde:.4f}  H={diag.H:.1f}  E={diag.E:.1f}")
print(f"grid: X={diag.grid.X}  P={diag.grid.P}")

# the final menu is evaluated on the unconditioned distribution
print(f"final menu size {menu_size(menu)}, revenue {revenue_exact(menu, full):.4f}")
for entry in menu.entries[:6]:
    print("   ", np.round(entry.alloc, 6), round(entry.price, 6))
