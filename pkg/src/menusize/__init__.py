"""Menu-size tools for selling several items to one additive buyer.

Exact revenue of finite menus, optimal menus by linear programming, the
simplification chain that shrinks a near-optimal menu to a bounded size,
and compound auctions that approach separate-selling revenue.
"""

from menusize.core import (ChoiceResult, Menu, MenuEntry, best_response, choose, menu_size,
                           payments, revenue_exact, revenue_mc, separate_sale_menu, utility)
from menusize.dist import (EuRegion, JointDist, ProductDist, SingleDist, compute_H, condition_eu,
                           eu_contains, eu_mask, expand, product_joint, sample, sample_many)
from menusize.errors import (DimensionMismatch, GuardExceeded, MenuSizeError, NonMonotoneAllocation,
                             PreconditionError, SolverFailure, SupportTooLarge, ZeroMass)
from menusize.experiments import (BundleCurve, FullPriceStats, bundle_price_curve, cc_deterministic,
                                  check_sum_rev, full_price_stats, simulate_public_coin, uniform01)
from menusize.myerson import ItemPricing, myerson_price, posted_price_menu, srev
from menusize.oracle import LpSolution, LpStatus, opt_menu_lp, rev_opt
from menusize.simplify import (GridParams, TrimReport, compute_E_exclusive, discretize_cheap,
                               make_exclusive, pipeline, pipeline_correlated, restrict_to_chosen,
                               round_down, trim_expensive)
from menusize.srev import (Buckets, CompoundMenu, bucketize, build_srev_auction, compound_revenue,
                           count_choices, pack_sparse)

__version__ = "0.1.0"
