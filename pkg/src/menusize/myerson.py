"""Optimal posted prices for a single item with finite support."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from menusize.core import Menu
from menusize.dist import ProductDist, SingleDist


@dataclass(frozen=True)
class ItemPricing:
    price: float
    sell_prob: float
    revenue: float


def myerson_price(F: SingleDist) -> ItemPricing:
    """Revenue-maximizing take-it-or-leave-it price.

    Only support values are candidates. Among optimal prices the smallest is
    returned, which maximizes the sale probability.
    """
    tail = F.tail()
    rev = F.values * tail
    k = int(np.argmax(rev))  # first maximizer = smallest price
    return ItemPricing(float(F.values[k]), float(tail[k]), float(rev[k]))


def srev(F: ProductDist) -> float:
    """Revenue of selling every item separately at its optimal price."""
    return math.fsum(myerson_price(d).revenue for d in F.items)


def posted_price_menu(price: float) -> Menu:
    return Menu([((1.0,), price)])
