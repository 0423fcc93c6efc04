import math
from decimal import ROUND_HALF_UP, Decimal

from ..constants import CEIL_EPS


def ceil_count(value: float) -> int:
    """Smallest integral device count covering ``value``; absorbs float noise."""
    if value <= CEIL_EPS:
        return 0
    return math.ceil(value - CEIL_EPS)


def round_half_up(value: float) -> int:
    return int(Decimal(repr(round(value, 9))).quantize(Decimal("1"), rounding=ROUND_HALF_UP))
