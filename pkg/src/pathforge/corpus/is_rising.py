from typing import List


def isRising(prices: List[int]) -> bool:
    if len(prices) < 2:
        return False
    if prices[-2] < prices[-1]:
        return True
    return False
