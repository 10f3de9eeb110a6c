from typing import List


def missingNumber(nums: List[int]) -> int:
    n = len(nums)
    expected = n * (n + 1) // 2
    actual = 0
    for x in nums:
        actual += x
    return expected - actual
