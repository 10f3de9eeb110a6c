from typing import List


def maxSubArray(nums: List[int]) -> int:
    best = nums[0]
    cur = 0
    for x in nums:
        if cur < 0:
            cur = 0
        cur += x
        if cur > best:
            best = cur
    return best
