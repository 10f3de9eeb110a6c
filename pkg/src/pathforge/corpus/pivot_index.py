from typing import List


def pivotIndex(nums: List[int]) -> int:
    total = 0
    for x in nums:
        total += x
    left = 0
    for i in range(len(nums)):
        if left * 2 + nums[i] == total:
            return i
        left += nums[i]
    return -1
