from typing import List


def firstNegativeIndex(nums: List[int]) -> int:
    idx = -1
    i = 0
    while i < len(nums):
        if nums[i] >= 0:
            i += 1
            continue
        idx = i
        break
    return idx
