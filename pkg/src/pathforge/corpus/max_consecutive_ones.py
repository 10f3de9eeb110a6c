from typing import List


def findMaxConsecutiveOnes(nums: List[int]) -> int:
    best = 0
    run = 0
    for x in nums:
        if x == 1:
            run += 1
            if run > best:
                best = run
        else:
            run = 0
    return best
