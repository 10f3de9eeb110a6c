from typing import List


def moveZeroes(nums: List[int]) -> List[int]:
    j = 0
    for i in range(len(nums)):
        if nums[i] != 0:
            tmp = nums[j]
            nums[j] = nums[i]
            nums[i] = tmp
            j += 1
    return nums
