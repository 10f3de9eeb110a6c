from typing import List


def nextGreater(nums: List[int]) -> List[int]:
    res = []
    for x in nums:
        res.append(-1)
    stack = []
    for i in range(len(nums) - 1, -1, -1):
        while stack and stack[-1] <= nums[i]:
            stack.pop()
        if stack:
            res[i] = stack[-1]
        stack.append(nums[i])
    return res
