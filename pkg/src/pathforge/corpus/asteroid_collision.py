from typing import List


def asteroidCollision(asteroids: List[int]) -> List[int]:
    stack = []
    for a in asteroids:
        alive = True
        while alive and a < 0 and len(stack) > 0 and stack[-1] > 0:
            if stack[-1] < -a:
                stack.pop()
            elif stack[-1] == -a:
                stack.pop()
                alive = False
            else:
                alive = False
        if alive:
            stack.append(a)
    return stack
