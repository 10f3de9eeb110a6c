from typing import List


def countAbove(values: List[float], threshold: float) -> int:
    count = 0
    total = 0.0
    for v in values:
        total += v
        if v > threshold:
            count += 1
    if count > 0 and total / len(values) > threshold:
        return count
    return 0
