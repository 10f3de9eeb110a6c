from typing import List


def removeStars(codes: List[int]) -> List[int]:
    out = []
    dropped = 0
    for c in codes:
        if c == 0:
            if out:
                last = out.pop()
                if last < 0:
                    dropped += 1
        else:
            out.append(c)
    if dropped > 1:
        out.append(dropped)
    return out
