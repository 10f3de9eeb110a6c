def classify(x: int, strict: bool) -> int:
    if 0 < x < 10:
        return 1
    if strict and abs(x) > 3:
        return -1
    if not strict and x % 3 == 0:
        return 2
    return 0
