def bucketOf(value: int, width: int) -> int:
    if width == 0:
        return -1
    b = value // width
    r = value % width
    if r < 0:
        return -2
    return b
