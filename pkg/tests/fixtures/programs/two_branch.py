def sign_bucket(x: int) -> int:
    if x > 3:
        return 1
    return 0
