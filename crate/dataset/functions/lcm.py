def lcm(a, b):
    def _gcd(x, y):
        while y:
            x, y = y, x % y
        return x

    if a == 0 or b == 0:
        return 0
    return abs(a * b) // _gcd(a, b)
